#pragma once

#include <functional>
#include <vector>

#include "thetafay/surface.hpp"

namespace thetafay::detail {

// Multi-valued algebraic function y(lambda) seen by the path engine.
struct CurveView {
  std::function<std::vector<cplx>(cplx)> roots;
  // roots at lambda = branch[i] + delta, evaluated without forming lambda - branch[i]
  std::function<std::vector<cplx>(int, cplx)> rootsNear;
  std::vector<cplx> branch;
  std::vector<int> ramification;
};

class SheetMismatch : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Track the root nearest to y0 from lambda0 to lambda1 with step halving.
cplx track(const CurveView& cv, cplx lambda0, cplx y0, cplx lambda1);
cplx track_near(const CurveView& cv, int bi, cplx delta0, cplx y0, cplx delta1);
cplx nearest(const std::vector<cplx>& cands, cplx y);

using Integrand = std::function<CVec(cplx lambda, cplx y)>;

struct PathNode {
  cplx lambda;
  int branch = -1;
};

struct PathResult {
  CVec value;
  cplx yEnd{0.0, 0.0};
};

// Integrate along a polyline.  Regular endpoints need y; legs ending at a
// branch node use lambda = e + D s^q.  Runs between a regular endpoint and a
// branch node are tracked from the regular end; a regular run between two
// branch nodes starts on the principal root at its first node.
PathResult integrate_path(const CurveView& cv, const std::vector<PathNode>& nodes, cplx yStart,
                          const cplx* yEnd, const Integrand& f, int dim,
                          const std::vector<cplx>& extraSingular, int order = 16);

// Closed loop of points around c (polygon approximation of a circle).
std::vector<cplx> circle_points(cplx c, double radius, double phase, int n, bool ccw);

// Cauchy coefficients c_0..c_2 of G(k) on |k| = rho; values sampled at
// k_j = rho exp(2 pi i j / N).
void cauchy_coefficients(const std::vector<CVec>& samples, double rho, CVec& c0, CVec& c1, CVec& c2);

bool segments_cross(cplx p0, cplx p1, cplx q0, cplx q1);
double distance_to_segment(cplx p, cplx a, cplx b);

}  // namespace thetafay::detail
