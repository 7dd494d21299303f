#pragma once

#include <vector>

#include <json.hpp>

#include "thetafay/waves.hpp"

namespace thetafay {

// u = v + 2c, v = 2 D_a^2 ln Theta(i V x + i W y + i U t / 2 + d).  U is the
// k^2/2 coefficient of the holomorphic differentials, hence the half.
struct KpSolution {
  const SurfaceModel* surface = nullptr;
  MarkedPoint a;
  PointJet jet;
  CVec d;
  cplx c{0.0, 0.0};

  CVec z(double x, double y, double t) const { return kI * (x * jet.V + y * jet.W + 0.5 * t * jet.U) + d; }
  cplx u(double x, double y, double t) const;
  nlohmann::json provenance() const;
};

struct KpConstant {
  cplx c{0.0, 0.0};
  std::size_t probe = 0;           // grid index used for the solve
  cplx cSecond{0.0, 0.0};          // from the next best disjoint probe
  double pairDefect = 0.0;         // |c - cSecond| / (1 + |c|)
  double slope = 0.0;              // |3 v_xx| at the probe, relative to the term scale
  double verifyMaxRel = 0.0;       // worst residual at the remaining probes
  int verified = 0;
  nlohmann::json to_json() const;
};

// Solves the KP1 residual (affine in c) at the best-conditioned grid point and
// verifies the result on every other point (at least ten are required).
KpConstant kp_constant_c(const SurfaceModel& s, const MarkedPoint& a, const CVec& d, const GridSpec& probes);

KpSolution kp_solution(const SurfaceModel& s, const MarkedPoint& a, const CVec& d, cplx c);
// 3/4 u_yy - u_xt + 1/4 (6 u_x^2 + 6 u u_xx - u_xxxx)
ResidualReport kp_residual(const KpSolution& sol, const GridSpec& grid, const ResidualOptions& opt = {});

struct KpRelationReport {
  ResidualReport relation;         // |u - (gamma - 2 sum psi_j psi_j*)|
  cplx gammaFromQ1{0.0, 0.0};      // -2 sum q1 + 2c
  cplx gammaFromProbe{0.0, 0.0};   // u + 2 sum psi psi* at one probe
  double gammaDefect = 0.0;        // |difference| / (1 + |gamma|)
  double identityDefect = 0.0;     // 2 D_a^2 ln Theta vs -2 sum D_{a_{n+1}} D_{a_j} ln Theta
  nlohmann::json to_json() const;
};

// KP1 at a = a_{n+1} with d_kp = -d of the bundle; the n-NLS time variable
// plays the role of y and the KP time enters through d -> d - i U t / 2.
// With signs the real form gamma - 2 sum s_j |psi_j|^2 is checked.
KpRelationReport kp_nnls_relation_residual(const NnlsBundle& nb, cplx c, const GridSpec& grid,
                                           const std::vector<int>& signs = {}, bool parallel = true);
KpRelationReport kp_nnls_relation_residual(const SurfaceModel& s, cplx za, const NnlsParams& params, cplx c,
                                           const GridSpec& grid);

}  // namespace thetafay
