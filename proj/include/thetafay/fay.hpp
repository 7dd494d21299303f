#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "thetafay/surface.hpp"

namespace thetafay {

// Uniform sample from the cell 2 pi i [0,1)^g + B [0,1)^g.  Uses raw 53-bit
// draws so the stream is identical across standard libraries.
CVec sample_cell(const RiemannMatrix& B, std::mt19937_64& rng);
double uniform01(std::mt19937_64& rng);

// <grad Theta[delta](0), v>
cplx odd_gradient_pairing(const SurfaceModel& s, const CVec& v);
// h_delta(p) = sqrt(<grad Theta[delta](0), V_p>), principal branch.
cplx spinor_h(const SurfaceModel& s, const PointJet& jet);

// E(x, y) from w = int_y^x and h(x), h(y).
ScaledComplex prime_form(const SurfaceModel& s, const CVec& w, cplx hx, cplx hy);
ScaledComplex prime_form(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b,
                         const PathSpec& path = {});

struct FayScalars {
  cplx q1, q2, K1, K2;
  MarkedPoint a, b;
  AbelPath contour;   // r = int_a^b
  PointJet ja, jb;
};

FayScalars fay_scalars(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b,
                       const PathSpec& path = {});
// Core evaluation from prepared data; r = int_a^b.
FayScalars fay_scalars(const SurfaceModel& s, const PointJet& ja, const PointJet& jb, const CVec& r);

// |lhs - rhs| / max term for D_a D_b ln Theta(z) = q1 + q2 Theta(z+r) Theta(z-r) / Theta(z)^2
double degenerate_identity_residual(const SurfaceModel& s, const FayScalars& f, const CVec& z);
// five-term sum of the a-point degeneration, normalized by its largest term
double new_identity_residual(const SurfaceModel& s, const FayScalars& f, const CVec& z);
// f_{(b,a)}(z) built from the scalars of the swapped pair (b, a); constant in z.
cplx constancy_function(const SurfaceModel& s, const FayScalars& fba, const CVec& z);

struct ConstancyScan {
  cplx mean;
  double relStd = 0;       // std / |mean|
  double k2Deviation = 0;  // |K2(b,a) + mean| / |K2(b,a)|
  std::vector<cplx> values;
};
ConstancyScan constancy_scan(const SurfaceModel& s, const FayScalars& fba, int samples, std::uint64_t seed);

// Four points with a common Abel lift: mu[i] = int_{p0}^{p_i}, h[i] = h_delta(p_i).
struct TrisecantData {
  std::array<MarkedPoint, 4> pts;
  std::array<CVec, 4> mu;
  std::array<cplx, 4> h;
};
TrisecantData trisecant_data(const SurfaceModel& s, const std::array<MarkedPoint, 4>& pts);
double trisecant_residual(const SurfaceModel& s, const TrisecantData& d, const CVec& z);
double trisecant_residual(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b,
                          const MarkedPoint& c, const MarkedPoint& d, const CVec& z);

// q2 as the limit -(k_a(a~) k_b(b~))^{-1} exp(int_{a~}^{b~} Omega_{b-a}) with
// offsets 1e-2 / 4^i, i < shrinkSteps, Richardson-extrapolated.
struct Q2Oracle {
  cplx value;
  std::vector<cplx> raw;        // unextrapolated estimates
  double contraction = 0;       // |raw[n-1]-raw[n-2]| / |raw[n-2]-raw[n-3]|
  double spread = 0;            // last two extrapolation levels, relative
};
Q2Oracle q2_integral_oracle(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b, int shrinkSteps = 3,
                            const PathSpec& path = {});

}  // namespace thetafay
