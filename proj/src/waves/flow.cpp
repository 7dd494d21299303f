#include "thetafay/flow.hpp"

#include <cmath>

namespace thetafay {

void lattice_coordinates(const RiemannMatrix& B, const CVec& v, RVec& n, RVec& m) {
  // Re v = Re(B) m = -Y m,  Im v = 2 pi n + Im(B) m
  m = -(B.y_inverse() * v.real());
  n = (v.imag() - B.matrix().imag() * m) / (2.0 * kPi);
}

CellReduction reduce_to_cell(const RiemannMatrix& B, const CVec& w) {
  RVec n, m;
  lattice_coordinates(B, w, n, m);
  CellReduction out;
  const int g = B.genus();
  out.M.resize(g);
  out.N.resize(g);
  for (int i = 0; i < g; ++i) out.M(i) = int(std::lround(m(i)));
  CVec wb = w - B.matrix() * out.M.cast<double>().cast<cplx>();
  for (int i = 0; i < g; ++i) out.N(i) = int(std::lround(wb(i).imag() / (2.0 * kPi)));
  out.w = wb - (2.0 * kPi * kI) * out.N.cast<double>().cast<cplx>();
  return out;
}

namespace {

CellReduction maybe_reduce(const RiemannMatrix& B, const CVec& w, bool reduce) {
  if (reduce) return reduce_to_cell(B, w);
  return {w, IVec::Zero(B.genus()), IVec::Zero(B.genus())};
}

}  // namespace

LogThetaStack::LogThetaStack(const SurfaceModel& s, const CVec& w, const DerivativeSpec& dirs, bool reduce)
    : LogThetaStack(s, maybe_reduce(s.riemann(), w, reduce), dirs) {}

LogThetaStack::LogThetaStack(const SurfaceModel& s, const CellReduction& red, const DerivativeSpec& dirs)
    : jet_(s.riemann(), HalfCharacteristic::zero(s.genus()), red.w, dirs, s.theta_tol()) {
  CVec M = red.M.cast<double>().cast<cplx>();
  shift_.resize(dirs.size());
  for (std::size_t k = 0; k < dirs.size(); ++k) shift_[k] = -bdot(dirs[k], M);
  factor_ = ScaledComplex::from_exp(-0.5 * bdot(s.B() * M, M) - bdot(red.w, M));
  normAbs_ = thetafay::normalized_abs(jet_.value(), red.w, s.riemann());
}

cplx LogThetaStack::d(unsigned mask) const {
  cplx v = jet_.log_derivative(mask);
  if (mask && (mask & (mask - 1)) == 0) v += shift_[std::size_t(__builtin_ctz(mask))];
  return v;
}

ScaledComplex LogThetaStack::value() const { return jet_.value() * factor_; }

}  // namespace thetafay
