#pragma once

#include "thetafay/surface.hpp"

namespace thetafay {

// w = w_red + 2 pi i N + B M with w_red in the fundamental cell around 0.
struct CellReduction {
  CVec w;
  IVec N, M;
};
CellReduction reduce_to_cell(const RiemannMatrix& B, const CVec& w);

// Real lattice coordinates (n, m) of a vector: v = 2 pi i n + B m.
void lattice_coordinates(const RiemannMatrix& B, const CVec& v, RVec& n, RVec& m);

// Derivatives of ln Theta(w) along a fixed direction list.  With reduce the
// jet is evaluated at the reduced argument and the linear lattice factor is
// added back, so large flows do not lose digits to moment cancellation.
class LogThetaStack {
 public:
  LogThetaStack(const SurfaceModel& s, const CVec& w, const DerivativeSpec& dirs, bool reduce = true);

  cplx d(unsigned mask) const;        // derivative of ln Theta along the masked directions
  ScaledComplex value() const;        // Theta(w) including the lattice factor
  double vanishing() const { return jet_.vanishing_ratio(); }
  double normalized_abs() const { return normAbs_; }

 private:
  LogThetaStack(const SurfaceModel& s, const CellReduction& red, const DerivativeSpec& dirs);

  ThetaJet jet_;
  std::vector<cplx> shift_;  // -<v_j, M> per direction
  ScaledComplex factor_;
  double normAbs_ = 0.0;
};

}  // namespace thetafay
