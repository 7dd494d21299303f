#pragma once

#include <cstdint>
#include <vector>

#include "thetafay/types.hpp"

namespace thetafay {

// Complex number stored as mantissa * exp(logScale). Keeps |mantissa| in
// [0.5, 1) unless the value is zero.
struct ScaledComplex {
  cplx mantissa{0.0, 0.0};
  double logScale = 0.0;

  ScaledComplex() = default;
  ScaledComplex(cplx m, double ls);
  static ScaledComplex from_exp(cplx exponent);

  bool is_zero() const { return mantissa == cplx(0.0, 0.0); }
  double log_abs() const;   // -inf for zero
  cplx value() const;       // may overflow to inf
  cplx log() const;         // principal log of the phase, exact log modulus

  ScaledComplex operator*(const ScaledComplex& o) const;
  ScaledComplex operator/(const ScaledComplex& o) const;
  ScaledComplex operator+(const ScaledComplex& o) const;
  ScaledComplex operator-(const ScaledComplex& o) const;
  ScaledComplex operator-() const { return {-mantissa, logScale}; }
  ScaledComplex scaled(cplx c) const;
};

// Plain ratio a/b, finite whenever the quotient is representable.
cplx ratio(const ScaledComplex& a, const ScaledComplex& b);

class RiemannMatrix {
 public:
  // Throws std::invalid_argument unless B is square, symmetric to 1e-10
  // relative and Re B is negative definite.
  explicit RiemannMatrix(const CMat& B);

  int genus() const { return static_cast<int>(B_.rows()); }
  const CMat& matrix() const { return B_; }
  const RMat& y() const { return Y_; }          // -Re B
  const RMat& y_inverse() const { return Yinv_; }
  const RMat& chol_upper() const { return R_; } // Y = R^T R
  double shortest_vector_bound() const { return rho_; }
  double covering_bound() const { return mu_; }
  double min_eigen_sqrt() const { return sigma_; }

 private:
  CMat B_;
  RMat Y_, Yinv_, R_;
  double rho_ = 0, mu_ = 0, sigma_ = 0;
};

struct HalfCharacteristic {
  RVec dp;   // delta'
  RVec dpp;  // delta''

  static HalfCharacteristic zero(int g);
  // Components must be 0 or 1/2.
  static HalfCharacteristic from_bits(int g, std::uint32_t bitsPrime, std::uint32_t bitsDoublePrime);
  int genus() const { return static_cast<int>(dp.size()); }
  bool is_zero() const;
  int parity() const;  // +1 even, -1 odd
};

using DerivativeSpec = std::vector<CVec>;

struct TruncationBound {
  double radius = 0;           // ellipsoid radius in the Cholesky metric
  double tolerance = 0;
  int derivativeOrder = 0;
  double shortestVector = 0;
  double coveringRadius = 0;
  double tailEstimate = 0;     // bound value at the chosen radius
};

TruncationBound truncation_radius(const RiemannMatrix& B, double tol, int derivOrder);

// Number of integer points k with |R(k - c)| <= radius.
std::size_t count_lattice_points(const RiemannMatrix& B, const RVec& center, double radius);

// Theta with characteristic and all subset moments along a fixed list of
// directions v_1..v_K:  m_S = sum_n t(n) prod_{j in S} <n + delta', v_j>.
// Log-derivatives are joint cumulants of these moments.
class ThetaJet {
 public:
  ThetaJet(const RiemannMatrix& B, const HalfCharacteristic& ch, const CVec& z,
           const DerivativeSpec& dirs, double tol);

  int directions() const { return K_; }
  ScaledComplex value() const { return moment(0); }
  ScaledComplex moment(unsigned mask) const;
  cplx ratio(unsigned mask) const;         // m_S / m_0
  cplx log_derivative(unsigned mask) const;  // joint cumulant
  // Largest term magnitude relative to the common scale: |value| / this is
  // the cancellation ratio.
  double term_scale() const { return termScale_; }
  // |Theta| / largest summand; tiny values mean z is close to the divisor.
  double vanishing_ratio() const { return termScale_ > 0 ? std::abs(m_[0]) / termScale_ : 0.0; }
  double log_scale() const { return logScale_; }
  std::size_t terms() const { return nterms_; }
  const TruncationBound& bound() const { return bound_; }

 private:
  void build_cumulants();

  int K_ = 0;
  double logScale_ = 0;
  cplx phase_{1.0, 0.0};
  std::vector<cplx> m_;      // relative to exp(logScale_) * phase_
  std::vector<cplx> kappa_;
  double termScale_ = 0;
  std::size_t nterms_ = 0;
  TruncationBound bound_;
};

ScaledComplex theta(const HalfCharacteristic& ch, const CVec& z, const RiemannMatrix& B, double tol);
ScaledComplex theta_deriv(const DerivativeSpec& dirs, const HalfCharacteristic& ch, const CVec& z,
                          const RiemannMatrix& B, double tol);
// |Theta(z + 2 pi i N + B M) / (Theta(z) exp(-1/2 <BM,M> - <z,M>)) - 1|
double quasi_periodicity_residual(const CVec& z, const IVec& N, const IVec& M, const RiemannMatrix& B,
                                  double tol);

// |Theta(w)| exp(-1/2 Re w^T Y^{-1} Re w): invariant under lattice shifts.
double normalized_abs(const ScaledComplex& th, const CVec& w, const RiemannMatrix& B);

// Batch evaluation; the parallel version uses OpenMP with indexed writes so
// output does not depend on thread count.
std::vector<ScaledComplex> theta_batch(const HalfCharacteristic& ch, const std::vector<CVec>& zs,
                                       const RiemannMatrix& B, double tol);
std::vector<ScaledComplex> theta_batch_serial(const HalfCharacteristic& ch, const std::vector<CVec>& zs,
                                              const RiemannMatrix& B, double tol);

}  // namespace thetafay
