#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace thetafay {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using IVec = Eigen::VectorXi;
using IMat = Eigen::MatrixXi;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

// Bilinear (non-conjugating) pairing.
inline cplx bdot(const CVec& a, const CVec& b) { return (a.array() * b.array()).sum(); }

// Numerical failure that is not a caller error: divergence, ill conditioning,
// a contour that cannot be honoured.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace thetafay
