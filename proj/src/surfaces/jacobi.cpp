#include "jacobi.hpp"

#include <cmath>

namespace thetafay::detail {

cplx jacobi_theta1(cplx x, cplx tau) {
  cplx s = 0.0;
  for (int n = 0; n < 200; ++n) {
    double h = n + 0.5;
    cplx t = std::exp(kI * kPi * tau * (h * h)) * std::sin(double(2 * n + 1) * x);
    s += (n % 2 == 0 ? 2.0 : -2.0) * t;
    if (std::abs(t) < 1e-18 * std::abs(s) && n > 2) break;
  }
  return s;
}

cplx jacobi_theta1_prime(cplx x, cplx tau) {
  cplx s = 0.0;
  for (int n = 0; n < 200; ++n) {
    double h = n + 0.5;
    double k = 2 * n + 1;
    cplx t = std::exp(kI * kPi * tau * (h * h)) * k * std::cos(k * x);
    s += (n % 2 == 0 ? 2.0 : -2.0) * t;
    if (std::abs(t) < 1e-18 * std::abs(s) && n > 2) break;
  }
  return s;
}

}  // namespace thetafay::detail
