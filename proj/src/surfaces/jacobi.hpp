#pragma once

#include "thetafay/types.hpp"

namespace thetafay::detail {

// theta_1(x | tau) = 2 sum_{n>=0} (-1)^n q^{(n+1/2)^2} sin((2n+1)x),  q = e^{i pi tau}
cplx jacobi_theta1(cplx x, cplx tau);
cplx jacobi_theta1_prime(cplx x, cplx tau);

}  // namespace thetafay::detail
