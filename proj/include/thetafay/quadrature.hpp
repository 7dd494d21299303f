#pragma once

#include <vector>

namespace thetafay {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

// Gauss-Legendre rule of order n, cached per n.
const GaussRule& gauss_legendre(int n);

}  // namespace thetafay
