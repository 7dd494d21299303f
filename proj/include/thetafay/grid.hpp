#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace thetafay {

struct GridAxis {
  std::string name;
  double lo = 0.0, hi = 0.0;
  int n = 1;

  double at(int i) const { return n <= 1 ? lo : lo + (hi - lo) * double(i) / double(n - 1); }
};

// Tensor-product grid.  Points are enumerated with the last axis fastest.
struct GridSpec {
  std::vector<GridAxis> axes;

  std::size_t size() const;
  std::vector<double> point(std::size_t index) const;
  GridSpec refined() const;  // 2n - 1 points per axis, same ranges
  nlohmann::json to_json() const;
  static GridSpec from_json(const nlohmann::json& j);
};

}  // namespace thetafay
