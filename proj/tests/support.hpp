#pragma once

#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <string>

#include "thetafay/kp.hpp"
#include "thetafay/report.hpp"

namespace tsupport {

using namespace thetafay;
using J = nlohmann::json;

inline std::string config_path(const std::string& name) { return std::string(THETAFAY_CONFIG_DIR) + "/" + name; }

inline J read_bundle(const std::string& name) {
  std::ifstream in(config_path(name));
  return J::parse(in);
}

// Shipped configuration, built once per process without touching the cache.
struct Shipped {
  std::shared_ptr<SurfaceModel> s;
  J points, params;

  MarkedPoint pt(const char* key) const { return s->point_from_json(points.at(key)); }
};

inline const Shipped& shipped(const std::string& name) {
  static std::map<std::string, Shipped> cache;
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;
  BuildOptions bo;
  bo.useCache = false;
  J b = read_bundle(name);
  Shipped sh;
  sh.s = std::make_shared<SurfaceModel>(load_surface(config_path(name), bo));
  sh.points = b.value("points", J::object());
  sh.params = b.value("params", J::object());
  return cache.emplace(name, std::move(sh)).first->second;
}

inline const SurfaceModel& surf(const std::string& name) { return *shipped(name).s; }

inline GridSpec grid3(double L, int n) { return GridSpec{{{"x", -L, L, n}, {"y", -L, L, n}, {"t", -L, L, n}}}; }
inline GridSpec grid2(double L, int n) { return GridSpec{{{"x", -L, L, n}, {"t", -L, L, n}}}; }

inline double unif(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline CVec random_cvec(int g, std::mt19937_64& rng, double scale) {
  CVec v(g);
  for (int i = 0; i < g; ++i) v(i) = cplx(unif(rng, -scale, scale), unif(rng, -scale, scale));
  return v;
}

// Symmetric B with -Re B >= 2.5 I.
inline CMat random_riemann(int g, std::mt19937_64& rng) {
  RMat A(g, g), X(g, g);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      A(i, j) = unif(rng, -0.6, 0.6);
      X(i, j) = unif(rng, -1.0, 1.0);
    }
  RMat Y = A * A.transpose() + 2.5 * RMat::Identity(g, g);
  RMat Xs = 0.5 * (X + X.transpose());
  CMat B(g, g);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) B(i, j) = cplx(-Y(i, j), Xs(i, j));
  return B;
}

inline double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

}  // namespace tsupport
