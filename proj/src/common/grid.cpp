#include "thetafay/grid.hpp"

#include <stdexcept>

namespace thetafay {

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= std::size_t(std::max(a.n, 1));
  return axes.empty() ? 0 : n;
}

std::vector<double> GridSpec::point(std::size_t index) const {
  std::vector<double> p(axes.size());
  for (std::size_t k = axes.size(); k-- > 0;) {
    const std::size_t n = std::size_t(std::max(axes[k].n, 1));
    p[k] = axes[k].at(int(index % n));
    index /= n;
  }
  return p;
}

GridSpec GridSpec::refined() const {
  GridSpec g = *this;
  for (auto& a : g.axes)
    if (a.n > 1) a.n = 2 * a.n - 1;
  return g;
}

nlohmann::json GridSpec::to_json() const {
  auto a = nlohmann::json::array();
  for (const auto& ax : axes) a.push_back({{"name", ax.name}, {"lo", ax.lo}, {"hi", ax.hi}, {"n", ax.n}});
  return a;
}

GridSpec GridSpec::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("grid must be an array of axes");
  GridSpec g;
  for (const auto& ax : j) {
    GridAxis a;
    a.name = ax.value("name", std::string("s") + std::to_string(g.axes.size()));
    a.lo = ax.at("lo").get<double>();
    a.hi = ax.at("hi").get<double>();
    a.n = ax.value("n", 5);
    if (a.n < 1 || a.n > 100000) throw std::invalid_argument("grid axis size out of range");
    g.axes.push_back(a);
  }
  return g;
}

}  // namespace thetafay
