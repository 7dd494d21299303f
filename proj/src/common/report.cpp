#include "thetafay/report.hpp"

#include <cmath>
#include <cstdio>

namespace thetafay {

namespace {

void put_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  if (v == 0.0) v = 0.0;  // "-0" would reparse as the integer 0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void emit(const nlohmann::json& j, int indent, int level, std::string& out) {
  using T = nlohmann::json::value_t;
  auto newline = [&](int lv) {
    if (indent < 0) return;
    out += '\n';
    out.append(std::size_t(indent * lv), ' ');
  };
  switch (j.type()) {
    case T::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      // nlohmann's default object type is an ordered std::map
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(level + 1);
        out += nlohmann::json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        emit(it.value(), indent, level + 1, out);
      }
      newline(level);
      out += '}';
      return;
    }
    case T::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        newline(level + 1);
        emit(j[i], indent, level + 1, out);
      }
      newline(level);
      out += ']';
      return;
    }
    case T::number_float:
      put_number(out, j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump17(const nlohmann::json& j, int indent) {
  std::string out;
  emit(j, indent, 0, out);
  return out;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json to_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

nlohmann::json to_json(const CVec& v) {
  auto a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
  return a;
}

nlohmann::json to_json(const CMat& m) {
  auto a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(to_json(m(i, k)));
    a.push_back(row);
  }
  return a;
}

nlohmann::json to_json(const IVec& v) {
  auto a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

nlohmann::json to_json(const IMat& m) {
  auto a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    a.push_back(row);
  }
  return a;
}

cplx cplx_from_json(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_object() && j.contains("re")) return {j.at("re").get<double>(), j.value("im", 0.0)};
  throw std::invalid_argument("expected a complex number, got " + j.dump());
}

CVec cvec_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected an array of complex numbers");
  CVec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = cplx_from_json(j[i]);
  return v;
}

CMat cmat_from_json(const nlohmann::json& j) {
  if (j.is_number() || (j.is_array() && j.size() == 2 && j[0].is_number()))
    return CMat::Constant(1, 1, cplx_from_json(j));
  if (!j.is_array() || j.empty()) throw std::invalid_argument("expected a complex matrix");
  const std::size_t n = j.size();
  CMat m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_array() || j[i].size() != n) throw std::invalid_argument("complex matrix must be square");
    for (std::size_t k = 0; k < n; ++k) m(i, k) = cplx_from_json(j[i][k]);
  }
  return m;
}

}  // namespace thetafay
