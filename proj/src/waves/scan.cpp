#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "thetafay/report.hpp"
#include "thetafay/waves.hpp"
#include "waves_common.hpp"

namespace thetafay {

void ResidualReport::finish() {
  maxAbs = 0.0;
  for (const auto& e : perEquation) maxAbs = std::max(maxAbs, e.maxAbs);
  relToFieldScale = fieldScale > 0 ? maxAbs / fieldScale : maxAbs;
}

nlohmann::json ResidualReport::to_json() const {
  auto eqs = nlohmann::json::array();
  for (const auto& e : perEquation)
    eqs.push_back({{"name", e.name}, {"maxAbs", e.maxAbs}, {"termScale", e.termScale},
                   {"relToTermScale", e.relToTermScale()}});
  nlohmann::json j = {{"maxAbs", maxAbs},
                      {"fieldScale", fieldScale},
                      {"relToFieldScale", relToFieldScale},
                      {"perEquation", eqs},
                      {"grid", grid.to_json()},
                      {"method", method},
                      {"skipped", skipped}};
  if (fd.done) j["finiteDifference"] = {{"probeIndex", fd.index}, {"step", fd.step}, {"maxRel", fd.maxRel}};
  return j;
}

nlohmann::json SmoothnessReport::to_json() const {
  return {{"minAbsTheta", minAbsTheta},
          {"medianAbsTheta", medianAbsTheta},
          {"minLogAbs", minLogAbs},
          {"argmin", argmin},
          {"divisorHits", divisorHits}};
}

SmoothnessReport smoothness_scan_args(const SurfaceModel& s, const std::vector<CVec>& args, bool parallel) {
  const std::size_t n = args.size();
  if (n == 0) throw std::invalid_argument("empty smoothness grid");
  std::vector<double> norm(n), logs(n);
  detail::for_each_point(n, parallel, [&](std::size_t i) {
    LogThetaStack L(s, args[i], {});
    norm[i] = L.normalized_abs();
    logs[i] = L.value().log_abs();
  });
  SmoothnessReport rep;
  rep.argmin = std::size_t(std::min_element(norm.begin(), norm.end()) - norm.begin());
  rep.minAbsTheta = norm[rep.argmin];
  rep.minLogAbs = logs[rep.argmin];
  std::vector<double> sorted = norm;
  std::nth_element(sorted.begin(), sorted.begin() + long(n / 2), sorted.end());
  rep.medianAbsTheta = sorted[n / 2];
  for (double v : norm)
    if (v < 1e-10 * rep.medianAbsTheta) ++rep.divisorHits;
  return rep;
}

SmoothnessReport smoothness_scan(const DsBundle& b, const GridSpec& grid, bool parallel) {
  std::vector<CVec> args(grid.size());
  for (std::size_t i = 0; i < args.size(); ++i) {
    cplx xi, eta, t;
    b.map(grid.point(i), xi, eta, t);
    args[i] = b.Z(xi, eta, t) - b.params.d;
  }
  return smoothness_scan_args(*b.surface, args, parallel);
}

SmoothnessReport smoothness_scan(const NnlsBundle& b, const GridSpec& grid, bool parallel) {
  if (grid.axes.size() != 2) throw std::invalid_argument("n-NLS grids have two axes (x, t)");
  std::vector<CVec> args(grid.size());
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto p = grid.point(i);
    args[i] = b.Z(p[0], p[1]) - b.d;
  }
  return smoothness_scan_args(*b.surface, args, parallel);
}

CVec divisor_shift(const SurfaceModel& s, const CVec& w0, const CVec& d0, const CVec& v) {
  // f(u) = Theta(w0 - d0 - u v).  Plain Newton is dragged along by the
  // exponential growth of Theta, so seed from the smallest lattice-normalized
  // |Theta| on a grid covering a cell and cap the step.
  const double L = std::max(cell_crossing_extent(s.riemann(), v), cell_crossing_extent(s.riemann(), kI * v));
  constexpr int kSeedGrid = 41;
  std::vector<std::pair<double, cplx>> seeds;
  for (int i = 0; i < kSeedGrid; ++i)
    for (int j = 0; j < kSeedGrid; ++j) {
      const cplx u(L * (2.0 * i / (kSeedGrid - 1) - 1.0), L * (2.0 * j / (kSeedGrid - 1) - 1.0));
      seeds.push_back({LogThetaStack(s, w0 - d0 - u * v, {}).normalized_abs(), u});
    }
  std::sort(seeds.begin(), seeds.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  const double cap = 0.1 * L;
  for (std::size_t k = 0; k < std::min<std::size_t>(seeds.size(), 8); ++k) {
    cplx u = seeds[k].second;
    for (int it = 0; it < 60; ++it) {
      LogThetaStack L1(s, w0 - d0 - u * v, {v});
      cplx step = 1.0 / (-L1.d(1u));  // f / f' = 1 / (ln f)'
      if (std::abs(step) > cap) step *= cap / std::abs(step);
      u -= step;
      if (std::abs(step) < 1e-14 * (1.0 + std::abs(u))) break;
    }
    LogThetaStack chk(s, w0 - d0 - u * v, {});
    if (chk.vanishing() < 1e-12) return d0 + u * v;
  }
  throw NumericalError("divisor root scan did not converge");
}

double cell_crossing_extent(const RiemannMatrix& B, const CVec& flow) {
  RVec n, m;
  lattice_coordinates(B, flow, n, m);
  const double rate = std::max(n.cwiseAbs().maxCoeff(), m.cwiseAbs().maxCoeff());
  if (!(rate > 0)) throw NumericalError("flow vector has no lattice component");
  return 1.0 / rate;
}

void write_field_csv(const std::string& path, const GridSpec& grid, const std::vector<FieldColumn>& cols) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << std::setprecision(17);
  for (std::size_t k = 0; k < grid.axes.size(); ++k) out << (k ? "," : "") << grid.axes[k].name;
  for (const auto& c : cols) out << ",Re " << c.name << ",Im " << c.name << ",abs " << c.name;
  out << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto p = grid.point(i);
    for (std::size_t k = 0; k < p.size(); ++k) out << (k ? "," : "") << p[k];
    for (const auto& c : cols) out << ',' << c.values[i].real() << ',' << c.values[i].imag() << ',' << std::abs(c.values[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<FieldColumn> sample_ds(const DsBundle& b, const GridSpec& grid) {
  std::vector<FieldColumn> cols{{"psi", {}}, {"psiStar", {}}, {"phi", {}}};
  for (auto& c : cols) c.values.resize(grid.size());
  detail::for_each_point(grid.size(), true, [&](std::size_t i) {
    const DsValues v = b.eval_grid(grid.point(i));
    cols[0].values[i] = v.psi;
    cols[1].values[i] = v.psiStar;
    cols[2].values[i] = v.phi;
  });
  return cols;
}

std::vector<FieldColumn> sample_nnls(const NnlsBundle& b, const GridSpec& grid) {
  std::vector<FieldColumn> cols;
  for (int j = 0; j < b.n(); ++j) {
    cols.push_back({"psi" + std::to_string(j + 1), std::vector<cplx>(grid.size())});
    cols.push_back({"psiStar" + std::to_string(j + 1), std::vector<cplx>(grid.size())});
  }
  detail::for_each_point(grid.size(), true, [&](std::size_t i) {
    const auto p = grid.point(i);
    const NnlsValues v = b.eval(p[0], p[1]);
    for (int j = 0; j < b.n(); ++j) {
      cols[2 * j].values[i] = v.psi[j];
      cols[2 * j + 1].values[i] = v.psiStar[j];
    }
  });
  return cols;
}

std::vector<FieldColumn> sample_nls(const NlsBundle& b, const GridSpec& grid) {
  std::vector<FieldColumn> cols{{"psi", std::vector<cplx>(grid.size())}};
  detail::for_each_point(grid.size(), true, [&](std::size_t i) {
    const auto p = grid.point(i);
    cols[0].values[i] = b.psi(p[0], p[1]);
  });
  return cols;
}

}  // namespace thetafay
