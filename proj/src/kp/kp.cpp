#include "thetafay/kp.hpp"

#include <algorithm>
#include <cmath>

#include "../waves/waves_common.hpp"
#include "thetafay/report.hpp"

namespace thetafay {

namespace {

// direction slots: x x x x x x y y t
constexpr unsigned kX2 = 0x3u, kX3 = 0x7u, kX4 = 0xFu, kX6 = 0x3Fu, kY2 = 0xC0u, kT = 0x100u;

// U is the k^2/2 coefficient, so the KP time flow carries a half
CVec kp_time_flow(const PointJet& j) { return 0.5 * j.U; }

DerivativeSpec kp_dirs(const PointJet& j) {
  const CVec fx = kI * j.V, fy = kI * j.W, ft = kI * kp_time_flow(j);
  return {fx, fx, fx, fx, fx, fx, fy, fy, ft};
}

struct KpTerms {
  cplx v, vx, vxx, vxxxx, vyy, vxt, vt;
  double vanishing = 0.0, normAbs = 0.0;

  // R(c) = R0 + 3 c v_xx
  cplx residual(cplx c) const {
    const cplx u = v + 2.0 * c;
    return 0.75 * vyy - vxt + 0.25 * (6.0 * vx * vx + 6.0 * u * vxx - vxxxx);
  }
  double scale(cplx c) const {
    const cplx u = v + 2.0 * c;
    return std::max({std::abs(0.75 * vyy), std::abs(vxt), std::abs(1.5 * vx * vx), std::abs(1.5 * u * vxx),
                     std::abs(0.25 * vxxxx)});
  }
};

// v = 2 D_a^2 ln Theta = -2 d_x^2 ln Theta(z) since d_x = i D_a along the flow.
KpTerms kp_terms(const SurfaceModel& s, const PointJet& j, const CVec& z) {
  LogThetaStack L(s, z, kp_dirs(j));
  KpTerms k;
  k.v = -2.0 * L.d(kX2);
  k.vx = -2.0 * L.d(kX3);
  k.vxx = -2.0 * L.d(kX4);
  k.vxxxx = -2.0 * L.d(kX6);
  k.vyy = -2.0 * L.d(kX2 | kY2);
  k.vxt = -2.0 * L.d(kX3 | kT);
  k.vt = -2.0 * L.d(kX2 | kT);
  k.vanishing = L.vanishing();
  k.normAbs = L.normalized_abs();
  return k;
}

void require_u(const PointJet& j) {
  if (j.U.size() == 0) throw std::invalid_argument("KP needs the U jet at the marked point");
}

}  // namespace

cplx KpSolution::u(double x, double y, double t) const {
  LogThetaStack L(*surface, z(x, y, t), {kI * jet.V, kI * jet.V});
  return -2.0 * L.d(kX2) + 2.0 * c;
}

nlohmann::json KpSolution::provenance() const {
  return {{"surfaceHash", surface->hash()}, {"a", a.describe()}, {"d", to_json(d)},     {"c", to_json(c)},
          {"V", to_json(jet.V)},            {"W", to_json(jet.W)}, {"U", to_json(jet.U)}};
}

nlohmann::json KpConstant::to_json() const {
  return {{"c", thetafay::to_json(c)},   {"probe", probe},         {"cSecond", thetafay::to_json(cSecond)},
          {"pairDefect", pairDefect}, {"slope", slope},
          {"verifyMaxRel", verifyMaxRel}, {"verified", verified}};
}

KpConstant kp_constant_c(const SurfaceModel& s, const MarkedPoint& a, const CVec& d, const GridSpec& probes) {
  if (probes.axes.size() != 3) throw std::invalid_argument("KP grids have three axes (x, y, t)");
  const std::size_t n = probes.size();
  if (n < 12) throw std::invalid_argument("KP constant needs at least 12 probe points");
  const PointJet j = point_jet(s, a);
  require_u(j);
  const CVec d0 = d.size() ? d : CVec::Zero(s.genus());
  if (d0.size() != s.genus()) throw std::invalid_argument("d has the wrong dimension");
  std::vector<KpTerms> t(n);
  detail::for_each_point(n, true, [&](std::size_t i) {
    const auto p = probes.point(i);
    t[i] = kp_terms(s, j, kI * (p[0] * j.V + p[1] * j.W + p[2] * kp_time_flow(j)) + d0);
  });
  // conditioning: slope 3 v_xx relative to the c-free term scale
  std::vector<double> cond(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double sc = t[i].scale(0.0);
    cond[i] = (t[i].vanishing < 1e-12 || sc == 0.0) ? 0.0 : std::abs(3.0 * t[i].vxx) / sc;
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return cond[l] > cond[r]; });
  if (cond[order[0]] < 1e-10) throw NumericalError("degenerate probe grid: v_xx vanishes at every probe");
  KpConstant kc;
  kc.probe = order[0];
  kc.slope = cond[order[0]];
  kc.c = -t[kc.probe].residual(0.0) / (3.0 * t[kc.probe].vxx);
  const std::size_t second = order[1];
  kc.cSecond = -t[second].residual(0.0) / (3.0 * t[second].vxx);
  kc.pairDefect = std::abs(kc.c - kc.cSecond) / (1.0 + std::abs(kc.c));
  for (std::size_t i = 0; i < n; ++i) {
    if (i == kc.probe || t[i].vanishing < 1e-12) continue;
    kc.verifyMaxRel = std::max(kc.verifyMaxRel, std::abs(t[i].residual(kc.c)) / t[i].scale(kc.c));
    ++kc.verified;
  }
  return kc;
}

KpSolution kp_solution(const SurfaceModel& s, const MarkedPoint& a, const CVec& d, cplx c) {
  KpSolution sol;
  sol.surface = &s;
  sol.a = a;
  sol.jet = point_jet(s, a);
  require_u(sol.jet);
  sol.d = d.size() ? d : CVec::Zero(s.genus());
  if (sol.d.size() != s.genus()) throw std::invalid_argument("d has the wrong dimension");
  if (sol.d.size() != s.genus()) throw std::invalid_argument("d has the wrong dimension");
  sol.c = c;
  return sol;
}

ResidualReport kp_residual(const KpSolution& sol, const GridSpec& grid, const ResidualOptions& opt) {
  if (grid.axes.size() != 3) throw std::invalid_argument("KP grids have three axes (x, y, t)");
  const std::size_t n = grid.size();
  std::vector<KpTerms> t(n);
  detail::for_each_point(n, opt.parallel, [&](std::size_t i) {
    const auto p = grid.point(i);
    t[i] = kp_terms(*sol.surface, sol.jet, sol.z(p[0], p[1], p[2]));
  });
  ResidualReport rep;
  rep.grid = grid;
  rep.perEquation = {{"kp1"}};
  std::size_t probe = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (t[i].vanishing < opt.divisorTol) {
      rep.skipped.push_back(i);
      continue;
    }
    rep.perEquation[0].maxAbs = std::max(rep.perEquation[0].maxAbs, std::abs(t[i].residual(sol.c)));
    rep.perEquation[0].termScale = std::max(rep.perEquation[0].termScale, t[i].scale(sol.c));
    rep.fieldScale = std::max(rep.fieldScale, std::abs(t[i].v + 2.0 * sol.c));
    if (t[i].normAbs > t[probe].normAbs) probe = i;
  }
  rep.finish();
  if (opt.fdCheck) {
    const auto p = grid.point(probe);
    const double h = opt.fdStep;
    const double x = p[0], y = p[1], tt = p[2];
    const cplx u0 = sol.u(x, y, tt);
    const cplx uxx = (sol.u(x + h, y, tt) - 2.0 * u0 + sol.u(x - h, y, tt)) / (h * h);
    const cplx uyy = (sol.u(x, y + h, tt) - 2.0 * u0 + sol.u(x, y - h, tt)) / (h * h);
    const cplx ut = (sol.u(x, y, tt + h) - sol.u(x, y, tt - h)) / (2.0 * h);
    const KpTerms& k = t[probe];
    const double ref = std::abs(u0);
    const double worst = std::max({std::abs(uxx - k.vxx) / std::max(std::abs(k.vxx), ref),
                                   std::abs(uyy - k.vyy) / std::max(std::abs(k.vyy), ref),
                                   std::abs(ut - k.vt) / std::max(std::abs(k.vt), ref)});
    rep.fd = {probe, h, worst, true};
  }
  return rep;
}

nlohmann::json KpRelationReport::to_json() const {
  return {{"relation", relation.to_json()},
          {"gammaFromQ1", thetafay::to_json(gammaFromQ1)},
          {"gammaFromProbe", thetafay::to_json(gammaFromProbe)},
          {"gammaDefect", gammaDefect},
          {"identityDefect", identityDefect}};
}

KpRelationReport kp_nnls_relation_residual(const NnlsBundle& nb, cplx c, const GridSpec& grid,
                                           const std::vector<int>& signs, bool parallel) {
  if (grid.axes.size() != 3) throw std::invalid_argument("KP grids have three axes (x, y, t)");
  if (!signs.empty() && int(signs.size()) != nb.n()) throw std::invalid_argument("one sign per component");
  const SurfaceModel& s = *nb.surface;
  const MarkedPoint& base = nb.fiber.back();
  const KpSolution sol = kp_solution(s, base, -nb.d, c);
  const PointJet& jb = nb.jets.back();

  KpRelationReport rep;
  rep.gammaFromQ1 = -2.0 * nb.q1Sum + 2.0 * c;

  DerivativeSpec idirs{jb.V, jb.V};
  for (int j = 0; j < nb.n(); ++j) idirs.push_back(nb.jets[j].V);
  if (idirs.size() > 12) throw std::invalid_argument("too many fiber points for the derivative stack");

  const std::size_t n = grid.size();
  std::vector<cplx> u(n), S(n);
  std::vector<double> van(n), idDef(n), norm(n);
  detail::for_each_point(n, parallel, [&](std::size_t i) {
    const auto p = grid.point(i);
    const double x = p[0], y = p[1], t = p[2];
    u[i] = sol.u(x, y, t);
    NnlsBundle shifted = nb;
    shifted.d = nb.d - kI * t * kp_time_flow(jb);
    const NnlsValues v = shifted.eval(x, y);
    cplx sum = 0.0;
    for (int j = 0; j < nb.n(); ++j) sum += signs.empty() ? v.psi[j] * v.psiStar[j] : double(signs[j]) * std::norm(v.psi[j]);
    S[i] = sum;
    van[i] = v.vanishing;
    norm[i] = v.thetaNormAbs;

    LogThetaStack L(s, sol.z(x, y, t), idirs);
    const cplx lhs = 2.0 * L.d(0x3u);
    cplx rhs = 0.0;
    double big = std::abs(lhs);
    for (int j = 0; j < nb.n(); ++j) {
      const cplx term = -2.0 * L.d(0x1u | (1u << (2 + j)));
      rhs += term;
      big = std::max(big, std::abs(term));
    }
    idDef[i] = std::abs(lhs - rhs) / big;
  });

  ResidualReport& r = rep.relation;
  r.grid = grid;
  r.method = "pointwise";
  r.perEquation = {{"u-relation"}};
  std::size_t probe = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (van[i] < 1e-12) {
      r.skipped.push_back(i);
      continue;
    }
    const cplx defect = u[i] - (rep.gammaFromQ1 - 2.0 * S[i]);
    r.perEquation[0].maxAbs = std::max(r.perEquation[0].maxAbs, std::abs(defect));
    r.perEquation[0].termScale = std::max({r.perEquation[0].termScale, std::abs(u[i]), std::abs(2.0 * S[i])});
    r.fieldScale = std::max({r.fieldScale, std::abs(u[i]), std::abs(2.0 * S[i]), std::abs(rep.gammaFromQ1)});
    rep.identityDefect = std::max(rep.identityDefect, idDef[i]);
    if (norm[i] > norm[probe]) probe = i;
  }
  r.finish();
  rep.gammaFromProbe = u[probe] + 2.0 * S[probe];
  rep.gammaDefect = std::abs(rep.gammaFromQ1 - rep.gammaFromProbe) / (1.0 + std::abs(rep.gammaFromQ1));
  return rep;
}

KpRelationReport kp_nnls_relation_residual(const SurfaceModel& s, cplx za, const NnlsParams& params, cplx c,
                                           const GridSpec& grid) {
  return kp_nnls_relation_residual(nnls_complex_solution(s, za, params), c, grid);
}

}  // namespace thetafay
