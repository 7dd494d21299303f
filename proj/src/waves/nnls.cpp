#include <algorithm>
#include <cmath>

#include "thetafay/report.hpp"
#include "thetafay/waves.hpp"
#include "waves_common.hpp"

namespace thetafay {

namespace {

// direction slots: x x t
constexpr unsigned kX = 1u, kXX = 3u, kT = 4u;

CVec diag_h(const SurfaceModel& s) {
  const auto& rs = s.real_structure();
  if (!rs) throw std::invalid_argument("surface has no real structure: " + s.real_status());
  CVec d(s.genus());
  for (int i = 0; i < s.genus(); ++i) d(i) = double(rs->H(i, i));
  return d;
}

CVec real_d(const SurfaceModel& s, const RVec& dRin, const IVec& Tin) {
  const int g = s.genus();
  const RVec dR = dRin.size() ? dRin : RVec::Zero(g);
  const IVec T = Tin.size() ? Tin : IVec::Zero(g);
  if (dR.size() != g || T.size() != g) throw std::invalid_argument("dR and T need genus entries");
  return dR.cast<cplx>() + (0.5 * kI * kPi) * (diag_h(s) - 2.0 * T.cast<double>().cast<cplx>());
}

double field_max(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

// Central differences of a scalar field f(x, t) against analytic (f_t, f_xx).
template <class F>
double fd_mismatch(F f, double x, double t, double h, cplx ft, cplx fxx) {
  const cplx c = f(x, t);
  const cplx dt = (f(x, t + h) - f(x, t - h)) / (2.0 * h);
  const cplx dxx = (f(x + h, t) - 2.0 * c + f(x - h, t)) / (h * h);
  const double ref = std::abs(c);
  return std::max(std::abs(dt - ft) / std::max(std::abs(ft), ref), std::abs(dxx - fxx) / std::max(std::abs(fxx), ref));
}

}  // namespace

// ------------------------------------------------------------------ NLS

cplx NlsBundle::psi(double x, double t, bool reduce) const {
  const SurfaceModel& s = *surface;
  const CVec w = kI * (x * ja.V + t * ja.W) - d;
  LogThetaStack L0(s, w, {}, reduce), Lp(s, w + r, {}, reduce);
  const cplx ph = kI * (-G1 * x + G3 * t * 0.5) - 2.0 * kI * (q1 + 0.25 * h) * t;
  return (Lp.value() / L0.value() * ScaledComplex::from_exp(ph)).value() * amplitude;
}

nlohmann::json NlsBundle::provenance() const {
  return {{"surfaceHash", surface->hash()}, {"a", a.describe()},   {"b", b.describe()},
          {"rho", rho},                     {"A", to_json(amplitude)}, {"d", to_json(d)},
          {"q1", to_json(q1)},              {"G1", to_json(G1)},   {"G3", to_json(G3)},
          {"M", to_json(lattice.M)},        {"vGate", vGate},      {"wGate", wGate}};
}

NlsBundle nls_solution(const SurfaceModel& s, const MarkedPoint& a, const NlsOptions& opt, const PathSpec& path) {
  if (s.provider().kind() != "hyperelliptic") throw std::invalid_argument("NLS reduction needs a hyperelliptic surface");
  if (!same_point(s.tau(a), a)) throw std::invalid_argument("NLS reduction needs a tau-fixed point a");
  NlsBundle nb;
  nb.surface = &s;
  nb.a = a;
  bool found = false;
  for (const auto& p : fiber_over(s, a.lambda))
    if (!same_point(p, a)) {
      nb.b = p;
      found = true;
    }
  if (!found) throw std::invalid_argument("no hyperelliptic partner for a");
  nb.ja = point_jet(s, nb.a);
  nb.jb = point_jet(s, nb.b);
  nb.vGate = (nb.ja.V + nb.jb.V).norm() / nb.ja.V.norm();
  nb.wGate = (nb.ja.W + nb.jb.W).norm() / std::max(nb.ja.W.norm(), nb.ja.V.norm());
  if (nb.vGate > 1e-9 || nb.wGate > 1e-9)
    throw std::invalid_argument("points are not sigma-paired: |Va+Vb|/|Va| = " + std::to_string(nb.vGate));

  const AbelPath ab = abel_between(s, nb.a, nb.b, path);
  nb.r = ab.r;
  nb.fab = fay_scalars(s, nb.ja, nb.jb, ab.r);
  nb.fba = fay_scalars(s, nb.jb, nb.ja, -ab.r);
  nb.lattice = infer_lattice_pair(s, ab.r, "fixedPoints");
  nb.d = real_d(s, opt.dR, opt.T);
  const CVec M = nb.lattice.M.cast<double>().cast<cplx>();
  const cplx X = nb.fab.q2 * std::exp(0.5 * bdot(s.B() * M, M) + bdot(ab.r + nb.d, M));
  if (std::abs(X.imag()) > 1e-6 * std::abs(X)) throw NumericalError("NLS reality factor is not real");
  // kappa1 = kappa2 = 1 gives the DS sign -sign X and kappa1~ = |X|^{-1/2}.  On the
  // sigma-pair phi = q1 + h/4 - psi psi*, so the NLS sign is the opposite one.
  nb.rho = X.real() > 0 ? 1 : -1;
  const RVec dR = opt.dR.size() ? opt.dR : RVec::Zero(s.genus());
  const double absA = std::abs(nb.fab.q2) / std::sqrt(std::abs(X)) * std::exp(dR.dot(nb.lattice.M.cast<double>()));
  nb.amplitude = std::polar(absA, opt.theta);
  nb.h = opt.h;
  nb.q1 = nb.fab.q1;
  nb.G1 = nb.fab.K1;
  nb.G3 = nb.fab.K2 + nb.fba.K2 + opt.h;
  return nb;
}

ResidualReport nls_residual(const NlsBundle& nb, const GridSpec& grid, const ResidualOptions& opt) {
  if (grid.axes.size() != 2) throw std::invalid_argument("NLS grids have two axes (x, t)");
  const SurfaceModel& s = *nb.surface;
  const DerivativeSpec dirs{kI * nb.ja.V, kI * nb.ja.V, kI * nb.ja.W};
  const std::size_t n = grid.size();
  std::vector<cplx> E(n), Ft(n), Fxx(n);
  std::vector<double> sc(n), field(n), van(n), norm(n);
  detail::for_each_point(n, opt.parallel, [&](std::size_t i) {
    const auto p = grid.point(i);
    const CVec w = kI * (p[0] * nb.ja.V + p[1] * nb.ja.W) - nb.d;
    LogThetaStack L0(s, w, dirs), Lp(s, w + nb.r, dirs);
    const cplx psi = nb.psi(p[0], p[1]);
    const cplx px = Lp.d(kX) - L0.d(kX) - kI * nb.G1;
    const cplx pxx = px * px + Lp.d(kXX) - L0.d(kXX);
    const cplx pt = Lp.d(kT) - L0.d(kT) + kI * nb.G3 * 0.5 - 2.0 * kI * (nb.q1 + 0.25 * nb.h);
    const cplx t1 = kI * pt * psi, t2 = pxx * psi, t3 = 2.0 * double(nb.rho) * std::norm(psi) * psi;
    E[i] = t1 + t2 + t3;
    Ft[i] = pt * psi;
    Fxx[i] = pxx * psi;
    sc[i] = std::max({std::abs(t1), std::abs(t2), std::abs(t3)});
    field[i] = std::abs(psi);
    van[i] = L0.vanishing();
    norm[i] = L0.normalized_abs();
  });
  ResidualReport rep;
  rep.grid = grid;
  rep.perEquation = {{"nls"}};
  std::size_t probe = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (van[i] < opt.divisorTol) {
      rep.skipped.push_back(i);
      continue;
    }
    rep.perEquation[0].maxAbs = std::max(rep.perEquation[0].maxAbs, std::abs(E[i]));
    rep.perEquation[0].termScale = std::max(rep.perEquation[0].termScale, sc[i]);
    rep.fieldScale = std::max(rep.fieldScale, field[i]);
    if (norm[i] > norm[probe]) probe = i;
  }
  rep.finish();
  if (opt.fdCheck) {
    const auto p = grid.point(probe);
    rep.fd = {probe, opt.fdStep,
              fd_mismatch([&](double x, double t) { return nb.psi(x, t); }, p[0], p[1], opt.fdStep, Ft[probe], Fxx[probe]),
              true};
  }
  return rep;
}

// ------------------------------------------------------ linear Schrodinger

cplx LinearSchrodinger::psi(double x, double t) const {
  const SurfaceModel& s = *surface;
  const CVec w = kI * (x * f.ja.V + t * f.ja.W) - d;
  LogThetaStack L0(s, w, {}), Lp(s, w + f.contour.r, {});
  const cplx ph = kI * (-f.K1 * x + f.K2 * t);
  return (Lp.value() / L0.value() * ScaledComplex::from_exp(ph)).value() * A;
}

cplx LinearSchrodinger::potential(double x, double t) const {
  const CVec w = kI * (x * f.ja.V + t * f.ja.W) - d;
  LogThetaStack L0(*surface, w, {kI * f.ja.V, kI * f.ja.V});
  return L0.d(3u);
}

LinearSchrodinger linear_schrodinger(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b, const CVec& d,
                                     cplx A, const PathSpec& path) {
  LinearSchrodinger ls;
  ls.surface = &s;
  ls.f = fay_scalars(s, a, b, path);
  ls.d = d.size() ? d : CVec::Zero(s.genus());
  ls.A = A;
  return ls;
}

ResidualReport linear_schrodinger_residual(const LinearSchrodinger& ls, const GridSpec& grid,
                                           const ResidualOptions& opt) {
  if (grid.axes.size() != 2) throw std::invalid_argument("linear Schrodinger grids have two axes (x, t)");
  const SurfaceModel& s = *ls.surface;
  const DerivativeSpec dirs{kI * ls.f.ja.V, kI * ls.f.ja.V, kI * ls.f.ja.W};
  const std::size_t n = grid.size();
  std::vector<cplx> E(n), Ft(n), Fxx(n);
  std::vector<double> sc(n), field(n), van(n), norm(n);
  detail::for_each_point(n, opt.parallel, [&](std::size_t i) {
    const auto p = grid.point(i);
    const CVec w = kI * (p[0] * ls.f.ja.V + p[1] * ls.f.ja.W) - ls.d;
    LogThetaStack L0(s, w, dirs), Lp(s, w + ls.f.contour.r, dirs);
    const cplx psi = ls.psi(p[0], p[1]);
    const cplx px = Lp.d(kX) - L0.d(kX) - kI * ls.f.K1;
    const cplx pxx = px * px + Lp.d(kXX) - L0.d(kXX);
    const cplx pt = Lp.d(kT) - L0.d(kT) + kI * ls.f.K2;
    const cplx u = L0.d(kXX);
    const cplx t1 = kI * pt * psi, t2 = pxx * psi, t3 = 2.0 * u * psi;
    E[i] = t1 + t2 + t3;
    Ft[i] = pt * psi;
    Fxx[i] = pxx * psi;
    sc[i] = std::max({std::abs(t1), std::abs(t2), std::abs(t3)});
    field[i] = std::abs(psi);
    van[i] = L0.vanishing();
    norm[i] = L0.normalized_abs();
  });
  ResidualReport rep;
  rep.grid = grid;
  rep.perEquation = {{"linear"}};
  std::size_t probe = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (van[i] < opt.divisorTol) {
      rep.skipped.push_back(i);
      continue;
    }
    rep.perEquation[0].maxAbs = std::max(rep.perEquation[0].maxAbs, std::abs(E[i]));
    rep.perEquation[0].termScale = std::max(rep.perEquation[0].termScale, sc[i]);
    rep.fieldScale = std::max(rep.fieldScale, field[i]);
    if (norm[i] > norm[probe]) probe = i;
  }
  rep.finish();
  if (opt.fdCheck) {
    const auto p = grid.point(probe);
    rep.fd = {probe, opt.fdStep,
              fd_mismatch([&](double x, double t) { return ls.psi(x, t); }, p[0], p[1], opt.fdStep, Ft[probe], Fxx[probe]),
              true};
  }
  return rep;
}

// ----------------------------------------------------------------- n-NLS

NnlsValues NnlsBundle::eval(cplx x, cplx t, bool reduce) const {
  const SurfaceModel& s = *surface;
  const CVec w = Z(x, t) - d;
  LogThetaStack L0(s, w, {}, reduce);
  const ScaledComplex den = L0.value();
  NnlsValues v;
  v.thetaNormAbs = L0.normalized_abs();
  v.vanishing = L0.vanishing();
  for (int j = 0; j < n(); ++j) {
    LogThetaStack Lp(s, w + r[j], {}, reduce), Lm(s, w - r[j], {}, reduce);
    const cplx ph = kI * (-E[j] * x + F[j] * t);
    v.psi.push_back((Lp.value() / den * ScaledComplex::from_exp(ph)).value() * A[j]);
    v.psiStar.push_back((Lm.value() / den * ScaledComplex::from_exp(-ph)).value() * q2[j] / A[j]);
  }
  return v;
}

nlohmann::json NnlsBundle::provenance() const {
  auto pts = nlohmann::json::array();
  for (const auto& p : fiber) pts.push_back(p.describe());
  auto comp = nlohmann::json::array();
  for (int j = 0; j < n(); ++j)
    comp.push_back({{"E", to_json(E[j])}, {"F", to_json(F[j])}, {"A", to_json(A[j])}, {"q2", to_json(q2[j])},
                    {"r", to_json(r[j])}, {"contour", contours[j]}});
  return {{"surfaceHash", surface->hash()}, {"za", to_json(za)},       {"fiber", pts}, {"components", comp},
          {"d", to_json(d)},                {"fiberGate", fiberGate}};
}

NnlsBundle nnls_from_points(const SurfaceModel& s, const std::vector<MarkedPoint>& pts, const NnlsParams& params,
                            double gateTol) {
  if (pts.size() < 2) throw std::invalid_argument("n-NLS needs at least two fiber points");
  NnlsBundle nb;
  nb.surface = &s;
  nb.fiber = pts;
  nb.za = pts.back().lambda;
  for (const auto& p : pts) nb.jets.push_back(point_jet(s, p));
  CVec sum = CVec::Zero(s.genus());
  double vmax = 0.0;
  for (const auto& j : nb.jets) {
    sum += j.V;
    vmax = std::max(vmax, j.V.norm());
  }
  nb.fiberGate = sum.norm() / vmax;
  if (nb.fiberGate > gateTol)
    throw NumericalError("fiber gate failed: |sum V| / max |V| = " + std::to_string(nb.fiberGate));
  const int n = int(pts.size()) - 1;
  const PointJet& jb = nb.jets.back();
  nb.V = jb.V;
  nb.W = jb.W;
  nb.d = params.d.size() ? params.d : CVec::Zero(s.genus());
  if (nb.d.size() != s.genus()) throw std::invalid_argument("d has the wrong dimension");
  nb.q1Sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const AbelPath ab = abel_between(s, pts.back(), pts[j]);
    nb.r.push_back(ab.r);
    nb.contours.push_back(ab.contour);
    nb.scalars.push_back(fay_scalars(s, jb, nb.jets[j], ab.r));
    nb.q1Sum += nb.scalars.back().q1;
  }
  for (int j = 0; j < n; ++j) {
    nb.E.push_back(nb.scalars[j].K1);
    nb.F.push_back(nb.scalars[j].K2 - 2.0 * nb.q1Sum);
    nb.q2.push_back(nb.scalars[j].q2);
    const cplx A = j < int(params.A.size()) ? params.A[j] : cplx(1.0);
    if (A == 0.0) throw std::invalid_argument("amplitudes must be nonzero");
    nb.A.push_back(A);
  }
  return nb;
}

NnlsBundle nnls_complex_solution(const SurfaceModel& s, cplx za, const NnlsParams& params) {
  std::vector<MarkedPoint> f = fiber_over(s, za);
  if (f.size() < 2) throw std::invalid_argument("fiber has fewer than two points");
  const int base = params.base < 0 ? int(f.size()) - 1 : params.base;
  if (base >= int(f.size())) throw std::invalid_argument("base index outside the fiber");
  std::rotate(f.begin() + base, f.begin() + base + 1, f.end());
  return nnls_from_points(s, f, params);
}

namespace {

struct NnlsPoint {
  std::vector<cplx> res, ft, fxx;  // per field: psi_1, psi*_1, psi_2, ...
  std::vector<double> scale;
  double field = 0.0, vanishing = 0.0, norm = 0.0;
};

// signs empty: complexified system; else the real n-NLS^s with psi* = s conj(psi)
NnlsPoint nnls_point(const NnlsBundle& nb, double x, double t, const std::vector<int>& signs) {
  const SurfaceModel& s = *nb.surface;
  const DerivativeSpec dirs{kI * nb.V, kI * nb.V, kI * nb.W};
  const CVec w = nb.Z(x, t) - nb.d;
  LogThetaStack L0(s, w, dirs);
  const NnlsValues v = nb.eval(x, t);
  NnlsPoint out;
  out.vanishing = L0.vanishing();
  out.norm = L0.normalized_abs();
  cplx S = 0.0;
  for (int j = 0; j < nb.n(); ++j)
    S += signs.empty() ? v.psi[j] * v.psiStar[j] : double(signs[j]) * std::norm(v.psi[j]);
  for (int j = 0; j < nb.n(); ++j) {
    LogThetaStack Lp(s, w + nb.r[j], dirs), Lm(s, w - nb.r[j], dirs);
    for (int side = 0; side < 2; ++side) {
      if (!signs.empty() && side == 1) continue;
      const LogThetaStack& L = side == 0 ? Lp : Lm;
      const double sg = side == 0 ? 1.0 : -1.0;
      const cplx f = side == 0 ? v.psi[j] : v.psiStar[j];
      const cplx px = L.d(kX) - L0.d(kX) - sg * kI * nb.E[j];
      const cplx pxx = px * px + L.d(kXX) - L0.d(kXX);
      const cplx pt = L.d(kT) - L0.d(kT) + sg * kI * nb.F[j];
      const cplx t1 = sg * kI * pt * f, t2 = pxx * f, t3 = 2.0 * S * f;
      out.res.push_back(t1 + t2 + t3);
      out.ft.push_back(pt * f);
      out.fxx.push_back(pxx * f);
      out.scale.push_back(std::max({std::abs(t1), std::abs(t2), std::abs(t3)}));
      out.field = std::max(out.field, std::abs(f));
    }
  }
  return out;
}

ResidualReport nnls_report(const NnlsBundle& nb, const std::vector<int>& signs, const GridSpec& grid,
                           const ResidualOptions& opt) {
  if (grid.axes.size() != 2) throw std::invalid_argument("n-NLS grids have two axes (x, t)");
  const std::size_t n = grid.size();
  std::vector<NnlsPoint> pts(n);
  detail::for_each_point(n, opt.parallel, [&](std::size_t i) {
    const auto p = grid.point(i);
    pts[i] = nnls_point(nb, p[0], p[1], signs);
  });
  ResidualReport rep;
  rep.grid = grid;
  for (int j = 0; j < nb.n(); ++j) {
    rep.perEquation.push_back({"psi" + std::to_string(j + 1)});
    if (signs.empty()) rep.perEquation.push_back({"psiStar" + std::to_string(j + 1)});
  }
  std::size_t probe = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (pts[i].vanishing < opt.divisorTol) {
      rep.skipped.push_back(i);
      continue;
    }
    for (std::size_t k = 0; k < rep.perEquation.size(); ++k) {
      rep.perEquation[k].maxAbs = std::max(rep.perEquation[k].maxAbs, std::abs(pts[i].res[k]));
      rep.perEquation[k].termScale = std::max(rep.perEquation[k].termScale, pts[i].scale[k]);
    }
    rep.fieldScale = std::max(rep.fieldScale, pts[i].field);
    if (pts[i].norm > pts[probe].norm) probe = i;
  }
  rep.finish();
  if (opt.fdCheck) {
    const auto p = grid.point(probe);
    double worst = 0.0;
    std::size_t k = 0;
    for (int j = 0; j < nb.n(); ++j)
      for (int side = 0; side < (signs.empty() ? 2 : 1); ++side, ++k) {
        auto f = [&](double x, double t) {
          const NnlsValues v = nb.eval(x, t);
          return side == 0 ? v.psi[j] : v.psiStar[j];
        };
        worst = std::max(worst, fd_mismatch(f, p[0], p[1], opt.fdStep, pts[probe].ft[k], pts[probe].fxx[k]));
      }
    rep.fd = {probe, opt.fdStep, worst, true};
  }
  return rep;
}

}  // namespace

ResidualReport nnls_system_residual(const NnlsBundle& nb, const GridSpec& grid, const ResidualOptions& opt) {
  return nnls_report(nb, {}, grid, opt);
}

ResidualReport nnls_real_residual(const NnlsBundle& nb, const std::vector<int>& signs, const GridSpec& grid,
                                  const ResidualOptions& opt) {
  if (int(signs.size()) != nb.n()) throw std::invalid_argument("one sign per component");
  return nnls_report(nb, signs, grid, opt);
}

NnlsRealResult nnls_real_solution(const SurfaceModel& s, cplx za, const NnlsRealOptions& opt, const GridSpec& grid) {
  if (za.imag() != 0.0) throw std::invalid_argument("real n-NLS needs a real fiber value");
  std::vector<MarkedPoint> f = fiber_over(s, za);
  for (const auto& p : f)
    if (!same_point(s.tau(p), p)) throw std::invalid_argument("fiber point " + p.describe() + " is not tau-fixed");
  NnlsParams params;
  params.d = real_d(s, opt.dR, opt.T);
  NnlsRealResult res;
  res.bundle = nnls_from_points(s, f, params);
  NnlsBundle& nb = res.bundle;
  const int g = s.genus();
  const RVec dR = opt.dR.size() ? opt.dR : RVec::Zero(g);
  const IVec T = opt.T.size() ? opt.T : IVec::Zero(g);
  for (int j = 0; j < nb.n(); ++j) {
    res.lattice.push_back(infer_lattice_pair(s, nb.r[j], "fixedPoints"));
    const double absA =
        std::sqrt(std::abs(nb.q2[j])) * std::exp(0.5 * dR.dot(res.lattice.back().M.cast<double>()));
    nb.A[j] = std::polar(absA, opt.theta);
  }

  const std::size_t n = grid.size();
  std::vector<NnlsValues> vals(n);
  detail::for_each_point(n, true, [&](std::size_t i) {
    const auto p = grid.point(i);
    vals[i] = nb.eval(p[0], p[1]);
  });
  for (int j = 0; j < nb.n(); ++j) {
    double mag = 0.0, devPlus = 0.0, devMinus = 0.0;
    for (const auto& v : vals) {
      mag = std::max(mag, std::abs(v.psi[j]));
      devPlus = std::max(devPlus, std::abs(v.psiStar[j] - std::conj(v.psi[j])));
      devMinus = std::max(devMinus, std::abs(v.psiStar[j] + std::conj(v.psi[j])));
    }
    devPlus /= mag;
    devMinus /= mag;
    const bool plus = devPlus <= opt.tol, minus = devMinus <= opt.tol;
    if (plus == minus)
      throw NumericalError("component " + std::to_string(j + 1) + ": reality deviation " + std::to_string(devPlus) +
                           " (s=+1), " + std::to_string(devMinus) + " (s=-1); no unique sign");
    res.s.push_back(plus ? 1 : -1);
    res.deviation.push_back(plus ? devPlus : devMinus);
    res.otherDeviation.push_back(plus ? devMinus : devPlus);
    if (j < int(opt.alpha.size())) {
      const int e = 1 + opt.alpha[j] + T.dot(res.lattice[j].M);
      res.expected.push_back(e % 2 == 0 ? 1 : -1);
      if (res.expected.back() != res.s.back()) res.alphaConsistent = false;
    }
  }
  return res;
}

double nnls_vs_nls_defect(const NnlsBundle& nn, const NlsBundle& nls, const GridSpec& grid) {
  const std::size_t n = grid.size();
  std::vector<cplx> a(n), b(n);
  detail::for_each_point(n, true, [&](std::size_t i) {
    const auto p = grid.point(i);
    a[i] = nls.psi(p[0], p[1]);
    b[i] = nn.eval(p[0], p[1]).psi[0];
  });
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(b[i]) > std::abs(b[k])) k = i;
  const cplx c = a[k] / b[k];
  double dev = 0.0, mag = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dev = std::max(dev, std::abs(a[i] - c * b[i]));
    mag = std::max(mag, std::abs(a[i]));
  }
  return dev / mag;
}

double nnls_covariance_defect(const SurfaceModel& s, cplx za, const NnlsParams& params, cplx beta, cplx mu,
                              const GridSpec& grid) {
  const NnlsBundle P = nnls_complex_solution(s, za, params);
  std::vector<MarkedPoint> pts;
  for (const auto& p : P.fiber) pts.push_back(p.with_scaling(beta, mu));
  NnlsParams qp = params;
  qp.base = -1;
  const NnlsBundle Q = nnls_from_points(s, pts, qp);
  const cplx lam = mu / beta;
  const std::size_t n = grid.size();
  std::vector<double> dev(n), mag(n);
  detail::for_each_point(n, true, [&](std::size_t i) {
    const auto p = grid.point(i);
    const double x = p[0], t = p[1];
    const NnlsValues q = Q.eval(x, t);
    const NnlsValues o = P.eval(beta * x + 2.0 * beta * lam * t, beta * beta * t);
    const cplx e = std::exp(-kI * (lam * x + lam * lam * t));
    for (int j = 0; j < P.n(); ++j) {
      dev[i] = std::max({dev[i], std::abs(q.psi[j] - o.psi[j] * e), std::abs(q.psiStar[j] - beta * beta * o.psiStar[j] / e)});
      mag[i] = std::max({mag[i], std::abs(q.psi[j]), std::abs(q.psiStar[j])});
    }
  });
  return field_max(dev) / field_max(mag);
}

// ------------------------------------------------------------- stationary

StationaryReport stationary_check(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b, const CVec& d,
                                  const GridSpec& grid, double wTol) {
  if (grid.axes.size() != 2) throw std::invalid_argument("stationary grids have two axes (x, t)");
  StationaryReport rep;
  const PointJet ja = point_jet(s, a);
  rep.wGate = ja.W.norm() / ja.V.norm();
  rep.wGatePassed = rep.wGate <= wTol;
  if (!rep.wGatePassed)
    throw NumericalError("W gate failed: |W_a| / |V_a| = " + std::to_string(rep.wGate));
  const LinearSchrodinger ls = linear_schrodinger(s, a, b, d);
  const GridAxis& ax = grid.axes[0];
  const GridAxis& at = grid.axes[1];
  std::vector<double> var(std::size_t(ax.n)), slice(std::size_t(ax.n)), mag(std::size_t(ax.n));
  detail::for_each_point(std::size_t(ax.n), true, [&](std::size_t i) {
    const double x = ax.at(int(i));
    const double m0 = std::abs(ls.psi(x, at.at(0)));
    double v = 0.0, m = m0;
    for (int k = 1; k < at.n; ++k) {
      const double mk = std::abs(ls.psi(x, at.at(k)));
      v = std::max(v, std::abs(mk - m0));
      m = std::max(m, mk);
    }
    var[i] = v;
    mag[i] = m;
    slice[i] = std::abs(std::abs(ls.psi(x, 0.0)) - std::abs(ls.psi(x, 1.0)));
  });
  rep.fieldScale = field_max(mag);
  rep.timeVariation = field_max(var) / rep.fieldScale;
  rep.sliceDistance = field_max(slice) / rep.fieldScale;
  return rep;
}

}  // namespace thetafay
