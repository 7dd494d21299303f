#include <algorithm>
#include <cmath>
#include <exception>

#include "thetafay/report.hpp"
#include "thetafay/waves.hpp"
#include "waves_common.hpp"

namespace thetafay {

namespace {

// direction slots: xi xi xi eta eta eta t
constexpr unsigned kX = 1u, kXX = 3u, kY = 8u, kYY = 24u, kT = 64u;
constexpr unsigned kXXXY = 15u, kXYYY = 57u;

DerivativeSpec ds_dirs(const DsBundle& b) { return {b.Fxi, b.Fxi, b.Fxi, b.Feta, b.Feta, b.Feta, b.Ft}; }

cplx linear_phase(const DsBundle& b, cplx xi, cplx eta, cplx t) {
  return kI * (-b.G1 * xi - b.G2 * eta + b.G3 * t * 0.5);
}

struct DsPoint {
  cplx E[3];
  double scale[3];
  double field = 0.0;
  double vanishing = 0.0;
  double normAbs = 0.0;
  // analytic derivatives compared against finite differences
  cplx der[9];
  cplx psi, psiStar, phi, P;
};

DsPoint ds_point(const DsBundle& b, cplx xi, cplx eta, cplx t) {
  const SurfaceModel& s = *b.surface;
  const DerivativeSpec dirs = ds_dirs(b);
  const CVec w = b.Z(xi, eta, t) - b.params.d;
  LogThetaStack L0(s, w, dirs), Lp(s, w + b.r, dirs), Lm(s, w - b.r, dirs);
  DsPoint out;
  out.vanishing = L0.vanishing();
  out.normAbs = L0.normalized_abs();

  const cplx ph = linear_phase(b, xi, eta, t);
  const ScaledComplex den = L0.value();
  out.psi = (Lp.value() / den * ScaledComplex::from_exp(ph)).value() * b.psiCoeff;
  out.psiStar = (Lm.value() / den * ScaledComplex::from_exp(-ph)).value() * b.starCoeff;
  const cplx h = b.params.h;
  out.phi = 0.5 * (L0.d(kXX) + L0.d(kYY)) + 0.25 * h;

  // psi: ln psi = ln Theta(w+r) - ln Theta(w) + phase
  const cplx px = Lp.d(kX) - L0.d(kX) - kI * b.G1;
  const cplx py = Lp.d(kY) - L0.d(kY) - kI * b.G2;
  const cplx pt = Lp.d(kT) - L0.d(kT) + kI * b.G3 * 0.5;
  const cplx pxx = px * px + Lp.d(kXX) - L0.d(kXX);
  const cplx pyy = py * py + Lp.d(kYY) - L0.d(kYY);
  const cplx sx = Lm.d(kX) - L0.d(kX) + kI * b.G1;
  const cplx sy = Lm.d(kY) - L0.d(kY) + kI * b.G2;
  const cplx st = Lm.d(kT) - L0.d(kT) - kI * b.G3 * 0.5;
  const cplx sxx = sx * sx + Lm.d(kXX) - L0.d(kXX);
  const cplx syy = sy * sy + Lm.d(kYY) - L0.d(kYY);

  const cplx t1[3] = {kI * pt * out.psi, 0.5 * (pxx + pyy) * out.psi, 2.0 * out.phi * out.psi};
  const cplx t2[3] = {-kI * st * out.psiStar, 0.5 * (sxx + syy) * out.psiStar, 2.0 * out.phi * out.psiStar};
  out.E[0] = t1[0] + t1[1] + t1[2];
  out.E[1] = t2[0] + t2[1] + t2[2];

  // P = psi psi*: exponentials cancel
  out.P = out.psi * out.psiStar;
  const cplx lx = Lp.d(kX) + Lm.d(kX) - 2.0 * L0.d(kX);
  const cplx ly = Lp.d(kY) + Lm.d(kY) - 2.0 * L0.d(kY);
  const cplx Pxx = out.P * (lx * lx + Lp.d(kXX) + Lm.d(kXX) - 2.0 * L0.d(kXX));
  const cplx Pyy = out.P * (ly * ly + Lp.d(kYY) + Lm.d(kYY) - 2.0 * L0.d(kYY));
  const cplx phiXY = 0.5 * (L0.d(kXXXY) + L0.d(kXYYY));
  out.E[2] = phiXY + 0.5 * (Pxx + Pyy);

  out.scale[0] = std::max({std::abs(t1[0]), std::abs(t1[1]), std::abs(t1[2])});
  out.scale[1] = std::max({std::abs(t2[0]), std::abs(t2[1]), std::abs(t2[2])});
  out.scale[2] = std::max({std::abs(phiXY), 0.5 * std::abs(Pxx), 0.5 * std::abs(Pyy)});
  out.field = std::max({std::abs(out.psi), std::abs(out.psiStar), std::abs(out.phi)});

  const cplx der[9] = {pt * out.psi,  pxx * out.psi,  pyy * out.psi, st * out.psiStar, sxx * out.psiStar,
                       syy * out.psiStar, phiXY, Pxx, Pyy};
  std::copy(der, der + 9, out.der);
  return out;
}

double ds_fd_check(const DsBundle& b, cplx xi, cplx eta, cplx t, double h) {
  const DsPoint an = ds_point(b, xi, eta, t);
  auto val = [&](cplx x, cplx y, cplx tt) { return b.eval(x, y, tt); };
  const DsValues c = val(xi, eta, t);
  const DsValues xp = val(xi + h, eta, t), xm = val(xi - h, eta, t);
  const DsValues yp = val(xi, eta + h, t), ym = val(xi, eta - h, t);
  const DsValues tp = val(xi, eta, t + h), tm = val(xi, eta, t - h);
  const DsValues pp = val(xi + h, eta + h, t), pm = val(xi + h, eta - h, t);
  const DsValues mp = val(xi - h, eta + h, t), mm = val(xi - h, eta - h, t);
  auto d1 = [&](cplx p, cplx m) { return (p - m) / (2.0 * h); };
  auto d2 = [&](cplx p, cplx z, cplx m) { return (p - 2.0 * z + m) / (h * h); };
  auto P = [](const DsValues& v) { return v.psi * v.psiStar; };
  const cplx fd[9] = {
      d1(tp.psi, tm.psi),
      d2(xp.psi, c.psi, xm.psi),
      d2(yp.psi, c.psi, ym.psi),
      d1(tp.psiStar, tm.psiStar),
      d2(xp.psiStar, c.psiStar, xm.psiStar),
      d2(yp.psiStar, c.psiStar, ym.psiStar),
      (pp.phi - pm.phi - mp.phi + mm.phi) / (4.0 * h * h),
      d2(P(xp), P(c), P(xm)),
      d2(P(yp), P(c), P(ym)),
  };
  const double ref[9] = {std::abs(c.psi),     std::abs(c.psi),     std::abs(c.psi),
                         std::abs(c.psiStar), std::abs(c.psiStar), std::abs(c.psiStar),
                         std::max(std::abs(c.phi), std::abs(P(c))), std::abs(P(c)), std::abs(P(c))};
  double worst = 0.0;
  for (int k = 0; k < 9; ++k) {
    const double den = std::max(std::abs(an.der[k]), ref[k]);
    worst = std::max(worst, std::abs(an.der[k] - fd[k]) / den);
  }
  return worst;
}

DsBundle build_ds(const SurfaceModel& s, const AbelPath& ab, const DSParams& params) {
  if (same_point(ab.a, ab.b)) throw std::invalid_argument("DS solution needs distinct points");
  DsBundle b;
  b.surface = &s;
  b.a = ab.a;
  b.b = ab.b;
  b.ja = point_jet(s, ab.a);
  b.jb = point_jet(s, ab.b);
  b.r = ab.r;
  b.contour = ab.contour;
  b.fab = fay_scalars(s, b.ja, b.jb, ab.r);
  b.fba = fay_scalars(s, b.jb, b.ja, -ab.r);
  b.params = params;
  if (b.params.d.size() == 0) b.params.d = CVec::Zero(s.genus());
  if (b.params.d.size() != s.genus()) throw std::invalid_argument("d has the wrong dimension");
  if (params.kappa1 == 0.0 || params.kappa2 == 0.0 || params.A == 0.0)
    throw std::invalid_argument("kappa1, kappa2 and A must be nonzero");
  const cplx k1 = params.kappa1, k2 = params.kappa2;
  b.G1 = k1 * b.fab.K1;
  b.G2 = k2 * b.fba.K1;
  b.G3 = k1 * k1 * b.fab.K2 + k2 * k2 * b.fba.K2 + params.h;
  b.psiCoeff = params.A;
  b.starCoeff = -k1 * k2 * b.fab.q2 / params.A;
  b.Fxi = kI * k1 * b.ja.V;
  b.Feta = -kI * k2 * b.jb.V;
  b.Ft = 0.5 * kI * (k1 * k1 * b.ja.W - k2 * k2 * b.jb.W);
  return b;
}

CVec diag_h(const SurfaceModel& s) {
  const auto& rs = s.real_structure();
  if (!rs) throw std::invalid_argument("surface has no real structure: " + s.real_status());
  CVec d(s.genus());
  for (int i = 0; i < s.genus(); ++i) d(i) = double(rs->H(i, i));
  return d;
}

}  // namespace

void DsBundle::map(const std::vector<double>& p, cplx& xi, cplx& eta, cplx& t) const {
  if (p.size() != 3) throw std::invalid_argument("DS grids have three axes (x, y, t)");
  if (variables == DsVariables::Conjugate) {
    xi = cplx(p[0], p[1]);
    eta = cplx(p[0], -p[1]);
  } else {
    xi = p[0];
    eta = p[1];
  }
  t = p[2];
}

DsValues DsBundle::eval(cplx xi, cplx eta, cplx t, bool reduce) const {
  const SurfaceModel& s = *surface;
  const DerivativeSpec dirs{Fxi, Fxi, Feta, Feta};
  const CVec w = Z(xi, eta, t) - params.d;
  LogThetaStack L0(s, w, dirs, reduce);
  LogThetaStack Lp(s, w + r, {}, reduce), Lm(s, w - r, {}, reduce);
  const cplx ph = linear_phase(*this, xi, eta, t);
  DsValues v;
  v.psi = (Lp.value() / L0.value() * ScaledComplex::from_exp(ph)).value() * psiCoeff;
  v.psiStar = (Lm.value() / L0.value() * ScaledComplex::from_exp(-ph)).value() * starCoeff;
  v.phi = 0.5 * (L0.d(3u) + L0.d(12u)) + 0.25 * params.h;
  v.thetaNormAbs = L0.normalized_abs();
  v.vanishing = L0.vanishing();
  return v;
}

DsValues DsBundle::eval_grid(const std::vector<double>& p) const {
  cplx xi, eta, t;
  map(p, xi, eta, t);
  return eval(xi, eta, t);
}

nlohmann::json DsBundle::provenance() const {
  return {{"surfaceHash", surface->hash()},
          {"a", a.describe()},
          {"b", b.describe()},
          {"contour", contour},
          {"kappa1", to_json(params.kappa1)},
          {"kappa2", to_json(params.kappa2)},
          {"A", to_json(params.A)},
          {"h", to_json(params.h)},
          {"d", to_json(params.d)},
          {"G1", to_json(G1)},
          {"G2", to_json(G2)},
          {"G3", to_json(G3)},
          {"q2", to_json(fab.q2)},
          {"r", to_json(r)}};
}

DsBundle ds_complex_solution(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b,
                             const DSParams& params, const PathSpec& path) {
  return build_ds(s, abel_between(s, a, b, path), params);
}

ResidualReport ds_system_residual(const DsBundle& bundle, const GridSpec& grid, const ResidualOptions& opt) {
  const std::size_t n = grid.size();
  std::vector<DsPoint> pts(n);
  detail::for_each_point(n, opt.parallel, [&](std::size_t i) {
    cplx xi, eta, t;
    bundle.map(grid.point(i), xi, eta, t);
    pts[i] = ds_point(bundle, xi, eta, t);
  });

  ResidualReport rep;
  rep.grid = grid;
  rep.perEquation = {{"psi"}, {"psiStar"}, {"phi"}};
  std::size_t probe = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (pts[i].vanishing < opt.divisorTol) {
      rep.skipped.push_back(i);
      continue;
    }
    for (int k = 0; k < 3; ++k) {
      rep.perEquation[k].maxAbs = std::max(rep.perEquation[k].maxAbs, std::abs(pts[i].E[k]));
      rep.perEquation[k].termScale = std::max(rep.perEquation[k].termScale, pts[i].scale[k]);
    }
    rep.fieldScale = std::max(rep.fieldScale, pts[i].field);
    if (pts[i].normAbs > best) {
      best = pts[i].normAbs;
      probe = i;
    }
  }
  rep.finish();
  if (opt.fdCheck && best > 0) {
    cplx xi, eta, t;
    bundle.map(grid.point(probe), xi, eta, t);
    rep.fd.index = probe;
    rep.fd.step = opt.fdStep;
    rep.fd.maxRel = ds_fd_check(bundle, xi, eta, t, opt.fdStep);
    rep.fd.done = true;
  }
  return rep;
}

double ds_reality_deviation(const DsBundle& bundle, const GridSpec& grid, int rho) {
  const std::size_t n = grid.size();
  std::vector<double> dev(n), mag(n);
  detail::for_each_point(n, true, [&](std::size_t i) {
    const DsValues v = bundle.eval_grid(grid.point(i));
    dev[i] = std::abs(v.psiStar - double(rho) * std::conj(v.psi));
    mag[i] = std::abs(v.psi);
  });
  const double m = *std::max_element(mag.begin(), mag.end());
  return *std::max_element(dev.begin(), dev.end()) / m;
}

Ds1Result ds1_real_solution(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b,
                            const Ds1Options& opt, const PathSpec& path) {
  const int g = s.genus();
  const CVec dH = diag_h(s);
  if (!same_point(s.tau(a), a) || !same_point(s.tau(b), b))
    throw std::invalid_argument("DS1 needs tau-fixed points a and b");
  if (opt.kappa1Tilde == 0.0 || opt.kappa2 == 0.0) throw std::invalid_argument("kappa must be nonzero");
  const AbelPath ab = abel_between(s, a, b, path);

  Ds1Result res;
  res.lattice = infer_lattice_pair(s, ab.r, "fixedPoints");
  const RVec dR = opt.dR.size() ? opt.dR : RVec::Zero(g);
  const IVec T = opt.T.size() ? opt.T : IVec::Zero(g);
  if (dR.size() != g || T.size() != g) throw std::invalid_argument("dR and T need genus entries");
  const CVec d = dR.cast<cplx>() + (0.5 * kI * kPi) * (dH - 2.0 * T.cast<double>().cast<cplx>());
  const CVec M = res.lattice.M.cast<double>().cast<cplx>();

  // q2 and the lattice exponent computed from the same contour as r
  const FayScalars f = fay_scalars(s, point_jet(s, a), point_jet(s, b), ab.r);
  res.reality = f.q2 * std::exp(0.5 * bdot(s.B() * M, M) + bdot(ab.r + d, M));
  res.realityImag = std::abs(res.reality.imag()) / std::abs(res.reality);
  if (res.realityImag > 1e-6)
    throw NumericalError("q2 exp(<BM,M>/2 + <r+d,M>) is not real: relative imaginary part " +
                         std::to_string(res.realityImag));
  const double X = res.reality.real();

  double kappa1;
  if (opt.kappa1) {
    kappa1 = *opt.kappa1;
    if (kappa1 == 0.0) throw std::invalid_argument("kappa1 must be nonzero");
    res.rho = (kappa1 * opt.kappa2 * X > 0) ? -1 : 1;
    res.absA = std::sqrt(std::abs(kappa1 * opt.kappa2 * X));
    if (opt.rho != 0 && opt.rho != res.rho)
      throw SignMismatch("requested rho = " + std::to_string(opt.rho) + " but kappa1 forces rho = " +
                             std::to_string(res.rho),
                         res.rho);
  } else {
    res.rho = opt.rho == 0 ? 1 : opt.rho;
    kappa1 = -res.rho * opt.kappa1Tilde * opt.kappa1Tilde * opt.kappa2 * X;
    res.absA = std::abs(opt.kappa1Tilde * opt.kappa2 * f.q2) * std::exp(dR.dot(res.lattice.M.cast<double>()));
  }

  DSParams p;
  p.kappa1 = kappa1;
  p.kappa2 = opt.kappa2;
  p.A = std::polar(res.absA, opt.theta);
  p.h = opt.h;
  p.d = d;
  res.bundle = build_ds(s, ab, p);
  res.bundle.variables = DsVariables::Real;

  const DsBundle& B = res.bundle;
  const cplx k1 = p.kappa1, k2 = p.kappa2;
  const double e1 = std::abs(std::conj(B.G1) - (B.G1 - k1 * bdot(B.ja.V, M))) / std::max(std::abs(B.G1), 1.0);
  const double e2 = std::abs(std::conj(B.G2) - (B.G2 - k2 * bdot(B.jb.V, M))) / std::max(std::abs(B.G2), 1.0);
  const double e3 = std::abs(std::conj(B.G3) - (B.G3 + k1 * k1 * bdot(B.ja.W, M) + k2 * k2 * bdot(B.jb.W, M))) /
                    std::max(std::abs(B.G3), 1.0);
  res.freqConjDefect = std::max({e1, e2, e3});
  return res;
}

Ds2Result ds2_real_solution(const SurfaceModel& s, const MarkedPoint& a, const Ds2Options& opt,
                            const PathSpec& path) {
  const int g = s.genus();
  const CVec dH = diag_h(s);
  const MarkedPoint b = s.tau(a);
  if (same_point(a, b)) throw std::invalid_argument("DS2 needs a point with tau(a) != a");
  if (opt.kappa1 == 0.0) throw std::invalid_argument("kappa1 must be nonzero");
  const AbelPath ab = abel_between(s, a, b, path);

  Ds2Result res;
  res.lattice = infer_lattice_pair(s, ab.r, "swappedPoints");
  const IVec L = opt.L.size() ? opt.L : IVec::Zero(g);
  const RVec dI = opt.dI.size() ? opt.dI : RVec::Zero(g);
  if (L.size() != g || dI.size() != g) throw std::invalid_argument("L and dI need genus entries");
  const IMat& H = s.real_structure()->H;
  const IVec twoT = dH.real().cast<int>() - H * L;
  res.T.resize(g);
  for (int i = 0; i < g; ++i) {
    if (twoT(i) % 2 != 0) throw std::invalid_argument("L violates 2T + H L = diag H for integer T");
    res.T(i) = twoT(i) / 2;
  }
  const CVec d = 0.5 * (s.B().real() * L.cast<double>()).cast<cplx>() + kI * dI.cast<cplx>();

  const FayScalars f = fay_scalars(s, point_jet(s, a), point_jet(s, b), ab.r);
  res.q2Imag = std::abs(f.q2.imag()) / std::abs(f.q2);
  if (res.q2Imag > 1e-8)
    throw NumericalError("q2 is not real for tau-swapped points: relative imaginary part " +
                         std::to_string(res.q2Imag));
  const int NL = res.lattice.N.dot(L);
  res.rho = (f.q2.real() > 0 ? -1 : 1) * (NL % 2 == 0 ? 1 : -1);
  res.absA = std::abs(opt.kappa1) * std::sqrt(std::abs(f.q2)) * std::exp(-0.5 * ab.r.real().dot(L.cast<double>()));

  DSParams p;
  p.kappa1 = opt.kappa1;
  p.kappa2 = std::conj(opt.kappa1);
  p.A = std::polar(res.absA, opt.theta);
  p.h = opt.h;
  p.d = d;
  res.bundle = build_ds(s, ab, p);
  res.bundle.variables = DsVariables::Conjugate;
  res.g1g2Conj = std::abs(std::conj(res.bundle.G1) - res.bundle.G2) / std::max(std::abs(res.bundle.G1), 1.0);
  res.g3Imag = std::abs(res.bundle.G3.imag()) / std::max(std::abs(res.bundle.G3), 1.0);
  return res;
}

double ds_covariance_defect(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b,
                            const DSParams& params, cplx beta, cplx mu1, cplx mu2, const GridSpec& grid,
                            const PathSpec& path) {
  const DsBundle P = ds_complex_solution(s, a, b, params, path);
  const DsBundle Q = ds_complex_solution(s, a.with_scaling(beta, mu1), b.with_scaling(beta, mu2), params, path);
  const cplx l1 = params.kappa1 * mu1 / beta, l2 = params.kappa2 * mu2 / beta;
  const cplx alpha = params.h * (1.0 - beta * beta);
  const std::size_t n = grid.size();
  std::vector<double> dev(n), mag(n);
  detail::for_each_point(n, true, [&](std::size_t i) {
    cplx xi, eta, t;
    P.map(grid.point(i), xi, eta, t);
    const DsValues q = Q.eval(xi, eta, t);
    const DsValues p = P.eval(beta * xi + beta * l1 * t, beta * eta + beta * l2 * t, beta * beta * t);
    const cplx e = std::exp(-kI * (l1 * xi + l2 * eta + (l1 * l1 + l2 * l2 - alpha) * t * 0.5));
    const cplx psi = p.psi * e, star = beta * beta * p.psiStar / e, phi = beta * beta * p.phi + alpha * 0.25;
    dev[i] = std::max({std::abs(q.psi - psi), std::abs(q.psiStar - star), std::abs(q.phi - phi)});
    mag[i] = std::max({std::abs(q.psi), std::abs(q.psiStar), std::abs(q.phi)});
  });
  return *std::max_element(dev.begin(), dev.end()) / *std::max_element(mag.begin(), mag.end());
}

}  // namespace thetafay
