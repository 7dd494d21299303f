// Smooth plane cubic F(lambda, y) = sum c_ij lambda^i y^j with c_03 != 0,
// projected to the lambda line.  nu = dlambda / F_y.
#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>

#include "providers.hpp"

namespace thetafay::detail {

namespace {

using Poly = std::vector<cplx>;  // ascending coefficients

Poly pmul(const Poly& a, const Poly& b) {
  Poly c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

Poly padd(const Poly& a, const Poly& b, cplx sb = 1.0) {
  Poly c(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) c[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) c[i] += sb * b[i];
  return c;
}

cplx peval(const Poly& p, cplx x) {
  cplx v = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) v = v * x + p[i];
  return v;
}

Poly pderiv(const Poly& p) {
  Poly d;
  for (std::size_t i = 1; i < p.size(); ++i) d.push_back(double(i) * p[i]);
  if (d.empty()) d.push_back(0.0);
  return d;
}

std::vector<cplx> poly_roots(Poly p) {
  double big = 0.0;
  for (auto c : p) big = std::max(big, std::abs(c));
  while (p.size() > 1 && std::abs(p.back()) <= 1e-13 * big) p.pop_back();
  const int n = int(p.size()) - 1;
  if (n < 1) return {};
  CMat comp = CMat::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -p[i] / p[n];
  Eigen::ComplexEigenSolver<CMat> es(comp, false);
  std::vector<cplx> r(es.eigenvalues().data(), es.eigenvalues().data() + n);
  Poly dp = pderiv(p);
  for (auto& x : r)
    for (int it = 0; it < 8; ++it) {
      cplx d = peval(dp, x);
      if (d == cplx(0.0, 0.0)) break;
      cplx step = peval(p, x) / d;
      x -= step;
      if (std::abs(step) < 1e-16 * (1.0 + std::abs(x))) break;
    }
  std::sort(r.begin(), r.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return r;
}

class PlaneCubic final : public CurveProvider {
 public:
  PlaneCubic(const SurfaceConfig& cfg, const nlohmann::json* state) {
    a_.assign(4, Poly(4, 0.0));
    realCoeffs_ = true;
    for (const auto& t : cfg.terms) {
      if (t.i < 0 || t.j < 0 || t.i + t.j > 3) throw std::invalid_argument("plane cubic term has degree > 3");
      a_[t.j][t.i] += t.c;
      if (std::abs(t.c.imag()) > 0.0) realCoeffs_ = false;
    }
    if (std::abs(a_[3][0]) == 0.0) throw std::invalid_argument("plane cubic needs a nonzero y^3 coefficient");
    scaleF_ = 0.0;
    for (const auto& p : a_)
      for (auto c : p) scaleF_ = std::max(scaleF_, std::abs(c));
    // discriminant in lambda
    const Poly& A3 = a_[3];
    const Poly& A2 = a_[2];
    const Poly& A1 = a_[1];
    const Poly& A0 = a_[0];
    Poly D = pmul(pmul(pmul(A3, A2), A1), A0);
    for (auto& c : D) c *= 18.0;
    D = padd(D, pmul(pmul(pmul(A2, A2), A2), A0), -4.0);
    D = padd(D, pmul(pmul(A2, A2), pmul(A1, A1)));
    D = padd(D, pmul(A3, pmul(pmul(A1, A1), A1)), -4.0);
    D = padd(D, pmul(pmul(A3, A3), pmul(A0, A0)), -27.0);
    double dbig = 0.0;
    for (auto c : D) dbig = std::max(dbig, std::abs(c));
    if (dbig == 0.0) throw std::invalid_argument("plane cubic is singular: discriminant vanishes identically");
    e_ = poly_roots(D);
    if (e_.empty()) throw std::invalid_argument("plane cubic has no finite branch points");
    scale_ = 1.0;
    for (auto z : e_) scale_ = std::max(scale_, std::abs(z));
    for (std::size_t i = 0; i < e_.size(); ++i)
      for (std::size_t j = i + 1; j < e_.size(); ++j)
        if (std::abs(e_[i] - e_[j]) < 1e-6 * scale_)
          throw std::invalid_argument("plane cubic is singular or its projection is degenerate (repeated discriminant root)");
    for (std::size_t i = 0; i < e_.size(); ++i) check_smooth(int(i));
    view_.branch = e_;
    view_.ramification.assign(e_.size(), 2);
    view_.roots = [this](cplx l) { return y_roots(l); };
    view_.rootsNear = [this](int i, cplx d) { return y_roots(e_[i] + d); };

    std::vector<cplx> periods = loop_periods(16);
    cplx b1, b2;
    lattice_basis(periods, b1, b2);
    basis_ = adapt_genus1(b1, b2, realCoeffs_);
    std::vector<cplx> periods2 = loop_periods(32);
    cplx c1, c2;
    lattice_basis(periods2, c1, c2);
    normRes_ = std::abs(std::abs(c1) - std::abs(b1)) / std::abs(b1);
    if (state && state->contains("C")) {
      C_ = cvec_json_c(state->at("C"));
      Bv_ = cvec_json_c(state->at("B"));
    } else {
      C_ = 2.0 * kPi * kI / basis_.omegaA;
      Bv_ = 2.0 * kPi * kI * basis_.omegaB / basis_.omegaA;
    }
  }

  std::string kind() const override { return "planeCubic"; }
  int genus() const override { return 1; }
  CMat riemann() const override { return CMat::Constant(1, 1, Bv_); }
  double normalization_residual() const override { return normRes_; }
  std::vector<cplx> branch_points() const override { return e_; }
  nlohmann::json state() const override { return {{"C", json_c(C_)}, {"B", json_c(Bv_)}}; }

  std::optional<RealStructure> real_structure(std::string& status) const override {
    status = basis_.status;
    if (!realCoeffs_) status = "coefficients are not real";
    if (!basis_.real) return std::nullopt;
    if (basis_.defect > 1e-8) {
      status = "H-integrality gate failed";
      return std::nullopt;
    }
    RealStructure rs;
    rs.H = IMat::Constant(1, 1, basis_.H);
    rs.tau = "y->conj(y)";
    rs.integralityDefect = basis_.defect;
    return rs;
  }

  MarkedPoint point(cplx lambda, int sheet) const override {
    check_regular(lambda);
    auto r = y_roots(lambda);
    MarkedPoint p;
    p.lambda = lambda;
    p.sheet = ((sheet % 3) + 3) % 3;
    p.y = r[p.sheet];
    return p;
  }

  MarkedPoint point_with_y(cplx lambda, cplx y) const override {
    check_regular(lambda);
    auto r = y_roots(lambda);
    int best = 0;
    for (int s = 1; s < 3; ++s)
      if (std::abs(r[s] - y) < std::abs(r[best] - y)) best = s;
    if (std::abs(r[best] - y) > 1e-6 * std::max(1.0, std::abs(y)))
      throw std::invalid_argument("supplied y does not lie on the curve");
    return point(lambda, best);
  }

  MarkedPoint tau(const MarkedPoint& p) const override {
    if (!realCoeffs_) throw std::invalid_argument("surface has no real structure");
    return point_with_y(std::conj(p.lambda), std::conj(p.y));
  }

  std::vector<MarkedPoint> fiber(cplx za) const override {
    for (std::size_t k = 0; k < e_.size(); ++k)
      if (std::abs(za - e_[k]) < 1e-6 * scale_) {
        std::ostringstream os;
        os << "fiber over " << za << " is ramified near branch point " << k << " " << e_[k];
        throw std::invalid_argument(os.str());
      }
    return {point(za, 0), point(za, 1), point(za, 2)};
  }

  PointJet base_jet(const MarkedPoint& p) const override {
    if (p.is_branch()) throw std::invalid_argument("sqrtBranch parameters are only defined on hyperelliptic curves");
    const int N = 64;
    double dmin = 1e300;
    for (auto z : e_) dmin = std::min(dmin, std::abs(z - p.lambda));
    double rho = 0.25 * dmin;
    cplx y = track(view_, p.lambda, p.y, p.lambda + rho);
    cplx ystart = y;
    auto pts = circle_points(p.lambda, rho, 0.0, N, true);
    std::vector<CVec> samples;
    cplx prev = pts[0];
    for (int j = 0; j < N; ++j) {
      y = track(view_, prev, y, pts[j]);
      prev = pts[j];
      samples.push_back(CVec::Constant(1, C_ / Fy(pts[j], y)));
    }
    y = track(view_, prev, y, pts[N]);
    PointJet jet;
    jet.closure = std::abs(y - ystart);
    CVec c0, c1, c2;
    cauchy_coefficients(samples, rho, c0, c1, c2);
    jet.V = c0;
    jet.W = c1;
    jet.U = 2.0 * c2;
    return jet;
  }

  AbelPath abel(const MarkedPoint& a, const MarkedPoint& b, const PathSpec& path) const override {
    if (a.is_branch() || b.is_branch()) throw std::invalid_argument("plane cubic marked points must be regular");
    if (canonical_less(b, a)) {
      PathSpec rev = path;
      std::reverse(rev.via.begin(), rev.via.end());
      AbelPath out = abel(b, a, rev);
      out.r = -out.r;
      std::swap(out.a, out.b);
      std::reverse(out.path.via.begin(), out.path.via.end());
      out.contour = "reverse of " + out.contour;
      return out;
    }
    AbelPath out;
    out.a = a;
    out.b = b;
    if (same_point(a, b)) {
      out.r = CVec::Zero(1);
      out.contour = "trivial";
      return out;
    }
    std::vector<PathSpec> tries;
    if (!path.empty()) {
      tries.push_back(path);
    } else {
      if (std::abs(a.lambda - b.lambda) > 1e-14 * scale_) tries.push_back(PathSpec{});
      std::vector<int> order(e_.size());
      for (std::size_t k = 0; k < e_.size(); ++k) order[k] = int(k);
      std::sort(order.begin(), order.end(),
                [&](int p, int q) { return std::abs(e_[p] - a.lambda) < std::abs(e_[q] - a.lambda); });
      for (int k : order)
        for (bool ccw : {true, false}) tries.push_back(loop_route(a.lambda, k, ccw));
      // two transpositions, returning to a between the loops
      for (int k1 : order)
        for (int k2 : order) {
          if (k1 == k2) continue;
          PathSpec ps = loop_route(a.lambda, k1, true);
          ps.via.push_back(a.lambda);
          for (auto z : loop_route(a.lambda, k2, true).via) ps.via.push_back(z);
          tries.push_back(ps);
        }
    }
    std::string lastErr;
    for (const auto& t : tries) {
      auto nodes = route_nodes(a, b, t, e_);
      try {
        cplx yb = b.y;
        auto res = integrate_path(view_, nodes, a.y, &yb,
                                  [this](cplx l, cplx y) { return CVec::Constant(1, C_ / Fy(l, y)); }, 1, {});
        out.r = res.value;
        out.path = t;
        out.contour = describe_route(nodes);
        return out;
      } catch (const SheetMismatch& ex) {
        lastErr = ex.what();
      }
    }
    throw NumericalError("no contour reaches the target sheet: " + lastErr);
  }

  bool supports_third_kind() const override { return true; }

  // eta_p = G_p(y) / ((lambda - lambda_p) F_y) dlambda with
  // G_p(y) = F(lambda_p, y) / (y - y_p): residue 1 at p, regular at the rest
  // of the fiber and at infinity once the two terms are subtracted.
  cplx third_kind(const MarkedPoint& a, const MarkedPoint& b, const PathSpec& route, double eps, cplx& ka,
                  cplx& kb) const override {
    if (a.is_branch() || b.is_branch()) throw std::invalid_argument("plane cubic marked points must be regular");
    auto nodes = route_nodes(a, b, route, e_);
    for (const auto& n : nodes)
      if (n.branch >= 0) throw std::invalid_argument("third-kind oracle: route through a branch point");
    const int L = int(nodes.size()) - 1;
    cplx ua = (nodes[1].lambda - a.lambda) / std::abs(nodes[1].lambda - a.lambda);
    cplx ub = (nodes[L - 1].lambda - b.lambda) / std::abs(nodes[L - 1].lambda - b.lambda);
    ka = eps * ua;
    kb = eps * ub;
    cplx la = a.lambda + ka, lb = b.lambda + kb;
    cplx ya = track(view_, a.lambda, a.y, la), yb = track(view_, b.lambda, b.y, lb);
    // On the curve G_p(y) / (lambda - lambda_p) also equals
    // -[(F(lambda, y) - F(lambda_p, y)) / (lambda - lambda_p)] / (y - y_p); use
    // whichever denominator is larger, so other sheets over lambda_p and
    // other points with y = y_p stay finite.
    auto eta = [this](const MarkedPoint& p) {
      std::array<cplx, 3> q;
      q[2] = peval(a_[3], p.lambda);
      q[1] = peval(a_[2], p.lambda) + q[2] * p.y;
      q[0] = peval(a_[1], p.lambda) + q[1] * p.y;
      return [this, q, p](cplx l, cplx y) {
        const cplx dl = l - p.lambda, dy = y - p.y;
        if (std::abs(dl) >= std::abs(dy)) return ((q[2] * y + q[1]) * y + q[0]) / dl;
        cplx D = 0.0;
        for (int j = 3; j >= 0; --j) {
          // divided difference of a_j between lambda_p and l
          cplx dd = 0.0;
          const Poly& c = a_[j];
          for (std::size_t i = c.size(); i-- > 1;) dd = dd * l + peval(Poly(c.begin() + i, c.end()), p.lambda);
          D = D * y + dd;
        }
        return -D / dy;
      };
    };
    const auto ea = eta(a), eb = eta(b);
    const cplx lA = a.lambda, lB = b.lambda;
    auto omega0 = [&](cplx l, cplx y) { return (eb(l, y) - ea(l, y)) / Fy(l, y); };
    std::vector<PathNode> inner = nodes;
    inner.front() = PathNode{la, -1};
    inner.back() = PathNode{lb, -1};
    auto res = integrate_path(
        view_, inner, ya, &yb,
        [&](cplx l, cplx y) {
          CVec v(2);
          v(0) = C_ / Fy(l, y);
          v(1) = omega0(l, y);
          return v;
        },
        2, {lA, lB});

    // A-period along star-loop words, moved off the route: each signed
    // crossing with the route is undone by sliding the cycle over b.
    const Star st = star();
    for (const auto& lp : st.loops)
      for (std::size_t m = 0; m + 1 < lp.size(); ++m)
        if (distance_to_segment(lA, lp[m].lambda, lp[m + 1].lambda) < 1e-9 * scale_ ||
            distance_to_segment(lB, lp[m].lambda, lp[m + 1].lambda) < 1e-9 * scale_)
          throw NumericalError("pole of the third-kind differential lies on a basis loop");
    auto words = word_periods(
        st,
        [&](cplx l, cplx y) {
          CVec v(2);
          v(0) = 1.0 / Fy(l, y);
          v(1) = omega0(l, y);
          return v;
        },
        2, {lA, lB}, 16);
    auto X = route_crossings(st, nodes, a.y);
    auto corrected = [&](const Word& w) {
      int n = 0;
      for (const auto& stp : w.steps) n += stp.dir * X[stp.gen][stp.sheet];
      return w.value(1) + 2.0 * kPi * kI * double(n);
    };
    const cplx wA = basis_.omegaA;
    std::optional<cplx> periodA;
    for (const auto& w : words)
      if (std::abs(w.value(0) - wA) < 1e-8 * std::abs(wA)) {
        periodA = corrected(w);
        break;
      }
    for (std::size_t i = 0; !periodA && i < words.size(); ++i)
      for (std::size_t j = i + 1; !periodA && j < words.size(); ++j) {
        cplx p = words[i].value(0), q = words[j].value(0);
        double det = (std::conj(p) * q).imag();
        if (std::abs(det) < 1e-6 * std::abs(p) * std::abs(q)) continue;
        double m1 = (std::conj(wA) * q).imag() / det, m2 = (std::conj(p) * wA).imag() / det;
        if (std::abs(m1 - std::round(m1)) > 1e-6 || std::abs(m2 - std::round(m2)) > 1e-6) continue;
        periodA = std::round(m1) * corrected(words[i]) + std::round(m2) * corrected(words[j]);
      }
    if (!periodA) throw NumericalError("A-cycle is not a combination of the star-loop words");
    const cplx c = *periodA / (2.0 * kPi * kI);
    return res.value(1) - c * res.value(0);
  }

 private:
  std::vector<cplx> y_roots(cplx l) const {
    Poly p(4);
    for (int j = 0; j < 4; ++j) p[j] = peval(a_[j], l);
    return poly_roots(p);
  }

  cplx F(cplx l, cplx y) const {
    cplx v = 0.0;
    for (int j = 3; j >= 0; --j) v = v * y + peval(a_[j], l);
    return v;
  }

  cplx Fy(cplx l, cplx y) const {
    return 3.0 * peval(a_[3], l) * y * y + 2.0 * peval(a_[2], l) * y + peval(a_[1], l);
  }

  cplx Fl(cplx l, cplx y) const {
    cplx v = 0.0;
    for (int j = 3; j >= 0; --j) v = v * y + peval(pderiv(a_[j]), l);
    return v;
  }

  void check_smooth(int i) const {
    auto r = y_roots(e_[i]);
    double best = 1e300;
    int bi = 0, bj = 1;
    for (int p = 0; p < 3; ++p)
      for (int q = p + 1; q < 3; ++q)
        if (std::abs(r[p] - r[q]) < best) {
          best = std::abs(r[p] - r[q]);
          bi = p;
          bj = q;
        }
    cplx ys = 0.5 * (r[bi] + r[bj]);
    int other = 3 - bi - bj;
    if (std::abs(r[other] - ys) < 1e-6 * (1.0 + std::abs(ys)))
      throw std::invalid_argument("plane cubic has a triple root over a branch point (unsupported projection)");
    if (std::abs(Fl(e_[i], ys)) < 1e-8 * scaleF_ * (1.0 + std::pow(std::abs(ys), 3))) {
      std::ostringstream os;
      os << "plane cubic is singular at (" << e_[i] << ", " << ys << ")";
      throw std::invalid_argument(os.str());
    }
  }

  void check_regular(cplx lambda) const {
    for (std::size_t k = 0; k < e_.size(); ++k)
      if (std::abs(lambda - e_[k]) < 1e-10 * scale_) {
        std::ostringstream os;
        os << "point lies over branch point " << k;
        throw std::invalid_argument(os.str());
      }
  }

  double loop_radius(int k) const {
    double d = 1e300;
    for (std::size_t j = 0; j < e_.size(); ++j)
      if (int(j) != k) d = std::min(d, std::abs(e_[k] - e_[j]));
    return 0.3 * std::min(d, 1.0 * scale_);
  }

  PathSpec loop_route(cplx lambda0, int k, bool ccw) const {
    cplx e = e_[k];
    double rho = std::min(loop_radius(k), 0.5 * std::abs(lambda0 - e));
    cplx u = (e - lambda0) / std::abs(e - lambda0);
    double phase = std::arg(-u);
    PathSpec ps;
    for (auto z : circle_points(e, rho, phase, 48, ccw)) ps.via.push_back(z);
    return ps;
  }

  // Star loops around the branch points, based at a point outside the
  // branch locus: base -> circle around e_i -> base.
  struct Star {
    cplx base;
    std::vector<cplx> y0;
    std::vector<std::vector<PathNode>> loops;
  };

  Star star() const {
    const int K = int(e_.size());
    cplx center = 0.0;
    for (auto z : e_) center += z;
    center /= double(K);
    double R = 0.0;
    for (auto z : e_) R = std::max(R, std::abs(z - center));
    R = 1.5 * R + 1.0;
    Star st;
    st.base = center;
    double bestSep = -1.0;
    for (int t = 0; t < 24; ++t) {
      cplx cand = center + std::polar(R, 2.0 * kPi * (t + 0.37) / 24.0);
      double sep = 1e300;
      for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j)
          if (i != j) sep = std::min(sep, distance_to_segment(e_[j], cand, e_[i]));
      if (sep > bestSep) {
        bestSep = sep;
        st.base = cand;
      }
    }
    st.y0 = y_roots(st.base);
    for (int i = 0; i < K; ++i) {
      double rho = std::min(loop_radius(i), 0.3 * bestSep);
      cplx u = (e_[i] - st.base) / std::abs(e_[i] - st.base);
      std::vector<PathNode> nodes{{st.base, -1}};
      for (auto z : circle_points(e_[i], rho, std::arg(-u), 48, true)) nodes.push_back({z, -1});
      nodes.push_back({st.base, -1});
      st.loops.push_back(std::move(nodes));
    }
    return st;
  }

  // One traversal of a star loop: generator i run forwards (dir +1) or
  // backwards (dir -1) starting on sheet `sheet` at the base.
  struct Step {
    int gen, dir, sheet;
  };
  struct Word {
    CVec value;
    std::vector<Step> steps;
  };

  // Closed lifts of words of length <= 3 in the star loops and their
  // periods for each component of f.
  std::vector<Word> word_periods(const Star& st, const Integrand& f, int dim, const std::vector<cplx>& sing,
                                 int order) const {
    const int K = int(e_.size());
    std::vector<std::array<int, 3>> perm(K);
    std::vector<std::array<CVec, 3>> J(K);
    for (int i = 0; i < K; ++i)
      for (int s = 0; s < 3; ++s) {
        auto res = integrate_path(view_, st.loops[i], st.y0[s], nullptr, f, dim, sing, order);
        int end = 0;
        for (int q = 1; q < 3; ++q)
          if (std::abs(st.y0[q] - res.yEnd) < std::abs(st.y0[end] - res.yEnd)) end = q;
        perm[i][s] = end;
        J[i][s] = res.value;
      }
    // generators g_i^{+1} and g_i^{-1}
    struct Gen {
      std::array<int, 3> to;
      std::array<CVec, 3> val;
      std::array<Step, 3> step;
    };
    std::vector<Gen> gens;
    for (int i = 0; i < K; ++i) {
      Gen fw, bw;
      for (int s = 0; s < 3; ++s) {
        fw.to[s] = perm[i][s];
        fw.val[s] = J[i][s];
        fw.step[s] = {i, 1, s};
        bw.to[perm[i][s]] = s;
        bw.val[perm[i][s]] = -J[i][s];
        bw.step[perm[i][s]] = {i, -1, s};
      }
      gens.push_back(fw);
      gens.push_back(bw);
    }
    std::vector<Word> words;
    const int G = int(gens.size());
    for (int s = 0; s < 3; ++s) {
      for (int p = 0; p < G; ++p) {
        int s1 = gens[p].to[s];
        CVec v1 = gens[p].val[s];
        if (s1 == s) words.push_back({v1, {gens[p].step[s]}});
        for (int q = 0; q < G; ++q) {
          int s2 = gens[q].to[s1];
          CVec v2 = v1 + gens[q].val[s1];
          if (s2 == s) words.push_back({v2, {gens[p].step[s], gens[q].step[s1]}});
          for (int r = 0; r < G; ++r) {
            int s3 = gens[r].to[s2];
            if (s3 == s)
              words.push_back({v2 + gens[r].val[s2], {gens[p].step[s], gens[q].step[s1], gens[r].step[s2]}});
          }
        }
      }
    }
    return words;
  }

  std::vector<cplx> loop_periods(int order) const {
    auto words = word_periods(
        star(), [this](cplx l, cplx y) { return CVec::Constant(1, 1.0 / Fy(l, y)); }, 1, {}, order);
    std::vector<cplx> periods;
    for (const auto& w : words) periods.push_back(w.value(0));
    return periods;
  }

  // Signed intersection number of the lifted route with the forward lift of
  // each star loop from each base sheet; +1 when the loop crosses the route
  // from its right to its left.
  std::vector<std::array<int, 3>> route_crossings(const Star& st, const std::vector<PathNode>& route,
                                                  cplx yStart) const {
    std::vector<cplx> yr{yStart};
    for (std::size_t k = 0; k + 1 < route.size(); ++k) yr.push_back(track(view_, route[k].lambda, yr[k], route[k + 1].lambda));
    auto cross = [](cplx u, cplx v) { return u.real() * v.imag() - u.imag() * v.real(); };
    std::vector<std::array<int, 3>> X(st.loops.size());
    for (std::size_t i = 0; i < st.loops.size(); ++i) {
      const auto& lp = st.loops[i];
      for (int s = 0; s < 3; ++s) {
        int n = 0;
        cplx yq = st.y0[s];
        for (std::size_t m = 0; m + 1 < lp.size(); ++m) {
          const cplx q0 = lp[m].lambda, q1 = lp[m + 1].lambda;
          for (std::size_t k = 0; k + 1 < route.size(); ++k) {
            const cplx p0 = route[k].lambda, p1 = route[k + 1].lambda;
            if (!segments_cross(p0, p1, q0, q1)) continue;
            const cplx x = p0 + (cross(q0 - p0, q1 - q0) / cross(p1 - p0, q1 - q0)) * (p1 - p0);
            const cplx y1 = track(view_, p0, yr[k], x), y2 = track(view_, q0, yq, x);
            if (std::abs(y1 - y2) < 1e-6 * (1.0 + std::abs(y1))) n += cross(p1 - p0, q1 - q0) > 0 ? 1 : -1;
          }
          yq = track(view_, q0, yq, q1);
        }
        X[i][s] = n;
      }
    }
    return X;
  }

  std::vector<Poly> a_;
  bool realCoeffs_ = true;
  double scaleF_ = 1.0;
  std::vector<cplx> e_;
  double scale_ = 1.0;
  CurveView view_;
  Genus1Basis basis_;
  cplx C_, Bv_;
  double normRes_ = 0.0;
};

}  // namespace

ProviderPtr make_plane_cubic(const SurfaceConfig& cfg, const nlohmann::json* state) {
  return std::make_shared<PlaneCubic>(cfg, state);
}

}  // namespace thetafay::detail
