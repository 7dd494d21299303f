// y^3 = prod (lambda - e_k) over two or three finite points (genus 1).
// Holomorphic differential dlambda / y^2; the lattice is generated by lifts
// of [e_1, e_2] to sheet pairs (0,1) and (1,2).
#include <cmath>
#include <sstream>

#include "providers.hpp"

namespace thetafay::detail {

namespace {

const cplx kZeta = std::polar(1.0, 2.0 * kPi / 3.0);

cplx cbrt_principal(cplx v) {
  if (v == cplx(0.0, 0.0)) return 0.0;
  return std::polar(std::cbrt(std::abs(v)), std::arg(v) / 3.0);
}

class Superelliptic final : public CurveProvider {
 public:
  Superelliptic(const SurfaceConfig& cfg, const nlohmann::json* state) : e_(cfg.branchPoints) {
    if (cfg.degree != 3)
      throw std::invalid_argument("superelliptic provider supports cube-root covers only");
    const int m = int(e_.size());
    if (m != 2 && m != 3)
      throw std::invalid_argument("superelliptic provider supports genus-1 covers (2 or 3 finite branch points)");
    scale_ = 1.0;
    for (auto z : e_) scale_ = std::max(scale_, std::abs(z));
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (std::abs(e_[i] - e_[j]) < 1e-10 * scale_) throw std::invalid_argument("branch points coincide");
    if (m == 3 && distance_to_segment(e_[2], e_[0], e_[1]) < 1e-6 * scale_)
      throw std::invalid_argument("third branch point lies on the basis segment");
    view_.branch = e_;
    view_.ramification.assign(m, 3);
    view_.roots = [this](cplx l) { return cube_roots(P(l)); };
    view_.rootsNear = [this](int i, cplx d) {
      cplx v = d;
      for (int k = 0; k < int(e_.size()); ++k)
        if (k != i) v *= (e_[i] + d - e_[k]);
      return cube_roots(v);
    };
    bool conj = true;
    for (auto z : e_) {
      double best = 1e300;
      for (auto w : e_) best = std::min(best, std::abs(std::conj(z) - w));
      if (best > 1e-10 * scale_) conj = false;
    }
    cplx J0 = segment_integral([](cplx, cplx y) { return CVec::Constant(1, 1.0 / (y * y)); }, 0, 16);
    cplx J0b = segment_integral([](cplx, cplx y) { return CVec::Constant(1, 1.0 / (y * y)); }, 0, 32);
    normRes_ = std::abs(J0 - J0b) / std::abs(J0);
    const cplx J1 = J0 * std::pow(kZeta, -2.0), J2 = J0 * std::pow(kZeta, -4.0);
    basis_ = adapt_genus1(J0 - J1, J1 - J2, conj);
    if (state && state->contains("C")) {
      C_ = cvec_json_c(state->at("C"));
      Bv_ = cvec_json_c(state->at("B"));
    } else {
      C_ = 2.0 * kPi * kI / basis_.omegaA;
      Bv_ = 2.0 * kPi * kI * basis_.omegaB / basis_.omegaA;
    }
  }

  std::string kind() const override { return "superelliptic"; }
  int genus() const override { return 1; }
  CMat riemann() const override { return CMat::Constant(1, 1, Bv_); }
  double normalization_residual() const override { return normRes_; }
  std::vector<cplx> branch_points() const override { return e_; }

  nlohmann::json state() const override {
    return {{"C", json_c(C_)}, {"B", json_c(Bv_)}};
  }

  std::optional<RealStructure> real_structure(std::string& status) const override {
    status = basis_.status;
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
    MarkedPoint p;
    p.lambda = lambda;
    p.sheet = ((sheet % 3) + 3) % 3;
    p.y = cbrt_principal(P(lambda)) * std::pow(kZeta, double(p.sheet));
    return p;
  }

  MarkedPoint point_with_y(cplx lambda, cplx y) const override {
    check_regular(lambda);
    auto r = cube_roots(P(lambda));
    int best = 0;
    for (int s = 1; s < 3; ++s)
      if (std::abs(r[s] - y) < std::abs(r[best] - y)) best = s;
    if (std::abs(r[best] - y) > 1e-6 * std::max(1.0, std::abs(y)))
      throw std::invalid_argument("supplied y does not lie on the curve");
    return point(lambda, best);
  }

  MarkedPoint tau(const MarkedPoint& p) const override {
    if (!basis_.real) throw std::invalid_argument("surface has no real structure");
    return point_with_y(std::conj(p.lambda), std::conj(p.y));
  }

  std::vector<MarkedPoint> fiber(cplx za) const override {
    for (int k = 0; k < int(e_.size()); ++k)
      if (std::abs(za - e_[k]) < 1e-6 * scale_) {
        std::ostringstream os;
        os << "fiber over " << za << " is ramified near branch point " << k;
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
      samples.push_back(CVec::Constant(1, C_ / (y * y)));
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
    if (a.is_branch() || b.is_branch())
      throw std::invalid_argument("superelliptic marked points must be regular");
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
      // contours that stay off the basis segment first, so that the
      // increment lies in the fundamental polygon
      const bool distinct = std::abs(a.lambda - b.lambda) > 1e-14 * scale_;
      const bool straightCrosses = segments_cross(a.lambda, b.lambda, e_[0], e_[1]);
      if (distinct && !straightCrosses) tries.push_back(PathSpec{});
      for (int w : {0, -1, 1, -2, 2, -3, 3}) tries.push_back(loop_route(a.lambda, b.lambda, w));
      if (distinct && straightCrosses) tries.push_back(PathSpec{});
    }
    std::string lastErr;
    for (const auto& t : tries) {
      auto nodes = route_nodes(a, b, t, e_);
      try {
        cplx yb = b.y;
        auto res = integrate_path(view_, nodes, a.y, &yb,
                                  [this](cplx, cplx y) { return CVec::Constant(1, C_ / (y * y)); }, 1, {});
        out.r = res.value;
        out.path = t;
        out.contour = describe_route(nodes);
        out.crossesCycles = route_crosses(nodes, {{e_[0], e_[1]}});
        return out;
      } catch (const SheetMismatch& ex) {
        lastErr = ex.what();
      }
    }
    throw NumericalError("no contour reaches the target sheet: " + lastErr);
  }

  bool supports_third_kind() const override { return true; }

  cplx third_kind(const MarkedPoint& a, const MarkedPoint& b, const PathSpec& route, double eps, cplx& ka,
                  cplx& kb) const override {
    auto nodes = route_nodes(a, b, route, e_);
    const int L = int(nodes.size()) - 1;
    cplx ua = (nodes[1].lambda - a.lambda) / std::abs(nodes[1].lambda - a.lambda);
    cplx ub = (nodes[L - 1].lambda - b.lambda) / std::abs(nodes[L - 1].lambda - b.lambda);
    ka = eps * ua;
    kb = eps * ub;
    cplx la = a.lambda + ka, lb = b.lambda + kb;
    cplx ya = track(view_, a.lambda, a.y, la), yb = track(view_, b.lambda, b.y, lb);
    std::vector<PathNode> inner = nodes;
    inner.front() = PathNode{la, -1};
    inner.back() = PathNode{lb, -1};
    const cplx lA = a.lambda, lB = b.lambda, yA = a.y, yB = b.y;
    auto omega0 = [=](cplx l, cplx y) {
      cplx acc = 0.0;
      for (int j = 0; j < 3; ++j) acc += std::pow(yB / y, double(j)) / (l - lB) - std::pow(yA / y, double(j)) / (l - lA);
      return acc / 3.0;
    };
    auto integrand = [&](cplx l, cplx y) {
      CVec v(2);
      v(0) = C_ / (y * y);
      v(1) = omega0(l, y);
      return v;
    };
    auto res = integrate_path(view_, inner, ya, &yb, integrand, 2, {lA, lB});
    if (distance_to_segment(lA, e_[0], e_[1]) < 1e-9 * scale_ || distance_to_segment(lB, e_[0], e_[1]) < 1e-9 * scale_)
      throw NumericalError("pole of the third-kind differential lies on the basis segment");
    cplx K[3];
    for (int s = 0; s < 3; ++s) {
      cplx z = std::pow(kZeta, double(s));
      K[s] = segment_integral([&](cplx l, cplx y) { return CVec::Constant(1, omega0(l, z * y)); }, 0, 16, {lA, lB});
    }
    cplx G01 = K[0] - K[1], G12 = K[1] - K[2];
    cplx periodA = double(basis_.coeff(0, 0)) * G01 + double(basis_.coeff(0, 1)) * G12;
    cplx c = periodA / (2.0 * kPi * kI);
    return res.value(1) - c * res.value(0);
  }

 private:
  static std::vector<cplx> cube_roots(cplx v) {
    cplx c = cbrt_principal(v);
    return {c, c * kZeta, c * kZeta * kZeta};
  }

  cplx P(cplx l) const {
    cplx v = 1.0;
    for (auto z : e_) v *= (l - z);
    return v;
  }

  void check_regular(cplx lambda) const {
    for (int k = 0; k < int(e_.size()); ++k)
      if (std::abs(lambda - e_[k]) < 1e-10 * scale_) {
        std::ostringstream os;
        os << "point coincides with branch point " << k;
        throw std::invalid_argument(os.str());
      }
  }

  // integral over [e_1, e_2] on the principal sheet at the midpoint
  cplx segment_integral(const Integrand& f, int comp, int order, const std::vector<cplx>& extra = {}) const {
    std::vector<PathNode> nodes{{e_[0], 0}, {e_[1], 1}};
    return integrate_path(view_, nodes, 0.0, nullptr, f, 1, extra, order).value(comp);
  }

  // Arc of an ellipse around [e_1, e_2] from the direction of la to the
  // direction of lb, with `extra` additional full turns.  Radial legs join
  // the endpoints, so the contour never meets the segment.
  PathSpec loop_route(cplx la, cplx lb, int extra) const {
    cplx m = 0.5 * (e_[0] + e_[1]);
    double h = 0.5 * std::abs(e_[1] - e_[0]);
    cplx u = (e_[1] - e_[0]) / (2.0 * h);
    double d = h;
    for (std::size_t k = 2; k < e_.size(); ++k) d = std::min(d, distance_to_segment(e_[k], e_[0], e_[1]));
    double da = 0.4 * d;
    double A = h + da, Bq = da;
    auto angle = [&](cplx l) {
      cplx rel = (l - m) / u;
      return std::atan2(rel.imag() / Bq, rel.real() / A);
    };
    double pa = angle(la), pb = angle(lb);
    double total = std::remainder(pb - pa, 2.0 * kPi) + 2.0 * kPi * extra;
    int n = std::max(2, int(std::ceil(std::abs(total) / (2.0 * kPi) * 48.0)));
    PathSpec ps;
    for (int k = 0; k <= n; ++k) {
      double phi = pa + total * k / n;
      ps.via.push_back(m + u * cplx(A * std::cos(phi), Bq * std::sin(phi)));
    }
    return ps;
  }

  std::vector<cplx> e_;
  double scale_ = 1.0;
  CurveView view_;
  Genus1Basis basis_;
  cplx C_, Bv_;
  double normRes_ = 0.0;
};

}  // namespace

ProviderPtr make_superelliptic(const SurfaceConfig& cfg, const nlohmann::json* state) {
  return std::make_shared<Superelliptic>(cfg, state);
}

}  // namespace thetafay::detail
