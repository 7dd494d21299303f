// y^2 = prod (lambda - e_k), branch points taken in the listed order as a
// chain c_1 .. c_{2g+2}.  A_k encircles [c_{2k-1}, c_{2k}], B_k encircles
// [c_{2k}, c_{2g+1}]; the last point is left free for routing contours.
#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "providers.hpp"
#include "thetafay/quadrature.hpp"

namespace thetafay::detail {

namespace {

struct SegmentRule {
  std::vector<cplx> lam;
  std::vector<cplx> wt;  // integral over the loop of F(lambda)/y dlambda = sum wt F(lam)
};

class Hyperelliptic final : public CurveProvider {
 public:
  Hyperelliptic(const SurfaceConfig& cfg, const nlohmann::json* state) : e_(cfg.branchPoints) {
    const int n = int(e_.size());
    if (n < 4 || n % 2 != 0)
      throw std::invalid_argument("hyperelliptic surface needs an even number (>= 4) of branch points");
    g_ = n / 2 - 1;
    if (g_ > cfg.maxGenus) throw std::invalid_argument("genus exceeds maxGenus");
    scale_ = 1.0;
    for (auto z : e_) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::invalid_argument("non-finite branch point");
      scale_ = std::max(scale_, std::abs(z));
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (std::abs(e_[i] - e_[j]) < 1e-10 * scale_) {
          std::ostringstream os;
          os << "branch points " << i << " and " << j << " coincide";
          throw std::invalid_argument(os.str());
        }
    order_ = cfg.quadratureOrder;
    view_.branch = e_;
    view_.ramification.assign(n, 2);
    view_.roots = [this](cplx l) { return sqrt_pair(P(l)); };
    view_.rootsNear = [this](int i, cplx d) {
      cplx v = d;
      for (int k = 0; k < int(e_.size()); ++k)
        if (k != i) v *= (e_[i] + d - e_[k]);
      return sqrt_pair(v);
    };
    check_chain();
    chain_continuation();
    rules_ = build_rules(order_);
    if (state && state->contains("C")) {
      C_ = cmat_json(state->at("C"));
      B_ = cmat_json(state->at("B"));
      normRes_ = state->at("normalizationResidual").get<double>();
      realStatus_ = state->at("realStatus").get<std::string>();
      if (state->contains("H")) {
        RealStructure rs;
        const auto& h = state->at("H");
        rs.H = IMat(g_, g_);
        for (int i = 0; i < g_; ++i)
          for (int j = 0; j < g_; ++j) rs.H(i, j) = h[i][j].get<int>();
        rs.tau = state->at("tau").get<std::string>();
        rs.integralityDefect = state->at("integralityDefect").get<double>();
        rs.ovals = state->at("ovals").get<int>();
        real_ = rs;
      }
    } else {
      normalize();
    }
  }

  std::string kind() const override { return "hyperelliptic"; }
  int genus() const override { return g_; }
  CMat riemann() const override { return B_; }
  double normalization_residual() const override { return normRes_; }
  std::vector<cplx> branch_points() const override { return e_; }

  std::optional<RealStructure> real_structure(std::string& status) const override {
    status = realStatus_;
    return real_;
  }

  nlohmann::json state() const override {
    nlohmann::json j;
    j["C"] = json_cmat(C_);
    j["B"] = json_cmat(B_);
    j["normalizationResidual"] = normRes_;
    j["realStatus"] = realStatus_;
    if (real_) {
      nlohmann::json h = nlohmann::json::array();
      for (int i = 0; i < g_; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int k = 0; k < g_; ++k) row.push_back(real_->H(i, k));
        h.push_back(row);
      }
      j["H"] = h;
      j["tau"] = real_->tau;
      j["integralityDefect"] = real_->integralityDefect;
      j["ovals"] = real_->ovals;
    }
    return j;
  }

  MarkedPoint point(cplx lambda, int sheet) const override {
    check_regular(lambda);
    MarkedPoint p;
    p.lambda = lambda;
    p.y = std::sqrt(P(lambda)) * (sheet % 2 == 0 ? 1.0 : -1.0);
    p.sheet = sheet % 2;
    return p;
  }

  MarkedPoint point_with_y(cplx lambda, cplx y) const override {
    check_regular(lambda);
    cplx s = std::sqrt(P(lambda));
    if (std::abs(y * y - s * s) > 1e-8 * std::max(1.0, std::norm(s)))
      throw std::invalid_argument("supplied y does not lie on the curve");
    MarkedPoint p;
    p.lambda = lambda;
    p.y = std::abs(y - s) <= std::abs(y + s) ? s : -s;
    p.sheet = std::abs(y - s) <= std::abs(y + s) ? 0 : 1;
    return p;
  }

  MarkedPoint branch_point(int index, int sign) const override {
    if (index < 0 || index >= int(e_.size())) throw std::invalid_argument("branch index out of range");
    MarkedPoint p;
    p.lambda = e_[index];
    p.y = 0.0;
    p.kind = ParamKind::SqrtBranch;
    p.branchIndex = index;
    p.branchSign = sign >= 0 ? 1 : -1;
    return p;
  }

  MarkedPoint tau(const MarkedPoint& p) const override {
    if (!real_) throw std::invalid_argument("surface has no real structure");
    MarkedPoint q = p;
    q.lambda = std::conj(p.lambda);
    q.y = real_->tau == "y->conj(y)" ? std::conj(p.y) : -std::conj(p.y);
    if (p.is_branch()) {
      q.branchIndex = nearest_branch(q.lambda);
      q.lambda = e_[q.branchIndex];
    } else {
      q.sheet = std::abs(q.y - std::sqrt(P(q.lambda))) <= std::abs(q.y + std::sqrt(P(q.lambda))) ? 0 : 1;
    }
    q.beta = std::conj(p.beta);
    q.mu = std::conj(p.mu);
    return q;
  }

  std::vector<MarkedPoint> fiber(cplx za) const override {
    int k = nearest_branch(za);
    if (std::abs(za - e_[k]) < 1e-6 * scale_) {
      std::ostringstream os;
      os << "fiber over " << za << " is ramified near branch point " << k << " " << e_[k];
      throw std::invalid_argument(os.str());
    }
    return {point(za, 0), point(za, 1)};
  }

  PointJet base_jet(const MarkedPoint& p) const override {
    std::vector<CVec> samples;
    const int N = 64;
    double rho;
    PointJet jet;
    if (p.is_branch()) {
      const int bi = p.branchIndex;
      const cplx e = e_[bi];
      double dmin = 1e300;
      for (int k = 0; k < int(e_.size()); ++k)
        if (k != bi) dmin = std::min(dmin, std::abs(e_[k] - e));
      rho = 0.25 * std::sqrt(dmin);
      auto Q2 = [&](cplx k) {
        cplx v = 1.0;
        for (int l = 0; l < int(e_.size()); ++l)
          if (l != bi) v *= (e + k * k - e_[l]);
        return v;
      };
      CurveView qv;
      qv.roots = [&](cplx k) { return sqrt_pair(Q2(k)); };
      cplx q0 = double(p.branchSign) * std::sqrt(Q2(0.0));
      cplx q = track(qv, 0.0, q0, rho);
      auto pts = circle_points(0.0, rho, 0.0, N, true);
      cplx kprev = rho;
      for (int j = 0; j < N; ++j) {
        cplx k = pts[j];
        q = track(qv, kprev, q, k);
        kprev = k;
        cplx lam = e + k * k;
        samples.push_back(2.0 * omega_poly(lam) / q);
      }
      cplx qend = track(qv, kprev, q, pts[N]);
      jet.closure = std::abs(qend - track(qv, 0.0, q0, rho));
    } else {
      const cplx l0 = p.lambda;
      double dmin = 1e300;
      for (auto z : e_) dmin = std::min(dmin, std::abs(z - l0));
      rho = 0.25 * dmin;
      cplx y = track(view_, l0, p.y, l0 + rho);
      cplx ystart = y;
      auto pts = circle_points(l0, rho, 0.0, N, true);
      cplx prev = pts[0];
      for (int j = 0; j < N; ++j) {
        y = track(view_, prev, y, pts[j]);
        prev = pts[j];
        samples.push_back(omega_poly(pts[j]) / y);
      }
      y = track(view_, prev, y, pts[N]);
      jet.closure = std::abs(y - ystart);
    }
    CVec c0, c1, c2;
    cauchy_coefficients(samples, rho, c0, c1, c2);
    jet.V = c0;
    jet.W = c1;
    jet.U = 2.0 * c2;
    return jet;
  }

  AbelPath abel(const MarkedPoint& a, const MarkedPoint& b, const PathSpec& path) const override {
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
      out.r = CVec::Zero(g_);
      out.contour = "trivial";
      return out;
    }
    std::vector<PathSpec> tries;
    if (!path.empty()) {
      tries.push_back(path);
    } else {
      bool sameFiber = !a.is_branch() && !b.is_branch() && std::abs(a.lambda - b.lambda) < 1e-14 * scale_;
      if (!sameFiber) tries.push_back(PathSpec{});
      PathSpec viaFree;
      viaFree.throughBranch = int(e_.size()) - 1;
      tries.push_back(viaFree);
    }
    // first contour that reaches b without meeting the cycle chain; failing
    // that, the first one that reaches b at all
    std::string lastErr;
    std::optional<AbelPath> fallback;
    for (const auto& t : tries) {
      auto nodes = route_nodes(a, b, t, e_);
      try {
        check_route(nodes);
        cplx yb = b.y;
        auto res = integrate_path(view_, nodes, a.y, b.is_branch() ? nullptr : &yb,
                                  [this](cplx l, cplx y) { return CVec(omega_poly(l) / y); }, g_, {});
        AbelPath cand = out;
        cand.r = res.value;
        cand.path = t;
        cand.contour = describe_route(nodes);
        cand.crossesCycles = route_crosses(nodes, chain_cuts());
        if (!cand.crossesCycles) return cand;
        if (!fallback) fallback = cand;
      } catch (const NumericalError& ex) {
        lastErr = ex.what();
      }
    }
    if (fallback) return *fallback;
    throw NumericalError("no contour reaches the target sheet: " + lastErr);
  }

  bool supports_third_kind() const override { return true; }

  cplx third_kind(const MarkedPoint& a, const MarkedPoint& b, const PathSpec& route, double eps, cplx& ka,
                  cplx& kb) const override {
    if (a.is_branch() && b.is_branch())
      throw std::invalid_argument("third-kind oracle needs at least one regular endpoint");
    auto nodes = route_nodes(a, b, route, e_);
    for (std::size_t i = 1; i + 1 < nodes.size(); ++i)
      if (nodes[i].branch >= 0 && (a.is_branch() || b.is_branch()))
        throw std::invalid_argument("third-kind oracle: interior branch node with a branch endpoint");
    // sheet values at the interior nodes adjacent to the ends
    auto near_end = [&](const MarkedPoint& p, cplx nextLam, cplx yNext, cplx& kout, cplx& yout) -> cplx {
      if (!p.is_branch()) {
        cplx u = (nextLam - p.lambda) / std::abs(nextLam - p.lambda);
        cplx lam = p.lambda + eps * u;
        yout = track(view_, p.lambda, p.y, lam);
        kout = eps * u;
        return lam;
      }
      const cplx e = e_[p.branchIndex];
      cplx D = nextLam - e;
      double s = eps / std::sqrt(std::abs(D));
      yout = track_near(view_, p.branchIndex, D, yNext, D * s * s);
      cplx k = std::sqrt(D * s * s);
      cplx q0 = double(p.branchSign) * std::sqrt(dP_other(p.branchIndex));
      if (std::abs(-k * q0 - yout) < std::abs(k * q0 - yout)) k = -k;
      kout = k;
      return e + D * s * s;
    };
    // y at node 1 and node L-1 obtained by tracking from the regular end
    const int L = int(nodes.size()) - 1;
    auto y_after = [&](bool fromA) {
      // track from the regular endpoint along the route to the node next to the other end
      std::vector<PathNode> seq(nodes.begin(), nodes.end());
      if (!fromA) std::reverse(seq.begin(), seq.end());
      cplx y = fromA ? a.y : b.y;
      for (int k = 0; k + 1 < L; ++k) {
        if (seq[k + 1].branch >= 0) throw std::invalid_argument("unsupported route for oracle");
        y = track(view_, seq[k].lambda, y, seq[k + 1].lambda);
      }
      return y;
    };
    cplx ya_t, yb_t;
    cplx la = near_end(a, nodes[1].lambda, a.is_branch() ? y_after(false) : cplx(0), ka, ya_t);
    cplx lb = near_end(b, nodes[L - 1].lambda, b.is_branch() ? y_after(true) : cplx(0), kb, yb_t);
    std::vector<PathNode> inner = nodes;
    inner.front() = PathNode{la, -1};
    inner.back() = PathNode{lb, -1};
    const cplx yA = a.is_branch() ? cplx(0) : a.y, yB = b.is_branch() ? cplx(0) : b.y;
    const cplx lA = a.lambda, lB = b.lambda;
    auto integrand = [&](cplx l, cplx y) {
      CVec v(g_ + 1);
      v.head(g_) = omega_poly(l) / y;
      v(g_) = (y + yB) / (2.0 * y * (l - lB)) - (y + yA) / (2.0 * y * (l - lA));
      return v;
    };
    auto res = integrate_path(view_, inner, ya_t, &yb_t, integrand, g_ + 1, {lA, lB});
    // A-periods of the unnormalized differential: only its odd part survives
    for (const auto& seg : chain_cuts())
      if (distance_to_segment(lA, seg.first, seg.second) < 1e-9 * scale_ ||
          distance_to_segment(lB, seg.first, seg.second) < 1e-9 * scale_)
        throw NumericalError("pole of the third-kind differential lies on a basis cut");
    CVec c(g_);
    for (int k = 0; k < g_; ++k) {
      const auto& rule = rules_[2 * k];
      cplx acc = 0.0;
      for (std::size_t i = 0; i < rule.lam.size(); ++i) {
        cplx l = rule.lam[i];
        acc += rule.wt[i] * 0.5 * (yB / (l - lB) - yA / (l - lA));
      }
      c(k) = acc / (2.0 * kPi * kI);
    }
    // omega_poly already includes C, so subtract c . (integral of normalized omega)
    return res.value(g_) - bdot(c, res.value.head(g_));
  }

 private:
  static std::vector<cplx> sqrt_pair(cplx v) {
    cplx s = std::sqrt(v);
    return {s, -s};
  }

  cplx P(cplx l) const {
    cplx v = 1.0;
    for (auto z : e_) v *= (l - z);
    return v;
  }

  cplx dP_other(int bi) const {
    cplx v = 1.0;
    for (int k = 0; k < int(e_.size()); ++k)
      if (k != bi) v *= (e_[bi] - e_[k]);
    return v;
  }

  // normalized omega coefficients times y
  CVec omega_poly(cplx l) const {
    CVec pw(g_);
    cplx t = 1.0;
    for (int k = 0; k < g_; ++k) {
      pw(k) = t;
      t *= l;
    }
    return C_ * pw;
  }

  int nearest_branch(cplx z) const {
    int best = 0;
    for (int k = 1; k < int(e_.size()); ++k)
      if (std::abs(e_[k] - z) < std::abs(e_[best] - z)) best = k;
    return best;
  }

  void check_regular(cplx lambda) const {
    if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()))
      throw std::invalid_argument("non-finite point coordinate");
    int k = nearest_branch(lambda);
    if (std::abs(lambda - e_[k]) < 1e-10 * scale_) {
      std::ostringstream os;
      os << "point coincides with branch point " << k << "; use a branch point with sqrtBranch parameter";
      throw std::invalid_argument(os.str());
    }
  }

  std::vector<std::pair<cplx, cplx>> chain_cuts() const {
    std::vector<std::pair<cplx, cplx>> cuts;
    for (int j = 0; j < 2 * g_; ++j) cuts.emplace_back(e_[j], e_[j + 1]);
    return cuts;
  }

  void check_chain() const {
    for (int j = 0; j < 2 * g_; ++j)
      for (int k = 0; k < int(e_.size()); ++k) {
        if (k == j || k == j + 1) continue;
        if (distance_to_segment(e_[k], e_[j], e_[j + 1]) < 1e-6 * scale_) {
          std::ostringstream os;
          os << "chain segment " << j << " passes through branch point " << k;
          throw std::invalid_argument(os.str());
        }
      }
  }

  void check_route(const std::vector<PathNode>& nodes) const {
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
      for (int k = 0; k < int(e_.size()); ++k) {
        if (nodes[i].branch == k || nodes[i + 1].branch == k) continue;
        if (distance_to_segment(e_[k], nodes[i].lambda, nodes[i + 1].lambda) < 1e-9 * scale_) {
          std::ostringstream os;
          os << "contour forced through branch point " << k;
          throw NumericalError(os.str());
        }
      }
  }

  void chain_continuation() {
    const int ns = 2 * g_;
    mids_.resize(ns);
    ym_.resize(ns);
    for (int j = 0; j < ns; ++j) mids_[j] = 0.5 * (e_[j] + e_[j + 1]);
    cplx y = std::sqrt(P(mids_[0]));
    ym_[0] = y;
    for (int j = 1; j < ns; ++j) {
      cplx din = (e_[j] - e_[j - 1]) / std::abs(e_[j] - e_[j - 1]);
      cplx dout = (e_[j + 1] - e_[j]) / std::abs(e_[j + 1] - e_[j]);
      double dmin = 1e300;
      for (int k = 0; k < int(e_.size()); ++k)
        if (k != j) dmin = std::min(dmin, std::abs(e_[j] - e_[k]));
      double rho = 0.05 * dmin;
      double p0 = std::arg(-din), p1 = std::arg(dout);
      double d = std::fmod(p0 - p1, 2.0 * kPi);
      if (d < 0) d += 2.0 * kPi;
      std::vector<cplx> path{mids_[j - 1], e_[j] - rho * din};
      const int na = 64;
      for (int k = 1; k <= na; ++k) path.push_back(e_[j] + std::polar(rho, p0 - d * k / na));
      path.push_back(mids_[j]);
      for (std::size_t k = 0; k + 1 < path.size(); ++k) y = track(view_, path[k], y, path[k + 1]);
      ym_[j] = y;
    }
  }

  std::vector<SegmentRule> build_rules(int order) const {
    const int ns = 2 * g_;
    const GaussRule& gr = gauss_legendre(order);
    std::vector<SegmentRule> rules(ns);
    for (int j = 0; j < ns; ++j) {
      cplx a = e_[j], b = e_[j + 1];
      cplx m = 0.5 * (a + b), h = 0.5 * (b - a);
      auto R2 = [&](cplx l) {
        cplx v = 1.0;
        for (int k = 0; k < int(e_.size()); ++k)
          if (k != j && k != j + 1) v *= (l - e_[k]);
        return v;
      };
      CurveView rv;
      rv.roots = [&](cplx l) { return sqrt_pair(R2(l)); };
      cplx Rm = std::sqrt(R2(m));
      cplx kap = ym_[j] / Rm;
      std::vector<double> th(order), w(order);
      for (int i = 0; i < order; ++i) {
        th[i] = 0.5 * (gr.x[i] + 1.0) * kPi;
        w[i] = 0.5 * kPi * gr.w[i];
      }
      std::vector<cplx> R(order);
      // continue R from the midpoint towards both ends
      std::vector<int> up, dn;
      for (int i = 0; i < order; ++i) (th[i] < 0.5 * kPi ? up : dn).push_back(i);
      std::sort(up.begin(), up.end(), [&](int p, int q) { return th[p] > th[q]; });
      std::sort(dn.begin(), dn.end(), [&](int p, int q) { return th[p] < th[q]; });
      for (const auto* seq : {&up, &dn}) {
        cplx prev = m, val = Rm;
        for (int i : *seq) {
          cplx l = m + h * std::cos(th[i]);
          val = track(rv, prev, val, l);
          prev = l;
          R[i] = val;
        }
      }
      SegmentRule& sr = rules[j];
      for (int i = 0; i < order; ++i) {
        sr.lam.push_back(m + h * std::cos(th[i]));
        sr.wt.push_back(2.0 * (h / kap) * w[i] / R[i]);
      }
    }
    return rules;
  }

  static CMat segment_periods(const std::vector<SegmentRule>& rules, int g) {
    CMat I(rules.size(), g);
    for (std::size_t j = 0; j < rules.size(); ++j)
      for (int k = 0; k < g; ++k) {
        cplx acc = 0.0;
        for (std::size_t i = 0; i < rules[j].lam.size(); ++i) acc += rules[j].wt[i] * std::pow(rules[j].lam[i], k);
        I(j, k) = acc;
      }
    return I;
  }

  // chain loop around [c_p, c_q] (1-based) as a sum of segment integrals
  static CVec loop(const CMat& I, int p, int q) {
    CVec v = CVec::Zero(I.cols());
    for (int j = p; j < q; ++j)
      if ((q - j) % 2 == 1) v += I.row(j - 1).transpose();
    return v;
  }

  void periods(const std::vector<SegmentRule>& rules, CMat& PA, CMat& PB) const {
    CMat I = segment_periods(rules, g_);
    PA.resize(g_, g_);
    PB.resize(g_, g_);
    for (int k = 1; k <= g_; ++k) {
      PA.col(k - 1) = loop(I, 2 * k - 1, 2 * k);
      PB.col(k - 1) = loop(I, 2 * k, 2 * g_ + 1);
    }
  }

  void normalize() {
    CMat PA, PB;
    periods(rules_, PA, PB);
    Eigen::JacobiSVD<CMat> svd(PA);
    double cond = svd.singularValues()(0) / svd.singularValues()(g_ - 1);
    if (!(cond < 1e10)) throw NumericalError("A-period matrix is ill conditioned");
    C_ = (2.0 * kPi * kI) * PA.inverse();
    CMat B = C_ * PB;
    double scl = B.cwiseAbs().maxCoeff();
    double asym = (B - B.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-8 * scl) {
      std::ostringstream os;
      os << "period matrix symmetry check failed (defect " << asym / scl << ")";
      throw NumericalError(os.str());
    }
    B = 0.5 * (B + B.transpose());
    Eigen::SelfAdjointEigenSolver<RMat> es(B.real());
    if (es.eigenvalues().minCoeff() > 0) B = -B;
    // quadrature check at doubled order
    CMat PA2, PB2;
    periods(build_rules(2 * order_), PA2, PB2);
    normRes_ = (C_ * PA2 - (2.0 * kPi * kI) * CMat::Identity(g_, g_)).cwiseAbs().maxCoeff();
    B_ = B;
    infer_real();
  }

  void infer_real() {
    // branch set closed under conjugation?
    for (auto z : e_) {
      double best = 1e300;
      for (auto w : e_) best = std::min(best, std::abs(std::conj(z) - w));
      if (best > 1e-10 * scale_) {
        realStatus_ = "branch points are not closed under conjugation";
        return;
      }
    }
    double cmax = C_.cwiseAbs().maxCoeff();
    std::string tau;
    if (C_.imag().cwiseAbs().maxCoeff() <= 1e-8 * cmax)
      tau = "y->-conj(y)";
    else if (C_.real().cwiseAbs().maxCoeff() <= 1e-8 * cmax)
      tau = "y->conj(y)";
    else {
      realStatus_ = "normalization constants are neither real nor imaginary for this chain order";
      return;
    }
    RMat Hr = ((B_ - B_.conjugate()) / (2.0 * kPi * kI)).real();
    IMat H = Hr.array().round().cast<int>();
    double defect = (Hr - H.cast<double>()).cwiseAbs().maxCoeff();
    if (defect > 1e-8) {
      std::ostringstream os;
      os << "H-integrality gate failed (defect " << defect << ")";
      realStatus_ = os.str();
      return;
    }
    // reduce H to {0,1} by B -> B - 2 pi i S
    IMat S(g_, g_);
    for (int i = 0; i < g_; ++i)
      for (int j = 0; j < g_; ++j) {
        int h = H(i, j);
        int m = ((h % 2) + 2) % 2;
        S(i, j) = (h - m) / 2;
        H(i, j) = m;
      }
    B_ -= (2.0 * kPi * kI) * S.cast<double>().cast<cplx>();
    RealStructure rs;
    rs.H = H;
    rs.tau = tau;
    rs.integralityDefect = defect;
    rs.ovals = count_ovals(tau == "y->conj(y)");
    real_ = rs;
    realStatus_ = "ok";
  }

  int count_ovals(bool positive) const {
    std::vector<double> r;
    for (auto z : e_)
      if (std::abs(z.imag()) <= 1e-10 * scale_) r.push_back(z.real());
    std::sort(r.begin(), r.end());
    auto sgn = [&](double x) { return (P(cplx(x, 0.0)).real() > 0) == positive; };
    // without real roots the two sheets over R close up through infinity:
    // y / lambda^{g+1} has the same sign at both ends iff g is odd
    if (r.empty()) return sgn(0.0) ? (g_ % 2 == 1 ? 2 : 1) : 0;
    int n = 0;
    for (std::size_t i = 0; i + 1 < r.size(); ++i) n += sgn(0.5 * (r[i] + r[i + 1])) ? 1 : 0;
    n += sgn(r.back() + 1.0 + std::abs(r.back())) ? 1 : 0;
    return n;
  }

  std::vector<cplx> e_;
  int g_ = 0;
  int order_ = 64;
  double scale_ = 1.0;
  CurveView view_;
  std::vector<cplx> mids_, ym_;
  std::vector<SegmentRule> rules_;
  CMat C_, B_;
  double normRes_ = 0.0;
  std::optional<RealStructure> real_;
  std::string realStatus_ = "not evaluated";
};

}  // namespace

ProviderPtr make_hyperelliptic(const SurfaceConfig& cfg, const nlohmann::json* state) {
  return std::make_shared<Hyperelliptic>(cfg, state);
}

}  // namespace thetafay::detail
