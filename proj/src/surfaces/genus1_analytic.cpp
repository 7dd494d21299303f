// Torus C / (2 pi i Z + B Z) with omega = d zeta.
#include <cmath>

#include "jacobi.hpp"
#include "providers.hpp"

namespace thetafay::detail {

namespace {

class Genus1Analytic final : public CurveProvider {
 public:
  explicit Genus1Analytic(const SurfaceConfig& cfg) {
    if (cfg.B.rows() != 1 || cfg.B.cols() != 1) throw std::invalid_argument("genus1Analytic needs a 1x1 B");
    B_ = cfg.B(0, 0);
    if (!(B_.real() < 0)) throw std::invalid_argument("genus1Analytic needs Re B < 0");
    double h = B_.imag() / kPi;
    double hr = std::round(h);
    if (std::abs(h - hr) <= 1e-8) {
      int H = int(hr);
      int m = ((H % 2) + 2) % 2;
      B_ -= 2.0 * kPi * kI * double((H - m) / 2);
      RealStructure rs;
      rs.H = IMat::Constant(1, 1, m);
      rs.tau = "zeta->-conj(zeta)";
      rs.integralityDefect = std::abs(h - hr);
      real_ = rs;
      status_ = "ok";
    } else {
      status_ = "lattice is not invariant under zeta -> -conj(zeta)";
    }
  }

  std::string kind() const override { return "genus1Analytic"; }
  int genus() const override { return 1; }
  CMat riemann() const override { return CMat::Constant(1, 1, B_); }

  std::optional<RealStructure> real_structure(std::string& status) const override {
    status = status_;
    return real_;
  }

  MarkedPoint point(cplx zeta, int) const override {
    MarkedPoint p;
    p.lambda = zeta;
    return p;
  }

  MarkedPoint point_with_y(cplx zeta, cplx) const override { return point(zeta, 0); }

  MarkedPoint tau(const MarkedPoint& p) const override {
    if (!real_) throw std::invalid_argument("surface has no real structure");
    MarkedPoint q = p;
    q.lambda = -std::conj(p.lambda);
    q.beta = -std::conj(p.beta);
    q.mu = std::conj(p.mu);
    return q;
  }

  PointJet base_jet(const MarkedPoint& p) const override {
    if (p.is_branch()) throw std::invalid_argument("sqrtBranch parameters are only defined on hyperelliptic curves");
    PointJet j;
    j.V = CVec::Constant(1, 1.0);
    j.W = CVec::Zero(1);
    j.U = CVec::Zero(1);
    return j;
  }

  AbelPath abel(const MarkedPoint& a, const MarkedPoint& b, const PathSpec&) const override {
    AbelPath out;
    out.a = a;
    out.b = b;
    out.r = CVec::Constant(1, b.lambda - a.lambda);
    out.contour = "straight line in the uniformizing coordinate";
    return out;
  }

  bool supports_third_kind() const override { return true; }

  cplx third_kind(const MarkedPoint& a, const MarkedPoint& b, const PathSpec&, double eps, cplx& ka,
                  cplx& kb) const override {
    cplx d = b.lambda - a.lambda;
    cplx u = d / std::abs(d);
    ka = eps * u;
    kb = -eps * u;
    const cplx tau = B_ / (2.0 * kPi * kI);
    auto F = [&](cplx z) {
      cplx x = z / (2.0 * kI);  // pi * (zeta / (2 pi i))
      cplx xb = b.lambda / (2.0 * kI), xa = a.lambda / (2.0 * kI);
      return std::log(jacobi_theta1(x - xb, tau)) - std::log(jacobi_theta1(x - xa, tau));
    };
    return F(b.lambda + kb) - F(a.lambda + ka);
  }

 private:
  cplx B_;
  std::optional<RealStructure> real_;
  std::string status_;
};

}  // namespace

ProviderPtr make_genus1_analytic(const SurfaceConfig& cfg) { return std::make_shared<Genus1Analytic>(cfg); }

}  // namespace thetafay::detail
