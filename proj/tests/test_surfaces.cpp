#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "support.hpp"

using namespace tsupport;

namespace {

std::string fresh_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() / ("thetafay-test-" + tag);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

SurfaceConfig hyper(std::initializer_list<double> pts) {
  J j{{"provider", "hyperelliptic"}, {"branchPoints", std::vector<double>(pts)}};
  return SurfaceConfig::from_json(j);
}

}  // namespace

TEST_CASE("real quartic period ratio matches the AGM oracle") {
  const auto& s = surf("realg1.json");
  cplx tau = s.B()(0, 0) / cplx(0, 2 * kPi);
  cplx ref = oracle::real_quartic_tau(-2, -1, 1, 2);
  CHECK(std::abs(oracle::reduce_modular(tau) - oracle::reduce_modular(ref)) < 1e-10);

  auto other = build_surface(hyper({0.5, -1.5, -3.0, 4.0}));
  cplx t2 = other.B()(0, 0) / cplx(0, 2 * kPi);
  CHECK(std::abs(oracle::reduce_modular(t2) - oracle::reduce_modular(oracle::real_quartic_tau(-3, -1.5, 0.5, 4))) <
        1e-10);
}

TEST_CASE("period matrices are normalized and symmetric") {
  for (const char* n : {"realg1.json", "genus2.json", "realg3.json", "conjg2.json", "superelliptic.json",
                        "planecubic.json"}) {
    const auto& s = surf(n);
    CAPTURE(std::string(n));
    CHECK(s.normalization_residual() < 1e-10);
    CHECK((s.B() - s.B().transpose()).norm() < 1e-10 * s.B().norm());
    CHECK(s.riemann().y().llt().info() == Eigen::Success);
  }
}

TEST_CASE("real structure census") {
  struct Row {
    const char* name;
    IMat H;
    int ovals;
  };
  IMat pair(2, 2);
  pair << 0, 1, 1, 0;
  std::vector<Row> rows = {{"realg1.json", IMat::Zero(1, 1), 2},     {"genus2.json", IMat::Zero(2, 2), 3},
                           {"realg3.json", IMat::Zero(3, 3), 4},     {"conjg1-tau1.json", IMat::Zero(1, 1), 2},
                           {"conjg1-tau2.json", IMat::Zero(1, 1), 0}, {"conjg2.json", pair, 0}};
  for (const auto& r : rows) {
    const auto& s = surf(r.name);
    CAPTURE(std::string(r.name));
    REQUIRE(s.real_structure().has_value());
    const auto& rs = *s.real_structure();
    CHECK(rs.integralityDefect < 1e-8);
    CHECK(rs.H == r.H);
    CHECK(rs.ovals == r.ovals);
    // independent recomputation of (B - conj B) / (2 pi i)
    CMat Hc = (s.B() - s.B().conjugate()) / cplx(0, 2 * kPi);
    for (int i = 0; i < Hc.rows(); ++i)
      for (int j = 0; j < Hc.cols(); ++j) {
        double v = Hc(i, j).real();
        CHECK(std::abs(v - std::round(v)) < 1e-8);
        CHECK(((long(std::lround(v)) % 2) + 2) % 2 == r.H(i, j));
      }
  }
  // a generic torus has no real structure
  CHECK_FALSE(surf("genus1-analytic.json").real_structure().has_value());
}

TEST_CASE("involution: fixed points on real curves, tau is an involution") {
  const auto& s = surf("realg1.json");
  auto p = s.point(2.5, 0);
  CHECK(same_point(s.tau(p), p));
  auto q = s.point(cplx(0.3, 0.4), 1);
  CHECK(same_point(s.tau(s.tau(q)), q));
  CHECK_FALSE(same_point(s.tau(q), q));
  // conjugate pair on the tau2 surface: tau flips the sheet of real points
  const auto& c = surf("conjg1-tau2.json");
  auto r = c.point(2.5, 0);
  CHECK_FALSE(same_point(c.tau(r), r));
}

TEST_CASE("jets: the Abel map expands as V k + W k^2/2 + U k^3/6") {
  for (const char* n : {"genus2.json", "superelliptic.json", "planecubic.json"}) {
    const auto& s = surf(n);
    CAPTURE(std::string(n));
    auto a = s.point(cplx(0.3, 0.4), 0);
    auto ja = point_jet(s, a);
    CHECK(ja.closure < 1e-10);
    auto err = [&](double eps) {
      cplx k(eps, 0.5 * eps);
      CVec r = abel_between(s, a, s.point(a.lambda + k, 0)).r;
      CVec series = k * ja.V + (k * k / 2.0) * ja.W + (k * k * k / 6.0) * ja.U;
      return (r - series).norm();
    };
    double e1 = err(0.02), e2 = err(0.01);
    CHECK(e1 < 1e-5 * ja.V.norm());
    CHECK(e1 / e2 > 10.0);
    CHECK(e1 / e2 < 24.0);
  }
}

TEST_CASE("local parameter rescaling transforms the jet") {
  const auto& s = surf("genus2.json");
  auto a = s.point(cplx(0.3, 0.4), 0);
  cplx beta(1.3, 0.2), mu(0.4, -0.1);
  auto j0 = point_jet(s, a), j1 = point_jet(s, a.with_scaling(beta, mu));
  CHECK((j1.V - beta * j0.V).norm() < 1e-12 * j0.V.norm());
  CHECK((j1.W - (beta * beta * j0.W + 2.0 * mu * j0.V)).norm() < 1e-12 * j0.V.norm());
  CHECK_THROWS_AS(a.with_scaling(0.0, mu), std::invalid_argument);
}

TEST_CASE("fibers of the projection sum to zero in V") {
  for (auto [name, za] : std::vector<std::pair<const char*, cplx>>{
           {"genus2.json", cplx(0.4, 0.3)}, {"superelliptic.json", cplx(2.0, 0.0)}, {"planecubic.json", 0.5}}) {
    const auto& s = surf(name);
    CAPTURE(std::string(name));
    auto fib = fiber_over(s, za);
    CVec sum = CVec::Zero(s.genus());
    double mx = 0;
    for (const auto& p : fib) {
      auto j = point_jet(s, p);
      sum += j.V;
      mx = std::max(mx, j.V.norm());
    }
    CHECK(fib.size() >= 2);
    CHECK(sum.norm() / mx < 1e-8);
  }
}

TEST_CASE("Abel map is additive and antisymmetric along default routes") {
  const auto& s = surf("genus2.json");
  auto a = s.point(cplx(0.3, 0.4), 0), b = s.point(cplx(0.6, 0.1), 0), c = s.point(cplx(0.5, 0.7), 0);
  CVec ab = abel_between(s, a, b).r, bc = abel_between(s, b, c).r, ac = abel_between(s, a, c).r;
  CHECK((ab + bc - ac).norm() < 1e-10);
  CHECK((abel_between(s, b, a).r + ab).norm() < 1e-10);
  CHECK_THROWS_AS(abel_between(s, a, a), std::invalid_argument);
}

TEST_CASE("surface cache: reuse, corruption, collision") {
  const std::string dir = fresh_dir("cache");
  auto cfg = hyper({2, 1, -1, -2, -3, 3});
  BuildOptions bo;
  bo.cacheDir = dir;
  auto first = build_surface(cfg, bo);
  CHECK_FALSE(first.from_cache());
  auto second = build_surface(cfg, bo);
  CHECK(second.from_cache());
  CHECK(second.B() == first.B());
  CHECK(second.odd_char().dp == first.odd_char().dp);

  const std::string path = cache_surface(cfg, dir);
  CHECK(path.find(config_hash(cfg)) != std::string::npos);
  {
    std::ofstream out(path, std::ios::trunc);
    out << "{ not json";
  }
  auto third = build_surface(cfg, bo);
  CHECK_FALSE(third.from_cache());
  CHECK_FALSE(third.cache_warning().empty());
  CHECK(third.B() == first.B());
  CHECK(build_surface(cfg, bo).from_cache());

  // a well-formed entry for another config under this hash
  auto other = hyper({2, 1, -1, -2, -3, 4});
  J payload;
  payload["config"] = other.to_json();
  payload["state"] = J::object();
  payload["checksum"] = hex64(fnv1a64(dump17(payload["config"], -1) + "\n" + dump17(payload["state"], -1)));
  {
    std::ofstream out(path, std::ios::trunc);
    out << dump17(payload);
  }
  CHECK_THROWS_AS(build_surface(cfg, bo), std::runtime_error);

  BuildOptions off = bo;
  off.useCache = false;
  CHECK_FALSE(build_surface(cfg, off).from_cache());
  std::filesystem::remove_all(dir);
}

TEST_CASE("config hash separates configurations") {
  auto a = hyper({2, 1, -1, -2, -3, 3}), b = hyper({2, 1, -1, -2, -3, 3.0000001});
  CHECK(config_hash(a) == config_hash(hyper({2, 1, -1, -2, -3, 3})));
  CHECK(config_hash(a) != config_hash(b));
  auto q = a;
  q.quadratureOrder = 80;
  CHECK(config_hash(a) != config_hash(q));
}

TEST_CASE("invalid surface configurations") {
  CHECK_THROWS_AS(SurfaceConfig::from_json(J{{"provider", "klein"}}), std::invalid_argument);
  CHECK_THROWS_AS(SurfaceConfig::from_json(J{{"branchPoints", {1, 2, 3, 4}}}), std::invalid_argument);
  CHECK_THROWS_AS(build_surface(hyper({1, 2, 3})), std::invalid_argument);
  CHECK_THROWS_AS(build_surface(hyper({1, 1, 3, 4})), std::invalid_argument);
  J big{{"provider", "hyperelliptic"}, {"branchPoints", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}}};
  CHECK_THROWS_AS(build_surface(SurfaceConfig::from_json(big)), std::invalid_argument);
}

TEST_CASE("directFile surfaces round-trip a period matrix") {
  const auto& g = surf("genus2.json");
  J direct{{"provider", "directFile"}, {"direct", {{"B", to_json(g.B())}}}};
  auto s = build_surface(SurfaceConfig::from_json(direct));
  CHECK((s.B() - g.B()).norm() == 0.0);
  CHECK(s.genus() == 2);
}
