#include <doctest.h>

#include "oracles.hpp"
#include "support.hpp"
#include "thetafay/flow.hpp"

using namespace tsupport;

TEST_CASE("theta at the origin for B = -2 pi") {
  RiemannMatrix B(CMat::Constant(1, 1, cplx(-2 * kPi, 0)));
  cplx v = theta(HalfCharacteristic::zero(1), CVec::Zero(1), B, 1e-14).value();
  CHECK(std::abs(v - 1.08643481) < 1e-8);
  cplx brute = oracle::theta_box(B.matrix(), CVec::Zero(1), 30);
  CHECK(std::abs(v - brute) < 1e-12);
}

TEST_CASE("theta with characteristics matches the box sum, g = 1..4") {
  std::mt19937_64 rng(11);
  for (int g = 1; g <= 4; ++g) {
    const int R = g <= 2 ? 9 : g == 3 ? 7 : 5;
    for (int trial = 0; trial < 6; ++trial) {
      CMat Bm = random_riemann(g, rng);
      RiemannMatrix B(Bm);
      auto ch = HalfCharacteristic::from_bits(g, std::uint32_t(rng() % (1u << g)), std::uint32_t(rng() % (1u << g)));
      CVec z = random_cvec(g, rng, 1.0);
      cplx ours = theta(ch, z, B, 1e-14).value();
      cplx ref = oracle::theta_box(Bm, z, ch.dp, ch.dpp, R);
      CAPTURE(g);
      CHECK(std::abs(ours - ref) <= 1e-11 * std::max(1.0, std::abs(ref)));

      std::vector<CVec> dirs = {random_cvec(g, rng, 1.0), random_cvec(g, rng, 1.0)};
      cplx d2 = theta_deriv(dirs, ch, z, B, 1e-14).value();
      cplx d2ref = oracle::theta_box(Bm, z, ch.dp, ch.dpp, R, dirs);
      CHECK(std::abs(d2 - d2ref) <= 1e-10 * std::max(1.0, std::abs(d2ref)));
    }
  }
}

TEST_CASE("quasi-periodicity under lattice shifts") {
  std::mt19937_64 rng(5);
  for (int g = 1; g <= 4; ++g) {
    RiemannMatrix B(random_riemann(g, rng));
    double worst = 0;
    for (int i = 0; i < 25; ++i) {
      IVec N(g), M(g);
      for (int k = 0; k < g; ++k) {
        N(k) = int(rng() % 7) - 3;
        M(k) = int(rng() % 5) - 2;
      }
      worst = std::max(worst, quasi_periodicity_residual(random_cvec(g, rng, 2.0), N, M, B, 1e-14));
    }
    CAPTURE(g);
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("log-derivative stack agrees with finite differences") {
  std::mt19937_64 rng(21);
  RiemannMatrix B(random_riemann(2, rng));
  auto ch = HalfCharacteristic::zero(2);
  for (int trial = 0; trial < 10; ++trial) {
    CVec z = random_cvec(2, rng, 1.0), u = random_cvec(2, rng, 1.0), v = random_cvec(2, rng, 1.0);
    ThetaJet jet(B, ch, z, {u, v}, 1e-14);
    auto lnTheta = [&](const CVec& w) { return theta(ch, w, B, 1e-14).log(); };
    const double h = 1e-4;
    cplx du = (lnTheta(z + h * u) - lnTheta(z - h * u)) / (2 * h);
    cplx duv = (lnTheta(z + h * u + h * v) - lnTheta(z + h * u - h * v) - lnTheta(z - h * u + h * v) +
                lnTheta(z - h * u - h * v)) /
               (4 * h * h);
    CHECK(rel(jet.log_derivative(0x1), du) < 1e-6);
    CHECK(rel(jet.log_derivative(0x3), duv) < 1e-6);
    // moments against ratios: m_{uv}/m_0 = k_uv + k_u k_v
    cplx k = jet.log_derivative(0x3) + jet.log_derivative(0x1) * jet.log_derivative(0x2);
    CHECK(rel(jet.ratio(0x3), k) < 1e-12);
  }
}

TEST_CASE("odd characteristic vanishes at the origin") {
  std::mt19937_64 rng(3);
  RiemannMatrix B(random_riemann(2, rng));
  auto odd = HalfCharacteristic::from_bits(2, 1u, 1u);
  CHECK(odd.parity() == -1);
  CHECK(HalfCharacteristic::from_bits(2, 1u, 2u).parity() == 1);
  auto t0 = theta(odd, CVec::Zero(2), B, 1e-14);
  auto scale = theta(HalfCharacteristic::zero(2), CVec::Zero(2), B, 1e-14);
  CHECK(std::abs(ratio(t0, scale)) < 1e-13);
}

TEST_CASE("parallel batch is bitwise identical to the serial one") {
  std::mt19937_64 rng(8);
  RiemannMatrix B(random_riemann(3, rng));
  std::vector<CVec> zs;
  for (int i = 0; i < 200; ++i) zs.push_back(random_cvec(3, rng, 4.0));
  auto ch = HalfCharacteristic::from_bits(3, 5u, 3u);
  auto p = theta_batch(ch, zs, B, 1e-13);
  auto s = theta_batch_serial(ch, zs, B, 1e-13);
  REQUIRE(p.size() == s.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p[i].mantissa == s[i].mantissa);
    CHECK(p[i].logScale == s[i].logScale);
  }
}

TEST_CASE("scaled values survive large arguments") {
  RiemannMatrix B(CMat::Constant(1, 1, cplx(-3.0, 0.4)));
  CVec z = CVec::Constant(1, cplx(900.0, 2.0));
  auto t = theta(HalfCharacteristic::zero(1), z, B, 1e-13);
  CHECK(std::isfinite(t.log_abs()));
  CHECK(t.log_abs() > 700.0);
  // normalized modulus is lattice invariant
  CVec w = CVec::Constant(1, cplx(0.3, -0.2));
  CVec shifted = w + B.matrix().col(0) * 3.0 + CVec::Constant(1, cplx(0, 2 * kPi));
  double n0 = normalized_abs(theta(HalfCharacteristic::zero(1), w, B, 1e-13), w, B);
  double n1 = normalized_abs(theta(HalfCharacteristic::zero(1), shifted, B, 1e-13), shifted, B);
  CHECK(std::abs(n0 - n1) < 1e-10 * n0);

  auto a = ScaledComplex::from_exp(cplx(800.0, 0.3)), b = ScaledComplex::from_exp(cplx(799.0, 0.1));
  CHECK(rel(ratio(a, b), std::exp(cplx(1.0, 0.2))) < 1e-13);
  CHECK(std::abs((a * b).log_abs() - 1599.0) < 1e-10);
}

TEST_CASE("cell reduction keeps the log-derivative stack") {
  const auto& s = surf("genus2.json");
  std::mt19937_64 rng(2);
  CVec w = random_cvec(2, rng, 1.0);
  CVec far = w + s.B() * (Eigen::Vector2d(7, -5).cast<cplx>()) + cplx(0, 2 * kPi) * CVec::Constant(2, 3.0);
  CVec v = random_cvec(2, rng, 1.0);
  LogThetaStack near(s, w, {v, v}), away(s, far, {v, v});
  CHECK(rel(near.d(0x3), away.d(0x3)) < 1e-10);
  // first derivative picks up the linear lattice term -<v, M>
  cplx expected = near.d(0x1) - (v.transpose() * Eigen::Vector2d(7, -5).cast<cplx>())(0, 0);
  CHECK(rel(away.d(0x1), expected) < 1e-10);
}

TEST_CASE("truncation radius grows as the tolerance tightens") {
  std::mt19937_64 rng(4);
  RiemannMatrix B(random_riemann(3, rng));
  auto loose = truncation_radius(B, 1e-6, 0), tight = truncation_radius(B, 1e-14, 0);
  CHECK(tight.radius > loose.radius);
  CHECK(count_lattice_points(B, RVec::Zero(3), tight.radius) >= count_lattice_points(B, RVec::Zero(3), loose.radius));
  CHECK(truncation_radius(B, 1e-12, 4).radius >= truncation_radius(B, 1e-12, 0).radius);
}

TEST_CASE("invalid period matrices are rejected") {
  CMat asym(2, 2);
  asym << cplx(-3, 0), cplx(0.5, 0), cplx(0.2, 0), cplx(-3, 0);
  CHECK_THROWS_AS(RiemannMatrix{asym}, std::invalid_argument);
  CHECK_THROWS_AS(RiemannMatrix{CMat::Constant(1, 1, cplx(1.0, 0.0))}, std::invalid_argument);
  CHECK_THROWS_AS(RiemannMatrix{CMat(2, 3)}, std::invalid_argument);
  RiemannMatrix B(CMat::Constant(1, 1, cplx(-2.0, 0.0)));
  CHECK_THROWS_AS(theta(HalfCharacteristic::zero(1), CVec::Zero(2), B, 1e-12), std::invalid_argument);
  CVec nan = CVec::Constant(1, cplx(std::nan(""), 0));
  CHECK_THROWS_AS(theta(HalfCharacteristic::zero(1), nan, B, 1e-12), std::invalid_argument);
}
