#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "support.hpp"

using namespace tsupport;

namespace {

DSParams generic_ds(int g) {
  DSParams p;
  p.kappa1 = cplx(0.7, 0.2);
  p.kappa2 = cplx(1.1, -0.3);
  p.A = cplx(0.5, 0.1);
  p.h = 0.3;
  p.d = CVec::Constant(g, cplx(0.2, -0.1));
  return p;
}

// DS residual from field values only: psi, psi* from theta quotients, phi
// from second differences of ln Theta.
double ds_fd_residual(const DsBundle& b, cplx xi, cplx eta, cplx t) {
  const double h = 1e-2;
  auto psi = [&](cplx x, cplx y, cplx tt) { return b.eval(x, y, tt).psi; };
  auto star = [&](cplx x, cplx y, cplx tt) { return b.eval(x, y, tt).psiStar; };
  const auto& s = *b.surface;
  auto lnT = [&](cplx x, cplx y) {
    return theta(HalfCharacteristic::zero(s.genus()), b.Z(x, y, t) - b.params.d, s.riemann(), 1e-14).log();
  };
  auto phi = [&](cplx x, cplx y) {
    return 0.5 * (oracle::d2([&](double e) { return lnT(x + e, y); }, h) +
                  oracle::d2([&](double e) { return lnT(x, y + e); }, h)) +
           0.25 * b.params.h;
  };
  const cplx P0 = psi(xi, eta, t), S0 = star(xi, eta, t), f0 = phi(xi, eta);
  const cplx pt = oracle::d1([&](double e) { return psi(xi, eta, t + e); }, h);
  const cplx pxx = oracle::d2([&](double e) { return psi(xi + e, eta, t); }, h);
  const cplx pyy = oracle::d2([&](double e) { return psi(xi, eta + e, t); }, h);
  const cplx st = oracle::d1([&](double e) { return star(xi, eta, t + e); }, h);
  const cplx sxx = oracle::d2([&](double e) { return star(xi + e, eta, t); }, h);
  const cplx syy = oracle::d2([&](double e) { return star(xi, eta + e, t); }, h);
  auto PP = [&](cplx x, cplx y) { return psi(x, y, t) * star(x, y, t); };
  const cplx Pxx = oracle::d2([&](double e) { return PP(xi + e, eta); }, h);
  const cplx Pyy = oracle::d2([&](double e) { return PP(xi, eta + e); }, h);
  // phi_{xi eta} from the jet-free phi needs a coarser outer step
  const double H = 4e-2;
  const cplx fxy = oracle::d11([&](double u, double v) { return phi(xi + u, eta + v); }, H);

  const cplx e1 = kI * pt + 0.5 * (pxx + pyy) + 2.0 * f0 * P0;
  const cplx e2 = -kI * st + 0.5 * (sxx + syy) + 2.0 * f0 * S0;
  const cplx e3 = fxy + 0.5 * (Pxx + Pyy);
  const double s1 = std::max({std::abs(pt), std::abs(pxx), std::abs(pyy), std::abs(2.0 * f0 * P0)});
  const double s2 = std::max({std::abs(st), std::abs(sxx), std::abs(syy), std::abs(2.0 * f0 * S0)});
  const double s3 = std::max({std::abs(fxy), std::abs(Pxx), std::abs(Pyy)});
  return std::max({std::abs(e1) / s1, std::abs(e2) / s2, std::abs(e3) / s3});
}

cplx nls_fd_residual(const NlsBundle& b, double x, double t, double& scale) {
  const double h = 1e-2;
  const cplx p = b.psi(x, t);
  const cplx pt = oracle::d1([&](double e) { return b.psi(x, t + e); }, h);
  const cplx pxx = oracle::d2([&](double e) { return b.psi(x + e, t); }, h);
  const cplx nl = 2.0 * double(b.rho) * std::norm(p) * p;
  scale = std::max({std::abs(pt), std::abs(pxx), std::abs(nl)});
  return kI * pt + pxx + nl;
}

}  // namespace

TEST_CASE("complexified DS on genus 1 and 2") {
  for (const char* n : {"realg1.json", "genus2.json"}) {
    const auto& sh = shipped(n);
    CAPTURE(std::string(n));
    auto b = ds_complex_solution(*sh.s, sh.pt("a"), sh.pt("b"), generic_ds(sh.s->genus()));
    auto rep = ds_system_residual(b, grid3(1.0, 3));
    REQUIRE(rep.perEquation.size() == 3);
    for (const auto& e : rep.perEquation) CHECK(e.relToTermScale() <= 1e-8);
    CHECK(rep.skipped.empty());
    REQUIRE(rep.fd.done);
    CHECK(rep.fd.maxRel <= 1e-5);
    CHECK(ds_fd_residual(b, 0.3, -0.2, 0.5) <= 1e-6);
    CHECK(ds_fd_residual(b, -0.7, 0.4, -0.1) <= 1e-6);
  }
}

TEST_CASE("DS residual flags a wrong frequency") {
  const auto& sh = shipped("genus2.json");
  auto b = ds_complex_solution(*sh.s, sh.pt("a"), sh.pt("b"), generic_ds(2));
  b.G3 += 1e-3;
  ResidualOptions opt;
  opt.fdCheck = false;
  CHECK(ds_system_residual(b, grid3(1.0, 3), opt).perEquation[0].relToTermScale() > 1e-6);
}

TEST_CASE("DS grid evaluation is independent of threading") {
  const auto& sh = shipped("genus2.json");
  auto b = ds_complex_solution(*sh.s, sh.pt("a"), sh.pt("b"), generic_ds(2));
  ResidualOptions par, ser;
  ser.parallel = false;
  auto r1 = ds_system_residual(b, grid3(1.0, 3), par), r2 = ds_system_residual(b, grid3(1.0, 3), ser);
  CHECK(dump17(r1.to_json()) == dump17(r2.to_json()));
}

TEST_CASE("DS local-parameter covariance") {
  for (const char* n : {"realg1.json", "genus2.json"}) {
    const auto& sh = shipped(n);
    CAPTURE(std::string(n));
    double def = ds_covariance_defect(*sh.s, sh.pt("a"), sh.pt("b"), generic_ds(sh.s->genus()), cplx(1.3, 0.2),
                                      cplx(0.4, 0.1), cplx(-0.2, 0.3), grid3(1.0, 3));
    CHECK(def <= 1e-8);
  }
}

TEST_CASE("DS1 on the real quartic") {
  const auto& sh = shipped("realg1-ds1.json");
  Ds1Options o;
  auto r = ds1_real_solution(*sh.s, sh.pt("a"), sh.pt("b"), o);
  CHECK(r.rho == 1);
  CHECK(r.realityImag <= 1e-10);
  CHECK(r.freqConjDefect <= 1e-10);
  CHECK(ds_reality_deviation(r.bundle, grid3(1.0, 4), r.rho) <= 1e-8);
  CHECK(ds_reality_deviation(r.bundle, grid3(1.0, 4), -r.rho) > 0.5);
  auto rep = ds_system_residual(r.bundle, grid3(1.0, 3));
  for (const auto& e : rep.perEquation) CHECK(e.relToTermScale() <= 1e-8);
  // real d on an M-curve keeps Theta away from its divisor
  CHECK(smoothness_scan(r.bundle, grid3(3.0, 9)).divisorHits == 0);

  for (int rho : {1, -1}) {
    Ds1Options free;
    free.rho = rho;
    auto rr = ds1_real_solution(*sh.s, sh.pt("a"), sh.pt("b"), free);
    CHECK(rr.rho == rho);
    CHECK(ds_reality_deviation(rr.bundle, grid3(1.0, 4), rho) <= 1e-8);
  }

  // an explicit kappa1 fixes the sign
  o.kappa1 = 1.0;
  CHECK(ds1_real_solution(*sh.s, sh.pt("a"), sh.pt("b"), o).rho == 1);
  o.rho = -1;
  try {
    ds1_real_solution(*sh.s, sh.pt("a"), sh.pt("b"), o);
    FAIL("sign mismatch not reported");
  } catch (const SignMismatch& e) {
    CHECK(e.computed() == 1);
  }
  CHECK_THROWS_AS(ds1_real_solution(*sh.s, sh.s->point(cplx(0.3, 0.4), 0), sh.pt("b"), Ds1Options{}),
                  std::invalid_argument);
}

TEST_CASE("DS2 sign law on conjugate configurations") {
  struct Row {
    const char* name;
    int rho;
  };
  for (auto row : {Row{"conjg1-tau1.json", 1}, Row{"conjg1-tau2.json", -1}, Row{"ds2-mcurve.json", 1}}) {
    const auto& sh = shipped(row.name);
    CAPTURE(std::string(row.name));
    Ds2Options o;
    if (sh.params.contains("dI")) o.dI = Eigen::Map<const RVec>(sh.params["dI"].get<std::vector<double>>().data(), 1);
    auto r = ds2_real_solution(*sh.s, sh.pt("a"), o);
    CHECK(r.rho == row.rho);
    CHECK(r.q2Imag <= 1e-10);
    CHECK(r.g1g2Conj <= 1e-10);
    CHECK(ds_reality_deviation(r.bundle, grid3(1.0, 4), r.rho) <= 1e-8);
    auto rep = ds_system_residual(r.bundle, grid3(1.0, 3));
    for (const auto& e : rep.perEquation) CHECK(e.relToTermScale() <= 1e-8);
  }
  const auto& m = shipped("ds2-mcurve.json");
  Ds2Options o;
  o.dI = RVec::Constant(1, 0.3);
  auto r = ds2_real_solution(*m.s, m.pt("a"), o);
  CHECK(smoothness_scan(r.bundle, grid3(3.0, 9)).divisorHits == 0);
}

TEST_CASE("divisor crossings are detected and skipped") {
  const auto& sh = shipped("genus2.json");
  auto p = generic_ds(2);
  auto b0 = ds_complex_solution(*sh.s, sh.pt("a"), sh.pt("b"), p);
  // move d so that Theta(Z(0) - d) = 0 at the grid origin
  std::mt19937_64 rng(9);
  p.d = divisor_shift(*sh.s, CVec::Zero(2), p.d, random_cvec(2, rng, 1.0));
  auto b = ds_complex_solution(*sh.s, sh.pt("a"), sh.pt("b"), p);
  auto th = theta(HalfCharacteristic::zero(2), -p.d, sh.s->riemann(), 1e-14);
  CHECK(normalized_abs(th, -p.d, sh.s->riemann()) < 1e-10);
  auto scan = smoothness_scan(b, grid3(1.0, 3));
  CHECK(scan.divisorHits >= 1);
  CHECK(scan.argmin == grid3(1.0, 3).size() / 2);
  auto rep = ds_system_residual(b, grid3(1.0, 3));
  CHECK(std::find(rep.skipped.begin(), rep.skipped.end(), grid3(1.0, 3).size() / 2) != rep.skipped.end());
  CHECK(smoothness_scan(b0, grid3(1.0, 3)).divisorHits == 0);
}

TEST_CASE("NLS reduction signs and residuals") {
  struct Row {
    const char* name;
    int rho;
  };
  for (auto row : {Row{"realg1.json", -1}, Row{"conjg1-tau1.json", 1}}) {
    const auto& sh = shipped(row.name);
    CAPTURE(std::string(row.name));
    auto nb = nls_solution(*sh.s, sh.s->point(2.5, 0));
    CHECK(nb.rho == row.rho);
    CHECK(nb.vGate <= 1e-9);
    CHECK(nb.wGate <= 1e-9);
    auto rep = nls_residual(nb, grid2(2.0, 7));
    CHECK(rep.relToFieldScale <= 1e-8);
    CHECK(rep.fd.maxRel <= 1e-5);
    double scale = 0;
    cplx e = nls_fd_residual(nb, 0.4, -0.3, scale);
    CHECK(std::abs(e) / scale <= 1e-6);
    // the opposite sign does not solve the equation
    auto flipped = nb;
    flipped.rho = -nb.rho;
    CHECK(std::abs(nls_fd_residual(flipped, 0.4, -0.3, scale)) / scale > 1e-3);
  }
  const auto& g1 = shipped("realg1.json");
  CHECK_THROWS_AS(nls_solution(*g1.s, g1.s->point(cplx(0.3, 0.4), 0)), std::invalid_argument);
  const auto& sup = shipped("superelliptic.json");
  CHECK_THROWS_AS(nls_solution(*sup.s, sup.s->point(2.0, 0)), std::invalid_argument);
}

TEST_CASE("linear Schrodinger form") {
  const auto& sh = shipped("genus2.json");
  auto ls = linear_schrodinger(*sh.s, sh.pt("a"), sh.pt("b"), CVec::Constant(2, cplx(0.1, 0.05)));
  CHECK(linear_schrodinger_residual(ls, grid2(1.0, 5)).relToFieldScale <= 1e-8);
  const double h = 1e-2, x = 0.2, t = -0.4;
  const cplx p = ls.psi(x, t);
  const cplx e = kI * oracle::d1([&](double s) { return ls.psi(x, t + s); }, h) +
                 oracle::d2([&](double s) { return ls.psi(x + s, t); }, h) + 2.0 * ls.potential(x, t) * p;
  CHECK(std::abs(e) <= 1e-6 * std::max(1.0, std::abs(p)) * std::max(1.0, std::abs(ls.potential(x, t))));
}

TEST_CASE("complexified n-NLS on fibers") {
  struct Row {
    const char* name;
    cplx za;
    int n;
  };
  for (auto row : {Row{"genus2.json", cplx(0.4, 0.3), 1}, Row{"superelliptic.json", cplx(2.0, 0.0), 2},
                   Row{"planecubic.json", cplx(0.5, 0.0), 2}}) {
    const auto& sh = shipped(row.name);
    CAPTURE(std::string(row.name));
    auto nb = nnls_complex_solution(*sh.s, row.za, {});
    CHECK(nb.n() == row.n);
    CHECK(nb.fiberGate <= 1e-8);
    auto rep = nnls_system_residual(nb, grid2(1.0, 5));
    CHECK(rep.relToFieldScale <= 1e-8);
    // one component by differences
    const double h = 1e-2, x = 0.3, t = 0.2;
    auto psi0 = [&](double xx, double tt) { return nb.eval(xx, tt).psi[0]; };
    auto v = nb.eval(x, t);
    cplx S = 0;
    for (int j = 0; j < nb.n(); ++j) S += v.psi[j] * v.psiStar[j];
    cplx e = kI * oracle::d1([&](double s) { return psi0(x, t + s); }, h) +
             oracle::d2([&](double s) { return psi0(x + s, t); }, h) + 2.0 * S * v.psi[0];
    CHECK(std::abs(e) <= 1e-6 * std::max(std::abs(v.psi[0]), std::abs(2.0 * S * v.psi[0])));
  }
}

TEST_CASE("n-NLS covariance and agreement with the NLS path") {
  const auto& sup = shipped("superelliptic.json");
  CHECK(nnls_covariance_defect(*sup.s, 2.0, {}, cplx(1.2, 0.1), cplx(0.3, -0.2), grid2(1.0, 3)) <= 1e-8);
  const auto& g1 = shipped("realg1.json");
  auto nls = nls_solution(*g1.s, g1.s->point(2.5, 0));
  NnlsParams pp;
  pp.d = nls.d;
  auto nb = nnls_from_points(*g1.s, {nls.b, nls.a}, pp);
  CHECK(nnls_vs_nls_defect(nb, nls, grid2(1.0, 5)) <= 1e-9);
}

TEST_CASE("real n-NLS sign inference") {
  struct Row {
    const char* name;
    cplx za;
    std::vector<int> s;
  };
  for (const auto& row : {Row{"realg1.json", 2.5, {-1}}, Row{"conjg1-tau1.json", 2.5, {1}},
                          Row{"planecubic.json", 0.5, {-1, 1}}}) {
    const auto& sh = shipped(row.name);
    CAPTURE(std::string(row.name));
    NnlsRealOptions o;
    auto r = nnls_real_solution(*sh.s, row.za, o, grid2(2.0, 7));
    CHECK(r.s == row.s);
    for (std::size_t j = 0; j < r.s.size(); ++j) {
      CHECK(r.deviation[j] <= 1e-8);
      CHECK(r.otherDeviation[j] > 0.5);
    }
    CHECK(nnls_real_residual(r.bundle, r.s, grid2(1.0, 5)).relToFieldScale <= 1e-8);
    CHECK(smoothness_scan(r.bundle, grid2(3.0, 13)).divisorHits == 0);
  }
}

TEST_CASE("stationary solutions at a branch point") {
  const auto& g1 = shipped("realg1.json");
  auto st = stationary_check(*g1.s, g1.s->branch_point(0), g1.s->point(2.5, 0), CVec::Zero(1), grid2(1.0, 5));
  CHECK(st.wGatePassed);
  CHECK(st.timeVariation <= 1e-8);
  CHECK(st.sliceDistance <= 1e-8);
  CHECK_THROWS_AS(stationary_check(*g1.s, g1.s->point(2.5, 0), g1.s->point(3.5, 0), CVec::Zero(1), grid2(1.0, 5)),
                  NumericalError);
}

TEST_CASE("grid refinement keeps the residual small") {
  const auto& sh = shipped("realg1.json");
  auto b = ds_complex_solution(*sh.s, sh.pt("a"), sh.pt("b"), generic_ds(1));
  GridSpec g = grid3(1.0, 3);
  CHECK(g.refined().size() == 125);
  auto fine = ds_system_residual(b, g.refined());
  for (const auto& e : fine.perEquation) CHECK(e.relToTermScale() <= 1e-8);
  CHECK(GridSpec::from_json(g.to_json()).size() == g.size());
}

TEST_CASE("field export") {
  const auto& sh = shipped("realg1.json");
  auto nb = nls_solution(*sh.s, sh.s->point(2.5, 0));
  auto path = (std::filesystem::temp_directory_path() / "thetafay-test-nls.csv").string();
  auto g = grid2(1.0, 3);
  write_field_csv(path, g, sample_nls(nb, g));
  std::ifstream in(path);
  std::string header, line;
  std::getline(in, header);
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(header.rfind("x,t", 0) == 0);
  CHECK(rows == 9);
  std::filesystem::remove(path);
}
