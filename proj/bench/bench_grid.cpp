// Parallel kernels against their serial references.
#include <benchmark/benchmark.h>

#include <random>

#include "thetafay/kp.hpp"

using namespace thetafay;

namespace {

RiemannMatrix genus3() {
  CMat B(3, 3);
  B << cplx(-4.0, 0.3), cplx(0.8, -0.2), cplx(-0.5, 0.1), cplx(0.8, -0.2), cplx(-3.5, 0.6), cplx(0.4, 0.2),
      cplx(-0.5, 0.1), cplx(0.4, 0.2), cplx(-3.2, -0.4);
  return RiemannMatrix(B);
}

std::vector<CVec> arguments(int n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<CVec> zs;
  for (int i = 0; i < n; ++i) {
    CVec z(3);
    for (int k = 0; k < 3; ++k) z(k) = cplx(u(rng), u(rng));
    zs.push_back(z);
  }
  return zs;
}

void BM_theta_batch(benchmark::State& st) {
  auto B = genus3();
  auto zs = arguments(int(st.range(0)));
  auto ch = HalfCharacteristic::from_bits(3, 5u, 3u);
  for (auto _ : st) benchmark::DoNotOptimize(theta_batch(ch, zs, B, 1e-13));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_theta_batch_serial(benchmark::State& st) {
  auto B = genus3();
  auto zs = arguments(int(st.range(0)));
  auto ch = HalfCharacteristic::from_bits(3, 5u, 3u);
  for (auto _ : st) benchmark::DoNotOptimize(theta_batch_serial(ch, zs, B, 1e-13));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

const DsBundle& ds_bundle() {
  static const SurfaceModel s = [] {
    SurfaceConfig cfg = SurfaceConfig::from_json(
        nlohmann::json{{"provider", "hyperelliptic"}, {"branchPoints", {2, 1, -1, -2, -3, 3}}});
    BuildOptions bo;
    bo.useCache = false;
    return build_surface(cfg, bo);
  }();
  static const DsBundle b = [] {
    DSParams p;
    p.kappa1 = cplx(0.7, 0.2);
    p.kappa2 = cplx(1.1, -0.3);
    p.A = cplx(0.5, 0.1);
    p.h = 0.3;
    p.d = CVec::Constant(2, cplx(0.2, -0.1));
    return ds_complex_solution(s, s.point(cplx(0.3, 0.4), 0), s.point(cplx(1.5, -0.5), 1), p);
  }();
  return b;
}

void BM_ds_residual(benchmark::State& st) {
  const auto& b = ds_bundle();
  const int n = int(st.range(0));
  GridSpec g{{{"x", -1, 1, n}, {"y", -1, 1, n}, {"t", -1, 1, n}}};
  ResidualOptions o;
  o.fdCheck = false;
  o.parallel = st.range(1) != 0;
  for (auto _ : st) benchmark::DoNotOptimize(ds_system_residual(b, g, o));
  st.SetItemsProcessed(st.iterations() * g.size());
}

}  // namespace

BENCHMARK(BM_theta_batch)->Arg(256)->Arg(4096);
BENCHMARK(BM_theta_batch_serial)->Arg(256)->Arg(4096);
BENCHMARK(BM_ds_residual)->ArgsProduct({{5, 9}, {0, 1}})->ArgNames({"n", "parallel"});

BENCHMARK_MAIN();
