#include "thetafay/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "thetafay/fay.hpp"
#include "thetafay/kp.hpp"
#include "thetafay/report.hpp"
#include "thetafay/waves.hpp"

namespace thetafay {

namespace {

using nlohmann::json;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

std::string dir_of(const std::string& path) {
  const auto pos = path.find_last_of('/');
  return pos == std::string::npos ? std::string(".") : path.substr(0, pos);
}

RVec rvec(const json& j) {
  RVec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

IVec ivec(const json& j) {
  IVec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<int>();
  return v;
}

PathSpec path_spec(const json& p) {
  PathSpec ps;
  if (!p.contains("path")) return ps;
  const json& j = p.at("path");
  if (j.contains("via"))
    for (const auto& z : j.at("via")) ps.via.push_back(cplx_from_json(z));
  ps.throughBranch = j.value("throughBranch", -1);
  return ps;
}

// Unscaled evaluation points when a config names none.
MarkedPoint point_or(const SurfaceModel& s, const json& pts, const char* key, cplx lambda, int sheet) {
  return pts.contains(key) ? s.point_from_json(pts.at(key)) : s.point(lambda, sheet);
}

GridSpec make_grid(const RunConfig& cfg, const std::vector<std::string>& names, double range, int n) {
  GridSpec g;
  if (cfg.grid) {
    g = GridSpec::from_json(*cfg.grid);
    if (g.axes.size() != names.size())
      throw std::invalid_argument("grid needs " + std::to_string(names.size()) + " axes");
  } else {
    for (const auto& nm : names) g.axes.push_back({nm, -range, range, n});
  }
  for (auto& ax : g.axes) {
    if (cfg.gridN > 0) ax.n = cfg.gridN;
    if (cfg.gridRange > 0) {
      ax.lo = -cfg.gridRange;
      ax.hi = cfg.gridRange;
    }
  }
  return g;
}

const std::vector<std::string> kXYT{"x", "y", "t"}, kXT{"x", "t"};

struct Outcome {
  json body = json::object();
  json tolerances = json::object();
  std::vector<std::string> violations;

  void gate(const std::string& what, double value, double tol) {
    tolerances[what] = tol;
    if (!(value <= tol)) violations.push_back(what);
  }
};

void put_residual(Outcome& o, const std::string& key, const ResidualReport& r, double tol, bool byTermScale = false) {
  o.body[key] = r.to_json();
  double rel = r.relToFieldScale;
  if (byTermScale) {
    rel = 0.0;
    for (const auto& e : r.perEquation) rel = std::max(rel, e.relToTermScale());
  }
  o.gate(key, rel, tol);
  if (r.fd.done) o.gate(key + "FiniteDifference", r.fd.maxRel, 1e-5);
}

// ----------------------------------------------------------- commands

void cmd_surface(const RunConfig& cfg, const SurfaceModel& s, Outcome& o) {
  json& b = o.body;
  b["provider"] = s.provider().kind();
  b["genus"] = s.genus();
  b["B"] = to_json(s.B());
  b["normalizationResidual"] = s.normalization_residual();
  o.gate("normalizationResidual", s.normalization_residual(), cfg.tol.value_or(1e-10));
  b["oddCharacteristic"] = {{"delta1", std::vector<double>(s.odd_char().dp.begin(), s.odd_char().dp.end())},
                            {"delta2", std::vector<double>(s.odd_char().dpp.begin(), s.odd_char().dpp.end())}};
  if (const auto& rs = s.real_structure()) {
    b["realStructure"] = {{"H", to_json(rs->H)},
                          {"tau", rs->tau},
                          {"integralityDefect", rs->integralityDefect},
                          {"ovals", rs->ovals}};
    o.gate("integralityDefect", rs->integralityDefect, 1e-8);
  } else {
    b["realStructure"] = nullptr;
  }
  b["realStatus"] = s.real_status();
  b["fromCache"] = s.from_cache();
  if (!s.cache_warning().empty()) b["cacheWarning"] = s.cache_warning();
}

void cmd_check(const RunConfig& cfg, const SurfaceModel& s, Outcome& o) {
  const json& P = cfg.points;
  const MarkedPoint a = point_or(s, P, "a", cplx(0.3, 0.4), 0);
  const MarkedPoint b = point_or(s, P, "b", cplx(1.5, -0.5), 1);
  const PathSpec path = path_spec(cfg.params);
  json& body = o.body;
  body["identity"] = cfg.identity;
  std::vector<MarkedPoint> pts{a, b};
  std::mt19937_64 rng(cfg.seed);
  std::vector<double> res;

  if (cfg.identity == "fay") {
    pts.push_back(point_or(s, P, "c", a.lambda + cplx(0.3, 0.2), 0));
    pts.push_back(point_or(s, P, "d", b.lambda + cplx(-0.2, 0.35), 1));
    const TrisecantData td = trisecant_data(s, {pts[0], pts[1], pts[2], pts[3]});
    for (int i = 0; i < cfg.samples; ++i) res.push_back(trisecant_residual(s, td, sample_cell(s.riemann(), rng)));
  } else if (cfg.identity == "new" || cfg.identity == "degenerate") {
    const FayScalars f = fay_scalars(s, a, b, path);
    body["scalars"] = {{"q1", to_json(f.q1)}, {"q2", to_json(f.q2)}, {"K1", to_json(f.K1)}, {"K2", to_json(f.K2)},
                       {"contour", f.contour.contour}};
    for (int i = 0; i < cfg.samples; ++i) {
      const CVec z = sample_cell(s.riemann(), rng);
      res.push_back(cfg.identity == "new" ? new_identity_residual(s, f, z) : degenerate_identity_residual(s, f, z));
    }
  } else {  // q2-oracle
    const FayScalars f = fay_scalars(s, a, b, path);
    const Q2Oracle q = q2_integral_oracle(s, a, b, cfg.params.value("shrinkSteps", 3), path);
    body["q2"] = to_json(f.q2);
    body["oracle"] = {{"value", to_json(q.value)}, {"contraction", q.contraction}, {"spread", q.spread}};
    res.push_back(std::abs(q.value - f.q2) / std::abs(f.q2));
  }
  json pj = json::array();
  for (const auto& p : pts) pj.push_back(p.describe());
  body["points"] = pj;
  body["zSamples"] = cfg.identity == "q2-oracle" ? 0 : cfg.samples;
  double mx = 0.0, mean = 0.0;
  for (double r : res) {
    mx = std::max(mx, r);
    mean += r / double(res.size());
  }
  body["maxResidual"] = mx;
  body["meanResidual"] = mean;
  const double def = cfg.identity == "new" ? 1e-7 : cfg.identity == "q2-oracle" ? 1e-6 : 1e-8;
  o.gate("maxResidual", mx, cfg.tol.value_or(def));
}

DSParams ds_params(const json& p, int g) {
  DSParams d;
  if (p.contains("kappa1")) d.kappa1 = cplx_from_json(p.at("kappa1"));
  if (p.contains("kappa2")) d.kappa2 = cplx_from_json(p.at("kappa2"));
  if (p.contains("A")) d.A = cplx_from_json(p.at("A"));
  if (p.contains("h")) d.h = cplx_from_json(p.at("h"));
  d.d = p.contains("d") ? cvec_from_json(p.at("d")) : CVec::Zero(g);
  return d;
}

Ds1Options ds1_options(const json& p) {
  Ds1Options o;
  if (p.contains("dR")) o.dR = rvec(p.at("dR"));
  if (p.contains("T")) o.T = ivec(p.at("T"));
  o.theta = p.value("theta", 0.0);
  o.kappa1Tilde = p.value("kappa1Tilde", 1.0);
  o.kappa2 = p.value("kappa2", 1.0);
  o.h = p.value("h", 0.0);
  o.rho = p.value("rho", 0);
  if (p.contains("kappa1")) o.kappa1 = p.at("kappa1").get<double>();
  return o;
}

Ds2Options ds2_options(const json& p) {
  Ds2Options o;
  if (p.contains("L")) o.L = ivec(p.at("L"));
  if (p.contains("dI")) o.dI = rvec(p.at("dI"));
  o.theta = p.value("theta", 0.0);
  if (p.contains("kappa1")) o.kappa1 = cplx_from_json(p.at("kappa1"));
  o.h = p.value("h", 0.0);
  return o;
}

template <class Opt>
void real_d_options(const json& p, Opt& o) {
  if (p.contains("dR")) o.dR = rvec(p.at("dR"));
  if (p.contains("T")) o.T = ivec(p.at("T"));
  o.theta = p.value("theta", 0.0);
}

NnlsParams nnls_params(const json& p) {
  NnlsParams n;
  if (p.contains("A"))
    for (const auto& a : p.at("A")) n.A.push_back(cplx_from_json(a));
  if (p.contains("d")) n.d = cvec_from_json(p.at("d"));
  n.base = p.value("base", -1);
  return n;
}

cplx za_of(const json& p) {
  if (!p.contains("za")) throw std::invalid_argument("nnls needs params.za (fiber value)");
  return cplx_from_json(p.at("za"));
}

void maybe_csv(const RunConfig& cfg, const GridSpec& g, const std::vector<FieldColumn>& cols, Outcome& o) {
  if (cfg.csv.empty()) return;
  write_field_csv(cfg.csv, g, cols);
  o.body["csv"] = cfg.csv;
}

void cmd_solve(const RunConfig& cfg, const SurfaceModel& s, Outcome& o) {
  const json& P = cfg.points;
  const json& p = cfg.params;
  const PathSpec path = path_spec(p);
  const double tol = cfg.tol.value_or(1e-8);
  json& body = o.body;
  body["solution"] = cfg.solution;

  if (cfg.solution == "ds") {
    const GridSpec g = make_grid(cfg, kXYT, 1.0, 3);
    const DsBundle b = ds_complex_solution(s, point_or(s, P, "a", cplx(0.3, 0.4), 0),
                                           point_or(s, P, "b", cplx(1.5, -0.5), 1), ds_params(p, s.genus()), path);
    body["provenance"] = b.provenance();
    put_residual(o, "residual", ds_system_residual(b, g), tol);
    maybe_csv(cfg, g, sample_ds(b, g), o);
  } else if (cfg.solution == "ds1") {
    const GridSpec g = make_grid(cfg, kXYT, 1.0, 3);
    if (!P.contains("a") || !P.contains("b")) throw std::invalid_argument("ds1 needs points a and b");
    const MarkedPoint a = s.point_from_json(P.at("a")), b = s.point_from_json(P.at("b"));
    const Ds1Options opt = ds1_options(p);
    body["requestedRho"] = opt.rho;
    const Ds1Result r = ds1_real_solution(s, a, b, opt, path);
    body["rho"] = r.rho;
    body["provenance"] = r.bundle.provenance();
    body["lattice"] = {{"N", to_json(r.lattice.N)}, {"M", to_json(r.lattice.M)}};
    body["realityFactor"] = to_json(r.reality);
    body["absA"] = r.absA;
    o.gate("realityImag", r.realityImag, 1e-6);
    o.gate("frequencyConjugation", r.freqConjDefect, 1e-8);
    const double dev = ds_reality_deviation(r.bundle, g, r.rho);
    body["realityDeviation"] = dev;
    o.gate("realityDeviation", dev, 1e-8);
    put_residual(o, "residual", ds_system_residual(r.bundle, g), tol);
    maybe_csv(cfg, g, sample_ds(r.bundle, g), o);
  } else if (cfg.solution == "ds2") {
    const GridSpec g = make_grid(cfg, kXYT, 1.0, 3);
    if (!P.contains("a")) throw std::invalid_argument("ds2 needs point a");
    const Ds2Result r = ds2_real_solution(s, s.point_from_json(P.at("a")), ds2_options(p), path);
    body["rho"] = r.rho;
    body["provenance"] = r.bundle.provenance();
    body["lattice"] = {{"N", to_json(r.lattice.N)}, {"M", to_json(r.lattice.M)}, {"T", to_json(r.T)}};
    body["absA"] = r.absA;
    o.gate("q2Imag", r.q2Imag, 1e-8);
    o.gate("g1g2Conjugation", r.g1g2Conj, 1e-8);
    o.gate("g3Imag", r.g3Imag, 1e-8);
    const double dev = ds_reality_deviation(r.bundle, g, r.rho);
    body["realityDeviation"] = dev;
    o.gate("realityDeviation", dev, 1e-8);
    put_residual(o, "residual", ds_system_residual(r.bundle, g), tol);
    maybe_csv(cfg, g, sample_ds(r.bundle, g), o);
  } else if (cfg.solution == "nls") {
    const GridSpec g = make_grid(cfg, kXT, 1.0, 5);
    // --za picks the real point on sheet 0, otherwise points.a
    if (!p.contains("za") && !P.contains("a")) throw std::invalid_argument("nls needs point a or params.za");
    NlsOptions opt;
    real_d_options(p, opt);
    opt.h = p.value("h", 0.0);
    const MarkedPoint a = p.contains("za") ? s.point(za_of(p), 0) : s.point_from_json(P.at("a"));
    const NlsBundle b = nls_solution(s, a, opt, path);
    body["rho"] = b.rho;
    body["provenance"] = b.provenance();
    o.gate("vGate", b.vGate, 1e-9);
    o.gate("wGate", b.wGate, 1e-9);
    put_residual(o, "residual", nls_residual(b, g), tol);
    maybe_csv(cfg, g, sample_nls(b, g), o);
  } else {  // nnls
    const GridSpec g = make_grid(cfg, kXT, 1.0, 5);
    const cplx za = za_of(p);
    if (p.value("real", false)) {
      NnlsRealOptions opt;
      real_d_options(p, opt);
      if (p.contains("alpha")) opt.alpha = p.at("alpha").get<std::vector<int>>();
      const NnlsRealResult r = nnls_real_solution(s, za, opt, g);
      body["s"] = r.s;
      body["realityDeviation"] = r.deviation;
      body["otherSignDeviation"] = r.otherDeviation;
      if (!r.expected.empty()) {
        body["expectedSigns"] = r.expected;
        o.gate("alphaConsistent", r.alphaConsistent ? 0.0 : 1.0, 0.0);
      }
      body["provenance"] = r.bundle.provenance();
      put_residual(o, "residual", nnls_real_residual(r.bundle, r.s, g), tol);
      maybe_csv(cfg, g, sample_nnls(r.bundle, g), o);
    } else {
      const NnlsBundle b = nnls_complex_solution(s, za, nnls_params(p));
      body["provenance"] = b.provenance();
      o.gate("fiberGate", b.fiberGate, 1e-8);
      put_residual(o, "residual", nnls_system_residual(b, g), tol);
      maybe_csv(cfg, g, sample_nnls(b, g), o);
    }
  }
}

void cmd_kp(const RunConfig& cfg, const SurfaceModel& s, Outcome& o) {
  const json& p = cfg.params;
  const GridSpec g = make_grid(cfg, kXYT, 1.0, 4);
  const GridSpec probes = p.contains("probeGrid") ? GridSpec::from_json(p.at("probeGrid"))
                                                  : GridSpec{{{"x", -0.7, 0.7, 3}, {"y", -0.7, 0.7, 3}, {"t", -0.7, 0.7, 3}}};
  std::optional<NnlsBundle> nb;
  MarkedPoint a;
  CVec d = p.contains("d") ? cvec_from_json(p.at("d")) : CVec::Zero(s.genus());
  if (p.contains("za")) {
    NnlsParams np = nnls_params(p);
    np.d = -d;  // the bundle uses Z - d, KP uses z + d
    nb = nnls_complex_solution(s, za_of(p), np);
    a = nb->fiber.back();
  } else {
    a = point_or(s, cfg.points, "a", cplx(0.3, 0.4), 0);
  }
  const KpConstant kc = kp_constant_c(s, a, d, probes);
  o.body["a"] = a.describe();
  o.body["constant"] = kc.to_json();
  o.gate("probePairDefect", kc.pairDefect, 1e-7);
  o.gate("probeVerification", kc.verifyMaxRel, 1e-7);
  const KpSolution sol = kp_solution(s, a, d, kc.c);
  o.body["provenance"] = sol.provenance();
  put_residual(o, "residual", kp_residual(sol, g), cfg.tol.value_or(1e-7), true);
  if (nb) {
    const KpRelationReport rel = kp_nnls_relation_residual(*nb, kc.c, g);
    o.body["relation"] = rel.to_json();
    o.gate("relation", rel.relation.relToFieldScale, 1e-8);
    o.gate("gammaRoutes", rel.gammaDefect, 1e-9);
    o.gate("fiberIdentity", rel.identityDefect, 1e-9);
  }
}

void cmd_scan(const RunConfig& cfg, const SurfaceModel& s, Outcome& o) {
  const json& P = cfg.points;
  const json& p = cfg.params;
  const PathSpec path = path_spec(p);
  SmoothnessReport rep;
  if (cfg.solution == "nnls" || cfg.solution == "nls") {
    const GridSpec g = make_grid(cfg, kXT, 2.0, 21);
    const cplx za = cfg.solution == "nls" && !p.contains("za") ? s.point_from_json(P.at("a")).lambda : za_of(p);
    if (p.value("real", true)) {
      NnlsRealOptions opt;
      real_d_options(p, opt);
      rep = smoothness_scan(nnls_real_solution(s, za, opt, g).bundle, g);
    } else {
      rep = smoothness_scan(nnls_complex_solution(s, za, nnls_params(p)), g);
    }
  } else {
    const GridSpec g = make_grid(cfg, kXYT, 2.0, 9);
    if (cfg.solution == "ds1") {
      rep = smoothness_scan(ds1_real_solution(s, s.point_from_json(P.at("a")), s.point_from_json(P.at("b")),
                                              ds1_options(p), path).bundle, g);
    } else if (cfg.solution == "ds2") {
      rep = smoothness_scan(ds2_real_solution(s, s.point_from_json(P.at("a")), ds2_options(p), path).bundle, g);
    } else {
      rep = smoothness_scan(ds_complex_solution(s, point_or(s, P, "a", cplx(0.3, 0.4), 0),
                                                point_or(s, P, "b", cplx(1.5, -0.5), 1), ds_params(p, s.genus()), path),
                            g);
    }
  }
  o.body["solution"] = cfg.solution;
  o.body["smoothness"] = rep.to_json();
  o.gate("divisorHits", double(rep.divisorHits), 0.0);
}

void write_report(const RunConfig& cfg, const json& rep) {
  if (cfg.out.empty()) return;
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot write " + cfg.out);
  f << dump17(rep) << "\n";
}

}  // namespace

void RunConfig::merge(const json& j, const std::string& baseDir) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  if (j.contains("provider")) {
    surface = j;
    surfaceBaseDir = baseDir;
    return;
  }
  if (j.contains("surface")) {
    const json& sj = j.at("surface");
    if (sj.is_string()) {
      std::string path = sj.get<std::string>();
      if (!path.empty() && path[0] != '/') path = baseDir + "/" + path;
      merge(read_json(path), dir_of(path));
    } else {
      surface = sj;
      surfaceBaseDir = baseDir;
    }
  }
  if (j.contains("points"))
    for (const auto& [k, v] : j.at("points").items()) points[k] = v;
  if (j.contains("params"))
    for (const auto& [k, v] : j.at("params").items()) params[k] = v;
  if (j.contains("command")) command = j.at("command").get<std::string>();
  if (j.contains("identity")) identity = j.at("identity").get<std::string>();
  if (j.contains("solution")) solution = j.at("solution").get<std::string>();
  if (j.contains("grid")) grid = j.at("grid");
  if (j.contains("tol")) tol = j.at("tol").get<double>();
  if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("samples")) samples = j.at("samples").get<int>();
  if (j.contains("out")) out = j.at("out").get<std::string>();
  if (j.contains("csv")) csv = j.at("csv").get<std::string>();
}

json RunConfig::to_json() const {
  json j = {{"command", command}, {"surface", surface}, {"points", points}, {"params", params},
            {"seed", seed},       {"samples", samples}};
  if (!identity.empty()) j["identity"] = identity;
  if (!solution.empty()) j["solution"] = solution;
  if (grid) j["grid"] = *grid;
  if (tol) j["tol"] = *tol;
  return j;
}

int run(const RunConfig& cfg, std::ostream& log, json* report) {
  static const std::vector<std::string> kCommands{"surface", "check", "solve", "kp", "scan"};
  static const std::vector<std::string> kIdentities{"fay", "new", "degenerate", "q2-oracle"};
  static const std::vector<std::string> kSolutions{"nls", "ds", "ds1", "ds2", "nnls"};
  auto member = [](const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
  };
  if (!member(kCommands, cfg.command)) {
    log << "error: unknown command '" << cfg.command << "'\n";
    return kExitUsage;
  }
  if (cfg.command == "check" && !member(kIdentities, cfg.identity)) {
    log << "error: --identity must be one of fay, new, degenerate, q2-oracle\n";
    return kExitUsage;
  }
  if ((cfg.command == "solve" || cfg.command == "scan") && !member(kSolutions, cfg.solution)) {
    log << "error: solution must be one of nls, ds, ds1, ds2, nnls\n";
    return kExitUsage;
  }
  if (cfg.surface.is_null()) {
    log << "error: no surface given (--surface or a config with a surface)\n";
    return kExitUsage;
  }

  std::optional<SurfaceModel> surf;
  std::string cachePath;
  try {
    BuildOptions bo;
    bo.cacheDir = cfg.cacheDir;
    bo.useCache = cfg.useCache;
    const SurfaceConfig sc = SurfaceConfig::from_json(cfg.surface, cfg.surfaceBaseDir);
    surf.emplace(build_surface(sc, bo));
    if (cfg.command == "surface" && cfg.useCache && surf->provider().kind() != "genus1Analytic" &&
        surf->provider().kind() != "directFile") {
      const char* env = std::getenv("THETAFAY_CACHE_DIR");
      const std::string dir = !cfg.cacheDir.empty() ? cfg.cacheDir : env ? std::string(env) : std::string();
      if (!dir.empty()) cachePath = cache_surface(sc, dir);
    }
  } catch (const std::exception& e) {
    log << "error: surface build failed: " << e.what() << "\n";
    return kExitUsage;
  }
  const SurfaceModel& s = *surf;
  if (!s.cache_warning().empty()) log << "warning: " << s.cache_warning() << "\n";

  Outcome o;
  json rep = {{"tool", "thetafay"},
              {"version", kToolVersion},
              {"command", cfg.command},
              {"surfaceHash", s.hash()},
              {"seed", cfg.seed}};
  int code = kExitOk;
  try {
    if (cfg.command == "surface") {
      cmd_surface(cfg, s, o);
      if (!cachePath.empty()) o.body["cachePath"] = cachePath;
    }
    else if (cfg.command == "check") cmd_check(cfg, s, o);
    else if (cfg.command == "solve") cmd_solve(cfg, s, o);
    else if (cfg.command == "kp") cmd_kp(cfg, s, o);
    else cmd_scan(cfg, s, o);
  } catch (const SignMismatch& e) {
    o.body["computedRho"] = e.computed();
    o.body["error"] = e.what();
    o.violations.push_back("rho");
  } catch (const NumericalError& e) {
    o.body["error"] = e.what();
    o.violations.push_back("numerical");
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  for (auto& [k, v] : o.body.items()) rep[k] = v;
  rep["tolerances"] = o.tolerances;
  rep["violations"] = o.violations;
  rep["status"] = o.violations.empty() ? "pass" : "fail";
  if (!o.violations.empty()) code = kExitTolerance;
  try {
    write_report(cfg, rep);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (report) *report = rep;
  log << cfg.command << ": " << rep["status"].get<std::string>();
  if (rep.contains("error")) log << " (" << rep["error"].get<std::string>() << ")";
  for (const auto& v : o.violations) log << " [" << v << "]";
  log << "\n";
  return code;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Theta functions, Fay identities and finite-gap wave solutions"};
  app.require_subcommand(1);

  std::string configFile, surfaceFile, identity, solution, out_, csv, cacheDir;
  std::optional<double> tol, gridRange, za;
  std::optional<int> rho, samples, gridN;
  std::optional<std::uint64_t> seed;
  bool noCache = false, real = false;

  auto common = [&](CLI::App* sc) {
    sc->add_option("--config", configFile, "run configuration (JSON)");
    sc->add_option("--surface", surfaceFile, "surface config or surface bundle (JSON)");
    sc->add_option("--out", out_, "report path (JSON)");
    sc->add_option("--tol", tol, "main residual tolerance");
    sc->add_option("--seed", seed, "seed for random sampling");
    sc->add_option("--cache-dir", cacheDir, "surface cache directory (overrides THETAFAY_CACHE_DIR)");
    sc->add_flag("--no-cache", noCache, "ignore the surface cache");
  };
  auto gridded = [&](CLI::App* sc) {
    sc->add_option("--grid-n", gridN, "points per grid axis")->check(CLI::PositiveNumber);
    sc->add_option("--grid-range", gridRange, "symmetric grid half-width")->check(CLI::PositiveNumber);
    sc->add_option("--csv", csv, "sampled fields (CSV)");
  };

  CLI::App* surface = app.add_subcommand("surface", "build, cache and describe a surface");
  common(surface);
  CLI::App* check = app.add_subcommand("check", "identity sweep over random arguments");
  common(check);
  check->add_option("--identity", identity, "fay | new | degenerate | q2-oracle")
      ->check(CLI::IsMember({"fay", "new", "degenerate", "q2-oracle"}));
  check->add_option("--samples", samples, "number of random z")->check(CLI::PositiveNumber);
  CLI::App* solve = app.add_subcommand("solve", "construct a solution and check its residuals");
  common(solve);
  gridded(solve);
  solve->add_option("solution", solution, "nls | ds | ds1 | ds2 | nnls")
      ->required()
      ->check(CLI::IsMember({"nls", "ds", "ds1", "ds2", "nnls"}));
  solve->add_option("--rho", rho, "requested sign for ds1")->check(CLI::IsMember({-1, 1}));
  solve->add_option("--za", za, "fiber value for nnls, base point for nls");
  solve->add_flag("--real", real, "real n-NLS reduction");
  CLI::App* kp = app.add_subcommand("kp", "KP1 solution, constant c and the n-NLS relation");
  common(kp);
  gridded(kp);
  kp->add_option("--za", za, "fiber value; adds the n-NLS relation check");
  CLI::App* scan = app.add_subcommand("scan", "smoothness scan of a real solution");
  common(scan);
  gridded(scan);
  scan->add_option("solution", solution, "nls | ds | ds1 | ds2 | nnls")
      ->required()
      ->check(CLI::IsMember({"nls", "ds", "ds1", "ds2", "nnls"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  RunConfig cfg;
  try {
    if (!configFile.empty()) cfg.merge(read_json(configFile), dir_of(configFile));
    if (!surfaceFile.empty()) cfg.merge(read_json(surfaceFile), dir_of(surfaceFile));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  for (CLI::App* sc : {surface, check, solve, kp, scan})
    if (sc->parsed()) cfg.command = sc->get_name();
  if (!identity.empty()) cfg.identity = identity;
  if (!solution.empty()) cfg.solution = solution;
  if (!out_.empty()) cfg.out = out_;
  if (!csv.empty()) cfg.csv = csv;
  if (!cacheDir.empty()) cfg.cacheDir = cacheDir;
  if (noCache) cfg.useCache = false;
  if (tol) cfg.tol = tol;
  if (seed) cfg.seed = *seed;
  if (samples) cfg.samples = *samples;
  if (gridN) cfg.gridN = *gridN;
  if (gridRange) cfg.gridRange = *gridRange;
  if (rho) cfg.params["rho"] = *rho;
  if (za) cfg.params["za"] = *za;
  if (real) cfg.params["real"] = true;
  return run(cfg, err);
}

}  // namespace thetafay
