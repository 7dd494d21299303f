#include "thetafay/surface.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <tuple>

#include "cache.hpp"
#include "providers.hpp"
#include "thetafay/report.hpp"

namespace thetafay {

// ---- MarkedPoint -----------------------------------------------------------

MarkedPoint MarkedPoint::with_scaling(cplx b, cplx m) const {
  // compose k_base = beta (b k + m k^2) + mu (b k)^2 + O(k^3)
  if (b == cplx(0.0, 0.0)) throw std::invalid_argument("local parameter scaling needs beta != 0");
  MarkedPoint p = *this;
  p.beta = beta * b;
  p.mu = beta * m + mu * b * b;
  return p;
}

std::string MarkedPoint::describe() const {
  char buf[160];
  if (is_branch())
    std::snprintf(buf, sizeof buf, "branch[%d] (%.6g,%.6g) sqrt sign %+d", branchIndex, lambda.real(),
                  lambda.imag(), branchSign);
  else
    std::snprintf(buf, sizeof buf, "(%.6g,%.6g) y=(%.6g,%.6g)", lambda.real(), lambda.imag(), y.real(),
                  y.imag());
  std::string s = buf;
  if (!label.empty()) s = label + " " + s;
  if (scaled()) {
    std::snprintf(buf, sizeof buf, " beta=(%.6g,%.6g) mu=(%.6g,%.6g)", beta.real(), beta.imag(), mu.real(),
                  mu.imag());
    s += buf;
  }
  return s;
}

// ---- CurveProvider defaults ------------------------------------------------

MarkedPoint CurveProvider::point_with_y(cplx, cplx) const {
  throw std::invalid_argument(kind() + " does not accept explicit y values");
}

MarkedPoint CurveProvider::branch_point(int, int) const {
  throw std::invalid_argument("sqrtBranch parameters are only defined on hyperelliptic curves");
}

MarkedPoint CurveProvider::tau(const MarkedPoint&) const {
  throw std::invalid_argument(kind() + " has no anti-involution");
}

std::vector<MarkedPoint> CurveProvider::fiber(cplx) const {
  throw std::invalid_argument(kind() + " has no distinguished meromorphic function");
}

cplx CurveProvider::third_kind(const MarkedPoint&, const MarkedPoint&, const PathSpec&, double, cplx&,
                               cplx&) const {
  throw std::invalid_argument("third-kind differentials are not available on " + kind());
}

// ---- SurfaceConfig ---------------------------------------------------------

namespace {

std::string canonical_provider(const std::string& p) {
  if (p == "superellipticCubicRoot" || p == "superelliptic") return "superellipticCubicRoot";
  if (p == "hyperelliptic" || p == "planeCubic" || p == "genus1Analytic" || p == "directFile") return p;
  throw std::invalid_argument("unknown provider '" + p + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string dir_of(const std::string& path) {
  auto pos = path.find_last_of('/');
  return pos == std::string::npos ? "." : path.substr(0, pos);
}

}  // namespace

SurfaceConfig SurfaceConfig::from_json(const nlohmann::json& j, const std::string& baseDir) {
  SurfaceConfig c;
  if (!j.is_object() || !j.contains("provider")) throw std::invalid_argument("surface config needs a provider");
  c.provider = canonical_provider(j.at("provider").get<std::string>());
  if (j.contains("branchPoints"))
    for (const auto& z : j.at("branchPoints")) c.branchPoints.push_back(cplx_from_json(z));
  c.degree = j.value("degree", 3);
  if (j.contains("terms"))
    for (const auto& t : j.at("terms")) {
      PlaneTerm pt;
      pt.i = t.at("i").get<int>();
      pt.j = t.at("j").get<int>();
      pt.c = cplx_from_json(t.at("c"));
      c.terms.push_back(pt);
    }
  if (j.contains("B")) c.B = cmat_from_json(j.at("B"));
  if (j.contains("direct")) c.direct = j.at("direct");
  if (j.contains("path")) {
    std::string p = j.at("path").get<std::string>();
    if (!p.empty() && p[0] != '/') p = baseDir + "/" + p;
    c.direct = nlohmann::json::parse(read_file(p));
  }
  c.quadratureOrder = j.value("quadratureOrder", 64);
  c.maxGenus = j.value("maxGenus", 4);
  c.thetaTol = j.value("thetaTol", 1e-13);
  if (c.quadratureOrder < 4 || c.quadratureOrder > 1000)
    throw std::invalid_argument("quadratureOrder must be in [4, 1000]");
  if (!(c.thetaTol > 0 && c.thetaTol <= 1e-4)) throw std::invalid_argument("thetaTol must be in (0, 1e-4]");
  if (c.provider == "directFile" && c.direct.is_null())
    throw std::invalid_argument("directFile needs 'path' or 'direct'");
  return c;
}

nlohmann::json SurfaceConfig::to_json() const {
  nlohmann::json j;
  j["provider"] = provider;
  j["quadratureOrder"] = quadratureOrder;
  j["maxGenus"] = maxGenus;
  j["thetaTol"] = thetaTol;
  if (provider == "hyperelliptic" || provider == "superellipticCubicRoot") {
    auto a = nlohmann::json::array();
    for (auto z : branchPoints) a.push_back(thetafay::to_json(z));
    j["branchPoints"] = a;
  }
  if (provider == "superellipticCubicRoot") j["degree"] = degree;
  if (provider == "planeCubic") {
    auto a = nlohmann::json::array();
    for (const auto& t : terms) a.push_back({{"i", t.i}, {"j", t.j}, {"c", thetafay::to_json(t.c)}});
    j["terms"] = a;
  }
  if (provider == "genus1Analytic") j["B"] = thetafay::to_json(B);
  if (provider == "directFile") j["direct"] = direct;
  return j;
}

std::string config_hash(const SurfaceConfig& cfg) { return hex64(fnv1a64(dump17(cfg.to_json(), -1))); }

// ---- SurfaceModel ----------------------------------------------------------

SurfaceModel::SurfaceModel(SurfaceConfig cfg, std::shared_ptr<const CurveProvider> p, bool fromCache)
    : cfg_(std::move(cfg)), provider_(std::move(p)), riemann_(provider_->riemann()), fromCache_(fromCache) {
  if (genus() > cfg_.maxGenus) throw std::invalid_argument("genus exceeds maxGenus");
  odd_ = odd_nonsingular_char(riemann_, std::min(cfg_.thetaTol, 1e-12));
  real_ = provider_->real_structure(realStatus_);
  hash_ = config_hash(cfg_);
}

double SurfaceModel::normalization_residual() const { return provider_->normalization_residual(); }

MarkedPoint SurfaceModel::point(cplx lambda, int sheet) const { return provider_->point(lambda, sheet); }

MarkedPoint SurfaceModel::point_with_y(cplx lambda, cplx y) const { return provider_->point_with_y(lambda, y); }

MarkedPoint SurfaceModel::branch_point(int index, int sign) const { return provider_->branch_point(index, sign); }

MarkedPoint SurfaceModel::tau(const MarkedPoint& p) const {
  if (!real_) throw std::invalid_argument("surface has no real structure: " + realStatus_);
  return provider_->tau(p);
}

// {"lambda": z, "sheet": s} | {"lambda": z, "y": w} | {"branch": i, "sign": +-1} | {"index": i}
// plus optional "beta", "mu", "label".
MarkedPoint SurfaceModel::point_from_json(const nlohmann::json& j) const {
  MarkedPoint p;
  if (j.contains("branch")) {
    p = branch_point(j.at("branch").get<int>(), j.value("sign", 1));
  } else if (j.contains("index")) {
    p = point(double(j.at("index").get<int>()), 0);
  } else if (j.contains("lambda")) {
    cplx l = cplx_from_json(j.at("lambda"));
    p = j.contains("y") ? point_with_y(l, cplx_from_json(j.at("y"))) : point(l, j.value("sheet", 0));
  } else {
    throw std::invalid_argument("point needs 'lambda', 'branch' or 'index': " + j.dump());
  }
  if (j.contains("beta") || j.contains("mu")) {
    cplx b = j.contains("beta") ? cplx_from_json(j.at("beta")) : cplx(1.0);
    cplx m = j.contains("mu") ? cplx_from_json(j.at("mu")) : cplx(0.0);
    if (b == cplx(0.0)) throw std::invalid_argument("beta must be nonzero");
    p = p.with_scaling(b, m);
  }
  if (j.contains("label")) p.label = j.at("label").get<std::string>();
  return p;
}

// ---- construction ----------------------------------------------------------

namespace {

std::shared_ptr<const CurveProvider> make_provider(const SurfaceConfig& cfg, const nlohmann::json* state) {
  if (cfg.provider == "hyperelliptic") return detail::make_hyperelliptic(cfg, state);
  if (cfg.provider == "superellipticCubicRoot") return detail::make_superelliptic(cfg, state);
  if (cfg.provider == "planeCubic") return detail::make_plane_cubic(cfg, state);
  if (cfg.provider == "genus1Analytic") return detail::make_genus1_analytic(cfg);
  if (cfg.provider == "directFile") return detail::make_direct_file(cfg);
  throw std::invalid_argument("unknown provider '" + cfg.provider + "'");
}

bool cacheable(const SurfaceConfig& cfg) {
  return cfg.provider == "hyperelliptic" || cfg.provider == "superellipticCubicRoot" ||
         cfg.provider == "planeCubic";
}

std::string resolve_cache_dir(const BuildOptions& opt) {
  if (!opt.useCache) return {};
  if (!opt.cacheDir.empty()) return opt.cacheDir;
  const char* env = std::getenv("THETAFAY_CACHE_DIR");
  return env ? std::string(env) : std::string();
}

}  // namespace

SurfaceModel build_surface(const SurfaceConfig& cfg, const BuildOptions& opt) {
  const std::string dir = cacheable(cfg) ? resolve_cache_dir(opt) : std::string();
  if (dir.empty()) return SurfaceModel(cfg, make_provider(cfg, nullptr), false);

  const std::string hash = config_hash(cfg);
  std::string warning;
  auto state = detail::cache_load(dir, hash, cfg.to_json(), warning);
  if (state) {
    try {
      SurfaceModel m(cfg, make_provider(cfg, &*state), true);
      return m;
    } catch (const std::exception& ex) {
      warning = std::string("cached state unusable (") + ex.what() + "), rebuilding";
    }
  }
  SurfaceModel m(cfg, make_provider(cfg, nullptr), false);
  detail::cache_store(dir, hash, cfg.to_json(), m.provider().state());
  m.cacheWarning_ = warning;
  return m;
}

SurfaceModel load_surface(const std::string& path, const BuildOptions& opt) {
  auto j = nlohmann::json::parse(read_file(path));
  if (j.contains("surface")) j = j.at("surface");
  // bundles may point at another file for their surface
  if (j.is_string()) {
    std::string ref = j.get<std::string>();
    if (!ref.empty() && ref[0] != '/') ref = dir_of(path) + "/" + ref;
    return load_surface(ref, opt);
  }
  return build_surface(SurfaceConfig::from_json(j, dir_of(path)), opt);
}

std::string cache_surface(const SurfaceConfig& cfg, const std::string& dir) {
  if (!cacheable(cfg)) throw std::invalid_argument(cfg.provider + " surfaces carry no cached state");
  BuildOptions opt;
  opt.cacheDir = dir;
  build_surface(cfg, opt);
  return detail::cache_path(dir, config_hash(cfg));
}

// ---- point queries ---------------------------------------------------------

PointJet point_jet(const SurfaceModel& s, const MarkedPoint& p) {
  PointJet j = s.provider().base_jet(p);
  if (p.scaled()) j = detail::scale_jet(j, p.beta, p.mu);
  return j;
}

AbelPath abel_between(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b, const PathSpec& path) {
  if (same_point(a, b)) throw std::invalid_argument("abel_between needs distinct points");
  AbelPath out = s.provider().abel(a, b, path);
  // the provider works with unscaled copies of the endpoints
  out.a = a;
  out.b = b;
  return out;
}

std::vector<MarkedPoint> fiber_over(const SurfaceModel& s, cplx za) { return s.provider().fiber(za); }

bool same_point(const MarkedPoint& a, const MarkedPoint& b) {
  if (a.is_branch() != b.is_branch()) return false;
  if (a.is_branch()) return a.branchIndex == b.branchIndex;
  const double sc = 1.0 + std::abs(a.lambda);
  return std::abs(a.lambda - b.lambda) <= 1e-12 * sc && std::abs(a.y - b.y) <= 1e-8 * (1.0 + std::abs(a.y));
}

// ---- characteristics and lattice pairs -------------------------------------

HalfCharacteristic odd_nonsingular_char(const RiemannMatrix& B, double tol) {
  const int g = B.genus();
  const CVec z0 = CVec::Zero(g);
  DerivativeSpec dirs;
  for (int k = 0; k < g; ++k) dirs.push_back(CVec::Unit(g, k));

  // Characteristic with index bits (dp_0 .. dp_{g-1}, dpp_0 .. dpp_{g-1}),
  // most significant first, so increasing index is lexicographic order.
  auto make = [g](unsigned idx) {
    std::uint32_t bp = 0, bpp = 0;
    for (int i = 0; i < g; ++i) {
      if (idx >> (2 * g - 1 - i) & 1u) bp |= 1u << i;
      if (idx >> (g - 1 - i) & 1u) bpp |= 1u << i;
    }
    return HalfCharacteristic::from_bits(g, bp, bpp);
  };

  const unsigned total = 1u << (2 * g);
  double evenScale = 0.0;
  for (unsigned idx = 0; idx < total; ++idx) {
    auto ch = make(idx);
    if (ch.parity() > 0) evenScale = std::max(evenScale, std::abs(theta(ch, z0, B, tol).value()));
  }
  for (unsigned idx = 0; idx < total; ++idx) {
    auto ch = make(idx);
    if (ch.parity() > 0) continue;
    ThetaJet jet(B, ch, z0, dirs, tol);
    double gn = 0.0;
    for (int k = 0; k < g; ++k) gn += std::norm(jet.moment(1u << k).value());
    if (std::sqrt(gn) >= 1e-8 * evenScale) return ch;
  }
  throw NumericalError("no odd nonsingular characteristic found; B is numerically degenerate");
}

LatticePair infer_lattice_pair(const SurfaceModel& s, const CVec& r, const std::string& kind) {
  if (!s.real_structure()) throw std::invalid_argument("lattice pair inference needs a real structure");
  const int g = s.genus();
  const CMat& B = s.B();
  RVec Mr(g), Nr(g);
  if (kind == "fixedPoints") {
    // conj(r) = -r - 2 pi i N - B M
    RMat ReB = B.real();
    Mr = -ReB.lu().solve(2.0 * r.real());
    Nr = -(B.imag() * Mr) / (2.0 * kPi);
  } else if (kind == "swappedPoints") {
    // conj(r) = r - 2 pi i N
    Mr.setZero();
    Nr = r.imag() / kPi;
  } else {
    throw std::invalid_argument("lattice pair mode must be fixedPoints or swappedPoints");
  }
  LatticePair out;
  out.N = IVec(g);
  out.M = IVec(g);
  double res = 0.0;
  for (int i = 0; i < g; ++i) {
    out.N(i) = int(std::lround(Nr(i)));
    out.M(i) = int(std::lround(Mr(i)));
    res = std::max({res, std::abs(Nr(i) - out.N(i)), std::abs(Mr(i) - out.M(i))});
  }
  out.residual = res;
  if (res > 1e-3) {
    std::ostringstream os;
    os << "lattice pair residual " << res << " exceeds 1e-3; the homology basis is not adapted to tau";
    throw NumericalError(os.str());
  }
  if (kind == "fixedPoints") {
    IVec chk = 2 * out.N + s.real_structure()->H * out.M;
    if (chk.cwiseAbs().maxCoeff() != 0) throw NumericalError("inferred pair violates 2N + HM = 0");
  }
  return out;
}

// ---- shared helpers --------------------------------------------------------

namespace detail {

std::vector<PathNode> route_nodes(const MarkedPoint& a, const MarkedPoint& b, const PathSpec& path,
                                  const std::vector<cplx>& branch) {
  auto node = [&](const MarkedPoint& p) {
    if (p.is_branch()) return PathNode{branch.at(p.branchIndex), p.branchIndex};
    return PathNode{p.lambda, -1};
  };
  std::vector<PathNode> nodes{node(a)};
  for (auto v : path.via) nodes.push_back(PathNode{v, -1});
  if (path.throughBranch >= 0) {
    if (path.throughBranch >= int(branch.size())) throw std::invalid_argument("route branch index out of range");
    nodes.push_back(PathNode{branch[path.throughBranch], path.throughBranch});
  }
  nodes.push_back(node(b));
  return nodes;
}

bool route_crosses(const std::vector<PathNode>& nodes, const std::vector<std::pair<cplx, cplx>>& cuts) {
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    for (const auto& c : cuts)
      if (segments_cross(nodes[i].lambda, nodes[i + 1].lambda, c.first, c.second)) return true;
  return false;
}

std::string describe_route(const std::vector<PathNode>& nodes) {
  std::string s;
  char buf[80];
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i) s += " -> ";
    if (nodes[i].branch >= 0) {
      std::snprintf(buf, sizeof buf, "e%d", nodes[i].branch);
    } else {
      std::snprintf(buf, sizeof buf, "(%.6g,%.6g)", nodes[i].lambda.real(), nodes[i].lambda.imag());
    }
    s += buf;
  }
  return "polyline " + s;
}

PointJet scale_jet(const PointJet& j, cplx beta, cplx mu) {
  PointJet o;
  o.V = beta * j.V;
  o.W = beta * beta * j.W + 2.0 * mu * j.V;
  o.U = beta * beta * beta * j.U + 6.0 * beta * mu * j.W;
  o.closure = j.closure;
  return o;
}

bool canonical_less(const MarkedPoint& a, const MarkedPoint& b) {
  auto key = [](const MarkedPoint& p) {
    return std::make_tuple(p.lambda.real(), p.lambda.imag(), p.y.real(), p.y.imag(), p.branchIndex);
  };
  return key(a) < key(b);
}

cplx offset_lambda(const MarkedPoint& p, cplx towards, double eps) {
  cplx d = towards - p.lambda;
  return p.lambda + eps * d / std::abs(d);
}

cplx cvec_json_c(const nlohmann::json& j) { return cplx_from_json(j); }
nlohmann::json json_c(cplx z) { return thetafay::to_json(z); }
nlohmann::json json_cmat(const CMat& m) { return thetafay::to_json(m); }
CMat cmat_json(const nlohmann::json& j) { return cmat_from_json(j); }

}  // namespace detail

}  // namespace thetafay
