#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "thetafay/theta.hpp"

namespace thetafay {

enum class ParamKind { Affine, SqrtBranch };

// A point on the curve together with its local parameter.  For the
// genus-1 analytic provider `lambda` is the uniformizing coordinate, for
// directFile surfaces `sheet` indexes the file's point table.
struct MarkedPoint {
  cplx lambda{0.0, 0.0};
  cplx y{0.0, 0.0};
  int sheet = 0;
  ParamKind kind = ParamKind::Affine;
  int branchIndex = -1;
  int branchSign = 1;
  // scaled parameter: k_base = beta k + mu k^2
  cplx beta{1.0, 0.0};
  cplx mu{0.0, 0.0};
  std::string label;

  bool scaled() const { return beta != cplx(1.0, 0.0) || mu != cplx(0.0, 0.0); }
  bool is_branch() const { return kind == ParamKind::SqrtBranch; }
  MarkedPoint with_scaling(cplx b, cplx m) const;
  std::string describe() const;
};

// omega = (V + W k + U k^2 / 2 + ...) dk in the point's local parameter.
struct PointJet {
  CVec V, W, U;
  double closure = 0.0;  // continuation closure defect of the Cauchy loop
};

struct PathSpec {
  std::vector<cplx> via;    // waypoints in the base coordinate
  int throughBranch = -1;   // route through this branch point
  bool empty() const { return via.empty() && throughBranch < 0; }
};

struct AbelPath {
  CVec r;
  MarkedPoint a, b;
  PathSpec path;           // resolved route actually used
  std::string contour;     // human-readable description
  bool crossesCycles = false;
};

struct RealStructure {
  IMat H;                  // (B - conj B) / (2 pi i), reduced to {0,1}
  std::string tau;         // "y->conj(y)", "y->-conj(y)", "zeta->-conj(zeta)", "given"
  double integralityDefect = 0.0;
  int ovals = -1;          // -1 when not computed
};

struct PlaneTerm {
  int i = 0, j = 0;  // lambda^i y^j
  cplx c{0.0, 0.0};
};

struct SurfaceConfig {
  std::string provider;             // hyperelliptic | superelliptic | planeCubic | genus1Analytic | directFile
  std::vector<cplx> branchPoints;   // hyperelliptic chain order; superelliptic finite points
  int degree = 3;                   // superelliptic cover degree
  std::vector<PlaneTerm> terms;     // planeCubic
  CMat B;                           // genus1Analytic
  nlohmann::json direct;            // directFile payload
  int quadratureOrder = 64;
  int maxGenus = 4;
  double thetaTol = 1e-13;

  static SurfaceConfig from_json(const nlohmann::json& j, const std::string& baseDir = ".");
  nlohmann::json to_json() const;   // canonical form, hashed for the cache
};

class CurveProvider;
struct BuildOptions;

class SurfaceModel {
 public:
  SurfaceModel(SurfaceConfig cfg, std::shared_ptr<const CurveProvider> p, bool fromCache);

  int genus() const { return riemann_.genus(); }
  const RiemannMatrix& riemann() const { return riemann_; }
  const CMat& B() const { return riemann_.matrix(); }
  const HalfCharacteristic& odd_char() const { return odd_; }
  const std::optional<RealStructure>& real_structure() const { return real_; }
  const std::string& real_status() const { return realStatus_; }
  const CurveProvider& provider() const { return *provider_; }
  const SurfaceConfig& config() const { return cfg_; }
  const std::string& hash() const { return hash_; }
  double theta_tol() const { return cfg_.thetaTol; }
  double normalization_residual() const;
  bool from_cache() const { return fromCache_; }
  const std::string& cache_warning() const { return cacheWarning_; }

  MarkedPoint point(cplx lambda, int sheet = 0) const;
  MarkedPoint point_with_y(cplx lambda, cplx y) const;
  MarkedPoint branch_point(int index, int sign = 1) const;
  MarkedPoint tau(const MarkedPoint& p) const;
  MarkedPoint point_from_json(const nlohmann::json& j) const;

 private:
  SurfaceConfig cfg_;
  std::shared_ptr<const CurveProvider> provider_;
  RiemannMatrix riemann_;
  HalfCharacteristic odd_;
  std::optional<RealStructure> real_;
  std::string realStatus_;
  std::string hash_;
  bool fromCache_ = false;
  std::string cacheWarning_;
  friend SurfaceModel build_surface(const SurfaceConfig&, const BuildOptions&);
};

struct BuildOptions {
  std::string cacheDir;     // empty: THETAFAY_CACHE_DIR or no cache
  bool useCache = true;
};

SurfaceModel build_surface(const SurfaceConfig& cfg, const BuildOptions& opt = {});
SurfaceModel load_surface(const std::string& path, const BuildOptions& opt = {});
// Builds (or reuses) the cache entry for cfg and returns its path.
std::string cache_surface(const SurfaceConfig& cfg, const std::string& dir);
std::string config_hash(const SurfaceConfig& cfg);

PointJet point_jet(const SurfaceModel& s, const MarkedPoint& p);
AbelPath abel_between(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b,
                      const PathSpec& path = {});
std::vector<MarkedPoint> fiber_over(const SurfaceModel& s, cplx za);
bool same_point(const MarkedPoint& a, const MarkedPoint& b);

HalfCharacteristic odd_nonsingular_char(const RiemannMatrix& B, double tol);

struct LatticePair {
  IVec N, M;
  double residual = 0.0;  // distance of the real solution to integers
};
// kind: "fixedPoints" (tau a = a, tau b = b) or "swappedPoints" (tau a = b).
LatticePair infer_lattice_pair(const SurfaceModel& s, const CVec& r, const std::string& kind);

// Provider interface.  Concrete providers live in src/surfaces.
class CurveProvider {
 public:
  virtual ~CurveProvider() = default;
  virtual std::string kind() const = 0;
  virtual int genus() const = 0;
  virtual CMat riemann() const = 0;
  virtual std::optional<RealStructure> real_structure(std::string& status) const {
    status = "no real structure";
    return std::nullopt;
  }
  virtual double normalization_residual() const { return 0.0; }
  virtual nlohmann::json state() const { return nlohmann::json::object(); }

  virtual MarkedPoint point(cplx lambda, int sheet) const = 0;
  virtual MarkedPoint point_with_y(cplx lambda, cplx y) const;
  virtual MarkedPoint branch_point(int index, int sign) const;
  virtual std::vector<cplx> branch_points() const { return {}; }
  virtual MarkedPoint tau(const MarkedPoint& p) const;

  virtual PointJet base_jet(const MarkedPoint& p) const = 0;
  virtual AbelPath abel(const MarkedPoint& a, const MarkedPoint& b, const PathSpec& path) const = 0;
  virtual std::vector<MarkedPoint> fiber(cplx za) const;

  // Third-kind differential with residue +1 at b, -1 at a and zero
  // A-periods, integrated from pa to pb along the route of abel(a, b).
  virtual bool supports_third_kind() const { return false; }
  virtual cplx third_kind(const MarkedPoint& a, const MarkedPoint& b, const PathSpec& route,
                          double eps, cplx& ka, cplx& kb) const;
};

}  // namespace thetafay
