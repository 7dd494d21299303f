#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "thetafay/fay.hpp"
#include "thetafay/flow.hpp"
#include "thetafay/grid.hpp"

namespace thetafay {

struct EquationResidual {
  std::string name;
  double maxAbs = 0.0;
  double termScale = 0.0;  // largest single term over the grid
  double relToTermScale() const { return termScale > 0 ? maxAbs / termScale : maxAbs; }
};

struct FdProbe {
  std::size_t index = 0;   // grid index of the probe point
  double step = 1e-4;
  double maxRel = 0.0;     // worst analytic vs central-difference mismatch
  bool done = false;
};

struct ResidualReport {
  double maxAbs = 0.0;
  double fieldScale = 0.0;        // max field magnitude over the grid
  double relToFieldScale = 0.0;
  std::vector<EquationResidual> perEquation;
  GridSpec grid;
  std::string method = "analytic";
  std::vector<std::size_t> skipped;  // grid points on the theta divisor
  FdProbe fd;

  void finish();  // fills maxAbs and relToFieldScale from perEquation
  nlohmann::json to_json() const;
};

struct ResidualOptions {
  bool fdCheck = true;
  double fdStep = 1e-4;
  bool parallel = true;
  double divisorTol = 1e-12;   // skip points with |Theta| below this fraction of its terms
};

// ---------------------------------------------------------------- DS family

enum class DsVariables { Complex, Real, Conjugate };  // (x,y) -> (xi,eta): (x,y), (x,y), (x+iy, x-iy)

struct DSParams {
  cplx kappa1{1.0, 0.0}, kappa2{1.0, 0.0};
  cplx A{1.0, 0.0};
  cplx h{0.0, 0.0};
  CVec d;                       // defaults to zero
};

struct DsValues {
  cplx psi, psiStar, phi;
  double thetaNormAbs = 0.0;    // lattice-normalized |Theta(Z - d)|
  double vanishing = 0.0;
};

struct DsBundle {
  const SurfaceModel* surface = nullptr;
  MarkedPoint a, b;
  PointJet ja, jb;
  CVec r;
  FayScalars fab, fba;
  DSParams params;
  cplx G1, G2, G3;
  cplx psiCoeff, starCoeff;     // A and -kappa1 kappa2 q2 / A
  CVec Fxi, Feta, Ft;           // dZ/dxi, dZ/deta, dZ/dt
  DsVariables variables = DsVariables::Complex;
  std::string contour;

  CVec Z(cplx xi, cplx eta, cplx t) const { return xi * Fxi + eta * Feta + t * Ft; }
  void map(const std::vector<double>& p, cplx& xi, cplx& eta, cplx& t) const;
  DsValues eval(cplx xi, cplx eta, cplx t, bool reduce = true) const;
  DsValues eval_grid(const std::vector<double>& p) const;
  nlohmann::json provenance() const;
};

DsBundle ds_complex_solution(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b,
                             const DSParams& params, const PathSpec& path = {});
ResidualReport ds_system_residual(const DsBundle& bundle, const GridSpec& grid, const ResidualOptions& opt = {});

// max |psi* - rho conj(psi)| / max |psi| over the grid
double ds_reality_deviation(const DsBundle& bundle, const GridSpec& grid, int rho);

struct Ds1Options {
  RVec dR;                        // defaults to zero
  IVec T;                         // defaults to zero
  double theta = 0.0;
  double kappa1Tilde = 1.0;
  double kappa2 = 1.0;
  double h = 0.0;
  int rho = 0;                    // requested sign, 0 = take the computed one
  std::optional<double> kappa1;   // explicit kappa1 instead of the constructed one
};

struct Ds1Result {
  DsBundle bundle;
  int rho = 0;
  LatticePair lattice;
  cplx reality;                   // q2 exp(1/2 <BM,M> + <r + d, M>)
  double realityImag = 0.0;       // |Im| / |.| of the above
  double absA = 0.0;
  double freqConjDefect = 0.0;    // conjugation law of G1, G2, G3
};

class SignMismatch : public NumericalError {
 public:
  SignMismatch(const std::string& what, int computed) : NumericalError(what), computed_(computed) {}
  int computed() const { return computed_; }

 private:
  int computed_;
};

Ds1Result ds1_real_solution(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b,
                            const Ds1Options& opt, const PathSpec& path = {});

struct Ds2Options {
  IVec L;                         // defaults to zero
  RVec dI;                        // defaults to zero
  double theta = 0.0;
  cplx kappa1{1.0, 0.0};
  double h = 0.0;
};

struct Ds2Result {
  DsBundle bundle;
  int rho = 0;
  LatticePair lattice;            // N from the swapped-point inference
  IVec T;
  double q2Imag = 0.0;            // |Im q2| / |q2|
  double absA = 0.0;
  double g1g2Conj = 0.0;          // |conj G1 - G2| / |G1|
  double g3Imag = 0.0;
};

// b is taken as tau(a).
Ds2Result ds2_real_solution(const SurfaceModel& s, const MarkedPoint& a, const Ds2Options& opt,
                            const PathSpec& path = {});

// Max pointwise mismatch between the solution built with rescaled local
// parameters and the transformation law applied to the original one.
double ds_covariance_defect(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b,
                            const DSParams& params, cplx beta, cplx mu1, cplx mu2, const GridSpec& grid,
                            const PathSpec& path = {});

// ------------------------------------------------------------------- NLS

struct NlsBundle {
  const SurfaceModel* surface = nullptr;
  MarkedPoint a, b;
  PointJet ja, jb;
  CVec r, d;
  FayScalars fab, fba;
  LatticePair lattice;
  int rho = 0;
  cplx amplitude;               // |A| e^{i theta}
  cplx G1, G3, q1;
  double h = 0.0;
  double vGate = 0.0, wGate = 0.0;   // |V_a + V_b| / |V_a|, same for W

  cplx psi(double x, double t, bool reduce = true) const;  // includes the q1 phase factor
  nlohmann::json provenance() const;
};

struct NlsOptions {
  RVec dR;
  IVec T;
  double theta = 0.0;
  double h = 0.0;
};

// a real point on a hyperelliptic surface; b = sigma(a).
NlsBundle nls_solution(const SurfaceModel& s, const MarkedPoint& a, const NlsOptions& opt = {},
                       const PathSpec& path = {});
ResidualReport nls_residual(const NlsBundle& bundle, const GridSpec& grid, const ResidualOptions& opt = {});

// psi = A Theta(Z - d + r)/Theta(Z - d) exp(i(-K1 x + K2 t)), Z = i V_a x + i W_a t.
struct LinearSchrodinger {
  const SurfaceModel* surface = nullptr;
  FayScalars f;
  CVec d;
  cplx A{1.0, 0.0};

  cplx psi(double x, double t) const;
  cplx potential(double x, double t) const;   // (ln Theta(Z - d))_xx
};
LinearSchrodinger linear_schrodinger(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b,
                                     const CVec& d, cplx A = 1.0, const PathSpec& path = {});
ResidualReport linear_schrodinger_residual(const LinearSchrodinger& ls, const GridSpec& grid,
                                           const ResidualOptions& opt = {});

// ----------------------------------------------------------------- n-NLS

struct NnlsParams {
  std::vector<cplx> A;          // per component, defaults to 1
  CVec d;
  int base = -1;                // index of a_{n+1} in the fiber, -1 = last
};

struct NnlsValues {
  std::vector<cplx> psi, psiStar;
  double thetaNormAbs = 0.0;
  double vanishing = 0.0;
};

struct NnlsBundle {
  const SurfaceModel* surface = nullptr;
  cplx za;
  std::vector<MarkedPoint> fiber;   // a_1..a_n, then a_{n+1}
  std::vector<PointJet> jets;
  std::vector<CVec> r;              // int_{a_{n+1}}^{a_j}
  std::vector<std::string> contours;
  std::vector<FayScalars> scalars;  // (a_{n+1}, a_j)
  std::vector<cplx> E, F, A, q2;
  cplx q1Sum;
  CVec V, W, d;
  double fiberGate = 0.0;           // |sum V| / max |V|

  int n() const { return int(r.size()); }
  CVec Z(cplx x, cplx t) const { return kI * (x * V + t * W); }
  NnlsValues eval(cplx x, cplx t, bool reduce = true) const;
  nlohmann::json provenance() const;
};

NnlsBundle nnls_complex_solution(const SurfaceModel& s, cplx za, const NnlsParams& params);
// Same construction from an explicit point list (the last entry is a_{n+1}).
NnlsBundle nnls_from_points(const SurfaceModel& s, const std::vector<MarkedPoint>& pts, const NnlsParams& params,
                            double gateTol = 1e-8);
ResidualReport nnls_system_residual(const NnlsBundle& bundle, const GridSpec& grid, const ResidualOptions& opt = {});
// |psi_j| and | sum_k s_k |psi_k|^2 |-coupled real system with the given signs
ResidualReport nnls_real_residual(const NnlsBundle& bundle, const std::vector<int>& signs, const GridSpec& grid,
                                  const ResidualOptions& opt = {});

struct NnlsRealOptions {
  RVec dR;
  IVec T;
  double theta = 0.0;
  std::vector<int> alpha;           // optional intersection indices to cross-check
  double tol = 1e-8;
};

struct NnlsRealResult {
  NnlsBundle bundle;
  std::vector<int> s;
  std::vector<double> deviation;        // for the chosen sign
  std::vector<double> otherDeviation;   // for the rejected sign
  std::vector<LatticePair> lattice;
  std::vector<int> expected;            // from alpha, when supplied
  bool alphaConsistent = true;
};
NnlsRealResult nnls_real_solution(const SurfaceModel& s, cplx za, const NnlsRealOptions& opt,
                                  const GridSpec& grid);
// psi_j after aligning the constant factor against a reference field
double nnls_vs_nls_defect(const NnlsBundle& nn, const NlsBundle& nls, const GridSpec& grid);
double nnls_covariance_defect(const SurfaceModel& s, cplx za, const NnlsParams& params, cplx beta, cplx mu,
                              const GridSpec& grid);

// --------------------------------------------------------------- stationary

struct StationaryReport {
  double wGate = 0.0;            // |W_a| / |V_a|
  double timeVariation = 0.0;    // max over x of max_t | |psi(x,t)| - |psi(x,0)| |, relative to scale
  double sliceDistance = 0.0;    // sup_x | |psi(x,0)| - |psi(x,1)| | / scale
  double fieldScale = 0.0;
  bool wGatePassed = false;
};
// psi of the linear form with a_{n+1} = a; b is a second point with an affine parameter.
StationaryReport stationary_check(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b,
                                  const CVec& d, const GridSpec& grid, double wTol = 1e-8);

// ---------------------------------------------------------------- scans

struct SmoothnessReport {
  double minAbsTheta = 0.0;      // lattice-normalized |Theta(Z - d)|
  double medianAbsTheta = 0.0;
  double minLogAbs = 0.0;        // raw log |Theta(Z - d)| at the minimizing point
  std::size_t argmin = 0;
  std::size_t divisorHits = 0;   // points below 1e-10 of the median

  nlohmann::json to_json() const;
};

SmoothnessReport smoothness_scan(const DsBundle& bundle, const GridSpec& grid, bool parallel = true);
SmoothnessReport smoothness_scan(const NnlsBundle& bundle, const GridSpec& grid, bool parallel = true);
// Generic form: w(p) = Z(p) - d evaluated by the caller.
SmoothnessReport smoothness_scan_args(const SurfaceModel& s, const std::vector<CVec>& args, bool parallel = true);

// Newton on s -> Theta(w0 - d0 - s v) = 0; returns d0 + s v.
CVec divisor_shift(const SurfaceModel& s, const CVec& w0, const CVec& d0, const CVec& v);

// Default extents so that the flow crosses at least one lattice cell.
double cell_crossing_extent(const RiemannMatrix& B, const CVec& flow);

// ---------------------------------------------------------------- export

struct FieldColumn {
  std::string name;
  std::vector<cplx> values;
};
// CSV: grid coordinates, then Re, Im, abs per column.
void write_field_csv(const std::string& path, const GridSpec& grid, const std::vector<FieldColumn>& cols);
std::vector<FieldColumn> sample_ds(const DsBundle& b, const GridSpec& grid);
std::vector<FieldColumn> sample_nnls(const NnlsBundle& b, const GridSpec& grid);
std::vector<FieldColumn> sample_nls(const NlsBundle& b, const GridSpec& grid);

}  // namespace thetafay
