#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <sstream>

#include <omp.h>

#include "thetafay/theta.hpp"

namespace thetafay {

RiemannMatrix::RiemannMatrix(const CMat& B) : B_(B) {
  if (B.rows() == 0 || B.rows() != B.cols())
    throw std::invalid_argument("Riemann matrix must be square and non-empty");
  if (!B.allFinite()) throw std::invalid_argument("Riemann matrix has non-finite entries");
  double scale = B.cwiseAbs().maxCoeff();
  double asym = (B - B.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(scale, 1.0)) {
    std::ostringstream os;
    os << "Riemann matrix is not symmetric (defect " << asym << ")";
    throw std::invalid_argument(os.str());
  }
  B_ = 0.5 * (B + B.transpose());
  Y_ = -B_.real();
  Eigen::SelfAdjointEigenSolver<RMat> es(Y_);
  double lmin = es.eigenvalues().minCoeff();
  if (!(lmin > 1e-12 * std::max(es.eigenvalues().maxCoeff(), 1e-300)) || lmin <= 0.0)
    throw std::invalid_argument("Re B is not negative definite");
  sigma_ = std::sqrt(lmin);
  Eigen::LLT<RMat> llt(Y_);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("Re B is not negative definite");
  R_ = llt.matrixU();
  Yinv_ = llt.solve(RMat::Identity(genus(), genus()));
  rho_ = R_.diagonal().minCoeff();
  mu_ = 0.5 * std::sqrt(R_.diagonal().squaredNorm());
}

HalfCharacteristic HalfCharacteristic::zero(int g) { return {RVec::Zero(g), RVec::Zero(g)}; }

HalfCharacteristic HalfCharacteristic::from_bits(int g, std::uint32_t bp, std::uint32_t bpp) {
  HalfCharacteristic h = zero(g);
  for (int i = 0; i < g; ++i) {
    h.dp(i) = (bp >> i) & 1u ? 0.5 : 0.0;
    h.dpp(i) = (bpp >> i) & 1u ? 0.5 : 0.0;
  }
  return h;
}

bool HalfCharacteristic::is_zero() const {
  return dp.cwiseAbs().maxCoeff() == 0.0 && dpp.cwiseAbs().maxCoeff() == 0.0;
}

int HalfCharacteristic::parity() const {
  long s = std::lround(4.0 * dp.dot(dpp));
  return (s % 2 == 0) ? 1 : -1;
}

namespace {

double tail_bound(double T, int g, int order, double rho, double sigma) {
  double sum = 0.0;
  for (int j = 0; j < 200; ++j) {
    double s = T + j + 1;
    double pts = std::pow(2.0 * s / rho + 1.0, g);
    double poly = std::pow(1.0 + 0.5 * std::sqrt(double(g)) + s / sigma, order);
    double term = pts * poly * std::exp(-0.5 * (T + j) * (T + j));
    sum += term;
    if (term < 1e-30 * sum) break;
  }
  return sum;
}

void check_tol(double tol) {
  if (!(tol > 0.0) || tol > 1e-4)
    throw std::invalid_argument("theta tolerance must lie in (0, 1e-4]");
}

// Fincke-Pohst enumeration of integer k with |R(k - c)|^2 <= T2.
void enumerate(const RMat& R, const RVec& c, double T2,
               const std::function<void(const IVec&, double)>& visit) {
  const int g = static_cast<int>(R.rows());
  IVec k(g);
  std::function<void(int, double)> rec = [&](int i, double used) {
    double t = 0.0;
    for (int j = i + 1; j < g; ++j) t += R(i, j) * (k(j) - c(j));
    t /= R(i, i);
    double rem = T2 - used;
    if (rem < 0) return;
    double half = std::sqrt(rem) / R(i, i);
    long lo = static_cast<long>(std::ceil(c(i) - t - half));
    long hi = static_cast<long>(std::floor(c(i) - t + half));
    for (long v = lo; v <= hi; ++v) {
      k(i) = static_cast<int>(v);
      double s = R(i, i) * (v - c(i) + t);
      double u = used + s * s;
      if (u > T2) continue;
      if (i == 0)
        visit(k, u);
      else
        rec(i - 1, u);
    }
  };
  rec(g - 1, 0.0);
}

}  // namespace

TruncationBound truncation_radius(const RiemannMatrix& B, double tol, int derivOrder) {
  check_tol(tol);
  if (derivOrder < 0) throw std::invalid_argument("negative derivative order");
  TruncationBound tb;
  tb.tolerance = tol;
  tb.derivativeOrder = derivOrder;
  tb.shortestVector = B.shortest_vector_bound();
  tb.coveringRadius = B.covering_bound();
  double target = tol * std::exp(-0.5 * tb.coveringRadius * tb.coveringRadius);
  double T = 0.0;
  double val = tail_bound(T, B.genus(), derivOrder, tb.shortestVector, B.min_eigen_sqrt());
  while (val > target) {
    T += 0.05;
    val = tail_bound(T, B.genus(), derivOrder, tb.shortestVector, B.min_eigen_sqrt());
    if (T > 200) throw NumericalError("truncation radius search did not converge");
  }
  tb.radius = T;
  tb.tailEstimate = val;
  return tb;
}

std::size_t count_lattice_points(const RiemannMatrix& B, const RVec& center, double radius) {
  std::size_t n = 0;
  enumerate(B.chol_upper(), center, radius * radius, [&](const IVec&, double) { ++n; });
  return n;
}

ThetaJet::ThetaJet(const RiemannMatrix& B, const HalfCharacteristic& ch, const CVec& z,
                   const DerivativeSpec& dirs, double tol) {
  const int g = B.genus();
  if (z.size() != g || ch.genus() != g) throw std::invalid_argument("dimension mismatch in theta");
  if (!z.allFinite()) throw std::invalid_argument("non-finite theta argument");
  for (const auto& v : dirs)
    if (v.size() != g) throw std::invalid_argument("derivative direction has wrong dimension");
  if (dirs.size() > 12) throw std::invalid_argument("too many derivative directions");
  K_ = static_cast<int>(dirs.size());
  bound_ = truncation_radius(B, tol, K_);

  const CMat& Bm = B.matrix();
  CVec zp = z + (2.0 * kPi * kI) * ch.dpp.cast<cplx>();
  RVec c = B.y_inverse() * zp.real();
  RVec n0(g);
  for (int i = 0; i < g; ++i) n0(i) = std::round(c(i) - ch.dp(i)) + ch.dp(i);
  RVec cp = c - n0;

  CVec n0c = n0.cast<cplx>();
  cplx E0 = 0.5 * n0c.dot(Bm * n0c) + n0c.dot(zp);  // dot conjugates lhs; n0 is real
  logScale_ = E0.real();
  phase_ = std::polar(1.0, std::remainder(E0.imag(), 2.0 * kPi));
  CVec w = Bm * n0c + zp;
  for (int i = 0; i < g; ++i) w(i) = cplx(w(i).real(), std::remainder(w(i).imag(), 2.0 * kPi));

  struct Pt {
    IVec k;
    double d2;
  };
  std::vector<Pt> pts;
  double T = bound_.radius;
  enumerate(B.chol_upper(), cp, T * T, [&](const IVec& k, double d2) { pts.push_back({k, d2}); });
  // Largest terms first, ties broken lexicographically for determinism.
  std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    for (int i = 0; i < a.k.size(); ++i)
      if (a.k(i) != b.k(i)) return a.k(i) < b.k(i);
    return false;
  });
  nterms_ = pts.size();

  std::vector<cplx> dn0(K_);
  for (int j = 0; j < K_; ++j) dn0[j] = n0c.dot(dirs[j]);
  const unsigned nm = 1u << K_;
  m_.assign(nm, cplx(0.0, 0.0));
  std::vector<cplx> prod(nm);
  std::vector<cplx> p(K_);
  termScale_ = 0.0;
  for (const auto& pt : pts) {
    CVec kc = pt.k.cast<double>().cast<cplx>();
    cplx e = 0.5 * kc.dot(Bm * kc) + kc.dot(w);
    cplx t = std::exp(e);
    termScale_ = std::max(termScale_, std::abs(t));
    for (int j = 0; j < K_; ++j) p[j] = dn0[j] + kc.dot(dirs[j]);
    prod[0] = t;
    for (unsigned mask = 1; mask < nm; ++mask) {
      unsigned low = mask & (~mask + 1u);
      int j = __builtin_ctz(low);
      prod[mask] = prod[mask ^ low] * p[j];
    }
    for (unsigned mask = 0; mask < nm; ++mask) m_[mask] += prod[mask];
  }
  build_cumulants();
}

void ThetaJet::build_cumulants() {
  const unsigned nm = 1u << K_;
  kappa_.assign(nm, cplx(0.0, 0.0));
  if (m_[0] == cplx(0.0, 0.0)) return;
  std::vector<cplx> mu(nm);
  for (unsigned s = 0; s < nm; ++s) mu[s] = m_[s] / m_[0];
  for (unsigned S = 1; S < nm; ++S) {
    unsigned low = S & (~S + 1u);
    unsigned rest = S ^ low;
    cplx acc = mu[S];
    // proper subsets T of S that contain the lowest element
    for (unsigned sub = rest;; sub = (sub - 1) & rest) {
      unsigned T = sub | low;
      if (T != S) acc -= kappa_[T] * mu[S ^ T];
      if (sub == 0) break;
    }
    kappa_[S] = acc;
  }
}

ScaledComplex ThetaJet::moment(unsigned mask) const {
  return ScaledComplex(m_.at(mask) * phase_, logScale_);
}

cplx ThetaJet::ratio(unsigned mask) const {
  if (m_[0] == cplx(0.0, 0.0)) throw NumericalError("theta vanishes; ratio undefined");
  return m_.at(mask) / m_[0];
}

cplx ThetaJet::log_derivative(unsigned mask) const {
  if (m_[0] == cplx(0.0, 0.0)) throw NumericalError("theta vanishes; log-derivative undefined");
  return kappa_.at(mask);
}

ScaledComplex theta(const HalfCharacteristic& ch, const CVec& z, const RiemannMatrix& B, double tol) {
  return ThetaJet(B, ch, z, {}, tol).value();
}

ScaledComplex theta_deriv(const DerivativeSpec& dirs, const HalfCharacteristic& ch, const CVec& z,
                          const RiemannMatrix& B, double tol) {
  ThetaJet j(B, ch, z, dirs, tol);
  return j.moment((1u << dirs.size()) - 1u);
}

double quasi_periodicity_residual(const CVec& z, const IVec& N, const IVec& M, const RiemannMatrix& B,
                                  double tol) {
  const int g = B.genus();
  CVec Mc = M.cast<double>().cast<cplx>();
  CVec Nc = N.cast<double>().cast<cplx>();
  CVec BM = B.matrix() * Mc;
  CVec shifted = z + (2.0 * kPi * kI) * Nc + BM;
  auto ch = HalfCharacteristic::zero(g);
  ScaledComplex lhs = theta(ch, shifted, B, tol);
  cplx ex = -0.5 * Mc.dot(BM) - Mc.dot(z);
  ScaledComplex rhs = theta(ch, z, B, tol) * ScaledComplex::from_exp(ex);
  return std::abs(ratio(lhs, rhs) - 1.0);
}

double normalized_abs(const ScaledComplex& th, const CVec& w, const RiemannMatrix& B) {
  if (th.is_zero()) return 0.0;
  RVec x = w.real();
  return std::exp(th.log_abs() - 0.5 * x.dot(B.y_inverse() * x));
}

std::vector<ScaledComplex> theta_batch_serial(const HalfCharacteristic& ch, const std::vector<CVec>& zs,
                                              const RiemannMatrix& B, double tol) {
  std::vector<ScaledComplex> out(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) out[i] = theta(ch, zs[i], B, tol);
  return out;
}

std::vector<ScaledComplex> theta_batch(const HalfCharacteristic& ch, const std::vector<CVec>& zs,
                                       const RiemannMatrix& B, double tol) {
  std::vector<ScaledComplex> out(zs.size());
  std::exception_ptr err;
  const long n = static_cast<long>(zs.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = theta(ch, zs[i], B, tol);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

}  // namespace thetafay
