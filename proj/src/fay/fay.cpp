#include "thetafay/fay.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace thetafay {

namespace {

constexpr double kDivisorRatio = 1e-12;

double tol_of(const SurfaceModel& s) { return std::min(s.theta_tol(), 1e-12); }

ThetaJet jet0(const SurfaceModel& s, const CVec& z, const DerivativeSpec& dirs) {
  return ThetaJet(s.riemann(), HalfCharacteristic::zero(s.genus()), z, dirs, tol_of(s));
}

ThetaJet jet_odd(const SurfaceModel& s, const CVec& z, const DerivativeSpec& dirs) {
  return ThetaJet(s.riemann(), s.odd_char(), z, dirs, tol_of(s));
}

void require_off_divisor(const ThetaJet& j, const char* what) {
  if (j.vanishing_ratio() < kDivisorRatio) {
    std::ostringstream os;
    os << what << " lies on the theta divisor (|Theta| / max term = " << j.vanishing_ratio() << ")";
    throw NumericalError(os.str());
  }
}

double max_abs(std::initializer_list<cplx> xs) {
  double m = 0;
  for (auto x : xs) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double uniform01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

CVec sample_cell(const RiemannMatrix& B, std::mt19937_64& rng) {
  const int g = B.genus();
  CVec u(g), v(g);
  for (int i = 0; i < g; ++i) u(i) = uniform01(rng);
  for (int i = 0; i < g; ++i) v(i) = uniform01(rng);
  return (2.0 * kPi * kI) * u + B.matrix() * v;
}

cplx odd_gradient_pairing(const SurfaceModel& s, const CVec& v) {
  return jet_odd(s, CVec::Zero(s.genus()), {v}).moment(1).value();
}

cplx spinor_h(const SurfaceModel& s, const PointJet& jet) {
  const cplx h2 = odd_gradient_pairing(s, jet.V);
  double scale = 0;
  for (int k = 0; k < s.genus(); ++k)
    scale = std::max(scale, std::abs(odd_gradient_pairing(s, CVec::Unit(s.genus(), k))));
  if (std::abs(h2) <= 1e-12 * scale * jet.V.norm())
    throw NumericalError("h_delta vanishes at this point; the characteristic is singular there");
  return std::sqrt(h2);
}

ScaledComplex prime_form(const SurfaceModel& s, const CVec& w, cplx hx, cplx hy) {
  return theta(s.odd_char(), w, s.riemann(), tol_of(s)).scaled(1.0 / (hx * hy));
}

ScaledComplex prime_form(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b, const PathSpec& path) {
  if (same_point(a, b)) return ScaledComplex();
  AbelPath ab = abel_between(s, a, b, path);
  // E(a, b) uses int_b^a = -r
  return prime_form(s, CVec(-ab.r), spinor_h(s, point_jet(s, a)), spinor_h(s, point_jet(s, b)));
}

FayScalars fay_scalars(const SurfaceModel& s, const PointJet& ja, const PointJet& jb, const CVec& r) {
  FayScalars f;
  f.ja = ja;
  f.jb = jb;
  const CVec z0 = CVec::Zero(s.genus());

  // odd characteristic: directions (V_a, V_b, W_a)
  ThetaJet tr = jet_odd(s, r, {ja.V, jb.V, ja.W});
  require_off_divisor(tr, "int_a^b (odd characteristic)");
  ThetaJet t0 = jet_odd(s, z0, {ja.V, jb.V, ja.W});
  const cplx DaT0 = t0.moment(1).value(), DbT0 = t0.moment(2).value(), DpaT0 = t0.moment(4).value();
  const ScaledComplex thr = tr.value();

  f.q1 = tr.log_derivative(3);
  f.q2 = ratio(ScaledComplex(DaT0 * DbT0, 0.0), thr * thr);
  f.K1 = 0.5 * DpaT0 / DaT0 + tr.log_derivative(1);

  // zero characteristic: directions (W_a, V_a, V_a)
  ThetaJet zr = jet0(s, r, {ja.W, ja.V, ja.V});
  require_off_divisor(zr, "int_a^b");
  ThetaJet z00 = jet0(s, z0, {ja.W, ja.V, ja.V});
  const cplx Da = zr.log_derivative(2);
  f.K2 = -zr.log_derivative(1) - zr.log_derivative(6) - z00.log_derivative(6) - (Da - f.K1) * (Da - f.K1);
  return f;
}

FayScalars fay_scalars(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b, const PathSpec& path) {
  AbelPath ab = abel_between(s, a, b, path);
  FayScalars f = fay_scalars(s, point_jet(s, a), point_jet(s, b), ab.r);
  f.a = a;
  f.b = b;
  f.contour = ab;
  return f;
}

double degenerate_identity_residual(const SurfaceModel& s, const FayScalars& f, const CVec& z) {
  const CVec& r = f.contour.r;
  ThetaJet tz = jet0(s, z, {f.ja.V, f.jb.V});
  require_off_divisor(tz, "z");
  const cplx lhs = tz.log_derivative(3);
  const auto& B = s.riemann();
  const double tol = tol_of(s);
  const HalfCharacteristic zc = HalfCharacteristic::zero(s.genus());
  ScaledComplex num = theta(zc, CVec(z + r), B, tol) * theta(zc, CVec(z - r), B, tol);
  ScaledComplex den = tz.value() * tz.value();
  const cplx quot = f.q2 * ratio(num, den);
  const double scale = max_abs({lhs, f.q1, quot});
  return std::abs(lhs - f.q1 - quot) / scale;
}

namespace {

struct FiveTerms {
  cplx t[5];
};

// Terms of the a-point identity at z for r = int_a^b:
// D'_a ln(Th(z+r)/Th(z)),  D_a^2 ln(Th(z+r)/Th(z)),  (D_a ln(Th(z+r)/Th(z)) - K1)^2,
// 2 D_a^2 ln Th(z),  K2.
FiveTerms five_terms(const SurfaceModel& s, const PointJet& ja, const CVec& r, cplx K1, cplx K2, const CVec& z) {
  ThetaJet jz = jet0(s, z, {ja.W, ja.V, ja.V});
  require_off_divisor(jz, "z");
  ThetaJet jzr = jet0(s, CVec(z + r), {ja.W, ja.V, ja.V});
  require_off_divisor(jzr, "z + int_a^b");
  FiveTerms o;
  o.t[0] = jzr.log_derivative(1) - jz.log_derivative(1);
  o.t[1] = jzr.log_derivative(6) - jz.log_derivative(6);
  const cplx d = jzr.log_derivative(2) - jz.log_derivative(2) - K1;
  o.t[2] = d * d;
  o.t[3] = 2.0 * jz.log_derivative(6);
  o.t[4] = K2;
  return o;
}

}  // namespace

double new_identity_residual(const SurfaceModel& s, const FayScalars& f, const CVec& z) {
  FiveTerms ft = five_terms(s, f.ja, f.contour.r, f.K1, f.K2, z);
  cplx sum = 0;
  double scale = 0;
  for (auto t : ft.t) {
    sum += t;
    scale = std::max(scale, std::abs(t));
  }
  return std::abs(sum) / scale;
}

cplx constancy_function(const SurfaceModel& s, const FayScalars& fba, const CVec& z) {
  // fba holds the scalars of the pair (b, a): ja is the jet at b and
  // contour.r = int_b^a.  f_{(b,a)} involves Theta_{ab} = Theta(z + int_a^b).
  const PointJet& jb = fba.ja;
  const CVec rab = -fba.contour.r;
  ThetaJet jz = jet0(s, z, {jb.W, jb.V, jb.V});
  require_off_divisor(jz, "z");
  ThetaJet jzr = jet0(s, CVec(z + rab), {jb.W, jb.V, jb.V});
  require_off_divisor(jzr, "z + int_a^b");
  const cplx t1 = -(jzr.log_derivative(1) - jz.log_derivative(1));
  const cplx t2 = jzr.log_derivative(6) - jz.log_derivative(6);
  const cplx d = jzr.log_derivative(2) - jz.log_derivative(2) + fba.K1;
  return t1 + t2 + d * d + 2.0 * jz.log_derivative(6);
}

ConstancyScan constancy_scan(const SurfaceModel& s, const FayScalars& fba, int samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("constancy scan needs at least two samples");
  std::mt19937_64 rng(seed);
  ConstancyScan out;
  cplx sum = 0;
  while (int(out.values.size()) < samples) {
    CVec z = sample_cell(s.riemann(), rng);
    try {
      out.values.push_back(constancy_function(s, fba, z));
      sum += out.values.back();
    } catch (const NumericalError&) {
      // z too close to the divisor; draw again
    }
  }
  out.mean = sum / double(samples);
  double var = 0;
  for (auto v : out.values) var += std::norm(v - out.mean);
  out.relStd = std::sqrt(var / double(samples - 1)) / std::abs(out.mean);
  out.k2Deviation = std::abs(fba.K2 + out.mean) / std::abs(fba.K2);
  return out;
}

TrisecantData trisecant_data(const SurfaceModel& s, const std::array<MarkedPoint, 4>& pts) {
  TrisecantData d;
  d.pts = pts;
  // common lift: mu relative to the first point
  d.mu[0] = CVec::Zero(s.genus());
  for (int i = 1; i < 4; ++i)
    d.mu[i] = same_point(pts[0], pts[i]) ? CVec(CVec::Zero(s.genus())) : abel_between(s, pts[0], pts[i]).r;
  for (int i = 0; i < 4; ++i) d.h[i] = spinor_h(s, point_jet(s, pts[i]));
  return d;
}

double trisecant_residual(const SurfaceModel& s, const TrisecantData& d, const CVec& z) {
  const auto& B = s.riemann();
  const double tol = tol_of(s);
  const HalfCharacteristic zc = HalfCharacteristic::zero(s.genus());
  enum { A = 0, Bp = 1, C = 2, D = 3 };
  auto E = [&](int x, int y) { return prime_form(s, CVec(d.mu[x] - d.mu[y]), d.h[x], d.h[y]); };
  auto Th = [&](const CVec& w) { return theta(zc, w, B, tol); };
  const CVec& mu_a = d.mu[A];
  const CVec& mu_b = d.mu[Bp];
  const CVec& mu_c = d.mu[C];
  const CVec& mu_d = d.mu[D];
  ScaledComplex t1 = E(A, Bp) * E(C, D) * Th(z + mu_a - mu_c) * Th(z + mu_d - mu_b);
  ScaledComplex t2 = E(A, C) * E(D, Bp) * Th(z + mu_a - mu_b) * Th(z + mu_d - mu_c);
  ScaledComplex t3 = E(A, D) * E(C, Bp) * Th(z) * Th(z + mu_a - mu_c + mu_d - mu_b);
  double la = std::max({t1.log_abs(), t2.log_abs(), t3.log_abs()});
  if (!std::isfinite(la) || la < std::log(1e-300)) {
    // E(a,a) = 0 collapses: all terms vanish identically
    if (t1.is_zero() && t2.is_zero() && t3.is_zero()) return 0.0;
    throw NumericalError("all trisecant terms are negligible at this z");
  }
  ScaledComplex res = t1 + t2 - t3;
  if (res.is_zero()) return 0.0;
  return std::exp(res.log_abs() - la);
}

double trisecant_residual(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b, const MarkedPoint& c,
                          const MarkedPoint& d, const CVec& z) {
  return trisecant_residual(s, trisecant_data(s, {a, b, c, d}), z);
}

namespace {

// value of the (possibly scaled) parameter when the base parameter equals kb
cplx scaled_param(const MarkedPoint& p, cplx kbase) {
  if (!p.scaled()) return kbase;
  cplx k = kbase / p.beta;
  for (int it = 0; it < 60; ++it) {
    cplx next = (kbase - p.mu * k * k) / p.beta;
    if (std::abs(next - k) <= 1e-16 * std::abs(k)) {
      k = next;
      break;
    }
    k = next;
  }
  return k;
}

}  // namespace

Q2Oracle q2_integral_oracle(const SurfaceModel& s, const MarkedPoint& a, const MarkedPoint& b, int shrinkSteps,
                            const PathSpec& path) {
  if (shrinkSteps < 2) throw std::invalid_argument("q2 oracle needs at least two shrink steps");
  const CurveProvider& pr = s.provider();
  if (!pr.supports_third_kind())
    throw std::invalid_argument("q2 integral oracle is not available for " + pr.kind() + " surfaces");
  // same route as the Abel increment used by fay_scalars
  PathSpec route = path;
  if (route.empty()) {
    AbelPath ab = abel_between(s, a, b);
    if (ab.crossesCycles)
      throw NumericalError("contour " + ab.contour +
                           " meets the homology cycles; supply a path inside the fundamental polygon");
    route = ab.path;
  }
  Q2Oracle out;
  double eps = 1e-2;
  for (int i = 0; i < shrinkSteps; ++i, eps /= 4.0) {
    cplx ka, kb;
    cplx I = pr.third_kind(a, b, route, eps, ka, kb);
    out.raw.push_back(-std::exp(I) / (scaled_param(a, ka) * scaled_param(b, kb)));
  }
  // Neville table in h = eps with ratio 4
  std::vector<std::vector<cplx>> T(shrinkSteps);
  for (int i = 0; i < shrinkSteps; ++i) {
    T[i].push_back(out.raw[i]);
    double f = 1.0;
    for (int j = 1; j <= i; ++j) {
      f *= 4.0;
      T[i].push_back((f * T[i][j - 1] - T[i - 1][j - 1]) / (f - 1.0));
    }
  }
  out.value = T.back().back();
  const int n = shrinkSteps;
  out.spread = std::abs(T[n - 1][n - 1] - T[n - 1][n - 2]) / std::abs(out.value);
  if (n >= 3) {
    const double d1 = std::abs(out.raw[n - 1] - out.raw[n - 2]);
    const double d0 = std::abs(out.raw[n - 2] - out.raw[n - 3]);
    out.contraction = d0 > 0 ? d1 / d0 : 0.0;
    if (d1 > 1e-12 * std::abs(out.value) && out.contraction > 0.75) {
      std::ostringstream os;
      os << "q2 extrapolation is not converging (contraction " << out.contraction << ")";
      throw NumericalError(os.str());
    }
  }
  return out;
}

}  // namespace thetafay
