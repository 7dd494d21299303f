#include <cmath>
#include <limits>

#include "thetafay/theta.hpp"

namespace thetafay {

namespace {
constexpr double kLn2 = 0.69314718055994530942;
}

ScaledComplex::ScaledComplex(cplx m, double ls) : mantissa(m), logScale(ls) {
  double a = std::abs(m);
  if (a == 0.0 || !std::isfinite(a)) {
    if (a == 0.0) logScale = 0.0;
    return;
  }
  int e = 0;
  std::frexp(a, &e);
  mantissa = cplx(std::ldexp(m.real(), -e), std::ldexp(m.imag(), -e));
  logScale += e * kLn2;
}

ScaledComplex ScaledComplex::from_exp(cplx exponent) {
  double ph = std::remainder(exponent.imag(), 2.0 * kPi);
  return ScaledComplex(std::polar(1.0, ph), exponent.real());
}

double ScaledComplex::log_abs() const {
  if (is_zero()) return -std::numeric_limits<double>::infinity();
  return std::log(std::abs(mantissa)) + logScale;
}

cplx ScaledComplex::value() const { return mantissa * std::exp(logScale); }

cplx ScaledComplex::log() const {
  return cplx(log_abs(), std::arg(mantissa));
}

ScaledComplex ScaledComplex::operator*(const ScaledComplex& o) const {
  return ScaledComplex(mantissa * o.mantissa, logScale + o.logScale);
}

ScaledComplex ScaledComplex::operator/(const ScaledComplex& o) const {
  return ScaledComplex(mantissa / o.mantissa, logScale - o.logScale);
}

ScaledComplex ScaledComplex::operator+(const ScaledComplex& o) const {
  if (is_zero()) return o;
  if (o.is_zero()) return *this;
  if (logScale >= o.logScale)
    return ScaledComplex(mantissa + o.mantissa * std::exp(o.logScale - logScale), logScale);
  return ScaledComplex(o.mantissa + mantissa * std::exp(logScale - o.logScale), o.logScale);
}

ScaledComplex ScaledComplex::operator-(const ScaledComplex& o) const { return *this + (-o); }

ScaledComplex ScaledComplex::scaled(cplx c) const { return ScaledComplex(mantissa * c, logScale); }

cplx ratio(const ScaledComplex& a, const ScaledComplex& b) {
  return (a.mantissa / b.mantissa) * std::exp(a.logScale - b.logScale);
}

}  // namespace thetafay
