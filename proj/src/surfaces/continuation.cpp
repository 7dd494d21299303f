#include "continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "thetafay/quadrature.hpp"

namespace thetafay::detail {

cplx nearest(const std::vector<cplx>& cands, cplx y) {
  cplx best = cands.front();
  double bd = std::abs(best - y);
  for (const auto& c : cands) {
    double d = std::abs(c - y);
    if (d < bd) {
      bd = d;
      best = c;
    }
  }
  return best;
}

namespace {

// Accept step if the chosen root is well separated from its rivals.
bool pick(const std::vector<cplx>& cands, cplx prev, cplx& out) {
  std::size_t bi = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cands.size(); ++i) {
    double d = std::abs(cands[i] - prev);
    if (d < bd) {
      bd = d;
      bi = i;
    }
  }
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cands.size(); ++i)
    if (i != bi) sep = std::min(sep, std::abs(cands[i] - cands[bi]));
  out = cands[bi];
  return bd <= 0.3 * sep;
}

// Adaptive continuation: a step is accepted when the nearest root at the new
// point is well separated from the others; steps grow after success and
// shrink on rejection, so approaches to a branch point stay cheap.
template <class RootsAt>
cplx track_impl(RootsAt roots, cplx x0, cplx y0, cplx x1) {
  if (x0 == x1) return y0;
  double t = 0.0, h = 1.0;
  cplx y = y0;
  for (long it = 0; it < 10000000L; ++it) {
    h = std::min(h, 1.0 - t);
    cplx nxt;
    if (pick(roots(x0 + (x1 - x0) * (t + h)), y, nxt)) {
      y = nxt;
      t += h;
      if (t >= 1.0) return y;
      h *= 2.0;
    } else {
      h *= 0.5;
      if (h < 1e-15) break;
    }
  }
  throw NumericalError("root continuation failed to separate sheets");
}

using Acc = CVec;

struct Leg {
  CVec value;
  cplx yEnd;
};

Leg regular_leg(const CurveView& cv, cplx p, cplx q, cplx yp, const Integrand& f, int dim,
                const std::vector<cplx>& sing, int order) {
  Leg out{CVec::Zero(dim), yp};
  if (p == q) return out;
  std::vector<std::pair<double, double>> pieces;
  auto dist = [&](double t0, double t1) {
    cplx a = p + (q - p) * t0, b = p + (q - p) * t1;
    double d = std::numeric_limits<double>::infinity();
    for (const auto& s : sing) d = std::min(d, distance_to_segment(s, a, b));
    return d;
  };
  std::function<void(double, double, int)> split = [&](double t0, double t1, int depth) {
    double L = std::abs(q - p) * (t1 - t0);
    double d = dist(t0, t1);
    if (depth < 60 && L > 0.5 * (d + 0.5 * L) && L > 1e-300) {
      double tm = 0.5 * (t0 + t1);
      split(t0, tm, depth + 1);
      split(tm, t1, depth + 1);
    } else {
      pieces.emplace_back(t0, t1);
    }
  };
  split(0.0, 1.0, 0);
  const GaussRule& gr = gauss_legendre(order);
  cplx y = yp;
  cplx x = p;
  for (const auto& [t0, t1] : pieces) {
    double h = 0.5 * (t1 - t0);
    for (int i = 0; i < order; ++i) {
      double t = t0 + h * (gr.x[i] + 1.0);
      cplx xn = p + (q - p) * t;
      y = track(cv, x, y, xn);
      x = xn;
      out.value += (gr.w[i] * h) * (q - p) * f(xn, y);
    }
  }
  out.yEnd = track(cv, x, y, q);
  return out;
}

// Integral from regular p to branch node bi.
Leg branch_leg_in(const CurveView& cv, cplx p, int bi, cplx yp, const Integrand& f, int dim,
                  const std::vector<cplx>& sing, int order) {
  const cplx e = cv.branch[bi];
  const int qr = cv.ramification[bi];
  const cplx D = p - e;
  auto lam_off = [&](double s) { return D * std::pow(s, qr); };
  std::vector<cplx> others;
  for (std::size_t i = 0; i < cv.branch.size(); ++i)
    if (int(i) != bi) others.push_back(cv.branch[i]);
  for (const auto& s : sing)
    if (std::abs(s - e) > 1e-14 * (1.0 + std::abs(e))) others.push_back(s);
  std::vector<std::pair<double, double>> pieces;
  std::function<void(double, double, int)> split = [&](double s0, double s1, int depth) {
    cplx a = e + lam_off(s0), b = e + lam_off(s1);
    double L = std::abs(b - a);
    double d = std::numeric_limits<double>::infinity();
    for (const auto& o : others) d = std::min(d, distance_to_segment(o, a, b));
    if (depth < 40 && L > 0.5 * (d + 0.5 * L)) {
      double sm = 0.5 * (s0 + s1);
      split(s0, sm, depth + 1);
      split(sm, s1, depth + 1);
    } else {
      pieces.emplace_back(s0, s1);
    }
  };
  split(0.0, 1.0, 0);
  std::reverse(pieces.begin(), pieces.end());  // march from s = 1 downwards
  const GaussRule& gr = gauss_legendre(order);
  Leg out{CVec::Zero(dim), yp};
  cplx y = yp;
  cplx dcur = D;
  for (const auto& [s0, s1] : pieces) {
    double h = 0.5 * (s1 - s0);
    for (int i = order - 1; i >= 0; --i) {
      double s = s0 + h * (gr.x[i] + 1.0);
      cplx dn = lam_off(s);
      y = track_near(cv, bi, dcur, y, dn);
      dcur = dn;
      cplx jac = double(qr) * D * std::pow(s, qr - 1);
      out.value -= (gr.w[i] * h) * jac * f(e + dn, y);
    }
  }
  out.yEnd = cplx(0.0, 0.0);
  return out;
}

}  // namespace

cplx track(const CurveView& cv, cplx lambda0, cplx y0, cplx lambda1) {
  if (lambda0 == lambda1) {
    cplx out;
    pick(cv.roots(lambda1), y0, out);
    return out;
  }
  return track_impl(cv.roots, lambda0, y0, lambda1);
}

cplx track_near(const CurveView& cv, int bi, cplx delta0, cplx y0, cplx delta1) {
  auto roots = [&](cplx d) { return cv.rootsNear(bi, d); };
  if (delta0 == delta1) {
    cplx out;
    pick(roots(delta1), y0, out);
    return out;
  }
  return track_impl(roots, delta0, y0, delta1);
}

PathResult integrate_path(const CurveView& cv, const std::vector<PathNode>& nodes, cplx yStart,
                          const cplx* yEnd, const Integrand& f, int dim,
                          const std::vector<cplx>& extraSingular, int order) {
  if (nodes.size() < 2) throw std::invalid_argument("path needs at least two nodes");
  std::vector<cplx> sing = cv.branch;
  sing.insert(sing.end(), extraSingular.begin(), extraSingular.end());
  std::vector<int> bidx;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].branch >= 0) bidx.push_back(int(i));
  const int L = int(nodes.size()) - 1;
  PathResult res{CVec::Zero(dim), yStart};

  auto forward = [&](int from, int to, cplx y) {
    for (int k = from; k < to; ++k) {
      Leg lg = regular_leg(cv, nodes[k].lambda, nodes[k + 1].lambda, y, f, dim, sing, order);
      res.value += lg.value;
      y = lg.yEnd;
    }
    return y;
  };

  if (bidx.empty()) {
    cplx y = forward(0, L, yStart);
    if (yEnd && std::abs(y - *yEnd) > 1e-6 * std::max(1.0, std::abs(*yEnd)))
      throw SheetMismatch("path reaches the endpoint on a different sheet");
    res.yEnd = y;
    return res;
  }

  const int first = bidx.front(), last = bidx.back();
  if (first > 0) {
    cplx y = forward(0, first - 1, yStart);
    Leg in = branch_leg_in(cv, nodes[first - 1].lambda, nodes[first].branch, y, f, dim, sing, order);
    res.value += in.value;
  }
  for (std::size_t u = 0; u + 1 < bidx.size(); ++u) {
    int b0 = bidx[u], b1 = bidx[u + 1];
    if (b1 == b0 + 1) {
      cplx e0 = cv.branch[nodes[b0].branch], e1 = cv.branch[nodes[b1].branch];
      cplx m = 0.5 * (e0 + e1);
      cplx ym = cv.roots(m).front();
      res.value -= branch_leg_in(cv, m, nodes[b0].branch, ym, f, dim, sing, order).value;
      res.value += branch_leg_in(cv, m, nodes[b1].branch, ym, f, dim, sing, order).value;
    } else {
      cplx ym = cv.roots(nodes[b0 + 1].lambda).front();
      res.value -= branch_leg_in(cv, nodes[b0 + 1].lambda, nodes[b0].branch, ym, f, dim, sing, order).value;
      cplx y = forward(b0 + 1, b1 - 1, ym);
      res.value += branch_leg_in(cv, nodes[b1 - 1].lambda, nodes[b1].branch, y, f, dim, sing, order).value;
    }
  }
  if (last < L) {
    if (!yEnd) throw std::invalid_argument("path leaving a branch point needs the endpoint sheet");
    cplx y = *yEnd;
    CVec back = CVec::Zero(dim);
    for (int k = L; k > last + 1; --k) {
      Leg lg = regular_leg(cv, nodes[k].lambda, nodes[k - 1].lambda, y, f, dim, sing, order);
      back += lg.value;
      y = lg.yEnd;
    }
    back += branch_leg_in(cv, nodes[last + 1].lambda, nodes[last].branch, y, f, dim, sing, order).value;
    res.value -= back;
    res.yEnd = *yEnd;
  } else {
    res.yEnd = cplx(0.0, 0.0);
  }
  return res;
}

std::vector<cplx> circle_points(cplx c, double radius, double phase, int n, bool ccw) {
  std::vector<cplx> pts;
  pts.reserve(n + 1);
  double sgn = ccw ? 1.0 : -1.0;
  for (int k = 0; k <= n; ++k) pts.push_back(c + std::polar(radius, phase + sgn * 2.0 * kPi * k / n));
  return pts;
}

void cauchy_coefficients(const std::vector<CVec>& samples, double rho, CVec& c0, CVec& c1, CVec& c2) {
  const int N = int(samples.size());
  const int d = int(samples.front().size());
  c0 = CVec::Zero(d);
  c1 = CVec::Zero(d);
  c2 = CVec::Zero(d);
  for (int j = 0; j < N; ++j) {
    double th = 2.0 * kPi * j / N;
    c0 += samples[j];
    c1 += samples[j] * std::polar(1.0, -th);
    c2 += samples[j] * std::polar(1.0, -2.0 * th);
  }
  c0 /= double(N);
  c1 /= (double(N) * rho);
  c2 /= (double(N) * rho * rho);
}

bool segments_cross(cplx p0, cplx p1, cplx q0, cplx q1) {
  auto cross = [](cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); };
  double d1 = cross(p1 - p0, q0 - p0), d2 = cross(p1 - p0, q1 - p0);
  double d3 = cross(q1 - q0, p0 - q0), d4 = cross(q1 - q0, p1 - q0);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

double distance_to_segment(cplx p, cplx a, cplx b) {
  cplx ab = b - a;
  double L2 = std::norm(ab);
  if (L2 == 0.0) return std::abs(p - a);
  double t = ((p - a) * std::conj(ab)).real() / L2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

}  // namespace thetafay::detail
