#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "providers.hpp"

namespace thetafay::detail {

namespace {

// real coordinates of z in the basis (b1, b2)
Eigen::Vector2d coords(cplx z, cplx b1, cplx b2) {
  Eigen::Matrix2d M;
  M << b1.real(), b2.real(), b1.imag(), b2.imag();
  return M.partialPivLu().solve(Eigen::Vector2d(z.real(), z.imag()));
}

long ext_gcd(long a, long b, long& x, long& y) {
  if (b == 0) {
    x = (a >= 0) ? 1 : -1;
    y = 0;
    return std::abs(a);
  }
  long x1, y1;
  long d = ext_gcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return d;
}

// Hermite form of integer rows in Z^2: returns (h11, h12, h22).
std::array<long, 3> hnf2(std::vector<std::array<long, 2>> rows) {
  auto euclid = [&](int col, std::size_t from) {
    for (;;) {
      std::size_t piv = rows.size();
      for (std::size_t i = from; i < rows.size(); ++i)
        if (rows[i][col] != 0 && (piv == rows.size() || std::abs(rows[i][col]) < std::abs(rows[piv][col])))
          piv = i;
      if (piv == rows.size()) return false;
      std::swap(rows[from], rows[piv]);
      bool done = true;
      for (std::size_t i = from + 1; i < rows.size(); ++i) {
        long q = rows[i][col] / rows[from][col];
        rows[i][0] -= q * rows[from][0];
        rows[i][1] -= q * rows[from][1];
        if (rows[i][col] != 0) done = false;
      }
      if (done) return true;
    }
  };
  if (!euclid(0, 0) || !euclid(1, 1)) throw NumericalError("degenerate lattice in Hermite reduction");
  long h11 = rows[0][0], h12 = rows[0][1], h22 = rows[1][1];
  if (h11 < 0) { h11 = -h11; h12 = -h12; }
  if (h22 < 0) h22 = -h22;
  h12 = ((h12 % h22) + h22) % h22;
  return {h11, h12, h22};
}

void gauss_reduce(cplx& b1, cplx& b2) {
  for (int it = 0; it < 100; ++it) {
    if (std::abs(b2) < std::abs(b1)) std::swap(b1, b2);
    double mu = (b2 * std::conj(b1)).real() / std::norm(b1);
    double m = std::round(mu);
    if (m == 0.0) break;
    b2 -= m * b1;
  }
  if (std::abs(b2) < std::abs(b1)) std::swap(b1, b2);
}

}  // namespace

void lattice_basis(const std::vector<cplx>& periods, cplx& b1, cplx& b2) {
  double big = 0.0;
  for (auto p : periods) big = std::max(big, std::abs(p));
  if (big == 0.0) throw NumericalError("no nonzero periods");
  std::vector<cplx> ps;
  for (auto p : periods)
    if (std::abs(p) > 1e-8 * big) ps.push_back(p);
  std::sort(ps.begin(), ps.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
  b1 = ps.front();
  bool found = false;
  for (auto p : ps)
    if (std::abs((p / b1).imag()) > 1e-6) {
      b2 = p;
      found = true;
      break;
    }
  if (!found) throw NumericalError("periods span a degenerate lattice");
  bool changed = true;
  for (int round = 0; changed && round < 50; ++round) {
    changed = false;
    for (auto p : ps) {
      Eigen::Vector2d c = coords(p, b1, b2);
      if (std::abs(c(0) - std::round(c(0))) < 1e-6 && std::abs(c(1) - std::round(c(1))) < 1e-6) continue;
      int den = 0;
      for (int q = 2; q <= 24; ++q)
        if (std::abs(q * c(0) - std::round(q * c(0))) < 1e-6 && std::abs(q * c(1) - std::round(q * c(1))) < 1e-6) {
          den = q;
          break;
        }
      if (!den) throw NumericalError("periods do not form a lattice");
      // lattice generated by D e1, D e2, (D c0, D c1), divided by D
      auto h = hnf2({{den, 0}, {0, den}, {std::lround(den * c(0)), std::lround(den * c(1))}});
      cplx n1 = (double(h[0]) * b1 + double(h[1]) * b2) / double(den);
      cplx n2 = double(h[2]) * b2 / double(den);
      b1 = n1;
      b2 = n2;
      gauss_reduce(b1, b2);
      changed = true;
      break;
    }
  }
  gauss_reduce(b1, b2);
  for (auto p : ps) {
    Eigen::Vector2d c = coords(p, b1, b2);
    if (std::abs(c(0) - std::round(c(0))) > 1e-6 || std::abs(c(1) - std::round(c(1))) > 1e-6)
      throw NumericalError("lattice reduction failed");
  }
}

Genus1Basis adapt_genus1(cplx g1, cplx g2, bool conjClosed) {
  Genus1Basis out;
  Eigen::Vector2i v(1, 0), w(0, 1);
  if (conjClosed) {
    Eigen::Vector2d c1 = coords(std::conj(g1), g1, g2), c2 = coords(std::conj(g2), g1, g2);
    Eigen::Matrix2d Tr;
    Tr << c1(0), c2(0), c1(1), c2(1);
    Eigen::Matrix2i T = Tr.array().round().cast<int>();
    double defect = (Tr - T.cast<double>()).cwiseAbs().maxCoeff();
    if (defect > 1e-6) {
      std::ostringstream os;
      os << "lattice is not closed under conjugation (defect " << defect << ")";
      out.status = os.str();
      conjClosed = false;
    } else {
      Eigen::Matrix2i M = T - Eigen::Matrix2i::Identity();
      long p, q;
      if (M.row(0).cwiseAbs().sum() != 0) {
        p = M(0, 1);
        q = -M(0, 0);
      } else if (M.row(1).cwiseAbs().sum() != 0) {
        p = M(1, 1);
        q = -M(1, 0);
      } else {
        throw NumericalError("conjugation acts trivially on the period lattice");
      }
      long d = std::gcd(std::abs(p), std::abs(q));
      p /= d;
      q /= d;
      long s, t;
      ext_gcd(p, q, t, s);  // t p + s q = 1  ->  det [[p, -s],[q, t]] = 1
      v = Eigen::Vector2i(int(p), int(q));
      w = Eigen::Vector2i(int(-s), int(t));
      out.real = true;
    }
  }
  auto comb = [&](const Eigen::Vector2i& c) { return double(c(0)) * g1 + double(c(1)) * g2; };
  cplx oa = comb(v), ob = comb(w);
  cplx tau = ob / oa;
  if (tau.imag() < 0) {
    w = -w;
    tau = -tau;
  }
  // Re tau into (-1/2, 1/2]
  double n = std::ceil(tau.real() - 0.5);
  if (tau.real() - n <= -0.5) n -= 1;
  w -= int(n) * v;
  ob = comb(w);
  tau = ob / oa;
  if (out.real) {
    if (std::lround(2.0 * tau.real()) < 0) {
      w += v;
      ob = comb(w);
      tau = ob / oa;
    }
    double h = 2.0 * tau.real();
    out.H = int(std::lround(h));
    out.defect = std::abs(h - out.H);
  }
  out.omegaA = oa;
  out.omegaB = ob;
  out.coeff.row(0) = v.transpose();
  out.coeff.row(1) = w.transpose();
  if (out.status.empty()) out.status = out.real ? "ok" : "no conjugation";
  return out;
}

}  // namespace thetafay::detail
