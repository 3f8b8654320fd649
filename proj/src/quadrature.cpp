#include "slipflow/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace slipflow {

namespace {

LineRule compute_gauss_legendre(int n) {
  LineRule r;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1);
    r.points[i] = 0.5 * (1 - x);
    r.weights[i] = 1.0 / ((1 - x * x) * dp * dp);  // 2/((1-x^2)p'^2) scaled by 1/2
  }
  return r;
}

}  // namespace

LineRule gauss_legendre(int npoints) {
  if (npoints < 1) throw InvalidInput("gauss_legendre: need at least one point");
  static std::mutex mtx;
  static std::map<int, LineRule> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(npoints);
  if (it != cache.end()) return it->second;
  return cache.emplace(npoints, compute_gauss_legendre(npoints)).first->second;
}

QuadratureRule triangle_rule(int degree) {
  if (degree < 0) throw InvalidInput("triangle_rule: negative degree");
  // x = u (1 - v), y = v with Jacobian (1 - v); the v-integrand gains one
  // degree, so m points per direction are exact up to total degree 2m - 2.
  int m = std::max(1, (degree + 3) / 2);
  LineRule g = gauss_legendre(m);
  QuadratureRule q;
  q.degree = 2 * m - 2;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      double u = g.points[a], v = g.points[b];
      q.points.emplace_back(u * (1 - v), v);
      q.weights.push_back(2 * g.weights[a] * g.weights[b] * (1 - v));
    }
  }
  return q;
}

QuadratureRule swap_symmetric(const QuadratureRule& r) {
  QuadratureRule out;
  out.degree = r.degree;
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    out.points.push_back(r.points[i]);
    out.weights.push_back(0.5 * r.weights[i]);
    out.points.emplace_back(r.points[i].y(), r.points[i].x());
    out.weights.push_back(0.5 * r.weights[i]);
  }
  return out;
}

}  // namespace slipflow
