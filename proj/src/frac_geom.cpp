#include "slipflow/frac_geom.hpp"

#include "slipflow/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace slipflow {

namespace {

constexpr double kPi = std::numbers::pi;

double integrate_interval(const RealFn& f, double a, double b, int panels, int npts) {
  LineRule g = gauss_legendre(npts);
  double hp = (b - a) / panels, sum = 0;
  for (int k = 0; k < panels; ++k) {
    double lo = a + k * hp;
    for (int i = 0; i < npts; ++i) sum += g.weights[i] * f(lo + hp * g.points[i]);
  }
  return sum * hp;
}

// Smallest observed Hoelder exponent of f on [a, b] from successive grid halvings.
// Returns +inf for (numerically) constant f.
double holder_estimate(const RealFn& f, double a, double b) {
  std::vector<double> maxdiff;
  double scale = 0;
  for (int j = 0; j < 7; ++j) {
    int n = 1000 << j;
    double step = (b - a) / n, prev = f(a), md = 0;
    scale = std::max(scale, std::abs(prev));
    for (int i = 1; i <= n; ++i) {
      double cur = f(a + i * step);
      if (!std::isfinite(cur)) throw InvalidInput("gagliardo_seminorm: non-finite sample");
      md = std::max(md, std::abs(cur - prev));
      scale = std::max(scale, std::abs(cur));
      prev = cur;
    }
    maxdiff.push_back(md);
  }
  if (maxdiff.back() <= 1e-14 * (1 + scale)) return INFINITY;
  double alpha = INFINITY;
  for (std::size_t j = maxdiff.size() - 3; j + 1 < maxdiff.size(); ++j)
    alpha = std::min(alpha, std::log2(maxdiff[j] / maxdiff[j + 1]));
  return alpha;
}

}  // namespace

BoundaryGraph make_graph(RealFn eval, RealFn grad_eval, double center, double delta,
                         double s, int n) {
  if (!eval || !grad_eval) throw InvalidInput("make_graph: evaluators required");
  if (!(delta > 0)) throw InvalidInput("make_graph: delta must be positive");
  if (!(s > n)) throw InvalidInput("make_graph: need s > n");
  if (n != 2) throw InvalidInput("make_graph: only n = 2 is implemented");
  BoundaryGraph g;
  g.n = n;
  g.center = center;
  g.delta = delta;
  g.eval = std::move(eval);
  g.grad_eval = std::move(grad_eval);
  g.s = s;
  return g;
}

double graph_mean(const BoundaryGraph& g) {
  double a = g.center - g.delta, b = g.center + g.delta;
  double integral = integrate_interval(g.eval, a, b, 16, 16);
  if (!std::isfinite(integral)) throw InvalidInput("graph mean: non-finite quadrature");
  return integral / (b - a);
}

BoundaryGraph normalize_graph(const BoundaryGraph& g) {
  if (!g.eval || !g.grad_eval) throw InvalidInput("normalize_graph: evaluators required");
  const double c = g.center;
  const double w0 = g.eval(c);
  const double slope = g.grad_eval(c);
  if (!std::isfinite(w0) || !std::isfinite(slope))
    throw InvalidInput("normalize_graph: graph not differentiable at center");

  const double phi = std::atan(slope);
  RealFn rot_eval, rot_grad;
  if (phi == 0.0) {
    rot_eval = [f = g.eval, w0](double y) { return f(y) - w0; };
    rot_grad = g.grad_eval;
  } else {
    const double cs = std::cos(phi), sn = std::sin(phi);
    auto f = g.eval, df = g.grad_eval;
    // Parameter t of the original curve whose rotated abscissa is y.
    auto param = [=](double y) {
      double t = c + (y - c) * cs;
      for (int it = 0; it < 100; ++it) {
        double r = cs * (t - c) + sn * (f(t) - w0) - (y - c);
        double dr = cs + sn * df(t);
        if (!(dr > 0)) throw InvalidInput("normalize_graph: rotated curve is not a graph");
        double dt = r / dr;
        t -= dt;
        if (std::abs(dt) <= 1e-16 * (1 + std::abs(t))) break;
      }
      return t;
    };
    rot_eval = [=](double y) {
      double t = param(y);
      return -sn * (t - c) + cs * (f(t) - w0);
    };
    rot_grad = [=](double y) {
      double t = param(y), d = df(t);
      return (-sn + cs * d) / (cs + sn * d);
    };
  }

  BoundaryGraph tmp = g;
  tmp.eval = rot_eval;
  const double m = graph_mean(tmp);

  BoundaryGraph out = g;
  out.eval = [rot_eval, m](double y) { return rot_eval(y) - m; };
  out.grad_eval = rot_grad;
  out.normalized = true;
  // local l  ->  previous local p = R(phi)(l - (c, -m)) + (c, w0)
  const Mat2 ra = rotation(g.frame.angle), rp = rotation(phi);
  out.frame.angle = g.frame.angle + phi;
  out.frame.offset = ra * (Vec2(c, w0) - rp * Vec2(c, -m)) + g.frame.offset;
  return out;
}

double gagliardo_seminorm(const RealFn& f, const Disc1& disc, double theta, double p, int n,
                          int level) {
  if (n != 2) throw InvalidInput("gagliardo_seminorm: only n = 2 (interval discs) is implemented");
  if (!(theta > 0 && theta < 1)) throw InvalidInput("gagliardo_seminorm: theta must lie in (0, 1)");
  if (!(p > 1)) throw InvalidInput("gagliardo_seminorm: p must exceed 1");
  if (!(disc.radius > 0)) throw InvalidInput("gagliardo_seminorm: empty disc");
  if (level < 1) throw InvalidInput("gagliardo_seminorm: level must be >= 1");

  const double a = disc.center - disc.radius, b = disc.center + disc.radius, len = b - a;
  if (holder_estimate(f, a, b) < theta - 0.1)
    throw InsufficientSmoothness(
        "gagliardo_seminorm: integrand growth exceeds kernel cancellation "
        "(Hoelder exponent of f below theta)");

  const double kexp = (n - 1) + theta * p;
  const int npts = 6 + 2 * level;
  const int ypanels = 2 * level;
  const int geo_levels = 6 + 2 * level;
  LineRule g = gauss_legendre(npts);

  // In (y, d = x - y) coordinates the kernel singularity sits at d = 0.
  auto inner = [&](double d) {
    return integrate_interval(
        [&](double y) { return std::pow(std::abs(f(y + d) - f(y)), p); }, a, b - d, ypanels,
        npts);
  };
  auto panel = [&](double d0, double d1) {
    double sum = 0;
    for (int i = 0; i < npts; ++i) {
      double d = d0 + (d1 - d0) * g.points[i];
      sum += g.weights[i] * inner(d) / std::pow(d, kexp);
    }
    return sum * (d1 - d0);
  };

  double total = 0;
  double hi = len;
  for (int k = 0; k < geo_levels; ++k) {
    total += panel(0.5 * hi, hi);
    hi *= 0.5;
  }
  // [0, hi]: d = hi tau^m flattens the d^{p(1-theta)-1} behaviour.
  const double alpha = p * (1 - theta) - 1;
  const int m = std::max(1, static_cast<int>(std::ceil(2.0 / (alpha + 1))));
  double near = 0;
  for (int i = 0; i < npts; ++i) {
    double tau = g.points[i];
    double d = hi * std::pow(tau, m);
    double jac = hi * m * std::pow(tau, m - 1);
    near += g.weights[i] * inner(d) / std::pow(d, kexp) * jac;
  }
  total += near;
  total *= 2;  // the domain of integration is symmetric in (x, y)
  if (!std::isfinite(total)) throw InsufficientSmoothness("gagliardo_seminorm: non-finite integral");
  return std::pow(total, 1.0 / p);
}

GraphEstimates verify_graph_estimates(const BoundaryGraph& g, int level) {
  if (!g.normalized) throw InvalidInput("verify_graph_estimates: graph must be normalized");
  GraphEstimates r;
  const int samples = 4001;
  for (int i = 0; i < samples; ++i) {
    double y = g.center - g.delta + 2 * g.delta * i / (samples - 1);
    r.sup_norm = std::max(r.sup_norm, std::abs(g.eval(y)));
    r.grad_sup = std::max(r.grad_sup, std::abs(g.grad_eval(y)));
  }
  const double s = g.s, n = g.n, theta = 1 - 1 / s;
  Disc1 disc{g.center, g.delta};
  r.seminorm_top = gagliardo_seminorm(g.grad_eval, disc, theta, s, g.n, level);
  r.seminorm_low = gagliardo_seminorm(g.eval, disc, theta, s, g.n, level);
  auto ratio = [](double num, double den) -> std::optional<double> {
    if (!(den > 0)) return std::nullopt;
    return num / den;
  };
  r.inf_ratio = ratio(r.sup_norm, std::pow(g.delta, 2 - n / s) * r.seminorm_top);
  r.grad_ratio = ratio(r.grad_sup, std::pow(g.delta, 1 - n / s) * r.seminorm_top);
  r.low_ratio = ratio(r.seminorm_low, std::pow(g.delta, n / s) * r.grad_sup);
  return r;
}

double CutoffFunction::step(double t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  return 1 / (1 + std::exp(1 / t - 1 / (1 - t)));
}

double CutoffFunction::step_d1(double t) {
  if (t <= 0 || t >= 1) return 0;
  double s = step(t);
  double g = 1 / (t * t) + 1 / ((1 - t) * (1 - t));
  return s * (1 - s) * g;
}

double CutoffFunction::step_d2(double t) {
  if (t <= 0 || t >= 1) return 0;
  double s = step(t);
  double g = 1 / (t * t) + 1 / ((1 - t) * (1 - t));
  double dg = -2 / (t * t * t) + 2 / ((1 - t) * (1 - t) * (1 - t));
  double s1 = s * (1 - s) * g;
  return s1 * (1 - 2 * s) * g + s * (1 - s) * dg;
}

double CutoffFunction::radial(double r) const { return 1 - step((r - delta / 2) / (delta / 2)); }
double CutoffFunction::radial_d1(double r) const {
  return -step_d1((r - delta / 2) / (delta / 2)) * (2 / delta);
}
double CutoffFunction::radial_d2(double r) const {
  return -step_d2((r - delta / 2) / (delta / 2)) * (4 / (delta * delta));
}

double CutoffFunction::eval(const Vec2& x) const { return radial((x - center).norm()); }

Vec2 CutoffFunction::grad(const Vec2& x) const {
  Vec2 d = x - center;
  double r = d.norm();
  if (r <= delta / 2 || r >= delta) return Vec2::Zero();
  return radial_d1(r) * d / r;
}

Mat2 CutoffFunction::hessian(const Vec2& x) const {
  Vec2 d = x - center;
  double r = d.norm();
  if (r <= delta / 2 || r >= delta) return Mat2::Zero();
  Vec2 e = d / r;
  Mat2 ee = e * e.transpose();
  return radial_d2(r) * ee + radial_d1(r) / r * (Mat2::Identity() - ee);
}

CutoffFunction make_cutoff(const Vec2& center, double delta) {
  if (!(delta > 0)) throw InvalidInput("make_cutoff: delta must be positive");
  return CutoffFunction{center, delta};
}

double BubbleDomain::top_half_width() const {
  double rf = arc_radius() - fillet;
  return std::sqrt(rf * rf - fillet * fillet);
}

double BubbleDomain::boundary_distance(double theta) const {
  const double r = arc_radius(), xf = top_half_width();
  const double tl = kPi + std::atan2(fillet, xf);
  const double tr = 2 * kPi - std::atan2(fillet, xf);
  if (theta >= tl && theta <= tr) return r;
  Vec2 dir(std::cos(theta), std::sin(theta));
  Vec2 fc = theta < tl ? Vec2(-xf, -fillet) : Vec2(xf, -fillet);
  double bb = dir.dot(fc), cc = fc.squaredNorm() - fillet * fillet;
  return bb + std::sqrt(std::max(0.0, bb * bb - cc));
}

bool BubbleDomain::contains(const Vec2& x, double tol) const {
  Vec2 rel = x - center;
  if (rel.y() > tol) return false;
  double theta = std::atan2(std::min(rel.y(), 0.0), rel.x());
  if (theta <= 0) theta += 2 * kPi;
  if (rel.y() >= 0 && rel.x() < 0) theta = kPi;
  return rel.norm() <= boundary_distance(theta) + tol;
}

BubbleDomain make_bubble(const Vec2& center, double delta) {
  if (!(delta > 0)) throw InvalidInput("make_bubble: delta must be positive");
  return BubbleDomain{center, delta, delta / 4, 0.02};
}

}  // namespace slipflow
