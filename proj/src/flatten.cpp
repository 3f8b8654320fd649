#include "slipflow/flatten.hpp"

#include "slipflow/fe.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace slipflow {

RealFn compact_support_graph(const BoundaryGraph& g, const CutoffFunction& rho) {
  return [g, rho](double y) {
    double w = g.eval(y);
    return rho.eval(Vec2(y, w)) * w;
  };
}

ExtensionField::ExtensionField(BubbleDomain carrier, std::shared_ptr<const TriMesh> mesh,
                               Eigen::VectorXd values)
    : carrier_(carrier),
      mesh_(std::move(mesh)),
      locator_(std::make_shared<PointLocator>(mesh_)),
      values_(std::move(values)) {
  if (values_.size() != mesh_->num_vertices())
    throw InvalidInput("ExtensionField: one value per mesh vertex expected");
}

ExtensionField ExtensionField::times(const CutoffFunction& rho) const {
  ExtensionField out = *this;
  out.cutoff_ = rho;
  return out;
}

int ExtensionField::element(const Vec2& x) const { return locator_->locate(x, nullptr, 1e-12); }

double ExtensionField::base(const Vec2& x, Vec2* g) const {
  std::array<double, 3> bary;
  int t = locator_->locate(x, &bary, 1e-12);
  if (g) g->setZero();
  if (t < 0) {
    // E vanishes on the curved boundary, so zero is its continuous
    // extension below and beside the bubble. Above the top it is undefined.
    if (x.y() > carrier_.center.y() + 1e-12)
      throw DomainError("extension evaluated above the bubble top");
    return 0;
  }
  const auto& tri = mesh_->triangles[t];
  double v = 0;
  for (int k = 0; k < 3; ++k) v += bary[k] * values_[tri[k]];
  if (g) {
    const Vec2 &a = mesh_->vertices[tri[0]], &b = mesh_->vertices[tri[1]], &c = mesh_->vertices[tri[2]];
    double det = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    // gradients of the barycentric coordinates
    Vec2 g1((c - a).y() / det, -(c - a).x() / det);
    Vec2 g2(-(b - a).y() / det, (b - a).x() / det);
    *g = (values_[tri[1]] - values_[tri[0]]) * g1 + (values_[tri[2]] - values_[tri[0]]) * g2;
  }
  return v;
}

double ExtensionField::eval(const Vec2& x) const {
  if (!cutoff_) return base(x, nullptr);
  double r = cutoff_->eval(x);
  if (r == 0) return 0;
  return r * base(x, nullptr);
}

Vec2 ExtensionField::grad(const Vec2& x) const {
  Vec2 g;
  if (!cutoff_) {
    base(x, &g);
    return g;
  }
  double r = cutoff_->eval(x);
  Vec2 gr = cutoff_->grad(x);
  if (r == 0 && gr.squaredNorm() == 0) return Vec2::Zero();
  double e = base(x, &g);
  return e * gr + r * g;
}

Mat2 ExtensionField::hessian(const Vec2& x) const {
  if (!cutoff_) {
    base(x, nullptr);
    return Mat2::Zero();
  }
  double r = cutoff_->eval(x);
  Vec2 gr = cutoff_->grad(x);
  if (r == 0 && gr.squaredNorm() == 0) return Mat2::Zero();
  Vec2 g;
  double e = base(x, &g);
  return e * cutoff_->hessian(x) + gr * g.transpose() + g * gr.transpose();
}

double ExtensionField::max_abs_nodal() const {
  double m = 0;
  for (int i = 0; i < values_.size(); ++i) {
    double v = values_[i];
    if (cutoff_) v *= cutoff_->eval(mesh_->vertices[i]);
    m = std::max(m, std::abs(v));
  }
  return m;
}

ExtensionField harmonic_extension(const RealFn& C, const BubbleDomain& theta, double h) {
  if (!(h > 0)) throw InvalidInput("harmonic_extension: h must be positive");
  return harmonic_extension_on(C, theta,
                               std::make_shared<TriMesh>(mesh_domain(domains::Bubble{theta}, h)));
}

ExtensionField harmonic_extension_on(const RealFn& C, const BubbleDomain& theta,
                                     std::shared_ptr<const TriMesh> mesh) {
  const TriMesh& m = *mesh;
  const int nv = m.num_vertices();
  const double xf = theta.top_half_width(), cx = theta.center.x();

  // Dirichlet data: C on the flat top, zero on the arc. The two must agree
  // where they meet.
  double scale = 0;
  for (const Vec2& p : m.vertices)
    if (std::abs(p.y() - theta.center.y()) < 1e-12) {
      double c = C(p.x());
      if (!std::isfinite(c)) throw InvalidInput("harmonic_extension: non-finite boundary data");
      scale = std::max(scale, std::abs(c));
    }
  double jump = std::max(std::abs(C(cx - xf)), std::abs(C(cx + xf)));
  if (jump > 1e-10 * std::max(1.0, scale))
    throw InvalidInput("harmonic_extension: boundary data discontinuous at the top corners");

  std::vector<int> fixed(nv, 0);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(nv);
  for (const auto& e : m.boundary)
    for (int v : {e.a, e.b}) {
      fixed[v] = 1;
      if (e.tag == BoundaryTag::Flat) u[v] = C(m.vertices[v].x());
    }
  for (const auto& e : m.boundary)
    if (e.tag == BoundaryTag::Curved) u[e.a] = u[e.b] = 0;

  LagrangeSpace V(m, 1);
  SpMat K = assemble_stiffness(V);
  std::vector<int> free_id(nv, -1);
  int nf = 0;
  for (int v = 0; v < nv; ++v)
    if (!fixed[v]) free_id[v] = nf++;
  if (nf == 0) throw MeshError("harmonic_extension: mesh has no interior vertices");

  Triplets tr;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
  for (int k = 0; k < K.outerSize(); ++k)
    for (SpMat::InnerIterator it(K, k); it; ++it) {
      int i = free_id[it.row()];
      if (i < 0) continue;
      int j = free_id[it.col()];
      if (j >= 0) tr.emplace_back(i, j, it.value());
      else rhs[i] -= it.value() * u[it.col()];
    }
  SpMat Kii(nf, nf);
  Kii.setFromTriplets(tr.begin(), tr.end());
  Eigen::SimplicialLDLT<SpMat> ldlt(Kii);
  if (ldlt.info() != Eigen::Success) throw MeshError("harmonic_extension: singular stiffness matrix");
  Eigen::VectorXd ui = ldlt.solve(rhs);
  double rn = rhs.norm();
  double res = rn > 0 ? (Kii * ui - rhs).norm() / rn : (Kii * ui).norm();
  if (res > 1e-12) {
    ui += ldlt.solve(rhs - Kii * ui);
    res = rn > 0 ? (Kii * ui - rhs).norm() / rn : (Kii * ui).norm();
  }
  if (!(res <= 1e-12)) throw SolverError("harmonic_extension: residual above 1e-12");
  for (int v = 0; v < nv; ++v)
    if (free_id[v] >= 0) u[v] = ui[free_id[v]];

  ExtensionField out(theta, std::move(mesh), std::move(u));
  out.set_residual(res);
  return out;
}

ExtensionField full_extension(const ExtensionField& E, const CutoffFunction& rho) { return E.times(rho); }

Diffeomorphism::Diffeomorphism(ExtensionField tilde, Vec2 center, double delta)
    : tilde_(std::move(tilde)), center_(center), delta_(delta) {
  bound_ = tilde_.max_abs_nodal();
}

Vec2 Diffeomorphism::apply(const Vec2& xr) const {
  if (!in_reference(xr)) throw DomainError("Psi applied outside the reference half-space");
  return Vec2(xr.x(), xr.y() + tilde_.eval(xr));
}

Mat2 Diffeomorphism::gradient(const Vec2& xr) const {
  if (!in_reference(xr)) throw DomainError("grad Psi outside the reference half-space");
  Vec2 g = tilde_.grad(xr);
  Mat2 m;
  m << 1, 0, g.x(), 1 + g.y();
  return m;
}

double Diffeomorphism::jacobian(const Vec2& xr) const {
  if (!in_reference(xr)) throw DomainError("det grad Psi outside the reference half-space");
  return 1 + tilde_.grad(xr).y();
}

std::array<Mat2, 2> Diffeomorphism::gradient_derivative(const Vec2& xr) const {
  if (!in_reference(xr)) throw DomainError("second derivatives of Psi outside the reference half-space");
  Mat2 H = tilde_.hessian(xr);
  std::array<Mat2, 2> d;
  for (int k = 0; k < 2; ++k) d[k] << 0, 0, H(0, k), H(1, k);
  return d;
}

Vec2 Diffeomorphism::inverse(const Vec2& x, int* iterations) const {
  // Solve f(t) = t + E~(x', t) - x^n = 0 for t <= top; f is increasing.
  const double top = center_.y();
  auto f = [&](double t) { return t + tilde_.eval(Vec2(x.x(), t)) - x.y(); };
  double ftop = f(top);
  if (ftop < -1e-12 * (1 + std::abs(x.y())))
    throw DomainError("point lies above the image of the reference half-space");
  if (ftop <= 0) {
    if (iterations) *iterations = 0;
    return Vec2(x.x(), top);
  }
  double lo = x.y() - bound_ - 1, hi = top;
  double t = std::min(top, x.y() - tilde_.eval(Vec2(x.x(), std::min(x.y(), top))));
  int it = 0;
  for (; it < 50; ++it) {
    double ft = t + tilde_.eval(Vec2(x.x(), t)) - x.y();
    if (ft == 0) break;
    if (ft < 0) lo = t;
    else hi = t;
    double d = 1 + tilde_.grad(Vec2(x.x(), t)).y();
    double tn = t - ft / d;
    if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
    if (std::abs(tn - t) <= 1e-15 * (1 + std::abs(t))) {
      t = tn;
      break;
    }
    t = tn;
  }
  if (it == 50 && std::abs(f(t)) > 1e-12 * (1 + std::abs(x.y())))
    throw SolverError("Psi inverse: Newton did not converge in 50 iterations");
  if (iterations) *iterations = it + 1;
  return Vec2(x.x(), t);
}

namespace {

template <class Fn>
double grid_sup(const Diffeomorphism& d, double h, Fn fn) {
  if (h <= 0) h = d.delta() / 100;
  const Vec2 c = d.center();
  const int n = std::max(2, static_cast<int>(std::ceil(d.delta() / h)));
  double sup = 0;
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= 0; ++j) {
      Vec2 x = c + Vec2(i * d.delta() / n, j * d.delta() / n);
      sup = std::max(sup, fn(x));
    }
  return sup;
}

}  // namespace

double jacobian_gap(const Diffeomorphism& d, double h) {
  return grid_sup(d, h, [&](const Vec2& x) { return std::abs(1 - d.jacobian(x)); });
}

double w1inf_seminorm(const Diffeomorphism& d, double h) {
  return grid_sup(d, h, [&](const Vec2& x) { return d.tilde().grad(x).norm(); });
}

Diffeomorphism build_diffeomorphism(const ExtensionField& tilde) {
  if (!tilde.cutoff()) throw InvalidInput("build_diffeomorphism: extension carries no cutoff");
  Diffeomorphism d(tilde, tilde.cutoff()->center, tilde.cutoff()->delta);
  double gap = jacobian_gap(d);
  if (!(gap < 0.5))
    throw InvalidInput("build_diffeomorphism: Jacobian gap " + std::to_string(gap) +
                       " >= 1/2, choose a smaller delta");
  return d;
}

Flattening flatten_graph(const BoundaryGraph& g0, double h_ratio, bool search) {
  if (!(h_ratio > 0)) throw InvalidInput("flatten_graph: h_ratio must be positive");
  BoundaryGraph g = g0.normalized ? g0 : normalize_graph(g0);
  for (int halvings = 0;; ++halvings) {
    Flattening out;
    out.graph = g;
    const Vec2 c(g.center, 0);
    out.rho = make_cutoff(c, g.delta);
    out.bubble = make_bubble(c, g.delta);
    out.compact = compact_support_graph(g, out.rho);
    ExtensionField E = harmonic_extension(out.compact, out.bubble, g.delta * h_ratio);
    ExtensionField Et = full_extension(E, out.rho);
    Diffeomorphism d(Et, c, g.delta);
    out.gap = jacobian_gap(d);
    out.halvings = halvings;
    bool ok = search ? out.gap < 0.4 : out.gap < 0.5;
    if (ok) {
      out.extension = std::make_shared<ExtensionField>(Et);
      out.psi = std::make_shared<Diffeomorphism>(std::move(d));
      return out;
    }
    if (!search || halvings >= 20)
      throw InvalidInput("flatten_graph: Jacobian gap " + std::to_string(out.gap) +
                         " too large, choose a smaller delta");
    // Re-center the original graph on a smaller disc and normalize again.
    BoundaryGraph smaller = g0;
    smaller.delta = g.delta / 2;
    smaller.normalized = false;
    g = normalize_graph(smaller);
  }
}

}  // namespace slipflow
