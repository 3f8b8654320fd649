#include "slipflow/piola.hpp"

#include "slipflow/quadrature.hpp"

#include <cmath>
#include <random>

namespace slipflow {

Vec2 ComposedMapping::apply(const Vec2& xr) const { return f_.to_physical(inner_->apply(f_.to_local(xr))); }

Mat2 ComposedMapping::gradient(const Vec2& xr) const {
  Mat2 R = rotation(f_.angle);
  return R * inner_->gradient(f_.to_local(xr)) * R.transpose();
}

std::array<Mat2, 2> ComposedMapping::gradient_derivative(const Vec2& xr) const {
  Mat2 R = rotation(f_.angle);
  auto dG = inner_->gradient_derivative(f_.to_local(xr));
  std::array<Mat2, 2> out;
  for (int k = 0; k < 2; ++k) {
    out[k].setZero();
    for (int l = 0; l < 2; ++l) out[k] += R(k, l) * (R * dG[l] * R.transpose());
  }
  return out;
}

Vec2 ComposedMapping::inverse(const Vec2& x) const { return f_.to_physical(inner_->inverse(f_.to_local(x))); }

Mat2 conjugate(const Mat2& P, const Mat2& M) { return P * M * P.inverse(); }

Mat2 odot(const std::array<Mat2, 2>& dM, const Vec2& w) {
  Mat2 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out(i, j) = dM[j](i, 0) * w[0] + dM[j](i, 1) * w[1];
  return out;
}

PiolaMap::PiolaMap(std::shared_ptr<const Mapping> psi) : psi_(std::move(psi)) {
  if (!psi_) throw InvalidInput("PiolaMap: null mapping");
}

double PiolaMap::J(const Vec2& xr) const { return psi_->gradient(xr).determinant(); }

Mat2 PiolaMap::P(const Vec2& xr) const {
  Mat2 G = psi_->gradient(xr);
  double j = G.determinant();
  if (!(j > 0)) throw DomainError("PiolaMap: non-positive Jacobian");
  return G / j;
}

Mat2 PiolaMap::Pinv(const Vec2& xr) const { return adjugate(psi_->gradient(xr)); }

std::array<Mat2, 2> PiolaMap::dPinv(const Vec2& xr) const {
  auto d = psi_->gradient_derivative(xr);
  return {adjugate(d[0]), adjugate(d[1])};
}

VectorField push_forward(const PiolaMap& m, const VectorField& vref) {
  VectorField out;
  out.value = [m, vref](const Vec2& x) {
    Vec2 xr = m.mapping().inverse(x);
    return Vec2(m.P(xr) * vref.value(xr));
  };
  out.jacobian = [m, vref](const Vec2& x) {
    Vec2 xr = m.mapping().inverse(x);
    Mat2 P = m.P(xr);
    Mat2 X = odot(m.dPinv(xr), P * vref.value(xr));
    return Mat2(conjugate(P, vref.jac(xr) - X) / m.J(xr));
  };
  return out;
}

VectorField pull_back(const PiolaMap& m, const VectorField& v) {
  VectorField out;
  out.value = [m, v](const Vec2& xr) { return Vec2(m.Pinv(xr) * v.value(m.mapping().apply(xr))); };
  out.jacobian = [m, v](const Vec2& xr) {
    Vec2 x = m.mapping().apply(xr);
    Mat2 Pi = m.Pinv(xr);
    return Mat2(m.J(xr) * conjugate(Pi, v.jac(x)) + odot(m.dPinv(xr), v.value(x)));
  };
  return out;
}

ScalarField push_forward(const PiolaMap& m, const ScalarField& qref) {
  ScalarField out;
  out.value = [m, qref](const Vec2& x) { return qref.value(m.mapping().inverse(x)); };
  out.gradient = [m, qref](const Vec2& x) {
    Vec2 xr = m.mapping().inverse(x);
    return Vec2(m.mapping().gradient(xr).transpose().inverse() * qref.grad(xr));
  };
  return out;
}

ScalarField pull_back(const PiolaMap& m, const ScalarField& q) {
  ScalarField out;
  out.value = [m, q](const Vec2& xr) { return q.value(m.mapping().apply(xr)); };
  out.gradient = [m, q](const Vec2& xr) {
    return Vec2(m.mapping().gradient(xr).transpose() * q.grad(m.mapping().apply(xr)));
  };
  return out;
}

FieldPair piola_forward(const PiolaMap& m, const FieldPair& ref) {
  return {push_forward(m, ref.velocity), push_forward(m, ref.pressure)};
}

FieldPair piola_backward(const PiolaMap& m, const FieldPair& phys) {
  return {pull_back(m, phys.velocity), pull_back(m, phys.pressure)};
}

FieldPair restrict_localized(const PiolaMap& m, const ScalarFn& zeta, const FieldPair& ref) {
  FieldPair phys = piola_forward(m, ref);
  FieldPair out;
  // Psi^{-1} is only needed where zeta does not vanish.
  out.velocity.value = [zeta, phys](const Vec2& x) {
    double z = zeta(x);
    return z == 0 ? Vec2(Vec2::Zero()) : Vec2(z * phys.velocity.value(x));
  };
  out.pressure.value = [zeta, phys](const Vec2& x) {
    double z = zeta(x);
    return z == 0 ? 0.0 : z * phys.pressure.value(x);
  };
  return out;
}

FieldPair extend_localized(const PiolaMap& m, const ScalarFn& zeta, const FieldPair& phys) {
  FieldPair out;
  out.velocity.value = [m, zeta, phys](const Vec2& xr) {
    Vec2 x = m.mapping().apply(xr);
    double z = zeta(x);
    return z == 0 ? Vec2(Vec2::Zero()) : Vec2(m.Pinv(xr) * (z * phys.velocity.value(x)));
  };
  out.pressure.value = [m, zeta, phys](const Vec2& xr) {
    Vec2 x = m.mapping().apply(xr);
    double z = zeta(x);
    return z == 0 ? 0.0 : z * phys.pressure.value(x);
  };
  return out;
}

namespace {

// `size` bounds the integrand by the magnitudes of its factors, so an
// integral that vanishes identically is not normalized by roundoff.
struct Accum {
  double lhs = 0, rhs = 0, mag = 0;
  void add(double l, double r, double size, double w) {
    lhs += w * l;
    rhs += w * r;
    mag += w * size;
  }
  double residual() const { return mag > 0 ? std::abs(lhs - rhs) / mag : 0.0; }
};

Vec2 rot(const Vec2& v) { return Vec2(v.y(), -v.x()); }

}  // namespace

PiolaResiduals verify_piola_identities(const PiolaMap& m, const TriMesh& ref_mesh,
                                       const TriMesh& phys_mesh, const VectorField& v,
                                       const ScalarField& q, int level) {
  const Mapping& psi = m.mapping();
  if (phys_mesh.num_vertices() != ref_mesh.num_vertices() ||
      phys_mesh.num_triangles() != ref_mesh.num_triangles())
    throw InvalidInput("verify_piola_identities: meshes do not correspond");
  double scale = 1;
  for (const Vec2& p : phys_mesh.vertices) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  for (int i = 0; i < ref_mesh.num_vertices(); ++i)
    if ((psi.apply(ref_mesh.vertices[i]) - phys_mesh.vertices[i]).norm() > 1e-12 * scale)
      throw InvalidInput("verify_piola_identities: physical mesh is not the image of the reference mesh");

  VectorField vref = pull_back(m, v);
  ScalarField qref = pull_back(m, q);
  QuadratureRule rule = triangle_rule_level(level);
  Accum g, d;
  for (int t = 0; t < ref_mesh.num_triangles(); ++t) {
    const auto& tri = ref_mesh.triangles[t];
    const Vec2 &a = ref_mesh.vertices[tri[0]], &b = ref_mesh.vertices[tri[1]], &c = ref_mesh.vertices[tri[2]];
    double area = std::abs(ref_mesh.triangle_area(t));
    for (std::size_t k = 0; k < rule.points.size(); ++k) {
      const Vec2& r = rule.points[k];
      Vec2 xr = a + r.x() * (b - a) + r.y() * (c - a);
      double w = rule.weights[k] * area;
      Vec2 x = psi.apply(xr);
      double J = m.J(xr);
      Vec2 vx = v.value(x);
      Mat2 Dv = v.jac(x);
      Vec2 vr = vref.value(xr);
      Mat2 Dvr = vref.jac(xr);
      Vec2 gq = q.grad(x);
      double qx = q.value(x);
      g.add(gq.dot(vx) * J, qref.grad(xr).dot(vr), gq.norm() * vx.norm() * std::abs(J), w);
      d.add(qx * Dv.trace() * J, qref.value(xr) * Dvr.trace(), std::abs(qx) * Dv.norm() * std::abs(J), w);
    }
  }

  LineRule line = gauss_legendre(std::max(2, 2 * level));
  Accum total;
  double worst = 0;
  for (const auto& e : ref_mesh.boundary) {
    const Vec2 &a = ref_mesh.vertices[e.a], &b = ref_mesh.vertices[e.b];
    Vec2 tau = b - a;
    Accum edge;
    for (std::size_t k = 0; k < line.points.size(); ++k) {
      Vec2 xr = a + line.points[k] * tau;
      Vec2 x = psi.apply(xr);
      Vec2 nds = rot(psi.gradient(xr) * tau);
      Vec2 vx = v.value(x);
      double qx = q.value(x);
      double lhs = vx.dot(nds) * qx;
      double rhs = vref.value(xr).dot(rot(tau)) * qref.value(xr);
      double size = vx.norm() * nds.norm() * std::abs(qx);
      edge.add(lhs, rhs, size, line.weights[k]);
      total.add(lhs, rhs, size, line.weights[k]);
    }
    worst = std::max(worst, edge.residual());
  }
  return {g.residual(), d.residual(), total.residual(), worst};
}

namespace {

double max_abs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

template <class Err>
DecompositionReport best_step(const std::vector<Vec2>& pts, double step, Err err) {
  // Retry with coarser and finer steps only if the requested one is
  // spoiled by cancellation or truncation.
  DecompositionReport best;
  best.points = static_cast<int>(pts.size());
  best.max_error = INFINITY;
  for (double factor : {1.0, 4.0, 0.25, 16.0}) {
    double h = step * factor, e = 0;
    for (const Vec2& xr : pts) e = std::max(e, err(xr, h));
    if (e < best.max_error) {
      best.max_error = e;
      best.step = h;
    }
    if (best.max_error <= 1e-6) break;
  }
  return best;
}

}  // namespace

DecompositionReport gradient_decomposition(const PiolaMap& m, const VectorField& vref,
                                           const std::vector<Vec2>& ref_points, double step) {
  VectorField v = push_forward(m, vref);
  return best_step(ref_points, step, [&](const Vec2& xr, double h) {
    Vec2 x = m.mapping().apply(xr);
    Mat2 Dv = central_jacobian(v.value, x, h);
    Mat2 rhs = m.J(xr) * conjugate(m.Pinv(xr), Dv) + odot(m.dPinv(xr), v.value(x));
    Mat2 lhs = central_jacobian(vref.value, xr, h);
    return max_abs(lhs - rhs);
  });
}

SymmetricParts symmetric_parts(const PiolaMap& m, const VectorField& vref, const Vec2& xr) {
  Mat2 P = m.P(xr);
  Mat2 X = odot(m.dPinv(xr), P * vref.value(xr));
  return {sym(conjugate(P, vref.jac(xr))), sym(conjugate(P, X))};
}

DecompositionReport symmetric_decomposition(const PiolaMap& m, const VectorField& vref,
                                            const std::vector<Vec2>& ref_points, double step) {
  VectorField v = push_forward(m, vref);
  return best_step(ref_points, step, [&](const Vec2& xr, double h) {
    Vec2 x = m.mapping().apply(xr);
    Mat2 eps = sym(central_jacobian(v.value, x, h));
    VectorField vr = vref;
    if (!vr.jacobian)
      vr.jacobian = [f = vref.value, h](const Vec2& y) { return central_jacobian(f, y, h); };
    SymmetricParts sp = symmetric_parts(m, vr, xr);
    return max_abs(eps - (sp.eps_P - sp.theta_P) / m.J(xr));
  });
}

double theta_bound_ratio(const PiolaMap& m, const VectorField& vref, const TriMesh& ref_mesh,
                         const Vec2& center, double radius, double t_circ, double t_bullet,
                         int level) {
  QuadratureRule rule = triangle_rule_level(level);
  double num = 0, den = 0;
  for (int t = 0; t < ref_mesh.num_triangles(); ++t) {
    const auto& tri = ref_mesh.triangles[t];
    const Vec2 &a = ref_mesh.vertices[tri[0]], &b = ref_mesh.vertices[tri[1]], &c = ref_mesh.vertices[tri[2]];
    double area = std::abs(ref_mesh.triangle_area(t));
    for (std::size_t k = 0; k < rule.points.size(); ++k) {
      const Vec2& r = rule.points[k];
      Vec2 xr = a + r.x() * (b - a) + r.y() * (c - a);
      double w = rule.weights[k] * area;
      Mat2 P = m.P(xr);
      Vec2 val = vref.value(xr);
      Mat2 theta = sym(conjugate(P, odot(m.dPinv(xr), P * val)));
      num += w * std::pow(theta.norm(), t_bullet);
      if ((xr - center).norm() < radius) den += w * std::pow(val.norm(), t_circ);
    }
  }
  if (den == 0) throw InvalidInput("theta_bound_ratio: field vanishes on the support ball");
  return std::pow(num, 1 / t_bullet) / std::pow(den, 1 / t_circ);
}

std::vector<Vec2> interior_sample_points(const TriMesh& m, int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<Vec2> pts;
  const int nt = m.num_triangles();
  if (nt == 0 || count <= 0) return pts;
  for (int i = 0; i < count; ++i) {
    int t = static_cast<int>(static_cast<long long>(i) * nt / count);
    double u1 = U(rng), u2 = U(rng);
    if (u1 > u2) std::swap(u1, u2);
    double l0 = 0.15 + 0.55 * u1, l1 = 0.15 + 0.55 * (u2 - u1), l2 = 1 - l0 - l1;
    const auto& tri = m.triangles[t];
    pts.push_back(l0 * m.vertices[tri[0]] + l1 * m.vertices[tri[1]] + l2 * m.vertices[tri[2]]);
  }
  return pts;
}

}  // namespace slipflow
