#pragma once

#include "slipflow/flatten.hpp"
#include "slipflow/mesh.hpp"

#include <array>
#include <memory>
#include <vector>

namespace slipflow {

/// C^2 diffeomorphism from a reference domain onto a physical one.
class Mapping {
 public:
  virtual ~Mapping() = default;
  virtual Vec2 apply(const Vec2& xr) const = 0;
  virtual Mat2 gradient(const Vec2& xr) const = 0;
  /// d/dxr^k of grad Psi, k = 0, 1.
  virtual std::array<Mat2, 2> gradient_derivative(const Vec2& xr) const = 0;
  virtual Vec2 inverse(const Vec2& x) const = 0;
  virtual bool in_reference(const Vec2&) const { return true; }
};

class IdentityMapping : public Mapping {
 public:
  Vec2 apply(const Vec2& xr) const override { return xr; }
  Mat2 gradient(const Vec2&) const override { return Mat2::Identity(); }
  std::array<Mat2, 2> gradient_derivative(const Vec2&) const override { return {Mat2::Zero(), Mat2::Zero()}; }
  Vec2 inverse(const Vec2& x) const override { return x; }
};

/// x = Q xr + b.
class RigidMapping : public Mapping {
 public:
  explicit RigidMapping(RigidFrame f) : f_(f) {}
  Vec2 apply(const Vec2& xr) const override { return f_.to_physical(xr); }
  Mat2 gradient(const Vec2&) const override { return rotation(f_.angle); }
  std::array<Mat2, 2> gradient_derivative(const Vec2&) const override { return {Mat2::Zero(), Mat2::Zero()}; }
  Vec2 inverse(const Vec2& x) const override { return f_.to_local(x); }

 private:
  RigidFrame f_;
};

class FlatteningMapping : public Mapping {
 public:
  explicit FlatteningMapping(std::shared_ptr<const Diffeomorphism> d) : d_(std::move(d)) {}
  const Diffeomorphism& diffeomorphism() const { return *d_; }
  Vec2 apply(const Vec2& xr) const override { return d_->apply(xr); }
  Mat2 gradient(const Vec2& xr) const override { return d_->gradient(xr); }
  std::array<Mat2, 2> gradient_derivative(const Vec2& xr) const override { return d_->gradient_derivative(xr); }
  Vec2 inverse(const Vec2& x) const override { return d_->inverse(x); }
  bool in_reference(const Vec2& xr) const override { return d_->in_reference(xr); }

 private:
  std::shared_ptr<const Diffeomorphism> d_;
};

/// F o inner o F^{-1} for a rigid frame F: the inner map acting in
/// frame-local coordinates.
class ComposedMapping : public Mapping {
 public:
  ComposedMapping(RigidFrame frame, std::shared_ptr<const Mapping> inner)
      : f_(frame), inner_(std::move(inner)) {}
  Vec2 apply(const Vec2& xr) const override;
  Mat2 gradient(const Vec2& xr) const override;
  std::array<Mat2, 2> gradient_derivative(const Vec2& xr) const override;
  Vec2 inverse(const Vec2& x) const override;
  bool in_reference(const Vec2& xr) const override { return inner_->in_reference(f_.to_local(xr)); }

 private:
  RigidFrame f_;
  std::shared_ptr<const Mapping> inner_;
};

/// Conjugation frakP_P(M) = P M P^{-1}.
Mat2 conjugate(const Mat2& P, const Mat2& M);
/// (dM (.) w)^{ij} = sum_k d_j M^{ik} w^k, with dM[j] = d_j M.
Mat2 odot(const std::array<Mat2, 2>& dM, const Vec2& w);

/// P = grad Psi / J together with the derivative data the transforms need.
class PiolaMap {
 public:
  explicit PiolaMap(std::shared_ptr<const Mapping> psi);
  const Mapping& mapping() const { return *psi_; }
  std::shared_ptr<const Mapping> mapping_ptr() const { return psi_; }

  double J(const Vec2& xr) const;
  Mat2 P(const Vec2& xr) const;
  /// P^{-1} o Psi = adj(grad Psi).
  Mat2 Pinv(const Vec2& xr) const;
  /// d/dxr^k of P^{-1} o Psi.
  std::array<Mat2, 2> dPinv(const Vec2& xr) const;

 private:
  std::shared_ptr<const Mapping> psi_;
};

struct FieldPair {
  VectorField velocity;
  ScalarField pressure;
};

/// v = (P vref) o Psi^{-1}, with its Jacobian from the reference Jacobian.
VectorField push_forward(const PiolaMap& m, const VectorField& vref);
/// vref = (P^{-1} o Psi) (v o Psi).
VectorField pull_back(const PiolaMap& m, const VectorField& v);
ScalarField push_forward(const PiolaMap& m, const ScalarField& qref);
ScalarField pull_back(const PiolaMap& m, const ScalarField& q);

/// (v, q) = (P vref, qref) o Psi^{-1} and its inverse.
FieldPair piola_forward(const PiolaMap& m, const FieldPair& ref);
FieldPair piola_backward(const PiolaMap& m, const FieldPair& phys);

/// Restriction R_zeta: reference pair -> zeta (P v, q) o Psi^{-1} on the
/// physical side. Extension E_zeta: physical pair -> (P^{-1}(zeta v), zeta q) o Psi.
FieldPair restrict_localized(const PiolaMap& m, const ScalarFn& zeta, const FieldPair& ref);
FieldPair extend_localized(const PiolaMap& m, const ScalarFn& zeta, const FieldPair& phys);

struct PiolaResiduals {
  double grad = 0;      // int grad q . v  vs  int grad qref . vref
  double div = 0;       // int q div v     vs  int qref div vref
  double flux = 0;      // boundary flux, summed
  double flux_edge = 0; // worst single boundary edge
  double max() const { return std::max({grad, div, flux, flux_edge}); }
};

/// Relative residuals of the three Piola integral identities for a
/// physical pair (v, q), each divided by the physical integral of the
/// factor magnitudes (e.g. int |q| |grad v| for the divergence identity).
/// Physical integrals use the exact element maps, so only quadrature and
/// roundoff error remain.
PiolaResiduals verify_piola_identities(const PiolaMap& m, const TriMesh& ref_mesh,
                                       const TriMesh& phys_mesh, const VectorField& v,
                                       const ScalarField& q, int level = 6);

struct DecompositionReport {
  double max_error = 0;  // worst pointwise discrepancy
  double step = 0;       // finite-difference step that achieved it
  int points = 0;
};

/// grad vref = J frakP_{P^{-1}}(grad v o Psi) + grad(P^{-1} o Psi) (.) (v o Psi),
/// both sides by central differences of v = push_forward(vref).
DecompositionReport gradient_decomposition(const PiolaMap& m, const VectorField& vref,
                                           const std::vector<Vec2>& ref_points, double step = 1e-5);

struct SymmetricParts {
  Mat2 eps_P, theta_P;
};

/// eps_P = sym(frakP_P(grad vref)), theta_P = sym(frakP_P(X)) with
/// X = grad(P^{-1} o Psi) (.) P vref; eps(v) o Psi = J^{-1}(eps_P - theta_P).
SymmetricParts symmetric_parts(const PiolaMap& m, const VectorField& vref, const Vec2& xr);

/// Worst discrepancy of eps(v) o Psi against J^{-1}(eps_P - theta_P), with
/// eps(v) by central differences.
DecompositionReport symmetric_decomposition(const PiolaMap& m, const VectorField& vref,
                                            const std::vector<Vec2>& ref_points, double step = 1e-5);

/// ||theta_P||_{L^t_bullet(ref mesh)} / ||vref||_{L^t_circ(U)}, U the part of the
/// reference mesh inside B(center, radius).
double theta_bound_ratio(const PiolaMap& m, const VectorField& vref, const TriMesh& ref_mesh,
                         const Vec2& center, double radius, double t_circ = 4, double t_bullet = 2,
                         int level = 5);

/// Points of the reference mesh at element interiors (all barycentric
/// coordinates >= 0.15), at most `count`, spread over the elements.
std::vector<Vec2> interior_sample_points(const TriMesh& m, int count, unsigned seed = 1);

}  // namespace slipflow
