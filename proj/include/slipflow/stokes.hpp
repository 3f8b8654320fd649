#pragma once

#include "slipflow/fe.hpp"
#include "slipflow/mesh.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace slipflow {

using TagSet = std::set<BoundaryTag>;

inline TagSet all_tags() {
  return {BoundaryTag::GraphTop, BoundaryTag::Flat, BoundaryTag::Curved, BoundaryTag::Side};
}

/// Boundary traction psi(x, nu) evaluated with the discrete edge normal.
using TractionFn = std::function<Vec2(const Vec2& x, const Vec2& normal)>;

/// -div sigma(u, p) = f, div u = g in Omega; on slip edges u.nu = phi and
/// beta T u + T sigma nu = psi, sigma = eta eps(u) - p I, T = I - nu nu^T.
/// Empty callbacks are zero.
struct StokesProblem {
  std::shared_ptr<const TriMesh> mesh;
  double eta = 1;
  ScalarFn beta;
  VectorFn f;
  ScalarFn g;
  TractionFn psi;
  ScalarFn phi;
  TagSet slip_tags = all_tags();
  std::optional<BoundaryGraph> graph;  // exact normals on graph-top edges
  bool deflate = true;                  // append kernel rows when beta == 0
};

/// P2 velocity space with the slip constraint eliminated: full nodal
/// vector u (2 entries per node, interleaved) equals E w for reduced w.
class SlipSpace {
 public:
  SlipSpace(std::shared_ptr<const TriMesh> mesh, int degree, const TagSet& slip_tags,
            const std::optional<BoundaryGraph>& graph = std::nullopt);

  const TriMesh& mesh() const { return *mesh_; }
  const LagrangeSpace& space() const { return V_; }
  const SpMat& E() const { return E_; }
  int full_dofs() const { return 2 * V_.num_nodes(); }
  int reduced_dofs() const { return static_cast<int>(E_.cols()); }
  const TagSet& slip_tags() const { return tags_; }
  bool is_slip_edge(const BoundaryEdge& e) const { return tags_.count(e.tag) > 0; }

  /// Slip nodes with their constraint normals (two at corners).
  struct SlipNode {
    int node;
    std::vector<Vec2> normals;
  };
  const std::vector<SlipNode>& slip_nodes() const { return slip_; }
  /// Unit normal used at a slip node (average at corners), zero elsewhere.
  Vec2 node_normal(int node) const { return normal_[node]; }
  bool is_corner(int node) const { return corner_[node]; }

 private:
  std::shared_ptr<const TriMesh> mesh_;
  LagrangeSpace V_;
  TagSet tags_;
  SpMat E_;
  std::vector<SlipNode> slip_;
  std::vector<Vec2> normal_;
  std::vector<char> corner_;
};

/// Rigid motions z = a (y - y0, -(x - x0)) + b tangent to the slip boundary.
struct RigidMotionBasis {
  Vec2 origin = Vec2::Zero();
  std::vector<Eigen::Vector3d> coeffs;  // (a, b1, b2)
  std::vector<Eigen::VectorXd> nodal;   // full nodal vectors, mass-orthonormal
  std::vector<double> singular_values;  // of the constraint matrix
  int dim() const { return static_cast<int>(nodal.size()); }
};

RigidMotionBasis kernel_basis(const SlipSpace& V);

/// Full-space blocks. Velocity dofs are interleaved (2 per P2 node).
struct StokesBlocks {
  SpMat A;   // eta int eps(u):eps(v)
  SpMat Fr;  // int_slip beta Tu.Tv
  SpMat B;   // -int q div v, pressure x velocity
  SpMat Mu;  // velocity mass
  SpMat Mp;  // pressure mass
  Eigen::VectorXd F;  // int f.v + int_slip psi.v
  Eigen::VectorXd G;  // -int g q
  Eigen::VectorXd mean;  // int q_i
};

StokesBlocks assemble_blocks(const StokesProblem& p, const SlipSpace& V, const LagrangeSpace& Q);

struct Lifting {
  Eigen::VectorXd L;        // full nodal velocity, phi nu at slip nodes
  double boundary_integral = 0;  // int_slip phi - int g
  bool zero = true;
};

/// Discrete harmonic extension of phi nu from the slip nodes.
Lifting lift_boundary_data(const StokesProblem& p, const SlipSpace& V);

struct SaddleSystem {
  SpMat K;
  Eigen::VectorXd rhs;
  int nu = 0, np = 0, nk = 0;  // reduced velocity, pressure, kernel rows; +1 mean row
  Eigen::VectorXd lift;
  double g_defect = 0, kernel_defect = 0;
  int kernel_dim = 0;
  bool deflated = false;
  bool friction = false;
};

/// Builds the reduced KKT system; throws IncompatibleData / SingularSystem.
SaddleSystem assemble(const StokesProblem& p, const SlipSpace& V, const LagrangeSpace& Q,
                      const StokesBlocks& blocks);

struct SolveReport {
  std::shared_ptr<const SlipSpace> velocity_space;
  std::shared_ptr<const LagrangeSpace> pressure_space;
  Eigen::VectorXd u, p;  // full nodal velocity, P1 pressure
  double residual = 0;
  int kernel_dim = 0;
  bool deflated = false;
  double g_defect = 0, kernel_defect = 0;
  double energy = 0;           // ||eps(u_h)||^2
  double friction_energy = 0;  // int beta |T u_h|^2
  double mean_multiplier = 0;
  double slip_residual = 0;    // max |(u_h - lift).nu| at slip nodes
  double wall_seconds = 0;
};

SolveReport solve(const StokesProblem& p);

struct InfSupReport {
  double beta_h = 0;
  bool stable = false;
  int velocity_dofs = 0, pressure_dofs = 0;
};

InfSupReport estimate_infsup(std::shared_ptr<const TriMesh> mesh, const TagSet& slip_tags,
                             int velocity_degree = 2);

struct KornOptions {
  TagSet slip_tags;            // empty: no slip constraint
  bool skew_moment = false;    // int (d1 v2 - d2 v1) = 0
  bool quotient = true;        // orthogonal to rigid motions meeting the constraints
};

struct KornReport {
  double lambda = 0;    // min eps-energy / H1 Rayleigh quotient
  double constant = 0;  // lambda^{-1/2}, inf if lambda <= 0
  int dofs = 0;
  int iterations = 0;
};

KornReport estimate_korn(std::shared_ptr<const TriMesh> mesh, const KornOptions& opt);

/// Manufactured solution on a registered domain.
struct ManufacturedCase {
  std::string id;
  DomainSpec domain;
  double eta = 1, beta = 0;
  VectorField u;
  ScalarField p;
  VectorFn f;
  TractionFn psi;
};

std::vector<std::string> manufactured_case_ids();
ManufacturedCase manufactured_case(const std::string& id);

StokesProblem make_problem(const ManufacturedCase& c, std::shared_ptr<const TriMesh> mesh);

struct Errors {
  double u_h1 = 0, p_l2 = 0;
};

Errors discretization_errors(const SolveReport& r, const VectorField& u, const ScalarField& p);

struct RateRow {
  int level = 0;
  double h = 0, err_u = 0, err_p = 0;
  double rate_u = 0, rate_p = 0;  // against the previous level (0 on the first)
};

struct RateTable {
  std::string case_id;
  std::vector<RateRow> rows;
  double fit_u = 0, fit_p = 0;  // least-squares slopes of log err against log h
};

RateTable convergence_study(const std::string& case_id, int levels = 4, double h0 = 1.0 / 8);

/// Velocity and pressure interpolation helpers on the report's spaces.
Vec2 eval_velocity(const SolveReport& r, int triangle, const Vec2& x, Mat2* grad = nullptr);
double eval_pressure(const SolveReport& r, int triangle, const Vec2& x);

}  // namespace slipflow
