#pragma once

#include "slipflow/common.hpp"
#include "slipflow/frac_geom.hpp"

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace slipflow {

enum class BoundaryTag : int { GraphTop = 0, Flat = 1, Curved = 2, Side = 3 };

const char* tag_name(BoundaryTag tag);
BoundaryTag parse_tag(const std::string& name);

/// Boundary edge oriented so that the domain lies on its left.
struct BoundaryEdge {
  int a = 0, b = 0;
  BoundaryTag tag = BoundaryTag::Side;
};

/// Exact boundary description used to re-project refined midpoints.
class BoundaryGeometry {
 public:
  virtual ~BoundaryGeometry() = default;
  /// Projection of a point near the boundary piece with `tag`; returns
  /// the point unchanged for straight pieces.
  virtual Vec2 project(BoundaryTag tag, const Vec2& p) const = 0;
  /// Exact outward normal where the geometry knows it.
  virtual std::optional<Vec2> exact_normal(BoundaryTag, const Vec2&) const { return std::nullopt; }
};

struct TriMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary;
  double h = 0;  // max edge length
  std::shared_ptr<const BoundaryGeometry> geometry;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  double triangle_area(int t) const;  // signed
  double area() const;
  double min_angle() const;  // radians
  void update_h();
};

/// Unique edges; local edge k of a triangle is opposite its vertex k.
struct EdgeTopology {
  std::vector<std::array<int, 2>> edges;        // (lo, hi) vertex ids
  std::vector<std::array<int, 3>> tri_edges;    // edge id of local edge k
  std::vector<std::array<int, 2>> edge_tris;    // adjacent triangles, -1 if none
};

EdgeTopology build_edges(const TriMesh& m);

namespace domains {
struct Square {
  Vec2 lo = Vec2(0, 0);
  Vec2 hi = Vec2(1, 1);
};
struct Disc {
  Vec2 center = Vec2::Zero();
  double radius = 1;
};
/// Lower half-disc {|x - c| < R, x^2 < c^2}.
struct HalfDisc {
  Vec2 center = Vec2::Zero();
  double radius = 1;
};
struct Bubble {
  BubbleDomain domain;
};
/// {x0 < x < x1, bottom < y < omega(x)}.
struct BelowGraph {
  double x0 = 0, x1 = 1, bottom = -0.5;
  RealFn omega;
  RealFn domega;
};
struct Annulus {
  Vec2 center = Vec2::Zero();
  double r_in = 0.5, r_out = 1;
};
}  // namespace domains

using DomainSpec = std::variant<domains::Square, domains::Disc, domains::HalfDisc, domains::Bubble,
                                domains::BelowGraph, domains::Annulus>;

/// Structured triangulation with target size h.
TriMesh mesh_domain(const DomainSpec& spec, double h);

/// Uniform midpoint refinement; curved and graph-top midpoints are
/// re-projected through the mesh geometry.
TriMesh refine(const TriMesh& m);

/// Throws MeshError on orientation, conformity or loop violations.
void validate_mesh(const TriMesh& m);

/// Lawson flips until every interior edge is locally Delaunay.
int make_delaunay(TriMesh& m);

/// Plain average of adjacent boundary edge normals per
/// boundary vertex, exact graph normal on graph-top vertices. Interior
/// vertices get a zero vector.
std::vector<Vec2> boundary_normals(const TriMesh& m, const std::optional<BoundaryGraph>& g = std::nullopt);

/// Outward unit normal of a boundary edge.
Vec2 edge_normal(const TriMesh& m, const BoundaryEdge& e);

/// Mirror of a mesh whose `drop` edges lie on the line y = line_y.
struct MirroredMesh {
  TriMesh full;
  std::vector<int> mirror;  // full vertex -> its mirror image
  int half_vertices = 0;    // full vertices [0, half_vertices) are the original ones
};

MirroredMesh mirror_mesh(const TriMesh& half, double line_y, BoundaryTag drop,
                         std::shared_ptr<const BoundaryGeometry> geometry);

/// ASCII format: "nv nt ne", nv lines "x y", nt lines "i j k", ne lines
/// "i j tag"; optional named nodal blocks "values <name> <count>".
void write_mesh(std::ostream& os, const TriMesh& m,
                const std::vector<std::pair<std::string, std::vector<double>>>& blocks = {});
TriMesh read_mesh(std::istream& is,
                  std::vector<std::pair<std::string, std::vector<double>>>* blocks = nullptr);

/// Locates the triangle containing a point (uniform bucket grid).
class PointLocator {
 public:
  explicit PointLocator(std::shared_ptr<const TriMesh> m);
  const TriMesh& mesh() const { return *mesh_; }
  /// Triangle index and barycentric coordinates, or -1 if outside.
  int locate(const Vec2& x, std::array<double, 3>* bary = nullptr, double tol = 1e-12) const;

 private:
  std::shared_ptr<const TriMesh> mesh_;
  Vec2 lo_, cell_;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

std::array<double, 3> barycentric(const TriMesh& m, int t, const Vec2& x);

}  // namespace slipflow
