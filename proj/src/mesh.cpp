#include "slipflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace slipflow {

namespace {

constexpr double kPi = std::numbers::pi;

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

class CircleGeometry : public BoundaryGeometry {
 public:
  CircleGeometry(Vec2 c, std::vector<double> radii) : c_(c), radii_(std::move(radii)) {}
  Vec2 project(BoundaryTag tag, const Vec2& p) const override {
    if (tag != BoundaryTag::Curved) return p;
    Vec2 d = p - c_;
    double r = d.norm();
    if (r == 0) return p;
    double best = radii_.front();
    for (double R : radii_)
      if (std::abs(R - r) < std::abs(best - r)) best = R;
    return c_ + best * d / r;
  }

 private:
  Vec2 c_;
  std::vector<double> radii_;
};

class BubbleGeometry : public BoundaryGeometry {
 public:
  explicit BubbleGeometry(BubbleDomain b) : b_(b) {}
  // Closest point on the top segment, the fillets or the arc.
  Vec2 project(BoundaryTag tag, const Vec2& p) const override {
    if (tag != BoundaryTag::Curved) return p;
    const Vec2 c = b_.center;
    const double r = b_.arc_radius(), f = b_.fillet, xf = b_.top_half_width();
    Vec2 best = Vec2(std::clamp(p.x(), c.x() - xf, c.x() + xf), c.y());
    auto consider = [&](const Vec2& q) {
      if ((q - p).norm() < (best - p).norm()) best = q;
    };
    for (double side : {-1.0, 1.0}) {
      const Vec2 fc = c + Vec2(side * xf, -f);
      // The fillet runs from the top tangent point (direction +y) to the arc
      // tangent point (direction fc - c).
      const Vec2 u0(0, 1), u1 = (fc - c).normalized();
      Vec2 d = p - fc;
      if (d.norm() > 0) {
        Vec2 u = d.normalized();
        double span = cross(u0, u1);
        if (cross(u0, u) * span >= 0 && cross(u, u1) * span >= 0) consider(fc + f * u);
      }
      consider(fc + f * u1);
    }
    Vec2 d = p - c;
    if (d.norm() > 0) {
      Vec2 q = c + r * d.normalized();
      double tl = kPi + std::atan2(f, xf), tr = 2 * kPi - std::atan2(f, xf);
      double th = std::atan2(d.y(), d.x());
      if (th <= 0) th += 2 * kPi;
      if (th >= tl && th <= tr) consider(q);
    }
    return best;
  }

 private:
  BubbleDomain b_;
};

class GraphGeometry : public BoundaryGeometry {
 public:
  GraphGeometry(RealFn w, RealFn dw) : w_(std::move(w)), dw_(std::move(dw)) {}
  Vec2 project(BoundaryTag tag, const Vec2& p) const override {
    if (tag != BoundaryTag::GraphTop) return p;
    return Vec2(p.x(), w_(p.x()));
  }
  std::optional<Vec2> exact_normal(BoundaryTag tag, const Vec2& p) const override {
    if (tag != BoundaryTag::GraphTop || !dw_) return std::nullopt;
    return Vec2(-dw_(p.x()), 1).normalized();
  }

 private:
  RealFn w_, dw_;
};

void add_lattice_triangles(TriMesh& m, int nx, int ny) {
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int v00 = id(i, j), v10 = id(i + 1, j), v11 = id(i + 1, j + 1), v01 = id(i, j + 1);
      m.triangles.push_back({v00, v10, v11});
      m.triangles.push_back({v00, v11, v01});
    }
}

void add_lattice_boundary(TriMesh& m, int nx, int ny, BoundaryTag bottom, BoundaryTag right,
                          BoundaryTag top, BoundaryTag left) {
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int i = 0; i < nx; ++i) m.boundary.push_back({id(i, 0), id(i + 1, 0), bottom});
  for (int j = 0; j < ny; ++j) m.boundary.push_back({id(nx, j), id(nx, j + 1), right});
  for (int i = nx; i > 0; --i) m.boundary.push_back({id(i, ny), id(i - 1, ny), top});
  for (int j = ny; j > 0; --j) m.boundary.push_back({id(0, j), id(0, j - 1), left});
}

int cells(double length, double h) { return std::max(1, static_cast<int>(std::ceil(length / h - 1e-9))); }

// Polar half-ring mesh of the lower unit half-disc: center, then rings k = 1..K
// with 3k + 1 points at angles pi + pi j / (3k). `place(k, j, unit_dir)` gives
// the physical position of ring point (k, j).
template <class Place>
TriMesh polar_half_mesh(int K, Place place, Vec2 center) {
  TriMesh m;
  m.vertices.push_back(center);
  std::vector<int> ring_start(K + 1, 0);
  for (int k = 1; k <= K; ++k) {
    ring_start[k] = static_cast<int>(m.vertices.size());
    int nk = 3 * k;
    for (int j = 0; j <= nk; ++j) m.vertices.push_back(place(k, j, nk));
  }
  auto angle = [](int j, int nk) { return kPi + kPi * j / nk; };
  // ring 1: fan around the center
  for (int j = 0; j < 3; ++j) m.triangles.push_back({0, ring_start[1] + j, ring_start[1] + j + 1});
  for (int k = 2; k <= K; ++k) {
    int n1 = 3 * (k - 1), n2 = 3 * k;
    int i = 0, j = 0;
    while (i < n1 || j < n2) {
      bool outer;
      if (i == n1) outer = true;
      else if (j == n2) outer = false;
      else outer = angle(j + 1, n2) < angle(i + 1, n1) + 1e-14;
      int a = ring_start[k - 1] + i, b = ring_start[k] + j;
      if (outer) {
        m.triangles.push_back({a, b, b + 1});
        ++j;
      } else {
        m.triangles.push_back({a, b, a + 1});
        ++i;
      }
    }
  }
  // boundary: arc (ccw), then the diameter from right to left
  for (int j = 0; j < 3 * K; ++j)
    m.boundary.push_back({ring_start[K] + j, ring_start[K] + j + 1, BoundaryTag::Curved});
  for (int k = K; k >= 1; --k) {
    int right = ring_start[k] + 3 * k;
    int next = k > 1 ? ring_start[k - 1] + 3 * (k - 1) : 0;
    m.boundary.push_back({right, next, BoundaryTag::Flat});
  }
  for (int k = 1; k <= K; ++k) {
    int prev = k > 1 ? ring_start[k - 1] : 0;
    m.boundary.push_back({prev, ring_start[k], BoundaryTag::Flat});
  }
  return m;
}

// Unit direction for ring point j of nk on the lower half circle, exactly
// symmetric under x -> -x and exactly horizontal at both ends.
Vec2 half_ring_dir(int j, int nk) {
  if (j == 0) return Vec2(-1, 0);
  if (j == nk) return Vec2(1, 0);
  if (2 * j > nk) {
    Vec2 d = half_ring_dir(nk - j, nk);
    return Vec2(-d.x(), d.y());
  }
  if (2 * j == nk) return Vec2(0, -1);
  double th = kPi + kPi * j / nk;
  return Vec2(std::cos(th), std::sin(th));
}

TriMesh half_disc_mesh(const domains::HalfDisc& d, double h) {
  int K = std::max(2, cells(d.radius, h));
  TriMesh m = polar_half_mesh(
      K, [&](int k, int j, int nk) { return Vec2(d.center + d.radius * k / K * half_ring_dir(j, nk)); },
      d.center);
  m.geometry = std::make_shared<CircleGeometry>(d.center, std::vector<double>{d.radius});
  make_delaunay(m);
  return m;
}

// Full polar rings around a star center: ring k has 6k points; `place(k, j, nk)`.
template <class Place>
TriMesh polar_disc_mesh(int K, Place place, Vec2 center) {
  TriMesh m;
  m.vertices.push_back(center);
  std::vector<int> ring_start(K + 1, 0);
  for (int k = 1; k <= K; ++k) {
    ring_start[k] = static_cast<int>(m.vertices.size());
    for (int j = 0; j < 6 * k; ++j) m.vertices.push_back(place(k, j, 6 * k));
  }
  auto id = [&](int k, int j) { return ring_start[k] + j % (6 * k); };
  for (int j = 0; j < 6; ++j) m.triangles.push_back({0, id(1, j), id(1, j + 1)});
  for (int k = 2; k <= K; ++k) {
    int n1 = 6 * (k - 1), n2 = 6 * k;
    int i = 0, j = 0;
    while (i < n1 || j < n2) {
      bool outer;
      if (i == n1) outer = true;
      else if (j == n2) outer = false;
      else outer = static_cast<double>(j + 1) / n2 < static_cast<double>(i + 1) / n1 + 1e-14;
      if (outer) {
        m.triangles.push_back({id(k - 1, i), id(k, j), id(k, j + 1)});
        ++j;
      } else {
        m.triangles.push_back({id(k - 1, i), id(k, j), id(k - 1, i + 1)});
        ++i;
      }
    }
  }
  for (int j = 0; j < 6 * K; ++j) m.boundary.push_back({id(K, j), id(K, j + 1), BoundaryTag::Curved});
  return m;
}

// The bubble is convex, so it is the star-shaped image of a polar disc
// around an interior point; rays from there cross the boundary
// transversally, which keeps the family shape regular.
TriMesh bubble_mesh(const BubbleDomain& b, double h) {
  const double depth = b.arc_radius(), xf = b.top_half_width();
  const Vec2 star = b.center - Vec2(0, 0.5 * depth);
  auto hit = [&](double phi) {
    Vec2 dir(std::cos(phi), std::sin(phi));
    if (dir.y() > 0) {
      double t = (b.center.y() - star.y()) / dir.y();
      Vec2 p = star + t * dir;
      if (std::abs(p.x() - b.center.x()) <= xf * (1 + 1e-12))
        return Vec2(std::clamp(p.x(), b.center.x() - xf, b.center.x() + xf), b.center.y());
    }
    double lo = 0, hi = 2 * depth + xf;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * depth; ++it) {
      double mid = 0.5 * (lo + hi);
      (b.contains(star + mid * dir) ? lo : hi) = mid;
    }
    return Vec2(star + lo * dir);
  };
  const int K = std::max(2, cells(std::hypot(xf, 0.5 * depth), h));
  // Piecewise-linear angle map that puts ring-K points exactly on the two
  // tangent points of the top segment.
  const double phi_r = std::atan2(0.5 * depth, xf);
  const int nr = std::max(1, static_cast<int>(std::lround(6 * K * phi_r / (2 * kPi))));
  const double t_r = static_cast<double>(nr) / (6 * K), t_l = 0.5 - t_r;
  auto angle = [&](double t) {
    if (t <= t_r) return phi_r * t / t_r;
    if (t <= t_l) return phi_r + (kPi - 2 * phi_r) * (t - t_r) / (t_l - t_r);
    if (t <= 0.5) return kPi - phi_r + phi_r * (t - t_l) / t_r;
    return kPi + kPi * (t - 0.5) / 0.5;
  };
  TriMesh m = polar_disc_mesh(
      K,
      [&](int k, int j, int nk) {
        Vec2 e = hit(angle(static_cast<double>(j) / nk));
        Vec2 p = star + static_cast<double>(k) / K * (e - star);
        if (k == K) p = e;
        return p;
      },
      star);
  for (auto& e : m.boundary)
    if (m.vertices[e.a].y() == b.center.y() && m.vertices[e.b].y() == b.center.y()) e.tag = BoundaryTag::Flat;
  m.geometry = std::make_shared<BubbleGeometry>(b);
  make_delaunay(m);
  return m;
}

}  // namespace

const char* tag_name(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::GraphTop: return "graph-top";
    case BoundaryTag::Flat: return "flat";
    case BoundaryTag::Curved: return "curved";
    case BoundaryTag::Side: return "side";
  }
  return "side";
}

BoundaryTag parse_tag(const std::string& name) {
  if (name == "graph-top") return BoundaryTag::GraphTop;
  if (name == "flat") return BoundaryTag::Flat;
  if (name == "curved") return BoundaryTag::Curved;
  if (name == "side") return BoundaryTag::Side;
  throw MeshError("unknown boundary tag '" + name + "'");
}

double TriMesh::triangle_area(int t) const {
  const auto& tr = triangles[t];
  return 0.5 * cross(vertices[tr[1]] - vertices[tr[0]], vertices[tr[2]] - vertices[tr[0]]);
}

double TriMesh::area() const {
  double a = 0;
  for (int t = 0; t < num_triangles(); ++t) a += triangle_area(t);
  return a;
}

double TriMesh::min_angle() const {
  double best = kPi;
  for (const auto& tr : triangles)
    for (int k = 0; k < 3; ++k) {
      Vec2 u = vertices[tr[(k + 1) % 3]] - vertices[tr[k]];
      Vec2 v = vertices[tr[(k + 2) % 3]] - vertices[tr[k]];
      best = std::min(best, std::atan2(std::abs(cross(u, v)), u.dot(v)));
    }
  return best;
}

void TriMesh::update_h() {
  h = 0;
  for (const auto& tr : triangles)
    for (int k = 0; k < 3; ++k) h = std::max(h, (vertices[tr[k]] - vertices[tr[(k + 1) % 3]]).norm());
}

EdgeTopology build_edges(const TriMesh& m) {
  EdgeTopology topo;
  std::map<std::pair<int, int>, int> ids;
  topo.tri_edges.resize(m.triangles.size());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tr = m.triangles[t];
    for (int k = 0; k < 3; ++k) {
      int a = tr[(k + 1) % 3], b = tr[(k + 2) % 3];
      auto key = std::minmax(a, b);
      auto [it, inserted] = ids.try_emplace({key.first, key.second}, static_cast<int>(topo.edges.size()));
      if (inserted) {
        topo.edges.push_back({key.first, key.second});
        topo.edge_tris.push_back({t, -1});
      } else {
        auto& et = topo.edge_tris[it->second];
        if (et[1] != -1) throw MeshError("edge shared by more than two triangles");
        et[1] = t;
      }
      topo.tri_edges[t][k] = it->second;
    }
  }
  return topo;
}

TriMesh mesh_domain(const DomainSpec& spec, double h) {
  if (!(h > 0)) throw MeshError("mesh_domain: h must be positive");
  TriMesh m;
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, domains::Square>) {
          int nx = cells(d.hi.x() - d.lo.x(), h), ny = cells(d.hi.y() - d.lo.y(), h);
          for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i)
              m.vertices.emplace_back(d.lo.x() + (d.hi.x() - d.lo.x()) * i / nx,
                                      d.lo.y() + (d.hi.y() - d.lo.y()) * j / ny);
          add_lattice_triangles(m, nx, ny);
          add_lattice_boundary(m, nx, ny, BoundaryTag::Side, BoundaryTag::Side, BoundaryTag::Side,
                               BoundaryTag::Side);
        } else if constexpr (std::is_same_v<T, domains::BelowGraph>) {
          if (!d.omega) throw MeshError("mesh_domain: below-graph needs omega");
          int nx = cells(d.x1 - d.x0, h);
          double top = -INFINITY;
          for (int i = 0; i <= nx; ++i) top = std::max(top, d.omega(d.x0 + (d.x1 - d.x0) * i / nx));
          if (!(top > d.bottom)) throw MeshError("mesh_domain: graph below the box bottom");
          int ny = cells(top - d.bottom, h);
          for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) {
              double x = d.x0 + (d.x1 - d.x0) * i / nx;
              double w = d.omega(x);
              if (!(w > d.bottom)) throw MeshError("mesh_domain: graph touches the box bottom");
              double y = j == ny ? w : d.bottom + (w - d.bottom) * j / ny;
              m.vertices.emplace_back(x, y);
            }
          add_lattice_triangles(m, nx, ny);
          add_lattice_boundary(m, nx, ny, BoundaryTag::Flat, BoundaryTag::Side,
                               BoundaryTag::GraphTop, BoundaryTag::Side);
          m.geometry = std::make_shared<GraphGeometry>(d.omega, d.domega);
        } else if constexpr (std::is_same_v<T, domains::HalfDisc>) {
          m = half_disc_mesh(d, h);
        } else if constexpr (std::is_same_v<T, domains::Disc>) {
          TriMesh half = half_disc_mesh(domains::HalfDisc{d.center, d.radius}, h);
          auto geo = std::make_shared<CircleGeometry>(d.center, std::vector<double>{d.radius});
          m = mirror_mesh(half, d.center.y(), BoundaryTag::Flat, geo).full;
        } else if constexpr (std::is_same_v<T, domains::Bubble>) {
          m = bubble_mesh(d.domain, h);
        } else if constexpr (std::is_same_v<T, domains::Annulus>) {
          if (!(d.r_out > d.r_in && d.r_in > 0)) throw MeshError("mesh_domain: bad annulus radii");
          int K = cells(d.r_out - d.r_in, h);
          int M = std::max(8, cells(2 * kPi * d.r_out, h));
          for (int k = 0; k <= K; ++k)
            for (int j = 0; j < M; ++j) {
              double r = d.r_in + (d.r_out - d.r_in) * k / K, th = 2 * kPi * j / M;
              m.vertices.push_back(d.center + r * Vec2(std::cos(th), std::sin(th)));
            }
          auto id = [M](int k, int j) { return k * M + (j % M); };
          for (int k = 0; k < K; ++k)
            for (int j = 0; j < M; ++j) {
              m.triangles.push_back({id(k, j), id(k + 1, j), id(k + 1, j + 1)});
              m.triangles.push_back({id(k, j), id(k + 1, j + 1), id(k, j + 1)});
            }
          for (int j = 0; j < M; ++j) {
            m.boundary.push_back({id(K, j), id(K, j + 1), BoundaryTag::Curved});
            m.boundary.push_back({id(0, j + 1), id(0, j), BoundaryTag::Curved});
          }
          m.geometry =
              std::make_shared<CircleGeometry>(d.center, std::vector<double>{d.r_in, d.r_out});
        }
      },
      spec);
  if (m.boundary.size() < 8)
    throw MeshError("mesh_domain: h too large to resolve the geometry (fewer than 8 boundary edges)");
  m.update_h();
  validate_mesh(m);
  return m;
}

TriMesh refine(const TriMesh& m) {
  EdgeTopology topo = build_edges(m);
  TriMesh r;
  r.geometry = m.geometry;
  r.vertices = m.vertices;
  const int nv = m.num_vertices();
  std::map<std::pair<int, int>, BoundaryTag> btag;
  for (const auto& e : m.boundary) btag[std::minmax(e.a, e.b)] = e.tag;
  for (const auto& e : topo.edges) {
    Vec2 mid = 0.5 * (m.vertices[e[0]] + m.vertices[e[1]]);
    auto it = btag.find({e[0], e[1]});
    if (it != btag.end() && m.geometry) mid = m.geometry->project(it->second, mid);
    r.vertices.push_back(mid);
  }
  std::map<std::pair<int, int>, int> edge_id;
  for (int i = 0; i < static_cast<int>(topo.edges.size()); ++i)
    edge_id[{topo.edges[i][0], topo.edges[i][1]}] = i;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tr = m.triangles[t];
    int a = tr[0], b = tr[1], c = tr[2];
    int ma = nv + topo.tri_edges[t][0];  // midpoint of (b, c)
    int mb = nv + topo.tri_edges[t][1];  // (c, a)
    int mc = nv + topo.tri_edges[t][2];  // (a, b)
    r.triangles.push_back({a, mc, mb});
    r.triangles.push_back({mc, b, ma});
    r.triangles.push_back({mb, ma, c});
    r.triangles.push_back({mc, ma, mb});
  }
  for (const auto& e : m.boundary) {
    auto key = std::minmax(e.a, e.b);
    int mid = nv + edge_id.at({key.first, key.second});
    r.boundary.push_back({e.a, mid, e.tag});
    r.boundary.push_back({mid, e.b, e.tag});
  }
  r.update_h();
  return r;
}

void validate_mesh(const TriMesh& m) {
  for (int t = 0; t < m.num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k)
      if (m.triangles[t][k] < 0 || m.triangles[t][k] >= m.num_vertices())
        throw MeshError("triangle references a missing vertex");
    if (!(m.triangle_area(t) > 0)) throw MeshError("non-positive triangle area");
  }
  EdgeTopology topo = build_edges(m);
  std::map<std::pair<int, int>, int> directed;  // boundary edges from the triangles
  for (int t = 0; t < m.num_triangles(); ++t)
    for (int k = 0; k < 3; ++k) {
      int e = topo.tri_edges[t][k];
      if (topo.edge_tris[e][1] == -1)
        directed[{m.triangles[t][(k + 1) % 3], m.triangles[t][(k + 2) % 3]}] = 1;
    }
  if (directed.size() != m.boundary.size())
    throw MeshError("boundary edge list does not match the triangulation");
  std::vector<int> out_deg(m.num_vertices(), 0), in_deg(m.num_vertices(), 0);
  for (const auto& e : m.boundary) {
    if (!directed.count({e.a, e.b})) throw MeshError("boundary edge missing or wrongly oriented");
    ++out_deg[e.a];
    ++in_deg[e.b];
  }
  for (int v = 0; v < m.num_vertices(); ++v)
    if (out_deg[v] != in_deg[v] || out_deg[v] > 1) throw MeshError("boundary edges do not form closed loops");
}

int make_delaunay(TriMesh& m) {
  int flips = 0;
  for (int pass = 0; pass < 200; ++pass) {
    EdgeTopology topo = build_edges(m);
    std::vector<char> touched(m.triangles.size(), 0);
    int pass_flips = 0;
    for (int e = 0; e < static_cast<int>(topo.edges.size()); ++e) {
      int t0 = topo.edge_tris[e][0], t1 = topo.edge_tris[e][1];
      if (t1 < 0 || touched[t0] || touched[t1]) continue;
      auto local = [&](int t) {
        for (int k = 0; k < 3; ++k)
          if (topo.tri_edges[t][k] == e) return k;
        return -1;
      };
      int k0 = local(t0), k1 = local(t1);
      const auto tr0 = m.triangles[t0], tr1 = m.triangles[t1];
      int c = tr0[k0], d = tr1[k1];
      int a = tr0[(k0 + 1) % 3], b = tr0[(k0 + 2) % 3];
      auto ang = [&](int apex, int p, int q) {
        Vec2 u = m.vertices[p] - m.vertices[apex], v = m.vertices[q] - m.vertices[apex];
        return std::atan2(std::abs(cross(u, v)), u.dot(v));
      };
      if (ang(c, a, b) + ang(d, a, b) <= kPi + 1e-12) continue;
      // (a, b, c) and (b, a, d) become (c, a, d) and (d, b, c)
      std::array<int, 3> n0{c, a, d}, n1{d, b, c};
      auto area = [&](const std::array<int, 3>& tr) {
        return cross(m.vertices[tr[1]] - m.vertices[tr[0]], m.vertices[tr[2]] - m.vertices[tr[0]]);
      };
      if (!(area(n0) > 0 && area(n1) > 0)) continue;
      m.triangles[t0] = n0;
      m.triangles[t1] = n1;
      touched[t0] = touched[t1] = 1;
      ++pass_flips;
    }
    flips += pass_flips;
    if (pass_flips == 0) break;
  }
  return flips;
}

Vec2 edge_normal(const TriMesh& m, const BoundaryEdge& e) {
  Vec2 t = m.vertices[e.b] - m.vertices[e.a];
  return Vec2(t.y(), -t.x()).normalized();
}

std::vector<Vec2> boundary_normals(const TriMesh& m, const std::optional<BoundaryGraph>& g) {
  std::vector<Vec2> sum(m.num_vertices(), Vec2::Zero());
  std::vector<char> graph_vertex(m.num_vertices(), 0);
  for (const auto& e : m.boundary) {
    Vec2 n = edge_normal(m, e);
    sum[e.a] += n;
    sum[e.b] += n;
    if (e.tag == BoundaryTag::GraphTop) graph_vertex[e.a] = graph_vertex[e.b] = 1;
  }
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (graph_vertex[v]) {
      if (g) {
        sum[v] = Vec2(-g->grad_eval(m.vertices[v].x()), 1).normalized();
        continue;
      }
      std::optional<Vec2> exact =
          m.geometry ? m.geometry->exact_normal(BoundaryTag::GraphTop, m.vertices[v]) : std::nullopt;
      if (!exact) throw InvalidInput("boundary_normals: graph-top tags need a graph");
      sum[v] = *exact;
    } else if (sum[v].norm() > 0) {
      sum[v].normalize();
    }
  }
  return sum;
}

MirroredMesh mirror_mesh(const TriMesh& half, double line_y, BoundaryTag drop,
                         std::shared_ptr<const BoundaryGeometry> geometry) {
  MirroredMesh out;
  const int nv = half.num_vertices();
  out.half_vertices = nv;
  TriMesh& f = out.full;
  f.vertices = half.vertices;
  std::vector<int> image(nv, -1);
  std::vector<char> on_line(nv, 0);
  for (const auto& e : half.boundary)
    if (e.tag == drop) on_line[e.a] = on_line[e.b] = 1;
  for (int v = 0; v < nv; ++v) {
    if (on_line[v]) {
      if (half.vertices[v].y() != line_y) throw MeshError("mirror_mesh: dropped edge off the mirror line");
      image[v] = v;
    } else {
      image[v] = static_cast<int>(f.vertices.size());
      Vec2 p = half.vertices[v];
      f.vertices.emplace_back(p.x(), 2 * line_y - p.y());
    }
  }
  f.triangles = half.triangles;
  for (const auto& tr : half.triangles) f.triangles.push_back({image[tr[0]], image[tr[2]], image[tr[1]]});
  for (const auto& e : half.boundary) {
    if (e.tag == drop) continue;
    f.boundary.push_back(e);
    f.boundary.push_back({image[e.b], image[e.a], e.tag});
  }
  out.mirror.assign(f.vertices.size(), -1);
  for (int v = 0; v < nv; ++v) {
    out.mirror[v] = image[v];
    out.mirror[image[v]] = v;
  }
  f.geometry = std::move(geometry);
  f.update_h();
  validate_mesh(f);
  return out;
}

void write_mesh(std::ostream& os, const TriMesh& m,
                const std::vector<std::pair<std::string, std::vector<double>>>& blocks) {
  os.precision(17);
  os << m.num_vertices() << ' ' << m.num_triangles() << ' ' << m.boundary.size() << '\n';
  for (const auto& v : m.vertices) os << v.x() << ' ' << v.y() << '\n';
  for (const auto& t : m.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : m.boundary) os << e.a << ' ' << e.b << ' ' << tag_name(e.tag) << '\n';
  for (const auto& [name, vals] : blocks) {
    os << "values " << name << ' ' << vals.size() << '\n';
    for (double v : vals) os << v << '\n';
  }
}

TriMesh read_mesh(std::istream& is, std::vector<std::pair<std::string, std::vector<double>>>* blocks) {
  TriMesh m;
  long nv, nt, ne;
  if (!(is >> nv >> nt >> ne) || nv < 0 || nt < 0 || ne < 0) throw MeshError("read_mesh: bad header");
  m.vertices.resize(nv);
  for (auto& v : m.vertices)
    if (!(is >> v.x() >> v.y())) throw MeshError("read_mesh: truncated vertex list");
  m.triangles.resize(nt);
  for (auto& t : m.triangles)
    if (!(is >> t[0] >> t[1] >> t[2])) throw MeshError("read_mesh: truncated triangle list");
  m.boundary.resize(ne);
  for (auto& e : m.boundary) {
    std::string tag;
    if (!(is >> e.a >> e.b >> tag)) throw MeshError("read_mesh: truncated boundary list");
    e.tag = parse_tag(tag);
  }
  std::string word;
  while (is >> word) {
    if (word != "values") throw MeshError("read_mesh: unexpected token '" + word + "'");
    std::string name;
    long count;
    if (!(is >> name >> count) || count < 0) throw MeshError("read_mesh: bad value block header");
    std::vector<double> vals(count);
    for (auto& v : vals)
      if (!(is >> v)) throw MeshError("read_mesh: truncated value block");
    if (blocks) blocks->emplace_back(name, std::move(vals));
  }
  m.update_h();
  validate_mesh(m);
  return m;
}

std::array<double, 3> barycentric(const TriMesh& m, int t, const Vec2& x) {
  const auto& tr = m.triangles[t];
  const Vec2 &a = m.vertices[tr[0]], &b = m.vertices[tr[1]], &c = m.vertices[tr[2]];
  double det = cross(b - a, c - a);
  double l1 = cross(x - a, c - a) / det;
  double l2 = cross(b - a, x - a) / det;
  return {1 - l1 - l2, l1, l2};
}

PointLocator::PointLocator(std::shared_ptr<const TriMesh> m) : mesh_(std::move(m)) {
  Vec2 lo(INFINITY, INFINITY), hi(-INFINITY, -INFINITY);
  for (const auto& v : mesh_->vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  int nt = std::max(1, mesh_->num_triangles());
  int side = std::max(1, static_cast<int>(std::sqrt(nt / 2.0)));
  nx_ = ny_ = side;
  Vec2 ext = (hi - lo).cwiseMax(Vec2(1e-300, 1e-300));
  lo_ = lo - 1e-9 * ext;
  cell_ = (ext * (1 + 2e-9)) / side;
  buckets_.assign(nx_ * ny_, {});
  for (int t = 0; t < mesh_->num_triangles(); ++t) {
    Vec2 tlo(INFINITY, INFINITY), thi(-INFINITY, -INFINITY);
    for (int k = 0; k < 3; ++k) {
      tlo = tlo.cwiseMin(mesh_->vertices[mesh_->triangles[t][k]]);
      thi = thi.cwiseMax(mesh_->vertices[mesh_->triangles[t][k]]);
    }
    int i0 = std::clamp(static_cast<int>((tlo.x() - lo_.x()) / cell_.x()), 0, nx_ - 1);
    int i1 = std::clamp(static_cast<int>((thi.x() - lo_.x()) / cell_.x()), 0, nx_ - 1);
    int j0 = std::clamp(static_cast<int>((tlo.y() - lo_.y()) / cell_.y()), 0, ny_ - 1);
    int j1 = std::clamp(static_cast<int>((thi.y() - lo_.y()) / cell_.y()), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[j * nx_ + i].push_back(t);
  }
}

int PointLocator::locate(const Vec2& x, std::array<double, 3>* bary, double tol) const {
  double fi = (x.x() - lo_.x()) / cell_.x(), fj = (x.y() - lo_.y()) / cell_.y();
  if (!(fi >= -1 && fj >= -1 && fi <= nx_ + 1 && fj <= ny_ + 1)) return -1;
  int i = std::clamp(static_cast<int>(fi), 0, nx_ - 1), j = std::clamp(static_cast<int>(fj), 0, ny_ - 1);
  int best = -1;
  double best_min = -INFINITY;
  std::array<double, 3> best_l{};
  for (int t : buckets_[j * nx_ + i]) {
    auto l = barycentric(*mesh_, t, x);
    double mn = std::min({l[0], l[1], l[2]});
    if (mn > best_min) {
      best_min = mn;
      best = t;
      best_l = l;
    }
  }
  if (best < 0 || best_min < -tol) return -1;
  if (bary) *bary = best_l;
  return best;
}

}  // namespace slipflow
