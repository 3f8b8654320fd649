#include "slipflow/halfspace.hpp"

#include <cmath>

namespace slipflow {

namespace {

const Mat2 kD = (Mat2() << 1, 0, 0, -1).finished();

Vec2 mirror(const Vec2& x, double y0) { return Vec2(x.x(), 2 * y0 - x.y()); }

}  // namespace

FieldPair reflect_data(const FieldPair& half, double y0) {
  FieldPair out;
  auto v = half.velocity;
  auto q = half.pressure;
  out.velocity.value = [v, y0](const Vec2& x) {
    return x.y() <= y0 ? v.value(x) : Vec2(kD * v.value(mirror(x, y0)));
  };
  out.velocity.jacobian = [v, y0](const Vec2& x) {
    return x.y() <= y0 ? v.jac(x) : Mat2(kD * v.jac(mirror(x, y0)) * kD);
  };
  out.pressure.value = [q, y0](const Vec2& x) { return x.y() <= y0 ? q.value(x) : q.value(mirror(x, y0)); };
  out.pressure.gradient = [q, y0](const Vec2& x) {
    return x.y() <= y0 ? q.grad(x) : Vec2(kD * q.grad(mirror(x, y0)));
  };
  return out;
}

VectorFn reflect_vector(const VectorFn& half, double y0) {
  if (!half) return {};
  return [half, y0](const Vec2& x) { return x.y() <= y0 ? half(x) : Vec2(kD * half(mirror(x, y0))); };
}

FieldPair fold_solution(const FieldPair& full, double y0) {
  FieldPair out;
  auto w = full.velocity;
  auto pi = full.pressure;
  out.velocity.value = [w, y0](const Vec2& x) {
    Vec2 a = w.value(x), b = w.value(mirror(x, y0));
    return Vec2(0.5 * (a.x() + b.x()), 0.5 * (a.y() - b.y()));
  };
  out.pressure.value = [pi, y0](const Vec2& x) { return 0.5 * (pi.value(x) + pi.value(mirror(x, y0))); };
  return out;
}

std::vector<int> node_mirror_map(const LagrangeSpace& V, const std::vector<int>& vm) {
  const int nv = V.mesh().num_vertices();
  if (static_cast<int>(vm.size()) != nv) throw InvalidInput("node_mirror_map: vertex map size mismatch");
  std::vector<int> out(V.num_nodes());
  for (int i = 0; i < nv; ++i) out[i] = vm[i];
  const auto& edges = V.topology().edges;
  for (int e = nv; e < V.num_nodes(); ++e) {
    const auto& ed = edges[e - nv];
    out[e] = nv + V.edge_id(vm[ed[0]], vm[ed[1]]);
  }
  return out;
}

Eigen::VectorXd fold_nodal(const Eigen::VectorXd& u, const std::vector<int>& nm) {
  Eigen::VectorXd out(u.size());
  for (std::size_t i = 0; i < nm.size(); ++i) {
    int j = nm[i];
    out[2 * i] = 0.5 * (u[2 * i] + u[2 * j]);
    out[2 * i + 1] = 0.5 * (u[2 * i + 1] - u[2 * j + 1]);
  }
  return out;
}

VectorFn reflection_test_force(const Vec2& center, double radius) {
  CutoffFunction rho = make_cutoff(center, 0.5 * radius);
  return [rho, center](const Vec2& x) {
    Vec2 r = x - center;
    return Vec2(rho(x) * (std::sin(3 * r.x()) + r.y()), rho(x) * (std::cos(2 * r.x()) + r.x() * r.y()));
  };
}

namespace {

// Position of half-mesh vertex i in the full mesh (the mirror keeps
// original vertices first); P2 edge nodes are matched by endpoints.
std::vector<int> half_to_full_nodes(const LagrangeSpace& half, const LagrangeSpace& full) {
  const int nvh = half.mesh().num_vertices(), nvf = full.mesh().num_vertices();
  std::vector<int> out(half.num_nodes());
  for (int i = 0; i < nvh; ++i) out[i] = i;
  for (int e = nvh; e < half.num_nodes(); ++e) {
    const auto& ed = half.topology().edges[e - nvh];
    out[e] = nvf + full.edge_id(ed[0], ed[1]);
  }
  return out;
}

double max_nodal_gap(const SolveReport& coarse, const SolveReport& fine) {
  auto fm = std::make_shared<TriMesh>(fine.velocity_space->mesh());
  PointLocator loc(fm);
  const LagrangeSpace& S = coarse.velocity_space->space();
  double worst = 0;
  for (int i = 0; i < S.num_nodes(); ++i) {
    Vec2 x = S.node_coord(i);
    int t = loc.locate(x, nullptr, 1e-9);
    if (t < 0) continue;  // coarse polygon node outside the fine polygon
    Vec2 uf = eval_velocity(fine, t, x);
    Vec2 uc(coarse.u[2 * i], coarse.u[2 * i + 1]);
    worst = std::max(worst, (uf - uc).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

ReflectionReport verify_reflection_consistency(const ReflectionConfig& cfg) {
  const double y0 = cfg.center.y();
  auto half_problem = [&](double h) {
    StokesProblem p;
    p.mesh = std::make_shared<TriMesh>(mesh_domain(domains::HalfDisc{cfg.center, cfg.radius}, h));
    p.eta = cfg.eta;
    p.f = cfg.f;
    return p;
  };
  StokesProblem ph = half_problem(cfg.h);
  MirroredMesh mm = mirror_mesh(*ph.mesh, y0, BoundaryTag::Flat, ph.mesh->geometry);
  StokesProblem pf;
  pf.mesh = std::make_shared<TriMesh>(mm.full);
  pf.eta = cfg.eta;
  pf.f = reflect_vector(cfg.f, y0);

  SolveReport rh = solve(ph);
  SolveReport rf = solve(pf);
  SolveReport rfine = solve(half_problem(cfg.h / 2));

  ReflectionReport rep;
  rep.kernel_dim_full = rf.kernel_dim;
  const LagrangeSpace& Sf = rf.velocity_space->space();
  const LagrangeSpace& Sh = rh.velocity_space->space();
  std::vector<int> nm = node_mirror_map(Sf, mm.mirror);
  Eigen::VectorXd folded = fold_nodal(rf.u, nm);
  std::vector<int> h2f = half_to_full_nodes(Sh, Sf);
  for (int i = 0; i < Sh.num_nodes(); ++i) {
    int j = h2f[i];
    rep.difference = std::max({rep.difference, std::abs(folded[2 * j] - rh.u[2 * i]),
                               std::abs(folded[2 * j + 1] - rh.u[2 * i + 1])});
    if (Sh.node_coord(i).y() == y0) rep.flat_normal = std::max(rep.flat_normal, std::abs(folded[2 * j + 1]));
  }
  for (int i = 0; i < Sf.num_nodes(); ++i) {
    int j = nm[i];
    rep.parity_error = std::max({rep.parity_error, std::abs(rf.u[2 * i] - rf.u[2 * j]),
                                 std::abs(rf.u[2 * i + 1] + rf.u[2 * j + 1])});
  }
  rep.disc_error = max_nodal_gap(rh, rfine);
  rep.energy_half = rh.energy;
  rep.energy_full = rf.energy;
  const bool both_zero = rh.energy == 0 && rf.energy == 0;
  rep.energy_ratio = both_zero ? NAN : rf.energy / rh.energy;
  rep.cross_ok = rep.difference <= 5 * rep.disc_error;
  rep.energy_ok = both_zero || std::abs(rep.energy_ratio - 2) <= 0.02;
  return rep;
}

}  // namespace slipflow
