#include "suites.hpp"

#include "slipflow/exponents.hpp"
#include "slipflow/flatten.hpp"
#include "slipflow/halfspace.hpp"
#include "slipflow/mesh.hpp"
#include "slipflow/piola.hpp"
#include "slipflow/stokes.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <memory>

namespace slipflow::suites {

namespace {

// Pinned acceptance tolerances.
constexpr double kPiolaTol = 1e-6;
constexpr int kPiolaLevel = 4;
constexpr int kPiolaMaps = 20;
constexpr int kPiolaPairs = 5;
constexpr double kPiolaSeconds = 30;
constexpr double kDecompTol = 1e-6;
constexpr double kThetaTol = 1e-12;
constexpr int kDecompPoints = 100;
constexpr double kSlopeTarget = 0.5, kSlopeWindow = 0.15;
constexpr double kDmpSlack = 1e-10;
constexpr double kSelfOrder = 1.8;
constexpr double kGagliardoExact = 1e-6, kGagliardoOracle = 1e-4;
constexpr double kRateULo = 1.7, kRateUHi = 2.2, kRatePLo = 1.6, kRatePHi = 2.2;
constexpr double kRateSeconds = 60;
constexpr double kDrift = 0.10;
constexpr double kKornZero = 1e-10, kKornPositive = 1e-8;
constexpr double kFoldTol = 1e-14;
constexpr double kCrossFactor = 5, kEnergyRatioTol = 0.01;
constexpr double kLiftSlip = 1e-12, kLinearity = 1e-9;
constexpr double kPouTol = 1e-10;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::shared_ptr<const TriMesh> shared_mesh(const DomainSpec& d, double h) {
  return std::make_shared<TriMesh>(mesh_domain(d, h));
}

// Mesh with Psi applied to the vertices.
TriMesh mapped_mesh(const TriMesh& ref, const Mapping& psi) {
  TriMesh out = ref;
  for (auto& v : out.vertices) v = psi.apply(v);
  out.geometry = nullptr;
  out.update_h();
  return out;
}

double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

// Flattened random graph with delta drawn from [0.1, 0.5].
Flattening random_flattening(std::mt19937_64& rng, double s) {
  double delta = uniform(rng, 0.1, 0.5);
  double center = uniform(rng, -0.5, 0.5);
  return flatten_graph(random_graph(rng, center, delta, s), 1.0 / 16, true);
}

FieldPair random_pair(std::mt19937_64& rng, double kmax) {
  using symbolic::Vec;
  FieldPair pr;
  pr.velocity = symbolic::to_field(Vec{{random_trig(rng, kmax), random_trig(rng, kmax)}});
  pr.pressure = symbolic::to_field(random_trig(rng, kmax));
  return pr;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

std::mt19937_64 make_rng(std::uint64_t seed, int id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

BoundaryGraph random_graph(std::mt19937_64& rng, double center, double delta, double s) {
  // omega(y) = delta^{3/2} sum_k a_k sin(k t + b_k), t = (y - center) / delta
  double a[3], b[3];
  for (int k = 0; k < 3; ++k) {
    a[k] = uniform(rng, -0.25, 0.25) / (k + 1);
    b[k] = uniform(rng, 0, 2 * M_PI);
  }
  const double sc = std::pow(delta, 1.5);
  auto w = [=](double y) {
    double t = (y - center) / delta, r = 0;
    for (int k = 0; k < 3; ++k) r += a[k] * std::sin((k + 1) * t + b[k]);
    return sc * r;
  };
  auto dw = [=](double y) {
    double t = (y - center) / delta, r = 0;
    for (int k = 0; k < 3; ++k) r += a[k] * (k + 1) * std::cos((k + 1) * t + b[k]);
    return sc / delta * r;
  };
  return make_graph(w, dw, center, delta, s);
}

BoundaryGraph named_graph(const std::string& name, double delta, double s) {
  const double sc = 0.5 * std::pow(delta, 1.5);
  if (name == "sin") {
    return make_graph([=](double y) { return sc * 0.4 * std::sin(2 * y / delta); },
                      [=](double y) { return sc * 0.8 / delta * std::cos(2 * y / delta); }, 0, delta, s);
  }
  if (name == "poly") {
    return make_graph(
        [=](double y) {
          double t = y / delta;
          return sc * (0.3 * (1 - std::cos(2.5 * t)) + 0.1 * t * t * t);
        },
        [=](double y) {
          double t = y / delta;
          return sc / delta * (0.75 * std::sin(2.5 * t) + 0.3 * t * t);
        },
        0, delta, s);
  }
  if (name == "bump") {
    return make_graph([=](double y) { return sc * 0.5 * std::exp(-8 * y * y / (delta * delta)); },
                      [=](double y) {
                        return sc * 0.5 * std::exp(-8 * y * y / (delta * delta)) * (-16 * y / (delta * delta));
                      },
                      0, delta, s);
  }
  throw InvalidInput("unknown graph profile '" + name + "' (sin, poly, bump)");
}

symbolic::Expr random_trig(std::mt19937_64& rng, double kmax, int terms) {
  using symbolic::Expr;
  Expr e = uniform(rng, -0.5, 0.5);
  for (int i = 0; i < terms; ++i) {
    double c = uniform(rng, -1, 1);
    double kx = uniform(rng, -kmax, kmax), ky = uniform(rng, -kmax, kmax);
    double ph = uniform(rng, 0, 2 * M_PI);
    e = e + c * sin(kx * symbolic::X() + ky * symbolic::Y() + ph);
  }
  return e;
}

Check piola_identities(std::uint64_t seed) {
  Check c{1, "piola identities"};
  auto t0 = Clock::now();
  auto rng = make_rng(seed, 1);
  double worst = 0, worst_gap = 0;
  for (int k = 0; k < kPiolaMaps; ++k) {
    Flattening fl = random_flattening(rng, 4);
    worst_gap = std::max(worst_gap, fl.gap);
    PiolaMap m(std::make_shared<FlatteningMapping>(fl.psi));
    const double d = fl.graph.delta;
    TriMesh ref = mesh_domain(domains::HalfDisc{fl.psi->center(), 1.25 * d}, d / 8);
    TriMesh phys = mapped_mesh(ref, m.mapping());
    for (int j = 0; j < kPiolaPairs; ++j) {
      FieldPair pr;
      if (j == 0) {
        using namespace symbolic;
        pr.velocity = to_field(Vec{{sin(Y()), cos(X())}});
        pr.pressure = to_field(X() * Y());
      } else {
        pr = random_pair(rng, 3);
      }
      PiolaResiduals r = verify_piola_identities(m, ref, phys, pr.velocity, pr.pressure, kPiolaLevel);
      worst = std::max(worst, r.max());
    }
  }
  c.seconds = seconds_since(t0);
  c.put("max_residual", worst);
  c.put("max_gap", worst_gap);
  c.pass = worst <= kPiolaTol && worst_gap < 0.5 && c.seconds < kPiolaSeconds;
  return c;
}

Check decompositions(std::uint64_t seed) {
  Check c{2, "gradient decompositions"};
  auto rng = make_rng(seed, 2);
  double grad_err = 0, sym_err = 0, theta_out = 0;
  for (int k = 0; k < kPiolaMaps; ++k) {
    Flattening fl = random_flattening(rng, 4);
    PiolaMap m(std::make_shared<FlatteningMapping>(fl.psi));
    const Vec2 ctr = fl.psi->center();
    const double d = fl.graph.delta;
    auto pts = interior_sample_points(fl.extension->mesh(), kDecompPoints, static_cast<unsigned>(rng()));
    VectorField vref = symbolic::to_field(symbolic::Vec{{random_trig(rng, 2), random_trig(rng, 2)}});
    grad_err = std::max(grad_err, gradient_decomposition(m, vref, pts).max_error);
    sym_err = std::max(sym_err, symmetric_decomposition(m, vref, pts).max_error);
    for (int i = 0; i < kDecompPoints; ++i) {
      double r = uniform(rng, 1.0, 2.0) * d, a = uniform(rng, M_PI, 2 * M_PI);
      Vec2 x = ctr + r * Vec2(std::cos(a), std::sin(a));
      theta_out = std::max(theta_out, symmetric_parts(m, vref, x).theta_P.cwiseAbs().maxCoeff());
    }
  }
  c.put("gradient_error", grad_err);
  c.put("symmetric_error", sym_err);
  c.put("theta_outside", theta_out);
  c.pass = grad_err <= kDecompTol && sym_err <= kDecompTol && theta_out <= kThetaTol;
  return c;
}

Check jacobian_scaling() {
  Check c{3, "jacobian gap scaling"};
  std::vector<double> ds, gaps;
  bool accepted = true;
  for (int k = 1; k <= 6; ++k) {
    double d = std::pow(2.0, -k);
    Flattening fl = flatten_graph(named_graph("poly", d, 4), 1.0 / 16);
    ds.push_back(d);
    gaps.push_back(fl.gap);
    accepted = accepted && fl.gap < 0.5;
    c.put("gap_k" + std::to_string(k), fl.gap);
  }
  double slope = fit_slope(ds, gaps);
  c.put("slope", slope);
  c.pass = accepted && std::abs(slope - kSlopeTarget) <= kSlopeWindow;
  return c;
}

Check harmonic_extension_check(std::uint64_t seed) {
  Check c{4, "harmonic extension"};
  auto rng = make_rng(seed, 4);
  double dmp_excess = -1e300;
  auto dmp = [&](const ExtensionField& E, const RealFn& C, const BubbleDomain& b) {
    double cmax = 0;
    const int ns = 4001;
    for (int i = 0; i < ns; ++i) {
      double y = b.center.x() - b.top_half_width() + 2 * b.top_half_width() * i / (ns - 1);
      cmax = std::max(cmax, std::abs(C(y)));
    }
    for (const auto& e : E.mesh().boundary)
      if (e.tag == BoundaryTag::Flat) cmax = std::max(cmax, std::abs(C(E.mesh().vertices[e.a].x())));
    dmp_excess = std::max(dmp_excess, E.values().cwiseAbs().maxCoeff() - cmax);
  };
  for (int k = 0; k < kPiolaMaps; ++k) {
    Flattening fl = random_flattening(rng, 4);
    ExtensionField E = harmonic_extension(fl.compact, fl.bubble, fl.graph.delta / 16);
    dmp(E, fl.compact, fl.bubble);
  }
  // Self-convergence for a bump of height 1 on the unit bubble, on a nested
  // hierarchy so coarse vertices are fine vertices. The polynomial bump keeps
  // the preasymptotic range short; the steep cutoff profile needs h < 0.01.
  BubbleDomain b = make_bubble(Vec2::Zero(), 1);
  const double a = b.top_half_width();
  RealFn C = [a](double y) {
    double t = 1 - (y / a) * (y / a);
    return t > 0 ? t * t * t : 0.0;
  };
  std::vector<ExtensionField> lv;
  TriMesh m = mesh_domain(domains::Bubble{b}, 0.1);
  for (int l = 0; l < 4; ++l) {
    lv.push_back(harmonic_extension_on(C, b, std::make_shared<TriMesh>(m)));
    dmp(lv.back(), C, b);
    m = refine(m);
    make_delaunay(m);
  }
  std::vector<double> diffs;
  for (size_t l = 0; l + 1 < lv.size(); ++l) {
    double e = 0;
    const auto& coarse = lv[l];
    for (int i = 0; i < coarse.mesh().num_vertices(); ++i)
      e = std::max(e, std::abs(coarse.values()[i] - lv[l + 1].values()[i]));
    diffs.push_back(e);
    c.put("diff_" + std::to_string(l), e);
  }
  double order = std::log2(diffs[diffs.size() - 2] / diffs.back());
  c.put("dmp_excess", dmp_excess);
  c.put("order", order);
  c.pass = dmp_excess <= kDmpSlack && order >= kSelfOrder;
  return c;
}

Check gagliardo_exactness() {
  Check c{5, "gagliardo seminorm"};
  double rel = 0;
  for (double d : {1.0, 0.5, 0.1}) {
    double v = gagliardo_seminorm([](double x) { return x; }, Disc1{0, d}, 0.75, 4);
    rel = std::max(rel, std::abs(v - std::pow(4 * d * d, 0.25)) / std::pow(4 * d * d, 0.25));
  }
  // For f = x^2 the integrand (x^2 - y^2)^4 / (x - y)^4 = (x + y)^4 is smooth,
  // so a plain tensor midpoint sum over 1000 x 1000 cells is an oracle.
  const int N = 1000;
  double sum = 0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      double x = -1 + (i + 0.5) * 2.0 / N, y = -1 + (j + 0.5) * 2.0 / N;
      sum += std::pow(x + y, 4);
    }
  double oracle = std::pow(sum * (2.0 / N) * (2.0 / N), 0.25);
  double val = gagliardo_seminorm([](double x) { return x * x; }, Disc1{0, 1}, 0.75, 4);
  double orel = std::abs(val - oracle) / oracle;
  c.put("linear_rel_error", rel);
  c.put("square_value", val);
  c.put("square_oracle", oracle);
  c.put("square_rel_error", orel);
  c.pass = rel <= kGagliardoExact && orel <= kGagliardoOracle;
  return c;
}

Check kernel_detection() {
  Check c{6, "kernel detection"};
  int dims[3];
  const DomainSpec ds[3] = {domains::Disc{}, domains::Square{}, domains::Annulus{}};
  for (int i = 0; i < 3; ++i) {
    SlipSpace V(shared_mesh(ds[i], 0.2), 2, all_tags());
    dims[i] = kernel_basis(V).dim();
  }
  c.put("disc", dims[0]);
  c.put("square", dims[1]);
  c.put("annulus", dims[2]);
  StokesProblem p;
  p.mesh = shared_mesh(domains::Disc{}, 0.2);
  p.deflate = false;
  p.beta = [](const Vec2&) { return 1.0; };
  SolveReport r = solve(p);
  double unorm = r.u.lpNorm<Eigen::Infinity>() + r.p.lpNorm<Eigen::Infinity>();
  c.put("friction_kernel_dim", r.kernel_dim);
  c.put("friction_solution_norm", unorm);
  c.pass = dims[0] == 1 && dims[1] == 0 && dims[2] == 1 && r.kernel_dim == 0 && !r.deflated &&
           unorm <= 1e-10;
  return c;
}

Check manufactured_rates() {
  Check c{7, "manufactured slip rates"};
  auto t0 = Clock::now();
  RateTable t = convergence_study("square-slip", 4, 1.0 / 8);
  c.seconds = seconds_since(t0);
  bool ok = true;
  for (const auto& row : t.rows) {
    if (row.level == 0) continue;
    ok = ok && row.rate_u >= kRateULo && row.rate_u <= kRateUHi && row.rate_p >= kRatePLo &&
         row.rate_p <= kRatePHi;
  }
  ok = ok && t.fit_u >= kRateULo && t.fit_u <= kRateUHi && t.fit_p >= kRatePLo && t.fit_p <= kRatePHi;
  c.put("rate_u", t.fit_u);
  c.put("rate_p", t.fit_p);
  c.put("last_rate_u", t.rows.back().rate_u);
  c.put("last_rate_p", t.rows.back().rate_p);
  c.pass = ok && c.seconds < kRateSeconds;
  return c;
}

Check stability_estimators() {
  Check c{8, "inf-sup and korn"};
  std::vector<double> beta, korn;
  for (double h : {0.25, 0.125, 0.0625, 0.03125}) {
    auto m = shared_mesh(domains::Square{}, h);
    beta.push_back(estimate_infsup(m, all_tags()).beta_h);
    korn.push_back(estimate_korn(m, KornOptions{all_tags(), false, true}).lambda);
  }
  auto drift = [](const std::vector<double>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return (*hi - *lo) / *hi;
  };
  double db = drift(beta), dk = drift(korn);
  double minb = *std::min_element(beta.begin(), beta.end());
  double mink = *std::min_element(korn.begin(), korn.end());
  double free_disc = estimate_korn(shared_mesh(domains::Disc{}, 0.25), KornOptions{{}, false, false}).lambda;
  domains::BelowGraph unit{0, 1, 0, [](double) { return 1.0; }, [](double) { return 0.0; }};
  double one_side = estimate_korn(shared_mesh(unit, 0.125), KornOptions{{BoundaryTag::Flat}, false, true}).lambda;
  c.put("infsup_min", minb);
  c.put("infsup_drift", db);
  c.put("korn_min", mink);
  c.put("korn_drift", dk);
  c.put("korn_free_disc", free_disc);
  c.put("korn_one_side", one_side);
  c.pass = minb > 0 && mink > 0 && db < kDrift && dk < kDrift && std::abs(free_disc) <= kKornZero &&
           one_side > kKornPositive;
  return c;
}

Check reflection() {
  Check c{9, "reflection"};
  // Reflect-then-fold on a smooth half-plane field.
  using namespace symbolic;
  FieldPair half{to_field(Vec{{sin(2 * X()) + Y() * Y(), cos(X() + Y()) * Y() + X()}}),
                 to_field(cos(X()) * Y())};
  FieldPair back = fold_solution(reflect_data(half));
  double fold_err = 0;
  auto rng = make_rng(0, 9);
  for (int i = 0; i < 200; ++i) {
    Vec2 x(uniform(rng, -1, 1), uniform(rng, -1, 0));
    fold_err = std::max({fold_err, (back.velocity(x) - half.velocity(x)).cwiseAbs().maxCoeff(),
                         std::abs(back.pressure(x) - half.pressure(x))});
  }
  ReflectionConfig cfg;
  cfg.f = reflection_test_force(cfg.center, cfg.radius);
  ReflectionReport r = verify_reflection_consistency(cfg);
  c.put("fold_error", fold_err);
  c.put("flat_normal", r.flat_normal);
  c.put("difference", r.difference);
  c.put("disc_error", r.disc_error);
  c.put("energy_ratio", r.energy_ratio);
  c.pass = fold_err <= kFoldTol && r.flat_normal <= kFoldTol && r.difference <= kCrossFactor * r.disc_error &&
           std::abs(r.energy_ratio - 2) <= 2 * kEnergyRatioTol;
  return c;
}

Check lifting() {
  Check c{10, "lifting"};
  auto mesh = shared_mesh(domains::Disc{}, 0.125);
  auto run = [&](double amp) {
    StokesProblem p;
    p.mesh = mesh;
    p.phi = [amp](const Vec2& x) { return amp * std::cos(std::atan2(x.y(), x.x())); };
    return solve(p);
  };
  SolveReport r1 = run(1), r2 = run(2.5);
  double lin = (r2.u - 2.5 * r1.u).lpNorm<Eigen::Infinity>() / std::max(1.0, 2.5 * r1.u.lpNorm<Eigen::Infinity>());
  double linp = (r2.p - 2.5 * r1.p).lpNorm<Eigen::Infinity>() / std::max(1.0, 2.5 * r1.p.lpNorm<Eigen::Infinity>());
  c.put("slip_residual", std::max(r1.slip_residual, r2.slip_residual));
  c.put("linearity_u", lin);
  c.put("linearity_p", linp);
  c.put("velocity_max", r1.u.lpNorm<Eigen::Infinity>());
  c.pass = r1.slip_residual <= kLiftSlip && r2.slip_residual <= kLiftSlip && lin <= kLinearity &&
           linp <= kLinearity && r1.u.lpNorm<Eigen::Infinity>() > 0.1;
  return c;
}

Check exponent_ladders() {
  Check c{11, "exponent ladders"};
  ExponentLadder sl = slip_ladder(Num(4), 2);
  bool slip_ok = sl.inv(0) == Num(Rational(2, 3)) && sl.M == 1 && sl.inv(1) == Num(Rational(5, 12));
  ExponentLadder nl = navier_ladder(Num(4), 2, Num(3));
  bool fric_ok = nl.inv(1) == Num(Rational(5, 12));
  c.put("slip_t0", sl.t(0));
  c.put("slip_M", static_cast<double>(sl.M));
  c.put("slip_t1", sl.t(1));
  c.put("friction_t1", nl.t(1));
  bool chains = true;
  const std::pair<const char*, int> sn[] = {{"3", 2}, {"4", 2}, {"5", 2}, {"10", 2}, {"1000", 2},
                                            {"7/2", 3}, {"4", 3}, {"6", 3}};
  for (auto [s, n] : sn) {
    chains = chains && check_embedding_chain(slip_ladder(Num::parse(s), n)).holds;
    chains = chains && check_embedding_chain(navier_ladder(Num::parse(s), n, Num(n))).holds;
  }
  // Grid r = a/10, q = b/10 against an integer oracle.
  const int as[] = {12, 14, 16, 18, 20, 22, 25, 30, 35, 40};
  const int bs[] = {5, 10, 12, 15, 18, 20, 22, 25, 30, 40};
  const int n = 2;
  int mismatches = 0, cases[3] = {0, 0, 0};
  for (int a : as)
    for (int b : bs) {
      bool expect;
      if (a > 10 * n) {  // r > n: q >= r (n - 1) / n
        expect = b * n >= a * (n - 1), ++cases[0];
      } else if (a * (n - 1) >= 10 * n) {  // n' <= r <= n: q > n - 1
        expect = b > 10 * (n - 1), ++cases[1];
      } else {  // r < n': q > r'/n' = r (n - 1) / ((r - 1) n)
        expect = static_cast<long>(b) * (a - 10) * n > 10L * a * (n - 1), ++cases[2];
      }
      Num r = Num(Rational(a, 10)), q = Num(Rational(b, 10));
      if (friction_exponent_gate(r, n, q) != expect) ++mismatches;
    }
  c.put("chains_hold", chains);
  c.put("gate_mismatches", mismatches);
  c.put("gate_upper", cases[0]);
  c.put("gate_middle", cases[1]);
  c.put("gate_lower", cases[2]);
  c.pass = slip_ok && fric_ok && chains && mismatches == 0 && cases[0] > 0 && cases[1] > 0 && cases[2] > 0;
  return c;
}

Check partition_of_unity(std::uint64_t seed) {
  Check c{12, "partition of unity"};
  auto rng = make_rng(seed, 12);
  // Domain {-0.6 < x < 0.6, -0.6 < y < omega(x)}.
  RealFn w = [](double x) { return 0.06 * std::sin(2 * x) + 0.04 * std::cos(3 * x); };
  RealFn dw = [](double x) { return 0.12 * std::cos(2 * x) - 0.12 * std::sin(3 * x); };
  struct Patch {
    std::shared_ptr<PiolaMap> map;
    CutoffFunction psi, rho;
  };
  std::vector<Patch> patches;
  const double delta = 0.8;
  for (double xc : {-0.4, 0.0, 0.4}) {
    Flattening fl = flatten_graph(make_graph(w, dw, xc, delta, 4), 1.0 / 16);
    const RigidFrame& F = fl.graph.frame;
    auto inner = std::make_shared<FlatteningMapping>(fl.psi);
    auto map = std::make_shared<PiolaMap>(std::make_shared<ComposedMapping>(F, inner));
    Vec2 p = F.to_physical(fl.psi->center());
    // psi_i lives where the graph is flattened exactly; rho_i = 1 on its support.
    double r = 0.4 * fl.graph.delta;
    patches.push_back({map, make_cutoff(p, r), make_cutoff(p, 2 * r)});
  }
  patches.push_back({std::make_shared<PiolaMap>(std::make_shared<IdentityMapping>()),
                     make_cutoff(Vec2(0, -0.45), 0.6), make_cutoff(Vec2(0, -0.45), 1.2)});
  auto total = [&](const Vec2& x) {
    double s = 0;
    for (const auto& pt : patches) s += pt.psi(x);
    return s;
  };
  FieldPair pair = random_pair(rng, 3);
  std::vector<FieldPair> pieces;
  for (const auto& pt : patches) {
    CutoffFunction psi = pt.psi;
    ScalarFn phi = [psi, total](const Vec2& x) {
      double s = psi(x);
      return s == 0 ? 0.0 : s / total(x);
    };
    ScalarFn rho = [r = pt.rho](const Vec2& x) { return r(x); };
    pieces.push_back(restrict_localized(*pt.map, phi, extend_localized(*pt.map, rho, pair)));
  }
  double err = 0;
  int used = 0, tried = 0;
  while (used < 400 && tried < 100000) {
    ++tried;
    Vec2 x(uniform(rng, -0.6, 0.6), uniform(rng, -0.6, 0.2));
    if (x.y() >= w(x.x()) || total(x) < 1e-3) continue;
    ++used;
    Vec2 v = Vec2::Zero();
    double q = 0;
    for (const auto& pc : pieces) {
      v += pc.velocity(x);
      q += pc.pressure(x);
    }
    double scale = std::max(1.0, pair.velocity(x).norm() + std::abs(pair.pressure(x)));
    err = std::max({err, (v - pair.velocity(x)).norm() / scale, std::abs(q - pair.pressure(x)) / scale});
  }
  c.put("points", used);
  c.put("coverage", static_cast<double>(used) / tried);
  c.put("max_error", err);
  c.pass = used >= 400 && err <= kPouTol;
  return c;
}

std::vector<Check> acceptance(std::uint64_t seed) {
  std::vector<Check> out;
  for (int id = 1; id <= 12; ++id) out.push_back(run_check(id, seed));
  return out;
}

Check run_check(int id, std::uint64_t seed) {
  if (id < 1 || id > 12) throw InvalidInput("no acceptance check " + std::to_string(id));
  auto t0 = Clock::now();
  Check c;
  try {
    switch (id) {
      case 1: c = piola_identities(seed); break;
      case 2: c = decompositions(seed); break;
      case 3: c = jacobian_scaling(); break;
      case 4: c = harmonic_extension_check(seed); break;
      case 5: c = gagliardo_exactness(); break;
      case 6: c = kernel_detection(); break;
      case 7: c = manufactured_rates(); break;
      case 8: c = stability_estimators(); break;
      case 9: c = reflection(); break;
      case 10: c = lifting(); break;
      case 11: c = exponent_ladders(); break;
      case 12: c = partition_of_unity(seed); break;
    }
  } catch (const std::exception& e) {
    c.id = id;
    c.pass = false;
    c.note = e.what();
  }
  if (c.seconds == 0) c.seconds = seconds_since(t0);
  return c;
}

}  // namespace slipflow::suites
