#include "cli.hpp"

#include "suites.hpp"

#include "slipflow/exponents.hpp"
#include "slipflow/flatten.hpp"
#include "slipflow/halfspace.hpp"
#include "slipflow/mesh.hpp"
#include "slipflow/piola.hpp"
#include "slipflow/stokes.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace slipflow::cli {

namespace {

// Rate window for `solve` and `converge`, same as the acceptance check.
constexpr double kRateULo = 1.7, kRateUHi = 2.2, kRatePLo = 1.6, kRatePHi = 2.2;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"domain", [](RunConfig& c, const std::string& v) { c.domain = v; }},
      {"h", [](RunConfig& c, const std::string& v) { c.h = std::stod(v); }},
      {"refine", [](RunConfig& c, const std::string& v) { c.refine = std::stoi(v); }},
      {"s", [](RunConfig& c, const std::string& v) { c.s = v; }},
      {"n", [](RunConfig& c, const std::string& v) { c.n = v; }},
      {"q", [](RunConfig& c, const std::string& v) { c.q = v; }},
      {"case", [](RunConfig& c, const std::string& v) { c.case_id = v; }},
      {"graph", [](RunConfig& c, const std::string& v) { c.graph = v; }},
      {"delta", [](RunConfig& c, const std::string& v) { c.delta = std::stod(v); }},
      {"level", [](RunConfig& c, const std::string& v) { c.level = std::stoi(v); }},
      {"check", [](RunConfig& c, const std::string& v) { c.check = std::stoi(v); }},
      {"output", [](RunConfig& c, const std::string& v) { c.output = v; }},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = std::stoull(v); }},
  };
  return table;
}

std::string config_echo(const RunConfig& c) {
  std::ostringstream os;
  os << "subcommand=" << c.subcommand << " domain=" << c.domain << " h=" << num(c.h)
     << " refine=" << c.refine << " s=" << c.s << " n=" << c.n << " q=" << (c.q.empty() ? "-" : c.q)
     << " case=" << c.case_id << " graph=" << c.graph << " delta=" << num(c.delta)
     << " level=" << c.level << " check=" << c.check;
  return os.str();
}

DomainSpec parse_domain(const std::string& name) {
  if (name == "square") return domains::Square{};
  if (name == "disc") return domains::Disc{};
  if (name == "half-disc") return domains::HalfDisc{};
  if (name == "annulus") return domains::Annulus{};
  if (name == "bubble") return domains::Bubble{make_bubble(Vec2::Zero(), 1)};
  if (name == "below-graph")
    return domains::BelowGraph{0, 1, -0.5, [](double x) { return 0.1 * std::sin(M_PI * x); },
                               [](double x) { return 0.1 * M_PI * std::cos(M_PI * x); }};
  throw UsageError("unknown domain '" + name + "'");
}

void validate(const RunConfig& c) {
  if (!(c.h > 0)) throw UsageError("--h must be positive");
  if (c.refine < 0) throw UsageError("--refine must be >= 0");
  if (!(c.delta > 0)) throw UsageError("--delta must be positive");
  if (c.level < 1) throw UsageError("--level must be >= 1");
  if (c.check < 0 || c.check > 12) throw UsageError("--check must lie in 0..12");
  Num s = Num::parse(c.s), n = Num::parse(c.n);
  if (!n.exact() || n.rational().den != 1 || n < Num(2)) throw UsageError("--n must be an integer >= 2");
  if (!(s > n)) throw UsageError("--s must exceed --n");
  if (!c.q.empty() && !(Num::parse(c.q) > n - Num(1))) throw UsageError("--q must exceed n - 1");
}

struct Output {
  std::ostringstream csv;
  bool pass = true;
};

void header(std::ostream& os, const RunConfig& c) {
  os << "# slipflow " << kVersion << "\n# seed " << c.seed << "\n# config " << config_echo(c) << "\n";
}

void cmd_mesh(const RunConfig& c, Output& o) {
  TriMesh m = mesh_domain(parse_domain(c.domain), c.h);
  o.csv << "level,h,vertices,triangles,boundary_edges,min_angle_deg,area\n";
  for (int l = 0;; ++l) {
    validate_mesh(m);
    o.csv << l << "," << num(m.h) << "," << m.num_vertices() << "," << m.num_triangles() << ","
          << m.boundary.size() << "," << num(m.min_angle() * 180 / M_PI) << "," << num(m.area()) << "\n";
    if (l == c.refine) break;
    m = refine(m);
  }
  if (!c.output.empty()) {
    std::ofstream f(std::filesystem::path(c.output) / "mesh.txt");
    write_mesh(f, m);
  }
}

void cmd_flatten(const RunConfig& c, Output& o) {
  Flattening fl = flatten_graph(suites::named_graph(c.graph, c.delta, Num::parse(c.s).value()), 1.0 / 16, true);
  const Diffeomorphism& d = *fl.psi;
  auto pts = interior_sample_points(fl.extension->mesh(), 100, static_cast<unsigned>(c.seed));
  double inv_err = 0, minJ = 1e300;
  int max_its = 0;
  for (const Vec2& x : pts) {
    int its = 0;
    inv_err = std::max(inv_err, (d.inverse(d.apply(x), &its) - x).norm());
    max_its = std::max(max_its, its);
    minJ = std::min(minJ, d.jacobian(x));
  }
  o.csv << "graph,delta,halvings,gap,w1inf,min_jacobian,inverse_error,newton_iterations\n"
        << c.graph << "," << num(fl.graph.delta) << "," << fl.halvings << "," << num(fl.gap) << ","
        << num(w1inf_seminorm(d)) << "," << num(minJ) << "," << num(inv_err) << "," << max_its << "\n";
  o.pass = fl.gap < 0.5 && minJ > 0 && inv_err <= 1e-10 && max_its <= 50;
  if (!c.output.empty()) {
    std::ofstream f(std::filesystem::path(c.output) / "extension.txt");
    write_mesh(f, fl.extension->mesh(),
               {{"extension", std::vector<double>(fl.extension->values().data(),
                                                  fl.extension->values().data() + fl.extension->values().size())}});
  }
}

void cmd_piola(const RunConfig& c, Output& o) {
  Flattening fl = flatten_graph(suites::named_graph(c.graph, c.delta, Num::parse(c.s).value()), 1.0 / 16, true);
  PiolaMap m(std::make_shared<FlatteningMapping>(fl.psi));
  const double d = fl.graph.delta;
  TriMesh ref = mesh_domain(domains::HalfDisc{fl.psi->center(), 1.25 * d}, d / 8);
  TriMesh phys = ref;
  for (auto& v : phys.vertices) v = m.mapping().apply(v);
  phys.geometry = nullptr;
  using namespace symbolic;
  VectorField v = to_field(Vec{{sin(Y()), cos(X())}});
  ScalarField q = to_field(X() * Y());
  PiolaResiduals r = verify_piola_identities(m, ref, phys, v, q, c.level);
  auto pts = interior_sample_points(fl.extension->mesh(), 100, static_cast<unsigned>(c.seed));
  double ge = gradient_decomposition(m, v, pts).max_error;
  double se = symmetric_decomposition(m, v, pts).max_error;
  o.csv << "identity,residual,tolerance,pass\n";
  auto row = [&](const char* name, double val, double tol) {
    bool ok = val <= tol;
    o.pass = o.pass && ok;
    o.csv << name << "," << num(val) << "," << num(tol) << "," << (ok ? 1 : 0) << "\n";
  };
  row("gradient", r.grad, 1e-6);
  row("divergence", r.div, 1e-6);
  row("flux", r.flux, 1e-6);
  row("flux_edge", r.flux_edge, 1e-6);
  row("gradient_decomposition", ge, 1e-6);
  row("symmetric_decomposition", se, 1e-6);
}

bool in_window(const RateTable& t) {
  bool ok = t.fit_u >= kRateULo && t.fit_u <= kRateUHi && t.fit_p >= kRatePLo && t.fit_p <= kRatePHi;
  return ok;
}

void rate_csv(const RateTable& t, Output& o) {
  o.csv << "level,h,err_u_H1,err_p_L2,rate_u,rate_p\n";
  for (const auto& r : t.rows)
    o.csv << r.level << "," << num(r.h) << "," << num(r.err_u) << "," << num(r.err_p) << ","
          << num(r.rate_u) << "," << num(r.rate_p) << "\n";
  o.csv << "fit,,,," << num(t.fit_u) << "," << num(t.fit_p) << "\n";
}

void cmd_solve(const RunConfig& c, Output& o) {
  ManufacturedCase mc = manufactured_case(c.case_id);
  if (c.refine >= 2) {
    RateTable t = convergence_study(c.case_id, c.refine, c.h);
    rate_csv(t, o);
    o.pass = c.case_id == "zero" ? t.rows.back().err_u <= 1e-10 && t.rows.back().err_p <= 1e-10 : in_window(t);
    return;
  }
  TriMesh m0 = mesh_domain(mc.domain, c.h);
  for (int l = 0; l < c.refine; ++l) m0 = refine(m0);
  auto mesh = std::make_shared<TriMesh>(m0);
  SolveReport r = solve(make_problem(mc, mesh));
  Errors e = discretization_errors(r, mc.u, mc.p);
  o.csv << "case,h,velocity_dofs,pressure_dofs,residual,kernel_dim,g_defect,kernel_defect,energy,"
           "friction_energy,slip_residual,err_u_H1,err_p_L2\n"
        << c.case_id << "," << num(mesh->h) << "," << r.u.size() << "," << r.p.size() << ","
        << num(r.residual) << "," << r.kernel_dim << "," << num(r.g_defect) << "," << num(r.kernel_defect)
        << "," << num(r.energy) << "," << num(r.friction_energy) << "," << num(r.slip_residual) << ","
        << num(e.u_h1) << "," << num(e.p_l2) << "\n";
  o.pass = r.residual <= 1e-10 && r.slip_residual <= 1e-12;
  if (!c.output.empty()) {
    std::ofstream f(std::filesystem::path(c.output) / "solution.txt");
    const int nv = mesh->num_vertices();
    std::vector<double> ux(nv), uy(nv), p(nv);
    for (int i = 0; i < nv; ++i) ux[i] = r.u[2 * i], uy[i] = r.u[2 * i + 1], p[i] = r.p[i];
    write_mesh(f, *mesh, {{"u_x", ux}, {"u_y", uy}, {"p", p}});
  }
}

void checks_csv(const std::vector<suites::Check>& checks, Output& o, std::ostream& err) {
  o.csv << "id,name,pass,values,note\n";
  for (const auto& ch : checks) {
    o.pass = o.pass && ch.pass;
    o.csv << ch.id << "," << ch.name << "," << (ch.pass ? 1 : 0) << ",";
    for (size_t i = 0; i < ch.values.size(); ++i)
      o.csv << (i ? ";" : "") << ch.values[i].first << "=" << num(ch.values[i].second);
    std::string note = ch.note;
    std::replace(note.begin(), note.end(), ',', ';');
    o.csv << "," << note << "\n";
    err << "check " << ch.id << " " << std::fixed << std::setprecision(2) << ch.seconds << " s\n"
        << std::defaultfloat;
  }
}

void cmd_converge(const RunConfig& c, Output& o, std::ostream& err) {
  checks_csv({suites::run_check(7, c.seed), suites::run_check(8, c.seed)}, o, err);
}

void cmd_reflect(const RunConfig& c, Output& o) {
  ReflectionConfig cfg;
  cfg.h = c.h;
  cfg.f = reflection_test_force(cfg.center, cfg.radius);
  ReflectionReport r = verify_reflection_consistency(cfg);
  o.csv << "quantity,value,bound,pass\n";
  auto row = [&](const char* name, double v, double bound, bool ok) {
    o.pass = o.pass && ok;
    o.csv << name << "," << num(v) << "," << num(bound) << "," << (ok ? 1 : 0) << "\n";
  };
  row("difference", r.difference, 5 * r.disc_error, r.cross_ok);
  row("energy_ratio", r.energy_ratio, 2, r.energy_ok);
  row("flat_normal", r.flat_normal, 1e-14, r.flat_normal <= 1e-14);
  row("parity_error", r.parity_error, 1e-10, r.parity_error <= 1e-10);
  o.csv << "energy_half," << num(r.energy_half) << ",,\nenergy_full," << num(r.energy_full)
        << ",,\nkernel_dim_full," << r.kernel_dim_full << ",,\n";
}

void cmd_ladders(const RunConfig& c, Output& o) {
  Num s = Num::parse(c.s);
  int n = static_cast<int>(Num::parse(c.n).rational().num);
  ExponentLadder L = c.q.empty() ? slip_ladder(s, n) : navier_ladder(s, n, Num::parse(c.q));
  ChainReport ch = check_embedding_chain(L);
  o.csv << "# M " << L.M << " M_first " << L.M_first << " chain " << (ch.holds ? "holds" : "fails") << "\n";
  o.csv << "flavor,m,inv_t,t,M,M_first\n";
  const char* flavor = L.flavor == LadderFlavor::Slip ? "slip" : "friction";
  if (L.inv_t_minus1) {
    Num inv = *L.inv_t_minus1;
    o.csv << flavor << ",-1," << inv.str() << "," << num(1 / inv.value()) << "," << L.M << "," << L.M_first << "\n";
  }
  const std::int64_t last = std::min<std::int64_t>(L.M, 4095);
  for (std::int64_t m = 0; m <= last; ++m)
    o.csv << flavor << "," << m << "," << L.inv(m).str() << "," << num(L.t(m)) << "," << L.M << ","
          << L.M_first << "\n";
  o.pass = ch.holds && L.t(L.M) >= 2;
}

void cmd_all(const RunConfig& c, Output& o, std::ostream& err) {
  std::vector<suites::Check> checks;
  if (c.check > 0)
    checks.push_back(suites::run_check(c.check, c.seed));
  else
    checks = suites::acceptance(c.seed);
  checks_csv(checks, o, err);
}

}  // namespace

void apply_config(std::istream& in, RunConfig& cfg) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const std::logic_error&) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Slip and friction Stokes verification toolkit", "slipflow"};
  app.set_help_flag("--help", "print usage");  // frees "--h" for the mesh size
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--domain", cfg.domain, "square | disc | half-disc | annulus | bubble | below-graph");
  app.add_option("--h", cfg.h, "target mesh size");
  app.add_option("--refine", cfg.refine, "refinements (solve: number of levels when >= 2)");
  app.add_option("--s", cfg.s, "regularity exponent s");
  app.add_option("--n", cfg.n, "dimension n");
  app.add_option("--q", cfg.q, "friction exponent q (ladders: friction flavor)");
  app.add_option("--case", cfg.case_id, "manufactured case id");
  app.add_option("--graph", cfg.graph, "graph profile: sin | poly | bump");
  app.add_option("--delta", cfg.delta, "graph disc radius");
  app.add_option("--level", cfg.level, "quadrature level");
  app.add_option("--check", cfg.check, "all: run only this acceptance check");
  app.add_option("--output", cfg.output, "directory for CSV and mesh files");
  app.add_option("--seed", cfg.seed, "seed for randomized checks");
  app.add_option("--config", cfg.config, "key = value file, overrides flags");
  const char* subs[][2] = {{"mesh", "build and refine a mesh"},
                           {"flatten", "flattening map of a graph"},
                           {"piola-check", "Piola identities and decompositions"},
                           {"solve", "manufactured solve or rate table"},
                           {"converge", "rate table and stability estimators"},
                           {"reflect-check", "half-disc reflection consistency"},
                           {"ladders", "smoothing exponent ladder"},
                           {"all", "every acceptance check"}};
  for (auto& s : subs) app.add_subcommand(s[0], s[1])->callback([&cfg, name = s[0]] { cfg.subcommand = name; });

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (!cfg.config.empty()) {
      std::ifstream f(cfg.config);
      if (!f) throw UsageError("cannot read config file " + cfg.config);
      apply_config(f, cfg);
    }
    validate(cfg);
    manufactured_case(cfg.case_id);
    if (!cfg.output.empty()) std::filesystem::create_directories(cfg.output);
    if (cfg.subcommand == "mesh") parse_domain(cfg.domain);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  Output o;
  auto t0 = std::chrono::steady_clock::now();
  try {
    const std::string& s = cfg.subcommand;
    if (s == "mesh") cmd_mesh(cfg, o);
    else if (s == "flatten") cmd_flatten(cfg, o);
    else if (s == "piola-check") cmd_piola(cfg, o);
    else if (s == "solve") cmd_solve(cfg, o);
    else if (s == "converge") cmd_converge(cfg, o, err);
    else if (s == "reflect-check") cmd_reflect(cfg, o);
    else if (s == "ladders") cmd_ladders(cfg, o);
    else cmd_all(cfg, o, err);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << "\n";
    return 1;
  }
  err << cfg.subcommand << ": "
      << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";

  std::ostringstream doc;
  header(doc, cfg);
  doc << o.csv.str();
  if (cfg.output.empty()) {
    out << doc.str();
  } else {
    auto path = std::filesystem::path(cfg.output) / (cfg.subcommand + ".csv");
    std::ofstream f(path);
    f << doc.str();
    out << path.string() << "\n";
  }
  return o.pass ? 0 : 1;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace slipflow::cli
