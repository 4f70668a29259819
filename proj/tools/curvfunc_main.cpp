// curvfunc: command-line driver for the curvature-energy library.
//
// Usage: curvfunc <command> --config <path> [--out <dir>] [--seed <int>]
// Commands: curvature | verify | flow | trace-eq | hessian
// Exit codes: 0 success, 1 numerical/convergence failure, 2 config error.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "curvfunc/errors.hpp"
#include "curvfunc/exact.hpp"
#include "curvfunc/flows.hpp"
#include "curvfunc/functionals.hpp"
#include "curvfunc/models.hpp"
#include "curvfunc/report_io.hpp"
#include "curvfunc/trace_eq.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace curvfunc;

namespace {

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!cfg.is_object()) throw config_error("config root must be a JSON object");
  return cfg;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw config_error(std::string("config field has wrong type: ") + key);
  }
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 step keeps derived streams decorrelated
  std::uint64_t z = seed + salt * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

MetricField build_model(const json& cfg, std::uint64_t seed) {
  if (!cfg.contains("model")) throw config_error("config needs a \"model\" object");
  const json& m = cfg.at("model");
  const std::string family = get_or<std::string>(m, "family", "");
  const int resolution = get_or<int>(m, "resolution", 0);
  const int fd_order = get_or<int>(m, "fd_order", 4);
  if (family.empty()) throw config_error("model.family is required");
  if (resolution <= 0) throw config_error("model.resolution must be positive");

  MetricField g;
  if (family == "flat_torus") {
    const int n = get_or<int>(m, "dimension", 0);
    std::vector<double> periods =
        get_or<std::vector<double>>(m, "periods", std::vector<double>());
    if (periods.empty()) {
      if (n <= 0) throw config_error("flat_torus needs dimension or periods");
      periods.assign(static_cast<std::size_t>(n), 1.0);
    }
    g = flat_torus(static_cast<int>(periods.size()), periods, resolution, fd_order).metric;
  } else if (family == "round_sphere") {
    const int n = get_or<int>(m, "dimension", 2);
    const double radius = get_or<double>(m, "radius", 1.0);
    g = round_sphere_chart(n, radius, resolution, fd_order).metric;
  } else if (family == "product_spheres") {
    g = product_spheres(get_or<int>(m, "p", 2), get_or<double>(m, "r1", 1.0),
                        get_or<int>(m, "q", 2), get_or<double>(m, "r2", 1.0),
                        resolution, fd_order)
            .metric;
  } else {
    throw config_error("unknown model.family: " + family);
  }

  if (m.contains("conformal")) {
    const json& c = m.at("conformal");
    ScalarField f = random_scalar(g.chart(), get_or<double>(c, "amplitude", 0.1),
                                  get_or<int>(c, "max_frequency", 2),
                                  get_or<std::uint64_t>(c, "seed", sub_seed(seed, 1)));
    g = conformal_deform(g, f);
  }
  if (m.contains("perturbation")) {
    const json& p = m.at("perturbation");
    g = random_perturbation(g, get_or<double>(p, "amplitude", 0.05),
                            get_or<int>(p, "max_frequency", 3),
                            get_or<std::uint64_t>(p, "seed", sub_seed(seed, 2)));
  }
  if (get_or<bool>(m, "normalize_volume", false)) g = normalize_volume(g);
  return g;
}

fs::path prepare_out_dir(const json& cfg, const std::string& out_override) {
  std::string dir = out_override.empty() ? get_or<std::string>(cfg, "out", ".") : out_override;
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw config_error("cannot create output directory: " + dir);
  return p;
}

// ---------------------------------------------------------------- curvature

int run_curvature(const json& cfg, const fs::path& out, std::uint64_t seed) {
  MetricField g = build_model(cfg, seed);
  FunctionalReport rep = functional_report(g);
  const std::string doc = report_to_json(rep);
  write_text_file((out / "report.json").string(), doc);
  std::cout << doc;
  return 0;
}

// ------------------------------------------------------------------- verify

struct Check {
  std::string name;
  double defect = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

void add_check(std::vector<Check>& out, const std::string& name, double defect,
               double tolerance, bool invert = false) {
  Check c{name, defect, tolerance, false};
  c.pass = invert ? defect >= -tolerance : std::abs(defect) <= tolerance;
  out.push_back(c);
}

void suite_bianchi(const json& v, std::uint64_t seed, std::vector<Check>& out) {
  const int count = get_or<int>(v, "count", 10);
  const int res = get_or<int>(v, "resolution", 24);
  const double amp = get_or<double>(v, "amplitude", 0.05);
  const int freq = get_or<int>(v, "max_frequency", 3);
  const double tol = get_or<double>(v, "tolerance", 1e-6);
  // closed-form perturbations: the residual carries no stencil truncation
  ChartPtr chart = flat_torus(3, {1.0, 1.0, 1.0}, res).metric.chart();
  TrigSymTensor flat = trig_flat_metric(3);
  for (int i = 0; i < count; ++i) {
    TrigSymTensor g =
        trig_add(flat, trig_random_sym_tensor(chart, amp, freq, sub_seed(seed, 100 + i)));
    add_check(out, "bianchi/perturbed-T3-" + std::to_string(i),
              bianchi_residual_exact(g, chart), tol);
  }
}

void suite_variational(const json& v, std::uint64_t seed, std::vector<Check>& out) {
  const int count = get_or<int>(v, "count", 10);
  const double dt = get_or<double>(v, "dt", 1e-4);
  const double tol = get_or<double>(v, "tolerance", 1e-5);
  const double g_amp = get_or<double>(v, "metric_amplitude", 0.02);
  const double h_amp = get_or<double>(v, "direction_amplitude", 0.05);
  const int freq = get_or<int>(v, "max_frequency", 2);
  const int res2 = get_or<int>(v, "resolution_2d", 32);
  const int res3 = get_or<int>(v, "resolution_3d", 24);
  // closed-form (g, h): only the t-derivative is finite-differenced
  ChartPtr chart2 = flat_torus(2, {1.0, 1.0}, res2).metric.chart();
  ChartPtr chart3 = flat_torus(3, {1.0, 1.0, 1.0}, res3).metric.chart();
  for (int i = 0; i < count; ++i) {
    const bool three_d = i % 2 == 1;
    const ChartPtr& chart = three_d ? chart3 : chart2;
    TrigSymTensor g = trig_add(trig_flat_metric(three_d ? 3 : 2),
                               trig_random_sym_tensor(chart, g_amp, freq, sub_seed(seed, 200 + i)));
    TrigSymTensor h = trig_random_sym_tensor(chart, h_amp, freq, sub_seed(seed, 300 + i));
    VariationCheck chk = first_variation_checks_exact(g, h, chart, dt);
    const double combined = chk.volume_defect + chk.scalar_defect + chk.energy_defect;
    add_check(out,
              std::string("variational/") + (three_d ? "T3-" : "T2-") + std::to_string(i),
              combined, tol);
  }
}

void suite_pairing(const json& v, std::uint64_t seed, std::vector<Check>& out) {
  const int res = get_or<int>(v, "resolution", 24);
  const double amp = get_or<double>(v, "amplitude", 0.02);
  MetricField flat = flat_torus(3, {1.0, 1.0, 1.0}, res).metric;
  MetricField g = random_perturbation(flat, amp, 2, sub_seed(seed, 400));
  ScalarField phi = random_scalar(g.chart(), 1.0, 2, sub_seed(seed, 401));
  phi = add(phi, constant_field(g.chart(), project_constants(phi, g)), -1.0);

  const double p0 = pairing_fact(g, phi, 0.0);
  const double p1 = pairing_fact(g, phi, 1.0);
  add_check(out, "pairing/c-independence", p0 - p1, get_or<double>(v, "c_tolerance", 1e-10));

  SymTensorField h = conformal_direction(phi, g);
  const double direct = integrate(pointwise_inner(grad_S(g), h, g), g);
  // both sides are fourth-order stencil evaluations; the comparison is
  // scale-relative at the stencil truncation level
  add_check(out, "pairing/matches-gradient", p0 - direct,
            get_or<double>(v, "tolerance", 3e-5) * std::max(1.0, std::abs(p0)));
}

void suite_decomposition(const json& v, std::uint64_t seed, std::vector<Check>& out) {
  const int res = get_or<int>(v, "resolution", 24);
  MetricField flat = flat_torus(3, {1.0, 1.0, 1.0}, res).metric;
  MetricField g = random_perturbation(flat, 0.03, 2, sub_seed(seed, 500));
  SymTensorField h = random_sym_tensor(g.chart(), 0.5, 2, sub_seed(seed, 501));

  SymTensorField z = trace_free_part(h, g);
  ScalarField tr = metric_trace(h, g);
  SymTensorField rebuilt = add_scaled_tensor(z, tr, g.tensor(), 1.0 / g.dim());
  add_check(out, "decomposition/reconstruction", l2_norm(add(h, rebuilt, -1.0), g),
            get_or<double>(v, "tolerance", 1e-12));

  add_check(out, "decomposition/orthogonality", integrate(metric_trace(z, g), g),
            get_or<double>(v, "tolerance", 1e-12));

  const double q1 = second_variation_form(g, h);
  const double q2 = second_variation_form(g, scale(h, 2.0));
  add_check(out, "decomposition/quadratic-scaling", q2 - 4.0 * q1,
            1e-10 * std::max(1.0, std::abs(q1)));
}

void suite_kazdan_warner(const json& v, std::uint64_t seed, std::vector<Check>& out) {
  const int count = get_or<int>(v, "count", 5);
  // defaults put the quartic stencil truncation of the integral well below
  // the tolerance
  const int res = get_or<int>(v, "resolution", 96);
  const double amp = get_or<double>(v, "amplitude", 0.05);
  const double tol = get_or<double>(v, "tolerance", 1e-6);
  MetricField flat = flat_torus(2, {1.0, 1.0}, res).metric;
  for (int i = 0; i < count; ++i) {
    ScalarField f = random_scalar(flat.chart(), amp, 2, sub_seed(seed, 600 + i));
    MetricField g = conformal_deform(flat, f);
    VectorField x(g.chart());
    for (std::size_t node = 0; node < x.nodes(); ++node) x.comp(0)[node] = 1.0;
    const double cert = conformal_residual(x, g);
    add_check(out, "kazdan-warner/certify-" + std::to_string(i), cert,
              get_or<double>(v, "certify_tolerance", 1e-6));
    add_check(out, "kazdan-warner/integral-" + std::to_string(i),
              kazdan_warner_integral(g, x), tol);
  }
}

void suite_cauchy_schwarz(const json& v, std::uint64_t seed, std::vector<Check>& out) {
  const int res = get_or<int>(v, "resolution", 24);
  MetricField flat = flat_torus(3, {1.0, 1.0, 1.0}, res).metric;
  {
    ScalarField s = scalar_curvature(flat);
    const double gap = integrate(multiply(s, s), flat) / flat.volume() -
                       std::pow(project_constants(s, flat), 2);
    add_check(out, "cauchy-schwarz/flat-equality", gap, 1e-12);
  }
  MetricField g = random_perturbation(flat, 0.05, 3, sub_seed(seed, 700));
  ScalarField s = scalar_curvature(g);
  const double gap = integrate(multiply(s, s), g) / g.volume() -
                     std::pow(project_constants(s, g), 2);
  add_check(out, "cauchy-schwarz/nonnegative-gap", gap, 1e-12, /*invert=*/true);
}

int run_verify(const json& cfg, const fs::path& out, std::uint64_t seed) {
  const json v = cfg.contains("verify") ? cfg.at("verify") : json::object();
  std::vector<std::string> suites = get_or<std::vector<std::string>>(
      v, "suites",
      {"bianchi", "variational", "pairing", "decomposition", "kazdan-warner",
       "cauchy-schwarz"});
  if (suites.empty()) throw config_error("verify.suites must not be empty");
  if (get_or<bool>(v, "debug_sign_canary", false)) set_sign_canary(true);

  std::vector<Check> checks;
  for (const std::string& s : suites) {
    if (s == "bianchi") suite_bianchi(v, seed, checks);
    else if (s == "variational") suite_variational(v, seed, checks);
    else if (s == "pairing") suite_pairing(v, seed, checks);
    else if (s == "decomposition") suite_decomposition(v, seed, checks);
    else if (s == "kazdan-warner") suite_kazdan_warner(v, seed, checks);
    else if (s == "cauchy-schwarz") suite_cauchy_schwarz(v, seed, checks);
    else throw config_error("unknown verify suite: " + s);
  }
  set_sign_canary(false);

  std::ostringstream os;
  bool all_pass = true;
  for (const Check& c : checks) {
    all_pass &= c.pass;
    os << (c.pass ? "pass" : "FAIL") << ' ' << c.name
       << " defect=" << format_double(c.defect)
       << " tolerance=" << format_double(c.tolerance) << '\n';
  }
  os << (all_pass ? "VERIFY PASS" : "VERIFY FAIL") << " (" << checks.size()
     << " checks)\n";
  std::cout << os.str();
  write_text_file((out / "verify.txt").string(), os.str());
  return all_pass ? 0 : 1;
}

// --------------------------------------------------------------------- flow

int run_flow(const json& cfg, const fs::path& out, std::uint64_t seed) {
  const json f = cfg.contains("flow") ? cfg.at("flow") : json::object();
  const std::string kind = get_or<std::string>(f, "kind", "");
  const int steps = get_or<int>(f, "steps", 100);
  FlowOptions opt;
  opt.dt = get_or<double>(f, "dt", 1e-3);
  opt.solver_rel_tol = get_or<double>(f, "solver_rel_tol", 1e-10);

  MetricField g0 = build_model(cfg, seed);
  FlowTrace trace;
  if (kind == "gradient") trace = gradient_flow_run(g0, steps, opt);
  else if (kind == "yamabe") trace = yamabe_flow_run(g0, steps, opt);
  else if (kind == "perturbed-yamabe") trace = perturbed_yamabe_run(g0, steps, opt);
  else throw config_error("flow.kind must be gradient, yamabe or perturbed-yamabe");
  trace.seed = seed;

  write_text_file((out / "flow_trace.csv").string(), flow_trace_to_csv(trace));
  write_text_file((out / "final_report.json").string(),
                  report_to_json(functional_report(trace.final_metric)));
  if (trace.halted_early) {
    std::cerr << "flow halted early: " << trace.halt_reason << '\n';
    return 1;
  }
  std::cout << "flow completed: " << trace.rows.size() << " rows\n";
  return 0;
}

// ----------------------------------------------------------------- trace-eq

int run_trace_eq(const json& cfg, const fs::path& out, std::uint64_t /*seed*/) {
  const json t = cfg.contains("trace_eq") ? cfg.at("trace_eq") : json::object();
  const double c = get_or<double>(t, "c", 1.0);
  std::vector<double> u0s = get_or<std::vector<double>>(t, "u0", {0.5});
  const double periods_to_run = get_or<double>(t, "periods", 20.0);

  std::ostringstream meta;
  meta << "{\n  \"orbits\": [\n";
  std::vector<OdeOrbit> orbits;
  for (std::size_t i = 0; i < u0s.size(); ++i) {
    const double t_est = 2.0 * 3.14159265358979323846 / std::sqrt(std::max(c, 1e-12));
    OdeOrbit orbit = ode_integrate(c, u0s[i], 0.0, periods_to_run * t_est);
    write_text_file((out / ("orbit_" + std::to_string(i) + ".csv")).string(),
                    orbit_to_csv(orbit));
    meta << "    {\"u0\": " << format_double(u0s[i]) << ", \"K\": "
         << format_double(orbit.energy_K) << ", \"period\": "
         << (orbit.periodic ? format_double(orbit.period) : std::string("null"))
         << ", \"constant\": " << (orbit.constant ? "true" : "false")
         << ", \"energy_drift\": " << format_double(orbit.energy_drift) << "}"
         << (i + 1 < u0s.size() ? "," : "") << "\n";
    orbits.push_back(std::move(orbit));
  }
  meta << "  ]";

  if (get_or<bool>(t, "pde", false)) {
    // torus whose first period is the detected orbit period
    const OdeOrbit* periodic = nullptr;
    for (const OdeOrbit& o : orbits)
      if (o.periodic) { periodic = &o; break; }
    if (!periodic)
      throw config_error("trace_eq.pde requires at least one periodic orbit");
    const int res = get_or<int>(t, "resolution", 64);
    MetricField g =
        flat_torus(2, {periodic->period, periodic->period}, res).metric;
    ScalarField u_init = embed_ode_profile(*periodic, g.chart(), 0);
    ScalarField u = pde_solve_torus(g, c, u_init);
    write_text_file((out / "pde_solution.csv").string(), scalar_field_to_csv(u));
    double mn, mx;
    min_max(u, mn, mx);
    meta << ",\n  \"pde\": {\"residual\": " << format_double(pde_residual(g, c, u))
         << ", \"min_u\": " << format_double(mn)
         << ", \"max_u\": " << format_double(mx) << "}";
  }
  meta << "\n}\n";
  write_text_file((out / "trace_eq.json").string(), meta.str());
  std::cout << meta.str();
  return 0;
}

// ------------------------------------------------------------------ hessian

int run_hessian(const json& cfg, const fs::path& out, std::uint64_t seed) {
  const json hs = cfg.contains("hessian") ? cfg.at("hessian") : json::object();
  MetricField g = build_model(cfg, seed);
  const std::string direction = get_or<std::string>(hs, "direction", "random");

  double value = 0.0;
  if (direction == "random") {
    SymTensorField h = random_sym_tensor(g.chart(), get_or<double>(hs, "amplitude", 0.1),
                                         get_or<int>(hs, "max_frequency", 2),
                                         sub_seed(seed, 800));
    value = second_variation_form(g, h);
  } else if (direction == "pure-trace") {
    ScalarField phi = random_scalar(g.chart(), get_or<double>(hs, "amplitude", 0.1),
                                    get_or<int>(hs, "max_frequency", 2),
                                    sub_seed(seed, 801));
    value = second_variation_form(g, conformal_direction(phi, g));
  } else if (direction == "flow-start") {
    FlowOptions opt;
    FlowTrace trace = perturbed_yamabe_run(g, 0, opt);
    value = level_set_hessian_check(g, trace);
  } else {
    throw config_error("hessian.direction must be random, pure-trace or flow-start");
  }

  std::ostringstream os;
  os << "{\n  \"direction\": \"" << direction << "\",\n  \"value\": "
     << format_double(value) << "\n}\n";
  write_text_file((out / "hessian.json").string(), os.str());
  std::cout << os.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curvature-energy functional toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_override;
  std::optional<std::int64_t> seed_override;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_override, "output directory override");
    sub->add_option("--seed", seed_override, "seed override");
  };
  CLI::App* c_curv = app.add_subcommand("curvature", "functional report for a model");
  CLI::App* c_verify = app.add_subcommand("verify", "identity verification suites");
  CLI::App* c_flow = app.add_subcommand("flow", "run a geometric flow");
  CLI::App* c_trace = app.add_subcommand("trace-eq", "critical trace equation (ODE/PDE)");
  CLI::App* c_hess = app.add_subcommand("hessian", "second-variation diagnostics");
  for (CLI::App* sub : {c_curv, c_verify, c_flow, c_trace, c_hess}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    json cfg = load_config(config_path);
    std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 0);
    if (seed_override) seed = static_cast<std::uint64_t>(*seed_override);
    fs::path out = prepare_out_dir(cfg, out_override);

    if (app.got_subcommand(c_curv)) return run_curvature(cfg, out, seed);
    if (app.got_subcommand(c_verify)) return run_verify(cfg, out, seed);
    if (app.got_subcommand(c_flow)) return run_flow(cfg, out, seed);
    if (app.got_subcommand(c_trace)) return run_trace_eq(cfg, out, seed);
    if (app.got_subcommand(c_hess)) return run_hessian(cfg, out, seed);
    return 2;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
