// Acceptance suite: twelve numbered criteria, one pass/fail line each.
//
// Usage: acceptance [criterion ...]   (no arguments runs all twelve)
// Exit code: number of failing criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "curvfunc/errors.hpp"
#include "curvfunc/exact.hpp"
#include "curvfunc/flows.hpp"
#include "curvfunc/functionals.hpp"
#include "curvfunc/models.hpp"
#include "curvfunc/report_io.hpp"
#include "curvfunc/trace_eq.hpp"

using namespace curvfunc;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kBaseSeed = 42;

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + salt * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    pass &= ok;
    detail << (ok ? " [ok " : " [BAD ") << what << ']';
  }
};

double rel(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

double masked_scalar_defect(const ModelMetric& m) {
  ScalarField s = scalar_curvature(m.metric);
  double worst = 0.0;
  const GridChart& chart = s.grid();
  for (std::size_t i = 0; i < s.nodes(); ++i)
    if (chart.included(i)) worst = std::max(worst, std::abs(s[i] - m.oracle_scalar));
  return worst;
}

// ------------------------------------------------------------------------
// 1. Scalar curvature oracles at resolution 64, convergence slope 32 -> 64.
Outcome criterion_01() {
  Outcome out;
  struct Case {
    const char* name;
    double oracle;
    ModelMetric (*make)(int res);
  };
  const Case cases[] = {
      {"S2", 2.0, [](int r) { return round_sphere_chart(2, 1.0, r); }},
      {"S3", 6.0, [](int r) { return round_sphere_chart(3, 1.0, r); }},
      {"S2xS2", 4.0, [](int r) { return product_spheres(2, 1.0, 2, 1.0, r); }},
  };
  for (const Case& c : cases) {
    const double e32 = masked_scalar_defect(c.make(32));
    Timer t64;
    const double e64 = masked_scalar_defect(c.make(64));
    const double sec = t64.seconds();
    const double r64 = e64 / c.oracle;
    const double slope = std::log2(e32 / e64);
    std::ostringstream tag;
    tag << c.name << " rel=" << r64 << " slope=" << slope << " time=" << sec << "s";
    out.require(r64 < 1e-4 && slope >= 3.5 && sec < 30.0, tag.str());
  }
  return out;
}

// ------------------------------------------------------------------------
// 2. Contracted Bianchi identity on 10 seeded perturbed 3-tori. The seeded
// band-limited perturbations are kept in closed form, so every spatial
// derivative in delta Ric + 1/2 ds is exact and the residual measures the
// identity itself instead of stencil truncation.
std::string criterion_02_csv() {
  std::ostringstream csv;
  csv << "i,bianchi_residual\n";
  ChartPtr chart = flat_torus(3, {1.0, 1.0, 1.0}, 24).metric.chart();
  TrigSymTensor flat = trig_flat_metric(3);
  for (int i = 0; i < 10; ++i) {
    TrigSymTensor g = trig_add(
        flat, trig_random_sym_tensor(chart, 0.05, 3, sub_seed(kBaseSeed, 100 + i)));
    csv << i << ',' << format_double(bianchi_residual_exact(g, chart)) << '\n';
  }
  return csv.str();
}

Outcome criterion_02() {
  Outcome out;
  Timer t;
  std::istringstream in(criterion_02_csv());
  std::string line;
  std::getline(in, line);  // header
  double worst = 0.0;
  while (std::getline(in, line))
    worst = std::max(worst, std::stod(line.substr(line.find(',') + 1)));
  const double sec = t.seconds();
  out.require(worst < 1e-6, "max residual=" + format_double(worst));
  out.require(sec < 60.0, "time=" + format_double(sec) + "s");
  return out;
}

// ------------------------------------------------------------------------
// 3. First-variation suite: 10 seeded (g, h) pairs on T2 / T3, dt = 1e-4.
// The pairs stay in closed form so that only the t-derivative is finite-
// differenced; the defects then compare the variational formulas against
// the exact curvature of g + t h.
Outcome criterion_03() {
  Outcome out;
  ChartPtr chart2 = flat_torus(2, {1.0, 1.0}, 32).metric.chart();
  ChartPtr chart3 = flat_torus(3, {1.0, 1.0, 1.0}, 24).metric.chart();
  TrigSymTensor flat2 = trig_flat_metric(2);
  TrigSymTensor flat3 = trig_flat_metric(3);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const bool three_d = i % 2 == 1;
    const ChartPtr& chart = three_d ? chart3 : chart2;
    TrigSymTensor g =
        trig_add(three_d ? flat3 : flat2,
                 trig_random_sym_tensor(chart, 0.02, 2, sub_seed(kBaseSeed, 200 + i)));
    TrigSymTensor h = trig_random_sym_tensor(chart, 0.05, 2, sub_seed(kBaseSeed, 300 + i));
    VariationCheck chk = first_variation_checks_exact(g, h, chart, 1e-4);
    worst = std::max(worst, chk.volume_defect + chk.scalar_defect + chk.energy_defect);
  }
  out.require(worst < 1e-5, "max combined defect=" + format_double(worst));
  return out;
}

// ------------------------------------------------------------------------
// 4. Criticality of the Einstein / scalar-flat exemplars. Each exemplar has
// constant scalar curvature in closed form, so the curvature inputs to the
// gradient are exact and the residual tests the coefficient identity of the
// critical equation rather than stencil error.
Outcome criterion_04() {
  Outcome out;
  auto check = [&](const char* name, const MetricField& g, double s_value) {
    double lam = 0.0;
    const double res = critical_residual_einstein(g, s_value, &lam);
    out.require(res < 1e-5, std::string(name) + " residual=" + format_double(res));
    return lam;
  };
  check("flat-T3", flat_torus(3, {1.0, 1.0, 1.0}, 24).metric, 0.0);

  // unit-volume S3: s scales by Vol^(2/3) under the volume normalization
  MetricField s3 = normalize_volume(round_sphere_chart(3, 1.0, 32).metric);
  const double vol_s3 = 2.0 * kPi * kPi;
  const double lam_s3 = check("unit-vol-S3", s3, 6.0 * std::pow(vol_s3, 2.0 / 3.0));
  // closed form: lambda = (n-4)/(2n) mean(s^2) = -(1/6) (6 Vol^(2/3))^2
  out.require(rel(lam_s3, -6.0 * std::pow(vol_s3, 4.0 / 3.0)) < 1e-8,
              "S3 lambda closed form");

  MetricField prod = product_spheres(2, 1.0, 2, 1.0, 24).metric;
  const double lam_p = check("S2xS2", prod, 4.0);
  out.require(lam_p == 0.0, "S2xS2 lambda exactly 0 (n=4)");
  out.require(lambda_multiplier(flat_torus(4, {1, 1, 1, 1}, 16).metric) == 0.0,
              "flat-T4 lambda exactly 0");
  return out;
}

// ------------------------------------------------------------------------
// 5. Energy of the unit-area round 2-sphere equals 64 pi^2.
Outcome criterion_05() {
  Outcome out;
  const double r = 1.0 / std::sqrt(4.0 * kPi);
  const double got = energy_S(round_sphere_chart(2, r, 64).metric);
  out.require(rel(got, 64.0 * kPi * kPi) < 1e-4,
              "S=" + format_double(got) + " rel=" + format_double(rel(got, 64.0 * kPi * kPi)));
  return out;
}

// ------------------------------------------------------------------------
// 6. Perturbed Yamabe flow on T3: level-set and volume conservation plus
// the per-step orthogonality defect of the correction v.
MetricField criterion_06_start() {
  MetricField flat = flat_torus(3, {1.0, 1.0, 1.0}, 24).metric;
  // amplitude 0.02: the trace operator (2n-2) Lap + b_n (s - mean s) must
  // stay positive, which requires the curvature spread to remain well below
  // the smallest nonzero Laplacian eigenvalue. Band limit 1: the S-drift of
  // the discrete flow is the fourth-order truncation defect of the pairing
  // identity, which scales steeply with the start's frequency content.
  ScalarField f = random_scalar(flat.chart(), 0.02, 1, kBaseSeed);
  return normalize_volume(conformal_deform(flat, f));
}

FlowTrace criterion_06_run() {
  FlowOptions opt;
  opt.dt = 1e-3;
  opt.solver_rel_tol = 1e-8;
  return perturbed_yamabe_run(criterion_06_start(), 100, opt);
}

/// The trajectory is expensive; criterion 6 checks it and criterion 12
/// compares its CSV against one fresh rerun.
const FlowTrace& criterion_06_cached() {
  static const FlowTrace trace = criterion_06_run();
  return trace;
}

std::string criterion_06_csv() { return flow_trace_to_csv(criterion_06_cached()); }

Outcome criterion_06() {
  Outcome out;
  Timer t;
  const FlowTrace& trace = criterion_06_cached();
  out.require(!trace.halted_early, "completed 100 steps");
  const double s0 = trace.rows.front().S;
  double s_drift = 0.0, vol_drift = 0.0;
  for (const FlowRow& r : trace.rows) {
    s_drift = std::max(s_drift, std::abs(r.S - s0) / s0);
    vol_drift = std::max(vol_drift, std::abs(r.Vol - 1.0));
  }
  out.require(s_drift <= 1e-5, "S drift=" + format_double(s_drift));
  out.require(vol_drift <= 1e-6, "vol drift=" + format_double(vol_drift));
  out.require(trace.worst_ortho_defect <= 1e-9,
              "ortho defect=" + format_double(trace.worst_ortho_defect));
  const double sec = t.seconds();
  out.require(sec < 300.0, "time=" + format_double(sec) + "s");
  return out;
}

// ------------------------------------------------------------------------
// 7. n = 4 exclusion with a b_n = 0 diagnostic.
Outcome criterion_07() {
  Outcome out;
  MetricField flat4 = flat_torus(4, {1, 1, 1, 1}, 16).metric;
  MetricField g4 = conformal_deform(flat4, random_scalar(flat4.chart(), 0.05, 2, kBaseSeed));
  bool rejected = false, mentions_bn = false;
  try {
    perturbed_yamabe_run(g4, 1);
  } catch (const config_error& e) {
    rejected = true;
    mentions_bn = std::string(e.what()).find("b_n") != std::string::npos;
  }
  out.require(rejected, "T4 flow rejected");
  out.require(mentions_bn, "message cites b_n = 0");
  return out;
}

// ------------------------------------------------------------------------
// 8. Trace-equation ODE: periods, energy conservation, small-oscillation
// limit.
Outcome criterion_08() {
  Outcome out;
  for (double u0 : {0.25, 0.5, 0.75}) {
    OdeOrbit orbit = ode_integrate(1.0, u0, 0.0, 200.0);
    if (!orbit.periodic) {
      out.require(false, "u0=" + format_double(u0) + " not detected periodic");
      continue;
    }
    const double t_quad = ode_period_quadrature(1.0, orbit.energy_K);
    out.require(rel(orbit.period, t_quad) < 1e-6,
                "u0=" + format_double(u0) + " period rel=" +
                    format_double(rel(orbit.period, t_quad)));
  }
  OdeOrbit longrun = ode_integrate(1.0, 0.5, 0.0, 100.0 * 7.8);
  out.require(longrun.energy_drift < 1e-8,
              "energy drift=" + format_double(longrun.energy_drift));
  OdeOrbit small = ode_integrate(1.0, 0.99, 0.0, 100.0);
  out.require(small.periodic && rel(small.period, 2.0 * kPi) < 0.01,
              "small-oscillation period=" + format_double(small.period));
  return out;
}

// ------------------------------------------------------------------------
// 9. Trace-equation PDE: nonconstant solution from the embedded profile,
// constant solution from u = c.
Outcome criterion_09() {
  Outcome out;
  OdeOrbit orbit = ode_integrate(1.0, 0.5, 0.0, 100.0);
  out.require(orbit.periodic, "profile orbit periodic");
  MetricField g = flat_torus(2, {orbit.period, orbit.period}, 48).metric;
  ScalarField u = pde_solve_torus(g, 1.0, embed_ode_profile(orbit, g.chart(), 0));
  const double res = pde_residual(g, 1.0, u);
  double mn, mx;
  min_max(u, mn, mx);
  out.require(res < 1e-8, "nonconstant residual=" + format_double(res));
  out.require(mx - mn > 0.1, "span=" + format_double(mx - mn));

  ScalarField uc = pde_solve_torus(g, 1.0, constant_field(g.chart(), 1.0));
  double cmn, cmx;
  min_max(uc, cmn, cmx);
  out.require(cmx - cmn < 1e-10 && std::abs(cmn - 1.0) < 1e-10, "constant branch");
  return out;
}

// ------------------------------------------------------------------------
// 10. Kazdan-Warner identity for certified translation fields. Resolution
// and amplitude are chosen so the quartic stencil truncation of int X(s) dmu
// sits two decades below the bound.
Outcome criterion_10() {
  Outcome out;
  MetricField flat = flat_torus(2, {1.0, 1.0}, 96).metric;
  for (int i = 0; i < 5; ++i) {
    MetricField g = conformal_deform(
        flat, random_scalar(flat.chart(), 0.05, 2, sub_seed(kBaseSeed, 600 + i)));
    VectorField x(g.chart());
    for (std::size_t node = 0; node < x.nodes(); ++node) x.comp(0)[node] = 1.0;
    const double cert = conformal_residual(x, g);
    const double kw = std::abs(kazdan_warner_integral(g, x));
    out.require(cert < 1e-6 && kw < 1e-6,
                "seed " + std::to_string(i) + " cert=" + format_double(cert) +
                    " integral=" + format_double(kw));
  }
  return out;
}

// ------------------------------------------------------------------------
// 11. Gradient flow reaches a constant-scalar-curvature limit on T2.
FlowTrace criterion_11_trace() {
  MetricField flat = flat_torus(2, {1.0, 1.0}, 16).metric;
  ScalarField f = random_scalar(flat.chart(), 0.1, 1, kBaseSeed);
  MetricField g0 = normalize_volume(conformal_deform(flat, f));
  FlowOptions opt;
  opt.dt = 2e-5;
  return gradient_flow_run(g0, 2000, opt);
}

std::string criterion_11_csv() { return flow_trace_to_csv(criterion_11_trace()); }

Outcome criterion_11() {
  Outcome out;
  FlowTrace trace = criterion_11_trace();
  bool monotone = true;
  double best_tr = trace.rows.front().trace_residual;
  long first_below = -1;
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    if (i > 0 && trace.rows[i].S > trace.rows[i - 1].S * (1.0 + 1e-13)) monotone = false;
    best_tr = std::min(best_tr, trace.rows[i].trace_residual);
    if (first_below < 0 && trace.rows[i].trace_residual < 1e-6)
      first_below = trace.rows[i].step;
  }
  out.require(monotone, "S monotone");
  out.require(first_below >= 0 && first_below <= 2000,
              "trace residual < 1e-6 at step " + std::to_string(first_below) +
                  " (best " + format_double(best_tr) + ")");
  const FlowRow& last = trace.rows.back();
  out.require(last.max_s - last.min_s < 1e-5,
              "limit s span=" + format_double(last.max_s - last.min_s));
  return out;
}

// ------------------------------------------------------------------------
// 12. Determinism: criteria 2, 6 and 11 reproduce byte-identical CSVs.
Outcome criterion_12() {
  Outcome out;
  out.require(criterion_02_csv() == criterion_02_csv(), "criterion 2 CSV stable");
  out.require(criterion_06_csv() == flow_trace_to_csv(criterion_06_run()),
              "criterion 6 CSV stable");
  out.require(criterion_11_csv() == criterion_11_csv(), "criterion 11 CSV stable");
  return out;
}

struct Entry {
  int id;
  const char* name;
  Outcome (*fn)();
};

const Entry kEntries[] = {
    {1, "curvature-oracles", criterion_01},
    {2, "bianchi-identity", criterion_02},
    {3, "first-variation", criterion_03},
    {4, "exemplar-criticality", criterion_04},
    {5, "unit-sphere-energy", criterion_05},
    {6, "perturbed-flow-conservation", criterion_06},
    {7, "dimension-four-exclusion", criterion_07},
    {8, "trace-ode-periods", criterion_08},
    {9, "trace-pde-solutions", criterion_09},
    {10, "kazdan-warner", criterion_10},
    {11, "gradient-flow-limit", criterion_11},
    {12, "determinism", criterion_12},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const Entry& e : kEntries) {
    if (!wanted.empty() &&
        std::find(wanted.begin(), wanted.end(), e.id) == wanted.end())
      continue;
    Outcome out;
    Timer t;
    try {
      out = e.fn();
    } catch (const std::exception& ex) {
      out.pass = false;
      out.detail << " [BAD exception: " << ex.what() << ']';
    }
    failures += out.pass ? 0 : 1;
    std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << e.id << " ("
              << e.name << ")" << out.detail.str() << " " << format_double(t.seconds())
              << "s" << std::endl;
  }
  return failures;
}
