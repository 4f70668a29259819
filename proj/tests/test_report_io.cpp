#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "curvfunc/models.hpp"
#include "curvfunc/report_io.hpp"
#include "helpers.hpp"

using namespace curvfunc;

TEST_CASE("format_double round-trips and normalizes special values") {
  for (double v : {0.0, 1.0, -1.5, 0.1, 1e-300, 6.02214076e23, 3.14159265358979323846}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  // shortest form, not fixed precision
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("report JSON has the fixed key order") {
  FunctionalReport rep = functional_report(test_helpers::flat_t3());
  std::string json = report_to_json(rep);
  const char* keys[] = {"\"S\"",
                        "\"H\"",
                        "\"volume\"",
                        "\"lambda\"",
                        "\"pi_s\"",
                        "\"pi_s2\"",
                        "\"min_s\"",
                        "\"max_s\"",
                        "\"critical_residual\"",
                        "\"trace_residual\"",
                        "\"einstein_residual\"",
                        "\"te_residual\"",
                        "\"lemma3\""};
  std::size_t pos = 0;
  for (const char* k : keys) {
    const std::size_t at = json.find(k, pos);
    REQUIRE(at != std::string::npos);
    pos = at;
  }
  CHECK(json.find("\"lemma3\": \"constant\"") != std::string::npos);
}

TEST_CASE("flow CSV uses the pinned header and one row per trace entry") {
  FlowTrace trace = gradient_flow_run(test_helpers::flat_t3(), 2);
  std::string csv = flow_trace_to_csv(trace);
  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line ==
        "step,t,S,H,Vol,min_s,max_s,Lambda,v_norm,critical_residual,trace_residual,dt");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == static_cast<int>(trace.rows.size()));
}

TEST_CASE("orbit and scalar field CSV headers") {
  OdeOrbit orbit = ode_integrate(1.0, 0.5, 0.0, 10.0);
  std::string ocsv = orbit_to_csv(orbit);
  CHECK(ocsv.rfind("t,u,du_dt\n", 0) == 0);

  MetricField g = test_helpers::flat_t2(16);
  ScalarField f = constant_field(g.chart(), 2.5);
  std::string fcsv = scalar_field_to_csv(f);
  CHECK(fcsv.rfind("x0,x1,value\n", 0) == 0);
  CHECK(fcsv.find(",2.5\n") != std::string::npos);
}

TEST_CASE("CSV serialization is byte-stable across repeated calls") {
  MetricField flat = flat_torus(2, {1.0, 1.0}, 16).metric;
  MetricField g0 = conformal_deform(flat, random_scalar(flat.chart(), 0.05, 2, 77));
  FlowOptions opt;
  opt.dt = 1e-3;
  std::string a = flow_trace_to_csv(gradient_flow_run(g0, 5, opt));
  std::string b = flow_trace_to_csv(gradient_flow_run(g0, 5, opt));
  CHECK(a == b);
}

TEST_CASE("write_text_file writes exactly the given bytes") {
  const std::string path = "test_report_io_tmp.txt";
  const std::string payload = "alpha\nbeta\n";
  write_text_file(path, payload);
  std::ifstream in(path, std::ios::binary);
  std::stringstream got;
  got << in.rdbuf();
  CHECK(got.str() == payload);
  std::remove(path.c_str());
  CHECK_THROWS_AS(write_text_file("no_such_dir/xyz/file.txt", payload), config_error);
}
