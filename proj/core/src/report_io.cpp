#include "curvfunc/report_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "curvfunc/errors.hpp"

namespace curvfunc {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // fold -0 into 0 for stable output
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string report_to_json(const FunctionalReport& rep) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"S\": " << format_double(rep.S) << ",\n";
  os << "  \"H\": " << format_double(rep.H) << ",\n";
  os << "  \"volume\": " << format_double(rep.volume) << ",\n";
  os << "  \"lambda\": " << format_double(rep.lambda) << ",\n";
  os << "  \"pi_s\": " << format_double(rep.pi_s) << ",\n";
  os << "  \"pi_s2\": " << format_double(rep.pi_s2) << ",\n";
  os << "  \"min_s\": " << format_double(rep.min_s) << ",\n";
  os << "  \"max_s\": " << format_double(rep.max_s) << ",\n";
  os << "  \"critical_residual\": " << format_double(rep.critical_residual) << ",\n";
  os << "  \"trace_residual\": " << format_double(rep.trace_residual) << ",\n";
  os << "  \"einstein_residual\": " << format_double(rep.einstein_residual) << ",\n";
  os << "  \"te_residual\": " << format_double(rep.te_residual) << ",\n";
  os << "  \"lemma3\": \"" << rep.lemma3 << "\"\n";
  os << "}\n";
  return os.str();
}

std::string flow_trace_to_csv(const FlowTrace& trace) {
  std::ostringstream os;
  os << "step,t,S,H,Vol,min_s,max_s,Lambda,v_norm,critical_residual,trace_residual,dt\n";
  for (const FlowRow& r : trace.rows) {
    os << r.step << ',' << format_double(r.t) << ',' << format_double(r.S) << ','
       << format_double(r.H) << ',' << format_double(r.Vol) << ','
       << format_double(r.min_s) << ',' << format_double(r.max_s) << ','
       << format_double(r.Lambda) << ',' << format_double(r.v_norm) << ','
       << format_double(r.critical_residual) << ',' << format_double(r.trace_residual)
       << ',' << format_double(r.dt) << '\n';
  }
  return os.str();
}

std::string orbit_to_csv(const OdeOrbit& orbit) {
  std::ostringstream os;
  os << "t,u,du_dt\n";
  for (std::size_t i = 0; i < orbit.times.size(); ++i)
    os << format_double(orbit.times[i]) << ',' << format_double(orbit.values[i]) << ','
       << format_double(orbit.derivs[i]) << '\n';
  return os.str();
}

std::string scalar_field_to_csv(const ScalarField& f) {
  const GridChart& chart = f.grid();
  std::ostringstream os;
  for (int a = 0; a < chart.dim; ++a) os << 'x' << a << ',';
  os << "value\n";
  std::array<int, kMaxDim> ix{};
  for (std::size_t node = 0; node < chart.node_count; ++node) {
    for (int a = 0; a < chart.dim; ++a)
      os << format_double(chart.coord(a, ix[a])) << ',';
    os << format_double(f[node]) << '\n';
    for (int a = 0; a < chart.dim; ++a) {
      if (++ix[a] < chart.res[a]) break;
      ix[a] = 0;
    }
  }
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw config_error("write failed: " + path);
}

}  // namespace curvfunc
