#pragma once

#include <string>

#include "curvfunc/flows.hpp"
#include "curvfunc/functionals.hpp"
#include "curvfunc/trace_eq.hpp"

namespace curvfunc {

/// Shortest representation of a double that round-trips exactly.
std::string format_double(double v);

/// Flat JSON object with a fixed key order:
/// S, H, volume, lambda, pi_s, pi_s2, min_s, max_s, critical_residual,
/// trace_residual, einstein_residual, te_residual, lemma3.
std::string report_to_json(const FunctionalReport& rep);

/// CSV with the fixed header
/// step,t,S,H,Vol,min_s,max_s,Lambda,v_norm,critical_residual,trace_residual,dt
std::string flow_trace_to_csv(const FlowTrace& trace);

/// CSV of (t, u, du/dt) samples.
std::string orbit_to_csv(const OdeOrbit& orbit);

/// CSV of node coordinates and values: x0,...,x{n-1},value.
std::string scalar_field_to_csv(const ScalarField& f);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace curvfunc
