#pragma once

#include "moprox/solvers.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace moprox {

/// %.17g, so that every written double reads back bit-identical.
std::string format_double(double v);

/// Header `k,stationarity,t,accepted,F_1..F_m`, plus `Fz_1..Fz_m` for MFISTA.
/// One row per record, terminal record included.
void write_trace_csv(const SolverTrace& trace, std::ostream& out);
std::string trace_csv(const SolverTrace& trace);

/// Sidecar for one trace CSV: everything audit_trace needs that the CSV lacks.
struct RunManifest {
    Algorithm algorithm = Algorithm::kPgm;
    std::string problem;
    int start_index = 0;
    TraceStatus status = TraceStatus::kMaxIter;
    int iterations = 0;
    int objectives = 0;
    double epsilon = 0.0;
    double ell_initial = 0.0;
    double ell_final = 0.0;
    int safeguard_triggers = 0;
    double wall_ms = 0.0;
    /// The last CSV row is the record on which the run stopped.
    bool terminal_last = false;
    Vector x0;
    Vector F_x0;
    Vector final_x;
    Vector final_F;
    std::string trace_file;
};

RunManifest make_manifest(const SolverTrace& trace, std::string problem, int start_index, double epsilon,
                          bool record_timing, std::string trace_file);
std::string manifest_json(const RunManifest& manifest);
/// Throws ParseError on malformed or incomplete manifests.
RunManifest parse_manifest(std::string_view text);

/// Rebuilds the audit-relevant part of a trace (k, t, stationarity, accepted,
/// F_x, F_z) from CSV text plus its manifest. Throws ParseError.
SolverTrace read_trace(std::string_view csv, const RunManifest& manifest);

struct PlotSeries {
    std::string label;
    std::vector<double> xs;
    std::vector<double> ys;
};

/// Standalone SVG line chart with the data embedded as polylines.
std::string render_svg_plot(const std::vector<PlotSeries>& series, const std::string& title,
                            const std::string& x_label, const std::string& y_label);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace moprox
