#pragma once

#include "moprox/solvers.hpp"
#include "moprox/testbed.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace moprox {

/// Invalid configuration. line/column are 1-based; 0 when unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, int line, int column, const std::string& message);
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

enum class ProblemKind { kProblem1, kProblem2, kProblem3 };

struct ProblemSpec {
    ProblemKind kind = ProblemKind::kProblem1;
    int n = 10;
    // problem3 only
    std::string image_path;  // empty selects the synthetic image
    int synthetic_size = 32;
    int kernel_size = 9;
    double blur_sigma = 4.0;
    double noise_sigma = 1e-3;
    double lambda_reg = 2e-5;
};

struct StartsSpec {
    int count = 1;
    double box_lower = -2.0;
    double box_upper = 2.0;
    std::optional<std::uint64_t> seed;
};

struct RunConfig {
    ProblemSpec problem;
    std::vector<Algorithm> algorithms{Algorithm::kPgm, Algorithm::kFista, Algorithm::kWeakMfista,
                                      Algorithm::kStrongMfista};
    SolverConfig solver;
    /// Replace solver.ell by estimate_ell over the start box before running.
    bool estimate_ell = true;
    StartsSpec starts;
    std::filesystem::path output_dir = "moprox-out";
    int jobs = 1;
    /// When false every wall-clock field is written as 0 so that all outputs
    /// are byte-identical across invocations.
    bool record_timing = true;

    /// Seed actually used: starts.seed, else MOPROX_SEED, else 0.
    std::uint64_t seed() const;
};

/// Parses YAML text. `source` names the file in diagnostics.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

struct Overrides {
    std::optional<double> epsilon;
    std::optional<double> ell;
    std::optional<double> subproblem_tol;
    std::optional<std::uint64_t> seed;
    std::optional<std::vector<Algorithm>> algorithms;
    std::optional<int> jobs;
    std::optional<std::filesystem::path> output_dir;
    bool no_timing = false;
};

void apply_overrides(RunConfig& config, const Overrides& overrides);

/// Comma-separated algorithm names.
std::vector<Algorithm> parse_algorithm_list(const std::string& text);

struct BuiltProblem {
    MultiObjectiveProblem problem;
    std::string name;
    std::vector<Vector> starts;
    Region region;
    // problem3 only
    GrayImage original;
    GrayImage observed;
};

/// Constructs the problem and the seeded initial points. Problem 3 has the single
/// start haar_forward(b).
BuiltProblem build_problem(const RunConfig& config);

/// Exit codes: 0 when at least one run converged, 1 when none did. Config
/// problems surface as ConfigError before any run starts.
int cmd_run(const RunConfig& config, std::ostream& log);

/// 0 when every trace passes, 1 on any failed check, 2 on missing or unreadable
/// manifests.
int cmd_audit(const std::filesystem::path& trace_dir, std::ostream& log);

/// Problem 3 pipeline: images, traces, per-iteration values and an SVG plot.
/// 0 on completion; I/O failures throw.
int cmd_deblur(const RunConfig& config, std::ostream& log);

}  // namespace moprox
