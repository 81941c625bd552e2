#include "moprox/cli.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

void add_overrides(CLI::App* cmd, moprox::Overrides& o, std::string& algorithms) {
    cmd->add_option("--epsilon", o.epsilon, "Stopping tolerance on ||z - y||");
    cmd->add_option("--ell", o.ell, "Fixed ell (disables the estimate)");
    cmd->add_option("--subproblem-tol", o.subproblem_tol, "Relative duality gap for the inner solver");
    cmd->add_option("--seed", o.seed, "Seed for starts and noise (else starts.seed, else MOPROX_SEED)");
    cmd->add_option("--algorithms", algorithms, "Comma-separated: pgm,fista,weak-mfista,strong-mfista");
    cmd->add_option("--jobs", o.jobs, "Concurrent runs");
    cmd->add_option("-o,--output-dir", o.output_dir, "Output directory");
    cmd->add_flag("--no-timing", o.no_timing, "Write all wall-clock fields as 0 (byte-reproducible output)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiobjective proximal gradient solvers (PGM, FISTA, MFISTA)"};
    app.require_subcommand(1);

    std::string run_config, deblur_config, trace_dir, run_algs, deblur_algs;
    moprox::Overrides run_over, deblur_over;

    auto* run = app.add_subcommand("run", "Multi-start benchmark on problem1/problem2 (or a problem3 solve)");
    run->add_option("config", run_config, "YAML config file")->required();
    add_overrides(run, run_over, run_algs);

    auto* audit = app.add_subcommand("audit", "Re-check trace invariants in a directory of traces");
    audit->add_option("trace_dir", trace_dir, "Directory with trace CSVs and manifests")->required();

    auto* deblur = app.add_subcommand("deblur", "Problem 3 deblurring pipeline");
    deblur->add_option("config", deblur_config, "YAML config file")->required();
    add_overrides(deblur, deblur_over, deblur_algs);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*audit) return moprox::cmd_audit(trace_dir, std::cout);

        const bool is_run = static_cast<bool>(*run);
        auto& over = is_run ? run_over : deblur_over;
        const auto& algs = is_run ? run_algs : deblur_algs;
        moprox::RunConfig config = moprox::load_config(is_run ? run_config : deblur_config);
        if (!algs.empty()) {
            try {
                over.algorithms = moprox::parse_algorithm_list(algs);
            } catch (const moprox::ArgumentError& e) {
                throw moprox::ConfigError("--algorithms", 0, 0, e.what());
            }
        }
        moprox::apply_overrides(config, over);
        return is_run ? moprox::cmd_run(config, std::cout) : moprox::cmd_deblur(config, std::cout);
    } catch (const moprox::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
