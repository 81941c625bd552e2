// Acceptance run: one PASS/FAIL line per criterion. Tolerances are fixed here.
#include "moprox/cli.hpp"
#include "moprox/oracles.hpp"
#include "moprox/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

using namespace moprox;
namespace fs = std::filesystem;

namespace {

constexpr double kMonotoneTol = 1e-10;
constexpr double kStartRelTol = 1e-8;
constexpr double kCandidateTol = 1e-10;
constexpr double kStepIdentityTol = 1e-9;
constexpr double kSigmaRelTol = 1e-8;
constexpr double kReductionTol = 1e-12;
constexpr double kBruteForceTol = 1e-5;
constexpr double kBruteForceRes = 1e-3;
constexpr double kKktTol = 1e-8;
constexpr double kPgmRatio = 2.0;
constexpr double kAcceleratedSpread = 1.25;
constexpr double kGradientTol = 1e-5;
constexpr double kHaarTol = 1e-12;
constexpr double kAdjointTol = 1e-10;
constexpr double kScalarTol = 1e-10;
constexpr int kStepChecks = 100000;

int unexpected_failures = 0;

// known: the criterion is reported but does not decide the exit code (see README)
void report(const std::string& name, bool pass, const std::string& detail, bool known = false) {
    std::printf("%s  %-28s %s%s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str(),
                !pass && known ? "  [known failure]" : "");
    std::fflush(stdout);
    if (!pass && !known) ++unexpected_failures;
}

void info(const std::string& detail) {
    std::printf("      %s\n", detail.c_str());
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

struct Experiment {
    std::string name;
    BuiltProblem built;
    SolverConfig solver;
    std::map<Algorithm, std::vector<SolverTrace>> traces;
};

const std::vector<Algorithm> kAll{Algorithm::kPgm, Algorithm::kFista, Algorithm::kWeakMfista, Algorithm::kStrongMfista};

Experiment run_config(const std::string& file) {
    const RunConfig cfg = load_config(fs::path(MOPROX_SOURCE_DIR) / "configs" / file);
    Experiment e{file, build_problem(cfg), cfg.solver, {}};
    e.solver.seed = cfg.seed();
    if (cfg.estimate_ell) {
        EllEstimateOptions opt;
        opt.seed = cfg.seed();
        e.solver.ell = estimate_ell(e.built.problem, e.built.region, opt);
    }
    for (Algorithm a : cfg.algorithms) {
        for (const Vector& x0 : e.built.starts) e.traces[a].push_back(run(e.built.problem, a, x0, e.solver));
    }
    return e;
}

// F(x^{k-1}) for the record at position j
const Vector& previous_F(const SolverTrace& tr, std::size_t j) {
    return j == 0 ? tr.F_x0 : tr.records[j - 1].F_x;
}

void check_monotonicity(const std::vector<const Experiment*>& exps) {
    double strong_worst = -kInf, weak_worst = -kInf;
    int runs = 0;
    for (const auto* e : exps) {
        for (const auto& tr : e->traces.at(Algorithm::kStrongMfista)) {
            for (std::size_t j = 0; j < tr.records.size(); ++j) {
                strong_worst = std::max(strong_worst, (tr.records[j].F_x - previous_F(tr, j)).maxCoeff());
            }
            ++runs;
        }
        for (const auto& tr : e->traces.at(Algorithm::kWeakMfista)) {
            for (std::size_t j = 0; j < tr.records.size(); ++j) {
                weak_worst = std::max(weak_worst, -(previous_F(tr, j) - tr.records[j].F_x).maxCoeff());
            }
            ++runs;
        }
    }
    report("monotonicity", strong_worst <= kMonotoneTol && weak_worst <= kMonotoneTol,
           fmt("strong max increase %.3e, weak max min-decrease violation %.3e", strong_worst, weak_worst) +
               " over " + std::to_string(runs) + " traces, tol 1e-10");
}

void check_bounded_by_start(const std::vector<const Experiment*>& exps) {
    double worst = -kInf;
    for (const auto* e : exps) {
        for (const auto& tr : e->traces.at(Algorithm::kWeakMfista)) {
            const Vector scale = 1.0 + tr.F_x0.array().abs();
            for (const auto& r : tr.records) {
                worst = std::max(worst, ((r.F_x - tr.F_x0).array() / scale.array()).maxCoeff());
            }
        }
    }
    report("bounded-by-start", worst <= kStartRelTol, fmt("worst relative excess %.3e, tol %.0e", worst, kStartRelTol));
}

double candidate_gap(const SolverTrace& tr) {
    double worst = -kInf;
    // the terminal record selects nothing: x stays put whatever z is
    for (const auto& r : tr.records) {
        if (!r.terminal) worst = std::max(worst, -(r.F_z - r.F_x).minCoeff());
    }
    return worst;
}

void check_candidate(const std::vector<const Experiment*>& exps) {
    double weak = -kInf, strong = -kInf;
    int strong_bad = 0, strong_runs = 0;
    for (const auto* e : exps) {
        for (const auto& tr : e->traces.at(Algorithm::kWeakMfista)) weak = std::max(weak, candidate_gap(tr));
        for (const auto& tr : e->traces.at(Algorithm::kStrongMfista)) {
            const double g = candidate_gap(tr);
            strong = std::max(strong, g);
            strong_bad += g > kCandidateTol;
            ++strong_runs;
        }
    }
    report("candidate-dominance", weak <= kCandidateTol, fmt("weak-mfista worst -min_i(F_i(z)-F_i(x)) %.3e, tol %.0e", weak, kCandidateTol));
    info(fmt("strong-mfista (informational): worst %.3e", strong) + ", " + std::to_string(strong_bad) + "/" +
         std::to_string(strong_runs) + " traces above tol");
}

void check_stepsizes(const std::vector<const Experiment*>& exps) {
    bool ok = true;
    double worst_identity = 0.0;
    double t = 1.0;
    for (int k = 1; k <= kStepChecks; ++k) {
        const double next = t_update(t);
        ok = ok && t >= (k + 1) / 2.0;
        const double id = std::abs(t * t - next * next + next) / (next * next);
        worst_identity = std::max(worst_identity, id);
        t = next;
    }
    int traces = 0;
    for (const auto* e : exps) {
        for (Algorithm a : {Algorithm::kFista, Algorithm::kWeakMfista, Algorithm::kStrongMfista}) {
            for (const auto& tr : e->traces.at(a)) {
                for (std::size_t j = 0; j < tr.records.size(); ++j) {
                    const auto& r = tr.records[j];
                    ok = ok && r.t >= (r.k + 1) / 2.0;
                    if (j + 1 < tr.records.size()) {
                        const double n = tr.records[j + 1].t;
                        worst_identity = std::max(worst_identity, std::abs(r.t * r.t - n * n + n) / (n * n));
                    }
                }
                ++traces;
            }
        }
    }
    ok = ok && worst_identity <= kStepIdentityTol;
    report("stepsize-identities", ok, fmt("t_k >= (k+1)/2 for k <= 1e5 and %g traces, worst relative identity error %.3e",
                                      traces, worst_identity));
}

void check_sigma(const Experiment& p1) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = -kInf;
    int refs = 0, skipped = 0;
    for (const auto& tr : p1.traces.at(Algorithm::kWeakMfista)) {
        const auto& p = p1.built.problem;
        std::vector<Vector> zs{tr.final_x};
        // points on [x^0, final x] are dominated by x^0 by convexity; verified below
        for (int r = 0; r < 10; ++r) zs.push_back(tr.x0 + unif(rng) * (tr.final_x - tr.x0));
        for (const Vector& z : zs) {
            const Vector Fz = p.evaluate_objectives(z).values;
            if ((Fz.array() > tr.F_x0.array()).any()) {
                ++skipped;
                continue;
            }
            const auto c = check_sigma_bound(tr, SigmaReference{Fz, (tr.x0 - z).squaredNorm()}, tr.ell_final);
            worst = std::max(worst, c.worst_violation);
            ++refs;
        }
    }
    report("sigma-bound", worst <= kSigmaRelTol && skipped == 0,
           fmt("worst relative violation %.3e over %g reference points", worst, refs) +
               (skipped ? ", " + std::to_string(skipped) + " references not dominated" : ""));
}

Objective quad(const Vector& c, const NonsmoothTerm& g) {
    SmoothOracle f;
    f.value = [c](const Vector& x) { return 0.5 * (x - c).squaredNorm(); };
    f.gradient = [c](const Vector& x) { return Vector(x - c); };
    return {f, g};
}

Vector uniform(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    Vector v(n);
    for (auto& e : v) e = d(rng);
    return v;
}

NonsmoothTerm term(int variant, std::mt19937_64& rng, Eigen::Index n) {
    switch (variant % 3) {
        case 0: return NonsmoothTerm::zero();
        case 1: {
            const Vector lo = uniform(rng, n, -1.0, -0.2);
            return NonsmoothTerm::box(lo, lo.array() + 1.0);
        }
        default: return NonsmoothTerm::shifted_l1(uniform(rng, 1, 0.1, 1.0)[0], uniform(rng, n, -1, 1));
    }
}

// prox of step * g written out per variant
Vector closed_form_prox(const NonsmoothTerm& g, double step, const Vector& v) {
    if (const auto* b = g.as_box()) return v.cwiseMax(b->lower).cwiseMin(b->upper);
    if (const auto* l = g.as_l1()) {
        const Eigen::ArrayXd d = v - l->shift;
        return l->shift.array() + d.sign() * (d.abs() - step * l->weight).max(0.0);
    }
    return v;
}

void check_subproblem(const std::vector<const Experiment*>& exps) {
    std::mt19937_64 rng(99);
    // (i) m = 1 against the closed-form prox-gradient step
    double reduction = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + trial % 4;
        const Vector c = uniform(rng, n, -1, 1);
        const NonsmoothTerm g = term(trial, rng, n);
        const MultiObjectiveProblem p("m1", n, {quad(c, g)});
        const double ell = uniform(rng, 1, 1, 5)[0];
        Vector x = uniform(rng, n, -1, 1);
        if (const auto* b = g.as_box()) x = x.cwiseMax(b->lower).cwiseMin(b->upper);
        const Vector y = uniform(rng, n, -1, 1);
        const Vector expected = closed_form_prox(g, 1.0 / ell, y - (y - c) / ell);
        reduction = std::max(reduction, (solve_subproblem(p, ell, x, y).z - expected).lpNorm<Eigen::Infinity>());
    }
    // (ii) m = 2, n = 2 against the brute-force grid
    double brute = 0.0;
    int instances = 0;
    std::vector<int> seen(3, 0);
    while (instances < 20) {
        const int v1 = instances % 3, v2 = (instances / 3) % 3;
        const NonsmoothTerm g1 = term(v1, rng, 2), g2 = term(v2, rng, 2);
        const MultiObjectiveProblem p("m2", 2, {quad(uniform(rng, 2, -1, 1), g1), quad(uniform(rng, 2, -1, 1), g2)});
        // x must lie in dom g for d(x, y) to be finite
        Vector x = Vector::Zero(2);
        if (const auto b1 = g1.as_box()) x = 0.5 * (b1->lower + b1->upper);
        if (const auto b2 = g2.as_box()) {
            const Vector lo = b2->lower.cwiseMax(g1.as_box() ? g1.as_box()->lower : b2->lower);
            const Vector hi = b2->upper.cwiseMin(g1.as_box() ? g1.as_box()->upper : b2->upper);
            if ((lo.array() > hi.array()).any()) continue;
            x = 0.5 * (lo + hi);
        }
        const Vector y = x + uniform(rng, 2, -0.5, 0.5);
        const double ell = uniform(rng, 1, 1, 4)[0];
        const auto s = solve_subproblem(p, ell, x, y);
        const auto bf = brute_force_subproblem(p, ell, x, y, kBruteForceRes, 1);
        brute = std::max(brute, std::abs(bf.primal_value - s.primal_value));
        ++seen[v1];
        ++seen[v2];
        ++instances;
    }
    // (iii) KKT residual of every subproblem solved in the experiment runs
    double kkt = 0.0;
    long solves = 0;
    for (const auto* e : exps) {
        for (Algorithm a : kAll) {
            for (const auto& tr : e->traces.at(a)) {
                for (const auto& r : tr.records) {
                    kkt = std::max(kkt, r.kkt_residual);
                    ++solves;
                }
            }
        }
    }
    const bool all_variants = seen[0] > 0 && seen[1] > 0 && seen[2] > 0;
    report("subproblem-correctness", reduction <= kReductionTol && brute <= kBruteForceTol && all_variants && kkt <= kKktTol,
           fmt("(i) m=1 max diff %.3e, (ii) brute force max gap %.3e", reduction, brute) +
               fmt(" on 20 instances, (iii) max KKT %.3e over %g solves", kkt, static_cast<double>(solves)));
}

double mean_iterations(const std::vector<SolverTrace>& traces) {
    double s = 0.0;
    for (const auto& t : traces) s += t.iterations();
    return s / static_cast<double>(traces.size());
}

void check_iteration_counts(const std::vector<const Experiment*>& exps) {
    bool ratio_ok = true, spread_ok = true;
    for (const auto* e : exps) {
        std::map<Algorithm, double> mean;
        for (Algorithm a : kAll) mean[a] = mean_iterations(e->traces.at(a));
        const double fastest = std::min({mean[Algorithm::kFista], mean[Algorithm::kWeakMfista], mean[Algorithm::kStrongMfista]});
        const double slowest = std::max({mean[Algorithm::kFista], mean[Algorithm::kWeakMfista], mean[Algorithm::kStrongMfista]});
        const double ratio = mean[Algorithm::kPgm] / slowest;
        const double spread = slowest / fastest;
        ratio_ok = ratio_ok && ratio >= kPgmRatio;
        spread_ok = spread_ok && spread <= kAcceleratedSpread;
        char line[256];
        std::snprintf(line, sizeof line,
                      "%s ell=%.4g mean iterations pgm %.1f fista %.1f weak %.1f strong %.1f; pgm/slowest %.2f, "
                      "slowest/fastest %.2f",
                      e->name.c_str(), e->solver.ell, mean[Algorithm::kPgm], mean[Algorithm::kFista],
                      mean[Algorithm::kWeakMfista], mean[Algorithm::kStrongMfista], ratio, spread);
        info(line);
    }
    report("iterations-pgm-ratio", ratio_ok, fmt("PGM mean >= %.1fx every accelerated mean on both problems", kPgmRatio));
    report("iterations-accelerated-spread", spread_ok,
           fmt("accelerated means within %.0f%% of one another", 100 * (kAcceleratedSpread - 1)), true);
}

void check_image_monotonicity() {
    const Experiment p3 = run_config("problem3.yaml");
    const auto& fista = p3.traces.at(Algorithm::kFista).front();
    const auto& weak = p3.traces.at(Algorithm::kWeakMfista).front();
    auto all_increase = [](const SolverTrace& tr) {
        int count = 0;
        for (std::size_t j = 0; j < tr.records.size(); ++j) {
            if (tr.records[j].terminal) continue;
            count += ((tr.records[j].F_x - previous_F(tr, j)).array() > 0.0).all();
        }
        return count;
    };
    int weak_rejected = 0;
    for (const auto& r : weak.records) weak_rejected += !r.accepted;
    const int f = all_increase(fista), w = all_increase(weak);
    const bool ok = f >= 1 && w == 0 && weak.final_F[0] <= weak.F_x0[0];
    char line[256];
    std::snprintf(line, sizeof line,
                  "fista %d all-increase steps of %d, weak-mfista %d of %d (%d rejected), weak F_1 %.6g -> %.6g", f,
                  fista.iterations(), w, weak.iterations(), weak_rejected, weak.F_x0[0], weak.final_F[0]);
    report("image-monotone-contrast", ok, line);
}

void check_oracles(const Experiment& p1, const Experiment& p2) {
    std::mt19937_64 rng(5);
    double grad = 0.0;
    for (const auto* e : {&p1, &p2}) {
        for (const auto& obj : e->built.problem.objectives()) {
            for (int r = 0; r < 5; ++r) grad = std::max(grad, gradient_relative_error(obj.smooth, uniform(rng, 10, 0, 2)));
        }
    }
    const GrayImage img = synthetic_image(16);
    const auto blur = make_blur(16, 16, 9, 4.0);
    const auto p3 = make_problem3(make_observed(img, blur, 1e-3, 1), 2e-5, blur);
    grad = std::max(grad, gradient_relative_error(p3.objectives()[0].smooth, uniform(rng, 256, -1, 1)));

    double haar = 0.0;
    for (int size : {2, 8, 32}) {
        const GrayImage a(size, size, uniform(rng, size * size, 0, 1));
        const Vector c = haar_forward(a);
        haar = std::max(haar, (haar_inverse(c, size, size).pixels - a.pixels).lpNorm<Eigen::Infinity>());
        haar = std::max(haar, std::abs(c.norm() - a.pixels.norm()) / a.pixels.norm());
    }

    double adjoint = 0.0;
    const auto b32 = make_blur(32, 32, 9, 4.0);
    for (int r = 0; r < 5; ++r) {
        const Vector u = uniform(rng, 1024, -1, 1), v = uniform(rng, 1024, -1, 1);
        const double lhs = b32.apply(u).dot(v), rhs = u.dot(b32.apply_adjoint(v));
        adjoint = std::max(adjoint, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
    }

    // scalar MFISTA: least squares plus l1 in two dimensions
    Matrix A(3, 2);
    A << 1.0, 0.4, -0.3, 1.2, 0.5, 0.1;
    const Vector b = uniform(rng, 3, -1, 1);
    const double reg = 0.15;
    SmoothOracle f;
    f.value = [A, b](const Vector& x) { return 0.5 * (A * x - b).squaredNorm(); };
    f.gradient = [A, b](const Vector& x) { return Vector(A.transpose() * (A * x - b)); };
    const MultiObjectiveProblem lsq("lsq-l1", 2, {{f, NonsmoothTerm::shifted_l1(reg, Vector::Zero(2))}});
    ScalarComposite sc{f.value, f.gradient, [reg](const Vector& x) { return reg * x.lpNorm<1>(); },
                       [reg](const Vector& v, double step) {
                           return Vector((v.array().abs() - reg * step).max(0.0) * v.array().sign());
                       }};
    const double ell = Eigen::SelfAdjointEigenSolver<Matrix>(A.transpose() * A).eigenvalues().maxCoeff();
    SolverConfig cfg;
    cfg.ell = ell;
    cfg.epsilon = 1e-300;
    cfg.max_outer = 50;
    cfg.ell_safeguard = false;
    const Vector x0 = uniform(rng, 2, -3, 3);
    const auto ref = scalar_mfista_reference(sc, ell, x0, cfg.epsilon, cfg.max_outer);
    const auto tr = run(lsq, Algorithm::kWeakMfista, x0, cfg);
    double scalar = tr.records.size() == ref.records.size() ? 0.0 : kInf;
    for (std::size_t k = 0; k < std::min(tr.records.size(), ref.records.size()); ++k) {
        scalar = std::max(scalar, (tr.records[k].x - ref.records[k].x).lpNorm<Eigen::Infinity>());
    }

    const bool ok = grad <= kGradientTol && haar <= kHaarTol && adjoint <= kAdjointTol && scalar <= kScalarTol;
    char line[256];
    std::snprintf(line, sizeof line, "gradient rel err %.2e, haar %.2e, blur adjoint %.2e, scalar mfista %.2e over %zu iterations",
                  grad, haar, adjoint, scalar, tr.records.size());
    report("oracle-suite", ok, line);
}

void check_determinism() {
    RunConfig cfg = load_config(fs::path(MOPROX_SOURCE_DIR) / "configs" / "problem1.yaml");
    cfg.starts.count = 10;
    cfg.record_timing = false;
    std::vector<std::map<std::string, std::string>> outputs;
    for (int jobs : {1, 4}) {
        const fs::path dir = fs::temp_directory_path() / ("moprox-acceptance-" + std::to_string(jobs));
        fs::remove_all(dir);
        cfg.output_dir = dir;
        cfg.jobs = jobs;
        std::ostringstream log;
        cmd_run(cfg, log);
        std::map<std::string, std::string> files;
        for (const auto& e : fs::recursive_directory_iterator(dir)) {
            if (e.path().extension() == ".csv") files[fs::relative(e.path(), dir).string()] = read_file(e.path());
        }
        outputs.push_back(std::move(files));
        fs::remove_all(dir);
    }
    const bool ok = !outputs[0].empty() && outputs[0] == outputs[1];
    report("determinism", ok, std::to_string(outputs[0].size()) + " CSV files compared byte for byte across two invocations");
}

}  // namespace

int main() {
    std::printf("running problem1 and problem2 experiments (100 starts x 4 algorithms each)\n");
    const Experiment p1 = run_config("problem1.yaml");
    const Experiment p2 = run_config("problem2.yaml");
    const std::vector<const Experiment*> exps{&p1, &p2};

    check_monotonicity(exps);
    check_bounded_by_start(exps);
    check_candidate(exps);
    check_stepsizes(exps);
    check_sigma(p1);
    check_subproblem(exps);
    check_iteration_counts(exps);
    check_image_monotonicity();
    check_oracles(p1, p2);
    check_determinism();

    std::printf("%s (%d unexpected failures)\n", unexpected_failures ? "ACCEPTANCE FAILED" : "acceptance done",
                unexpected_failures);
    return unexpected_failures ? 1 : 0;
}
