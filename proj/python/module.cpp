#include "moprox/oracles.hpp"
#include "moprox/solvers.hpp"
#include "moprox/testbed.hpp"
#include "moprox/trace_io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace moprox;

namespace {

using RowImage = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

GrayImage to_image(const RowImage& a) {
    const Vector px = Eigen::Map<const Vector>(a.data(), a.size());
    return GrayImage(static_cast<int>(a.cols()), static_cast<int>(a.rows()), px);
}

RowImage from_image(const GrayImage& img) {
    return Eigen::Map<const RowImage>(img.pixels.data(), img.height, img.width);
}

MonotonicityMode parse_mode(const std::string& s) {
    if (s == "weak") return MonotonicityMode::kWeak;
    if (s == "strong") return MonotonicityMode::kStrong;
    throw ArgumentError("mode must be 'weak' or 'strong'");
}

// Record fields stacked into arrays: one row per record.
py::dict trace_records(const SolverTrace& tr) {
    const auto K = static_cast<Eigen::Index>(tr.records.size());
    const Eigen::Index m = tr.F_x0.size();
    Eigen::VectorXi k(K), accepted(K), terminal(K), inner(K);
    Vector stat(K), t(K), ell(K);
    Matrix Fx(K, m), Fz(K, m);
    for (Eigen::Index j = 0; j < K; ++j) {
        const auto& r = tr.records[static_cast<std::size_t>(j)];
        k[j] = r.k;
        accepted[j] = r.accepted;
        terminal[j] = r.terminal;
        inner[j] = r.inner_iterations;
        stat[j] = r.stationarity;
        t[j] = r.t;
        ell[j] = r.ell;
        Fx.row(j) = r.F_x.transpose();
        Fz.row(j) = r.F_z.transpose();
    }
    py::dict d;
    d["k"] = k;
    d["stationarity"] = stat;
    d["t"] = t;
    d["accepted"] = accepted.cast<bool>().eval();
    d["terminal"] = terminal.cast<bool>().eval();
    d["inner_iterations"] = inner;
    d["ell"] = ell;
    d["F_x"] = Fx;
    d["F_z"] = Fz;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multiobjective proximal gradient solvers";

    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);
    py::register_exception<UnsupportedError>(m, "UnsupportedError", PyExc_RuntimeError);

    py::class_<NonsmoothTerm>(m, "NonsmoothTerm")
        .def_static("zero", &NonsmoothTerm::zero)
        .def_static("box", &NonsmoothTerm::box, py::arg("lower"), py::arg("upper"))
        .def_static("nonnegative_orthant", &NonsmoothTerm::nonnegative_orthant, py::arg("n"))
        .def_static("shifted_l1", &NonsmoothTerm::shifted_l1, py::arg("weight"), py::arg("shift"))
        .def("value", [](const NonsmoothTerm& g, const Vector& x) { return g.value(x).value(); })
        .def_property_readonly("kind", [](const NonsmoothTerm& g) {
            return g.is_zero() ? "zero" : g.as_box() ? "box" : "shifted_l1";
        });

    py::class_<MultiObjectiveProblem>(m, "Problem")
        .def(py::init([](const std::string& name, Eigen::Index n, std::vector<py::function> values,
                         std::vector<py::function> gradients, std::vector<NonsmoothTerm> terms,
                         std::vector<std::optional<double>> lipschitz) {
                 if (values.size() != gradients.size() || values.size() != terms.size()) {
                     throw ArgumentError("values, gradients and terms must have the same length");
                 }
                 if (!lipschitz.empty() && lipschitz.size() != values.size()) {
                     throw ArgumentError("lipschitz must be empty or one entry per objective");
                 }
                 std::vector<Objective> objectives;
                 for (std::size_t i = 0; i < values.size(); ++i) {
                     SmoothOracle f;
                     f.value = [fn = values[i]](const Vector& x) { return fn(x).cast<double>(); };
                     f.gradient = [fn = gradients[i]](const Vector& x) { return fn(x).cast<Vector>(); };
                     if (!lipschitz.empty()) f.lipschitz_hint = lipschitz[i];
                     objectives.push_back({std::move(f), terms[i]});
                 }
                 return MultiObjectiveProblem(name, n, std::move(objectives));
             }),
             py::arg("name"), py::arg("n"), py::arg("values"), py::arg("gradients"), py::arg("terms"),
             py::arg("lipschitz") = std::vector<std::optional<double>>{})
        .def_property_readonly("name", &MultiObjectiveProblem::name)
        .def_property_readonly("dimension", &MultiObjectiveProblem::dimension)
        .def_property_readonly("num_objectives", &MultiObjectiveProblem::num_objectives)
        .def("evaluate", [](const MultiObjectiveProblem& p, const Vector& x) { return p.evaluate_objectives(x).values; })
        .def("evaluate_smooth", &MultiObjectiveProblem::evaluate_smooth)
        .def("gradients", &MultiObjectiveProblem::evaluate_gradients);

    m.def("make_problem1", &make_problem1, py::arg("n") = 10);
    m.def("make_problem2", &make_problem2, py::arg("n") = 10);
    m.def(
        "make_problem3",
        [](const RowImage& observed, double lambda_reg, int kernel_size, double sigma) {
            const GrayImage b = to_image(observed);
            return make_problem3(b, lambda_reg, make_blur(b.width, b.height, kernel_size, sigma));
        },
        py::arg("observed"), py::arg("lambda_reg") = 2e-5, py::arg("kernel_size") = 9, py::arg("sigma") = 4.0);

    m.def(
        "estimate_ell",
        [](const MultiObjectiveProblem& p, const Vector& lower, const Vector& upper, std::uint64_t seed) {
            EllEstimateOptions opt;
            opt.seed = seed;
            return estimate_ell(p, Region{lower, upper}, opt);
        },
        py::arg("problem"), py::arg("lower"), py::arg("upper"), py::arg("seed") = 0);

    m.def("project_simplex", &project_simplex, py::arg("v"));
    m.def(
        "prox_weighted_combination",
        [](const std::vector<NonsmoothTerm>& terms, const std::vector<double>& weights, double step, const Vector& v) {
            if (terms.size() != weights.size()) throw ArgumentError("terms and weights differ in length");
            return prox_weighted_combination({terms, weights, DomainPolicy::kPositiveWeights}, step, v);
        },
        py::arg("terms"), py::arg("weights"), py::arg("step"), py::arg("v"));

    py::class_<SubproblemSolution>(m, "SubproblemSolution")
        .def_readonly("z", &SubproblemSolution::z)
        .def_readonly("lam", &SubproblemSolution::lambda)
        .def_readonly("phi", &SubproblemSolution::phi)
        .def_readonly("primal_value", &SubproblemSolution::primal_value)
        .def_readonly("dual_value", &SubproblemSolution::dual_value)
        .def_readonly("duality_gap", &SubproblemSolution::duality_gap)
        .def_readonly("kkt_residual", &SubproblemSolution::kkt_residual)
        .def_readonly("inner_iterations", &SubproblemSolution::inner_iterations)
        .def_readonly("converged", &SubproblemSolution::converged);

    m.def(
        "solve_subproblem",
        [](const MultiObjectiveProblem& p, double ell, const Vector& x, const Vector& y, double tol, int max_inner) {
            SubproblemOptions opt;
            opt.tol = tol;
            opt.max_inner = max_inner;
            return solve_subproblem(p, ell, x, y, opt);
        },
        py::arg("problem"), py::arg("ell"), py::arg("x"), py::arg("y"), py::arg("tol") = 1e-10,
        py::arg("max_inner") = 10000);

    m.def("t_update", &t_update, py::arg("t"));
    m.def(
        "monotone_accept",
        [](const Vector& prev, const Vector& cand, const std::string& mode) {
            return monotone_accept(prev, cand, parse_mode(mode));
        },
        py::arg("F_prev"), py::arg("F_cand"), py::arg("mode") = "weak");

    py::class_<SolverTrace>(m, "Trace")
        .def_property_readonly("algorithm", [](const SolverTrace& t) { return std::string(to_string(t.algorithm)); })
        .def_property_readonly("status", [](const SolverTrace& t) { return std::string(to_string(t.status)); })
        .def_property_readonly("iterations", &SolverTrace::iterations)
        .def_readonly("x0", &SolverTrace::x0)
        .def_readonly("F_x0", &SolverTrace::F_x0)
        .def_readonly("final_x", &SolverTrace::final_x)
        .def_readonly("final_F", &SolverTrace::final_F)
        .def_readonly("ell_initial", &SolverTrace::ell_initial)
        .def_readonly("ell_final", &SolverTrace::ell_final)
        .def_readonly("safeguard_triggers", &SolverTrace::safeguard_triggers)
        .def_readonly("wall_seconds", &SolverTrace::wall_seconds)
        .def("records", &trace_records)
        .def("to_csv", &trace_csv);

    m.def(
        "run",
        [](const MultiObjectiveProblem& p, const std::string& algorithm, const Vector& x0, double ell, double epsilon,
           int max_outer, double subproblem_tol, bool ell_safeguard) {
            SolverConfig cfg;
            cfg.ell = ell;
            cfg.epsilon = epsilon;
            cfg.max_outer = max_outer;
            cfg.subproblem_tol = subproblem_tol;
            cfg.ell_safeguard = ell_safeguard;
            return run(p, parse_algorithm(algorithm), x0, cfg);
        },
        py::arg("problem"), py::arg("algorithm"), py::arg("x0"), py::arg("ell"), py::arg("epsilon") = 1e-5,
        py::arg("max_outer") = 100000, py::arg("subproblem_tol") = 1e-10, py::arg("ell_safeguard") = true);

    m.def(
        "audit",
        [](const SolverTrace& trace) {
            const AuditReport r = audit_trace(trace, trace.algorithm);
            py::list checks;
            for (const auto& c : r.checks) {
                py::dict d;
                d["name"] = c.name;
                d["worst_violation"] = c.worst_violation;
                d["location"] = c.location;
                d["tolerance"] = c.tolerance;
                d["pass"] = c.pass;
                checks.append(d);
            }
            return py::make_tuple(r.overall, checks);
        },
        py::arg("trace"));

    m.def("synthetic_image", [](int size) { return from_image(synthetic_image(size)); }, py::arg("size") = 32);
    m.def("haar_forward", [](const RowImage& img) { return haar_forward(to_image(img)); }, py::arg("image"));
    m.def(
        "haar_inverse",
        [](const Vector& coeffs, int width, int height) { return from_image(haar_inverse(coeffs, width, height)); },
        py::arg("coeffs"), py::arg("width"), py::arg("height"));
    m.def(
        "blur",
        [](const RowImage& img, int kernel_size, double sigma) {
            const GrayImage g = to_image(img);
            const auto op = make_blur(g.width, g.height, kernel_size, sigma);
            return from_image(GrayImage(g.width, g.height, op.apply(g.pixels)));
        },
        py::arg("image"), py::arg("kernel_size") = 9, py::arg("sigma") = 4.0);
}
