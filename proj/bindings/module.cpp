// Python facade over the solver library.
//
// Conventions at this boundary match the file formats rather than the C++
// internals: modes are 1-based everywhere, policy actions are 0 for "stay"
// and the 1-based target mode otherwise. Results come back as plain dicts
// and lists so callers need nothing beyond the standard library.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "switchgrid/barriers.hpp"
#include "switchgrid/config.hpp"
#include "switchgrid/io.hpp"
#include "switchgrid/montecarlo.hpp"
#include "switchgrid/scheme.hpp"
#include "switchgrid/version.hpp"

namespace py = pybind11;
using namespace switchgrid;

namespace {

int to_internal_mode(int mode, int modes) {
    if (mode < 1 || mode > modes) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "mode %d outside the configured range 1..%d", mode,
                      modes);
        throw ConfigError(buf);
    }
    return mode - 1;
}

// A solve result bundled with the inputs it came from, so value lookups,
// policy playback, and cross-checks need no separate bookkeeping.
struct Solution {
    RunConfig rc;
    SolveResult res;

    int modes() const { return rc.problem.modes; }
    int time_steps() const { return rc.lattice.time_steps; }

    void check_time(int n) const {
        if (n < 0 || n > rc.lattice.time_steps) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "time index %d outside 0..%d", n,
                          rc.lattice.time_steps);
            throw ConfigError(buf);
        }
    }

    Vec values(int mode, int n) const {
        check_time(n);
        return res.field.slice(to_internal_mode(mode, modes()), n);
    }

    std::vector<int> actions(int mode, int n) const {
        check_time(n);
        const int i = to_internal_mode(mode, modes());
        const int64_t size = rc.lattice.size();
        const std::vector<int16_t>& row = res.policy.actions[static_cast<size_t>(n)];
        std::vector<int> out(static_cast<size_t>(size));
        for (int64_t k = 0; k < size; ++k) {
            const int16_t a = row[static_cast<size_t>(i * size + k)];
            out[static_cast<size_t>(k)] = a == kStay ? 0 : a + 1;
        }
        return out;
    }

    double value_at(int mode, int n, const Vec& x) const {
        check_time(n);
        if (static_cast<int>(x.size()) != rc.lattice.dim()) {
            throw ConfigError("point dimension does not match the lattice");
        }
        return res.field.interp(to_internal_mode(mode, modes()), n, x);
    }

    py::dict residual() const {
        const ResidualReport& r = res.residual;
        py::dict d;
        d["linf"] = r.linf;
        d["l1"] = r.l1;
        d["interior_count"] = r.interior_count;
        d["worst_value"] = r.worst_value;
        d["worst_x"] = r.worst_x;
        d["worst_t"] = r.worst_t;
        d["worst_mode"] = r.worst_mode;
        return d;
    }

    py::dict stats() const {
        py::dict d;
        d["cfl"] = res.stats.cfl;
        d["max_sweeps_used"] = res.stats.max_sweeps_used;
        d["out_of_box"] = res.stats.out_of_box;
        d["interp_queries"] = res.stats.interp_queries;
        return d;
    }
};

py::dict check_dict(const CheckResult& c) {
    py::dict d;
    d["name"] = c.name;
    d["pass"] = c.pass;
    d["detail"] = c.detail;
    d["witness_x"] = c.witness_x;
    d["witness_t"] = c.witness_t;
    d["cycle"] = c.cycle;
    py::dict measured;
    for (const auto& [key, val] : c.measured) measured[py::str(key)] = val;
    d["measured"] = measured;
    return d;
}

py::dict validate_config(const RunConfig& rc) {
    const ValidationReport rep = validate_all(rc.model, rc.problem, rc.validation);
    py::dict d;
    d["all_pass"] = rep.all_pass();
    py::list checks;
    for (const CheckResult& c : rep.checks) checks.append(check_dict(c));
    d["checks"] = checks;
    return d;
}

Solution solve_config(const RunConfig& rc, bool force) {
    SolveOptions opts = rc.solver;
    opts.skip_validation = force || opts.skip_validation;
    Solution sol{rc, {}};
    sol.res = solve(rc.problem, rc.model, rc.lattice, opts);
    return sol;
}

py::dict estimate_dict(const EstimateReport& r) {
    py::dict d;
    d["mean"] = r.mean;
    d["stderr"] = r.stderr_;
    d["ci95_lo"] = r.ci95_lo;
    d["ci95_hi"] = r.ci95_hi;
    d["paths"] = r.paths;
    d["exit_fraction"] = r.exit_fraction;
    d["time_in_mode"] = r.time_in_mode;
    d["running_term"] = r.running_term;
    d["switch_cost_term"] = r.switch_cost_term;
    d["terminal_term"] = r.terminal_term;
    d["mean_switches"] = r.mean_switches;
    d["seed"] = r.seed;
    return d;
}

py::dict estimate_policy(const Solution& sol, const Vec& x, int mode, int64_t paths,
                         int64_t seed) {
    SimConfig cfg = sol.rc.mc;
    if (paths > 0) cfg.paths = paths;
    if (seed >= 0) cfg.seed = static_cast<uint64_t>(seed);
    const int i0 = to_internal_mode(mode, sol.modes());
    return estimate_dict(
        evaluate_policy(sol.rc.problem, sol.rc.model, sol.res.field, sol.res.policy, x, i0, cfg));
}

py::dict compare_solution(const Solution& sol, bool refined) {
    SolveOptions opts = sol.rc.solver;
    opts.skip_validation = true;
    CompareReport rep;
    if (refined) {
        Lattice fine = sol.rc.lattice;
        for (int k = 0; k < fine.dim(); ++k) fine.nodes[k] = 2 * fine.nodes[k] - 1;
        fine.time_steps *= 2;
        const SolveResult fine_sol = solve(sol.rc.problem, sol.rc.model, fine, opts);
        rep = compare(sol.res.field, sol.res.policy, sol.rc.problem, sol.rc.model, sol.rc.probes,
                      sol.rc.mc, &fine_sol.field);
    } else {
        rep = compare(sol.res.field, sol.res.policy, sol.rc.problem, sol.rc.model, sol.rc.probes,
                      sol.rc.mc, nullptr);
    }
    py::dict d;
    d["pass"] = rep.pass;
    py::list points;
    for (const ComparePoint& p : rep.points) {
        py::dict q;
        q["x"] = p.x0;
        q["mode"] = p.mode + 1;
        q["pde_value"] = p.pde_value;
        q["mc_mean"] = p.mc_mean;
        q["stderr"] = p.stderr_;
        q["ci95_lo"] = p.ci95_lo;
        q["ci95_hi"] = p.ci95_hi;
        q["gap"] = p.gap;
        q["budget_dt"] = p.budget_dt;
        q["budget_h"] = p.budget_h;
        q["pass"] = p.pass;
        points.append(q);
    }
    d["points"] = points;
    return d;
}

BarrierSpec calibrate_barrier(const RunConfig& rc, double epsilon, int mode, const Vec& x) {
    CalibrateOptions opts;
    opts.max_doublings = rc.barrier_max_doublings;
    opts.nonlocal = rc.solver.nonlocal;
    return calibrate(rc.problem, rc.model, rc.lattice, epsilon,
                     to_internal_mode(mode, rc.problem.modes), x, opts);
}

py::dict side_dict(const BarrierCheck& c) {
    py::dict d;
    d["pass"] = c.pass;
    d["min_pde_margin"] = c.min_pde_margin;
    d["min_obstacle_margin"] = c.min_obstacle_margin;
    d["min_terminal_margin"] = c.min_terminal_margin;
    d["worst_x"] = c.worst_x;
    d["worst_t"] = c.worst_t;
    d["worst_mode"] = c.worst_mode;
    return d;
}

py::dict verify_barrier(const RunConfig& rc, const BarrierSpec& spec) {
    py::dict d;
    d["above"] = side_dict(verify_supersolution(spec, BarrierSide::Above, rc.model, rc.problem,
                                                rc.lattice, rc.solver.nonlocal));
    d["below"] = side_dict(verify_supersolution(spec, BarrierSide::Below, rc.model, rc.problem,
                                                rc.lattice, rc.solver.nonlocal));
    return d;
}

py::dict sandwich_solution(const Solution& sol, const BarrierSpec& spec, double theta,
                           double lambda, double gamma) {
    PerturbationSpec pspec;
    pspec.theta = theta;
    pspec.lambda = lambda;
    pspec.gamma = gamma;
    const SandwichReport rep =
        sandwich_check(sol.res.field, spec, sol.rc.problem, sol.rc.model, sol.rc.solver.nonlocal,
                       0, theta != 0.0 ? &pspec : nullptr);
    py::dict d;
    d["pass"] = rep.pass;
    d["verified"] = rep.verified;
    d["min_margin_below"] = rep.min_margin_below;
    d["min_margin_above"] = rep.min_margin_above;
    d["pinch_value"] = rep.pinch_value;
    d["pinch_envelope"] = rep.pinch_envelope;
    d["worst_x"] = rep.worst_x;
    d["worst_t"] = rep.worst_t;
    d["worst_mode"] = rep.worst_mode;
    return d;
}

}  // namespace

PYBIND11_MODULE(_switchgrid, m) {
    m.doc() = "Solver for systems of obstacle problems from multi-mode optimal switching "
              "under jump-diffusion dynamics";
    m.attr("__version__") = kToolVersion;

    // Translators run newest-first, so register the base before the leaves;
    // the leaves inherit from Error on the python side as well.
    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<SolverError>(m, "SolverError", base.ptr());
    py::register_exception<CalibrationError>(m, "CalibrationError", base.ptr());

    py::class_<RunConfig>(m, "RunConfig")
        .def_property_readonly("modes", [](const RunConfig& rc) { return rc.problem.modes; })
        .def_property_readonly("dim", [](const RunConfig& rc) { return rc.lattice.dim(); })
        .def_property_readonly("horizon",
                               [](const RunConfig& rc) { return rc.problem.horizon; })
        .def_property_readonly("nodes", [](const RunConfig& rc) { return rc.lattice.nodes; })
        .def_property_readonly("time_steps",
                               [](const RunConfig& rc) { return rc.lattice.time_steps; })
        .def_property_readonly("config_hash",
                               [](const RunConfig& rc) { return rc.config_hash; })
        .def_property_readonly("out_dir", [](const RunConfig& rc) { return rc.out_dir; })
        .def("__repr__", [](const RunConfig& rc) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "RunConfig(modes=%d, dim=%d, config=%s)",
                          rc.problem.modes, rc.lattice.dim(), rc.config_hash.c_str());
            return std::string(buf);
        });

    py::class_<BarrierSpec>(m, "BarrierSpec")
        .def_property_readonly("mode",
                               [](const BarrierSpec& s) { return s.anchor_mode + 1; })
        .def_readonly("anchor", &BarrierSpec::anchor)
        .def_readonly("epsilon", &BarrierSpec::epsilon)
        .def_readonly("K", &BarrierSpec::K)
        .def_readonly("lipschitz", &BarrierSpec::lipschitz)
        .def_property_readonly("lambda_", [](const BarrierSpec& s) { return s.lambda; })
        .def("__repr__", [](const BarrierSpec& s) {
            char buf[128];
            std::snprintf(buf, sizeof buf,
                          "BarrierSpec(mode=%d, epsilon=%g, K=%g, lambda=%g)",
                          s.anchor_mode + 1, s.epsilon, s.K, s.lambda);
            return std::string(buf);
        });

    py::class_<Solution>(m, "Solution")
        .def_property_readonly("modes", &Solution::modes)
        .def_property_readonly("time_steps", &Solution::time_steps)
        .def("values", &Solution::values, py::arg("mode"), py::arg("time_index"),
             "Node values for one mode at one time level, lattice order")
        .def("actions", &Solution::actions, py::arg("mode"), py::arg("time_index"),
             "Per-node switch decisions: 0 = stay, otherwise the 1-based target mode")
        .def("value_at", &Solution::value_at, py::arg("mode"), py::arg("time_index"),
             py::arg("x"), "Multilinear interpolation at a point inside the box")
        .def("residual", &Solution::residual)
        .def("stats", &Solution::stats);

    m.def("load_config", &load_config, py::arg("path"),
          "Read and parse a JSON run configuration");
    m.def("parse_config", &parse_config, py::arg("text"), py::arg("name") = "<inline>",
          "Parse a JSON run configuration from a string");
    m.def("validate", &validate_config, py::arg("config"),
          "Run the structural checks; returns {'all_pass': bool, 'checks': [...]}");
    m.def("solve", &solve_config, py::arg("config"), py::arg("force") = false,
          "Backward-in-time solve; force skips the pre-solve validation gate");
    m.def("estimate", &estimate_policy, py::arg("solution"), py::arg("x"), py::arg("mode"),
          py::arg("paths") = 0, py::arg("seed") = -1,
          "Monte-Carlo payoff of the solved policy started at (x, mode)");
    m.def("compare", &compare_solution, py::arg("solution"), py::arg("refined") = true,
          "Cross-check solver values against policy Monte-Carlo at the configured probes");
    m.def("calibrate_barrier", &calibrate_barrier, py::arg("config"), py::arg("epsilon"),
          py::arg("mode"), py::arg("x"),
          "Calibrate the explicit barrier family at an anchor point");
    m.def("verify_barrier", &verify_barrier, py::arg("config"), py::arg("spec"),
          "Check the calibrated barrier from above and below");
    m.def("sandwich", &sandwich_solution, py::arg("solution"), py::arg("spec"),
          py::arg("theta") = 0.0, py::arg("lambda_") = 1.0, py::arg("gamma") = 1.0,
          "Verify the solution lies between the calibrated barriers");
}
