// switchgrid: validate, solve, bound, and cross-check multi-mode switching
// problems from a single JSON config.
//
// Exit codes: 0 success; 2 validation failure; 3 solver abort; 4 barrier
// calibration/verification failure; 5 cross-validation failure; 64 config or
// usage error.

#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "switchgrid/config.hpp"
#include "switchgrid/io.hpp"
#include "switchgrid/version.hpp"

namespace {

using namespace switchgrid;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitCalibration = 4;
constexpr int kExitCompare = 5;
constexpr int kExitConfig = 64;

struct CliArgs {
    std::string config_path;
    std::string out_dir;  // overrides the config when set
    bool force = false;
    int threads = 0;    // 0 = keep config value
    long long seed = -1;  // <0 = keep config value
};

std::string out_path(const RunConfig& rc, const char* name) {
    return (std::filesystem::path(rc.out_dir) / name).string();
}

RunConfig load(const CliArgs& args) {
    RunConfig rc = load_config(args.config_path);
    if (!args.out_dir.empty()) rc.out_dir = args.out_dir;
    if (args.threads > 0) rc.mc.threads = args.threads;
    if (args.seed >= 0) rc.mc.seed = static_cast<uint64_t>(args.seed);
    std::filesystem::create_directories(rc.out_dir);
    return rc;
}

void print_checks(const ValidationReport& rep) {
    for (const CheckResult& c : rep.checks) {
        std::printf("check %-24s %s", c.name.c_str(), c.pass ? "pass" : "FAIL");
        if (!c.pass) std::printf("  (%s)", c.detail.c_str());
        std::printf("\n");
    }
}

// Shared by every command that needs the solved field: validators first, then
// the backward sweep. The solver's own validation gate is bypassed because it
// already ran here (or the user forced past it).
int run_validators(const RunConfig& rc, bool force, ValidationReport& rep) {
    rep = validate_all(rc.model, rc.problem, rc.validation);
    write_validation_json(out_path(rc, "validation.json"), rep, rc.config_hash);
    print_checks(rep);
    if (!rep.all_pass() && !force) {
        std::printf("validation failed; rerun with --force to proceed anyway\n");
        return kExitValidation;
    }
    return kExitOk;
}

int cmd_validate(const CliArgs& args) {
    RunConfig rc = load(args);
    ValidationReport rep;
    return run_validators(rc, args.force, rep);
}

int cmd_solve(const CliArgs& args) {
    RunConfig rc = load(args);
    ValidationReport vrep;
    if (int code = run_validators(rc, args.force, vrep); code != kExitOk) return code;

    SolveOptions opts = rc.solver;
    opts.skip_validation = true;
    SolveResult sol;
    try {
        sol = solve(rc.problem, rc.model, rc.lattice, opts);
    } catch (const SolverError& e) {
        std::printf("solver abort: %s\n", e.what());
        return kExitSolver;
    }
    write_values_csv(out_path(rc, "values.csv"), sol.field, rc.config_hash);
    write_policy_csv(out_path(rc, "policy.csv"), sol.policy, rc.config_hash);
    ResidualReport res = sol.residual;
    if (!rc.residual_full) res.linf_by_time_mode.clear();
    write_residual_json(out_path(rc, "residual.json"), res, rc.config_hash);
    std::printf("solve ok: residual linf %s (interior nodes %lld), lcp sweeps max %d\n",
                format_double(sol.residual.linf).c_str(),
                static_cast<long long>(sol.residual.interior_count), sol.stats.max_sweeps_used);
    return kExitOk;
}

int cmd_barriers(const CliArgs& args) {
    RunConfig rc = load(args);
    if (rc.barriers.empty()) {
        std::printf("config error: barriers block with at least one anchor is required\n");
        return kExitConfig;
    }
    // The explicit barrier family only exists under loop-free, triangle-
    // consistent switching costs with a compatible terminal payoff, so a
    // violation is a calibration failure rather than a usage error.
    for (const CheckResult& c : {check_no_loop(rc.problem, rc.validation),
                                 check_triangle(rc.problem, rc.validation),
                                 check_terminal(rc.problem, rc.validation)}) {
        if (!c.pass) {
            std::printf("barrier calibration failed: check %s: %s\n", c.name.c_str(),
                        c.detail.c_str());
            return kExitCalibration;
        }
    }
    ValueField field;
    try {
        field = read_values_csv(out_path(rc, "values.csv"), rc.lattice, rc.problem.modes);
    } catch (const ConfigError& e) {
        std::printf("config error: %s (run 'switchgrid solve' first)\n", e.what());
        return kExitConfig;
    }

    CalibrateOptions copts;
    copts.max_doublings = rc.barrier_max_doublings;
    copts.nonlocal = rc.solver.nonlocal;
    copts.skip_validation = args.force;

    std::vector<BarrierRunRecord> records;
    std::vector<BarrierSpec> specs;
    bool all_pass = true;
    for (size_t k = 0; k < rc.barriers.size(); ++k) {
        const BarrierRequest& req = rc.barriers[k];
        BarrierRunRecord rec;
        try {
            rec.spec = calibrate(rc.problem, rc.model, rc.lattice, req.epsilon, req.anchor_mode,
                                 req.anchor, copts);
        } catch (const CalibrationError& e) {
            std::printf("barrier calibration failed for anchor %zu: %s\n", k, e.what());
            return kExitCalibration;
        }
        rec.above = verify_supersolution(rec.spec, BarrierSide::Above, rc.model, rc.problem,
                                         rc.lattice, rc.solver.nonlocal);
        rec.below = verify_supersolution(rec.spec, BarrierSide::Below, rc.model, rc.problem,
                                         rc.lattice, rc.solver.nonlocal);
        const PerturbationSpec* pspec =
            rc.perturbation.theta != 0.0 ? &rc.perturbation : nullptr;
        rec.sandwich = sandwich_check(field, rec.spec, rc.problem, rc.model, rc.solver.nonlocal,
                                      static_cast<int>(k), pspec);
        std::printf("anchor %zu (mode %d, eps %s): K %s lambda %s  sandwich %s\n", k,
                    rec.spec.anchor_mode + 1, format_double(rec.spec.epsilon).c_str(),
                    format_double(rec.spec.K).c_str(), format_double(rec.spec.lambda).c_str(),
                    rec.sandwich.pass ? "pass" : "FAIL");
        all_pass = all_pass && rec.above.pass && rec.below.pass && rec.sandwich.pass;
        specs.push_back(rec.spec);
        records.push_back(std::move(rec));
    }
    write_barriers_json(out_path(rc, "barriers.json"), records, rc.config_hash);
    const PerturbationSpec* pspec = rc.perturbation.theta != 0.0 ? &rc.perturbation : nullptr;
    write_sandwich_csv(out_path(rc, "sandwich.csv"), field, specs, rc.problem, rc.model, pspec,
                       rc.config_hash);
    if (!all_pass) {
        std::printf("barrier verification or sandwich failed; see barriers.json\n");
        return kExitCalibration;
    }
    return kExitOk;
}

int cmd_compare(const CliArgs& args) {
    RunConfig rc = load(args);
    ValueField field;
    SwitchPolicy policy;
    try {
        field = read_values_csv(out_path(rc, "values.csv"), rc.lattice, rc.problem.modes);
        policy = read_policy_csv(out_path(rc, "policy.csv"), rc.lattice, rc.problem.modes);
    } catch (const ConfigError& e) {
        std::printf("config error: %s (run 'switchgrid solve' first)\n", e.what());
        return kExitConfig;
    }

    // Refined lattice (h/2, dt/2) for the discretization part of the budget.
    Lattice fine = rc.lattice;
    for (int k = 0; k < fine.dim(); ++k) fine.nodes[k] = 2 * fine.nodes[k] - 1;
    fine.time_steps *= 2;
    SolveOptions opts = rc.solver;
    opts.skip_validation = true;
    CompareReport rep;
    try {
        SolveResult refined = solve(rc.problem, rc.model, fine, opts);
        rep = compare(field, policy, rc.problem, rc.model, rc.probes, rc.mc, &refined.field);
    } catch (const SolverError& e) {
        std::printf("solver abort: %s\n", e.what());
        return kExitSolver;
    }
    write_compare_csv(out_path(rc, "compare.csv"), rep, rc.config_hash);
    for (size_t k = 0; k < rep.points.size(); ++k) {
        const ComparePoint& p = rep.points[k];
        std::printf("probe %zu (mode %d): pde %s mc %s +- %s gap %s budget %s  %s\n", k,
                    p.mode + 1, format_double(p.pde_value).c_str(),
                    format_double(p.mc_mean).c_str(), format_double(p.stderr_).c_str(),
                    format_double(p.gap).c_str(),
                    format_double(3.0 * p.stderr_ + p.budget_dt + p.budget_h).c_str(),
                    p.pass ? "pass" : "FAIL");
    }
    return rep.pass ? kExitOk : kExitCompare;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(kToolName) + " " + kToolVersion +
                 ": switching-system solver, barriers, and Monte-Carlo cross-checks"};
    app.require_subcommand(1);

    CliArgs args;
    auto add_common = [&args](CLI::App* cmd) {
        cmd->add_option("--config", args.config_path, "JSON run configuration")->required();
        cmd->add_option("--out", args.out_dir, "output directory (overrides the config)");
        cmd->add_flag("--force", args.force, "proceed despite validator failures");
        cmd->add_option("--threads", args.threads, "worker threads for sampling");
        cmd->add_option("--seed", args.seed, "Monte-Carlo seed (overrides the config)");
    };

    CLI::App* validate = app.add_subcommand("validate", "run the assumption validators");
    CLI::App* solve_cmd = app.add_subcommand("solve", "validate, solve, write value/policy files");
    CLI::App* barriers = app.add_subcommand("barriers", "calibrate barriers, check the sandwich");
    CLI::App* compare_cmd = app.add_subcommand("compare", "cross-check the field by simulation");
    for (CLI::App* c : {validate, solve_cmd, barriers, compare_cmd}) add_common(c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints help or the parse error
        return kExitConfig;
    }

    try {
        if (validate->parsed()) return cmd_validate(args);
        if (solve_cmd->parsed()) return cmd_solve(args);
        if (barriers->parsed()) return cmd_barriers(args);
        if (compare_cmd->parsed()) return cmd_compare(args);
    } catch (const ConfigError& e) {
        std::printf("config error: %s\n", e.what());
        return kExitConfig;
    } catch (const CalibrationError& e) {
        std::printf("calibration error: %s\n", e.what());
        return kExitCalibration;
    } catch (const SolverError& e) {
        std::printf("solver abort: %s\n", e.what());
        return kExitSolver;
    } catch (const std::exception& e) {
        std::printf("error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitConfig;
}
