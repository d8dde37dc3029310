#pragma once

#include <map>
#include <optional>

#include "switchgrid/grid.hpp"
#include "switchgrid/types.hpp"

namespace switchgrid {

// One atom of the finite jump-activity measure.
struct LevyAtom {
    Vec z;     // mark in R^l
    double w;  // mass, > 0
};

struct LevyMeasure {
    std::vector<LevyAtom> atoms;
    double r_min = 0.0;  // largest radius carrying no mass around the origin
    double bound = -1.0; // configured integrability budget; < 0 means "measure only"
};

// Controlled jump-diffusion: drift a(x,t), diffusion factor sigma(x,t),
// jump amplitude eta(x,t,z) driven by a finite-activity measure.
struct LevyModel {
    int dim_state = 1;
    int dim_jump = 1;
    VectorFn drift;   // a: R^N x [0,T] -> R^N
    MatrixFn sigma;   // N x N factor; operator uses (sigma sigma^T) with full contraction
    JumpFn eta;       // displacement per mark
    LevyMeasure measure;
    double exp_tail_rate = 1.0;  // exponential moment rate the tail is tested against
    double eta_bound = -1.0;     // configured bound on |eta_k| / min(|z|,1); < 0 = measure only
    double lip_bound = -1.0;     // configured Lipschitz/growth constant; < 0 = measure only
};

// d-mode switching data on top of a model. cost[i][j] is the price of
// switching i -> j (diagonal identically zero); terminal[i] is time-independent.
struct SwitchingProblem {
    int modes = 2;
    double horizon = 1.0;
    std::vector<ScalarFn> psi;
    std::vector<std::vector<SmoothFn>> cost;
    std::vector<ScalarFn> terminal;
    double growth_B = -1.0;     // payoff growth budget B(1+|x|^gamma); < 0 = measure only
    double growth_gamma = 1.0;
    double discount = 0.0;      // optional zeroth-order coefficient r >= 0
};

// Outcome of one validator.
struct CheckResult {
    std::string name;
    bool pass = true;
    std::string detail;              // human-readable; names witnesses and cycles
    Vec witness_x;                   // sample point of the worst violation (if any)
    double witness_t = 0.0;
    std::vector<int> cycle;          // offending mode cycle (1-based), when relevant
    std::map<std::string, double> measured;  // constants estimated during the check
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    const CheckResult* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

struct SampleSpec {
    Box box;                  // spatial sampling box
    int samples = 9;          // nodes per dimension, >= 2
    double t_hi = 1.0;        // time sampled at {0, t_hi/2, t_hi}
    int max_cycle = 4;        // cycle length cap for the no-loop check (clamped to modes)
    double margin = 0.0;      // required strict positivity margin for cycle sums
    double lip_growth_factor = 1.2;  // refinement-instability threshold
};

// Drift/diffusion sanity: finiteness, measured Lipschitz and growth constants,
// refinement stability of difference quotients, pointwise PSD of sigma sigma^T.
CheckResult validate_coefficients(const LevyModel& model, const SampleSpec& spec);

// Measure integrability: sum_{|z|<=1} |z|^2 w + sum_{|z|>1} e^{rate |z|} w
// against the configured budget; positive masses; r_min consistency.
CheckResult validate_levy(const LevyMeasure& measure, double exp_tail_rate);

// Jump amplitude bound |eta_k(x,t,z)| <= B * min(|z|, 1) and Lipschitz-in-x
// stability, against the configured eta_bound when present.
CheckResult validate_jumps(const LevyModel& model, const SampleSpec& spec);

// Every sampled cycle of switching costs (length <= max_cycle) has sum > margin.
CheckResult check_no_loop(const SwitchingProblem& problem, const SampleSpec& spec);

// c_{i1,i2} + c_{i2,i3} >= c_{i1,i3} at every sampled point, all ordered triples.
CheckResult check_triangle(const SwitchingProblem& problem, const SampleSpec& spec);

// Terminal compatibility g_i >= max_{j != i} (-c_{i,j}(x,T) + g_j).
CheckResult check_terminal(const SwitchingProblem& problem, const SampleSpec& spec);

// All six checks in a fixed order.
ValidationReport validate_all(const LevyModel& model, const SwitchingProblem& problem,
                              const SampleSpec& spec);

}  // namespace switchgrid
