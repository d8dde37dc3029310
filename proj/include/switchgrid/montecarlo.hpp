#pragma once

#include <random>

#include "switchgrid/scheme.hpp"

namespace switchgrid {

struct SimConfig {
    int64_t paths = 10000;
    double dt = 0.01;
    uint64_t seed = 1;
    bool antithetic = false;
    int threads = 1;
};

struct SwitchEvent {
    double t = 0.0;
    int from = 0, to = 0;  // 0-based
    double cost = 0.0;
};

struct PathState {
    Vec x;
    int mode = 0;
    double t = 0.0;
    double accrued = 0.0;  // running payoff integral minus switch costs
    std::vector<SwitchEvent> switch_log;
    bool alive = true;  // false once the state goes non-finite
};

// Deterministic per-path stream: the engine seed mixes the run seed with the
// path index so results are independent of thread scheduling.
struct PathRng {
    std::mt19937_64 eng;
    std::normal_distribution<double> normal{0.0, 1.0};
    bool negate = false;  // antithetic partner: replay the stream with mirrored gaussians
    explicit PathRng(uint64_t seed, uint64_t path);
    double gauss() {
        double v = normal(eng);
        return negate ? -v : v;
    }
    int64_t poisson(double mean);
};

struct EstimateReport {
    double mean = 0.0;
    double stderr_ = 0.0;
    double ci95_lo = 0.0, ci95_hi = 0.0;
    int64_t paths = 0;
    double exit_fraction = 0.0;       // fraction of policy lookups clamped back into the box
    Vec time_in_mode;                 // fraction of path time spent per mode
    double running_term = 0.0;        // mean of integral psi dt
    double switch_cost_term = 0.0;    // mean of total switch costs paid
    double terminal_term = 0.0;       // mean of g at the final state
    double mean_switches = 0.0;
    uint64_t seed = 0;
};

// Strategy: target mode for (current mode, time step index, state); returning
// the current mode means stay.
using Strategy = std::function<int(int mode, int step, const Vec& x)>;

// One Euler-Maruyama step from state.t over dt, including Poisson-thinned
// jumps per atom and analytic compensation of atoms with |z| <= 1.
void simulate_step(PathState& state, const LevyModel& model, double dt, PathRng& rng);

EstimateReport evaluate_strategy(const SwitchingProblem& problem, const LevyModel& model,
                                 const Strategy& strategy, const Vec& x0, int i0,
                                 const SimConfig& cfg);

// Follows a solver policy by nearest-node lookup (clamped to the box).
EstimateReport evaluate_policy(const SwitchingProblem& problem, const LevyModel& model,
                               const ValueField& field, const SwitchPolicy& policy, const Vec& x0,
                               int i0, const SimConfig& cfg);

struct ComparePoint {
    Vec x0;
    int mode = 0;              // 0-based
    double pde_value = 0.0;
    double mc_mean = 0.0;
    double stderr_ = 0.0;
    double ci95_lo = 0.0, ci95_hi = 0.0;
    double gap = 0.0;
    double budget_dt = 0.0;    // 2 |estimate(dt) - estimate(dt/2)|, common random numbers
    double budget_h = 0.0;     // 2 |u_h - u_refined| at the probe, when a refined field is given
    bool pass = false;
};

struct CompareReport {
    bool pass = false;
    std::vector<ComparePoint> points;
};

// Cross-validation table: pass iff |gap| <= 3 stderr + budget_dt + budget_h.
CompareReport compare(const ValueField& field, const SwitchPolicy& policy,
                      const SwitchingProblem& problem, const LevyModel& model,
                      const std::vector<std::pair<Vec, int>>& points, const SimConfig& cfg,
                      const ValueField* refined_field = nullptr);

}  // namespace switchgrid
