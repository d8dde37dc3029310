#pragma once

#include "switchgrid/scheme.hpp"

namespace switchgrid {

// Explicit super/sub-solution family pinching the solution to g at (y, T).
struct BarrierSpec {
    int anchor_mode = 0;  // i, 0-based internally
    Vec anchor;           // y
    double epsilon = 0.25;
    double K = 1.0;
    double lambda = 1.0;
    double lipschitz = 0.0;  // L, Lipschitz scale of the common terminal g
    double g_at_anchor = 0.0;
};

// Additive supersolution perturbation theta * e^{-lambda t} (|x|^{2 gamma + 2} + 1).
struct PerturbationSpec {
    double theta = 0.0;
    double lambda = 1.0;
    double gamma = 1.0;  // >= 1/2
};

// Closed-form barrier component j (0-based), with analytic derivatives.
//   above: g(y) + (K/eps^2)(T-t) + L (e^{lambda (T-t)} + 1) (|x-y|^2 + eps)^{1/2} + c_{i,j}(x,t)
//   below: mirror with minus signs.
SmoothFn barrier_above(const BarrierSpec& spec, int j, const SwitchingProblem& problem);
SmoothFn barrier_below(const BarrierSpec& spec, int j, const SwitchingProblem& problem);

double eval_barrier_above(const BarrierSpec& spec, int j, const Vec& x, double t,
                          const SwitchingProblem& problem);
double eval_barrier_below(const BarrierSpec& spec, int j, const Vec& x, double t,
                          const SwitchingProblem& problem);

enum class BarrierSide { Above, Below };

struct BarrierCheck {
    bool pass = false;
    double min_pde_margin = 0.0;       // above: -H u - psi (want >= -tol); below: -(-H u - psi)
    double min_obstacle_margin = 0.0;  // above only: u_j - max_k(-c_jk + u_k)
    double min_terminal_margin = 0.0;  // above: u_j(., T) - g_j; below: g_j - u_j(., T)
    bool obstacle_pass = true;
    Vec worst_x;
    double worst_t = 0.0;
    int worst_mode = 0;  // 1-based
};

// Checks the candidate at every interior lattice node and every time level
// t < T (plus terminal dominance at T for the Above side).
BarrierCheck verify_supersolution(const BarrierSpec& spec, BarrierSide side,
                                  const LevyModel& model, const SwitchingProblem& problem,
                                  const Lattice& lat, const NonlocalConfig& cfg, double tol = 1e-8);

struct CalibrateOptions {
    int max_doublings = 40;
    double tol = 0.0;   // required min residual during calibration
    NonlocalConfig nonlocal;
    bool skip_validation = false;  // proceed despite hypothesis-validator failures
};

// Doubling search on (K, lambda) from (1, 1) until both barrier sides verify
// on the lattice. L is the measured Lipschitz quotient of g inflated by 5%.
// Throws CalibrationError when hypotheses fail (unless skipped) or the
// doubling budget is exhausted.
BarrierSpec calibrate(const SwitchingProblem& problem, const LevyModel& model, const Lattice& lat,
                      double epsilon, int anchor_mode, const Vec& anchor,
                      const CalibrateOptions& opts = {});

// The perturbation as an analytic candidate (for residual arithmetic).
SmoothFn perturbation_fn(const PerturbationSpec& pspec);

// Adds theta e^{-lambda t_n} (|x|^{2 gamma + 2} + 1) to every mode/time/node.
ValueField perturb_supersolution(const ValueField& field, const PerturbationSpec& pspec);

// Measured threshold c such that lambda > c makes the perturbed field a
// supersolution (the zeroth-order estimate the perturbation construction rests on):
// c = max over nodes of [L phi + I phi] / phi with phi = |x|^{2gamma+2} + 1.
double perturbation_threshold(const LevyModel& model, const Lattice& lat,
                              const PerturbationSpec& pspec, const NonlocalConfig& cfg);

struct SandwichRow {
    int anchor_index = 0;
    int mode = 0;  // 1-based
    int time_index = 0;
    double t = 0.0;
    double min_margin_below = 0.0;  // min over interior nodes of u - below
    double min_margin_above = 0.0;  // min over interior nodes of above - u
    double min_gap = 0.0;           // min obstacle gap of u at this (mode, time)
    double min_gap_perturbed = 0.0;
};

struct SandwichReport {
    bool pass = false;
    bool verified = false;  // guarded precondition: barriers verified first
    double min_margin_below = 0.0;
    double min_margin_above = 0.0;
    std::vector<SandwichRow> rows;
    Vec worst_x;
    double worst_t = 0.0;
    int worst_mode = 0;
    // Terminal pinch: u_i(y, T) - g(y) and the barrier envelope at (y, T).
    double pinch_value = 0.0;
    double pinch_envelope = 0.0;
};

// Asserts below <= u_j <= above at every interior node and time level, for all
// components j, after re-verifying both barrier sides. Refuses (verified=false) when
// verification fails.
SandwichReport sandwich_check(const ValueField& field, const BarrierSpec& spec,
                              const SwitchingProblem& problem, const LevyModel& model,
                              const NonlocalConfig& cfg, int anchor_index = 0,
                              const PerturbationSpec* pspec = nullptr, double tol = 1e-8);

}  // namespace switchgrid
