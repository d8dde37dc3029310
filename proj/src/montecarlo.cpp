#include "switchgrid/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <thread>

namespace switchgrid {

namespace {

std::string msgf(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    return std::string(buf);
}

}  // namespace

PathRng::PathRng(uint64_t seed, uint64_t path) {
    std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                      static_cast<uint32_t>(path), static_cast<uint32_t>(path >> 32)};
    eng.seed(seq);
}

int64_t PathRng::poisson(double mean) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<int64_t> dist(mean);
    return dist(eng);
}

void simulate_step(PathState& state, const LevyModel& model, double dt, PathRng& rng) {
    const int n = model.dim_state;
    const double s = state.t;
    const Vec a = model.drift(state.x, s);
    const Mat sig = model.sigma(state.x, s);

    // The generator pairs (sigma sigma^T) with the full Hessian trace, which
    // is twice the classical half-contraction; the matching diffusion
    // displacement over dt is therefore sigma * sqrt(2 dt) * xi.
    const double root = std::sqrt(2.0 * dt);
    Vec xnew = state.x;
    for (int k = 0; k < n; ++k) xnew[k] += a[k] * dt;
    for (int j = 0; j < n; ++j) {
        const double xi = rng.gauss();
        for (int k = 0; k < n; ++k) xnew[k] += root * sig(k, j) * xi;
    }

    // Jumps: per-atom Poisson counts; each jump displaces from the state the
    // previous jumps of this step produced.  Atoms inside the closed unit
    // ball are compensated by subtracting their mean displacement.
    Vec xpre = state.x;
    for (const LevyAtom& atom : model.measure.atoms) {
        const int64_t count = rng.poisson(atom.w * dt);
        for (int64_t c = 0; c < count; ++c) {
            const Vec d = model.eta(xpre, s, atom.z);
            for (int k = 0; k < n; ++k) {
                xpre[k] += d[k];
                xnew[k] += d[k];
            }
        }
        if (norm2(atom.z) <= 1.0) {
            const Vec d0 = model.eta(state.x, s, atom.z);
            for (int k = 0; k < n; ++k) xnew[k] -= atom.w * dt * d0[k];
        }
    }

    state.x = std::move(xnew);
    state.t = s + dt;
    for (int k = 0; k < n; ++k)
        if (!std::isfinite(state.x[k])) state.alive = false;
}

namespace {

// Everything one path contributes to the estimate, reduced later in a fixed
// order so results do not depend on thread scheduling.
struct PathOutcome {
    double payoff = 0.0;
    double running = 0.0;
    double cost = 0.0;
    double terminal = 0.0;
    int switches = 0;
    int64_t lookups = 0;
    int64_t clamped = 0;
    Vec mode_frac;  // fraction of path time per mode
    bool ok = true;
    double bad_t = 0.0;
};

// Per-step decision hook; policy playback also records lookup statistics.
using ActionFn = std::function<int(int mode, int step, const Vec& x, PathOutcome& out)>;

PathOutcome run_one_path(const SwitchingProblem& problem, const LevyModel& model,
                         const ActionFn& act, const Vec& x0, int i0, const SimConfig& cfg,
                         int64_t steps, uint64_t path) {
    PathRng rng(cfg.seed, cfg.antithetic ? path / 2 : path);
    rng.negate = cfg.antithetic && (path % 2 == 1);

    PathState st;
    st.x = x0;
    st.mode = i0;
    st.t = 0.0;

    PathOutcome out;
    Vec mode_time(problem.modes, 0.0);

    for (int64_t n = 0; n < steps; ++n) {
        const double t = static_cast<double>(n) * cfg.dt;
        st.t = t;

        int chain = 0;
        for (;;) {
            const int target = act(st.mode, static_cast<int>(n), st.x, out);
            if (target < 0 || target == st.mode) break;
            if (target >= problem.modes)
                throw ConfigError(msgf("strategy requested mode %d out of %d", target + 1,
                                       problem.modes));
            if (++chain > problem.modes)
                throw SolverError(
                    msgf("strategy switched %d times within step %lld (t = %.6g); switching "
                         "costs admit no profitable loop, so a chain longer than the mode "
                         "count signals a runaway strategy",
                         chain, static_cast<long long>(n), t));
            const double c = problem.cost[st.mode][target].value(st.x, t);
            out.cost += c;
            out.switches += 1;
            st.switch_log.push_back({t, st.mode, target, c});
            st.mode = target;
        }

        mode_time[st.mode] += cfg.dt;
        out.running += problem.psi[st.mode](st.x, t) * cfg.dt;

        simulate_step(st, model, cfg.dt, rng);
        if (!st.alive) {
            out.ok = false;
            out.bad_t = st.t;
            return out;
        }
    }

    out.terminal = problem.terminal[st.mode](st.x, problem.horizon);
    out.payoff = out.running - out.cost + out.terminal;

    double total = 0.0;
    for (double v : mode_time) total += v;
    out.mode_frac.assign(problem.modes, 0.0);
    if (total > 0.0)
        for (int i = 0; i < problem.modes; ++i) out.mode_frac[i] = mode_time[i] / total;
    return out;
}

int64_t vet_config(const SwitchingProblem& problem, const LevyModel& model, const Vec& x0, int i0,
                   const SimConfig& cfg) {
    if (cfg.paths <= 0) throw ConfigError("path count must be positive");
    if (cfg.antithetic && cfg.paths % 2 != 0)
        throw ConfigError("antithetic sampling needs an even path count");
    if (!(cfg.dt > 0.0)) throw ConfigError("simulation step dt must be positive");
    if (i0 < 0 || i0 >= problem.modes)
        throw ConfigError(msgf("start mode %d outside the %d configured modes", i0 + 1,
                               problem.modes));
    if (static_cast<int>(x0.size()) != model.dim_state)
        throw ConfigError(msgf("start point has dimension %d but the model state dimension is %d",
                               static_cast<int>(x0.size()), model.dim_state));
    if (static_cast<int>(problem.psi.size()) < problem.modes ||
        static_cast<int>(problem.terminal.size()) < problem.modes ||
        static_cast<int>(problem.cost.size()) < problem.modes)
        throw ConfigError("problem data must provide psi, terminal, and cost for every mode");

    const double ratio = problem.horizon / cfg.dt;
    const int64_t steps = std::llround(ratio);
    if (steps <= 0 ||
        std::fabs(static_cast<double>(steps) * cfg.dt - problem.horizon) >
            1e-9 * std::max(1.0, problem.horizon))
        throw ConfigError(msgf("simulation step dt = %g must divide the horizon %g evenly",
                               cfg.dt, problem.horizon));
    return steps;
}

EstimateReport estimate(const SwitchingProblem& problem, const LevyModel& model,
                        const ActionFn& act, const Vec& x0, int i0, const SimConfig& cfg) {
    const int64_t steps = vet_config(problem, model, x0, i0, cfg);
    const int64_t paths = cfg.paths;

    std::vector<PathOutcome> outs(static_cast<size_t>(paths));
    const int threads = std::max(1, cfg.threads);
    if (threads == 1) {
        for (int64_t p = 0; p < paths; ++p)
            outs[static_cast<size_t>(p)] =
                run_one_path(problem, model, act, x0, i0, cfg, steps, static_cast<uint64_t>(p));
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<size_t>(threads));
        const int64_t chunk = (paths + threads - 1) / threads;
        for (int w = 0; w < threads; ++w) {
            const int64_t lo = w * chunk;
            const int64_t hi = std::min(paths, lo + chunk);
            pool.emplace_back([&, w, lo, hi]() {
                try {
                    for (int64_t p = lo; p < hi; ++p)
                        outs[static_cast<size_t>(p)] = run_one_path(problem, model, act, x0, i0,
                                                                    cfg, steps,
                                                                    static_cast<uint64_t>(p));
                } catch (...) {
                    errors[static_cast<size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    for (int64_t p = 0; p < paths; ++p)
        if (!outs[static_cast<size_t>(p)].ok)
            throw SolverError(msgf("path %lld became non-finite at t = %.6g; check coefficient "
                                   "growth or reduce the simulation step",
                                   static_cast<long long>(p), outs[static_cast<size_t>(p)].bad_t));

    // Fixed-order streaming moments: identical samples keep the variance at
    // exactly zero, and the reduction is independent of the thread layout.
    EstimateReport rep;
    rep.paths = paths;
    rep.seed = cfg.seed;
    rep.time_in_mode.assign(problem.modes, 0.0);
    double mean = 0.0, m2 = 0.0;
    double run_mean = 0.0, cost_mean = 0.0, term_mean = 0.0, switch_mean = 0.0;
    int64_t lookups = 0, clamped = 0;
    for (int64_t p = 0; p < paths; ++p) {
        const PathOutcome& o = outs[static_cast<size_t>(p)];
        const double k = static_cast<double>(p + 1);
        const double delta = o.payoff - mean;
        mean += delta / k;
        m2 += delta * (o.payoff - mean);
        run_mean += (o.running - run_mean) / k;
        cost_mean += (o.cost - cost_mean) / k;
        term_mean += (o.terminal - term_mean) / k;
        switch_mean += (static_cast<double>(o.switches) - switch_mean) / k;
        for (int i = 0; i < problem.modes; ++i) {
            const double f = o.mode_frac.empty() ? 0.0 : o.mode_frac[i];
            rep.time_in_mode[i] += (f - rep.time_in_mode[i]) / k;
        }
        lookups += o.lookups;
        clamped += o.clamped;
    }
    rep.mean = mean;
    rep.running_term = run_mean;
    rep.switch_cost_term = cost_mean;
    rep.terminal_term = term_mean;
    rep.mean_switches = switch_mean;
    const double var = paths > 1 ? std::max(0.0, m2 / static_cast<double>(paths - 1)) : 0.0;
    rep.stderr_ = std::sqrt(var / static_cast<double>(paths));
    const double z95 = 1.959963984540054;
    rep.ci95_lo = rep.mean - z95 * rep.stderr_;
    rep.ci95_hi = rep.mean + z95 * rep.stderr_;
    rep.exit_fraction =
        lookups > 0 ? static_cast<double>(clamped) / static_cast<double>(lookups) : 0.0;
    return rep;
}

}  // namespace

EstimateReport evaluate_strategy(const SwitchingProblem& problem, const LevyModel& model,
                                 const Strategy& strategy, const Vec& x0, int i0,
                                 const SimConfig& cfg) {
    if (!strategy) throw ConfigError("strategy callback is empty");
    ActionFn act = [&strategy](int mode, int step, const Vec& x, PathOutcome&) {
        return strategy(mode, step, x);
    };
    return estimate(problem, model, act, x0, i0, cfg);
}

EstimateReport evaluate_policy(const SwitchingProblem& problem, const LevyModel& model,
                               const ValueField& field, const SwitchPolicy& policy, const Vec& x0,
                               int i0, const SimConfig& cfg) {
    const Lattice& lat = field.lat;
    lat.validate();
    if (field.modes != problem.modes || policy.modes != problem.modes)
        throw ConfigError(msgf("field/policy carry %d/%d modes but the problem has %d",
                               field.modes, policy.modes, problem.modes));
    if (static_cast<int>(policy.actions.size()) != lat.time_steps + 1)
        throw ConfigError("policy does not cover every time level of its lattice");
    if (std::fabs(lat.horizon - problem.horizon) > 1e-9 * std::max(1.0, problem.horizon))
        throw ConfigError(msgf("lattice horizon %g differs from the problem horizon %g",
                               lat.horizon, problem.horizon));

    const double lat_dt = lat.dt();
    ActionFn act = [&, lat_dt](int mode, int step, const Vec& x, PathOutcome& out) {
        const double t = static_cast<double>(step) * cfg.dt;
        int level = static_cast<int>(std::llround(t / lat_dt));
        level = std::clamp(level, 0, lat.time_steps);

        out.lookups += 1;
        bool clamp_hit = false;
        int64_t flat = 0;
        for (int k = 0; k < lat.dim(); ++k) {
            long idx = std::lround((x[k] - lat.box.lo[k]) / lat.h(k));
            if (idx < 0) {
                idx = 0;
                clamp_hit = true;
            } else if (idx > lat.nodes[k] - 1) {
                idx = lat.nodes[k] - 1;
                clamp_hit = true;
            }
            flat = flat * lat.nodes[k] + idx;
        }
        if (clamp_hit) out.clamped += 1;
        return static_cast<int>(policy.action(mode, level, flat));
    };
    return estimate(problem, model, act, x0, i0, cfg);
}

CompareReport compare(const ValueField& field, const SwitchPolicy& policy,
                      const SwitchingProblem& problem, const LevyModel& model,
                      const std::vector<std::pair<Vec, int>>& points, const SimConfig& cfg,
                      const ValueField* refined_field) {
    CompareReport rep;
    rep.pass = true;
    for (const auto& [x0, mode] : points) {
        ComparePoint cp;
        cp.x0 = x0;
        cp.mode = mode;
        cp.pde_value = field.interp(mode, 0, x0);

        const EstimateReport est = evaluate_policy(problem, model, field, policy, x0, mode, cfg);
        SimConfig half = cfg;  // common random numbers: same seed, halved step
        half.dt = cfg.dt / 2.0;
        const EstimateReport est2 =
            evaluate_policy(problem, model, field, policy, x0, mode, half);

        cp.mc_mean = est.mean;
        cp.stderr_ = est.stderr_;
        cp.ci95_lo = est.ci95_lo;
        cp.ci95_hi = est.ci95_hi;
        cp.gap = std::fabs(cp.pde_value - est.mean);
        // First-order Richardson envelopes for the time-stepping bias and,
        // when a refinement is supplied, for the lattice bias.
        cp.budget_dt = 2.0 * std::fabs(est.mean - est2.mean);
        cp.budget_h =
            refined_field ? 2.0 * std::fabs(cp.pde_value - refined_field->interp(mode, 0, x0))
                          : 0.0;
        cp.pass = cp.gap <= 3.0 * est.stderr_ + cp.budget_dt + cp.budget_h + 1e-12;
        rep.pass = rep.pass && cp.pass;
        rep.points.push_back(std::move(cp));
    }
    return rep;
}

}  // namespace switchgrid
