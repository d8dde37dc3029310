#include "switchgrid/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "switchgrid/model.hpp"

namespace switchgrid {

namespace {

std::string format_node(const Lattice& lat, int64_t flat) {
    Vec x = lat.coord(flat);
    std::string s = "node " + std::to_string(flat) + " (x =";
    char buf[64];
    for (double v : x) {
        std::snprintf(buf, sizeof(buf), " %.6g", v);
        s += buf;
    }
    s += ")";
    return s;
}

// Atoms whose jump mark lies inside the unit ball are compensated: their
// first-order correction is folded into the effective drift.
bool compensated(const LevyAtom& atom) { return norm2(atom.z) <= 1.0; }

// Effective drift at (x, t): model drift minus the small-jump compensator.
Vec effective_drift(const LevyModel& model, const Vec& x, double t) {
    Vec a = model.drift(x, t);
    for (const auto& atom : model.measure.atoms) {
        if (!compensated(atom)) continue;
        Vec eta = model.eta(x, t, atom.z);
        for (size_t k = 0; k < a.size(); ++k) a[k] -= atom.w * eta[k];
    }
    return a;
}

// Total jump intensity (sum of atom weights).
double total_intensity(const LevyMeasure& measure) {
    double s = 0.0;
    for (const auto& atom : measure.atoms) s += atom.w;
    return s;
}

struct Placer {
    const Lattice& lat;
    int64_t flat;
    const std::vector<int>& idx;
    NodeStencil& ns;

    void operator()(bool second, std::initializer_list<std::pair<int, int>> deltas,
                    double w) const {
        if (w == 0.0) return;
        std::vector<int> nb = idx;
        for (auto [k, d] : deltas) nb[static_cast<size_t>(k)] += d;
        for (size_t k = 0; k < nb.size(); ++k)
            nb[k] = std::clamp(nb[k], 0, lat.nodes[k] - 1);
        const int64_t f = lat.flatten(nb);
        double& center = second ? ns.second_center : ns.drift_center;
        center -= w;
        if (f == flat) {
            center += w;  // clamped ghost folds back onto the node itself
            return;
        }
        auto& list = second ? ns.second : ns.drift;
        for (auto& e : list)
            if (e.first == f) {
                e.second += w;
                return;
            }
        list.emplace_back(f, w);
    }
};

// Enumerate simple switching cycles on modes {0..d-1} and report the smallest
// cost sum found, for diagnostics when the obstacle iteration cannot settle.
std::pair<double, std::vector<int>> smallest_cycle(const std::vector<std::vector<double>>& c) {
    const int d = static_cast<int>(c.size());
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_cycle, path;
    std::vector<bool> used(d, false);

    std::function<void(int, int, double)> dfs = [&](int start, int cur, double sum) {
        for (int j = 0; j < d; ++j) {
            if (j == cur) continue;
            if (j == start) {
                const double total = sum + c[cur][j];
                if (total < best) {
                    best = total;
                    best_cycle = path;
                    best_cycle.push_back(start);
                }
                continue;
            }
            if (j < start || used[j]) continue;  // canonical: smallest index first
            used[j] = true;
            path.push_back(j);
            dfs(start, j, sum + c[cur][j]);
            path.pop_back();
            used[j] = false;
        }
    };
    for (int s = 0; s < d; ++s) {
        path = {s};
        used.assign(d, false);
        used[s] = true;
        dfs(s, s, 0.0);
    }
    return {best, best_cycle};
}

// Shared per-step machinery: implicit rows A = (1 + dt r) I - dt S and the
// explicit right-hand side for each mode.
struct StepWork {
    const Lattice& lat;
    const LatticeStencil& impl;   // second-order part at t_n
    double dt;
    double discount;

    double center(int64_t node) const {
        return 1.0 + dt * discount - dt * impl.at[node].second_center;
    }
    // Off-diagonal sum dt * sum_nb w * v[nb].
    double neighbor_sum(int64_t node, const Vec& v) const {
        double s = 0.0;
        for (const auto& [nb, w] : impl.at[node].second) s += w * v[nb];
        return dt * s;
    }
    double apply_row(int64_t node, const Vec& v) const {
        return center(node) * v[node] - neighbor_sum(node, v);
    }
};

// Tridiagonal solve for the 1-D implicit rows (exact, O(M)).
void thomas_solve(const StepWork& work, const Vec& rhs, Vec& v) {
    const int64_t m = work.lat.size();
    Vec diag(m), sub(m, 0.0), sup(m, 0.0);
    for (int64_t i = 0; i < m; ++i) {
        diag[i] = work.center(i);
        for (const auto& [nb, w] : work.impl.at[i].second) {
            if (nb == i - 1) sub[i] = -work.dt * w;
            if (nb == i + 1) sup[i] = -work.dt * w;
        }
    }
    Vec c(m, 0.0), d(m, 0.0);
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for (int64_t i = 1; i < m; ++i) {
        const double denom = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / denom;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    v[m - 1] = d[m - 1];
    for (int64_t i = m - 2; i >= 0; --i) v[i] = d[i] - c[i] * v[i + 1];
}

// Gauss-Seidel for the N-D implicit rows; the diagonal dominates by 1 + dt*r,
// so the iteration contracts fast for parabolic step sizes.
void gs_solve(const StepWork& work, const Vec& rhs, Vec& v, double tol, int max_sweeps) {
    const int64_t m = work.lat.size();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double worst = 0.0;
        for (int64_t i = 0; i < m; ++i)
            worst = std::max(worst, std::fabs(work.apply_row(i, v) - rhs[i]));
        if (worst / work.dt <= tol) return;
        for (int64_t i = 0; i < m; ++i)
            v[i] = (rhs[i] + work.neighbor_sum(i, v)) / work.center(i);
    }
    throw SolverError("implicit diffusion solve did not converge within the sweep budget");
}

}  // namespace

double ValueField::interp(int mode, int n, const Vec& x, OutOfBox policy,
                          InterpDiagnostics* diag) const {
    FieldSlice s = view(mode, n);
    return s.interp(x, policy, diag);
}

LatticeStencil discretize_local(const LevyModel& model, const Lattice& lat, double t,
                                bool include_drift) {
    const int n_dim = static_cast<int>(lat.nodes.size());
    LatticeStencil out;
    out.lat = &lat;
    out.t = t;
    out.at.resize(static_cast<size_t>(lat.size()));

    std::vector<int> idx;
    for (int64_t flat = 0; flat < lat.size(); ++flat) {
        const Vec x = lat.coord(flat);
        lat.unflatten(flat, idx);
        NodeStencil& ns = out.at[static_cast<size_t>(flat)];
        Placer place{lat, flat, idx, ns};

        const Mat a = diffusion_matrix(model, x, t);
        // Axis weights: a_kk/h_k^2 minus the cross-term corrections. Failure
        // of the h-weighted dominance breaks monotonicity and is a hard error.
        for (int k = 0; k < n_dim; ++k) {
            const double hk = lat.h(k);
            double cross = 0.0;
            for (int l = 0; l < n_dim; ++l)
                if (l != k) cross += std::fabs(a(k, l)) / (hk * lat.h(l));
            const double axis = a(k, k) / (hk * hk) - cross;
            const double scale = std::max(1.0, a(k, k) / (hk * hk));
            if (axis < -1e-12 * scale) {
                char buf[160];
                std::snprintf(buf, sizeof(buf),
                              "diffusion matrix not h-weighted diagonally dominant in dimension "
                              "%d (a_kk/h_k^2 = %.6g < cross sum %.6g) at ",
                              k + 1, a(k, k) / (hk * hk), cross);
                throw SolverError(std::string(buf) + format_node(lat, flat));
            }
            const double w = std::max(axis, 0.0);
            place(true, {{k, +1}}, w);
            place(true, {{k, -1}}, w);
        }
        // Corner weights for the cross terms, signed by the correlation.
        for (int k = 0; k < n_dim; ++k)
            for (int l = k + 1; l < n_dim; ++l) {
                const double b = a(k, l);
                if (b == 0.0) continue;
                const double w = std::fabs(b) / (lat.h(k) * lat.h(l));
                if (b > 0.0) {
                    place(true, {{k, +1}, {l, +1}}, w);
                    place(true, {{k, -1}, {l, -1}}, w);
                } else {
                    place(true, {{k, +1}, {l, -1}}, w);
                    place(true, {{k, -1}, {l, +1}}, w);
                }
            }

        if (include_drift) {
            const Vec ad = effective_drift(model, x, t);
            for (int k = 0; k < n_dim; ++k) {
                if (ad[k] > 0.0)
                    place(false, {{k, +1}}, ad[k] / lat.h(k));
                else if (ad[k] < 0.0)
                    place(false, {{k, -1}}, -ad[k] / lat.h(k));
            }
        }
    }
    return out;
}

namespace {

// Explicit right-hand side for one mode: forward value plus dt times the
// upwinded drift, the raw jump differences, and the running payoff.
Vec explicit_rhs(const Vec& next, int mode, double t_next, const LevyModel& model,
                 const SwitchingProblem& problem, const Lattice& lat,
                 const LatticeStencil& expl, const SolveOptions& opts,
                 InterpDiagnostics* diag, double* max_outflow) {
    const int64_t m = lat.size();
    const double dt = lat.dt();
    const double lambda = total_intensity(model.measure);

    FieldSlice view;
    view.lat = &lat;
    view.v = next;

    Vec rhs(static_cast<size_t>(m));
    for (int64_t node = 0; node < m; ++node) {
        const NodeStencil& ns = expl.at[static_cast<size_t>(node)];
        const Vec x = lat.coord(node);

        double drift_term = ns.drift_center * next[node];
        for (const auto& [nb, w] : ns.drift) drift_term += w * next[nb];

        double jump_term = 0.0;
        for (const auto& atom : model.measure.atoms) {
            Vec y = model.eta(x, t_next, atom.z);
            for (size_t k = 0; k < y.size(); ++k) y[k] += x[k];
            jump_term += atom.w * (view.interp(y, opts.nonlocal.out_of_box, diag) - next[node]);
        }

        const double outflow = dt * (-ns.drift_center + lambda);
        *max_outflow = std::max(*max_outflow, outflow);
        if (outflow > 1.0 + 1e-9) {
            char buf[200];
            std::snprintf(buf, sizeof(buf),
                          "CFL bound violated: dt * (|effective drift|/h + jump intensity) = "
                          "%.6g > 1 at ",
                          outflow);
            throw SolverError(std::string(buf) + format_node(lat, node) +
                              "; shrink dt or coarsen the drift");
        }

        rhs[node] = next[node] +
                    dt * (drift_term + jump_term + problem.psi[mode](x, t_next));
    }
    return rhs;
}

}  // namespace

std::vector<Vec> step_backward(const std::vector<Vec>& next, int n, const LevyModel& model,
                               const SwitchingProblem& problem, const Lattice& lat,
                               const SolveOptions& opts, std::vector<int16_t>* actions,
                               SolveStats* stats) {
    const int d = problem.modes;
    const int64_t m = lat.size();
    const double dt = lat.dt();
    const double t_next = lat.time(n + 1);
    const double t_cur = lat.time(n);

    const LatticeStencil expl = discretize_local(model, lat, t_next, true);
    const LatticeStencil impl = discretize_local(model, lat, t_cur, false);
    StepWork work{lat, impl, dt, problem.discount};

    InterpDiagnostics diag;
    double max_outflow = 0.0;
    std::vector<Vec> rhs(d);
    for (int i = 0; i < d; ++i)
        rhs[i] = explicit_rhs(next[i], i, t_next, model, problem, lat, expl, opts, &diag,
                              &max_outflow);
    if (stats) {
        stats->cfl = std::max(stats->cfl, max_outflow);
        stats->out_of_box += diag.out_of_box;
        stats->interp_queries += diag.queries;
    }

    // Unconstrained implicit solve per mode (exact tridiagonal in 1-D).
    const bool one_dim = lat.nodes.size() == 1;
    std::vector<Vec> v(d);
    for (int i = 0; i < d; ++i) {
        v[i] = next[i];  // warm start
        if (one_dim)
            thomas_solve(work, rhs[i], v[i]);
        else
            gs_solve(work, rhs[i], v[i], 0.1 * opts.lcp_tol, opts.max_sweeps);
    }

    if (d == 1) {
        if (actions) std::fill(actions->begin(), actions->end(), kStay);
        return v;
    }

    // Switching costs at the implicit time level.
    std::vector<std::vector<Vec>> cost(d, std::vector<Vec>(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            cost[i][j].resize(static_cast<size_t>(m));
            for (int64_t node = 0; node < m; ++node)
                cost[i][j][node] = problem.cost[i][j].value(lat.coord(node), t_cur);
        }

    auto obstacle = [&](int i, int64_t node) {
        double best = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < d; ++j)
            if (j != i) best = std::max(best, v[j][node] - cost[i][j][node]);
        return best;
    };

    // Projected sweeps on the coupled obstacle problem. Convergence is
    // measured by the fixed-point residual in equation units.
    int sweeps = 0;
    int64_t worst_node = 0;
    for (;; ++sweeps) {
        double worst = 0.0;
        for (int i = 0; i < d; ++i)
            for (int64_t node = 0; node < m; ++node) {
                const double pde = (work.apply_row(node, v[i]) - rhs[i][node]) / dt;
                const double gap = v[i][node] - obstacle(i, node);
                const double res = std::fabs(std::min(pde, gap));
                if (res > worst) {
                    worst = res;
                    worst_node = node;
                }
            }
        if (worst <= opts.lcp_tol) break;
        if (sweeps >= opts.max_sweeps) {
            std::vector<std::vector<double>> c(d, std::vector<double>(d, 0.0));
            const Vec x = lat.coord(worst_node);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    if (i != j) c[i][j] = problem.cost[i][j].value(x, t_cur);
            auto [cycle_sum, cycle] = smallest_cycle(c);
            std::string cyc;
            for (size_t k = 0; k < cycle.size(); ++k)
                cyc += (k ? "->" : "") + std::to_string(cycle[k] + 1);
            char buf[220];
            std::snprintf(buf, sizeof(buf),
                          "obstacle iteration did not settle in %d sweeps at time level %d; "
                          "smallest switching cycle %s has cost sum %.6g at ",
                          sweeps, n, cyc.c_str(), cycle_sum);
            throw SolverError(std::string(buf) + format_node(lat, worst_node));
        }
        for (int i = 0; i < d; ++i)
            for (int64_t node = 0; node < m; ++node) {
                const double gs =
                    (rhs[i][node] + work.neighbor_sum(node, v[i])) / work.center(node);
                v[i][node] = std::max(gs, obstacle(i, node));
            }
    }
    if (stats) stats->max_sweeps_used = std::max(stats->max_sweeps_used, sweeps);

    if (actions) {
        for (int i = 0; i < d; ++i)
            for (int64_t node = 0; node < m; ++node) {
                int16_t act = kStay;
                const double ob = obstacle(i, node);
                if (v[i][node] - ob <= opts.obstacle_tol) {
                    for (int j = 0; j < d; ++j) {
                        if (j == i) continue;
                        const double cand = v[j][node] - cost[i][j][node];
                        if (cand >= ob - 1e-13 * (1.0 + std::fabs(ob))) {
                            act = static_cast<int16_t>(j);
                            break;  // lowest target index wins ties
                        }
                    }
                }
                (*actions)[static_cast<size_t>(i) * m + node] = act;
            }
    }
    return v;
}

SolveResult solve(const SwitchingProblem& problem, const LevyModel& model, const Lattice& lat,
                  const SolveOptions& opts) {
    lat.validate();
    if (problem.modes < 1 || problem.psi.size() != static_cast<size_t>(problem.modes) ||
        problem.terminal.size() != static_cast<size_t>(problem.modes) ||
        problem.cost.size() != static_cast<size_t>(problem.modes))
        throw ConfigError("problem arrays do not match the declared number of modes");
    for (const auto& row : problem.cost)
        if (row.size() != static_cast<size_t>(problem.modes))
            throw ConfigError("switching cost matrix is not square");

    if (!opts.skip_validation) {
        SampleSpec spec;
        spec.box = lat.box;
        spec.samples = opts.validation_samples;
        spec.t_hi = problem.horizon;
        ValidationReport rep = validate_all(model, problem, spec);
        if (!rep.all_pass()) {
            std::string names;
            for (const auto& c : rep.checks)
                if (!c.pass) names += (names.empty() ? "" : ", ") + c.name;
            throw SolverError("input validation failed (" + names +
                              "); fix the problem data or acknowledge explicitly");
        }
    }

    const int d = problem.modes;
    const int64_t m = lat.size();
    SolveResult out;
    out.field = ValueField(lat, d);
    out.policy.lat = lat;
    out.policy.modes = d;
    out.policy.actions.assign(static_cast<size_t>(lat.time_steps) + 1,
                              std::vector<int16_t>(static_cast<size_t>(d) * m, kStay));

    for (int i = 0; i < d; ++i) {
        Vec& g = out.field.slice(i, lat.time_steps);
        for (int64_t node = 0; node < m; ++node)
            g[node] = problem.terminal[i](lat.coord(node), problem.horizon);
        for (double val : g)
            if (!std::isfinite(val))
                throw SolverError("terminal data is not finite on the lattice");
    }

    for (int n = lat.time_steps - 1; n >= 0; --n) {
        std::vector<Vec> next(d);
        for (int i = 0; i < d; ++i) next[i] = out.field.slice(i, n + 1);
        std::vector<Vec> cur =
            step_backward(next, n, model, problem, lat, opts, &out.policy.actions[n], &out.stats);
        for (int i = 0; i < d; ++i) {
            for (double val : cur[i])
                if (!std::isfinite(val)) {
                    char buf[120];
                    std::snprintf(buf, sizeof(buf),
                                  "solution became non-finite at time level %d (t = %.6g), "
                                  "mode %d",
                                  n, lat.time(n), i + 1);
                    throw SolverError(buf);
                }
            out.field.slice(i, n) = std::move(cur[i]);
        }
    }

    out.residual = residual(out.field, model, opts, problem);
    out.stats.out_of_box += out.residual.out_of_box_queries;
    out.stats.interp_queries += out.residual.interp_queries;
    return out;
}

std::vector<int> contamination_layer(const LevyModel& model, const Lattice& lat, double horizon) {
    const int n_dim = static_cast<int>(lat.nodes.size());
    std::vector<int> layer(n_dim, 1);
    for (int k = 0; k < n_dim; ++k) {
        double max_eta = 0.0;
        for (const double t : {0.0, 0.5 * horizon, horizon})
            for (int64_t node = 0; node < lat.size(); ++node) {
                const Vec x = lat.coord(node);
                for (const auto& atom : model.measure.atoms)
                    max_eta = std::max(max_eta, std::fabs(model.eta(x, t, atom.z)[k]));
            }
        layer[k] = std::max(1, static_cast<int>(std::ceil(max_eta / lat.h(k) - 1e-12)));
    }
    return layer;
}

ResidualReport residual(const ValueField& field, const LevyModel& model,
                        const SolveOptions& opts, const SwitchingProblem& problem) {
    const Lattice& lat = field.lat;
    const int d = field.modes;
    const double dt = lat.dt();

    ResidualReport rep;
    // Jump displacements can reach several cells; exclude the contaminated rim.
    rep.boundary_layer = contamination_layer(model, lat, problem.horizon);

    rep.linf_by_time_mode.assign(static_cast<size_t>(lat.time_steps),
                                 std::vector<double>(d, 0.0));
    InterpDiagnostics diag;
    double abs_sum = 0.0;

    for (int n = 0; n < lat.time_steps; ++n) {
        const double t_cur = lat.time(n);
        const double t_next = lat.time(n + 1);
        const LatticeStencil impl = discretize_local(model, lat, t_cur, false);
        const LatticeStencil expl = discretize_local(model, lat, t_next, true);

        std::vector<FieldSlice> next_view(d);
        for (int i = 0; i < d; ++i) next_view[i] = field.view(i, n + 1);

        for (int i = 0; i < d; ++i) {
            const Vec& u_cur = field.slice(i, n);
            const Vec& u_next = field.slice(i, n + 1);
            std::vector<int> idx;
            for (int64_t node = 0; node < lat.size(); ++node) {
                lat.unflatten(node, idx);
                if (!lat.interior(idx, rep.boundary_layer)) continue;

                const Vec x = lat.coord(node);
                const NodeStencil& si = impl.at[static_cast<size_t>(node)];
                const NodeStencil& se = expl.at[static_cast<size_t>(node)];

                double su = si.second_center * u_cur[node];
                for (const auto& [nb, w] : si.second) su += w * u_cur[nb];
                double du = se.drift_center * u_next[node];
                for (const auto& [nb, w] : se.drift) du += w * u_next[nb];
                double ju = 0.0;
                for (const auto& atom : model.measure.atoms) {
                    Vec y = model.eta(x, t_next, atom.z);
                    for (size_t k = 0; k < y.size(); ++k) y[k] += x[k];
                    ju += atom.w *
                          (next_view[i].interp(y, opts.nonlocal.out_of_box, &diag) - u_next[node]);
                }

                const double pde = -((u_next[node] - u_cur[node]) / dt + su + du + ju) -
                                   problem.psi[i](x, t_next) + problem.discount * u_cur[node];
                double res = pde;
                if (d > 1) {
                    double ob = -std::numeric_limits<double>::infinity();
                    for (int j = 0; j < d; ++j)
                        if (j != i)
                            ob = std::max(ob, field.slice(j, n)[node] -
                                                  problem.cost[i][j].value(x, t_cur));
                    res = std::min(pde, u_cur[node] - ob);
                }

                const double mag = std::fabs(res);
                abs_sum += mag;
                ++rep.interior_count;
                rep.linf_by_time_mode[n][i] = std::max(rep.linf_by_time_mode[n][i], mag);
                if (mag > rep.linf) {
                    rep.linf = mag;
                    rep.worst_value = res;
                    rep.worst_x = x;
                    rep.worst_t = t_cur;
                    rep.worst_mode = i + 1;
                }
            }
        }
    }
    rep.l1 = rep.interior_count ? abs_sum / static_cast<double>(rep.interior_count) : 0.0;
    rep.out_of_box_queries = diag.out_of_box;
    rep.interp_queries = diag.queries;
    return rep;
}

}  // namespace switchgrid
