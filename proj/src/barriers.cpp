#include "switchgrid/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace switchgrid {

namespace {

// Shared closed form: sign = +1 builds the upper barrier, -1 its mirror.
SmoothFn barrier_core(const BarrierSpec& spec, int j, const SwitchingProblem& problem,
                      double sign) {
    const double T = problem.horizon;
    const double K = spec.K, lam = spec.lambda, L = spec.lipschitz, eps = spec.epsilon;
    const double gy = spec.g_at_anchor;
    const Vec y = spec.anchor;
    const SmoothFn cost = problem.cost[spec.anchor_mode][j];

    auto dist2 = [y](const Vec& x) {
        double d2 = 0.0;
        for (size_t k = 0; k < x.size(); ++k) d2 += sq(x[k] - y[k]);
        return d2;
    };

    // With L = 0 the lambda-weighted term is absent entirely; skipping it also
    // avoids evaluating exp at extreme lambda values.
    auto lm = [L, lam, T](double t) { return L == 0.0 ? 0.0 : L * (std::exp(lam * (T - t)) + 1.0); };

    SmoothFn f;
    f.value = [=](const Vec& x, double t) {
        const double s = std::sqrt(dist2(x) + eps);
        return gy + sign * ((K / (eps * eps)) * (T - t) + lm(t) * s + cost.value(x, t));
    };
    f.gradient = [=](const Vec& x, double t) {
        const double s = std::sqrt(dist2(x) + eps);
        const double c = lm(t);
        Vec g = cost.gradient(x, t);
        for (size_t k = 0; k < x.size(); ++k)
            g[k] = sign * (c * (x[k] - y[k]) / s + g[k]);
        return g;
    };
    f.hessian = [=](const Vec& x, double t) {
        const double s = std::sqrt(dist2(x) + eps);
        const double s3 = s * s * s;
        const double c = lm(t);
        Mat H = cost.hessian(x, t);
        const int n = H.rows;
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                const double dk = x[k] - y[k], dl = x[l] - y[l];
                const double curv = (k == l ? 1.0 / s : 0.0) - dk * dl / s3;
                H(k, l) = sign * (c * curv + H(k, l));
            }
        return H;
    };
    f.time_deriv = [=](const Vec& x, double t) {
        const double s = std::sqrt(dist2(x) + eps);
        const double decay =
            L == 0.0 ? 0.0 : L * lam * std::exp(lam * (T - t)) * s;
        return sign * (-K / (eps * eps) - decay + cost.time_deriv(x, t));
    };
    return f;
}

std::string format_point(const Vec& x, double t) {
    char buf[64];
    std::string s = "(x =";
    for (double v : x) {
        std::snprintf(buf, sizeof(buf), " %.6g", v);
        s += buf;
    }
    std::snprintf(buf, sizeof(buf), ", t = %.6g)", t);
    s += buf;
    return s;
}

}  // namespace

SmoothFn barrier_above(const BarrierSpec& spec, int j, const SwitchingProblem& problem) {
    return barrier_core(spec, j, problem, +1.0);
}

SmoothFn barrier_below(const BarrierSpec& spec, int j, const SwitchingProblem& problem) {
    return barrier_core(spec, j, problem, -1.0);
}

double eval_barrier_above(const BarrierSpec& spec, int j, const Vec& x, double t,
                          const SwitchingProblem& problem) {
    return barrier_core(spec, j, problem, +1.0).value(x, t);
}

double eval_barrier_below(const BarrierSpec& spec, int j, const Vec& x, double t,
                          const SwitchingProblem& problem) {
    return barrier_core(spec, j, problem, -1.0).value(x, t);
}

BarrierCheck verify_supersolution(const BarrierSpec& spec, BarrierSide side,
                                  const LevyModel& model, const SwitchingProblem& problem,
                                  const Lattice& lat, const NonlocalConfig& cfg, double tol) {
    const int d = problem.modes;
    const bool above = side == BarrierSide::Above;
    const double T = problem.horizon;

    std::vector<SmoothFn> w(d);
    std::vector<PointEval> we(d);
    for (int j = 0; j < d; ++j) {
        w[j] = barrier_core(spec, j, problem, above ? +1.0 : -1.0);
        we[j] = as_point_eval(w[j]);
    }

    const std::vector<int> layer = contamination_layer(model, lat, T);
    BarrierCheck out;
    out.min_pde_margin = std::numeric_limits<double>::infinity();
    out.min_obstacle_margin = std::numeric_limits<double>::infinity();
    out.min_terminal_margin = std::numeric_limits<double>::infinity();

    std::vector<int> idx;
    for (int j = 0; j < d; ++j) {
        for (int n = 0; n < lat.time_steps; ++n) {
            const double t = lat.time(n);
            for (int64_t node = 0; node < lat.size(); ++node) {
                lat.unflatten(node, idx);
                if (!lat.interior(idx, layer)) continue;
                const Vec x = lat.coord(node);

                const double H = apply_Hkappa(model, cfg, x, t, w[j], we[j]);
                const double raw = -H - problem.psi[j](x, t) +
                                   problem.discount * w[j].value(x, t);
                const double margin = above ? raw : -raw;
                if (margin < out.min_pde_margin) {
                    out.min_pde_margin = margin;
                    out.worst_x = x;
                    out.worst_t = t;
                    out.worst_mode = j + 1;
                }

                if (above && d > 1) {
                    const double wj = w[j].value(x, t);
                    double ob = -std::numeric_limits<double>::infinity();
                    for (int k = 0; k < d; ++k)
                        if (k != j)
                            ob = std::max(ob,
                                          w[k].value(x, t) - problem.cost[j][k].value(x, t));
                    out.min_obstacle_margin = std::min(out.min_obstacle_margin, wj - ob);
                }
            }
        }
        // Terminal dominance over the whole box.
        for (int64_t node = 0; node < lat.size(); ++node) {
            const Vec x = lat.coord(node);
            const double wT = w[j].value(x, T);
            const double gj = problem.terminal[j](x, T);
            const double margin = above ? wT - gj : gj - wT;
            out.min_terminal_margin = std::min(out.min_terminal_margin, margin);
        }
    }
    if (!std::isfinite(out.min_obstacle_margin)) out.min_obstacle_margin = 0.0;
    out.obstacle_pass = !above || d == 1 || out.min_obstacle_margin >= -tol;
    out.pass = out.min_pde_margin >= -tol && out.min_terminal_margin >= -tol &&
               out.obstacle_pass;
    return out;
}

BarrierSpec calibrate(const SwitchingProblem& problem, const LevyModel& model, const Lattice& lat,
                      double epsilon, int anchor_mode, const Vec& anchor,
                      const CalibrateOptions& opts) {
    if (epsilon <= 0.0) throw ConfigError("barrier epsilon must be positive");
    if (anchor_mode < 0 || anchor_mode >= problem.modes)
        throw ConfigError("barrier anchor mode out of range");

    const double T = problem.horizon;
    if (!opts.skip_validation) {
        SampleSpec sp;
        sp.box = lat.box;
        sp.t_hi = T;
        ValidationReport rep = validate_all(model, problem, sp);
        if (!rep.all_pass()) {
            std::string names;
            for (const auto& c : rep.checks)
                if (!c.pass) names += (names.empty() ? "" : ", ") + c.name;
            throw CalibrationError("barrier hypotheses failed validation (" + names + ")");
        }
        // The closed form anchors a single terminal function g.
        double spread = 0.0, scale = 1.0;
        for (int64_t node = 0; node < lat.size(); ++node) {
            const Vec x = lat.coord(node);
            const double g0 = problem.terminal[0](x, T);
            scale = std::max(scale, std::fabs(g0));
            for (int j = 1; j < problem.modes; ++j)
                spread = std::max(spread, std::fabs(problem.terminal[j](x, T) - g0));
        }
        if (spread > 1e-9 * scale)
            throw CalibrationError(
                "barrier construction needs common terminal data; modes disagree by " +
                std::to_string(spread));
    }

    // Lipschitz scale of g: largest neighbor difference quotient, inflated 5%.
    double lip = 0.0;
    std::vector<int> idx;
    for (int64_t node = 0; node < lat.size(); ++node) {
        lat.unflatten(node, idx);
        const Vec x = lat.coord(node);
        const double gx = problem.terminal[anchor_mode](x, T);
        for (int k = 0; k < lat.dim(); ++k) {
            if (idx[k] + 1 >= lat.nodes[k]) continue;
            Vec xp = x;
            xp[k] += lat.h(k);
            lip = std::max(lip,
                           std::fabs(problem.terminal[anchor_mode](xp, T) - gx) / lat.h(k));
        }
    }

    BarrierSpec spec;
    spec.anchor_mode = anchor_mode;
    spec.anchor = anchor;
    spec.epsilon = epsilon;
    spec.K = 1.0;
    spec.lambda = 1.0;
    spec.lipschitz = 1.05 * lip;
    spec.g_at_anchor = problem.terminal[anchor_mode](anchor, T);

    double worst_margin = std::numeric_limits<double>::infinity();
    Vec worst_x;
    double worst_t = 0.0;
    int worst_mode = 0;
    for (int round = 0; round <= opts.max_doublings; ++round) {
        const BarrierCheck up =
            verify_supersolution(spec, BarrierSide::Above, model, problem, lat, opts.nonlocal,
                                 opts.tol);
        const BarrierCheck dn =
            verify_supersolution(spec, BarrierSide::Below, model, problem, lat, opts.nonlocal,
                                 opts.tol);
        if (up.pass && dn.pass) return spec;
        const BarrierCheck& bad = up.pass ? dn : up;
        const double m = std::min({bad.min_pde_margin, bad.min_obstacle_margin,
                                   bad.min_terminal_margin});
        if (m < worst_margin) {
            worst_margin = m;
            worst_x = bad.worst_x;
            worst_t = bad.worst_t;
            worst_mode = bad.worst_mode;
        }
        spec.K *= 2.0;
        spec.lambda *= 2.0;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "barrier calibration exhausted %d doublings; worst residual %.6g in mode %d at ",
                  opts.max_doublings, worst_margin, worst_mode);
    throw CalibrationError(std::string(buf) + format_point(worst_x, worst_t));
}

SmoothFn perturbation_fn(const PerturbationSpec& pspec) {
    const double theta = pspec.theta, lam = pspec.lambda;
    const double p = pspec.gamma + 1.0;  // phi = (|x|^2)^p + 1
    SmoothFn f;
    auto phi = [p](const Vec& x) { return std::pow(norm2(x) * norm2(x), p) + 1.0; };
    f.value = [=](const Vec& x, double t) { return theta * std::exp(-lam * t) * phi(x); };
    f.gradient = [=](const Vec& x, double t) {
        const double r = norm2(x) * norm2(x);
        Vec g(x.size(), 0.0);
        if (r > 0.0) {
            const double c = theta * std::exp(-lam * t) * 2.0 * p * std::pow(r, p - 1.0);
            for (size_t k = 0; k < x.size(); ++k) g[k] = c * x[k];
        }
        return g;
    };
    f.hessian = [=](const Vec& x, double t) {
        const int n = static_cast<int>(x.size());
        Mat H(n, n);
        const double r = norm2(x) * norm2(x);
        if (r > 0.0) {
            const double e = theta * std::exp(-lam * t);
            const double c1 = e * 2.0 * p * std::pow(r, p - 1.0);
            const double c2 = e * 4.0 * p * (p - 1.0) * std::pow(r, p - 2.0);
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    H(k, l) = (k == l ? c1 : 0.0) + c2 * x[k] * x[l];
        }
        return H;
    };
    f.time_deriv = [=](const Vec& x, double t) {
        return -lam * theta * std::exp(-lam * t) * phi(x);
    };
    return f;
}

ValueField perturb_supersolution(const ValueField& field, const PerturbationSpec& pspec) {
    ValueField out = field;
    const Lattice& lat = field.lat;
    const double p = pspec.gamma + 1.0;
    Vec phi(static_cast<size_t>(lat.size()));
    for (int64_t node = 0; node < lat.size(); ++node) {
        const Vec x = lat.coord(node);
        const double r = norm2(x) * norm2(x);
        phi[static_cast<size_t>(node)] = std::pow(r, p) + 1.0;
    }
    for (int n = 0; n <= lat.time_steps; ++n) {
        const double decay = pspec.theta * std::exp(-pspec.lambda * lat.time(n));
        for (int i = 0; i < field.modes; ++i) {
            Vec& s = out.slice(i, n);
            for (int64_t node = 0; node < lat.size(); ++node)
                s[static_cast<size_t>(node)] += decay * phi[static_cast<size_t>(node)];
        }
    }
    return out;
}

double perturbation_threshold(const LevyModel& model, const Lattice& lat,
                              const PerturbationSpec& pspec, const NonlocalConfig& cfg) {
    PerturbationSpec unit = pspec;
    unit.theta = 1.0;
    unit.lambda = 0.0;  // strip the decay: threshold concerns the spatial factor
    const SmoothFn phi = perturbation_fn(unit);
    const PointEval pe = as_point_eval(phi);

    double c = 0.0;
    for (const double t : {0.0, 0.5 * lat.horizon, lat.horizon})
        for (int64_t node = 0; node < lat.size(); ++node) {
            const Vec x = lat.coord(node);
            const double local = apply_local(model, x, t, phi);
            const double jumps = apply_small(model, cfg, x, t, pe, phi.gradient(x, t)) +
                                 apply_large(model, cfg, x, t, pe, phi.gradient(x, t));
            c = std::max(c, (local + jumps) / phi.value(x, t));
        }
    return c;
}

SandwichReport sandwich_check(const ValueField& field, const BarrierSpec& spec,
                              const SwitchingProblem& problem, const LevyModel& model,
                              const NonlocalConfig& cfg, int anchor_index,
                              const PerturbationSpec* pspec, double tol) {
    const Lattice& lat = field.lat;
    const int d = field.modes;
    SandwichReport rep;

    const BarrierCheck up =
        verify_supersolution(spec, BarrierSide::Above, model, problem, lat, cfg, tol);
    const BarrierCheck dn =
        verify_supersolution(spec, BarrierSide::Below, model, problem, lat, cfg, tol);
    rep.verified = up.pass && dn.pass;
    if (!rep.verified) return rep;

    std::vector<SmoothFn> wa(d), wb(d);
    for (int j = 0; j < d; ++j) {
        wa[j] = barrier_above(spec, j, problem);
        wb[j] = barrier_below(spec, j, problem);
    }
    const SmoothFn pert = pspec ? perturbation_fn(*pspec) : SmoothFn{};
    const std::vector<int> layer = contamination_layer(model, lat, problem.horizon);

    rep.min_margin_below = std::numeric_limits<double>::infinity();
    rep.min_margin_above = std::numeric_limits<double>::infinity();

    std::vector<int> idx;
    for (int j = 0; j < d; ++j)
        for (int n = 0; n <= lat.time_steps; ++n) {
            const double t = lat.time(n);
            SandwichRow row;
            row.anchor_index = anchor_index;
            row.mode = j + 1;
            row.time_index = n;
            row.t = t;
            row.min_margin_below = std::numeric_limits<double>::infinity();
            row.min_margin_above = std::numeric_limits<double>::infinity();
            row.min_gap = d > 1 ? std::numeric_limits<double>::infinity() : 0.0;
            row.min_gap_perturbed = row.min_gap;

            const Vec& u = field.slice(j, n);
            for (int64_t node = 0; node < lat.size(); ++node) {
                lat.unflatten(node, idx);
                if (!lat.interior(idx, layer)) continue;
                const Vec x = lat.coord(node);

                const double below_m = u[node] - wb[j].value(x, t);
                const double above_m = wa[j].value(x, t) - u[node];
                if (below_m < row.min_margin_below) row.min_margin_below = below_m;
                if (above_m < row.min_margin_above) row.min_margin_above = above_m;
                const double local_min = std::min(below_m, above_m);
                if (local_min < std::min(rep.min_margin_below, rep.min_margin_above)) {
                    rep.worst_x = x;
                    rep.worst_t = t;
                    rep.worst_mode = j + 1;
                }
                rep.min_margin_below = std::min(rep.min_margin_below, below_m);
                rep.min_margin_above = std::min(rep.min_margin_above, above_m);

                if (d > 1) {
                    double ob = -std::numeric_limits<double>::infinity();
                    double ob_p = ob;
                    const double pv = pspec ? pert.value(x, t) : 0.0;
                    for (int k = 0; k < d; ++k) {
                        if (k == j) continue;
                        const double ck = problem.cost[j][k].value(x, t);
                        ob = std::max(ob, field.slice(k, n)[node] - ck);
                        ob_p = std::max(ob_p, field.slice(k, n)[node] + pv - ck);
                    }
                    row.min_gap = std::min(row.min_gap, u[node] - ob);
                    row.min_gap_perturbed =
                        std::min(row.min_gap_perturbed, u[node] + pv - ob_p);
                }
            }
            rep.rows.push_back(row);
        }

    // Terminal pinch at the anchor, one step before the horizon.
    const int n_pinch = lat.time_steps - 1;
    const double u_anchor = field.interp(spec.anchor_mode, n_pinch, spec.anchor);
    rep.pinch_value = std::fabs(u_anchor - spec.g_at_anchor);
    rep.pinch_envelope =
        eval_barrier_above(spec, spec.anchor_mode, spec.anchor, lat.time(n_pinch), problem) -
        spec.g_at_anchor;

    rep.pass = rep.min_margin_below >= -tol && rep.min_margin_above >= -tol &&
               rep.pinch_value <= rep.pinch_envelope + tol;
    return rep;
}

}  // namespace switchgrid
