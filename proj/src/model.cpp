#include "switchgrid/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace switchgrid {

namespace {

bool finite(double v) { return std::isfinite(v); }

std::string point_str(const Vec& x, double t) {
    std::ostringstream os;
    os << "x=(";
    for (size_t k = 0; k < x.size(); ++k) os << (k ? "," : "") << x[k];
    os << "), t=" << t;
    return os.str();
}

// Uniform inclusive grid over the box, m points per dimension.
std::vector<Vec> sample_points(const Box& box, int m) {
    const int n = box.dim();
    std::vector<Vec> pts;
    std::vector<int> idx(n, 0);
    for (;;) {
        Vec x(n);
        for (int k = 0; k < n; ++k)
            x[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * idx[k] / (m - 1);
        pts.push_back(std::move(x));
        int k = n - 1;
        while (k >= 0 && ++idx[k] == m) idx[k--] = 0;
        if (k < 0) break;
    }
    return pts;
}

std::vector<double> time_samples(double t_hi) { return {0.0, 0.5 * t_hi, t_hi}; }

// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
double min_eigenvalue(Mat a) {
    const int n = a.rows;
    if (n == 1) return a(0, 0);
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += sq(a(p, q));
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (std::fabs(a(p, q)) < 1e-300) continue;
                const double theta = 0.5 * std::atan2(2.0 * a(p, q), a(q, q) - a(p, p));
                const double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
    }
    double mn = a(0, 0);
    for (int k = 1; k < n; ++k) mn = std::min(mn, a(k, k));
    return mn;
}

struct QuotientScan {
    double max_quotient = 0.0;
    double max_growth = 0.0;
    bool all_finite = true;
    Vec bad_x;
    double bad_t = 0.0;
};

// Max axis-aligned difference quotient and growth ratio of every component of
// drift and sigma over an m-point grid.
QuotientScan scan_coefficients(const LevyModel& model, const Box& box, int m, double t_hi) {
    QuotientScan out;
    const int n = box.dim();
    auto values = [&](const Vec& x, double t, Vec& flat) {
        const Vec a = model.drift(x, t);
        const Mat s = model.sigma(x, t);
        flat.clear();
        flat.insert(flat.end(), a.begin(), a.end());
        flat.insert(flat.end(), s.a.begin(), s.a.end());
    };
    const auto pts = sample_points(box, m);
    Vec f0, f1;
    for (double t : time_samples(t_hi)) {
        for (const auto& x : pts) {
            values(x, t, f0);
            const double scale = 1.0 + norm2(x);
            for (double v : f0) {
                if (!finite(v)) {
                    if (out.all_finite) {
                        out.all_finite = false;
                        out.bad_x = x;
                        out.bad_t = t;
                    }
                    continue;
                }
                out.max_growth = std::max(out.max_growth, std::fabs(v) / scale);
            }
            // Forward neighbor along each axis.
            for (int k = 0; k < n; ++k) {
                const double h = (box.hi[k] - box.lo[k]) / (m - 1);
                if (x[k] + h > box.hi[k] + 1e-12 * (1.0 + std::fabs(box.hi[k]))) continue;
                Vec y = x;
                y[k] += h;
                values(y, t, f1);
                for (size_t c = 0; c < f0.size(); ++c) {
                    const double q = std::fabs(f1[c] - f0[c]) / h;
                    if (finite(q)) out.max_quotient = std::max(out.max_quotient, q);
                }
            }
        }
    }
    return out;
}

}  // namespace

CheckResult validate_coefficients(const LevyModel& model, const SampleSpec& spec) {
    CheckResult r;
    r.name = "coefficients";
    if (spec.samples < 2) throw ConfigError("validate_coefficients: need samples >= 2");

    const QuotientScan coarse = scan_coefficients(model, spec.box, spec.samples, spec.t_hi);
    const int refined = 2 * (spec.samples - 1) + 1;
    const QuotientScan fine = scan_coefficients(model, spec.box, refined, spec.t_hi);

    r.measured["lipschitz"] = coarse.max_quotient;
    r.measured["lipschitz_refined"] = fine.max_quotient;
    r.measured["growth"] = std::max(coarse.max_growth, fine.max_growth);

    std::ostringstream detail;
    if (!coarse.all_finite || !fine.all_finite) {
        r.pass = false;
        r.witness_x = coarse.all_finite ? fine.bad_x : coarse.bad_x;
        r.witness_t = coarse.all_finite ? fine.bad_t : coarse.bad_t;
        detail << "non-finite coefficient at " << point_str(r.witness_x, r.witness_t);
    }

    // Positive semi-definiteness of sigma sigma^T at every sample.
    double min_eig = 0.0;
    bool eig_set = false;
    for (double t : time_samples(spec.t_hi)) {
        for (const auto& x : sample_points(spec.box, spec.samples)) {
            const Mat s = model.sigma(x, t);
            Mat a(s.rows, s.rows);
            bool ok = true;
            for (int i = 0; i < s.rows; ++i)
                for (int j = 0; j < s.rows; ++j) {
                    double acc = 0.0;
                    for (int k = 0; k < s.cols; ++k) acc += s(i, k) * s(j, k);
                    a(i, j) = acc;
                    ok = ok && finite(acc);
                }
            const double e = ok ? min_eigenvalue(a) : -1.0;
            if (!eig_set || e < min_eig) {
                min_eig = e;
                eig_set = true;
                if (e < -1e-12 && r.pass) {
                    r.pass = false;
                    r.witness_x = x;
                    r.witness_t = t;
                    detail << "sigma sigma^T not PSD (min eigenvalue " << e << ") at "
                           << point_str(x, t);
                }
            }
        }
    }
    r.measured["min_eigenvalue"] = eig_set ? min_eig : 0.0;

    // Refinement instability flags non-Lipschitz coefficients.
    if (fine.max_quotient > spec.lip_growth_factor * coarse.max_quotient + 1e-9) {
        if (r.pass) {
            r.pass = false;
            detail << "difference quotient grows under refinement: " << coarse.max_quotient
                   << " -> " << fine.max_quotient << " (factor "
                   << fine.max_quotient / std::max(coarse.max_quotient, 1e-300) << ")";
            // Witness: locate the max quotient on the refined grid.
            const int n = spec.box.dim();
            double best = -1.0;
            for (double t : time_samples(spec.t_hi)) {
                for (const auto& x : sample_points(spec.box, refined)) {
                    for (int k = 0; k < n; ++k) {
                        const double h = (spec.box.hi[k] - spec.box.lo[k]) / (refined - 1);
                        if (x[k] + h > spec.box.hi[k] + 1e-12) continue;
                        Vec y = x;
                        y[k] += h;
                        const Vec a0 = model.drift(x, t), a1 = model.drift(y, t);
                        const Mat s0 = model.sigma(x, t), s1 = model.sigma(y, t);
                        double q = 0.0;
                        for (size_t c = 0; c < a0.size(); ++c)
                            q = std::max(q, std::fabs(a1[c] - a0[c]) / h);
                        for (size_t c = 0; c < s0.a.size(); ++c)
                            q = std::max(q, std::fabs(s1.a[c] - s0.a[c]) / h);
                        if (q > best) {
                            best = q;
                            r.witness_x = x;
                            r.witness_t = t;
                        }
                    }
                }
            }
        }
    }

    // Configured constant, when present, bounds both quotients and growth.
    if (model.lip_bound >= 0.0) {
        const double worst = std::max({coarse.max_quotient, fine.max_quotient,
                                       std::max(coarse.max_growth, fine.max_growth)});
        if (worst > model.lip_bound * (1.0 + 1e-12) + 1e-12 && r.pass) {
            r.pass = false;
            detail << "measured constant " << worst << " exceeds configured bound "
                   << model.lip_bound;
        }
    }

    if (r.pass)
        detail << "lipschitz<=" << fine.max_quotient << ", growth<=" << r.measured["growth"];
    r.detail = detail.str();
    return r;
}

CheckResult validate_levy(const LevyMeasure& measure, double exp_tail_rate) {
    CheckResult r;
    r.name = "levy_measure";
    double small = 0.0, tail = 0.0;
    for (const auto& atom : measure.atoms) {
        if (!(atom.w > 0.0))
            throw ConfigError("levy measure: atom weight must be positive");
        const double az = norm2(atom.z);
        if (az <= 1.0)
            small += sq(az) * atom.w;
        else
            tail += std::exp(exp_tail_rate * az) * atom.w;
    }
    r.measured["small_mass"] = small;
    r.measured["tail_mass"] = tail;
    r.measured["total"] = small + tail;

    std::ostringstream detail;
    if (!measure.atoms.empty() && !(measure.r_min > 0.0)) {
        r.pass = false;
        detail << "r_min must be positive for a non-empty measure";
    }
    for (const auto& atom : measure.atoms) {
        const double az = norm2(atom.z);
        if (az < measure.r_min * (1.0 - 1e-12)) {
            r.pass = false;
            r.witness_x = atom.z;
            detail << "atom |z|=" << az << " below r_min=" << measure.r_min << "; ";
            break;
        }
    }
    if (!finite(small) || !finite(tail)) {
        r.pass = false;
        detail << "non-finite integrability sums; ";
    }
    if (measure.bound >= 0.0 && small + tail > measure.bound * (1.0 + 1e-12)) {
        r.pass = false;
        detail << "small+tail=" << small + tail << " exceeds budget " << measure.bound;
    }
    if (r.pass) detail << "small=" << small << ", tail=" << tail;
    r.detail = detail.str();
    return r;
}

CheckResult validate_jumps(const LevyModel& model, const SampleSpec& spec) {
    CheckResult r;
    r.name = "jump_amplitude";
    double max_ratio = 0.0, max_lip = 0.0;
    const auto pts = sample_points(spec.box, spec.samples);
    const int n = spec.box.dim();
    std::ostringstream detail;
    for (double t : time_samples(spec.t_hi)) {
        for (const auto& x : pts) {
            for (const auto& atom : model.measure.atoms) {
                const double cap = std::min(norm2(atom.z), 1.0);
                const Vec e = model.eta(x, t, atom.z);
                for (double c : e) {
                    if (!finite(c)) {
                        if (r.pass) {
                            r.pass = false;
                            r.witness_x = x;
                            r.witness_t = t;
                            detail << "non-finite jump amplitude at " << point_str(x, t);
                        }
                        continue;
                    }
                    const double ratio = std::fabs(c) / cap;
                    if (ratio > max_ratio) {
                        max_ratio = ratio;
                        if (model.eta_bound >= 0.0 && ratio > model.eta_bound * (1.0 + 1e-12)) {
                            r.witness_x = x;
                            r.witness_t = t;
                        }
                    }
                }
                // Lipschitz-in-x quotient along each axis.
                for (int k = 0; k < n; ++k) {
                    const double h = (spec.box.hi[k] - spec.box.lo[k]) / (spec.samples - 1);
                    if (x[k] + h > spec.box.hi[k] + 1e-12) continue;
                    Vec y = x;
                    y[k] += h;
                    const Vec e2 = model.eta(y, t, atom.z);
                    for (size_t c = 0; c < e.size(); ++c)
                        max_lip = std::max(max_lip, std::fabs(e2[c] - e[c]) / (h * cap));
                }
            }
        }
    }
    r.measured["eta_ratio"] = max_ratio;
    r.measured["eta_lip"] = max_lip;
    if (model.eta_bound >= 0.0) {
        const double b = model.eta_bound * (1.0 + 1e-12) + 1e-12;
        if (max_ratio > b || max_lip > b) {
            r.pass = false;
            detail << "measured ratio " << std::max(max_ratio, max_lip)
                   << " exceeds configured bound " << model.eta_bound;
        }
    }
    if (r.pass) detail << "|eta|/min(|z|,1) <= " << max_ratio << ", x-quotient <= " << max_lip;
    r.detail = detail.str();
    return r;
}

namespace {

double cost_at(const SwitchingProblem& p, int i, int j, const Vec& x, double t) {
    return i == j ? 0.0 : p.cost[i][j].value(x, t);
}

// Enumerates simple cycles (i1, ..., ik, i1), k in [2, max_len], each once up
// to rotation by fixing i1 as the smallest index.
void for_each_cycle(int d, int max_len, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> cyc;
    std::vector<bool> used(d, false);
    std::function<void(int, int)> rec = [&](int first, int len) {
        if (len >= 2) fn(cyc);
        if (len == max_len) return;
        for (int next = first + 1; next < d; ++next) {
            if (used[next]) continue;
            used[next] = true;
            cyc.push_back(next);
            rec(first, len + 1);
            cyc.pop_back();
            used[next] = false;
        }
    };
    for (int first = 0; first < d; ++first) {
        cyc = {first};
        std::fill(used.begin(), used.end(), false);
        used[first] = true;
        rec(first, 1);
    }
}

}  // namespace

CheckResult check_no_loop(const SwitchingProblem& problem, const SampleSpec& spec) {
    CheckResult r;
    r.name = "no_loop";
    const int d = problem.modes;
    const int max_len = std::clamp(spec.max_cycle, 2, d);
    const auto pts = sample_points(spec.box, spec.samples);
    const auto times = time_samples(spec.t_hi);
    std::ostringstream detail;

    // Diagonal costs must vanish identically.
    for (int i = 0; i < d && r.pass; ++i)
        for (const auto& x : pts) {
            if (problem.cost[i][i].value && std::fabs(problem.cost[i][i].value(x, times[0])) > 0.0) {
                r.pass = false;
                r.witness_x = x;
                r.cycle = {i + 1, i + 1};
                detail << "diagonal cost c(" << i + 1 << "," << i + 1 << ") is not zero";
                break;
            }
        }

    double min_sum = std::numeric_limits<double>::infinity();
    std::vector<int> worst;
    Vec worst_x;
    double worst_t = 0.0;
    for_each_cycle(d, max_len, [&](const std::vector<int>& cyc) {
        for (double t : times)
            for (const auto& x : pts) {
                double s = 0.0;
                for (size_t k = 0; k < cyc.size(); ++k)
                    s += cost_at(problem, cyc[k], cyc[(k + 1) % cyc.size()], x, t);
                if (s < min_sum) {
                    min_sum = s;
                    worst = cyc;
                    worst_x = x;
                    worst_t = t;
                }
            }
    });
    if (d >= 2) {
        r.measured["min_cycle_sum"] = min_sum;
        if (!(min_sum > spec.margin)) {
            r.pass = false;
            r.witness_x = worst_x;
            r.witness_t = worst_t;
            r.cycle.clear();
            for (int m : worst) r.cycle.push_back(m + 1);
            r.cycle.push_back(worst.front() + 1);
            detail.str("");
            detail << "cycle (";
            for (size_t k = 0; k < r.cycle.size(); ++k) detail << (k ? "," : "") << r.cycle[k];
            detail << ") has sum " << min_sum << " <= margin " << spec.margin << " at "
                   << point_str(worst_x, worst_t);
        }
    } else {
        r.measured["min_cycle_sum"] = std::numeric_limits<double>::infinity();
    }
    if (r.pass && detail.str().empty()) detail << "min cycle sum " << min_sum;
    r.detail = detail.str();
    return r;
}

CheckResult check_triangle(const SwitchingProblem& problem, const SampleSpec& spec) {
    CheckResult r;
    r.name = "triangle";
    const int d = problem.modes;
    double min_slack = std::numeric_limits<double>::infinity();
    std::ostringstream detail;
    for (double t : time_samples(spec.t_hi)) {
        for (const auto& x : sample_points(spec.box, spec.samples)) {
            for (int i1 = 0; i1 < d; ++i1)
                for (int i2 = 0; i2 < d; ++i2) {
                    if (i2 == i1) continue;
                    for (int i3 = 0; i3 < d; ++i3) {
                        if (i3 == i2) continue;
                        const double slack = cost_at(problem, i1, i2, x, t) +
                                             cost_at(problem, i2, i3, x, t) -
                                             cost_at(problem, i1, i3, x, t);
                        if (slack < min_slack) {
                            min_slack = slack;
                            if (slack < -1e-12) {
                                r.witness_x = x;
                                r.witness_t = t;
                                r.cycle = {i1 + 1, i2 + 1, i3 + 1};
                            }
                        }
                    }
                }
        }
    }
    if (d >= 2) r.measured["min_slack"] = min_slack;
    if (d >= 2 && min_slack < -1e-12) {
        r.pass = false;
        detail << "triple (" << r.cycle[0] << "," << r.cycle[1] << "," << r.cycle[2]
               << ") violates the triangle bound by " << -min_slack << " at "
               << point_str(r.witness_x, r.witness_t);
    } else {
        detail << "min slack " << (d >= 2 ? min_slack : 0.0);
    }
    r.detail = detail.str();
    return r;
}

CheckResult check_terminal(const SwitchingProblem& problem, const SampleSpec& spec) {
    CheckResult r;
    r.name = "terminal";
    const int d = problem.modes;
    const double T = spec.t_hi;
    double min_slack = std::numeric_limits<double>::infinity();
    int worst_mode = 0;
    std::ostringstream detail;
    for (const auto& x : sample_points(spec.box, spec.samples)) {
        Vec g(d);
        for (int i = 0; i < d; ++i) g[i] = problem.terminal[i](x, T);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                if (j == i) continue;
                const double slack = g[i] - (-cost_at(problem, i, j, x, T) + g[j]);
                if (slack < min_slack) {
                    min_slack = slack;
                    worst_mode = i + 1;
                    if (slack < -1e-12) {
                        r.witness_x = x;
                        r.witness_t = T;
                    }
                }
            }
        }
    }
    if (d >= 2) {
        r.measured["min_slack"] = min_slack;
        r.measured["worst_mode"] = worst_mode;
        if (min_slack < -1e-12) {
            r.pass = false;
            detail << "terminal data admits a profitable switch at mode " << worst_mode
                   << " (slack " << min_slack << ") at " << point_str(r.witness_x, r.witness_t);
        }
    }
    if (r.pass) detail << "min slack " << (d >= 2 ? min_slack : 0.0);
    r.detail = detail.str();
    return r;
}

ValidationReport validate_all(const LevyModel& model, const SwitchingProblem& problem,
                              const SampleSpec& spec_in) {
    SampleSpec spec = spec_in;
    spec.t_hi = problem.horizon;
    ValidationReport rep;
    rep.checks.push_back(validate_coefficients(model, spec));
    rep.checks.push_back(validate_levy(model.measure, model.exp_tail_rate));
    rep.checks.push_back(validate_jumps(model, spec));
    rep.checks.push_back(check_no_loop(problem, spec));
    rep.checks.push_back(check_triangle(problem, spec));
    rep.checks.push_back(check_terminal(problem, spec));
    return rep;
}

}  // namespace switchgrid
