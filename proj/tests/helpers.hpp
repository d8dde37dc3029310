#pragma once

#include <cmath>

#include "switchgrid/model.hpp"

namespace switchgrid::testing {

// ---- coefficient builders -------------------------------------------------

inline VectorFn drift_zero(int n) {
    return [n](const Vec&, double) { return Vec(n, 0.0); };
}

inline VectorFn drift_const(Vec v) {
    return [v](const Vec&, double) { return v; };
}

// a_k(x) = c_k + sum_j m_{k,j} x_j
inline VectorFn drift_affine(Vec c, Mat m) {
    return [c, m](const Vec& x, double) {
        Vec out = c;
        for (int k = 0; k < m.rows; ++k)
            for (int j = 0; j < m.cols; ++j) out[k] += m(k, j) * x[j];
        return out;
    };
}

inline MatrixFn sigma_zero(int n) {
    return [n](const Vec&, double) { return Mat(n, n); };
}

inline MatrixFn sigma_const_diag(int n, double s) {
    return [n, s](const Vec&, double) {
        Mat m(n, n);
        for (int k = 0; k < n; ++k) m(k, k) = s;
        return m;
    };
}

inline MatrixFn sigma_const(Mat m) {
    return [m](const Vec&, double) { return m; };
}

// diag(sqrt(|x_1|), ..): the canonical non-Lipschitz diffusion.
inline MatrixFn sigma_sqrt_abs(int n) {
    return [n](const Vec& x, double) {
        Mat m(n, n);
        for (int k = 0; k < n; ++k) m(k, k) = std::sqrt(std::fabs(x[0]));
        return m;
    };
}

inline JumpFn eta_zero(int n) {
    return [n](const Vec&, double, const Vec&) { return Vec(n, 0.0); };
}

// eta(x,t,z) = scale * z (dimensions must match).
inline JumpFn eta_linear(double scale = 1.0) {
    return [scale](const Vec&, double, const Vec& z) {
        Vec out(z.size());
        for (size_t k = 0; k < z.size(); ++k) out[k] = scale * z[k];
        return out;
    };
}

inline LevyMeasure measure_empty() { return LevyMeasure{{}, 0.1, -1.0}; }

inline LevyMeasure measure_atoms(std::vector<LevyAtom> atoms, double r_min = 0.0,
                                 double bound = -1.0) {
    if (r_min <= 0.0) {
        r_min = 1e300;
        for (const auto& a : atoms) r_min = std::min(r_min, norm2(a.z));
        if (atoms.empty()) r_min = 0.1;
    }
    return LevyMeasure{std::move(atoms), r_min, bound};
}

// Local-only model (no jumps).
inline LevyModel model_local(int n, VectorFn a, MatrixFn s) {
    LevyModel m;
    m.dim_state = n;
    m.dim_jump = n;
    m.drift = std::move(a);
    m.sigma = std::move(s);
    m.eta = eta_zero(n);
    m.measure = measure_empty();
    m.exp_tail_rate = 1.0;
    return m;
}

inline LevyModel model_degenerate(int n = 1) {
    return model_local(n, drift_zero(n), sigma_zero(n));
}

// ---- cost / payoff builders -----------------------------------------------

inline SmoothFn cost_const(double c, int dim) { return smooth_constant(c, dim); }

// c(x, t) = c0 + kt * t (space-independent).
inline SmoothFn cost_affine_t(double c0, double kt, int dim) {
    SmoothFn f;
    f.value = [c0, kt](const Vec&, double t) { return c0 + kt * t; };
    f.gradient = [dim](const Vec&, double) { return Vec(dim, 0.0); };
    f.hessian = [dim](const Vec&, double) { return Mat(dim, dim); };
    f.time_deriv = [kt](const Vec&, double) { return kt; };
    return f;
}

inline ScalarFn scalar_const(double c) {
    return [c](const Vec&, double) { return c; };
}

// Constant-cost switching problem: c_{i,j} = off for i != j.
inline SwitchingProblem problem_const_costs(int d, double off, double horizon, int dim) {
    SwitchingProblem p;
    p.modes = d;
    p.horizon = horizon;
    p.psi.assign(d, scalar_const(0.0));
    p.terminal.assign(d, scalar_const(0.0));
    p.cost.assign(d, std::vector<SmoothFn>(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) p.cost[i][j] = cost_const(i == j ? 0.0 : off, dim);
    return p;
}

inline SampleSpec spec_box1(double lo, double hi, int samples = 9, double t_hi = 1.0) {
    SampleSpec s;
    s.box = Box{{lo}, {hi}};
    s.samples = samples;
    s.t_hi = t_hi;
    return s;
}

}  // namespace switchgrid::testing
