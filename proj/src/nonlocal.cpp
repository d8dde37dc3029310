#include "switchgrid/nonlocal.hpp"

#include <memory>

namespace switchgrid {

PointEval as_point_eval(const SmoothFn& f) {
    return [f](const Vec& x, double t) { return f.value(x, t); };
}

PointEval as_point_eval(const FieldSlice& u, OutOfBox policy, InterpDiagnostics* diag) {
    // Copies the slice so the eval stays valid independent of the caller.
    auto held = std::make_shared<FieldSlice>(u);
    return [held, policy, diag](const Vec& x, double) { return held->interp(x, policy, diag); };
}

Mat diffusion_matrix(const LevyModel& model, const Vec& x, double t) {
    const Mat s = model.sigma(x, t);
    Mat a(s.rows, s.rows);
    for (int i = 0; i < s.rows; ++i)
        for (int j = 0; j <= i; ++j) {
            double acc = 0.0;
            for (int k = 0; k < s.cols; ++k) acc += s(i, k) * s(j, k);
            a(i, j) = a(j, i) = acc;
        }
    return a;
}

double kernel_K(const LevyModel& model, const Vec& x, double t, const Vec& z,
                const PointEval& phi, const Vec& p) {
    const Vec e = model.eta(x, t, z);
    Vec shifted = x;
    for (size_t k = 0; k < shifted.size(); ++k) shifted[k] += e[k];
    double v = phi(shifted, t) - phi(x, t);
    if (norm2(z) <= 1.0) v -= dot(e, p);
    return v;
}

double apply_small(const LevyModel& model, const NonlocalConfig& cfg, const Vec& x, double t,
                   const PointEval& phi, const Vec& p) {
    double acc = 0.0;
    for (const auto& atom : model.measure.atoms)
        if (norm2(atom.z) < cfg.kappa) acc += atom.w * kernel_K(model, x, t, atom.z, phi, p);
    return acc;
}

double apply_large(const LevyModel& model, const NonlocalConfig& cfg, const Vec& x, double t,
                   const PointEval& u, const Vec& p) {
    double acc = 0.0;
    for (const auto& atom : model.measure.atoms)
        if (norm2(atom.z) >= cfg.kappa) acc += atom.w * kernel_K(model, x, t, atom.z, u, p);
    return acc;
}

double apply_local(const LevyModel& model, const Vec& x, double t, const SmoothFn& phi) {
    const Mat a = diffusion_matrix(model, x, t);
    const Mat hess = phi.hessian(x, t);
    const Vec drift = model.drift(x, t);
    const Vec grad = phi.gradient(x, t);
    double acc = phi.time_deriv(x, t);
    for (int i = 0; i < a.rows; ++i) {
        acc += drift[i] * grad[i];
        for (int j = 0; j < a.rows; ++j) acc += a(i, j) * hess(i, j);
    }
    return acc;
}

double apply_Hkappa(const LevyModel& model, const NonlocalConfig& cfg, const Vec& x, double t,
                    const SmoothFn& phi, const PointEval& u) {
    const Vec p = phi.gradient(x, t);
    return apply_local(model, x, t, phi) + apply_small(model, cfg, x, t, as_point_eval(phi), p) +
           apply_large(model, cfg, x, t, u, p);
}

}  // namespace switchgrid
