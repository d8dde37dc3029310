#pragma once

#include "switchgrid/grid.hpp"
#include "switchgrid/model.hpp"

namespace switchgrid {

// Splitting and interpolation knobs for the jump operator.
struct NonlocalConfig {
    double kappa = 0.1;  // atoms with |z| < kappa are "small", the rest "large"
    OutOfBox out_of_box = OutOfBox::Clamp;

    static NonlocalConfig for_measure(const LevyMeasure& m) {
        NonlocalConfig c;
        c.kappa = std::max(m.r_min, 0.1);
        return c;
    }
};

// Anything the jump operator can displace and evaluate: value at (x, t).
using PointEval = std::function<double(const Vec&, double)>;

PointEval as_point_eval(const SmoothFn& f);
// Fixed-time wrapper around a slice; interpolation policy and diagnostics bound in.
PointEval as_point_eval(const FieldSlice& u, OutOfBox policy, InterpDiagnostics* diag = nullptr);

// Integrand of the jump operator for one mark z:
//   phi(x + eta(x,t,z), t) - phi(x, t) - 1_{|z| <= 1} eta(x,t,z) . p
double kernel_K(const LevyModel& model, const Vec& x, double t, const Vec& z,
                const PointEval& phi, const Vec& p);

// Small-jump part: sum of kernel_K over atoms with |z_m| < kappa, weighted.
double apply_small(const LevyModel& model, const NonlocalConfig& cfg, const Vec& x, double t,
                   const PointEval& phi, const Vec& p);

// Large-jump part: atoms with |z_m| >= kappa; compensator only for |z_m| <= 1.
double apply_large(const LevyModel& model, const NonlocalConfig& cfg, const Vec& x, double t,
                   const PointEval& u, const Vec& p);

// Local second-order part: sum a_{ij} d2f/dxidxj + sum a_i df/dxi + df/dt,
// with a = sigma sigma^T (full contraction).
double apply_local(const LevyModel& model, const Vec& x, double t, const SmoothFn& phi);

// Full test-function generator: L phi + I_kappa(phi, Dphi) + I^kappa(u, Dphi).
double apply_Hkappa(const LevyModel& model, const NonlocalConfig& cfg, const Vec& x, double t,
                    const SmoothFn& phi, const PointEval& u);

// sigma sigma^T at (x, t).
Mat diffusion_matrix(const LevyModel& model, const Vec& x, double t);

}  // namespace switchgrid
