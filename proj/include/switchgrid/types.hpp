#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace switchgrid {

using Vec = std::vector<double>;

// Dense row-major matrix, small dimensions only (state dimension is 1-3 in practice).
struct Mat {
    int rows = 0, cols = 0;
    Vec a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

// Coefficient callbacks over (state, time).
using ScalarFn = std::function<double(const Vec& x, double t)>;
using VectorFn = std::function<Vec(const Vec& x, double t)>;
using MatrixFn = std::function<Mat(const Vec& x, double t)>;
// Jump amplitude eta(x, t, z) -> state-space displacement.
using JumpFn = std::function<Vec(const Vec& x, double t, const Vec& z)>;

// A C^{1,2} candidate: value plus analytic derivatives, used wherever a
// classical test function is required (operator evaluation, barrier checks).
struct SmoothFn {
    ScalarFn value;
    VectorFn gradient;    // spatial gradient
    MatrixFn hessian;     // spatial Hessian
    ScalarFn time_deriv;  // partial derivative in t
};

SmoothFn smooth_constant(double c, int dim);
SmoothFn smooth_zero(int dim);
// f + g and  alpha * f, combined analytically.
SmoothFn smooth_sum(const SmoothFn& f, const SmoothFn& g, int dim);
SmoothFn smooth_scale(double alpha, const SmoothFn& f, int dim);

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Malformed or contradictory configuration input.
struct ConfigError : Error {
    using Error::Error;
};
// Numerical solve aborted (CFL violation, non-convergent sweep, bad lattice).
struct SolverError : Error {
    using Error::Error;
};
// Barrier calibration cannot succeed for this problem.
struct CalibrationError : Error {
    using Error::Error;
};

inline double sq(double v) { return v * v; }

inline double norm2(const Vec& v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace switchgrid
