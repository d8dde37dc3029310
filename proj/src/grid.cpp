#include "switchgrid/grid.hpp"

#include <algorithm>

namespace switchgrid {

SmoothFn smooth_constant(double c, int dim) {
    SmoothFn f;
    f.value = [c](const Vec&, double) { return c; };
    f.gradient = [dim](const Vec&, double) { return Vec(dim, 0.0); };
    f.hessian = [dim](const Vec&, double) { return Mat(dim, dim); };
    f.time_deriv = [](const Vec&, double) { return 0.0; };
    return f;
}

SmoothFn smooth_zero(int dim) { return smooth_constant(0.0, dim); }

SmoothFn smooth_sum(const SmoothFn& f, const SmoothFn& g, int dim) {
    SmoothFn s;
    s.value = [f, g](const Vec& x, double t) { return f.value(x, t) + g.value(x, t); };
    s.gradient = [f, g, dim](const Vec& x, double t) {
        Vec a = f.gradient(x, t), b = g.gradient(x, t);
        for (int k = 0; k < dim; ++k) a[k] += b[k];
        return a;
    };
    s.hessian = [f, g](const Vec& x, double t) {
        Mat a = f.hessian(x, t), b = g.hessian(x, t);
        for (size_t i = 0; i < a.a.size(); ++i) a.a[i] += b.a[i];
        return a;
    };
    s.time_deriv = [f, g](const Vec& x, double t) { return f.time_deriv(x, t) + g.time_deriv(x, t); };
    return s;
}

SmoothFn smooth_scale(double alpha, const SmoothFn& f, int dim) {
    (void)dim;
    SmoothFn s;
    s.value = [alpha, f](const Vec& x, double t) { return alpha * f.value(x, t); };
    s.gradient = [alpha, f](const Vec& x, double t) {
        Vec g = f.gradient(x, t);
        for (double& c : g) c *= alpha;
        return g;
    };
    s.hessian = [alpha, f](const Vec& x, double t) {
        Mat h = f.hessian(x, t);
        for (double& c : h.a) c *= alpha;
        return h;
    };
    s.time_deriv = [alpha, f](const Vec& x, double t) { return alpha * f.time_deriv(x, t); };
    return s;
}

void Lattice::validate() const {
    const int n = dim();
    if (n < 1) throw SolverError("lattice: state dimension must be >= 1");
    if (static_cast<int>(box.hi.size()) != n || static_cast<int>(nodes.size()) != n)
        throw SolverError("lattice: box/nodes dimension mismatch");
    for (int k = 0; k < n; ++k) {
        if (nodes[k] < 3) throw SolverError("lattice: need at least 3 nodes per dimension");
        if (!(box.hi[k] > box.lo[k])) throw SolverError("lattice: box must have positive extent");
    }
    if (time_steps < 1) throw SolverError("lattice: need at least 1 time step");
    if (!(horizon > 0.0)) throw SolverError("lattice: horizon must be positive");
}

double FieldSlice::interp(const Vec& x, OutOfBox policy, InterpDiagnostics* diag) const {
    const Lattice& L = *lat;
    const int n = L.dim();
    if (diag) diag->queries++;

    bool outside = false;
    // Per-dimension cell index and local weight; Extrapolate lets the weight
    // leave [0,1] while the cell stays the nearest boundary cell.
    std::vector<int> cell(n);
    Vec theta(n);
    for (int k = 0; k < n; ++k) {
        const double h = L.h(k);
        double r = (x[k] - L.box.lo[k]) / h;
        if (r < 0.0 || r > L.nodes[k] - 1) outside = true;
        if (policy == OutOfBox::Clamp) r = std::clamp(r, 0.0, static_cast<double>(L.nodes[k] - 1));
        int c = static_cast<int>(std::floor(r));
        c = std::clamp(c, 0, L.nodes[k] - 2);
        cell[k] = c;
        theta[k] = r - c;
    }
    if (outside && diag) diag->out_of_box++;

    double acc = 0.0;
    const int corners = 1 << n;
    for (int m = 0; m < corners; ++m) {
        double w = 1.0;
        int64_t flat = 0;
        for (int k = 0; k < n; ++k) {
            const int up = (m >> k) & 1;
            w *= up ? theta[k] : (1.0 - theta[k]);
            flat = flat * L.nodes[k] + (cell[k] + up);
        }
        acc += w * v[static_cast<size_t>(flat)];
    }
    return acc;
}

Vec FieldSlice::gradient(const std::vector<int>& idx) const {
    const Lattice& L = *lat;
    const int n = L.dim();
    const int64_t f0 = L.flatten(idx);
    Vec g(n);
    for (int k = 0; k < n; ++k) {
        const int64_t s = L.stride(k);
        const int up = std::min(idx[k] + 1, L.nodes[k] - 1);
        const int dn = std::max(idx[k] - 1, 0);
        const double span = (up - dn) * L.h(k);
        g[k] = (v[static_cast<size_t>(f0 + (up - idx[k]) * s)] -
                v[static_cast<size_t>(f0 - (idx[k] - dn) * s)]) /
               span;
    }
    return g;
}

Mat FieldSlice::hessian(const std::vector<int>& idx) const {
    const Lattice& L = *lat;
    const int n = L.dim();
    const int64_t f0 = L.flatten(idx);
    Mat H(n, n);
    for (int k = 0; k < n; ++k) {
        const int64_t s = L.stride(k);
        const double h = L.h(k);
        // Clamped ghost values at the faces.
        const int64_t up = (idx[k] + 1 <= L.nodes[k] - 1) ? f0 + s : f0;
        const int64_t dn = (idx[k] - 1 >= 0) ? f0 - s : f0;
        H(k, k) = (v[(size_t)up] - 2.0 * v[(size_t)f0] + v[(size_t)dn]) / (h * h);
    }
    for (int k = 0; k < n; ++k) {
        for (int l = k + 1; l < n; ++l) {
            const int64_t sk = L.stride(k), sl = L.stride(l);
            const int uk = std::min(idx[k] + 1, L.nodes[k] - 1) - idx[k];
            const int dk = idx[k] - std::max(idx[k] - 1, 0);
            const int ul = std::min(idx[l] + 1, L.nodes[l] - 1) - idx[l];
            const int dl = idx[l] - std::max(idx[l] - 1, 0);
            const double span = (uk + dk) * L.h(k) * (ul + dl) * L.h(l);
            const double val = (v[(size_t)(f0 + uk * sk + ul * sl)] - v[(size_t)(f0 + uk * sk - dl * sl)] -
                                v[(size_t)(f0 - dk * sk + ul * sl)] + v[(size_t)(f0 - dk * sk - dl * sl)]) /
                               span;
            H(k, l) = H(l, k) = val;
        }
    }
    return H;
}

FieldSlice sample_slice(const Lattice& lat, const std::function<double(const Vec&)>& f) {
    FieldSlice s(lat);
    std::vector<int> idx;
    Vec x;
    for (int64_t i = 0; i < lat.size(); ++i) {
        lat.unflatten(i, idx);
        lat.coord(idx, x);
        s.v[static_cast<size_t>(i)] = f(x);
    }
    return s;
}

}  // namespace switchgrid
