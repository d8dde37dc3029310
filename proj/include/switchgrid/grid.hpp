#pragma once

#include <cstdint>

#include "switchgrid/types.hpp"

namespace switchgrid {

// Axis-aligned box in state space.
struct Box {
    Vec lo, hi;
    int dim() const { return static_cast<int>(lo.size()); }
};

// Uniform tensor lattice over a box, plus a uniform time grid on [0, horizon].
// Node flattening is row-major (last dimension fastest).
struct Lattice {
    Box box;
    std::vector<int> nodes;  // per dimension, each >= 3
    int time_steps = 1;      // number of dt intervals
    double horizon = 1.0;

    int dim() const { return box.dim(); }
    double h(int k) const { return (box.hi[k] - box.lo[k]) / (nodes[k] - 1); }
    double dt() const { return horizon / time_steps; }
    double time(int n) const { return n * dt(); }

    int64_t size() const {
        int64_t s = 1;
        for (int m : nodes) s *= m;
        return s;
    }
    // Multi-index <-> flat index.
    int64_t flatten(const std::vector<int>& idx) const {
        int64_t f = 0;
        for (int k = 0; k < dim(); ++k) f = f * nodes[k] + idx[k];
        return f;
    }
    void unflatten(int64_t flat, std::vector<int>& idx) const {
        idx.resize(dim());
        for (int k = dim() - 1; k >= 0; --k) {
            idx[k] = static_cast<int>(flat % nodes[k]);
            flat /= nodes[k];
        }
    }
    void coord(const std::vector<int>& idx, Vec& x) const {
        x.resize(dim());
        for (int k = 0; k < dim(); ++k) x[k] = box.lo[k] + idx[k] * h(k);
    }
    Vec coord(int64_t flat) const {
        std::vector<int> idx;
        unflatten(flat, idx);
        Vec x;
        coord(idx, x);
        return x;
    }
    // Stride of dimension k in the flat index.
    int64_t stride(int k) const {
        int64_t s = 1;
        for (int j = dim() - 1; j > k; --j) s *= nodes[j];
        return s;
    }
    // True when idx keeps at least `layer` nodes between itself and every face.
    bool interior(const std::vector<int>& idx, const std::vector<int>& layer) const {
        for (int k = 0; k < dim(); ++k)
            if (idx[k] < layer[k] || idx[k] >= nodes[k] - layer[k]) return false;
        return true;
    }
    void validate() const;
};

// What to do with evaluation points that leave the box.
enum class OutOfBox { Clamp, Extrapolate };

// Counters surfaced to run reports.
struct InterpDiagnostics {
    int64_t queries = 0;
    int64_t out_of_box = 0;
};

// One time slice of nodal values over a lattice.
struct FieldSlice {
    const Lattice* lat = nullptr;
    Vec v;

    FieldSlice() = default;
    FieldSlice(const Lattice& l, double fill = 0.0) : lat(&l), v(static_cast<size_t>(l.size()), fill) {}

    double at(int64_t flat) const { return v[static_cast<size_t>(flat)]; }
    double& at(int64_t flat) { return v[static_cast<size_t>(flat)]; }

    // Multilinear interpolation. Clamp keeps weights in [0,1] (monotone);
    // Extrapolate continues the boundary cell's linear model (not monotone).
    double interp(const Vec& x, OutOfBox policy = OutOfBox::Clamp,
                  InterpDiagnostics* diag = nullptr) const;

    // Centered finite differences at a node (clamped one-sided at faces).
    Vec gradient(const std::vector<int>& idx) const;
    Mat hessian(const std::vector<int>& idx) const;
};

// Fill from a function of x (time fixed by caller).
FieldSlice sample_slice(const Lattice& lat, const std::function<double(const Vec&)>& f);

}  // namespace switchgrid
