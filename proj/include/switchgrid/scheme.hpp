#pragma once

#include "switchgrid/nonlocal.hpp"

namespace switchgrid {

// Numerical values for all modes at all time levels. Slice (i, n) holds
// u_i(., t_n); slice index time_steps is the terminal slice.
struct ValueField {
    Lattice lat;
    int modes = 1;
    // slices[n * modes + i]
    std::vector<Vec> slices;

    ValueField() = default;
    ValueField(const Lattice& l, int d)
        : lat(l), modes(d), slices(static_cast<size_t>(l.time_steps + 1) * d,
                                   Vec(static_cast<size_t>(l.size()), 0.0)) {}

    Vec& slice(int mode, int n) { return slices[static_cast<size_t>(n) * modes + mode]; }
    const Vec& slice(int mode, int n) const { return slices[static_cast<size_t>(n) * modes + mode]; }

    FieldSlice view(int mode, int n) const {
        FieldSlice s;
        s.lat = &lat;
        s.v = slice(mode, n);
        return s;
    }
    // Interpolated value of u_mode(x, t_n).
    double interp(int mode, int n, const Vec& x, OutOfBox policy = OutOfBox::Clamp,
                  InterpDiagnostics* diag = nullptr) const;
};

constexpr int16_t kStay = -1;

// Per (time level, mode, node): kStay or the 0-based target mode.
struct SwitchPolicy {
    Lattice lat;
    int modes = 1;
    std::vector<std::vector<int16_t>> actions;  // actions[n][mode * size + node]

    int16_t action(int mode, int n, int64_t node) const {
        return actions[static_cast<size_t>(n)][static_cast<size_t>(mode) * lat.size() + node];
    }
};

struct ResidualReport {
    double linf = 0.0;  // max |min{pde, obstacle}| over interior nodes, t < T
    double l1 = 0.0;    // mean absolute residual over the same set
    // Per (time level, mode): interior max |residual|.
    std::vector<std::vector<double>> linf_by_time_mode;
    std::vector<int> boundary_layer;  // per-dimension excluded node count
    int64_t interior_count = 0;
    // Worst node.
    double worst_value = 0.0;
    Vec worst_x;
    double worst_t = 0.0;
    int worst_mode = 0;  // 1-based in reports
    int64_t out_of_box_queries = 0;
    int64_t interp_queries = 0;
};

// Local (second-order + first-order) stencil of the operator at one time level.
// Second-order entries are the implicit part; drift entries the explicit part.
struct NodeStencil {
    // (flat-offset, weight) pairs for the second-order part, center excluded.
    std::vector<std::pair<int64_t, double>> second;
    double second_center = 0.0;
    // Upwinded effective drift (compensator folded in), per dimension:
    // weight on the upwind neighbor; center weight is the negative sum.
    std::vector<std::pair<int64_t, double>> drift;
    double drift_center = 0.0;
};

struct LatticeStencil {
    const Lattice* lat = nullptr;
    double t = 0.0;
    std::vector<NodeStencil> at;  // per flat node index
};

// Builds the monotone local stencil at time t. Cross-derivative terms use the
// 7-point corner splitting; if the diffusion matrix is not diagonally dominant
// after splitting at some node, throws SolverError naming the node.
// include_drift selects whether first-order terms are assembled (they are
// evaluated at a different time level than the implicit part).
LatticeStencil discretize_local(const LevyModel& model, const Lattice& lat, double t,
                                bool include_drift);

struct SolveOptions {
    NonlocalConfig nonlocal;
    bool skip_validation = false;     // caller acknowledges validator failures
    double lcp_tol = 1e-10;           // fixed-point tolerance, PDE-residual units
    int max_sweeps = 50000;
    double obstacle_tol = 1e-9;       // binding detection for policy extraction
    int validation_samples = 9;
};

struct SolveStats {
    double cfl = 0.0;            // max explicit outflow * dt observed (must stay <= 1)
    int max_sweeps_used = 0;
    int64_t out_of_box = 0;
    int64_t interp_queries = 0;
};

struct SolveResult {
    ValueField field;
    SwitchPolicy policy;
    ResidualReport residual;
    SolveStats stats;
};

// One backward step: slices at t_{n+1} in `next` (one Vec per mode), returns
// slices at t_n and appends the induced actions. Exposed for tests; solve()
// drives it across all levels.
std::vector<Vec> step_backward(const std::vector<Vec>& next, int n, const LevyModel& model,
                               const SwitchingProblem& problem, const Lattice& lat,
                               const SolveOptions& opts, std::vector<int16_t>* actions,
                               SolveStats* stats);

SolveResult solve(const SwitchingProblem& problem, const LevyModel& model, const Lattice& lat,
                  const SolveOptions& opts = {});

ResidualReport residual(const ValueField& field, const LevyModel& model,
                        const SolveOptions& opts, const SwitchingProblem& problem);

// Rim of nodes (per dimension) reachable by one jump displacement: numerical
// statements are only asserted strictly inside it.
std::vector<int> contamination_layer(const LevyModel& model, const Lattice& lat, double horizon);

}  // namespace switchgrid
