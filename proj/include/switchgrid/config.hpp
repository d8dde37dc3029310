#pragma once

#include <optional>

#include "switchgrid/barriers.hpp"
#include "switchgrid/montecarlo.hpp"

namespace switchgrid {

struct BarrierRequest {
    int anchor_mode = 0;  // 0-based
    Vec anchor;
    double epsilon = 0.25;
};

// Fully materialized run configuration built from a JSON file. Schema is
// strict: unknown keys anywhere are rejected.
struct RunConfig {
    LevyModel model;
    SwitchingProblem problem;
    Lattice lattice;
    SolveOptions solver;
    SampleSpec validation;
    std::vector<BarrierRequest> barriers;
    int barrier_max_doublings = 40;
    PerturbationSpec perturbation;
    SimConfig mc;
    std::vector<std::pair<Vec, int>> probes;  // compare points (x0, 0-based mode)
    std::string out_dir = "out";
    bool residual_full = false;

    std::string config_hash;  // FNV-1a 64 of the raw config bytes, hex
    std::string source_path;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text, const std::string& source_name);

// 64-bit FNV-1a of a byte string, lowercase hex.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace switchgrid
