#pragma once

#include "switchgrid/config.hpp"

namespace switchgrid {

// Shortest round-trip decimal formatting ("%.17g" trimmed), locale-independent.
std::string format_double(double v);

// CSV/JSON emission. Every file starts with a comment line carrying the tool
// version and the config hash so outputs are traceable and byte-reproducible.
void write_values_csv(const std::string& path, const ValueField& field,
                      const std::string& config_hash);
void write_policy_csv(const std::string& path, const SwitchPolicy& policy,
                      const std::string& config_hash);
void write_residual_json(const std::string& path, const ResidualReport& rep,
                         const std::string& config_hash);
void write_validation_json(const std::string& path, const ValidationReport& rep,
                           const std::string& config_hash);
// One calibrated anchor with its verification and sandwich outcomes.
struct BarrierRunRecord {
    BarrierSpec spec;
    BarrierCheck above;
    BarrierCheck below;
    SandwichReport sandwich;
};
void write_barriers_json(const std::string& path, const std::vector<BarrierRunRecord>& records,
                         const std::string& config_hash);
// Per-node margins: below <= u <= above plus the obstacle gap before and
// after the supersolution perturbation (when one is configured).
void write_sandwich_csv(const std::string& path, const ValueField& field,
                        const std::vector<BarrierSpec>& specs, const SwitchingProblem& problem,
                        const LevyModel& model, const PerturbationSpec* pspec,
                        const std::string& config_hash);
void write_compare_csv(const std::string& path, const CompareReport& rep,
                       const std::string& config_hash);

// Read back what write_values_csv/write_policy_csv produced.
ValueField read_values_csv(const std::string& path, const Lattice& lat, int modes);
SwitchPolicy read_policy_csv(const std::string& path, const Lattice& lat, int modes);

}  // namespace switchgrid
