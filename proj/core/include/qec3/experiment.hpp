#pragma once

#include "qec3/analysis.hpp"
#include "qec3/codes.hpp"
#include "qec3/trajectories.hpp"

#include <string>
#include <vector>

namespace qec3 {

// Invalid configuration (unknown keys, bad values, unwritable paths).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SweepSpec {
    std::string parameter; // one of tau, eta, alpha, beta, delta_var ("" = none)
    std::vector<double> values;
};

struct ExperimentConfig {
    std::string experiment = "custom";
    std::string unraveling = "jump"; // jump | diffusion | none (deterministic)
    bool feedback = true;
    std::string initial_state = "bell12_21";
    std::string structure;           // E | V | Lambda for unmonitored decay runs
    double gamma = 1.0;
    double alpha = 0.5;              // which-path split (two-detector ladder)
    double beta = 1.0;               // upper/lower rate imbalance
    bool split_channels = false;
    SimParams params;
    SweepSpec sweep;
    int n_traj = 100;
    unsigned n_threads = 0;
    std::string output_dir = ".";

    void validate() const; // throws ConfigError
};

// Named presets covering the studied protocols and imperfections.
std::vector<std::string> preset_names();
ExperimentConfig preset_config(const std::string& name);

// bell12_21, plus11_22, bell00_22, w3, or coeffs(a,b,c).
Ket named_initial_state(const std::string& name);

struct RunOutputs {
    std::vector<std::string> csv_paths;
    std::string manifest_path;
};

// Runs the configured experiment (one ensemble per sweep value, or a single
// ensemble / master propagation / trajectory export) and writes one CSV per
// sweep value plus a JSON manifest. Byte-identical CSVs for a fixed seed.
RunOutputs run_experiment(const ExperimentConfig& cfg);

// Writes one row per simplex grid point: a, b, c, sudden_changes, terminal.
// Three reference rows with the documented example amplitudes come first.
// Returns the number of rows written.
int classify_map(Structure kind, int resolution, const std::string& out_path);

// Human-readable code verification report. all_ok is cleared when any checked
// condition fails for the requested parameters (e.g. beta != 1 breaks
// recyclability; a named structure has no common recyclable codespace).
std::string verify_codes_report(double gamma, double alpha, double beta,
                                const std::string& structure, bool* all_ok);

// key = value configuration file (# comments); keys match the CLI flags.
ExperimentConfig load_config_file(const std::string& path);
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

} // namespace qec3
