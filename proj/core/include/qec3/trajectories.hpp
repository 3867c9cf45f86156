#pragma once

#include "qec3/channels.hpp"
#include "qec3/codes.hpp"
#include "qec3/qcore.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qec3 {

// Raised when an integrator leaves the physical manifold (trace drift,
// negativity of the state itself, norm underflow).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SimParams {
    double dt = 1e-3;
    double t_max = 10.0;
    double eta = 1.0;       // detector efficiency, applied to every channel
    double tau = 0.0;       // feedback delay, rounded to whole steps
    double delta_var = 0.0; // variance of the feedback-strength disorder
    std::uint64_t seed = 0;
    int record_stride = 100;
    std::vector<int> bipartition = {0}; // sites transposed for negativity
    bool record_dq = false;
    bool record_event_negativity = true;
    bool record_states = false; // keep the sampled density matrices

    long n_steps() const;
    long tau_steps() const;
    void validate(bool feedback_active) const;
};

enum class EventKind { jump, feedback };

struct TrajectoryEvent {
    double time = 0.0;
    int channel = -1;
    int site = -1;
    EventKind kind = EventKind::jump;
    double delta = 0.0;
    // Negativity immediately before/after the event, when recorded (-1 if not).
    double negativity_before = -1.0;
    double negativity_after = -1.0;
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<double> negativity;
    std::vector<std::vector<double>> pt_spectra; // negative part per sample
    std::vector<double> fidelity_to_initial;
    std::vector<double> codespace_population;   // -1 when no code present
    std::vector<TrajectoryEvent> events;
    std::vector<std::vector<double>> dq_records; // [channel][step] if record_dq
    std::vector<Matrix> sampled_states;          // filled if record_states
    std::vector<std::string> warnings;
    DensityMatrix final_state;
};

struct MasterSeries {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
};

// Deterministic Lindblad propagation (fixed-step RK4). Aborts with
// NumericalError if the sampled state leaves positivity by more than 1e-6 or
// the trace drifts by more than 1e-9 per unit time.
MasterSeries master_evolve(const DensityMatrix& rho0, const ChannelSet& cs,
                           const std::optional<Operator>& hamiltonian, const SimParams& p);

// Jump unraveling with per-step Bernoulli clicks, optional per-site recycling
// feedback (delayed by tau, disordered by delta), and inefficiency eta.
// Runs on kets when eta == 1 (pure-state fast path), density matrices otherwise.
TrajectoryRecord jump_trajectory(const Ket& psi0, const ChannelSet& cs,
                                 const std::optional<CodeSpec>& code, const SimParams& p,
                                 std::uint32_t trajectory_index = 0);

// Homodyne / diffusive unraveling (Euler-Maruyama, Ito convention) with the
// measurement record fed back as e^{-iF dQ(t-tau)/eta} together with the
// constant drive e^{-iH dt}.
TrajectoryRecord diffusion_trajectory(const Ket& psi0, const ChannelSet& cs,
                                      const std::optional<CodeSpec>& code, const SimParams& p,
                                      std::uint32_t trajectory_index = 0);

// Exact no-click conditional state exp(H_eff t)|psi0> (renormalized) with
// H_eff = -(1/2) sum_n Pi_n^dag Pi_n.
Ket no_jump_propagate(const Ket& psi0, const ChannelSet& cs, double t);

struct TrajectorySummary {
    int n_jumps = 0;
    int n_feedbacks = 0;
    double final_fidelity = 0.0;
    double time_avg_negativity = 0.0;
    double min_negativity = 0.0;
    // Smallest (negativity_after - negativity_before) over detection events;
    // +inf when the trajectory had none.
    double worst_event_leap = 0.0;
    int n_warnings = 0;
};

struct EnsembleConfig {
    enum class Unraveling { jump, diffusion };
    Unraveling unraveling = Unraveling::jump;
    Ket psi0;
    ChannelSet channels;
    std::optional<CodeSpec> code;
    SimParams params;
    unsigned n_threads = 0;      // 0 = hardware concurrency
    bool keep_mean_state = false;
};

struct EnsembleResult {
    int n_traj = 0;
    std::vector<double> times;
    std::vector<double> mean_negativity, stderr_negativity;
    std::vector<double> mean_fidelity, stderr_fidelity;
    std::vector<double> mean_codespace_population;
    // Ensemble-averaged state per sample time and the summed entrywise
    // variance of that mean (Frobenius scale of the Monte Carlo error),
    // filled when keep_mean_state is set.
    std::vector<Matrix> mean_state;
    std::vector<double> mean_state_sigma;
    std::vector<TrajectorySummary> per_traj;
    long total_warnings = 0;
};

// Runs n_traj independent trajectories. Results are bit-identical for a fixed
// (seed, n_traj, dt) regardless of thread count: randomness is addressed by
// trajectory index and the reduction runs in index order.
EnsembleResult ensemble_run(const EnsembleConfig& cfg, int n_traj);

} // namespace qec3
