#pragma once

#include "qec3/channels.hpp"
#include "qec3/qcore.hpp"
#include "qec3/trajectories.hpp"

#include <string>
#include <vector>

namespace qec3 {

// Amplitudes of a|00> + b|11> + c|22>, normalized on construction.
struct InitialCoeffs {
    double a = 0.0, b = 0.0, c = 0.0;
    // The case tables assume distinct nonzero amplitudes; ties or zeros are
    // flagged here and classified as boundary.
    bool degenerate = false;
};

InitialCoeffs make_coeffs(double a, double b, double c, double tie_tol = 1e-9);
Ket coeffs_state(const InitialCoeffs& coeffs);

enum class Terminal { asymptotic_decay, sudden_death, asymptotic_entangled, boundary };
const char* to_string(Terminal t);

struct RegimeLabel {
    int sudden_changes = 0;
    Terminal terminal = Terminal::asymptotic_decay;
};

// Exact disentanglement regime for two qutrits decaying independently with
// equal rates under the given level structure. Derived from the closed-form
// partial-transpose eigenvalue branches; see the per-structure rules in the
// implementation. Comparisons within tol of a case boundary (or degenerate
// coefficient sets) are reported as Terminal::boundary.
RegimeLabel classify_regime(Structure kind, const InitialCoeffs& coeffs, double tol = 1e-9);

struct BranchEnd {
    double time = 0.0;      // interpolated vanishing time
    bool transversal = false; // crossed zero with finite slope (a sudden change)
    double log_rate = 0.0;  // decay rate of the branch over its last interval
};

struct SuddenChangeReport {
    std::vector<double> change_times; // transversal vanishings, death excluded
    int sudden_changes = 0;
    Terminal terminal = Terminal::asymptotic_decay;
    double death_time = -1.0;         // set when terminal == sudden_death
    double final_negativity = 0.0;
    int surviving_branches = 0;
    std::vector<BranchEnd> endings;   // every branch that vanished, in time order
};

// Tracks the negative partial-transpose eigenvalue branches of a sampled
// evolution. A branch that disappears is a sudden change only if it reached
// zero transversally: a branch decaying exponentially (rate below
// rate_threshold * gamma) merely faded below eps_zero and is not counted.
// When every branch ends transversally the last vanishing is sudden death
// (reported separately, not counted as a change). A surviving branch means
// asymptotic entanglement if the final negativity exceeds entangled_floor,
// asymptotic decay otherwise.
SuddenChangeReport detect_sudden_changes(const std::vector<std::vector<double>>& spectra,
                                         const std::vector<double>& times, double gamma = 1.0,
                                         double eps_zero = kEpsZero,
                                         double rate_threshold = 10.0,
                                         double entangled_floor = 1e-3);

// Negative PT spectrum at every sample of a master-equation run.
std::vector<std::vector<double>> pt_spectra_series(const MasterSeries& series,
                                                   const std::vector<int>& part,
                                                   double eps_zero = kEpsZero);

// Conditional no-click negativity closed forms. kappa is the amplitude decay
// exponent of the populated excited levels; with H_eff = -(1/2) sum Pi^dag Pi
// the ladder structures give kappa = gamma and the Lambda structure
// kappa = 2 gamma (fixed by the oracle tests against no_jump_propagate).
double nojump_negativity_ev(const InitialCoeffs& coeffs, double kappa, double t);
double nojump_negativity_lambda(const InitialCoeffs& coeffs, double kappa, double t);

// t -> infinity limit of the Lambda no-click curve: 2ab/(a^2+b^2).
double lambda_asymptote(const InitialCoeffs& coeffs);

struct TransientReport {
    double initial_negativity = 0.0;
    double max_negativity = 0.0;
    double t_of_max = 0.0;
    bool increases = false; // max exceeds the initial value
};

// Scans the no-click negativity curve on a dense grid in [0, t_max].
TransientReport nojump_transient_check(Structure kind, const InitialCoeffs& coeffs,
                                       double gamma = 1.0, double t_max = 15.0,
                                       int n_grid = 3001);

} // namespace qec3
