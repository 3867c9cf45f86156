#pragma once

#include "qec3/types.hpp"

#include <numbers>
#include <optional>
#include <string>

namespace qec3 {

// Feedback rotation magnitude for the jump code: e^{-iF} must equal the
// cyclic recycler R, which is a 2*pi/3 rotation about the (1,1,1) axis whose
// antisymmetric generator has singular values sqrt(3). ~= 1.2092
inline constexpr double kJumpFeedbackLambda =
    2.0 * std::numbers::pi / (3.0 * std::numbers::sqrt3);

enum class CodeKind { jump, diffusion };

// Single-site protection data. All operators are 3x3.
struct CodeSpec {
    CodeKind kind = CodeKind::jump;
    Operator channel;             // Pi, the monitored collapse operator
    Operator codespace_projector; // P_C
    Operator feedback_generator;  // F (Hermitian)
    std::optional<Operator> recycler;   // R, jump code only (unitary)
    std::optional<Operator> drive;      // H, diffusion code only
    std::optional<Operator> stabilizer; // S, diffusion code only
    double lambda_mag = 0.0;            // jump code feedback magnitude
    double gamma = 1.0;
};

// Jump-recycled code on the qutrit ladder: codespace {|1>,|2>}, recycler the
// cyclic permutation |0>->|1>->|2>->|0>, feedback F with e^{-iF} = R.
CodeSpec jump_code(double gamma);

// Measurement-diffusion code: codespace {|0>,|2>} stabilized by S=diag(1,-1,1),
// F = Y - iXS from the Hermitian decomposition of Pi, drive H = -(Pi^dag F + F Pi)/2.
CodeSpec diffusion_code(double gamma);

struct OperatorParts {
    Operator m; // trace part, (tr Pi / d) * I
    Operator x; // Hermitian part of Pi - M
    Operator y; // anti-Hermitian part of Pi - M, divided by i
};

// Pi = M + X + iY with X, Y Hermitian and traceless.
OperatorParts operator_decompose(const Operator& op);

struct RecyclabilityReport {
    bool ok = false;
    double c1 = 0.0;           // Pi^dag Pi ~ c1 P_C
    double c2 = 0.0;           // R Pi ~ c2 P_C (real part of the LSQ fit)
    double residual1 = 0.0;
    double residual2 = 0.0;
    double unitarity_residual = 0.0;
    std::string note;
};

// Least-squares proportionality fits; ok iff both residuals < 1e-10 and R is
// unitary. A rate imbalance (beta != 1) breaks residual1.
RecyclabilityReport verify_recyclability(const Operator& pi, const Operator& pc,
                                         const Operator& recycler);

struct NoGoReport {
    bool no_qubit_code = false;   // true: no admissible stabilizer exists
    int candidates_scanned = 0;
    int anticommuting_found = 0;  // candidates with SX + XS = 0
    int max_protected_dim = 0;    // largest +1 eigenspace among those
    std::string note;
};

// Scans the full family of 2x2 Hermitian involutions (S = +/-I and the Bloch
// sphere) against the qubit decay quadrature X: protecting an unknown qubit
// needs a 2-dimensional +1 eigenspace, which only S = I has, and S = I cannot
// anticommute with X.
NoGoReport qubit_no_go_check();

} // namespace qec3
