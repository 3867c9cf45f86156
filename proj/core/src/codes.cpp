#include "qec3/codes.hpp"

#include "qec3/qcore.hpp"

#include <cmath>

namespace qec3 {

namespace {

Matrix ket_bra3(int i, int j) {
    Matrix m = Matrix::Zero(3, 3);
    m(i, j) = 1.0;
    return m;
}

} // namespace

CodeSpec jump_code(double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("jump_code: gamma must be positive");
    const double rg = std::sqrt(gamma);
    Matrix pi = rg * (ket_bra3(1, 2) + ket_bra3(0, 1));
    Matrix pc = ket_bra3(1, 1) + ket_bra3(2, 2);
    Matrix recycler = ket_bra3(1, 0) + ket_bra3(2, 1) + ket_bra3(0, 2);

    // A = (Pi^dag - Pi)/sqrt(gamma) + |0><2| - |2><0| is real antisymmetric;
    // F = i*lambda*A is Hermitian and e^{-iF} = e^{lambda*A} = R.
    Matrix a = (pi.adjoint() - pi) / rg + ket_bra3(0, 2) - ket_bra3(2, 0);
    Matrix f = cplx(0.0, kJumpFeedbackLambda) * a;

    CodeSpec code;
    code.kind = CodeKind::jump;
    code.gamma = gamma;
    code.channel = Operator({3}, std::move(pi));
    code.codespace_projector = Operator({3}, std::move(pc));
    code.feedback_generator = Operator({3}, std::move(f));
    code.recycler = Operator({3}, std::move(recycler));
    code.lambda_mag = kJumpFeedbackLambda;
    return code;
}

OperatorParts operator_decompose(const Operator& op) {
    const int d = op.dim();
    const Matrix m = (op.mat.trace() / static_cast<double>(d)) * Matrix::Identity(d, d);
    const Matrix rest = op.mat - m;
    Matrix x = 0.5 * (rest + rest.adjoint());
    Matrix y = cplx(0.0, -0.5) * (rest - rest.adjoint());
    return {Operator(op.dims, m), Operator(op.dims, std::move(x)), Operator(op.dims, std::move(y))};
}

CodeSpec diffusion_code(double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("diffusion_code: gamma must be positive");
    const double rg = std::sqrt(gamma);
    Matrix pi = rg * (ket_bra3(1, 2) + ket_bra3(0, 1));
    Operator pi_op({3}, pi);
    const OperatorParts parts = operator_decompose(pi_op);

    Matrix s = Matrix::Zero(3, 3);
    s(0, 0) = 1.0;
    s(1, 1) = -1.0;
    s(2, 2) = 1.0;

    // F = Y - iXS is Hermitian because S anticommutes with X.
    Matrix f = parts.y.mat - cplx(0.0, 1.0) * parts.x.mat * s;
    Matrix h = -0.5 * (pi.adjoint() * f + f * pi);
    Matrix pc = ket_bra3(0, 0) + ket_bra3(2, 2);

    CodeSpec code;
    code.kind = CodeKind::diffusion;
    code.gamma = gamma;
    code.channel = std::move(pi_op);
    code.codespace_projector = Operator({3}, std::move(pc));
    code.feedback_generator = Operator({3}, std::move(f));
    code.drive = Operator({3}, std::move(h));
    code.stabilizer = Operator({3}, std::move(s));
    return code;
}

RecyclabilityReport verify_recyclability(const Operator& pi, const Operator& pc,
                                         const Operator& recycler) {
    RecyclabilityReport report;
    const Matrix pipi = pi.mat.adjoint() * pi.mat;
    const Matrix rpi = recycler.mat * pi.mat;
    const double pc_norm2 = pc.mat.squaredNorm();
    if (pc_norm2 <= 0.0) throw std::invalid_argument("verify_recyclability: empty projector");

    const cplx c1 = (pc.mat.adjoint() * pipi).trace() / pc_norm2;
    const cplx c2 = (pc.mat.adjoint() * rpi).trace() / pc_norm2;
    report.c1 = c1.real();
    report.c2 = c2.real();
    report.residual1 = (pipi - c1 * pc.mat).norm();
    report.residual2 = (rpi - c2 * pc.mat).norm();
    report.unitarity_residual =
        (recycler.mat.adjoint() * recycler.mat - Matrix::Identity(pi.dim(), pi.dim())).norm();

    const double tol = 1e-10;
    report.ok = report.residual1 < tol && report.residual2 < tol &&
                report.unitarity_residual < tol;
    if (!report.ok) {
        report.note = report.residual1 >= tol
                          ? "Pi^dag Pi is not proportional to the codespace projector"
                          : (report.residual2 >= tol ? "R Pi does not restore the codespace"
                                                     : "recycler is not unitary");
    }
    return report;
}

NoGoReport qubit_no_go_check() {
    NoGoReport report;
    // Qubit analogue of the monitored decay quadrature: X from Pi = |0><1|.
    Matrix x = Matrix::Zero(2, 2);
    x(0, 1) = 0.5;
    x(1, 0) = 0.5;

    const double tol = 1e-9;
    const int n_theta = 181, n_phi = 360;
    auto consider = [&](const Matrix& s) {
        ++report.candidates_scanned;
        const double anti = (s * x + x * s).norm();
        if (anti > tol) return;
        ++report.anticommuting_found;
        const Eigen::VectorXd ev = hermitian_eigenvalues(s);
        int dim = 0;
        for (int i = 0; i < ev.size(); ++i)
            if (std::abs(ev[i] - 1.0) < tol) ++dim;
        report.max_protected_dim = std::max(report.max_protected_dim, dim);
    };

    consider(Matrix::Identity(2, 2));
    consider(-Matrix::Identity(2, 2));
    for (int it = 0; it <= n_theta; ++it) {
        const double theta = std::numbers::pi * it / n_theta;
        for (int ip = 0; ip < n_phi; ++ip) {
            const double phi = 2.0 * std::numbers::pi * ip / n_phi;
            Matrix s(2, 2);
            const double nx = std::sin(theta) * std::cos(phi);
            const double ny = std::sin(theta) * std::sin(phi);
            const double nz = std::cos(theta);
            s(0, 0) = nz;
            s(0, 1) = cplx(nx, -ny);
            s(1, 0) = cplx(nx, ny);
            s(1, 1) = -nz;
            consider(s);
        }
    }

    // Protecting an unknown qubit needs a 2-dimensional stabilized space.
    report.no_qubit_code = report.max_protected_dim < 2;
    report.note = "anticommutation with X forces S onto the y-z great circle, "
                  "whose +1 eigenspace is one-dimensional; the only 2-dimensional "
                  "stabilizer is the identity, which commutes instead";
    return report;
}

} // namespace qec3
