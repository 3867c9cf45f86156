#pragma once

#include "qec3/types.hpp"

namespace qec3 {

// Default threshold below which a partial-transpose eigenvalue counts as
// negative; keeps eigensolver noise around zero out of spectra and counts.
inline constexpr double kEpsZero = 1e-10;

Ket basis_state(const std::vector<int>& dims, const std::vector<int>& levels);
Ket normalized(Ket psi);
DensityMatrix to_density(const Ket& psi);

Operator identity_op(const std::vector<int>& dims);

// Embeds a single-site operator into an n-site register (identity elsewhere).
Operator embed_site_op(const Matrix& site_op, int site, const std::vector<int>& dims);

Operator tensor_product(const Operator& a, const Operator& b);
Ket tensor_product(const Ket& a, const Ket& b);

// Transposes the indices of one site. The result of transposing a state is
// generally not a state, so this returns an Operator.
Operator partial_transpose(const DensityMatrix& rho, int site);
Operator partial_transpose(const Operator& rho, int site);

// Negativity across the bipartition (part | complement):
// trace norm of the partial transpose minus the trace, i.e. twice the summed
// magnitude of the negative eigenvalues. Input must be Hermitian.
double negativity(const DensityMatrix& rho, const std::vector<int>& part);

// Negative part of the partial-transpose spectrum, ascending (most negative
// first). Eigenvalues in (-eps_zero, 0) are treated as zero.
std::vector<double> pt_negative_spectrum(const DensityMatrix& rho,
                                         const std::vector<int>& part,
                                         double eps_zero = kEpsZero);

Operator matrix_exponential(const Operator& a);
Matrix matrix_exponential(const Matrix& a);

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep);

bool is_hermitian(const Matrix& m, double tol = 1e-10);
bool is_unitary(const Matrix& m, double tol = 1e-10);

// Sorted eigenvalues of a Hermitian matrix (ascending), via a dedicated
// Hermitian solver for stability of near-zero eigenvalues.
Eigen::VectorXd hermitian_eigenvalues(const Matrix& m);

} // namespace qec3
