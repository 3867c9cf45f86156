#include "qec3/qcore.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace qec3 {

namespace {

// Strides for row-major multi-index decomposition: site 0 is most significant.
std::vector<int> strides_of(const std::vector<int>& dims) {
    std::vector<int> s(dims.size(), 1);
    for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i)
        s[i] = s[i + 1] * dims[i + 1];
    return s;
}

int site_index(int flat, int stride, int dim) { return (flat / stride) % dim; }

} // namespace

Ket basis_state(const std::vector<int>& dims, const std::vector<int>& levels) {
    if (levels.size() != dims.size())
        throw std::invalid_argument("basis_state: one level per site required");
    const auto strides = strides_of(dims);
    int flat = 0;
    for (std::size_t s = 0; s < dims.size(); ++s) {
        if (levels[s] < 0 || levels[s] >= dims[s])
            throw std::invalid_argument("basis_state: level out of range");
        flat += levels[s] * strides[s];
    }
    Vector v = Vector::Zero(total_dim(dims));
    v[flat] = 1.0;
    return {dims, std::move(v)};
}

Ket normalized(Ket psi) {
    const double n = psi.amps.norm();
    if (n < 1e-300) throw std::domain_error("normalized: zero-norm state");
    psi.amps /= n;
    return psi;
}

DensityMatrix to_density(const Ket& psi) {
    return {psi.dims, psi.amps * psi.amps.adjoint()};
}

Operator identity_op(const std::vector<int>& dims) {
    const int d = total_dim(dims);
    return {dims, Matrix::Identity(d, d)};
}

Operator embed_site_op(const Matrix& site_op, int site, const std::vector<int>& dims) {
    if (site < 0 || site >= static_cast<int>(dims.size()))
        throw std::invalid_argument("embed_site_op: site out of range");
    if (site_op.rows() != dims[site])
        throw std::invalid_argument("embed_site_op: operator does not match site dimension");
    Matrix out = Matrix::Identity(1, 1);
    for (std::size_t s = 0; s < dims.size(); ++s) {
        const Matrix& factor = (static_cast<int>(s) == site)
                                   ? site_op
                                   : Matrix(Matrix::Identity(dims[s], dims[s]));
        Matrix next(out.rows() * factor.rows(), out.cols() * factor.cols());
        for (int i = 0; i < out.rows(); ++i)
            for (int j = 0; j < out.cols(); ++j)
                next.block(i * factor.rows(), j * factor.cols(), factor.rows(), factor.cols()) =
                    out(i, j) * factor;
        out = std::move(next);
    }
    return {dims, std::move(out)};
}

Operator tensor_product(const Operator& a, const Operator& b) {
    Matrix out(a.dim() * b.dim(), a.dim() * b.dim());
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j)
            out.block(i * b.dim(), j * b.dim(), b.dim(), b.dim()) = a.mat(i, j) * b.mat;
    std::vector<int> dims = a.dims;
    dims.insert(dims.end(), b.dims.begin(), b.dims.end());
    return {std::move(dims), std::move(out)};
}

Ket tensor_product(const Ket& a, const Ket& b) {
    Vector out(a.dim() * b.dim());
    for (int i = 0; i < a.dim(); ++i)
        out.segment(i * b.dim(), b.dim()) = a.amps[i] * b.amps;
    std::vector<int> dims = a.dims;
    dims.insert(dims.end(), b.dims.begin(), b.dims.end());
    return {std::move(dims), std::move(out)};
}

namespace {

Matrix partial_transpose_impl(const Matrix& m, const std::vector<int>& dims, int site) {
    if (site < 0 || site >= static_cast<int>(dims.size()))
        throw std::invalid_argument("partial_transpose: site out of range");
    const auto strides = strides_of(dims);
    const int d = static_cast<int>(m.rows());
    const int stride = strides[site];
    const int ds = dims[site];
    Matrix out(d, d);
    for (int r = 0; r < d; ++r) {
        const int rs = site_index(r, stride, ds);
        for (int c = 0; c < d; ++c) {
            const int cs = site_index(c, stride, ds);
            // Swap the site's row and column indices.
            const int r2 = r + (cs - rs) * stride;
            const int c2 = c + (rs - cs) * stride;
            out(r2, c2) = m(r, c);
        }
    }
    return out;
}

} // namespace

Operator partial_transpose(const DensityMatrix& rho, int site) {
    return {rho.dims, partial_transpose_impl(rho.mat, rho.dims, site)};
}

Operator partial_transpose(const Operator& rho, int site) {
    return {rho.dims, partial_transpose_impl(rho.mat, rho.dims, site)};
}

Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("hermitian_eigenvalues: eigensolver failed");
    return solver.eigenvalues();
}

namespace {

Eigen::VectorXd pt_spectrum(const DensityMatrix& rho, const std::vector<int>& part) {
    if (!is_hermitian(rho.mat, 1e-10 * std::max(1.0, rho.mat.norm())))
        throw std::invalid_argument("partial transpose spectrum: input not Hermitian");
    Matrix pt = rho.mat;
    for (int site : part) pt = partial_transpose_impl(pt, rho.dims, site);
    return hermitian_eigenvalues(pt);
}

} // namespace

double negativity(const DensityMatrix& rho, const std::vector<int>& part) {
    const Eigen::VectorXd ev = pt_spectrum(rho, part);
    double neg = 0.0;
    for (int i = 0; i < ev.size(); ++i)
        if (ev[i] < 0.0) neg -= ev[i];
    return 2.0 * neg;
}

std::vector<double> pt_negative_spectrum(const DensityMatrix& rho,
                                         const std::vector<int>& part,
                                         double eps_zero) {
    const Eigen::VectorXd ev = pt_spectrum(rho, part);
    std::vector<double> neg;
    for (int i = 0; i < ev.size(); ++i)
        if (ev[i] < -eps_zero) neg.push_back(ev[i]);
    std::sort(neg.begin(), neg.end());
    return neg;
}

Matrix matrix_exponential(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("matrix_exponential: square input required");
    return a.exp();
}

Operator matrix_exponential(const Operator& a) {
    return {a.dims, matrix_exponential(a.mat)};
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
    const auto& dims = rho.dims;
    std::vector<bool> kept(dims.size(), false);
    for (int s : keep) {
        if (s < 0 || s >= static_cast<int>(dims.size()))
            throw std::invalid_argument("partial_trace: site out of range");
        if (kept[s]) throw std::invalid_argument("partial_trace: duplicate site");
        kept[s] = true;
    }
    // keep must be sorted so the output ordering is unambiguous.
    for (std::size_t i = 1; i < keep.size(); ++i)
        if (keep[i - 1] >= keep[i])
            throw std::invalid_argument("partial_trace: keep must be strictly increasing");

    std::vector<int> keep_dims, trace_sites;
    for (std::size_t s = 0; s < dims.size(); ++s) {
        if (kept[s]) keep_dims.push_back(dims[s]);
        else trace_sites.push_back(static_cast<int>(s));
    }
    if (keep_dims.empty()) throw std::invalid_argument("partial_trace: must keep at least one site");

    const auto strides = strides_of(dims);
    int keep_total = 1;
    for (int d : keep_dims) keep_total *= d;
    int trace_total = 1;
    for (int s : trace_sites) trace_total *= dims[s];

    // flat index of the full register from (kept multi-index, traced multi-index)
    auto flat_of = [&](int kflat, int tflat) {
        int flat = 0;
        int kk = kflat, tt = tflat;
        for (int s = static_cast<int>(dims.size()) - 1; s >= 0; --s) {
            int level;
            if (kept[s]) {
                level = kk % dims[s];
                kk /= dims[s];
            } else {
                level = tt % dims[s];
                tt /= dims[s];
            }
            flat += level * strides[s];
        }
        return flat;
    };

    Matrix out = Matrix::Zero(keep_total, keep_total);
    for (int i = 0; i < keep_total; ++i)
        for (int j = 0; j < keep_total; ++j) {
            cplx acc = 0.0;
            for (int t = 0; t < trace_total; ++t)
                acc += rho.mat(flat_of(i, t), flat_of(j, t));
            out(i, j) = acc;
        }
    return {std::move(keep_dims), std::move(out)};
}

bool is_hermitian(const Matrix& m, double tol) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const Matrix& m, double tol) {
    const Matrix g = m.adjoint() * m;
    return (g - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

} // namespace qec3
