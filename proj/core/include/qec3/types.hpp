#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace qec3 {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline int total_dim(const std::vector<int>& dims) {
    int d = 1;
    for (int x : dims) {
        if (x < 2) throw std::invalid_argument("local dimension must be >= 2");
        d *= x;
    }
    return d;
}

// Pure state on a register of small local dimensions. Basis ordering is
// row-major Kronecker: for two qutrits, |i>|j> sits at flat index 3*i + j.
struct Ket {
    std::vector<int> dims;
    Vector amps;

    Ket() = default;
    Ket(std::vector<int> d, Vector a) : dims(std::move(d)), amps(std::move(a)) {
        if (amps.size() != total_dim(dims))
            throw std::invalid_argument("Ket: amplitude length does not match dims");
    }
    int dim() const { return static_cast<int>(amps.size()); }
    double norm() const { return amps.norm(); }
};

struct DensityMatrix {
    std::vector<int> dims;
    Matrix mat;

    DensityMatrix() = default;
    DensityMatrix(std::vector<int> d, Matrix m) : dims(std::move(d)), mat(std::move(m)) {
        if (mat.rows() != mat.cols() || mat.rows() != total_dim(dims))
            throw std::invalid_argument("DensityMatrix: shape does not match dims");
    }
    int dim() const { return static_cast<int>(mat.rows()); }
    double trace_real() const { return mat.trace().real(); }
};

struct Operator {
    std::vector<int> dims;
    Matrix mat;

    Operator() = default;
    Operator(std::vector<int> d, Matrix m) : dims(std::move(d)), mat(std::move(m)) {
        if (mat.rows() != mat.cols() || mat.rows() != total_dim(dims))
            throw std::invalid_argument("Operator: shape does not match dims");
    }
    int dim() const { return static_cast<int>(mat.rows()); }
};

} // namespace qec3
