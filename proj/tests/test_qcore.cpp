#include "qec3/qcore.hpp"
#include "qec3/rng.hpp"

#include "doctest.h"

#include <cmath>

using namespace qec3;

namespace {

Ket bell12_21() {
    Vector v = Vector::Zero(9);
    v(5) = v(7) = 1.0 / std::sqrt(2.0);
    return Ket{{3, 3}, v};
}

Ket ghz3() {
    Vector v = Vector::Zero(9);
    v(0) = v(4) = v(8) = 1.0 / std::sqrt(3.0);
    return Ket{{3, 3}, v};
}

Ket random_two_qutrit(std::uint32_t idx) {
    CounterRng rng(99, idx);
    Vector v(9);
    for (int i = 0; i < 9; ++i)
        v(i) = cplx(rng.normal(i, 0, 0), rng.normal(i, 1, 0));
    v /= v.norm();
    return Ket{{3, 3}, v};
}

Matrix random_unitary3(std::uint32_t idx) {
    CounterRng rng(7, idx);
    Matrix a(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            a(i, j) = cplx(rng.normal(3 * i + j, 0, 0), rng.normal(3 * i + j, 1, 0));
    // QR-based Haar-ish unitary is overkill here; any unitary works for the
    // local-invariance property.
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ();
    return q;
}

} // namespace

TEST_CASE("basis ordering and tensor products") {
    const Ket k1 = basis_state({3}, {1});
    const Ket k2 = basis_state({3}, {2});
    const Ket prod = tensor_product(k1, k2);
    REQUIRE(prod.dim() == 9);
    CHECK(std::abs(prod.amps(5) - 1.0) < 1e-15);

    const Operator i3 = identity_op({3});
    const Operator i9 = tensor_product(i3, i3);
    CHECK((i9.mat - Matrix::Identity(9, 9)).norm() == 0.0);

    Matrix low = Matrix::Zero(3, 3);
    low(1, 2) = 1.0;
    const Operator lift = embed_site_op(low, 0, {3, 3});
    const Ket from = basis_state({3, 3}, {2, 0});
    Vector mapped = lift.mat * from.amps;
    const Ket expect = basis_state({3, 3}, {1, 0});
    CHECK((mapped - expect.amps).norm() < 1e-15);
}

TEST_CASE("partial transpose matches the block-swap definition") {
    const DensityMatrix rho = to_density(bell12_21());
    const Operator pt = partial_transpose(rho, 0);
    // (i,j),(k,l) entry of rho^{T_0} equals (k,j),(i,l) of rho.
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l)
                    CHECK(std::abs(pt.mat(3 * i + j, 3 * k + l) -
                                   rho.mat(3 * k + j, 3 * i + l)) < 1e-15);

    const Operator back = partial_transpose(pt, 0);
    CHECK((back.mat - rho.mat).norm() < 1e-15);
}

TEST_CASE("negativity of reference states") {
    // One negative PT eigenvalue -1/2 for a two-term Bell pair.
    const DensityMatrix bell = to_density(bell12_21());
    CHECK(negativity(bell, {0}) == doctest::Approx(1.0).epsilon(1e-12));
    const auto spectrum = pt_negative_spectrum(bell, {0});
    REQUIRE(spectrum.size() == 1);
    CHECK(spectrum[0] == doctest::Approx(-0.5).epsilon(1e-12));

    // Three eigenvalues -1/3 for the maximally entangled pair.
    const DensityMatrix ghz = to_density(ghz3());
    CHECK(negativity(ghz, {0}) == doctest::Approx(2.0).epsilon(1e-12));
    const auto spec3 = pt_negative_spectrum(ghz, {0});
    REQUIRE(spec3.size() == 3);
    for (double v : spec3) CHECK(v == doctest::Approx(-1.0 / 3.0).epsilon(1e-10));

    // Product states have none.
    const Ket prod = tensor_product(basis_state({3}, {1}), basis_state({3}, {2}));
    CHECK(negativity(to_density(prod), {0}) == doctest::Approx(0.0));
    CHECK(pt_negative_spectrum(to_density(prod), {0}).empty());
}

TEST_CASE("negativity is invariant under local unitaries") {
    for (std::uint32_t i = 0; i < 5; ++i) {
        const Ket psi = random_two_qutrit(i);
        const DensityMatrix rho = to_density(psi);
        const double n0 = negativity(rho, {0});
        const Matrix u = random_unitary3(2 * i);
        const Matrix v = random_unitary3(2 * i + 1);
        const Matrix uv = embed_site_op(u, 0, {3, 3}).mat * embed_site_op(v, 1, {3, 3}).mat;
        const DensityMatrix rot{{3, 3}, Matrix(uv * rho.mat * uv.adjoint())};
        CHECK(negativity(rot, {0}) == doctest::Approx(n0).epsilon(1e-9));
        // Transposing the complementary site gives the same value for pure states.
        CHECK(negativity(rho, {1}) == doctest::Approx(n0).epsilon(1e-9));
    }
}

TEST_CASE("partial trace") {
    const DensityMatrix rho = to_density(bell12_21());
    const DensityMatrix red = partial_trace(rho, {0});
    REQUIRE(red.mat.rows() == 3);
    CHECK(std::abs(red.mat(0, 0)) < 1e-15);
    CHECK(std::abs(red.mat(1, 1) - 0.5) < 1e-15);
    CHECK(std::abs(red.mat(2, 2) - 0.5) < 1e-15);
    CHECK(std::abs(red.mat.trace().real() - 1.0) < 1e-12);

    const DensityMatrix red1 = partial_trace(rho, {1});
    CHECK(std::abs(red1.mat(1, 1) - 0.5) < 1e-15);
}

TEST_CASE("matrix exponential") {
    CHECK((matrix_exponential(Matrix(Matrix::Zero(3, 3))) - Matrix::Identity(3, 3)).norm() <
          1e-14);
    // Rotation generator: exp([[0,-t],[t,0]]) is a plane rotation.
    const double th = 0.7;
    Matrix g = Matrix::Zero(2, 2);
    g(0, 1) = -th;
    g(1, 0) = th;
    const Matrix r = matrix_exponential(g);
    CHECK(std::abs(r(0, 0).real() - std::cos(th)) < 1e-12);
    CHECK(std::abs(r(1, 0).real() - std::sin(th)) < 1e-12);
}

TEST_CASE("hermiticity and unitarity checks") {
    Matrix h(2, 2);
    h << cplx(1, 0), cplx(0, 1), cplx(0, -1), cplx(2, 0);
    CHECK(is_hermitian(h));
    CHECK(!is_unitary(h));
    const Matrix u = matrix_exponential(Matrix(cplx(0, 1) * h));
    CHECK(is_unitary(u));
    const auto evs = hermitian_eigenvalues(h);
    // Eigenvalues of [[1, i], [-i, 2]]: (3 +/- sqrt(5)) / 2.
    CHECK(evs(0) == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-12));
    CHECK(evs(1) == doctest::Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-12));
}

TEST_CASE("shape validation") {
    CHECK_THROWS(Ket({3, 3}, Vector::Zero(8)));
    CHECK_THROWS(basis_state({3}, {3}));
    CHECK_THROWS(partial_trace(to_density(bell12_21()), {1, 0}));
    CHECK_THROWS(negativity(DensityMatrix{{3, 3}, Matrix(Matrix::Ones(9, 9) * cplx(0, 1))}, {0}));
}

TEST_CASE("three-site embedding and negativity bipartitions") {
    Vector v = Vector::Zero(27);
    v(3 * 3 * 1 + 3 * 1 + 2) = 1.0; // |112>
    v(3 * 3 * 1 + 3 * 2 + 1) = 1.0; // |121>
    v(3 * 3 * 2 + 3 * 1 + 1) = 1.0; // |211>
    v /= v.norm();
    const Ket w{{3, 3, 3}, v};
    const DensityMatrix rho = to_density(w);
    // W-type states are entangled across every cut.
    CHECK(negativity(rho, {0}) > 0.5);
    CHECK(negativity(rho, {2}) > 0.5);
    CHECK(negativity(rho, {0, 1}) == doctest::Approx(negativity(rho, {2})).epsilon(1e-10));
}
