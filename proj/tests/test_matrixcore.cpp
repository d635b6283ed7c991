#include <doctest.h>

#include <random>

#include "diqr/matrixcore.hpp"

using namespace diqr;

TEST_CASE("eig_hermitian on small cases") {
    auto e = eig_hermitian(identity(2));
    CHECK(e.values(0) == doctest::Approx(1.0));
    CHECK(e.values(1) == doctest::Approx(1.0));

    auto x = eig_hermitian(pauli_x());
    CHECK(x.values(0) == doctest::Approx(-1.0));
    CHECK(x.values(1) == doctest::Approx(1.0));
}

TEST_CASE("eig_hermitian reconstructs random Hermitian input") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        CMatrix a = random_hermitian(rng, 8);
        auto e = eig_hermitian(a);
        CMatrix back = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
        CHECK(operator_norm(a - back) <= 1e-10 * operator_norm(a));
        CHECK(max_abs(e.vectors.adjoint() * e.vectors - identity(8)) < 1e-12);
        for (int i = 1; i < 8; ++i) CHECK(e.values(i - 1) <= e.values(i));
    }
}

TEST_CASE("eig_hermitian rejects bad input") {
    CMatrix a(2, 2);
    a << 1, 2, 0, 1;
    CHECK_THROWS_AS(eig_hermitian(a), std::invalid_argument);
    CHECK_THROWS_AS(eig_hermitian(CMatrix(2, 3)), std::invalid_argument);
    CHECK_THROWS_AS(eig_hermitian(identity(65)), std::invalid_argument);
}

TEST_CASE("matrix_power") {
    CHECK(max_abs(matrix_power(identity(3), 0.37) - identity(3)) < 1e-14);

    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 4;
    d(1, 1) = 1;
    CMatrix r = matrix_power(d, 0.5);
    CHECK(r(0, 0).real() == doctest::Approx(2.0));
    CHECK(r(1, 1).real() == doctest::Approx(1.0));

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        CMatrix a = random_psd(rng, 6, 1 + trial % 6);
        CMatrix h = matrix_power(a, 0.5);
        CHECK(max_abs(h * h - a) < 1e-9);
    }
    CHECK_THROWS_AS(matrix_power(-identity(2), 0.5), std::invalid_argument);
    CHECK_THROWS_AS(matrix_power(identity(2), 0.0), std::invalid_argument);
}

TEST_CASE("trace_power matches eigenvalue sum") {
    std::mt19937_64 rng(4);
    CMatrix a = random_psd(rng, 5, 5);
    CHECK(trace_power(a, 1.0) == doctest::Approx(a.trace().real()));
    CHECK(trace_power(a, 2.0) == doctest::Approx((a * a).trace().real()));
}

TEST_CASE("schatten_norm") {
    for (int d : {1, 3, 7})
        for (double p : {1.0, 2.0, 3.5}) CHECK(schatten_norm(identity(d), p) == doctest::Approx(std::pow(d, 1.0 / p)));
    CHECK(schatten_norm(pauli_x(), 2.0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(operator_norm(pauli_y()) == doctest::Approx(1.0));

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        CMatrix a = random_ginibre(rng, 4, 6);
        const double n2 = schatten_norm(a, 2.0);
        CHECK(std::abs(n2 * n2 - (a.adjoint() * a).trace().real()) < 1e-10);
    }
    CHECK_THROWS_AS(schatten_norm(identity(2), 0.5), std::invalid_argument);
}

TEST_CASE("Loewner order and PSD checks") {
    CHECK(is_psd(identity(3)));
    CHECK_FALSE(is_psd(pauli_z()));
    CHECK(psd_leq(0.5 * identity(2), identity(2)));
    CHECK_FALSE(psd_leq(identity(2), 0.5 * identity(2)));
}

TEST_CASE("partial traces of a product state") {
    std::mt19937_64 rng(6);
    CMatrix a = random_density(rng, 2, 2), b = random_density(rng, 3, 3);
    CMatrix ab = kron(a, b);
    CHECK(max_abs(partial_trace_right(ab, 2, 3) - a) < 1e-12);
    CHECK(max_abs(partial_trace_left(ab, 2, 3) - b) < 1e-12);
}

TEST_CASE("random generators") {
    std::mt19937_64 rng(7);
    CMatrix u = random_unitary(rng, 5);
    CHECK(max_abs(u.adjoint() * u - identity(5)) < 1e-12);
    CMatrix rho = random_density(rng, 4, 2);
    CHECK(rho.trace().real() == doctest::Approx(1.0));
    CHECK(is_psd(rho));
    auto e = eig_hermitian(rho);
    CHECK(std::abs(e.values(0)) < 1e-12);  // rank 2 in dimension 4
}
