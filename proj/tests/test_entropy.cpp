#include <doctest.h>

#include <cmath>
#include <random>

#include "diqr/entropy.hpp"
#include "diqr/rates.hpp"

using namespace diqr;

namespace {

CMatrix diag2(double a, double b) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

// Sandwiched divergence for commuting diagonal operators, straight from the
// classical formula.
double classical_renyi(const std::vector<double>& p, const std::vector<double>& q, double alpha) {
    double s = 0, tr = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        s += std::pow(p[i], alpha) * std::pow(q[i], 1 - alpha);
        tr += p[i];
    }
    return std::log2(s / tr) / (alpha - 1);
}

}  // namespace

TEST_CASE("renyi_divergence basic values") {
    std::mt19937_64 rng(1);
    CMatrix rho = random_density(rng, 4, 4);
    for (double a : {1.1, 1.5, 2.0}) CHECK(std::abs(renyi_divergence(rho, rho, a)) < 1e-10);
    for (double a : {1.1, 1.5, 2.0}) CHECK(renyi_divergence(identity(2) / 2.0, identity(2), a) == doctest::Approx(-1.0));
    CHECK(renyi_divergence(diag2(0.7, 0.3), diag2(0.4, 0.6), 1.5) ==
          doctest::Approx(classical_renyi({0.7, 0.3}, {0.4, 0.6}, 1.5)));
}

TEST_CASE("renyi_divergence is monotone in alpha") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 2 + trial % 4;
        CMatrix rho = random_density(rng, d, 1 + trial % d), sigma = random_density(rng, d, d);
        const double a = renyi_divergence(rho, sigma, 1.1), b = renyi_divergence(rho, sigma, 1.5),
                     c = renyi_divergence(rho, sigma, 2.0);
        CHECK(a <= b + 1e-9);
        CHECK(b <= c + 1e-9);
        CHECK(c <= dmax(rho, sigma) + 1e-9);
    }
}

TEST_CASE("renyi_divergence domain and support errors") {
    CHECK_THROWS_AS(renyi_divergence(identity(2) / 2.0, identity(2), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(renyi_divergence(identity(2) / 2.0, identity(2), 2.5), std::invalid_argument);
    CHECK_THROWS_AS(renyi_divergence(diag2(0.5, 0.5), diag2(1, 0), 1.5), SupportViolation);
}

TEST_CASE("dmax values") {
    std::mt19937_64 rng(3);
    CMatrix rho = random_density(rng, 3, 3);
    CHECK(std::abs(dmax(rho, rho)) < 1e-9);
    CHECK(dmax(diag2(0.9, 0.1), identity(2) / 2.0) == doctest::Approx(std::log2(1.8)));
}

TEST_CASE("data processing under pinching") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 2 + trial % 5;
        CMatrix rho = random_density(rng, d, d), sigma = random_density(rng, d, d);
        auto P = random_projective_measurement(rng, d, 1 + trial % d);
        for (double a : {1.2, 2.0})
            CHECK(renyi_divergence(pinch(rho, P), pinch(sigma, P), a) <= renyi_divergence(rho, sigma, a) + 1e-9);
    }
}

TEST_CASE("smooth_from_renyi guarantees") {
    std::mt19937_64 rng(5);
    CqState st;
    st.labels = {"0", "1"};
    CMatrix rho = random_density(rng, 3, 3);
    st.blocks = {0.5 * rho, 0.5 * rho};
    const std::vector<CMatrix> sig{rho, rho};
    auto same = smooth_from_renyi(st, sig, 1.5, 0.1);
    CHECK(same.bound >= 0);
    CHECK(same.trace_distance <= 0.1 + 1e-9);
    CHECK(same.dmax_smoothed <= same.bound + 1e-9);

    // eps = sqrt 2 adds no penalty.
    auto r2 = smooth_from_renyi(st, sig, 1.5, std::sqrt(2.0));
    CHECK(r2.bound == doctest::Approx(renyi_divergence(st, sig, 1.5)).epsilon(1e-12));

    for (int trial = 0; trial < 100; ++trial) {
        const int d = 1 + trial % 8;
        CqState s;
        double tot = 0;
        for (int l = 0; l < 4; ++l) {
            s.labels.push_back(std::to_string(l));
            s.blocks.push_back(random_psd(rng, d, 1 + trial % d));
            tot += s.blocks.back().trace().real();
        }
        for (auto& b : s.blocks) b /= tot;
        const double eps = std::exp2(-1 - trial % 10);
        auto r = smooth_from_renyi(s, random_density(rng, d, d), 1.3, eps);
        CHECK(r.trace_distance <= eps + 1e-9);
        CHECK(r.dmax_smoothed <= r.bound + 1e-9);
    }
}

TEST_CASE("measurement_split structure") {
    // Maximally entangled pair: V = C^2, W = C^1 so Z stacks <0| and <1| rows.
    CMatrix Z = CMatrix::Zero(2, 2);
    Z(0, 0) = Z(1, 1) = 1 / std::sqrt(2.0);
    auto m = measurement_split(Z);
    for (const CMatrix* r : {&m.rho0, &m.rho1, &m.rho_plus, &m.rho_minus}) CHECK(r->trace().real() == doctest::Approx(0.5));

    std::mt19937_64 rng(6);
    CMatrix Y = random_ginibre(rng, 2, 3);
    CMatrix Zy = CMatrix::Zero(4, 3);
    Zy.row(0) = Y.row(0);
    Zy.row(2) = Y.row(1);
    auto my = measurement_split(Zy);
    CHECK(max_abs(my.rho1) < 1e-12);
    CHECK(max_abs(my.rho_plus - my.rho / 2.0) < 1e-12);
    CHECK(max_abs(my.rho_minus - my.rho / 2.0) < 1e-12);

    auto r = random_measurement_instance(rng, 3, 2);
    CHECK(max_abs(r.rho0 + r.rho1 - r.rho_plus - r.rho_minus) < 1e-10);
}

TEST_CASE("uncertainty_check") {
    CMatrix Z = CMatrix::Zero(2, 2);
    Z(0, 0) = Z(1, 1) = 1 / std::sqrt(2.0);
    auto bell = uncertainty_check(measurement_split(Z), 1.0);
    CHECK(bell.delta == doctest::Approx(0.5));
    CHECK(bell.holds);

    std::mt19937_64 rng(7);
    CMatrix Zy = CMatrix::Zero(4, 2);
    Zy.row(0) = random_ginibre(rng, 1, 2);
    Zy.row(2) = random_ginibre(rng, 1, 2);
    for (double e : {0.1, 0.5, 1.0}) {
        auto r = uncertainty_check(measurement_split(Zy), e);
        CHECK(r.delta == doctest::Approx(0.0));
        CHECK(r.rhs == doctest::Approx(std::exp2(-e)));
        CHECK(r.holds);
    }

    int violations = 0;
    for (int i = 0; i < 300; ++i)
        for (double e : {0.1, 0.5, 1.0})
            violations += !uncertainty_check(random_measurement_instance(rng, 1 + i % 4, 1 + (i / 4) % 4), e).holds;
    CHECK(violations == 0);
}

TEST_CASE("schatten_ineq_check") {
    std::mt19937_64 rng(8);
    CMatrix X = random_ginibre(rng, 3, 3);
    for (double p : {2.0, 2.5, 4.0}) {
        auto zero = schatten_ineq_check(X, CMatrix::Zero(3, 3), p);
        CHECK(zero.lhs == doctest::Approx(std::exp2(1 - p / 2) * std::pow(schatten_norm(X, p), p)));
        CHECK(zero.lhs == doctest::Approx(zero.rhs));
        auto same = schatten_ineq_check(X, X, p);
        CHECK(same.lhs == doctest::Approx(std::pow(schatten_norm(std::sqrt(2.0) * X, p), p)));
    }
    int violations = 0;
    for (int i = 0; i < 300; ++i)
        for (double p : {2.0, 2.5, 4.0})
            violations += !schatten_ineq_check(random_ginibre(rng, 3, 2), random_ginibre(rng, 3, 2), p).holds;
    CHECK(violations == 0);
    CHECK_THROWS_AS(schatten_ineq_check(X, X, 1.5), std::invalid_argument);
}

TEST_CASE("conditional entropy of a product state") {
    std::mt19937_64 rng(9);
    CMatrix a = identity(2) / 2.0, b = random_density(rng, 2, 2);
    // H(A|B) with sigma_B = rho_B equals H(A) = 1 for a maximally mixed A.
    CHECK(conditional_renyi_entropy(kron(a, b), 2, 2, b, 1.5) == doctest::Approx(1.0));
    CHECK(conditional_renyi_entropy_coarse(kron(a, b), 2, 2, 1.5) >= 1.0 - 1e-9);
    CHECK_THROWS_AS(conditional_renyi_entropy(kron(a, b), 2, 3, b, 1.5), std::invalid_argument);
}
