#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "diqr/xorgames.hpp"

using namespace diqr;

namespace {

const cplx I(0, 1);
constexpr double kPi = std::numbers::pi;

// Independent dense-grid oracle for a two-player game: max over theta_1, theta_2
// of |P_G(e^{i theta_1}, e^{i theta_2})|.
double dense_grid_two_player(const XorGame& g, int steps) {
    double best = 0;
    for (int a = 0; a < steps; ++a)
        for (int b = 0; b < steps; ++b) {
            const double t1 = 2 * kPi * a / steps, t2 = 2 * kPi * b / steps;
            best = std::max(best, std::abs(eval_pg(g, {std::polar(1.0, t1), std::polar(1.0, t2)})));
        }
    return best;
}

}  // namespace

TEST_CASE("eval_pg at forced points") {
    XorGame ghz = ghz_game();
    CHECK(std::abs(eval_pg(ghz, {I, I, I}) - cplx(1, 0)) < 1e-12);
    CHECK(std::abs(eval_pg(ghz, {1, 1, 1}) - cplx(-0.5, 0)) < 1e-12);
    CHECK(std::abs(eval_pg(chsh_game(), {I, I}) - cplx(0.5, 0.5)) < 1e-12);
}

TEST_CASE("eval_zg") {
    XorGame ghz = ghz_game();
    RVector zero = RVector::Zero(4);
    double expected = 0;
    for (const auto& e : ghz.support) expected += e.prob * e.sign;
    CHECK(eval_zg(ghz, zero) == doctest::Approx(expected));

    RVector t(4);
    t << 0, kPi / 2, kPi / 2, kPi / 2;
    CHECK(eval_zg(ghz, t) == doctest::Approx(1.0));

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 2 * kPi);
    for (int trial = 0; trial < 100; ++trial) {
        RVector th(4);
        for (int k = 0; k < 4; ++k) th(k) = u(rng);
        std::vector<cplx> z;
        for (int k = 1; k < 4; ++k) z.push_back(std::polar(1.0, th(k)));
        CHECK(std::abs(eval_zg(ghz, th)) <= std::abs(eval_pg(ghz, z)) + 1e-9);
    }
}

TEST_CASE("optimal scores") {
    CHECK(optimal_score(ghz_game()).q == doctest::Approx(1.0).epsilon(1e-9));
    const double chsh = optimal_score(chsh_game()).q;
    CHECK(std::abs(chsh - std::sqrt(2.0) / 2) < 1e-6);
    CHECK(std::abs(chsh - dense_grid_two_player(chsh_game(), 720)) < 1e-4);
    CHECK(optimal_score(constant_sign_game(2)).q == doctest::Approx(1.0));
}

TEST_CASE("self-test classification") {
    CHECK(classify_selftest(ghz_game()) == SelfTestClass::strong_self_test);
    CHECK(classify_selftest(chsh_game()) == SelfTestClass::strong_self_test);
    CHECK(classify_selftest(constant_sign_game(2)) == SelfTestClass::not_self_test);
}

TEST_CASE("classical optimum by strategy enumeration") {
    CHECK(classical_optimum(ghz_game()) == doctest::Approx(0.75));
    CHECK(classical_optimum(chsh_game()) == doctest::Approx(0.75));
    CHECK(classical_optimum(constant_sign_game(3)) == doctest::Approx(1.0));
}

TEST_CASE("scoring operator") {
    XorGame ghz = ghz_game();
    CMatrix M = scoring_operator(ghz, {I, I, I});
    CHECK(std::abs(std::abs(M(0, 7)) - 1) < 1e-12);
    CHECK(operator_norm(M) == doctest::Approx(1.0));

    CMatrix ones = scoring_operator(chsh_game(), {1, 1});
    const cplx p = eval_pg(chsh_game(), {1, 1});
    for (int i = 0; i < 4; ++i) CHECK(std::abs(ones(i, 3 - i) - p) < 1e-12);

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, kPi);
    std::vector<cplx> z{std::polar(1.0, u(rng)), std::polar(1.0, u(rng)), std::polar(1.0, u(rng))};
    CMatrix R = scoring_operator(ghz, z);
    auto e = eig_hermitian(R);
    for (int i = 0; i < 4; ++i) CHECK(e.values(i) == doctest::Approx(-e.values(7 - i)).epsilon(1e-9));
}

TEST_CASE("game JSON round trip and validation") {
    XorGame g = ghz_game();
    XorGame back = game_from_json_text(game_to_json_text(g));
    REQUIRE(back.support.size() == g.support.size());
    for (std::size_t i = 0; i < g.support.size(); ++i) {
        CHECK(back.support[i].input == g.support[i].input);
        CHECK(back.support[i].sign == g.support[i].sign);
        CHECK(back.support[i].prob == doctest::Approx(g.support[i].prob));
    }
    CHECK_THROWS(XorGame::make(2, {{0, 0.5, 1}, {1, 0.4, -1}}));
    CHECK_THROWS(XorGame::make(2, {{0, 0.5, 1}, {0, 0.5, -1}}));
}

TEST_CASE("GHZ trust coefficient check") {
    CMatrix N = ghz_reference_anticommuter();
    CHECK(anticommuter_defect(N, 3).empty());
    TrustSampleSpec spec;
    spec.grid_per_axis = 32;
    spec.random_samples = 2000;
    spec.multistarts = 8;
    auto pass = trust_coefficient_check(ghz_game(), 0.14, N, 1.0, spec);
    CHECK(pass.pass);
    CHECK(pass.max_violation <= 1e-9);
    CHECK(trust_coefficient_check(ghz_game(), 0.0, N, 1.0, spec).pass);
    auto fail = trust_coefficient_check(ghz_game(), 0.5, N, 1.0, spec);
    CHECK_FALSE(fail.pass);
    REQUIRE(fail.witness.size() == 3);
    // The witness reproduces the violation.
    const double norm = operator_norm(scoring_operator(ghz_game(), fail.witness) - 0.5 * N);
    CHECK(norm > 1.0 - 0.5 + 1e-6);
}

TEST_CASE("trust coefficient search for CHSH is positive") {
    XorGame chsh = chsh_game();
    const double q = optimal_score(chsh).q;
    TrustSampleSpec verify{24, 1000, 4, 3, 0};
    TrustSampleSpec search{12, 200, 2, 5, 0};
    auto res = trust_coefficient_search(chsh, q, verify, search);
    CHECK(res.v_lower > 0);
    CHECK(res.v_lower <= q);
}
