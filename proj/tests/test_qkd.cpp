#include <doctest.h>

#include <bit>
#include <cmath>

#include "diqr/qkd.hpp"

using namespace diqr;

namespace {

const Seed256 kMaster{31, 32, 33, 34};

}  // namespace

TEST_CASE("KdConfig") {
    auto c = KdConfig::ghz(10000, 0.05, 0.001);
    CHECK(c.abort_threshold() == doctest::Approx(0.5));
    CHECK(c.eir_epsilon() == doctest::Approx(std::exp(-500.0)));
    CHECK_NOTHROW(c.validate());
    c.lambda = 0.25;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("bob_implied_bit recovers Alice's bit on winning outputs") {
    XorGame g = ghz_game();
    const XorEntry* e = g.find(0);
    REQUIRE(e != nullptr);
    for (unsigned o = 0; o < 8; ++o) {
        const bool win = (std::popcount(o) % 2 == 0) == (e->sign > 0);
        if (win) CHECK(bob_implied_bit(g, o) == (o >> 2));
        else CHECK(bob_implied_bit(g, o) != (o >> 2));
    }
}

TEST_CASE("run_rkd with the honest device") {
    auto c = KdConfig::ghz(3000, 0.05, 0.001);
    auto out = run_rkd(c, ghz_honest_device(), kMaster, 0, false);
    CHECK(out.success);
    CHECK(out.keys_equal);
    CHECK(out.disagreements == 0);
    CHECK(out.failures == 0);
    CHECK(out.wins == out.game_rounds + out.generation_rounds);
    CHECK(out.game_rounds + out.generation_rounds == 3000);
    CHECK(out.alice_key == out.bob_key);
    CHECK(out.alice_key.size() == 3000);
    std::size_t p = 0;
    for (Symbol s : out.alice_key) p += s == Symbol::P;
    CHECK(p == out.game_rounds);
    CHECK(out.code_blocks == (out.generation_rounds + 14) / 15);
    CHECK(out.leaked_bits == 10 * out.code_blocks);
    REQUIRE(out.eir.has_value());
    CHECK(out.eir->randomness_used == 0);
    CHECK_FALSE(out.public_transcript.empty());

    auto again = run_rkd(c, ghz_honest_device(), kMaster, 0, false);
    CHECK(again.alice_key == out.alice_key);
    auto other = run_rkd(c, ghz_honest_device(), kMaster, 1, false);
    CHECK(other.alice_key != out.alice_key);
}

TEST_CASE("run_rkd with noise and with an adversary") {
    auto base = std::get<HonestBehavior>(ghz_honest_device());
    DeviceBehavior noisy = NoisyHonestBehavior{base, 0.01, NoiseKind::uniform_output, {}};
    auto c = KdConfig::ghz(3000, 0.05, 0.3);
    int equal = 0;
    for (std::uint64_t t = 0; t < 20; ++t) {
        auto o = run_rkd(c, noisy, kMaster, t, false);
        if (o.success) equal += o.keys_equal;
        else equal += 1;  // a clean abort also keeps the keys safe
    }
    CHECK(equal == 20);

    AdversarialBehavior ones{3, {}, {{7, 7, 7, 7, 7, 7, 7, 7}}};
    auto adv = run_rkd(c, DeviceBehavior{ones}, kMaster, 0, false);
    CHECK_FALSE(adv.success);
    CHECK(adv.abort_reason.rfind("eir", 0) == 0);
    REQUIRE(adv.eir.has_value());
    CHECK(adv.eir->promise_violated);
}

TEST_CASE("eta_bar") {
    // Closed form for f = C sqrt(theta): w_G 4 a^3 / (27 C^2), a = (w_G - 1/2 - lambda') / w_G.
    for (double lp : {0.26, 0.3, 0.4})
        for (double C : {0.5, 1.0}) {
            const double a = (1 - 0.5 - lp);
            CHECK(eta_bar_sqrt(lp, 1.0, C) == doctest::Approx(4 * a * a * a / (27 * C * C)).epsilon(1e-6));
        }
    const double wG = 0.85, lp = 0.28;
    const double a = (wG - 0.5 - lp) / wG;
    CHECK(eta_bar_sqrt(lp, wG) == doctest::Approx(wG * 4 * a * a * a / 27).epsilon(1e-6));
    // Brute-force grid for a linear-plus-square f.
    auto f = [](double t) { return 0.3 * t + t * t; };
    double best = 0;
    for (int i = 1; i < 1000000; ++i) {
        const double t = i / 1e6;
        best = std::max(best, t * (0.2 - f(t)));
    }
    CHECK(eta_bar(0.3, 1.0, f) == doctest::Approx(best).epsilon(1e-6));
}

TEST_CASE("agreement_bound_check") {
    auto c = KdConfig::ghz(2000, 0.05, 0.001);
    auto mc = rkd_monte_carlo(c, ghz_honest_device(), 10, kMaster, 1);
    CHECK(mc.records.size() == 10);
    const double eb = eta_bar_sqrt(c.lambda_prime, 1.0);
    auto r = agreement_bound_check(mc, c.N, c.q, c.lambda, c.lambda_prime, c.eta, eb);
    CHECK(r.bad_frequency == 0.0);
    CHECK_FALSE(r.flagged);
    CHECK(r.bound >= 0.0);
    CHECK_THROWS_AS(agreement_bound_check(mc, c.N, c.q, c.lambda, c.lambda_prime, eb, eb), std::invalid_argument);
}

TEST_CASE("key_rate_report") {
    auto c = KdConfig::ghz(10000, 0.05, 0.001);
    auto r = key_rate_report(c, 6340, 1234, 0);
    CHECK(r.feasible);
    CHECK(r.expansion_bits == doctest::Approx(r.rate * 10000));
    CHECK(r.certified_bits == doctest::Approx(std::max(0.0, r.rate * 10000 - 6340)));
    CHECK(r.leaked_bits == 6340);
    CHECK(r.residual_fraction == doctest::Approx(r.certified_bits / r.expansion_bits));
    CHECK(r.seed_bits == 1234);
    auto none = key_rate_report(c, 100000, 0, 0);
    CHECK(none.certified_bits == 0.0);
}

TEST_CASE("Azuma tails stay below their bounds") {
    std::vector<double> w(2000);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.8 + 0.2 * ((i * 7) % 11) / 10.0;
    auto g = azuma_game_tail(w, 0.1, 0.3, 2000, 1);
    CHECK(g.frequency <= g.bound + 3 * g.sigma);
    CHECK_FALSE(g.flagged);
    auto h = azuma_generation_tail(w, 0.1, 0.02, 2000, 2);
    CHECK(h.frequency <= h.bound + 3 * h.sigma);
    CHECK_FALSE(h.flagged);
}
