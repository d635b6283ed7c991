#include <doctest.h>

#include <bit>
#include <cmath>

#include "diqr/protocols.hpp"

using namespace diqr;

namespace {

Seed256 test_seed(std::uint64_t k) { return {k, 2, 3, 4}; }

PartiallyTrustedBehavior bell_device(double v, double h) {
    PartiallyTrustedBehavior b;
    b.v = v;
    b.h = h;
    b.aux_dim = 1;
    b.env_dim = 2;
    b.state = CVector::Zero(4);
    b.state(0) = b.state(3) = 1 / std::sqrt(2.0);
    b.dishonest = pauli_x();
    return b;
}

PartiallyTrustedBehavior product_device(CVector q) {
    PartiallyTrustedBehavior b;
    b.v = 1;
    b.h = 0;
    b.aux_dim = 1;
    b.env_dim = 1;
    b.state = q;
    b.dishonest = pauli_z();
    return b;
}

// Loses every GHZ round: output parity is always the wrong one.
DeviceBehavior ghz_loser() {
    const XorGame g = ghz_game();
    AdversarialBehavior a{3, [g](const std::vector<RoundIO>&, unsigned x) {
                              const XorEntry* e = g.find(x);
                              return (e && e->sign > 0) ? 1u : 0u;
                          },
                          {}};
    return a;
}

}  // namespace

TEST_CASE("biased_bit_sampler consumption") {
    EngineBitSource half(substream(test_seed(1), "s"));
    auto a = biased_bit_sampler(0.5, half, 10000);
    CHECK(a.consumed == 10000);

    const double q = 1.0 / 256;
    EngineBitSource src(substream(test_seed(2), "s"));
    auto b = biased_bit_sampler(q, src, 100000);
    const double hq = -q * std::log2(q) - (1 - q) * std::log2(1 - q);
    CHECK(std::abs(b.consumed - 1e5 * hq) <= 0.1 * 1e5 * hq);
    std::size_t ones = 0;
    for (auto x : b.bits) ones += x;
    CHECK(std::abs(static_cast<double>(ones) - 1e5 * q) < 3 * std::sqrt(1e5 * q));

    EngineBitSource again(substream(test_seed(2), "s"));
    CHECK(biased_bit_sampler(q, again, 100000).bits == b.bits);
}

TEST_CASE("sampler is exact on dyadic probabilities") {
    // Every 6-bit seed string is equally likely; counts must match exactly.
    std::size_t ones = 0;
    std::array<std::size_t, 3> cat{};
    for (unsigned s = 0; s < 64; ++s) {
        std::vector<std::uint8_t> bits(6);
        for (int k = 0; k < 6; ++k) bits[k] = (s >> k) & 1;
        BufferBitSource b1(bits), b2(bits);
        IntervalSampler s1(b1), s2(b2);
        ones += s1.bernoulli(3.0 / 8);
        ++cat[s2.categorical({0, 0.25, 0.75, 1})];
    }
    CHECK(ones == 24);
    CHECK(cat == std::array<std::size_t, 3>{16, 32, 16});
}

TEST_CASE("finite seeds run out") {
    BufferBitSource b(std::vector<std::uint8_t>(10, 1));
    CHECK_THROWS_AS(biased_bit_sampler(0.5, b, 11), SeedExhausted);
}

TEST_CASE("protocol R with the honest GHZ device") {
    auto cfg = ProtocolConfig::protocol_r(ghz_game(), 10000, 0.05, 0.01);
    cfg.wG = 1.0;
    CHECK(cfg.abort_threshold() == 5.0);
    EngineBitSource seed(substream(test_seed(3), "protocol-seed"));
    std::mt19937_64 dev(7);
    auto out = run_protocol_r(cfg, ghz_honest_device(), seed, dev);
    CHECK(out.success);
    CHECK(out.transcript.failures == 0);
    auto c = out.transcript.symbol_counts();
    CHECK(c['F'] == 0);
    CHECK(c['P'] == out.transcript.game_rounds);
    CHECK(c['H'] + c['T'] == 10000 - out.transcript.game_rounds);
    std::size_t g1 = 0;
    for (const auto& r : out.transcript.rounds) {
        g1 += r.g;
        CHECK((r.g == 1) == (r.symbol == Symbol::P || r.symbol == Symbol::F));
        if (r.g == 0) CHECK(r.input == 0u);
    }
    CHECK(g1 == out.transcript.game_rounds);
    const auto& t = out.transcript;
    CHECK(t.seed_bits_used == t.g_bits_used + t.input_bits_used);
    CHECK(t.seed_bits_used == seed.consumed());
    CHECK(t.encoded().size() == 20000);
}

TEST_CASE("protocol R abort logic") {
    // eta >= w_G makes the threshold at least qN.
    auto lax = ProtocolConfig::protocol_r(ghz_game(), 2000, 0.1, 0.45);
    lax.wG = 0.5 + 1e-9 + 0.45;
    auto loser = ghz_loser();
    EngineBitSource s1(substream(test_seed(4), "p"));
    std::mt19937_64 d1(1);
    auto lax_run = run_protocol_r(lax, loser, s1, d1);
    CHECK(lax_run.transcript.failures == lax_run.transcript.game_rounds);

    auto strict = ProtocolConfig::protocol_r(ghz_game(), 2000, 0.1, 0.01);
    strict.wG = 1.0;
    EngineBitSource s2(substream(test_seed(4), "p"));
    std::mt19937_64 d2(1);
    auto r = run_protocol_r(strict, loser, s2, d2);
    CHECK_FALSE(r.success);
    CHECK(r.transcript.failures > r.threshold);

    // Replay: the same seed stream and device rng reproduce the transcript.
    EngineBitSource s3(substream(test_seed(4), "p"));
    std::mt19937_64 d3(1);
    auto r2 = run_protocol_r(strict, loser, s3, d3);
    CHECK(r2.transcript.encoded() == r.transcript.encoded());
    CHECK(r2.success == r.success);

    CHECK_THROWS_AS(ProtocolConfig::protocol_r(ghz_game(), 10, 0.05, 0.6).validate(), std::invalid_argument);
}

TEST_CASE("protocol A prime") {
    auto empty = ProtocolConfig::protocol_a_prime(1, 0, 0, 0.1, 0.01);
    EngineBitSource s0(substream(test_seed(5), "p"));
    std::mt19937_64 d0(1);
    CVector plus = CVector::Constant(2, 1 / std::sqrt(2.0));
    auto e = run_protocol_a_prime(empty, product_device(plus), s0, d0);
    CHECK(e.success);
    CHECK(e.transcript.rounds.empty());

    // |0> is the +1 eigenvector of the trusted T1, so game rounds never fail
    // until a generation round collapses it.
    CVector zero = CVector::Zero(2);
    zero(0) = 1;
    auto cfg = ProtocolConfig::protocol_a_prime(1, 0, 5000, 0.1, 0.05);
    EngineBitSource s1(substream(test_seed(6), "p"));
    std::mt19937_64 d1(2);
    auto run = run_protocol_a_prime(cfg, product_device(zero), s1, d1);
    const auto& rounds = run.transcript.rounds;
    for (const auto& r : rounds) {
        if (r.g == 0) break;
        CHECK(r.symbol == Symbol::P);
    }
    auto c = run.transcript.symbol_counts();
    CHECK(c['P'] + c['F'] == run.transcript.game_rounds);

    // Mismatched device parameters are rejected.
    auto other = ProtocolConfig::protocol_a_prime(0.5, 0.25, 10, 0.1, 0.05);
    CHECK_THROWS_AS(run_protocol_a_prime(other, product_device(zero), s1, d1), std::invalid_argument);
}

TEST_CASE("monte_carlo statistics") {
    auto cfg = ProtocolConfig::protocol_r(ghz_game(), 10000, 0.05, 0.02);
    cfg.wG = 1.0;
    auto honest = monte_carlo(cfg, ghz_honest_device(), 20, test_seed(7), 0.01);
    CHECK(honest.aborts == 0);
    CHECK_FALSE(honest.flagged);
    CHECK(honest.records.size() == 20);

    // eta' = eta / 2 at qN = 500.
    auto base = std::get<HonestBehavior>(ghz_honest_device());
    DeviceBehavior noisy = NoisyHonestBehavior{base, 0.02, NoiseKind::uniform_output, {}};
    auto st = monte_carlo(cfg, noisy, 60, test_seed(8), 0.01);
    REQUIRE(st.completeness_bound.has_value());
    CHECK(*st.completeness_bound == doctest::Approx(std::exp(-0.01 * 0.01 * 500 / 3)));
    const double sigma = std::sqrt(*st.completeness_bound * (1 - *st.completeness_bound) / 60);
    CHECK(st.abort_rate <= *st.completeness_bound + 3 * sigma);
    CHECK_FALSE(st.flagged);

    auto lose = monte_carlo(cfg, ghz_loser(), 10, test_seed(9));
    CHECK(lose.abort_rate == 1.0);

    auto w1 = monte_carlo(cfg, noisy, 6, test_seed(10), std::nullopt, 1);
    auto w2 = monte_carlo(cfg, noisy, 6, test_seed(10), std::nullopt, 2);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(w1.records[i].failures == w2.records[i].failures);
        CHECK(w1.records[i].seed_bits_used == w2.records[i].seed_bits_used);
    }
}

TEST_CASE("wilson_interval") {
    auto w = wilson_interval(0, 100);
    CHECK(w.lo == 0.0);
    CHECK(w.hi > 0.0);
    auto m = wilson_interval(50, 100, 1.96);
    CHECK(m.lo == doctest::Approx(0.4038).epsilon(1e-3));
    CHECK(m.hi == doctest::Approx(0.5962).epsilon(1e-3));
}

TEST_CASE("exact_small_run against the one-shot computation") {
    // A maximally entangled environment makes Gamma_E proportional to I, so
    // the two normalizations differ only by log d on both sides.
    DivergenceParams p{0.6, 0.1, 0.1, 1.0, 0.5};
    auto dev = bell_device(p.v, p.h);
    auto exact = exact_small_run(1, dev, p);
    auto one = one_shot_check(dev, p);
    CHECK(exact.lhs - exact.rhs == doctest::Approx(one.lhs - one.rhs).epsilon(1e-9));
    CHECK(exact.holds);
    CHECK(one.holds);
    CHECK(exact.delta == doctest::Approx(delta_rate(RateParams{p.v, p.h, 0, p.q, p.kappa, p.r})));

    auto trusted = bell_device(1.0, 0.0);
    DivergenceParams tp{1.0, 0.0, 0.2, 1.0, 0.5};
    auto two = exact_small_run(2, trusted, tp);
    CHECK(two.holds);
    CHECK(two.rhs - two.lhs > 0);
    CHECK(two.gamma.blocks.size() == 16);
    CHECK(two.gamma.trace() == doctest::Approx(1.0));
}
