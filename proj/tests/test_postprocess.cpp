#include <doctest.h>

#include <bit>
#include <cmath>
#include <map>
#include <random>

#include "diqr/postprocess.hpp"

using namespace diqr;

namespace {

// Toeplitz product with an explicitly built matrix T[i][j] = seed[i - j + N - 1].
Bits toeplitz_oracle(const Bits& x, const Bits& seed, std::size_t m) {
    const std::size_t N = x.size();
    Bits out(m, 0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < N; ++j) out[i] ^= seed[i + N - 1 - j] & x[j];
    return out;
}

Bits to_bits(std::uint64_t v, int len) {
    Bits b(len);
    for (int k = 0; k < len; ++k) b[k] = (v >> k) & 1;
    return b;
}

}  // namespace

TEST_CASE("toeplitz_extract matches the explicit matrix and is linear") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t N = 1 + trial % 40, m = 1 + trial % 9;
        Bits x = random_bits(rng, N), y = random_bits(rng, N), s = random_bits(rng, N + m - 1);
        CHECK(toeplitz_extract(x, s, m) == toeplitz_oracle(x, s, m));
        Bits xy(N);
        for (std::size_t j = 0; j < N; ++j) xy[j] = x[j] ^ y[j];
        Bits ex = toeplitz_extract(x, s, m), ey = toeplitz_extract(y, s, m), exy = toeplitz_extract(xy, s, m);
        for (std::size_t i = 0; i < m; ++i) CHECK(exy[i] == (ex[i] ^ ey[i]));
        CHECK(toeplitz_extract(Bits(N, 0), s, m) == Bits(m, 0));
    }
    CHECK_THROWS(toeplitz_extract(Bits(5, 0), Bits(3, 0), 2));
}

TEST_CASE("toeplitz_average_distance") {
    // Brute force at N = 6, m = 2 on a flat source of 8 values.
    std::vector<std::uint32_t> support{1, 5, 9, 17, 33, 40, 50, 63};
    const int N = 6, m = 2;
    double total = 0;
    for (std::uint64_t s = 0; s < (1u << (N + m - 1)); ++s) {
        std::map<std::uint64_t, double> p;
        for (auto v : support) {
            Bits o = toeplitz_oracle(to_bits(v, N), to_bits(s, N + m - 1), m);
            std::uint64_t key = 0;
            for (int i = 0; i < m; ++i) key |= std::uint64_t(o[i]) << i;
            p[key] += 1.0 / support.size();
        }
        double d = 0;
        for (std::uint64_t k = 0; k < (1u << m); ++k) d += std::abs(p[k] - 1.0 / (1 << m));
        total += d / 2;
    }
    CHECK(toeplitz_average_distance(N, m, support) == doctest::Approx(total / (1u << (N + m - 1))));

    std::mt19937_64 rng(2);
    std::vector<std::uint32_t> big;
    std::vector<std::uint32_t> all(4096);
    for (std::uint32_t i = 0; i < 4096; ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng);
    big.assign(all.begin(), all.begin() + 256);  // min-entropy 8
    CHECK(toeplitz_average_distance(12, 4, big) <= 0.25);
}

TEST_CASE("ExtractorSpec budget") {
    ExtractorSpec ok{100, 40, 60, std::exp2(-10)};
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.seed_len() == 139);
    ExtractorSpec bad{100, 41, 60, std::exp2(-10)};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("Dyadic arithmetic") {
    CHECK(Dyadic::from_double(0.75).to_string() == "3*2^-2");
    CHECK(Dyadic::from_double(0.0).to_double() == 0.0);
    const double a = 1e-30, b = std::exp(-20.0);
    Dyadic s = Dyadic::from_double(a) + Dyadic::from_double(b);
    CHECK(s.to_double() == doctest::Approx(a + b));
    CHECK(Dyadic::from_double(0.5) + Dyadic::from_double(0.25) == Dyadic::from_double(0.75));

    ErrorLedger led;
    led.add(0, 0, 1e-3, 1e-4);
    led.add(1, 1, 1e-9, 0.0);
    led.add(2, 0, 2.5e-7, 3e-12);
    CHECK(led.consistent());
    CHECK(led.total_soundness.to_double() == doctest::Approx(1e-3 + 1e-9 + 2.5e-7));
    led.entries.pop_back();
    CHECK_FALSE(led.consistent());
}

TEST_CASE("wiring_ok") {
    CHECK(wiring_ok({{0, 0, -1}, {1, 1, 0}, {2, 0, 1}}));
    CHECK_FALSE(wiring_ok({{0, 0, -1}, {1, 0, 0}}));         // device 0 eats its own output
    CHECK_FALSE(wiring_ok({{0, 0, -1}, {1, 1, 0}, {2, 0, 0}}));  // skips a stage
}

TEST_CASE("expansion_schedule") {
    auto p = expansion_schedule(16, 0.5, 1e5);
    REQUIRE(!p.stages.empty());
    CHECK(p.stages[0].log2_seed == doctest::Approx(4.0));
    CHECK(p.stages[0].log2_N == doctest::Approx(4.0));
    CHECK(p.stages[0].log2_q == doctest::Approx(-2.0));
    CHECK(p.stages[0].desk_N == doctest::Approx(16.0));
    CHECK(p.stalled);

    auto tower = expansion_schedule(16, 0.4, 1e5, 65536);
    CHECK(tower.reached);
    CHECK(tower.stages.size() == 4);
    double k = 16;
    for (const auto& st : tower.stages) {
        CHECK(st.log2_seed == doctest::Approx(std::log2(k)));
        CHECK(st.log2_N == doctest::Approx(std::pow(k, 0.6)));
        CHECK(st.log2_q == doctest::Approx(0.4 * std::log2(k) - std::pow(k, 0.6)));
        CHECK(st.desk_N <= 1e5);
        k = std::exp2(st.log2_N);
    }
    CHECK(tower.stages.back().capped);

    CHECK_THROWS_AS(expansion_schedule(16, 1.0, 1e5), std::invalid_argument);
    CHECK_THROWS_AS(expansion_schedule(16, 0.0, 1e5), std::invalid_argument);
}

TEST_CASE("cross_feed with honest devices") {
    auto cfg = desk_cross_feed_config();
    Seed256 master{11, 12, 13, 14};
    std::mt19937_64 eng = substream(master, "initial-seed");
    auto init = random_bits(eng, 16);
    auto r = cross_feed(ghz_honest_device(), ghz_honest_device(), cfg, init, master);
    CHECK(r.success);
    CHECK(r.final_bits.size() == 4096);
    CHECK(wiring_ok(r.wiring));
    CHECK(r.ledger.consistent());
    CHECK(r.stages.size() == cfg.stages.size());
    for (const auto& s : r.stages) CHECK(s.seed_bits_used <= s.seed_bits_available);
    // Stage 0 has the smallest N, so no later stage can exceed its soundness error.
    for (const auto& e : r.ledger.entries)
        CHECK(r.ledger.entries.front().soundness.to_double() >= e.soundness.to_double());

    auto again = cross_feed(ghz_honest_device(), ghz_honest_device(), cfg, init, master);
    CHECK(again.final_bits == r.final_bits);

    CrossFeedConfig one = cfg;
    one.stages.resize(1);
    auto single = cross_feed(ghz_honest_device(), ghz_honest_device(), one, init, master);
    CHECK(single.success);
    CHECK(single.final_bits.size() == one.stages[0].output_bits);
    CHECK(single.ledger.entries.size() == 1);
}

TEST_CASE("cross_feed aborts on a losing device") {
    auto cfg = desk_cross_feed_config();
    Seed256 master{21, 22, 23, 24};
    const XorGame g = ghz_game();
    AdversarialBehavior lose{3, [g](const std::vector<RoundIO>&, unsigned x) {
                                 const XorEntry* e = g.find(x);
                                 return (e && e->sign > 0) ? 1u : 0u;
                             },
                             {}};
    std::mt19937_64 eng = substream(master, "initial-seed");
    auto r = cross_feed(lose, ghz_honest_device(), cfg, random_bits(eng, 16), master);
    CHECK_FALSE(r.success);
    REQUIRE(r.aborted_stage.has_value());
    // Stage 0 plays almost no games; the losing device A is caught on its next stage.
    CHECK(*r.aborted_stage % 2 == 0);
    CHECK(r.stages.back().device == 0);
    CHECK(r.final_bits.empty());
}
