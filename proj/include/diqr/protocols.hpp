#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diqr/devices.hpp"
#include "diqr/entropy.hpp"
#include "diqr/rates.hpp"
#include "diqr/rng.hpp"
#include "diqr/xorgames.hpp"

namespace diqr {

// Lazy arithmetic decoder turning a uniform bit stream into biased symbols.
// The output interval [lo, hi) and the known input interval [c, c + w) live
// in 62-bit fixed point; bits are read only while the input interval
// straddles a split point, so consumption tracks the information content.
class IntervalSampler {
public:
    explicit IntervalSampler(BitSource& source) : src_(source) {}
    // Returns 1 with probability q (quantized to 2^-64).
    int bernoulli(double q);
    // cdf has k+1 entries 0 = cdf[0] <= ... <= cdf[k] = 1.
    std::size_t categorical(const std::vector<double>& cdf);
    std::size_t consumed() const { return src_.consumed(); }

private:
    std::size_t decide(const std::vector<std::uint64_t>& bounds);
    void zoom();

    BitSource& src_;
    std::uint64_t lo_ = 0, hi_ = kOne, c_ = 0, w_ = kOne;
    static constexpr std::uint64_t kOne = 1ULL << 62;
};

struct SampledBits {
    std::vector<std::uint8_t> bits;
    std::size_t consumed;
};

SampledBits biased_bit_sampler(double q, BitSource& source, std::size_t N);

enum class ProtocolMode { R, A, A_prime };
enum class Symbol : std::uint8_t { H = 0, T = 1, P = 2, F = 3 };
char to_char(Symbol s);

struct ProtocolConfig {
    ProtocolMode mode = ProtocolMode::R;
    std::size_t N = 0;
    double q = 0.05;
    double eta = 0.01;
    XorGame game;     // mode R
    double wG = 1.0;  // mode R
    double v = 1.0;   // modes A, A'
    double h = 0.0;

    static ProtocolConfig protocol_r(const XorGame& game, std::size_t N, double q, double eta);
    static ProtocolConfig protocol_a_prime(double v, double h, std::size_t N, double q, double eta);
    void validate() const;
    // Failures above this count abort the run.
    double abort_threshold() const;
};

struct RoundRecord {
    std::uint8_t g;
    unsigned input;
    unsigned output;
    Symbol symbol;
};

struct Transcript {
    std::vector<RoundRecord> rounds;
    std::size_t failures = 0;
    std::size_t game_rounds = 0;
    std::size_t seed_bits_used = 0;
    std::size_t g_bits_used = 0;
    std::size_t input_bits_used = 0;

    std::map<char, std::size_t> symbol_counts() const;
    // Two bits per symbol: H=00, T=01, P=10, F=11.
    std::vector<std::uint8_t> encoded() const;
};

struct RunOutcome {
    bool success;
    double threshold;
    Transcript transcript;
};

// seed feeds g-bits and game inputs; device_rng drives the device's Born-rule sampling.
RunOutcome run_protocol_r(const ProtocolConfig& config, const DeviceBehavior& device, BitSource& seed,
                          std::mt19937_64& device_rng);
RunOutcome run_protocol_a_prime(const ProtocolConfig& config, const PartiallyTrustedBehavior& device, BitSource& seed,
                                std::mt19937_64& device_rng);
RunOutcome run_protocol(const ProtocolConfig& config, const DeviceBehavior& device, BitSource& seed,
                        std::mt19937_64& device_rng);

// Estimated seed demand for N rounds: N h(q) plus qN times the input entropy, with slack.
std::size_t seed_demand_estimate(const ProtocolConfig& config);

struct WilsonInterval {
    double lo;
    double hi;
};
WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z = 3.0);

struct TrialRecord {
    std::size_t trial;
    bool success;
    std::size_t failures;
    std::size_t game_rounds;
    std::size_t seed_bits_used;
};

struct MonteCarloStats {
    std::size_t trials = 0;
    std::size_t aborts = 0;
    double abort_rate = 0;
    WilsonInterval interval{0, 0};
    std::map<std::size_t, std::size_t> failure_histogram;
    std::vector<TrialRecord> records;
    // Completeness bound exp(-(eta - eta')^2 qN / 3), when eta' is known.
    std::optional<double> completeness_bound;
    bool flagged = false;
};

MonteCarloStats monte_carlo(const ProtocolConfig& config, const DeviceBehavior& device, std::size_t trials,
                            const Seed256& master, std::optional<double> eta_prime = std::nullopt, int workers = 0);

struct DivergenceParams {
    double v, h, q, kappa, r;
    double gamma() const { return r * q * kappa; }
};

struct ExactRunResult {
    CqState gamma;  // blocks labelled by g-bits then o-bits
    // Sigma block x is 2^{sigma_log2_weights[x]} gamma_e.
    std::vector<double> sigma_log2_weights;
    CMatrix gamma_e;
    double lhs;
    double rhs;
    double delta;
    bool holds;
};

ExactRunResult exact_small_run(int N, const PartiallyTrustedBehavior& device, const DivergenceParams& params);

struct OneShotResult {
    double lhs;  // D(rho_bar || sigma_bar)
    double rhs;  // D(rho || I) - Delta
    bool holds;
};
// Single round with sigma = I and sigma_bar = (1-q) I + (1-q) I + q I + q 2^{kappa/gamma} I.
OneShotResult one_shot_check(const PartiallyTrustedBehavior& device, const DivergenceParams& params);

}  // namespace diqr
