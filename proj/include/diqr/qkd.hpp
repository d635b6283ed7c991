#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "diqr/devices.hpp"
#include "diqr/protocols.hpp"
#include "diqr/recon.hpp"
#include "diqr/rng.hpp"
#include "diqr/xorgames.hpp"

namespace diqr {

struct KdConfig {
    XorGame game;
    GameConstants constants;
    std::size_t N = 10000;
    double q = 0.05;
    double eta = 0.001;
    double lambda = 0.26;
    double lambda_prime = 0.3;
    // Rate slack handed to tune_parameters for the certified-bit report.
    double delta = 0.1;

    static KdConfig ghz(std::size_t N, double q, double eta);
    double eir_epsilon() const { return std::exp(-q * static_cast<double>(N)); }
    double abort_threshold() const;
    void validate() const;
};

struct KeyRateReport {
    bool feasible = false;
    double rate = 0;            // pi(eta/v_G) - delta from tune_parameters
    double expansion_bits = 0;  // rate * N
    double finite_bound = 0;    // best finite-N certified_bound at eps = exp(-qN)
    std::size_t leaked_bits = 0;
    double certified_bits = 0;
    // Share of the expansion bound left after leakage, measured at this N; the
    // asymptotic supremum over code families is not claimed.
    double residual_fraction = 0;
    std::size_t seed_bits = 0;
    std::size_t eir_randomness = 0;
    std::string warning;
};

struct KdOutcome {
    bool success = false;
    std::string abort_reason;  // "threshold" or "eir: ..."
    std::vector<Symbol> alice_key;
    std::vector<Symbol> bob_key;
    std::size_t failures = 0;
    std::size_t game_rounds = 0;
    std::size_t generation_rounds = 0;
    std::size_t wins = 0;           // rounds whose outputs satisfy the game predicate
    std::size_t disagreements = 0;  // generation rounds before reconciliation
    bool keys_equal = false;
    std::size_t seed_bits_used = 0;
    std::optional<EirResult> eir;
    std::size_t code_blocks = 0;
    // Public channel: game-round outputs, then the syndrome (and hash) bits.
    std::vector<std::string> public_transcript;
    std::size_t leaked_bits = 0;
    KeyRateReport report;
};

// Alice holds player 1 (the most significant output bit), Bob the rest.
// Reconciliation uses the BCH(15,5) direct sum over the generation bits.
// with_report = false skips the rate tuning behind the key-rate report.
KdOutcome run_rkd(const KdConfig& config, const DeviceBehavior& device, const Seed256& master, std::uint64_t trial = 0,
                  bool with_report = true);

// Bob's bit on a generation round: the value of Alice's bit that makes the
// joint output win the game on input 0.
unsigned bob_implied_bit(const XorGame& game, unsigned output);

// sup over theta in (0,1) of w_G theta [(w_G - 1/2 - lambda')/w_G - f(theta)].
double eta_bar(double lambda_prime, double wG, const std::function<double(double)>& f);
inline double eta_bar_sqrt(double lambda_prime, double wG, double C = 1.0) {
    return eta_bar(lambda_prime, wG, [C](double t) { return C * std::sqrt(t); });
}

struct KdTrial {
    bool success;
    std::size_t wins;
    std::size_t disagreements;
    bool keys_equal;
};

struct KdMonteCarlo {
    std::size_t trials = 0;
    std::vector<KdTrial> records;
};

KdMonteCarlo rkd_monte_carlo(const KdConfig& config, const DeviceBehavior& device, std::size_t trials,
                             const Seed256& master, int workers = 0);

struct AgreementReport {
    double bad_frequency;
    double bound;
    double sigma;
    bool flagged;
};

// Bad event: no abort and total wins <= (1/2 + lambda) N.
AgreementReport agreement_bound_check(const KdMonteCarlo& stats, std::size_t N, double q, double lambda,
                                      double lambda_prime, double eta, double eta_bar_value);

KeyRateReport key_rate_report(const KdConfig& config, std::size_t leaked_bits, std::size_t seed_bits,
                              std::size_t eir_randomness);

struct TailReport {
    double frequency;
    double bound;
    double sigma;
    bool flagged;
};

// P[sum g_i (1 - W_i) - q sum (1 - w_i) >= eps q N] with independent g_i ~ Bern(q), W_i ~ Bern(w_i).
TailReport azuma_game_tail(const std::vector<double>& w, double q, double eps, std::size_t trials, std::uint64_t seed);
// P[sum (1 - g_i)(w_i - W_i) >= eps N].
TailReport azuma_generation_tail(const std::vector<double>& w, double q, double eps, std::size_t trials,
                                 std::uint64_t seed);

}  // namespace diqr
