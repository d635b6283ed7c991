#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "diqr/matrixcore.hpp"

namespace diqr {

// Inputs and outputs are n-bit strings packed with component 1 as the most
// significant bit. Output bit 0 corresponds to the +1 eigenvalue.
struct RoundIO {
    unsigned input;
    unsigned output;
};

struct HonestBehavior {
    CVector state;
    std::vector<std::array<CMatrix, 2>> observables;  // [component][input bit]
    // outcome_probs[input][output], filled by make().
    std::vector<std::vector<double>> outcome_probs;

    static HonestBehavior make(CVector state, std::vector<std::array<CMatrix, 2>> observables);
    int n() const { return static_cast<int>(observables.size()); }
};

enum class NoiseKind { uniform_output, fixed_strategy };

struct NoisyHonestBehavior {
    HonestBehavior base;
    double p;
    NoiseKind kind = NoiseKind::uniform_output;
    // strategy[k][x] is component k's output on input bit x.
    std::vector<std::array<int, 2>> strategy;
};

// Single-component device on Q = C^2 ⊗ C^a entangled with an environment E.
// Input 0 measures T0 = X ⊗ I. Input 1 measures T1 = Z ⊗ I with probability v,
// the reflection N with probability 1 - v - h, and flips a fair coin otherwise.
struct PartiallyTrustedBehavior {
    double v;
    double h;
    int aux_dim;
    int env_dim;
    CVector state;  // on Q ⊗ E
    CMatrix dishonest;
    // Optional unitary on Q applied before round i (cycled).
    std::vector<CMatrix> round_unitaries;

    int q_dim() const { return 2 * aux_dim; }
    void validate() const;
};

struct AdversarialBehavior {
    int n;
    std::function<unsigned(const std::vector<RoundIO>&, unsigned)> program;
    // Used when program is empty: table[round][input], last row repeats.
    std::vector<std::vector<unsigned>> table;
};

using DeviceBehavior = std::variant<HonestBehavior, NoisyHonestBehavior, PartiallyTrustedBehavior, AdversarialBehavior>;

struct DeviceState {
    CMatrix rho;  // joint Q ⊗ E register (partially trusted devices only)
    std::vector<RoundIO> history;
};

int components(const DeviceBehavior& b);
DeviceState initial_state(const DeviceBehavior& b);

DeviceBehavior ghz_honest_device();
// Fixed deterministic strategy; every component outputs 1, winning GHZ with probability 3/4.
std::vector<std::array<int, 2>> ghz_classical_strategy();

// Samples an output and advances the state. Only rng is consumed, so replay is exact.
unsigned respond(DeviceState& state, const DeviceBehavior& behavior, unsigned input, std::mt19937_64& rng);

enum class TrustBranch { trusted, dishonest, coin, generation };
struct PartialResponse {
    int output;
    TrustBranch branch;
};
PartialResponse partially_trusted_respond(DeviceState& state, const PartiallyTrustedBehavior& b, int input,
                                          std::mt19937_64& rng);

// Output distribution on the next round given the state, and conditioning on
// an observed (input, output).
std::vector<double> output_distribution(const DeviceState& state, const DeviceBehavior& behavior, unsigned input);
void condition(DeviceState& state, const DeviceBehavior& behavior, unsigned input, unsigned output);

// Kraus-style branches of the input-1 instrument on Q ⊗ E for round `round`:
// returns the post-measurement (unnormalized) joint operator for output o.
CMatrix partially_trusted_branch(const PartiallyTrustedBehavior& b, const CMatrix& rho, std::size_t round, int input,
                                 int output);
// Joint operator after measuring the trusted T1 alone.
CMatrix trusted_t1_branch(const PartiallyTrustedBehavior& b, const CMatrix& rho, std::size_t round, int output);

PartiallyTrustedBehavior random_partially_trusted(std::mt19937_64& rng, double v, double h, int aux_dim, int env_dim,
                                                  int rounds_with_unitaries = 0);

// Minimum eigenvalues of the four differences
//   rho_P - (h/2 rho + v rho_0), (1 - h/2) rho - v rho_1 - rho_P,
//   rho_F - (h/2 rho + v rho_1), (1 - h/2) rho - v rho_0 - rho_F
// on the environment for the first round.
std::array<double, 4> entanglement_bound_gaps(const PartiallyTrustedBehavior& b);

// Maximum over histories of length T of the history-conditioned average L1
// distance between per-round input-output distributions. input_probs has
// 2^n entries.
double deviation(const DeviceBehavior& candidate, const DeviceBehavior& ideal, const std::vector<double>& input_probs,
                 int horizon);

}  // namespace diqr
