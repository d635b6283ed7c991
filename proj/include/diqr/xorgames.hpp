#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diqr/matrixcore.hpp"

namespace diqr {

// Input bits are packed with player 1 as the most significant bit, so the
// bitstring "011" is input 0b011.
struct XorEntry {
    unsigned input;
    double prob;
    int sign;
};

struct XorGame {
    int n = 0;
    std::vector<XorEntry> support;

    // Validates player count, probabilities and uniqueness of inputs.
    static XorGame make(int n, std::vector<XorEntry> support);
    int bit(unsigned input, int player) const { return (input >> (n - 1 - player)) & 1u; }
    // Probability/sign lookup; absent inputs have probability 0.
    const XorEntry* find(unsigned input) const;
};

XorGame ghz_game();
XorGame chsh_game();
// Every input equally likely and every sign +1.
XorGame constant_sign_game(int n);
// Flips signs by relabelling inputs: eta'(i) = eta(i xor b).
XorGame relabel_signs(const XorGame& game, unsigned b);

// Game file: {"n": 3, "support": [{"input": "011", "p": 0.25, "eta": -1}, ...]}
XorGame load_game(const std::string& path);
XorGame game_from_json_text(const std::string& text);
std::string game_to_json_text(const XorGame& game);

cplx eval_pg(const XorGame& game, const std::vector<cplx>& zetas);
// thetas = (theta_0, ..., theta_n).
double eval_zg(const XorGame& game, const RVector& thetas);
RVector zg_gradient(const XorGame& game, const RVector& thetas);
RMatrix zg_hessian(const XorGame& game, const RVector& thetas);

// Damped Newton ascent on Z_G until the gradient norm is below gtol.
RVector refine_maximum(const XorGame& game, RVector thetas, double gtol = 1e-9, int max_iter = 500);

struct ScoreResult {
    double q;
    RVector maximizer;
};

ScoreResult optimal_score(const XorGame& game, int workers = 0);

enum class SelfTestClass { not_self_test, self_test, strong_self_test, inconclusive };
std::string to_string(SelfTestClass c);

struct Classification {
    SelfTestClass cls;
    std::vector<RVector> maxima;  // deduplicated modulo 2*pi
    double min_hessian_eig;       // smallest |eigenvalue| over all maxima
    bool condition_a;
    bool condition_b;
};

Classification classify_selftest(const XorGame& game, double q, std::uint64_t seed = 1, int starts = 64);
inline SelfTestClass classify_selftest(const XorGame& game) {
    return classify_selftest(game, optimal_score(game).q).cls;
}

// Winning probability of the best deterministic classical strategy.
double classical_optimum(const XorGame& game);

// Lexicographically smallest b whose relabelled game has a maximum with every
// theta_k in (0, pi) for k >= 1; returns -1 if none exists.
int positive_alignment(const XorGame& game, const std::vector<RVector>& maxima);

// Entry a_b for sign pattern b (player 1 = most significant bit).
cplx scoring_entry(const XorGame& game, const std::vector<cplx>& zetas, unsigned b);
CMatrix scoring_operator(const XorGame& game, const std::vector<cplx>& zetas);

// Reverse-diagonal anticommuter built from the free phases beta_k, k < 2^{n-2}.
// Row k < h holds beta_k with beta_{h-1-k} = -conj(beta_k); rows k >= h are the
// Hermitian mirror.
CMatrix reverse_diagonal_anticommuter(int n, const std::vector<cplx>& free_phases);
// The reverse-diagonal +-1 operator with signs (+,+,-,-,-,-,+,+) from the top row.
CMatrix ghz_reference_anticommuter();
// Returns an empty string when valid, otherwise the failed condition.
std::string anticommuter_defect(const CMatrix& N, int n);

struct TrustSampleSpec {
    int grid_per_axis = 64;
    int random_samples = 10000;
    int multistarts = 20;
    std::uint64_t seed = 0x7a5c0ffeeULL;
    int workers = 0;
};

struct TrustCheckResult {
    bool pass;
    double max_violation;
    std::vector<cplx> witness;
    long samples;
    // Per-sample entrywise triangle checks; only run for the GHZ game with
    // the reference anticommuter.
    bool analytic_checked = false;
    long analytic_failures = 0;
};

TrustCheckResult trust_coefficient_check(const XorGame& game, double c, const CMatrix& N, double q,
                                         const TrustSampleSpec& spec = {});

struct TrustSearchResult {
    double v_lower;
    CMatrix anticommuter;
    std::vector<cplx> free_phases;
    long candidates;
    TrustCheckResult verification;
};

// Anticommuter family: every choice of free phases from the eighth roots of
// unity (this includes all +-1 sign patterns).
TrustSearchResult trust_coefficient_search(const XorGame& game, double q, const TrustSampleSpec& verify_spec = {},
                                           const TrustSampleSpec& search_spec = {16, 500, 4, 11, 0});

struct GameConstants {
    std::string name;
    double qG;
    double wG;
    double fG;
    RVector maximizer;
    SelfTestClass classification;
    double vG_lower;
    std::string vG_source;
};

// Built-in GHZ constants with the analytic trust coefficient 0.14.
GameConstants ghz_constants();
// Full numerical analysis: score, classification and sampled trust search.
GameConstants analyze_game(const XorGame& game, const std::string& name, int workers = 0);

}  // namespace diqr
