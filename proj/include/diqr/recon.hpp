#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "diqr/rng.hpp"

namespace diqr {

using Bits = std::vector<std::uint8_t>;

// Binary code of length n <= 24 given by check rows (bit j of a row is
// coordinate j).
struct SmallCode {
    int n = 0;
    std::vector<std::uint32_t> checks;

    int r() const { return static_cast<int>(checks.size()); }
    std::uint32_t syndrome(std::uint32_t word) const;
    // Exhaustive over the code (2^{n - rank} words).
    int min_distance() const;
};

// Cyclic code from its generator polynomial (bit i = coefficient of x^i).
SmallCode cyclic_code(int n, std::uint32_t generator);
SmallCode bch_15_5();  // d = 7
SmallCode bch_15_7();  // d = 5
SmallCode hamming_7_4();  // d = 3
// Random r x n check matrix.
SmallCode random_check_code(std::mt19937_64& rng, int n, int r);

enum class Regime { unique, list };

struct DecodeFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ListOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Direct sum of copies of one small block; when n does not divide N the
// last copy is shortened (its trailing coordinates are fixed to zero).
class LinearCode {
public:
    // radius: per-block decoding radius (unique) or list radius (list).
    LinearCode(SmallCode block, std::size_t N, Regime regime, int radius, int list_cap = 0);

    static LinearCode load(const std::string& path, Regime regime, int radius, int list_cap = 0);

    std::size_t N() const { return N_; }
    std::size_t blocks() const { return blocks_; }
    const SmallCode& block() const { return block_; }
    std::size_t syndrome_len() const { return blocks_ * static_cast<std::size_t>(block_.r()); }
    Regime regime() const { return regime_; }
    int radius() const { return radius_; }
    int list_cap() const { return list_cap_; }
    double rate() const { return 1.0 - static_cast<double>(syndrome_len()) / static_cast<double>(N_); }
    std::vector<Bits> check_matrix() const;

    Bits syndrome(const Bits& word) const;
    // Unique regime: per block, the minimum-weight error of weight <= radius.
    Bits unique_decode(const Bits& syndrome) const;
    // List regime (single block): every coset member of weight <= radius.
    std::vector<Bits> list_decode(const Bits& syndrome, int radius) const;
    std::size_t max_list_size() const;

private:
    using Table = std::unordered_map<std::uint32_t, std::vector<std::uint32_t>>;
    Table build_table(int used) const;
    std::uint32_t block_syndrome(const Bits& s, std::size_t b) const;
    const Table& table_for(std::size_t b) const { return (b + 1 == blocks_ && last_used_ != block_.n) ? last_ : full_; }

    SmallCode block_;
    std::size_t N_;
    std::size_t blocks_;
    int last_used_;
    Regime regime_;
    int radius_;
    int list_cap_;
    Table full_;
    Table last_;
};

// The list-regime code for N = 20, radius 8: a random 14 x 20 check matrix
// whose largest coset list at radius 8 stays within list_cap.
LinearCode desk_list_code(int list_cap = 64, std::uint64_t seed = 20);

// GF(2^m) arithmetic for m <= 63 with a fixed irreducible modulus.
struct Gf2m {
    int m;
    std::uint64_t modulus;  // includes the x^m term

    static Gf2m make(int m);
    std::uint64_t mul(std::uint64_t a, std::uint64_t b) const;
};
bool irreducible(std::uint64_t poly);  // Ben-Or test; bit i = coefficient of x^i

enum class HashKind { affine, eps_biased };

struct AlmostPairwiseHash {
    HashKind kind;
    int N;
    int k;
    Gf2m field;
    double eps_h;  // collision probability minus 2^-k, at most

    // Affine a x + b over GF(2^L), L = max(N, k), keeping the low k bits; eps_h = 0.
    static AlmostPairwiseHash affine(int N, int k);
    // Powering eps-biased bits r_i = <x^i, y> in GF(2^m); eps_h = (k(N+1) - 1)/2^m.
    static AlmostPairwiseHash eps_biased(int N, int k, int m);
    std::size_t seed_len() const { return 2 * static_cast<std::size_t>(field.m); }
    // Every member is GF(2)-affine: bit j of the output is parity(masks[j] & x) ^ bit j of constant.
    struct Prepared {
        std::vector<std::uint64_t> masks;
        std::uint64_t constant = 0;
        std::uint64_t apply(std::uint64_t x) const;
    };
    Prepared prepare(const Bits& seed) const;
};

// Evaluate the member selected by seed on an N-bit input; k output bits.
Bits hash_draw_eval(const AlmostPairwiseHash& family, const Bits& seed, const Bits& x);

// k = ceil(log2(2 L / eps)).
int hash_output_bits(int list_cap, double epsilon);
// Smallest m with eps_h / 2 <= epsilon - L / 2^k for the eps-biased family.
int eps_biased_field_bits(int N, int k, int list_cap, double epsilon);

struct EirResult {
    Bits bob_estimate;
    bool aborted = false;
    bool correct = false;
    bool promise_violated = false;
    std::size_t leaked_bits = 0;
    std::size_t randomness_used = 0;
    std::size_t corrections = 0;
    std::string abort_reason;
};

// One-way reconciliation: Alice sends AX (plus a hash of X in the list
// regime) and Bob recovers X from Y. hash may be null in the unique regime.
EirResult eir_run(const LinearCode& code, const Bits& X, const Bits& Y, double lambda, BitSource& shared,
                  const AlmostPairwiseHash* hash = nullptr);

}  // namespace diqr
