#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "diqr/devices.hpp"
#include "diqr/protocols.hpp"
#include "diqr/rates.hpp"
#include "diqr/rng.hpp"

namespace diqr {

using Bits = std::vector<std::uint8_t>;

// out_i = XOR_j seed[i - j + N - 1] x_j.
Bits toeplitz_extract(const Bits& source, const Bits& seed, std::size_t m);

// Statistical distance from uniform of the m-bit output, averaged over all
// 2^{N+m-1} seeds, for the flat source on `support` (values < 2^N).
double toeplitz_average_distance(int N, int m, const std::vector<std::uint32_t>& support);

struct ExtractorSpec {
    std::size_t source_len;
    std::size_t output_len;
    double min_entropy;
    double eps_ext;

    std::size_t seed_len() const { return source_len + output_len - 1; }
    // Leftover-hash budget m <= k - 2 log(1/eps).
    void validate() const;
};

// Exact value num * 2^exp.
struct Dyadic {
    boost::multiprecision::cpp_int num = 0;
    int exp = 0;

    static Dyadic from_double(double x);
    double to_double() const;
    std::string to_string() const;  // "num*2^exp" in lowest terms
    friend Dyadic operator+(const Dyadic& a, const Dyadic& b);
    friend bool operator==(const Dyadic& a, const Dyadic& b);
};

struct LedgerEntry {
    int stage;
    int device;
    Dyadic soundness;
    Dyadic completeness;
};

struct ErrorLedger {
    std::vector<LedgerEntry> entries;
    Dyadic total_soundness;
    Dyadic total_completeness;

    void add(int stage, int device, double soundness, double completeness);
    bool consistent() const;
};

struct StageConfig {
    std::size_t N;
    double q;
    std::size_t output_bits;
};

struct CrossFeedConfig {
    XorGame game;
    GameConstants constants;
    double eta;
    double delta;
    double eps_ext;
    std::vector<StageConfig> stages;
};

// Desk plan: 16 seed bits, then stage outputs of 64, 256 and 4096 bits.
CrossFeedConfig desk_cross_feed_config();

struct WiringEdge {
    int stage;
    int device;
    int seed_from;  // producing stage, or -1 for the initial seed
};

struct StageReport {
    int stage;
    int device;
    std::size_t N;
    double q;
    std::size_t seed_bits_available;
    std::size_t seed_bits_used;
    std::size_t failures;
    double certified_bits;
    std::size_t output_bits;
    bool success;
};

struct CrossFeedResult {
    bool success = false;
    std::optional<int> aborted_stage;
    std::string abort_reason;
    Bits final_bits;
    ErrorLedger ledger;
    std::vector<WiringEdge> wiring;
    std::vector<StageReport> stages;
    TuneResult tune;
};

// No device's seed comes from its own output, and every stage's seed is the
// immediately preceding stage's output.
bool wiring_ok(const std::vector<WiringEdge>& wiring);

CrossFeedResult cross_feed(const DeviceBehavior& device_a, const DeviceBehavior& device_b,
                           const CrossFeedConfig& config, const Bits& initial_seed, const Seed256& master);

struct SchedulePlanStage {
    double log2_seed;   // log2 k_i
    double log2_N;      // k_i^{1 - omega}
    double log2_q;      // omega log2 k_i - k_i^{1 - omega}
    double desk_N;      // min(2^{log2_N}, desk_cap)
    double desk_q;
    bool capped;
};

struct SchedulePlan {
    std::vector<SchedulePlanStage> stages;
    bool stalled = false;  // output length stopped growing
    bool reached = false;
};

// Iterates k_{i+1} = N_i from k until log2 N reaches target_log2 (or max_stages).
SchedulePlan expansion_schedule(double k, double omega, double desk_cap, double target_log2 = 0,
                                int max_stages = 8);

}  // namespace diqr
