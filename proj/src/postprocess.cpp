#include "diqr/postprocess.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace diqr {

namespace {

using Words = std::vector<std::uint64_t>;

Words pack(const Bits& bits) {
    Words w((bits.size() + 63) / 64 + 1, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) w[i / 64] |= 1ULL << (i % 64);
    return w;
}

// 64 bits of `w` starting at bit offset `pos`.
std::uint64_t window(const Words& w, std::size_t pos) {
    const std::size_t q = pos / 64, r = pos % 64;
    std::uint64_t lo = q < w.size() ? w[q] >> r : 0;
    std::uint64_t hi = (r && q + 1 < w.size()) ? w[q + 1] << (64 - r) : 0;
    return lo | hi;
}

}  // namespace

Bits toeplitz_extract(const Bits& source, const Bits& seed, std::size_t m) {
    const std::size_t N = source.size();
    if (N == 0 || m == 0) throw std::invalid_argument("source and output must be nonempty");
    if (seed.size() != N + m - 1) throw std::invalid_argument("seed length must be N + m - 1");
    // out_i = XOR_k seed[i + k] x[N - 1 - k]
    Bits reversed(source.rbegin(), source.rend());
    const Words x = pack(reversed), s = pack(seed);
    Bits out(m);
    const std::size_t full = N / 64, rest = N % 64;
    for (std::size_t i = 0; i < m; ++i) {
        std::uint64_t acc = 0;
        for (std::size_t b = 0; b < full; ++b) acc ^= window(s, i + 64 * b) & x[b];
        if (rest) acc ^= window(s, i + 64 * full) & x[full] & ((1ULL << rest) - 1);
        out[i] = static_cast<std::uint8_t>(std::popcount(acc) & 1);
    }
    return out;
}

double toeplitz_average_distance(int N, int m, const std::vector<std::uint32_t>& support) {
    if (N < 1 || m < 1 || N + m - 1 > 24) throw std::invalid_argument("exhaustive check needs N + m - 1 <= 24");
    if (support.empty()) throw std::invalid_argument("source support is empty");
    const std::uint32_t seeds = 1u << (N + m - 1);
    const double pmass = 1.0 / support.size(), uniform = std::exp2(-m);
    double total = 0;
    std::vector<double> hist(1u << m);
    for (std::uint32_t s = 0; s < seeds; ++s) {
        std::fill(hist.begin(), hist.end(), 0.0);
        for (std::uint32_t x : support) {
            // row i of T(s) as an N-bit mask over source positions j: bit j set iff seed[i - j + N - 1]
            std::uint32_t y = 0;
            for (int i = 0; i < m; ++i) {
                int parity = 0;
                for (int j = 0; j < N; ++j) parity ^= ((s >> (i - j + N - 1)) & 1u) & ((x >> j) & 1u);
                y |= static_cast<std::uint32_t>(parity) << i;
            }
            hist[y] += pmass;
        }
        double d = 0;
        for (double h : hist) d += std::abs(h - uniform);
        total += d / 2;
    }
    return total / seeds;
}

void ExtractorSpec::validate() const {
    if (source_len == 0 || output_len == 0) throw std::invalid_argument("extractor lengths must be positive");
    if (!(eps_ext > 0 && eps_ext < 1)) throw std::invalid_argument("eps_ext must lie in (0, 1)");
    if (static_cast<double>(output_len) > min_entropy - 2 * std::log2(1 / eps_ext))
        throw std::invalid_argument("output length exceeds the leftover-hash budget");
}

Dyadic Dyadic::from_double(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("ledger values must be finite");
    Dyadic d;
    if (x == 0) return d;
    int e;
    double frac = std::frexp(x, &e);  // x = frac 2^e with 0.5 <= |frac| < 1
    auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53));
    d.num = mant;
    d.exp = e - 53;
    return d;
}

double Dyadic::to_double() const { return std::ldexp(num.convert_to<double>(), exp); }

std::string Dyadic::to_string() const {
    boost::multiprecision::cpp_int n = num;
    int e = exp;
    while (n != 0 && (n & 1) == 0) n >>= 1, ++e;
    if (n == 0) e = 0;
    return n.str() + "*2^" + std::to_string(e);
}

Dyadic operator+(const Dyadic& a, const Dyadic& b) {
    Dyadic r;
    r.exp = std::min(a.exp, b.exp);
    r.num = (a.num << (a.exp - r.exp)) + (b.num << (b.exp - r.exp));
    return r;
}

bool operator==(const Dyadic& a, const Dyadic& b) {
    const int e = std::min(a.exp, b.exp);
    return (a.num << (a.exp - e)) == (b.num << (b.exp - e));
}

void ErrorLedger::add(int stage, int device, double soundness, double completeness) {
    LedgerEntry e{stage, device, Dyadic::from_double(soundness), Dyadic::from_double(completeness)};
    total_soundness = total_soundness + e.soundness;
    total_completeness = total_completeness + e.completeness;
    entries.push_back(std::move(e));
}

bool ErrorLedger::consistent() const {
    Dyadic s, c;
    for (const auto& e : entries) s = s + e.soundness, c = c + e.completeness;
    return s == total_soundness && c == total_completeness;
}

CrossFeedConfig desk_cross_feed_config() {
    CrossFeedConfig c;
    c.game = ghz_game();
    c.constants = ghz_constants();
    c.eta = 0.001;
    c.delta = 0.1;
    c.eps_ext = std::exp2(-8);
    // Seed budgets are 16, 64 and 256 bits; q keeps the expected game count
    // small enough that the budgets are exceeded with probability below 1e-4.
    c.stages = {{110, 1e-4, 64}, {400, 1e-3, 256}, {6000, 5e-4, 4096}};
    return c;
}

bool wiring_ok(const std::vector<WiringEdge>& wiring) {
    for (std::size_t i = 0; i < wiring.size(); ++i) {
        const auto& w = wiring[i];
        if (w.stage != static_cast<int>(i) || w.device != w.stage % 2) return false;
        if (w.seed_from != w.stage - 1) return false;
        if (w.seed_from >= 0 && wiring[w.seed_from].device == w.device) return false;
    }
    return true;
}

CrossFeedResult cross_feed(const DeviceBehavior& device_a, const DeviceBehavior& device_b,
                           const CrossFeedConfig& config, const Bits& initial_seed, const Seed256& master) {
    if (config.stages.empty()) throw std::invalid_argument("cross feeding needs at least one stage");
    CrossFeedResult res;
    res.tune = tune_parameters(config.constants, config.eta, config.delta);
    if (!res.tune.feasible) throw std::invalid_argument("rate tuning infeasible: " + res.tune.reason);

    Bits seed = initial_seed;
    for (std::size_t i = 0; i < config.stages.size(); ++i) {
        const StageConfig& sc = config.stages[i];
        const int stage = static_cast<int>(i), dev_id = stage % 2;
        if (sc.q > res.tune.q0 + 1e-15) throw std::invalid_argument("stage q exceeds the tuned q0");
        const double certified = static_cast<double>(sc.N) * res.tune.rate;
        ExtractorSpec spec{2 * sc.N, sc.output_bits, certified, config.eps_ext};
        spec.validate();

        res.wiring.push_back({stage, dev_id, stage - 1});
        ProtocolConfig pc = ProtocolConfig::protocol_r(config.game, sc.N, sc.q, config.eta);
        BufferBitSource src(seed);
        auto dev_rng = substream(master, "device", i);
        StageReport rep{stage, dev_id, sc.N, sc.q, seed.size(), 0, 0, certified, 0, false};
        RunOutcome run;
        try {
            run = run_protocol_r(pc, dev_id == 0 ? device_a : device_b, src, dev_rng);
        } catch (const SeedExhausted& e) {
            rep.seed_bits_used = src.consumed();
            res.stages.push_back(rep);
            res.aborted_stage = stage;
            res.abort_reason = e.what();
            return res;
        }
        rep.seed_bits_used = run.transcript.seed_bits_used;
        rep.failures = run.transcript.failures;
        rep.success = run.success;
        if (!run.success) {
            res.stages.push_back(rep);
            res.aborted_stage = stage;
            res.abort_reason = "failure count above threshold";
            return res;
        }
        auto ext_rng = substream(master, "extractor-seed", i);
        Bits ext_seed = random_bits(ext_rng, spec.seed_len());
        seed = toeplitz_extract(run.transcript.encoded(), ext_seed, sc.output_bits);
        rep.output_bits = seed.size();
        res.stages.push_back(rep);

        const double qn = sc.q * static_cast<double>(sc.N);
        res.ledger.add(stage, dev_id, res.tune.K * std::exp2(-res.tune.b * qn),
                       std::exp(-config.eta * config.eta * qn / 3));
    }
    res.success = true;
    res.final_bits = seed;
    return res;
}

SchedulePlan expansion_schedule(double k, double omega, double desk_cap, double target_log2, int max_stages) {
    if (!(omega > 0 && omega < 1)) throw std::invalid_argument("omega must lie in the open interval (0, 1)");
    if (!(k >= 2)) throw std::invalid_argument("k must be at least 2");
    if (!(desk_cap >= 1)) throw std::invalid_argument("desk cap must be at least 1");
    SchedulePlan plan;
    double log2_k = std::log2(k);
    for (int i = 0; i < max_stages; ++i) {
        SchedulePlanStage s;
        s.log2_seed = log2_k;
        const double e = (1 - omega) * log2_k;
        s.log2_N = e > 1000 ? kInf : std::exp2(e);
        s.log2_q = omega * log2_k - s.log2_N;
        s.capped = s.log2_N > std::log2(desk_cap);
        s.desk_N = s.capped ? desk_cap : std::exp2(s.log2_N);
        s.desk_q = std::min(1.0, std::exp2(s.log2_q));
        plan.stages.push_back(s);
        if (target_log2 > 0 && s.log2_N >= target_log2) {
            plan.reached = true;
            break;
        }
        const double next = s.log2_N;  // k_{i+1} = N_i
        if (!(next > log2_k + 1e-12)) {
            plan.stalled = true;
            break;
        }
        log2_k = next;
    }
    return plan;
}

}  // namespace diqr
