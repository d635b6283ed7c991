#include "diqr/protocols.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "diqr/parallel.hpp"

namespace diqr {

namespace {

using u128 = unsigned __int128;

constexpr std::uint64_t kHalf = 1ULL << 61;
constexpr std::uint64_t kQuarter = 1ULL << 60;

// x in [0, 1] as a 64-bit fraction, with 1 mapped to 2^64.
u128 to_fixed(double x) {
    if (x <= 0) return 0;
    if (x >= 1) return u128(1) << 64;
    return static_cast<u128>(std::ldexp(static_cast<long double>(x), 64));
}

std::uint64_t split(std::uint64_t lo, std::uint64_t hi, u128 frac) {
    return lo + static_cast<std::uint64_t>((u128(hi - lo) * frac) >> 64);
}

}  // namespace

void IntervalSampler::zoom() {
    for (;;) {
        std::uint64_t off;
        if (hi_ <= kHalf) off = 0;
        else if (lo_ >= kHalf) off = kHalf;
        else if (lo_ >= kQuarter && hi_ <= 3 * kQuarter) off = kQuarter;
        else break;
        lo_ = 2 * (lo_ - off);
        hi_ = 2 * (hi_ - off);
        c_ = 2 * (c_ - off);
        w_ *= 2;
    }
}

std::size_t IntervalSampler::decide(const std::vector<std::uint64_t>& bounds) {
    for (;;) {
        for (std::size_t j = 0; j + 1 < bounds.size(); ++j) {
            if (bounds[j] <= c_ && c_ + w_ <= bounds[j + 1]) {
                lo_ = bounds[j];
                hi_ = bounds[j + 1];
                zoom();
                return j;
            }
        }
        // The input interval straddles a split point, which needs w >= 2.
        w_ /= 2;
        if (src_.next_bit()) c_ += w_;
    }
}

int IntervalSampler::bernoulli(double q) {
    if (!(q > 0 && q < 1)) throw std::invalid_argument("bernoulli needs q in (0, 1)");
    std::uint64_t m = split(lo_, hi_, (u128(1) << 64) - to_fixed(q));
    return static_cast<int>(decide({lo_, m, hi_}));
}

std::size_t IntervalSampler::categorical(const std::vector<double>& cdf) {
    if (cdf.size() < 2) throw std::invalid_argument("categorical needs at least one symbol");
    std::vector<std::uint64_t> bounds(cdf.size());
    for (std::size_t j = 0; j < cdf.size(); ++j) bounds[j] = split(lo_, hi_, to_fixed(cdf[j]));
    bounds.front() = lo_;
    bounds.back() = hi_;
    return decide(bounds);
}

SampledBits biased_bit_sampler(double q, BitSource& source, std::size_t N) {
    const std::size_t start = source.consumed();
    IntervalSampler s(source);
    SampledBits out{std::vector<std::uint8_t>(N), 0};
    for (std::size_t i = 0; i < N; ++i) out.bits[i] = static_cast<std::uint8_t>(s.bernoulli(q));
    out.consumed = source.consumed() - start;
    return out;
}

char to_char(Symbol s) { return "HTPF"[static_cast<int>(s)]; }

ProtocolConfig ProtocolConfig::protocol_r(const XorGame& game, std::size_t N, double q, double eta) {
    ProtocolConfig c;
    c.mode = ProtocolMode::R;
    c.N = N;
    c.q = q;
    c.eta = eta;
    c.game = game;
    c.wG = (1 + optimal_score(game).q) / 2;
    c.validate();
    return c;
}

ProtocolConfig ProtocolConfig::protocol_a_prime(double v, double h, std::size_t N, double q, double eta) {
    ProtocolConfig c;
    c.mode = (v == 1 && h == 0) ? ProtocolMode::A : ProtocolMode::A_prime;
    c.N = N;
    c.q = q;
    c.eta = eta;
    c.v = v;
    c.h = h;
    c.validate();
    return c;
}

void ProtocolConfig::validate() const {
    if (!(q > 0 && q < 1)) throw std::invalid_argument("q must lie in (0, 1)");
    if (mode == ProtocolMode::R) {
        if (!(eta > 0 && eta < 0.5)) throw std::invalid_argument("eta must lie in (0, 1/2)");
        if (game.n < 2) throw std::invalid_argument("protocol R needs a game");
        if (!(wG > 0.5 && wG <= 1 + 1e-12)) throw std::invalid_argument("w_G must lie in (1/2, 1]");
    } else {
        if (!(v > 0 && v <= 1)) throw std::invalid_argument("v must lie in (0, 1]");
        if (!(h >= 0 && h <= 1 - v + 1e-12)) throw std::invalid_argument("h must lie in [0, 1 - v]");
        if (!(eta > 0 && eta < v / 2)) throw std::invalid_argument("eta must lie in (0, v/2)");
    }
}

double ProtocolConfig::abort_threshold() const {
    const double base = mode == ProtocolMode::R ? (1 - wG + eta) : (h / 2 + eta);
    // round away float noise so that e.g. 0.01 * 0.05 * 1e4 is exactly 5
    return std::round(base * q * static_cast<double>(N) * 1e9) / 1e9;
}

std::map<char, std::size_t> Transcript::symbol_counts() const {
    std::map<char, std::size_t> m{{'H', 0}, {'T', 0}, {'P', 0}, {'F', 0}};
    for (const auto& r : rounds) ++m[to_char(r.symbol)];
    return m;
}

std::vector<std::uint8_t> Transcript::encoded() const {
    std::vector<std::uint8_t> bits;
    bits.reserve(2 * rounds.size());
    for (const auto& r : rounds) {
        auto s = static_cast<unsigned>(r.symbol);
        bits.push_back(static_cast<std::uint8_t>(s >> 1));
        bits.push_back(static_cast<std::uint8_t>(s & 1));
    }
    return bits;
}

std::size_t seed_demand_estimate(const ProtocolConfig& config) {
    const double n = static_cast<double>(config.N);
    double input_entropy = 0;
    if (config.mode == ProtocolMode::R)
        for (const auto& e : config.game.support)
            if (e.prob > 0) input_entropy -= e.prob * std::log2(e.prob);
    return static_cast<std::size_t>(std::ceil(1.1 * n * binary_entropy(config.q) + config.q * n * input_entropy)) + 128;
}

namespace {

void note_demand(BitSource& seed, const ProtocolConfig& config) {
    if (auto* buf = dynamic_cast<BufferBitSource*>(&seed)) buf->set_demand_estimate(seed_demand_estimate(config));
}

}  // namespace

RunOutcome run_protocol_r(const ProtocolConfig& config, const DeviceBehavior& device, BitSource& seed,
                          std::mt19937_64& device_rng) {
    config.validate();
    if (config.mode != ProtocolMode::R) throw std::invalid_argument("configuration is not for protocol R");
    const XorGame& game = config.game;
    if (components(device) != game.n) throw std::invalid_argument("device component count does not match the game");
    note_demand(seed, config);

    std::vector<double> cdf{0.0};
    for (const auto& e : game.support) cdf.push_back(cdf.back() + e.prob);
    cdf.back() = 1.0;

    RunOutcome out{true, config.abort_threshold(), {}};
    Transcript& tr = out.transcript;
    tr.rounds.reserve(config.N);
    const std::size_t start = seed.consumed();
    IntervalSampler sampler(seed);
    DeviceState state = initial_state(device);
    for (std::size_t i = 0; i < config.N; ++i) {
        std::size_t before = seed.consumed();
        const int g = sampler.bernoulli(config.q);
        tr.g_bits_used += seed.consumed() - before;
        if (g == 1) {
            before = seed.consumed();
            const XorEntry& e = game.support[sampler.categorical(cdf)];
            tr.input_bits_used += seed.consumed() - before;
            unsigned o = respond(state, device, e.input, device_rng);
            const int parity_sign = (std::popcount(o) & 1) ? -1 : 1;
            const bool pass = parity_sign == e.sign;
            ++tr.game_rounds;
            if (!pass) ++tr.failures;
            tr.rounds.push_back({1, e.input, o, pass ? Symbol::P : Symbol::F});
        } else {
            unsigned o = respond(state, device, 0u, device_rng);
            const bool first = (o >> (game.n - 1)) & 1u;
            tr.rounds.push_back({0, 0u, o, first ? Symbol::T : Symbol::H});
        }
    }
    tr.seed_bits_used = seed.consumed() - start;
    out.success = static_cast<double>(tr.failures) <= out.threshold;
    return out;
}

RunOutcome run_protocol_a_prime(const ProtocolConfig& config, const PartiallyTrustedBehavior& device, BitSource& seed,
                                std::mt19937_64& device_rng) {
    config.validate();
    if (config.mode == ProtocolMode::R) throw std::invalid_argument("configuration is not for protocol A'");
    if (std::abs(device.v - config.v) > 1e-12 || std::abs(device.h - config.h) > 1e-12)
        throw std::invalid_argument("device parameters do not match the configuration");
    note_demand(seed, config);
    RunOutcome out{true, config.abort_threshold(), {}};
    Transcript& tr = out.transcript;
    const std::size_t start = seed.consumed();
    IntervalSampler sampler(seed);
    DeviceState state = initial_state(device);
    for (std::size_t i = 0; i < config.N; ++i) {
        const int g = sampler.bernoulli(config.q);
        const int o = partially_trusted_respond(state, device, g, device_rng).output;
        Symbol s;
        if (g == 1) {
            ++tr.game_rounds;
            if (o == 1) ++tr.failures;
            s = o == 0 ? Symbol::P : Symbol::F;
        } else {
            s = o == 0 ? Symbol::H : Symbol::T;
        }
        tr.rounds.push_back({static_cast<std::uint8_t>(g), static_cast<unsigned>(g), static_cast<unsigned>(o), s});
    }
    tr.seed_bits_used = tr.g_bits_used = seed.consumed() - start;
    out.success = static_cast<double>(tr.failures) <= out.threshold;
    return out;
}

RunOutcome run_protocol(const ProtocolConfig& config, const DeviceBehavior& device, BitSource& seed,
                        std::mt19937_64& device_rng) {
    if (config.mode == ProtocolMode::R) return run_protocol_r(config, device, seed, device_rng);
    const auto* pt = std::get_if<PartiallyTrustedBehavior>(&device);
    if (!pt) throw std::invalid_argument("protocol A' needs a partially trusted device");
    return run_protocol_a_prime(config, *pt, seed, device_rng);
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) return {0, 1};
    const double n = static_cast<double>(trials), p = successes / n, z2 = z * z;
    const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

MonteCarloStats monte_carlo(const ProtocolConfig& config, const DeviceBehavior& device, std::size_t trials,
                            const Seed256& master, std::optional<double> eta_prime, int workers) {
    if (trials == 0) throw std::invalid_argument("monte carlo needs at least one trial");
    MonteCarloStats st;
    st.trials = trials;
    st.records.resize(trials);
    parallel_for(trials, workers, [&](std::size_t t) {
        EngineBitSource seed(substream(master, "protocol-seed", t));
        auto dev = substream(master, "device", t);
        RunOutcome r = run_protocol(config, device, seed, dev);
        st.records[t] = {t, r.success, r.transcript.failures, r.transcript.game_rounds, r.transcript.seed_bits_used};
    });
    for (const auto& r : st.records) {
        if (!r.success) ++st.aborts;
        ++st.failure_histogram[r.failures];
    }
    st.abort_rate = static_cast<double>(st.aborts) / trials;
    st.interval = wilson_interval(st.aborts, trials);
    if (eta_prime) {
        const double gap = config.eta - *eta_prime;
        const double bound = std::exp(-gap * gap * config.q * config.N / 3);
        st.completeness_bound = bound;
        const double var = std::max(st.abort_rate * (1 - st.abort_rate), bound * (1 - bound));
        st.flagged = st.abort_rate > bound + 3 * std::sqrt(var / trials);
    }
    return st;
}

namespace {

std::string bits_label(const std::vector<int>& bits) {
    std::string s;
    for (int b : bits) s += static_cast<char>('0' + b);
    return s;
}

}  // namespace

ExactRunResult exact_small_run(int N, const PartiallyTrustedBehavior& device, const DivergenceParams& params) {
    if (N < 1 || N > 4) throw std::invalid_argument("exact execution supports 1 to 4 rounds");
    device.validate();
    if (device.env_dim > 4) throw std::invalid_argument("environment dimension above 4");
    if (std::abs(device.v - params.v) > 1e-12 || std::abs(device.h - params.h) > 1e-12)
        throw std::invalid_argument("device parameters do not match (v, h)");
    const double gamma = params.gamma();
    if (!(gamma > 0 && gamma <= 1)) throw std::invalid_argument("gamma = r q kappa must lie in (0, 1]");

    const CMatrix joint = device.state * device.state.adjoint();
    ExactRunResult res;
    res.gamma_e = partial_trace_left(joint, device.q_dim(), device.env_dim);

    // Depth-first over (g_i, o_i); the joint operator is carried unnormalized.
    std::vector<int> gs, os;
    auto recurse = [&](auto&& self, const CMatrix& rho, double weight, int round) -> void {
        if (round == N) {
            res.gamma.labels.push_back(bits_label(gs) + "|" + bits_label(os));
            res.gamma.blocks.push_back(weight * partial_trace_left(rho, device.q_dim(), device.env_dim));
            int fails = 0, games = 0;
            for (int i = 0; i < N; ++i) games += gs[i], fails += gs[i] * os[i];
            res.sigma_log2_weights.push_back((N - games) * std::log2(1 - params.q) + games * std::log2(params.q) +
                                             fails / (params.q * params.r));
            return;
        }
        for (int g = 0; g < 2; ++g)
            for (int o = 0; o < 2; ++o) {
                gs.push_back(g);
                os.push_back(o);
                CMatrix next = partially_trusted_branch(device, rho, static_cast<std::size_t>(round), g, o);
                self(self, next, weight * (g ? params.q : 1 - params.q), round + 1);
                gs.pop_back();
                os.pop_back();
            }
    };
    recurse(recurse, joint, 1.0, 0);

    RateParams rp{params.v, params.h, 0.0, params.q, params.kappa, params.r};
    res.delta = delta_rate(rp);
    res.lhs = renyi_divergence_scaled(res.gamma, std::vector<CMatrix>(res.gamma.blocks.size(), res.gamma_e),
                                      res.sigma_log2_weights, 1 + gamma);
    res.rhs = -N * res.delta;
    res.holds = res.lhs <= res.rhs + 1e-8;
    return res;
}

OneShotResult one_shot_check(const PartiallyTrustedBehavior& device, const DivergenceParams& params) {
    device.validate();
    const double gamma = params.gamma();
    if (!(gamma > 0 && gamma <= 1)) throw std::invalid_argument("gamma = r q kappa must lie in (0, 1]");
    const CMatrix joint = device.state * device.state.adjoint();
    const int dq = device.q_dim(), de = device.env_dim;
    const CMatrix rho = partial_trace_left(joint, dq, de);
    CqState bar;
    std::vector<double> log2_weights;
    const CMatrix id = identity(de);
    for (int g = 0; g < 2; ++g)
        for (int o = 0; o < 2; ++o) {
            double w = g ? params.q : 1 - params.q;
            bar.labels.push_back(std::string(1, "HTPF"[2 * g + o]));
            bar.blocks.push_back(w * partial_trace_left(partially_trusted_branch(device, joint, 0, g, o), dq, de));
            log2_weights.push_back(std::log2(w) + (g && o ? params.kappa / gamma : 0.0));
        }
    RateParams rp{params.v, params.h, 0.0, params.q, params.kappa, params.r};
    OneShotResult r;
    r.lhs = renyi_divergence_scaled(bar, std::vector<CMatrix>(4, id), log2_weights, 1 + gamma);
    r.rhs = renyi_divergence(rho, id, 1 + gamma) - delta_rate(rp);
    r.holds = r.lhs <= r.rhs + 1e-8;
    return r;
}

}  // namespace diqr
