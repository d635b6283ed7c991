#include "diqr/qkd.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "diqr/parallel.hpp"
#include "diqr/rates.hpp"

namespace diqr {

KdConfig KdConfig::ghz(std::size_t N, double q, double eta) {
    KdConfig c;
    c.game = ghz_game();
    c.constants = ghz_constants();
    c.N = N;
    c.q = q;
    c.eta = eta;
    return c;
}

double KdConfig::abort_threshold() const {
    const double t = (1 - constants.wG + eta) * q * static_cast<double>(N);
    return std::round(t * 1e9) / 1e9;
}

void KdConfig::validate() const {
    const double cap = constants.wG - 0.5;
    if (N == 0) throw std::invalid_argument("N must be positive");
    if (!(q > 0 && q < 1)) throw std::invalid_argument("q must lie in (0, 1)");
    if (!(eta > 0 && eta < 1)) throw std::invalid_argument("eta must lie in (0, 1)");
    if (!(lambda > 0 && lambda < cap)) throw std::invalid_argument("lambda must lie in (0, w_G - 1/2)");
    if (!(lambda_prime > lambda && lambda_prime < cap)) throw std::invalid_argument("lambda' must lie in (lambda, w_G - 1/2)");
    if (!(lambda > 0.25)) throw std::invalid_argument("desk R_kd reconciles in the unique regime only (lambda > 1/4)");
    if (!(delta > 0 && delta < 1)) throw std::invalid_argument("delta must lie in (0, 1)");
}

unsigned bob_implied_bit(const XorGame& game, unsigned output) {
    for (const auto& e : game.support) {
        if (e.input != 0) continue;
        const unsigned bob_bits = output & ((1u << (game.n - 1)) - 1);
        return static_cast<unsigned>(std::popcount(bob_bits) & 1) ^ (e.sign < 0 ? 1u : 0u);
    }
    throw std::invalid_argument("game has no all-zero input in its support");
}

KdOutcome run_rkd(const KdConfig& config, const DeviceBehavior& device, const Seed256& master, std::uint64_t trial,
                  bool with_report) {
    config.validate();
    const XorGame& game = config.game;
    if (components(device) != game.n) throw std::invalid_argument("device component count does not match the game");
    bob_implied_bit(game, 0);

    std::vector<double> cdf{0.0};
    for (const auto& e : game.support) cdf.push_back(cdf.back() + e.prob);
    cdf.back() = 1.0;

    EngineBitSource seed(substream(master, "protocol-seed", trial));
    auto device_rng = substream(master, "device", trial);
    IntervalSampler sampler(seed);
    DeviceState state = initial_state(device);

    KdOutcome out;
    out.alice_key.reserve(config.N);
    out.bob_key.reserve(config.N);
    Bits alice_bits, bob_bits;
    std::vector<std::size_t> gen_index;
    for (std::size_t i = 0; i < config.N; ++i) {
        if (sampler.bernoulli(config.q)) {
            const XorEntry& e = game.support[sampler.categorical(cdf)];
            const unsigned o = respond(state, device, e.input, device_rng);
            const bool pass = ((std::popcount(o) & 1) ? -1 : 1) == e.sign;
            ++out.game_rounds;
            out.wins += pass;
            out.failures += !pass;
            const Symbol s = pass ? Symbol::P : Symbol::F;
            out.alice_key.push_back(s);
            out.bob_key.push_back(s);
            out.public_transcript.push_back("game " + std::to_string(i) + " in=" + std::to_string(e.input) +
                                            " out=" + std::to_string(o));
        } else {
            const unsigned o = respond(state, device, 0u, device_rng);
            const unsigned a = (o >> (game.n - 1)) & 1u;
            const unsigned b = bob_implied_bit(game, o);
            ++out.generation_rounds;
            out.wins += (a == b);
            out.disagreements += (a != b);
            alice_bits.push_back(static_cast<std::uint8_t>(a));
            bob_bits.push_back(static_cast<std::uint8_t>(b));
            gen_index.push_back(i);
            out.alice_key.push_back(a ? Symbol::T : Symbol::H);
            out.bob_key.push_back(b ? Symbol::T : Symbol::H);
        }
    }
    out.seed_bits_used = seed.consumed();

    if (static_cast<double>(out.failures) > config.abort_threshold()) {
        out.abort_reason = "threshold";
        out.keys_equal = out.alice_key == out.bob_key;
        return out;
    }

    EngineBitSource shared(substream(master, "eir-shared", trial));
    if (!alice_bits.empty()) {
        const LinearCode code(bch_15_5(), alice_bits.size(), Regime::unique, 3);
        out.code_blocks = code.blocks();
        EirResult eir = eir_run(code, alice_bits, bob_bits, config.lambda, shared);
        std::string syn;
        for (auto bit : code.syndrome(alice_bits)) syn.push_back(bit ? '1' : '0');
        out.public_transcript.push_back("syndrome " + syn);
        out.leaked_bits = eir.leaked_bits;
        if (eir.aborted) {
            out.abort_reason = "eir: " + eir.abort_reason;
        } else {
            for (std::size_t j = 0; j < gen_index.size(); ++j)
                out.bob_key[gen_index[j]] = eir.bob_estimate[j] ? Symbol::T : Symbol::H;
        }
        out.eir = std::move(eir);
    }
    out.keys_equal = out.alice_key == out.bob_key;
    if (!out.abort_reason.empty()) return out;
    out.success = true;
    if (with_report)
        out.report = key_rate_report(config, out.leaked_bits, out.seed_bits_used, out.eir ? out.eir->randomness_used : 0);
    return out;
}

double eta_bar(double lambda_prime, double wG, const std::function<double(double)>& f) {
    const double a = (wG - 0.5 - lambda_prime) / wG;
    auto g = [&](double t) { return wG * t * (a - f(t)); };
    constexpr int steps = 10000;
    int best = 0;
    double best_val = 0;
    for (int i = 1; i <= steps; ++i) {
        const double v = g(static_cast<double>(i) / steps);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    if (best == 0) return 0;
    double lo = std::max(0.0, (best - 1.0) / steps), hi = std::min(1.0, (best + 1.0) / steps);
    const double phi = 0.5 * (std::sqrt(5.0) - 1);
    for (int it = 0; it < 80; ++it) {
        const double c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
        if (g(c) > g(d)) hi = d;
        else lo = c;
    }
    return std::max(best_val, g(0.5 * (lo + hi)));
}

KdMonteCarlo rkd_monte_carlo(const KdConfig& config, const DeviceBehavior& device, std::size_t trials,
                             const Seed256& master, int workers) {
    KdMonteCarlo mc;
    mc.trials = trials;
    mc.records.resize(trials);
    parallel_for(trials, workers, [&](std::size_t t) {
        KdOutcome o = run_rkd(config, device, master, t, false);
        mc.records[t] = {o.success, o.wins, o.disagreements, o.keys_equal};
    });
    return mc;
}

AgreementReport agreement_bound_check(const KdMonteCarlo& stats, std::size_t N, double q, double lambda,
                                      double lambda_prime, double eta, double eta_bar_value) {
    if (!(eta < eta_bar_value)) throw std::invalid_argument("agreement_bound_check needs eta < eta_bar");
    if (stats.trials == 0) throw std::invalid_argument("agreement_bound_check needs trials");
    const double Nd = static_cast<double>(N);
    std::size_t bad = 0;
    for (const auto& r : stats.records)
        if (r.success && static_cast<double>(r.wins) <= (0.5 + lambda) * Nd) ++bad;
    AgreementReport rep;
    rep.bad_frequency = static_cast<double>(bad) / static_cast<double>(stats.trials);
    rep.bound = std::exp(-(eta_bar_value - eta) * (eta_bar_value - eta) * q * Nd / 3) +
                std::exp(-(lambda_prime - lambda) * (lambda_prime - lambda) * Nd / 2);
    const double p = std::min(1.0, rep.bound);
    rep.sigma = std::sqrt(p * (1 - p) / static_cast<double>(stats.trials));
    rep.flagged = rep.bad_frequency > rep.bound + 3 * rep.sigma;
    return rep;
}

KeyRateReport key_rate_report(const KdConfig& config, std::size_t leaked_bits, std::size_t seed_bits,
                              std::size_t eir_randomness) {
    KeyRateReport rep;
    rep.leaked_bits = leaked_bits;
    rep.seed_bits = seed_bits;
    rep.eir_randomness = eir_randomness;
    const double Nd = static_cast<double>(config.N);
    const TuneResult tune = tune_parameters(config.constants, config.eta, config.delta, Nd, Nd);
    rep.feasible = tune.feasible;
    if (!tune.feasible) {
        rep.warning = "rate tuning infeasible: " + tune.reason;
        return rep;
    }
    rep.rate = tune.rate;
    rep.expansion_bits = tune.rate * Nd;
    rep.finite_bound = optimize_certified_bound(config.constants, Nd, config.eta, config.eir_epsilon()).bound;
    rep.certified_bits = std::max(0.0, rep.expansion_bits - static_cast<double>(leaked_bits));
    rep.residual_fraction = rep.expansion_bits > 0 ? rep.certified_bits / rep.expansion_bits : 0.0;
    if (rep.certified_bits == 0) rep.warning = "leakage meets or exceeds the expansion bound";
    return rep;
}

namespace {

template <class Stat>
TailReport tail_sweep(std::size_t trials, std::uint64_t seed, double bound, Stat&& exceeds) {
    std::mt19937_64 rng(seed);
    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t) hits += exceeds(rng);
    TailReport r;
    r.frequency = static_cast<double>(hits) / static_cast<double>(trials);
    r.bound = bound;
    const double p = std::min(1.0, bound);
    r.sigma = std::sqrt(p * (1 - p) / static_cast<double>(trials));
    r.flagged = r.frequency > r.bound + 3 * r.sigma;
    return r;
}

}  // namespace

TailReport azuma_game_tail(const std::vector<double>& w, double q, double eps, std::size_t trials, std::uint64_t seed) {
    const double N = static_cast<double>(w.size());
    double expected = 0;
    for (double wi : w) expected += 1 - wi;
    return tail_sweep(trials, seed, std::exp(-eps * eps * q * N / 3), [&](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> u(0, 1);
        double s = 0;
        for (double wi : w) {
            const bool g = u(rng) < q;
            const bool W = u(rng) < wi;
            s += g && !W;
        }
        return s - q * expected >= eps * q * N;
    });
}

TailReport azuma_generation_tail(const std::vector<double>& w, double q, double eps, std::size_t trials,
                                 std::uint64_t seed) {
    const double N = static_cast<double>(w.size());
    return tail_sweep(trials, seed, std::exp(-eps * eps * N / 2), [&](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> u(0, 1);
        double s = 0;
        for (double wi : w) {
            const bool g = u(rng) < q;
            const bool W = u(rng) < wi;
            if (!g) s += wi - (W ? 1.0 : 0.0);
        }
        return s >= eps * N;
    });
}

}  // namespace diqr
