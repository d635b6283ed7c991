#include "diqr/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "diqr/entropy.hpp"
#include "diqr/parallel.hpp"

namespace diqr {

namespace {

struct Check {
    double margin;
    bool violated;
};

SuiteResult sweep(const std::string& suite, std::size_t instances, const Seed256& master, int workers,
                  const std::function<std::vector<Check>(std::mt19937_64&, std::size_t)>& body) {
    std::vector<std::vector<Check>> all(instances);
    parallel_for(instances, workers, [&](std::size_t i) {
        auto rng = substream(master, "verify-" + suite, i);
        all[i] = body(rng, i);
    });
    SuiteResult r;
    r.suite = suite;
    r.instances = instances;
    for (const auto& checks : all)
        for (const auto& c : checks) {
            ++r.checks;
            r.violations += c.violated;
            r.worst_margin = std::max(r.worst_margin, c.margin);
        }
    return r;
}

double uniform(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0, 1)(rng); }

}  // namespace

const std::vector<std::string>& verify_suites() {
    static const std::vector<std::string> suites{"uncertainty", "schatten",    "smoothing",
                                                 "one-shot",    "multi-shot", "entanglement"};
    return suites;
}

SuiteResult verify_uncertainty(std::size_t instances, const Seed256& master, int workers) {
    return sweep("uncertainty", instances, master, workers, [](std::mt19937_64& rng, std::size_t) {
        const int dv = 1 + static_cast<int>(rng() % 4), dw = 1 + static_cast<int>(rng() % 4);
        const auto inst = random_measurement_instance(rng, dv, dw);
        std::vector<Check> out;
        for (double eps : {0.1, 0.5, 1.0}) {
            const auto u = uncertainty_check(inst, eps);
            out.push_back({u.lhs_ratio - u.rhs, !u.holds});
        }
        return out;
    });
}

SuiteResult verify_schatten(std::size_t instances, const Seed256& master, int workers) {
    return sweep("schatten", instances, master, workers, [](std::mt19937_64& rng, std::size_t) {
        const int r = 1 + static_cast<int>(rng() % 4), c = 1 + static_cast<int>(rng() % 4);
        const CMatrix X = random_ginibre(rng, r, c), Y = random_ginibre(rng, r, c);
        std::vector<Check> out;
        for (double p : {2.0, 2.5, 4.0}) {
            const auto s = schatten_ineq_check(X, Y, p);
            out.push_back({s.lhs - s.rhs, !s.holds});
        }
        return out;
    });
}

SuiteResult verify_smoothing(std::size_t instances, const Seed256& master, int workers) {
    return sweep("smoothing", instances, master, workers, [](std::mt19937_64& rng, std::size_t i) {
        const int d = 1 + static_cast<int>(rng() % 8);
        CqState st;
        double total = 0;
        for (int l = 0; l < 4; ++l) {
            st.labels.push_back(std::to_string(l));
            st.blocks.push_back(random_psd(rng, d, 1 + static_cast<int>(rng() % static_cast<unsigned>(d))));
            total += st.blocks.back().trace().real();
        }
        for (auto& b : st.blocks) b /= total;
        const CMatrix sigma = random_density(rng, d, d);
        const double alpha = 1.05 + 0.95 * uniform(rng);
        const double eps = (i % 10 == 0) ? std::sqrt(2.0) : std::exp2(-1 - 10 * uniform(rng));
        const auto s = smooth_from_renyi(st, sigma, alpha, eps);
        return std::vector<Check>{{s.trace_distance - eps, s.trace_distance > eps + 1e-9},
                                  {s.dmax_smoothed - s.bound, s.dmax_smoothed > s.bound + 1e-9}};
    });
}

PtInstance random_pt_instance(std::mt19937_64& rng, bool with_unitaries) {
    const double v = 0.3 + 0.7 * uniform(rng);
    const double h = (1 - v) * uniform(rng) * 0.5;
    const double q = 0.01 + 0.3 * uniform(rng);
    const double kappa = 0.1 + 1.9 * uniform(rng);
    const double r = v * (0.02 + 0.4 * uniform(rng));
    const int aux = 1 + static_cast<int>(rng() % 2), env = 1 + static_cast<int>(rng() % 4);
    auto dev = random_partially_trusted(rng, v, h, aux, env, with_unitaries ? 3 : 0);
    return {std::move(dev), DivergenceParams{v, h, q, kappa, r}};
}

SuiteResult verify_one_shot(std::size_t instances, const Seed256& master, int workers) {
    return sweep("one-shot", instances, master, workers, [](std::mt19937_64& rng, std::size_t) {
        const auto inst = random_pt_instance(rng, false);
        const auto r = one_shot_check(inst.device, inst.params);
        return std::vector<Check>{{r.lhs - r.rhs, !r.holds}};
    });
}

SuiteResult verify_multi_shot(std::size_t instances, const Seed256& master, int workers) {
    return sweep("multi-shot", instances, master, workers, [](std::mt19937_64& rng, std::size_t i) {
        const auto inst = random_pt_instance(rng, i % 2 == 1);
        const auto r = exact_small_run(1 + static_cast<int>(i % 3), inst.device, inst.params);
        return std::vector<Check>{{r.lhs - r.rhs, !r.holds}};
    });
}

SuiteResult verify_entanglement(std::size_t instances, const Seed256& master, int workers) {
    return sweep("entanglement", instances, master, workers, [](std::mt19937_64& rng, std::size_t) {
        const auto inst = random_pt_instance(rng, false);
        std::vector<Check> out;
        for (double g : entanglement_bound_gaps(inst.device)) out.push_back({-g, g < -1e-9});
        return out;
    });
}

SuiteResult run_suite(const std::string& suite, std::size_t instances, const Seed256& master, int workers) {
    if (suite == "uncertainty") return verify_uncertainty(instances, master, workers);
    if (suite == "schatten") return verify_schatten(instances, master, workers);
    if (suite == "smoothing") return verify_smoothing(instances, master, workers);
    if (suite == "one-shot") return verify_one_shot(instances, master, workers);
    if (suite == "multi-shot") return verify_multi_shot(instances, master, workers);
    if (suite == "entanglement") return verify_entanglement(instances, master, workers);
    throw std::invalid_argument("unknown suite: " + suite);
}

}  // namespace diqr
