#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diqr/protocols.hpp"
#include "diqr/rng.hpp"

namespace diqr {

// Outcome of one randomized inequality sweep. margin is lhs - rhs, so a
// violation is a margin above the check's slack.
struct SuiteResult {
    std::string suite;
    std::size_t instances = 0;
    std::size_t checks = 0;
    std::size_t violations = 0;
    double worst_margin = -1e300;
};

const std::vector<std::string>& verify_suites();

// Instance i of a suite draws from substream(master, "verify-" + suite, i),
// so results do not depend on the worker count.
SuiteResult verify_uncertainty(std::size_t instances, const Seed256& master, int workers = 0);
SuiteResult verify_schatten(std::size_t instances, const Seed256& master, int workers = 0);
SuiteResult verify_smoothing(std::size_t instances, const Seed256& master, int workers = 0);
SuiteResult verify_one_shot(std::size_t instances, const Seed256& master, int workers = 0);
SuiteResult verify_multi_shot(std::size_t instances, const Seed256& master, int workers = 0);
SuiteResult verify_entanglement(std::size_t instances, const Seed256& master, int workers = 0);
SuiteResult run_suite(const std::string& suite, std::size_t instances, const Seed256& master, int workers = 0);

// Random partially trusted instance with parameters where Delta is usually
// positive: r = v (0.02 + 0.4 U), q in [0.01, 0.31], kappa in [0.1, 2].
struct PtInstance {
    PartiallyTrustedBehavior device;
    DivergenceParams params;
};
PtInstance random_pt_instance(std::mt19937_64& rng, bool with_unitaries);

}  // namespace diqr
