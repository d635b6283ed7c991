#pragma once

#include <optional>
#include <string>

#include "diqr/xorgames.hpp"

namespace diqr {

double binary_entropy(double y);
// Pi(eps, delta) from the uncertainty principle, symmetric about delta = 1/2.
double big_pi(double epsilon, double delta);
// pi(y) = 1 - 2 h(y) and its derivative 2 log2(y / (1 - y)).
double small_pi(double y);
double small_pi_prime(double y);
// Smallest positive root of pi (about 0.110028).
double small_pi_root();

struct RateParams {
    double v;
    double h;
    double eta;
    double q;
    double kappa;
    double r;
    double N = 1;
    double epsilon = 1.4142135623730951;

    double gamma() const { return r * q * kappa; }
    // Throws std::invalid_argument naming the first violated constraint.
    void validate() const;
};

double lambda_rate(const RateParams& p, double t);
struct DeltaResult {
    double value;
    double argmin;
};
DeltaResult delta_rate_full(const RateParams& p);
inline double delta_rate(const RateParams& p) { return delta_rate_full(p).value; }
double r_rate(const RateParams& p);

struct TE {
    double T;
    double E;
    double r_star;
};
TE rate_T_E(double v, double h, double eta, double q, double kappa);

struct RateReport {
    double T_value;
    double E_value;
    double bound;
    RateParams params;
    GameConstants game;
};

RateReport certified_bound(const GameConstants& game, double N, double q, double eta, double kappa, double epsilon);
// Best certified_bound over q, kappa in {10^{-k/5}}, k = 1..30 (q) and 0..30 (kappa).
RateReport optimize_certified_bound(const GameConstants& game, double N, double eta, double epsilon, int workers = 0);

struct TuneResult {
    bool feasible;
    std::string reason;
    double q0 = 0;
    double kappa0 = 0;
    double M = 0;
    double b = 0;
    double K = 1.4142135623730951;
    double rate = 0;
    // Soundness K 2^{-b q0 N} at the ends of the requested N range.
    double eps_at_nmin = 0;
    double eps_at_nmax = 0;
};

TuneResult tune_parameters(const GameConstants& game, double eta, double delta, double n_min = 1e4,
                           double n_max = 1e6, int workers = 0);

}  // namespace diqr
