#include "diqr/rates.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "diqr/parallel.hpp"

namespace diqr {

namespace {
constexpr double kLn2 = std::numbers::ln2;
}

double binary_entropy(double y) {
    if (y <= 0 || y >= 1) return 0.0;
    return -(y * std::log2(y) + (1 - y) * std::log2(1 - y));
}

double big_pi(double epsilon, double delta) {
    if (!(epsilon > 0 && epsilon <= 1)) throw std::invalid_argument("big_pi needs epsilon in (0, 1]");
    if (!(delta >= 0 && delta <= 1)) throw std::invalid_argument("big_pi needs delta in [0, 1]");
    if (delta > 0.5) delta = 1 - delta;
    const double am1 = -2 * epsilon / (1 + 2 * epsilon);  // exponent 1/(1+2eps) minus one
    // (1-delta)^a + delta^a - 1 as a sum of two nonnegative terms, accurate for small epsilon
    double excess = (1 - delta) * std::expm1(am1 * std::log1p(-delta));
    if (delta > 0) excess += delta * std::expm1(am1 * std::log(delta));
    return 1 - ((1 + 2 * epsilon) / epsilon) * std::log1p(excess) / kLn2;
}

double small_pi(double y) {
    if (!(y >= 0 && y <= 1)) throw std::invalid_argument("small_pi needs y in [0, 1]");
    return 1 - 2 * binary_entropy(y);
}

double small_pi_prime(double y) {
    if (!(y > 0 && y < 1)) throw std::invalid_argument("small_pi_prime needs y in (0, 1)");
    return 2 * std::log2(y / (1 - y));
}

double small_pi_root() {
    double lo = 1e-6, hi = 0.5 - 1e-9;
    for (int i = 0; i < 200; ++i) {
        double mid = (lo + hi) / 2;
        (small_pi(mid) > 0 ? lo : hi) = mid;
    }
    return (lo + hi) / 2;
}

void RateParams::validate() const {
    if (!(v > 0 && v <= 1)) throw std::invalid_argument("v must lie in (0, 1]");
    if (!(h >= 0 && h <= 1 - v + 1e-15)) throw std::invalid_argument("h must lie in [0, 1 - v]");
    if (!(eta > 0 && eta < v / 2)) throw std::invalid_argument("eta must lie in (0, v/2)");
    if (!(q > 0 && q < 1)) throw std::invalid_argument("q must lie in (0, 1)");
    if (!(kappa > 0)) throw std::invalid_argument("kappa must be positive");
    if (!(r > 0 && gamma() <= 1 + 1e-12)) throw std::invalid_argument("r must lie in (0, 1/(q kappa)]");
    if (!(N >= 0)) throw std::invalid_argument("N must be nonnegative");
    if (!(epsilon > 0 && epsilon <= std::sqrt(2.0) + 1e-15)) throw std::invalid_argument("epsilon must lie in (0, sqrt 2]");
}

double lambda_rate(const RateParams& p, double t) {
    const double g = std::min(p.gamma(), 1.0);
    const double s = std::pow(p.h / 2, 1 + g) + std::pow(p.v, 1 + g) * t;
    // inner = 1 + u with u = (1-q)(2^{-g Pi} - 1) - q (1 - 2^{-kappa}) s
    const double u = (1 - p.q) * std::expm1(-g * big_pi(g, t) * kLn2) + p.q * std::expm1(-p.kappa * kLn2) * s;
    return -std::log1p(u) / (g * kLn2);
}

DeltaResult delta_rate_full(const RateParams& p) {
    const int steps = 10000;
    double best = kInf;
    int arg = 0;
    for (int i = 0; i <= steps; ++i) {
        double v = lambda_rate(p, static_cast<double>(i) / steps);
        if (v < best) best = v, arg = i;
    }
    double a = std::max(0.0, (arg - 1.0) / steps), b = std::min(1.0, (arg + 1.0) / steps);
    const double phi = (std::sqrt(5.0) - 1) / 2;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = lambda_rate(p, c), fd = lambda_rate(p, d);
    for (int i = 0; i < 80; ++i) {
        if (fc < fd) {
            b = d, d = c, fd = fc;
            c = b - phi * (b - a);
            fc = lambda_rate(p, c);
        } else {
            a = c, c = d, fc = fd;
            d = a + phi * (b - a);
            fd = lambda_rate(p, d);
        }
    }
    double tm = (a + b) / 2, fm = lambda_rate(p, tm);
    if (fm < best) return {fm, tm};
    return {best, static_cast<double>(arg) / steps};
}

double r_rate(const RateParams& p) { return -(p.h / 2 + p.eta) / p.r + delta_rate(p); }

TE rate_T_E(double v, double h, double eta, double q, double kappa) {
    if (!(eta > 0 && eta < v / 2)) throw std::invalid_argument("eta must lie in (0, v/2)");
    const double y = eta / v;
    const double r_star = std::min(v / (-small_pi_prime(y)), 1 / (q * kappa));
    RateParams p{v, h, eta, q, kappa, r_star};
    p.validate();
    return {r_rate(p), 2 / r_star, r_star};
}

RateReport certified_bound(const GameConstants& game, double N, double q, double eta, double kappa, double epsilon) {
    if (!(game.vG_lower > 0)) throw std::invalid_argument("game needs a positive trust coefficient");
    if (!(eta > 0 && eta < game.vG_lower / 2)) throw std::invalid_argument("eta must lie in (0, v_G/2)");
    const double v = game.vG_lower, h = 2 * game.fG;
    TE te = rate_T_E(v, h, eta, q, kappa);
    RateParams p{v, h, eta, q, kappa, te.r_star, N, epsilon};
    p.validate();
    const double penalty = std::log2(std::sqrt(2.0) / epsilon) / (q * kappa) * te.E;
    return {te.T, te.E, N * te.T - penalty, p, game};
}

RateReport optimize_certified_bound(const GameConstants& game, double N, double eta, double epsilon, int workers) {
    epsilon = std::max(epsilon, std::numeric_limits<double>::min());
    constexpr int nq = 30, nk = 31;
    std::vector<std::optional<RateReport>> all(nq * nk);
    parallel_for(all.size(), workers, [&](std::size_t idx) {
        const double q = std::pow(10.0, -static_cast<double>(idx / nk + 1) / 5);
        const double kappa = std::pow(10.0, -static_cast<double>(idx % nk) / 5);
        try {
            all[idx] = certified_bound(game, N, q, eta, kappa, epsilon);
        } catch (const std::invalid_argument&) {
        }
    });
    std::optional<RateReport> best;
    for (auto& r : all)
        if (r && (!best || r->bound > best->bound)) best = r;
    if (!best) throw std::invalid_argument("no admissible (q, kappa) on the grid");
    return *best;
}

TuneResult tune_parameters(const GameConstants& game, double eta, double delta, double n_min, double n_max,
                           int workers) {
    TuneResult out{};
    const double v = game.vG_lower, h = 2 * game.fG;
    if (!(eta > 0 && eta < v / 2)) {
        out.feasible = false;
        out.reason = "eta must lie in (0, v_G/2)";
        return out;
    }
    const double target = small_pi(eta / v);
    if (!(target - delta > 0)) {
        out.feasible = false;
        out.reason = "pi(eta/v_G) - delta is not positive";
        return out;
    }
    std::vector<double> grid;
    for (int k = 6; k >= 1; --k) {
        grid.push_back(std::pow(10.0, -k));
        grid.push_back(3 * std::pow(10.0, -k));
    }
    const std::size_t m = grid.size();
    std::vector<double> T(m * m), E(m * m);
    parallel_for(m * m, workers, [&](std::size_t idx) {
        TE te = rate_T_E(v, h, eta, grid[idx / m], grid[idx % m]);
        T[idx] = te.T;
        E[idx] = te.E;
    });
    const double need = target - delta / 2;
    double best_score = -1;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            bool ok = true;
            double M = 0;
            for (std::size_t a = 0; a <= i && ok; ++a)
                for (std::size_t b = 0; b <= j && ok; ++b) {
                    ok = T[a * m + b] >= need;
                    M = std::max(M, E[a * m + b]);
                }
            if (!ok) continue;
            double score = grid[i] * grid[j];
            if (score > best_score || (score == best_score && grid[i] > out.q0)) {
                best_score = score;
                out.q0 = grid[i];
                out.kappa0 = grid[j];
                out.M = M;
            }
        }
    }
    if (best_score < 0) {
        out.feasible = false;
        out.reason = "no grid point reaches T >= pi(eta/v_G) - delta/2";
        return out;
    }
    out.feasible = true;
    out.b = delta * out.kappa0 / (2 * out.M);
    out.rate = target - delta;
    out.eps_at_nmin = out.K * std::exp2(-out.b * out.q0 * n_min);
    out.eps_at_nmax = out.K * std::exp2(-out.b * out.q0 * n_max);
    return out;
}

}  // namespace diqr
