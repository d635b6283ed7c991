#include "diqr/xorgames.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "diqr/parallel.hpp"

namespace diqr {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double x) {
    double y = std::remainder(x, 2 * kPi);
    return y <= -kPi ? y + 2 * kPi : y;
}

double wrapped_gap(const RVector& a, const RVector& b) {
    double g = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) g = std::max(g, std::abs(wrap_angle(a(i) - b(i))));
    return g;
}

bool same_mod_pi(double x, double target) {
    return std::abs(std::remainder(x - target, 2 * kPi)) < 1e-6;
}

}  // namespace

XorGame XorGame::make(int n, std::vector<XorEntry> support) {
    if (n < 2 || n > 4) throw std::invalid_argument("XOR game needs 2 to 4 players");
    std::set<unsigned> seen;
    double total = 0;
    for (const auto& e : support) {
        if (e.input >= (1u << n)) throw std::invalid_argument("input out of range");
        if (!seen.insert(e.input).second) throw std::invalid_argument("duplicate input in game support");
        if (e.prob < 0) throw std::invalid_argument("negative input probability");
        if (e.sign != 1 && e.sign != -1) throw std::invalid_argument("sign must be +1 or -1");
        total += e.prob;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("input probabilities must sum to 1");
    return XorGame{n, std::move(support)};
}

const XorEntry* XorGame::find(unsigned input) const {
    for (const auto& e : support)
        if (e.input == input) return &e;
    return nullptr;
}

XorGame ghz_game() {
    return XorGame::make(3, {{0b000, 0.25, 1}, {0b011, 0.25, -1}, {0b101, 0.25, -1}, {0b110, 0.25, -1}});
}

XorGame chsh_game() {
    return XorGame::make(2, {{0b00, 0.25, 1}, {0b01, 0.25, 1}, {0b10, 0.25, 1}, {0b11, 0.25, -1}});
}

XorGame constant_sign_game(int n) {
    std::vector<XorEntry> s;
    const unsigned m = 1u << n;
    for (unsigned i = 0; i < m; ++i) s.push_back({i, 1.0 / m, 1});
    return XorGame::make(n, s);
}

XorGame relabel_signs(const XorGame& game, unsigned b) {
    XorGame out = game;
    for (auto& e : out.support)
        if (std::popcount(e.input & b) % 2) e.sign = -e.sign;
    return out;
}

XorGame game_from_json_text(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    int n = j.at("n").get<int>();
    std::vector<XorEntry> s;
    for (const auto& r : j.at("support")) {
        std::string bits = r.at("input").get<std::string>();
        if (static_cast<int>(bits.size()) != n) throw std::invalid_argument("input bitstring length differs from n");
        unsigned v = 0;
        for (char c : bits) {
            if (c != '0' && c != '1') throw std::invalid_argument("input must be a bitstring");
            v = (v << 1) | static_cast<unsigned>(c - '0');
        }
        s.push_back({v, r.at("p").get<double>(), r.at("eta").get<int>()});
    }
    return XorGame::make(n, s);
}

XorGame load_game(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open game file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return game_from_json_text(ss.str());
}

std::string game_to_json_text(const XorGame& game) {
    nlohmann::json j;
    j["n"] = game.n;
    j["support"] = nlohmann::json::array();
    for (const auto& e : game.support) {
        std::string bits;
        for (int k = 0; k < game.n; ++k) bits += game.bit(e.input, k) ? '1' : '0';
        j["support"].push_back({{"input", bits}, {"p", e.prob}, {"eta", e.sign}});
    }
    return j.dump();
}

cplx eval_pg(const XorGame& game, const std::vector<cplx>& zetas) {
    if (static_cast<int>(zetas.size()) != game.n) throw std::invalid_argument("need one zeta per player");
    for (auto z : zetas)
        if (std::abs(std::abs(z) - 1.0) > 1e-9) throw std::invalid_argument("zeta values must have unit modulus");
    cplx s = 0;
    for (const auto& e : game.support) {
        cplx t = e.prob * e.sign;
        for (int k = 0; k < game.n; ++k)
            if (game.bit(e.input, k)) t *= zetas[k];
        s += t;
    }
    return s;
}

namespace {

double phase(const XorGame& game, const XorEntry& e, const RVector& th) {
    double p = th(0);
    for (int k = 0; k < game.n; ++k)
        if (game.bit(e.input, k)) p += th(k + 1);
    return p;
}

}  // namespace

double eval_zg(const XorGame& game, const RVector& thetas) {
    if (thetas.size() != game.n + 1) throw std::invalid_argument("need n+1 angles");
    double s = 0;
    for (const auto& e : game.support) s += e.prob * e.sign * std::cos(phase(game, e, thetas));
    return s;
}

RVector zg_gradient(const XorGame& game, const RVector& thetas) {
    RVector g = RVector::Zero(game.n + 1);
    for (const auto& e : game.support) {
        double w = -e.prob * e.sign * std::sin(phase(game, e, thetas));
        g(0) += w;
        for (int k = 0; k < game.n; ++k)
            if (game.bit(e.input, k)) g(k + 1) += w;
    }
    return g;
}

RMatrix zg_hessian(const XorGame& game, const RVector& thetas) {
    const int m = game.n + 1;
    RMatrix h = RMatrix::Zero(m, m);
    for (const auto& e : game.support) {
        double w = -e.prob * e.sign * std::cos(phase(game, e, thetas));
        RVector c = RVector::Zero(m);
        c(0) = 1;
        for (int k = 0; k < game.n; ++k) c(k + 1) = game.bit(e.input, k);
        h += w * c * c.transpose();
    }
    return h;
}

RVector refine_maximum(const XorGame& game, RVector th, double gtol, int max_iter) {
    double z = eval_zg(game, th);
    for (int it = 0; it < max_iter; ++it) {
        RVector g = zg_gradient(game, th);
        if (g.norm() <= gtol) break;
        Eigen::SelfAdjointEigenSolver<RMatrix> es(zg_hessian(game, th));
        RVector d = RVector::Zero(th.size());
        for (Eigen::Index i = 0; i < d.size(); ++i) {
            const RVector v = es.eigenvectors().col(i);
            d += v * (v.dot(g) / std::max(std::abs(es.eigenvalues()(i)), 1e-8));
        }
        if (d.norm() > 1.0) d /= d.norm();
        double t = 1.0;
        RVector cand = th + d;
        double zc = eval_zg(game, cand);
        while (zc < z - 1e-15 && t > 1e-12) {
            t *= 0.5;
            cand = th + t * d;
            zc = eval_zg(game, cand);
        }
        if (t <= 1e-12) break;
        th = cand;
        z = zc;
    }
    return th;
}

ScoreResult optimal_score(const XorGame& game, int workers) {
    // Grid over theta_1..theta_{n-1}; the last angle enters P_G as A + B e^{i theta_n}
    // and is maximized in closed form.
    const int steps = 400;  // step pi/200 on [0, 2pi)
    const int free = game.n - 1;
    std::size_t total = 1;
    for (int k = 0; k < free; ++k) total *= steps;
    std::vector<cplx> unit(steps);
    for (int s = 0; s < steps; ++s) unit[s] = std::polar(1.0, 2 * kPi * s / steps);

    const std::size_t blocks = std::min<std::size_t>(total, 256);
    std::vector<std::pair<double, std::size_t>> best(blocks, {-1.0, 0});
    parallel_for(blocks, workers, [&](std::size_t b) {
        for (std::size_t idx = b * total / blocks; idx < (b + 1) * total / blocks; ++idx) {
            std::size_t r = idx;
            cplx zs[4];
            for (int k = free - 1; k >= 0; --k) {
                zs[k] = unit[r % steps];
                r /= steps;
            }
            cplx A = 0, B = 0;
            for (const auto& e : game.support) {
                cplx t = e.prob * e.sign;
                for (int k = 0; k < free; ++k)
                    if (game.bit(e.input, k)) t *= zs[k];
                (game.bit(e.input, game.n - 1) ? B : A) += t;
            }
            double v = std::abs(A) + std::abs(B);
            if (v > best[b].first) best[b] = {v, idx};
        }
    });
    auto top = *std::max_element(best.begin(), best.end(),
                                 [](const auto& x, const auto& y) { return x.first < y.first; });

    RVector th(game.n + 1);
    std::size_t r = top.second;
    for (int k = free - 1; k >= 0; --k) {
        th(k + 1) = 2 * kPi * static_cast<double>(r % steps) / steps;
        r /= steps;
    }
    cplx A = 0, B = 0;
    for (const auto& e : game.support) {
        cplx t = e.prob * e.sign;
        for (int k = 0; k < free; ++k)
            if (game.bit(e.input, k)) t *= std::polar(1.0, th(k + 1));
        (game.bit(e.input, game.n - 1) ? B : A) += t;
    }
    th(game.n) = (std::abs(B) > 0 && std::abs(A) > 0) ? std::arg(A) - std::arg(B) : 0.0;
    std::vector<cplx> zetas(game.n);
    for (int k = 0; k < game.n; ++k) zetas[k] = std::polar(1.0, th(k + 1));
    th(0) = -std::arg(eval_pg(game, zetas));
    th = refine_maximum(game, th);
    for (Eigen::Index i = 0; i < th.size(); ++i) th(i) = wrap_angle(th(i));
    return {eval_zg(game, th), th};
}

std::string to_string(SelfTestClass c) {
    switch (c) {
        case SelfTestClass::not_self_test: return "not-self-test";
        case SelfTestClass::self_test: return "self-test";
        case SelfTestClass::strong_self_test: return "strong-self-test";
        case SelfTestClass::inconclusive: return "inconclusive";
    }
    return "unknown";
}

namespace {

std::vector<RVector> collect_maxima(const XorGame& game, double q, std::uint64_t seed, int starts) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ud(-kPi, kPi);
    std::vector<RVector> found;
    for (int s = 0; s < starts; ++s) {
        RVector th(game.n + 1);
        for (Eigen::Index i = 0; i < th.size(); ++i) th(i) = ud(rng);
        th = refine_maximum(game, th);
        if (zg_gradient(game, th).norm() > 1e-6) continue;
        if (eval_zg(game, th) < q - 1e-7) continue;
        for (Eigen::Index i = 0; i < th.size(); ++i) th(i) = wrap_angle(th(i));
        bool dup = std::any_of(found.begin(), found.end(), [&](const RVector& f) { return wrapped_gap(f, th) < 1e-5; });
        if (!dup) found.push_back(th);
    }
    std::sort(found.begin(), found.end(), [](const RVector& a, const RVector& b) {
        for (Eigen::Index i = 0; i < a.size(); ++i)
            if (std::abs(a(i) - b(i)) > 1e-5) return a(i) < b(i);
        return false;
    });
    return found;
}

bool same_sets(const std::vector<RVector>& a, const std::vector<RVector>& b) {
    if (a.size() != b.size()) return false;
    for (const auto& x : a)
        if (std::none_of(b.begin(), b.end(), [&](const RVector& y) { return wrapped_gap(x, y) < 1e-5; }))
            return false;
    return true;
}

}  // namespace

Classification classify_selftest(const XorGame& game, double q, std::uint64_t seed, int starts) {
    Classification out{SelfTestClass::inconclusive, {}, 0.0, false, false};
    auto m0 = collect_maxima(game, q, seed, starts);
    for (std::uint64_t s = 1; s < 3; ++s) {
        if (!same_sets(m0, collect_maxima(game, q, seed + 7919 * s, starts))) return out;
    }
    out.maxima = m0;
    if (m0.empty()) return out;

    for (const auto& alpha : m0) {
        bool none_multiple = true;
        for (int k = 1; k <= game.n; ++k)
            if (same_mod_pi(alpha(k), 0) || same_mod_pi(alpha(k), kPi)) none_multiple = false;
        if (none_multiple) {
            out.condition_a = true;
            out.condition_b = std::all_of(m0.begin(), m0.end(), [&](const RVector& m) {
                return wrapped_gap(m, alpha) < 1e-5 || wrapped_gap(m, -alpha) < 1e-5;
            });
            break;
        }
    }
    if (!out.condition_a || !out.condition_b) {
        out.cls = SelfTestClass::not_self_test;
        return out;
    }
    double mh = kInf;
    for (const auto& m : m0) {
        Eigen::SelfAdjointEigenSolver<RMatrix> es(zg_hessian(game, m));
        mh = std::min(mh, es.eigenvalues().cwiseAbs().minCoeff());
    }
    out.min_hessian_eig = mh;
    out.cls = mh >= 1e-6 ? SelfTestClass::strong_self_test : SelfTestClass::inconclusive;
    return out;
}

double classical_optimum(const XorGame& game) {
    const unsigned strategies = 1u << (2 * game.n);
    double best = -kInf;
    for (unsigned s = 0; s < strategies; ++s) {
        double score = 0;
        for (const auto& e : game.support) {
            int parity = 0;
            for (int k = 0; k < game.n; ++k) parity ^= (s >> (2 * k + game.bit(e.input, k))) & 1u;
            score += e.prob * e.sign * (parity ? -1.0 : 1.0);
        }
        best = std::max(best, score);
    }
    return (1 + best) / 2;
}

int positive_alignment(const XorGame& game, const std::vector<RVector>& maxima) {
    for (unsigned b = 0; b < (1u << game.n); ++b) {
        for (const auto& m : maxima) {
            for (double sgn : {1.0, -1.0}) {
                bool inside = true;
                for (int k = 0; k < game.n && inside; ++k) {
                    double t = std::fmod(sgn * m(k + 1) - kPi * game.bit(b, k), 2 * kPi);
                    if (t < 0) t += 2 * kPi;
                    inside = t > 1e-9 && t < kPi - 1e-9;
                }
                if (inside) return static_cast<int>(b);
            }
        }
    }
    return -1;
}

cplx scoring_entry(const XorGame& game, const std::vector<cplx>& zetas, unsigned b) {
    cplx s = 0;
    for (const auto& e : game.support) {
        cplx t = e.prob * e.sign;
        for (int k = 0; k < game.n; ++k)
            if (game.bit(e.input, k)) t *= game.bit(b, k) ? std::conj(zetas[k]) : zetas[k];
        s += t;
    }
    return s;
}

CMatrix scoring_operator(const XorGame& game, const std::vector<cplx>& zetas) {
    for (auto z : zetas)
        if (z.imag() < -1e-9) throw std::invalid_argument("scoring operator needs Im(zeta) >= 0");
    const int d = 1 << game.n;
    CMatrix m = CMatrix::Zero(d, d);
    for (int k = 0; k < d; ++k) m(k, d - 1 - k) = scoring_entry(game, zetas, static_cast<unsigned>(k));
    return m;
}

CMatrix reverse_diagonal_anticommuter(int n, const std::vector<cplx>& free_phases) {
    const int d = 1 << n, h = d / 2;
    if (static_cast<int>(free_phases.size()) != h / 2) throw std::invalid_argument("need 2^{n-2} free phases");
    std::vector<cplx> beta(d);
    for (int k = 0; k < h / 2; ++k) {
        beta[k] = free_phases[k];
        beta[h - 1 - k] = -std::conj(free_phases[k]);
    }
    for (int k = 0; k < h; ++k) beta[d - 1 - k] = std::conj(beta[k]);
    CMatrix m = CMatrix::Zero(d, d);
    for (int k = 0; k < d; ++k) m(k, d - 1 - k) = beta[k];
    return m;
}

CMatrix ghz_reference_anticommuter() {
    CMatrix m = CMatrix::Zero(8, 8);
    const double s[8] = {1, 1, -1, -1, -1, -1, 1, 1};
    for (int k = 0; k < 8; ++k) m(k, 7 - k) = s[k];
    return m;
}

std::string anticommuter_defect(const CMatrix& N, int n) {
    const int d = 1 << n;
    if (N.rows() != d || N.cols() != d) return "anticommuter has the wrong dimension";
    if (!is_hermitian(N, 1e-9)) return "anticommuter is not Hermitian";
    if (max_abs(N * N - CMatrix::Identity(d, d)) > 1e-9) return "anticommuter does not square to the identity";
    CMatrix x1 = pauli_x();
    for (int k = 1; k < n; ++k) x1 = kron(x1, identity(2));
    if (max_abs(N * x1 + x1 * N) > 1e-9) return "anticommuter does not anticommute with X on player 1";
    return {};
}

namespace {

struct TrustProblem {
    const XorGame& game;
    std::vector<cplx> diag;  // reverse-diagonal entries of N, top row first
    double c;
    int d;

    double objective(const RVector& th, std::vector<cplx>* zs_out = nullptr) const {
        std::vector<cplx> zs(game.n);
        for (int k = 0; k < game.n; ++k) zs[k] = std::polar(1.0, th(k));
        double m = 0;
        for (int k = 0; k < d; ++k) m = std::max(m, std::abs(scoring_entry(game, zs, k) - c * diag[k]));
        if (zs_out) *zs_out = zs;
        return m;
    }
};

RVector pattern_search(const TrustProblem& p, RVector th) {
    double f = p.objective(th);
    double step = 0.05;
    while (step > 1e-10) {
        bool improved = false;
        for (Eigen::Index i = 0; i < th.size(); ++i) {
            for (double dir : {1.0, -1.0}) {
                RVector c = th;
                c(i) = std::clamp(c(i) + dir * step, 0.0, kPi);
                double fc = p.objective(c);
                if (fc > f) {
                    th = c;
                    f = fc;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return th;
}

bool is_ghz_reference(const XorGame& game, const CMatrix& N) {
    XorGame g = ghz_game();
    if (game.n != 3 || game.support.size() != g.support.size()) return false;
    for (const auto& e : g.support) {
        const XorEntry* f = game.find(e.input);
        if (!f || f->sign != e.sign || std::abs(f->prob - e.prob) > 1e-15) return false;
    }
    return max_abs(N - ghz_reference_anticommuter()) < 1e-12;
}

}  // namespace

TrustCheckResult trust_coefficient_check(const XorGame& game, double c, const CMatrix& N, double q,
                                         const TrustSampleSpec& spec) {
    if (auto defect = anticommuter_defect(N, game.n); !defect.empty()) throw std::invalid_argument(defect);
    const int d = 1 << game.n;
    TrustProblem prob{game, std::vector<cplx>(d), c, d};
    for (int k = 0; k < d; ++k) prob.diag[k] = N(k, d - 1 - k);

    const bool analytic = is_ghz_reference(game, N);
    std::size_t grid_total = 1;
    for (int k = 0; k < game.n; ++k) grid_total *= static_cast<std::size_t>(spec.grid_per_axis);
    if (spec.grid_per_axis <= 0) grid_total = 0;

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> ud(0.0, kPi);
    std::vector<RVector> randoms(spec.random_samples, RVector(game.n));
    for (auto& r : randoms)
        for (int k = 0; k < game.n; ++k) r(k) = ud(rng);

    const std::size_t total = grid_total + randoms.size();
    const std::size_t blocks = std::min<std::size_t>(std::max<std::size_t>(total, 1), 512);
    struct Best {
        double f = -1;
        RVector th;
        long analytic_failures = 0;
    };
    std::vector<Best> best(blocks);
    auto sample = [&](std::size_t idx) {
        RVector th(game.n);
        if (idx < grid_total) {
            std::size_t r = idx;
            for (int k = game.n - 1; k >= 0; --k) {
                th(k) = spec.grid_per_axis == 1 ? 0.0 : kPi * static_cast<double>(r % spec.grid_per_axis) / (spec.grid_per_axis - 1);
                r /= spec.grid_per_axis;
            }
        } else {
            th = randoms[idx - grid_total];
        }
        return th;
    };
    parallel_for(blocks, spec.workers, [&](std::size_t b) {
        for (std::size_t idx = b * total / blocks; idx < (b + 1) * total / blocks; ++idx) {
            RVector th = sample(idx);
            std::vector<cplx> zs;
            double f = prob.objective(th, &zs);
            if (f > best[b].f) best[b] = {f, th, best[b].analytic_failures};
            if (analytic) {
                for (int k = 0; k < d; ++k) {
                    double bound;
                    if (k == 0 || k == d - 1) {
                        const XorEntry* e0 = game.find(0);
                        bound = std::abs(e0->prob * e0->sign - c * prob.diag[k]) + (1 - e0->prob);
                    } else {
                        double a = std::abs(scoring_entry(game, zs, k));
                        if (a > std::sqrt(2.0) / 2 + 1e-12) ++best[b].analytic_failures;
                        bound = a + c;
                    }
                    if (bound > q - c + 1e-9) ++best[b].analytic_failures;
                }
            }
        }
    });

    std::vector<std::pair<double, RVector>> ranked;
    long analytic_failures = 0;
    for (auto& b : best) {
        if (b.f >= 0) ranked.emplace_back(b.f, b.th);
        analytic_failures += b.analytic_failures;
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.first > y.first; });

    std::vector<RVector> starts;
    const int from_top = spec.multistarts / 2;
    for (int i = 0; i < from_top && i < static_cast<int>(ranked.size()); ++i) starts.push_back(ranked[i].second);
    while (static_cast<int>(starts.size()) < spec.multistarts) {
        RVector r(game.n);
        for (int k = 0; k < game.n; ++k) r(k) = ud(rng);
        starts.push_back(r);
    }
    std::vector<RVector> refined(starts.size());
    parallel_for(starts.size(), spec.workers, [&](std::size_t i) { refined[i] = pattern_search(prob, starts[i]); });

    double fmax = -1;
    RVector arg;
    for (const auto& r : ranked)
        if (r.first > fmax) fmax = r.first, arg = r.second;
    for (const auto& r : refined) {
        double f = prob.objective(r);
        if (f > fmax) fmax = f, arg = r;
    }
    TrustCheckResult out;
    out.max_violation = fmax - (q - c);
    out.pass = out.max_violation <= 1e-9;
    for (int k = 0; k < game.n; ++k) out.witness.push_back(std::polar(1.0, arg(k)));
    out.samples = static_cast<long>(total + starts.size());
    out.analytic_checked = analytic;
    out.analytic_failures = analytic_failures;
    return out;
}

TrustSearchResult trust_coefficient_search(const XorGame& game, double q, const TrustSampleSpec& verify_spec,
                                           const TrustSampleSpec& search_spec) {
    const int free = (1 << game.n) / 4;
    std::size_t combos = 1;
    for (int k = 0; k < free; ++k) combos *= 8;

    std::vector<double> best_c(combos, 0.0);
    for (std::size_t idx = 0; idx < combos; ++idx) {
        std::vector<cplx> ph(free);
        std::size_t r = idx;
        for (int k = 0; k < free; ++k) {
            ph[k] = std::polar(1.0, kPi * static_cast<double>(r % 8) / 4);
            r /= 8;
        }
        CMatrix N = reverse_diagonal_anticommuter(game.n, ph);
        double lo = 0, hi = q;
        if (!trust_coefficient_check(game, lo, N, q, search_spec).pass) {
            best_c[idx] = -1;
            continue;
        }
        for (int it = 0; it < 20; ++it) {
            double mid = (lo + hi) / 2;
            (trust_coefficient_check(game, mid, N, q, search_spec).pass ? lo : hi) = mid;
        }
        best_c[idx] = lo;
    }
    std::size_t arg = std::max_element(best_c.begin(), best_c.end()) - best_c.begin();
    std::vector<cplx> ph(free);
    std::size_t r = arg;
    for (int k = 0; k < free; ++k) {
        ph[k] = std::polar(1.0, kPi * static_cast<double>(r % 8) / 4);
        r /= 8;
    }
    CMatrix N = reverse_diagonal_anticommuter(game.n, ph);

    // Step down from the sampled optimum until the full sample spec agrees.
    double c = std::max(0.0, best_c[arg] - 1e-3);
    TrustCheckResult v = trust_coefficient_check(game, c, N, q, verify_spec);
    while (!v.pass && c > 0) {
        c = std::max(0.0, c - 1e-3);
        v = trust_coefficient_check(game, c, N, q, verify_spec);
    }
    return {std::min(c, q), N, ph, static_cast<long>(combos), v};
}

GameConstants ghz_constants() {
    RVector m(4);
    m << 0, kPi / 2, kPi / 2, kPi / 2;
    return {"ghz", 1.0, 1.0, 0.0, m, SelfTestClass::strong_self_test, 0.14, "analytic"};
}

GameConstants analyze_game(const XorGame& game, const std::string& name, int workers) {
    ScoreResult s = optimal_score(game, workers);
    Classification cl = classify_selftest(game, s.q);
    GameConstants g{name, s.q, (1 + s.q) / 2, (1 - s.q) / 2, s.maximizer, cl.cls, 0.0, "none"};
    if (cl.cls != SelfTestClass::strong_self_test) return g;
    int b = positive_alignment(game, cl.maxima);
    if (b < 0) return g;
    TrustSampleSpec spec;
    spec.workers = workers;
    TrustSearchResult t = trust_coefficient_search(relabel_signs(game, static_cast<unsigned>(b)), s.q, spec);
    g.vG_lower = t.v_lower;
    g.vG_source = "sampled search";
    return g;
}

}  // namespace diqr
