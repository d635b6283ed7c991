#include "diqr/devices.hpp"

#include <cmath>
#include <stdexcept>

namespace diqr {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t sample_index(const std::vector<double>& probs, std::mt19937_64& rng) {
    double u = uniform01(rng), acc = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    // rounding left u above the total mass; fall back to the last nonzero entry
    for (std::size_t i = probs.size(); i-- > 0;)
        if (probs[i] > 0) return i;
    return 0;
}

CMatrix binary_projector(const CMatrix& observable, int outcome) {
    const CMatrix id = CMatrix::Identity(observable.rows(), observable.cols());
    return (id + (outcome == 0 ? 1.0 : -1.0) * observable) / 2.0;
}

unsigned strategy_output(const std::vector<std::array<int, 2>>& strategy, unsigned input) {
    const int n = static_cast<int>(strategy.size());
    unsigned out = 0;
    for (int k = 0; k < n; ++k) {
        int x = (input >> (n - 1 - k)) & 1u;
        out |= static_cast<unsigned>(strategy[k][x] & 1) << (n - 1 - k);
    }
    return out;
}

// Lifts an operator on Q to Q ⊗ E.
CMatrix lift(const PartiallyTrustedBehavior& b, const CMatrix& on_q) { return kron(on_q, identity(b.env_dim)); }

CMatrix rotate(const PartiallyTrustedBehavior& b, const CMatrix& rho, std::size_t round) {
    if (b.round_unitaries.empty()) return rho;
    CMatrix U = lift(b, b.round_unitaries[round % b.round_unitaries.size()]);
    return U * rho * U.adjoint();
}

CMatrix t0_observable(const PartiallyTrustedBehavior& b) { return kron(pauli_x(), identity(b.aux_dim)); }
CMatrix t1_observable(const PartiallyTrustedBehavior& b) { return kron(pauli_z(), identity(b.aux_dim)); }

CMatrix project(const PartiallyTrustedBehavior& b, const CMatrix& rho, const CMatrix& observable, int outcome) {
    CMatrix P = lift(b, binary_projector(observable, outcome));
    return P * rho * P;
}

CMatrix env_marginal(const PartiallyTrustedBehavior& b, const CMatrix& joint) {
    return partial_trace_left(joint, b.q_dim(), b.env_dim);
}

}  // namespace

HonestBehavior HonestBehavior::make(CVector state, std::vector<std::array<CMatrix, 2>> observables) {
    const int n = static_cast<int>(observables.size());
    if (n < 1 || n > 4) throw std::invalid_argument("honest device needs 1 to 4 components");
    if (state.size() != (1 << n)) throw std::invalid_argument("state dimension must be 2^n");
    if (std::abs(state.norm() - 1) > 1e-9) throw std::invalid_argument("state must be normalized");
    for (const auto& pair : observables)
        for (const auto& o : pair) {
            if (o.rows() != 2 || o.cols() != 2) throw std::invalid_argument("observables act on a qubit");
            if (!is_hermitian(o, 1e-9)) throw std::invalid_argument("observable is not Hermitian");
            if (max_abs(o * o - identity(2)) > 1e-9) throw std::invalid_argument("observable must square to identity");
        }
    HonestBehavior b{std::move(state), std::move(observables), {}};
    const unsigned dim = 1u << n;
    b.outcome_probs.assign(dim, std::vector<double>(dim, 0.0));
    for (unsigned x = 0; x < dim; ++x)
        for (unsigned o = 0; o < dim; ++o) {
            CMatrix P = identity(1);
            for (int k = 0; k < n; ++k) {
                int xk = (x >> (n - 1 - k)) & 1u, ok = (o >> (n - 1 - k)) & 1u;
                P = kron(P, binary_projector(b.observables[k][xk], ok));
            }
            b.outcome_probs[x][o] = (P * b.state).squaredNorm();
        }
    return b;
}

void PartiallyTrustedBehavior::validate() const {
    if (!(v > 0 && v <= 1)) throw std::invalid_argument("v must lie in (0, 1]");
    if (!(h >= 0 && v + h <= 1 + 1e-12)) throw std::invalid_argument("need h >= 0 and v + h <= 1");
    if (aux_dim < 1 || env_dim < 1) throw std::invalid_argument("dimensions must be positive");
    if (q_dim() * env_dim > kMaxDim) throw std::invalid_argument("joint register exceeds dimension 64");
    if (state.size() != q_dim() * env_dim) throw std::invalid_argument("state dimension must be dim(Q) dim(E)");
    if (std::abs(state.norm() - 1) > 1e-9) throw std::invalid_argument("state must be normalized");
    if (dishonest.rows() != q_dim() || dishonest.cols() != q_dim()) throw std::invalid_argument("N must act on Q");
    if (!is_hermitian(dishonest, 1e-9) || operator_norm(dishonest) > 1 + 1e-9)
        throw std::invalid_argument("N must be Hermitian with norm at most 1");
    for (const auto& u : round_unitaries)
        if (u.rows() != q_dim() || max_abs(u * u.adjoint() - identity(q_dim())) > 1e-9)
            throw std::invalid_argument("round unitaries must be unitary on Q");
    CMatrix t0 = t0_observable(*this), t1 = t1_observable(*this);
    if (max_abs(t0 * t1 + t1 * t0) > 1e-9) throw std::invalid_argument("trusted pair does not anticommute");
}

int components(const DeviceBehavior& b) {
    return std::visit(
        [](const auto& d) -> int {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, HonestBehavior>) return d.n();
            else if constexpr (std::is_same_v<T, NoisyHonestBehavior>) return d.base.n();
            else if constexpr (std::is_same_v<T, PartiallyTrustedBehavior>) return 1;
            else return d.n;
        },
        b);
}

DeviceState initial_state(const DeviceBehavior& b) {
    DeviceState s;
    if (const auto* pt = std::get_if<PartiallyTrustedBehavior>(&b)) {
        pt->validate();
        s.rho = pt->state * pt->state.adjoint();
    }
    return s;
}

DeviceBehavior ghz_honest_device() {
    CVector psi = CVector::Zero(8);
    psi(0) = psi(7) = 1 / std::sqrt(2.0);
    std::vector<std::array<CMatrix, 2>> obs(3, {pauli_x(), pauli_y()});
    return HonestBehavior::make(psi, obs);
}

std::vector<std::array<int, 2>> ghz_classical_strategy() { return {{1, 1}, {1, 1}, {1, 1}}; }

CMatrix partially_trusted_branch(const PartiallyTrustedBehavior& b, const CMatrix& rho, std::size_t round, int input,
                                 int output) {
    CMatrix r = rotate(b, rho, round);
    if (input == 0) return project(b, r, t0_observable(b), output);
    CMatrix out = b.v * project(b, r, t1_observable(b), output);
    if (b.v + b.h < 1) out += (1 - b.v - b.h) * project(b, r, b.dishonest, output);
    if (b.h > 0) out += (b.h / 2) * r;
    return out;
}

CMatrix trusted_t1_branch(const PartiallyTrustedBehavior& b, const CMatrix& rho, std::size_t round, int output) {
    return project(b, rotate(b, rho, round), t1_observable(b), output);
}

PartialResponse partially_trusted_respond(DeviceState& state, const PartiallyTrustedBehavior& b, int input,
                                          std::mt19937_64& rng) {
    if (input != 0 && input != 1) throw std::invalid_argument("partially trusted device takes one input bit");
    const std::size_t round = state.history.size();
    CMatrix r = rotate(b, state.rho, round);
    TrustBranch branch = TrustBranch::generation;
    CMatrix post[2];
    if (input == 0) {
        for (int o = 0; o < 2; ++o) post[o] = project(b, r, t0_observable(b), o);
    } else {
        branch = static_cast<TrustBranch>(sample_index({b.v, 1 - b.v - b.h, b.h}, rng));
        for (int o = 0; o < 2; ++o) {
            if (branch == TrustBranch::trusted) post[o] = project(b, r, t1_observable(b), o);
            else if (branch == TrustBranch::dishonest) post[o] = project(b, r, b.dishonest, o);
            else post[o] = r / 2.0;
        }
    }
    double p0 = std::max(0.0, post[0].trace().real()), p1 = std::max(0.0, post[1].trace().real());
    int out = static_cast<int>(sample_index({p0 / (p0 + p1), p1 / (p0 + p1)}, rng));
    state.rho = post[out] / post[out].trace().real();
    state.history.push_back({static_cast<unsigned>(input), static_cast<unsigned>(out)});
    return {out, branch};
}

unsigned respond(DeviceState& state, const DeviceBehavior& behavior, unsigned input, std::mt19937_64& rng) {
    if (input >= (1u << components(behavior))) throw std::invalid_argument("input has the wrong length");
    unsigned out = std::visit(
        [&](const auto& d) -> unsigned {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, HonestBehavior>) {
                return static_cast<unsigned>(sample_index(d.outcome_probs[input], rng));
            } else if constexpr (std::is_same_v<T, NoisyHonestBehavior>) {
                const unsigned dim = 1u << d.base.n();
                if (uniform01(rng) < d.p) {
                    if (d.kind == NoiseKind::uniform_output) return static_cast<unsigned>(rng() % dim);
                    return strategy_output(d.strategy, input);
                }
                return static_cast<unsigned>(sample_index(d.base.outcome_probs[input], rng));
            } else if constexpr (std::is_same_v<T, PartiallyTrustedBehavior>) {
                auto r = partially_trusted_respond(state, d, static_cast<int>(input), rng);
                state.history.pop_back();
                return static_cast<unsigned>(r.output);
            } else {
                if (d.program) return d.program(state.history, input) & ((1u << d.n) - 1);
                if (d.table.empty()) throw std::invalid_argument("adversarial device has no program");
                const auto& row = d.table[std::min(state.history.size(), d.table.size() - 1)];
                return row.at(input) & ((1u << d.n) - 1);
            }
        },
        behavior);
    state.history.push_back({input, out});
    return out;
}

std::vector<double> output_distribution(const DeviceState& state, const DeviceBehavior& behavior, unsigned input) {
    const unsigned dim = 1u << components(behavior);
    return std::visit(
        [&](const auto& d) -> std::vector<double> {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, HonestBehavior>) {
                return d.outcome_probs[input];
            } else if constexpr (std::is_same_v<T, NoisyHonestBehavior>) {
                std::vector<double> p(dim);
                for (unsigned o = 0; o < dim; ++o) p[o] = (1 - d.p) * d.base.outcome_probs[input][o];
                if (d.kind == NoiseKind::uniform_output)
                    for (auto& x : p) x += d.p / dim;
                else
                    p[strategy_output(d.strategy, input)] += d.p;
                return p;
            } else if constexpr (std::is_same_v<T, PartiallyTrustedBehavior>) {
                const std::size_t round = state.history.size();
                double p0 = partially_trusted_branch(d, state.rho, round, input, 0).trace().real();
                double p1 = partially_trusted_branch(d, state.rho, round, input, 1).trace().real();
                return {p0 / (p0 + p1), p1 / (p0 + p1)};
            } else {
                std::vector<double> p(dim, 0.0);
                DeviceState copy = state;
                std::mt19937_64 unused;
                p[respond(copy, behavior, input, unused)] = 1;
                return p;
            }
        },
        behavior);
}

void condition(DeviceState& state, const DeviceBehavior& behavior, unsigned input, unsigned output) {
    if (const auto* pt = std::get_if<PartiallyTrustedBehavior>(&behavior)) {
        CMatrix post = partially_trusted_branch(*pt, state.rho, state.history.size(), static_cast<int>(input),
                                                static_cast<int>(output));
        double tr = post.trace().real();
        if (!(tr > 0)) throw std::invalid_argument("conditioning on a zero-probability outcome");
        state.rho = post / tr;
    }
    state.history.push_back({input, output});
}

PartiallyTrustedBehavior random_partially_trusted(std::mt19937_64& rng, double v, double h, int aux_dim, int env_dim,
                                                  int rounds_with_unitaries) {
    PartiallyTrustedBehavior b;
    b.v = v;
    b.h = h;
    b.aux_dim = aux_dim;
    b.env_dim = env_dim;
    const int dq = b.q_dim();
    CMatrix g = random_ginibre(rng, dq * env_dim, 1);
    b.state = g.col(0) / g.norm();
    CMatrix U = random_unitary(rng, dq);
    RVector signs(dq);
    for (int i = 0; i < dq; ++i) signs(i) = (rng() & 1) ? 1.0 : -1.0;
    b.dishonest = U * signs.cast<cplx>().asDiagonal() * U.adjoint();
    b.dishonest = (b.dishonest + b.dishonest.adjoint()) / 2.0;
    for (int i = 0; i < rounds_with_unitaries; ++i) b.round_unitaries.push_back(random_unitary(rng, dq));
    b.validate();
    return b;
}

std::array<double, 4> entanglement_bound_gaps(const PartiallyTrustedBehavior& b) {
    b.validate();
    const CMatrix joint = b.state * b.state.adjoint();
    const CMatrix rho = env_marginal(b, joint);
    const CMatrix r0 = env_marginal(b, trusted_t1_branch(b, joint, 0, 0));
    const CMatrix r1 = env_marginal(b, trusted_t1_branch(b, joint, 0, 1));
    const CMatrix rp = env_marginal(b, partially_trusted_branch(b, joint, 0, 1, 0));
    const CMatrix rf = env_marginal(b, partially_trusted_branch(b, joint, 0, 1, 1));
    auto gap = [](const CMatrix& m) { return min_eigenvalue(CMatrix((m + m.adjoint()) / 2.0)); };
    return {gap(rp - (b.h / 2) * rho - b.v * r0), gap((1 - b.h / 2) * rho - b.v * r1 - rp),
            gap(rf - (b.h / 2) * rho - b.v * r1), gap((1 - b.h / 2) * rho - b.v * r0 - rf)};
}

namespace {

struct DeviationSearch {
    const DeviceBehavior& cand;
    const DeviceBehavior& ideal;
    const std::vector<double>& input_probs;
    int horizon;
    double best = 0;

    double round_distance(const DeviceState& sc, const DeviceState& si) const {
        double d = 0;
        for (unsigned x = 0; x < input_probs.size(); ++x) {
            if (input_probs[x] <= 0) continue;
            auto pc = output_distribution(sc, cand, x), pi = output_distribution(si, ideal, x);
            double l1 = 0;
            for (std::size_t o = 0; o < pc.size(); ++o) l1 += std::abs(pc[o] - pi[o]);
            d += input_probs[x] * l1;
        }
        return d;
    }

    // acc is the sum of distances for rounds before `depth`.
    void run(const DeviceState& sc, const DeviceState& si, int depth, double acc) {
        const double here = acc + round_distance(sc, si);
        if (depth == horizon) {
            best = std::max(best, here / (horizon + 1));
            return;
        }
        for (unsigned x = 0; x < input_probs.size(); ++x) {
            if (input_probs[x] <= 0) continue;
            auto pc = output_distribution(sc, cand, x);
            for (unsigned o = 0; o < pc.size(); ++o) {
                if (pc[o] <= 1e-15) continue;
                DeviceState nc = sc, ni = si;
                condition(nc, cand, x, o);
                auto pi = output_distribution(si, ideal, x);
                // the ideal device may never produce o; its later behavior is then taken unconditioned
                if (pi[o] > 1e-15) condition(ni, ideal, x, o);
                else ni.history.push_back({x, o});
                run(nc, ni, depth + 1, here);
            }
        }
    }
};

}  // namespace

double deviation(const DeviceBehavior& candidate, const DeviceBehavior& ideal, const std::vector<double>& input_probs,
                 int horizon) {
    const int n = components(candidate);
    if (components(ideal) != n) throw std::invalid_argument("devices differ in component count");
    if (input_probs.size() != (1u << n)) throw std::invalid_argument("input distribution needs 2^n entries");
    if (horizon < 0 || horizon > 3) throw std::invalid_argument("horizon must lie in [0, 3]");
    DeviationSearch s{candidate, ideal, input_probs, horizon};
    s.run(initial_state(candidate), initial_state(ideal), 0, 0.0);
    return s.best;
}

}  // namespace diqr
