#include "diqr/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "diqr/rates.hpp"

namespace diqr {

double CqState::trace() const {
    double t = 0;
    for (const auto& b : blocks) t += b.trace().real();
    return t;
}

CMatrix CqState::to_operator() const {
    const int d = block_dim();
    CMatrix out = CMatrix::Zero(d * blocks.size(), d * blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) out.block(i * d, i * d, d, d) = blocks[i];
    return out;
}

void CqState::validate() const {
    if (labels.size() != blocks.size()) throw std::invalid_argument("one label per block");
    for (const auto& b : blocks) {
        if (b.rows() != block_dim() || b.cols() != block_dim()) throw std::invalid_argument("blocks differ in size");
        if (!is_psd(b)) throw std::invalid_argument("block is not positive semidefinite");
    }
    double t = trace();
    if (t < -1e-12 || t > 1 + 1e-9) throw std::invalid_argument("total trace outside [0, 1]");
}

SupportViolation::SupportViolation(double o)
    : std::invalid_argument("rho is not supported within sigma (overlap " + std::to_string(o) + ")"), overlap(o) {}

namespace {

struct SupportedPower {
    CMatrix power;      // sigma^s on its support
    CMatrix projector;  // onto the support
};

SupportedPower support_power(const CMatrix& sigma, double s) {
    auto e = eig_hermitian(sigma);
    const double cut = 1e-10 * std::max(1.0, e.values.cwiseAbs().maxCoeff());
    RVector pw(e.values.size()), pr(e.values.size());
    for (Eigen::Index i = 0; i < e.values.size(); ++i) {
        double x = e.values(i);
        if (x < -cut) throw std::invalid_argument("sigma has a negative eigenvalue");
        bool in = x > cut;
        pw(i) = in ? std::pow(x, s) : 0.0;
        pr(i) = in ? 1.0 : 0.0;
    }
    return {e.vectors * pw.cast<cplx>().asDiagonal() * e.vectors.adjoint(),
            e.vectors * pr.cast<cplx>().asDiagonal() * e.vectors.adjoint()};
}

void check_support(const CMatrix& rho, const CMatrix& projector) {
    CMatrix off = CMatrix::Identity(rho.rows(), rho.cols()) - projector;
    CMatrix leak = off * rho * off;
    double overlap = leak.trace().real();
    if (overlap > 1e-10 * std::max(1.0, rho.trace().real())) throw SupportViolation(overlap);
}

void check_alpha(double alpha) {
    if (!(alpha > 1 && alpha <= 2)) throw std::invalid_argument("alpha must lie in (1, 2]");
}

}  // namespace

double sandwiched_trace(const CMatrix& rho, const CMatrix& sigma, double alpha) {
    require_hermitian(rho);
    require_hermitian(sigma);
    if (rho.rows() != sigma.rows()) throw std::invalid_argument("rho and sigma differ in dimension");
    auto sp = support_power(sigma, (1 - alpha) / (2 * alpha));
    check_support(rho, sp.projector);
    CMatrix inner = sp.power * rho * sp.power;
    inner = (inner + inner.adjoint()) / 2.0;
    return trace_power(inner, alpha);
}

double renyi_divergence(const CMatrix& rho, const CMatrix& sigma, double alpha) {
    check_alpha(alpha);
    double tr = rho.trace().real();
    if (!(tr > 0)) throw std::invalid_argument("rho must have positive trace");
    return std::log2(sandwiched_trace(rho, sigma, alpha) / tr) / (alpha - 1);
}

double renyi_divergence(const CqState& rho, const std::vector<CMatrix>& sigma_blocks, double alpha) {
    check_alpha(alpha);
    if (sigma_blocks.size() != rho.blocks.size()) throw std::invalid_argument("sigma needs one block per label");
    double s = 0;
    for (std::size_t i = 0; i < rho.blocks.size(); ++i) {
        if (rho.blocks[i].trace().real() <= 0 && max_abs(rho.blocks[i]) == 0) continue;
        s += sandwiched_trace(rho.blocks[i], sigma_blocks[i], alpha);
    }
    double tr = rho.trace();
    if (!(tr > 0)) throw std::invalid_argument("rho must have positive trace");
    return std::log2(s / tr) / (alpha - 1);
}

double renyi_divergence_scaled(const CqState& rho, const std::vector<CMatrix>& sigma_blocks,
                               const std::vector<double>& log2_weights, double alpha) {
    check_alpha(alpha);
    if (sigma_blocks.size() != rho.blocks.size() || log2_weights.size() != rho.blocks.size())
        throw std::invalid_argument("sigma needs one block and one weight per label");
    // Tr[(sigma_x^s rho_x sigma_x^s)^alpha] picks up w_x^{1 - alpha}; sum in log2 space.
    std::vector<double> logs;
    for (std::size_t i = 0; i < rho.blocks.size(); ++i) {
        if (max_abs(rho.blocks[i]) == 0) continue;
        double t = sandwiched_trace(rho.blocks[i], sigma_blocks[i], alpha);
        if (t > 0) logs.push_back(std::log2(t) + (1 - alpha) * log2_weights[i]);
    }
    double tr = rho.trace();
    if (!(tr > 0) || logs.empty()) throw std::invalid_argument("rho must have positive trace");
    double top = *std::max_element(logs.begin(), logs.end()), acc = 0;
    for (double l : logs) acc += std::exp2(l - top);
    return (top + std::log2(acc) - std::log2(tr)) / (alpha - 1);
}

double dmax(const CMatrix& rho, const CMatrix& sigma) {
    auto sp = support_power(sigma, -0.5);
    check_support(rho, sp.projector);
    CMatrix m = sp.power * rho * sp.power;
    return std::log2(max_eigenvalue((m + m.adjoint()) / 2.0));
}

double dmax(const CqState& rho, const std::vector<CMatrix>& sigma_blocks) {
    double best = -kInf;
    for (std::size_t i = 0; i < rho.blocks.size(); ++i) {
        if (max_abs(rho.blocks[i]) == 0) continue;
        best = std::max(best, dmax(rho.blocks[i], sigma_blocks[i]));
    }
    return best;
}

SmoothResult smooth_from_renyi(const CqState& rho, const std::vector<CMatrix>& sigma_blocks, double alpha,
                               double epsilon) {
    if (!(epsilon > 0 && epsilon <= std::sqrt(2.0) + 1e-15)) throw std::invalid_argument("epsilon must lie in (0, sqrt 2]");
    const double d = renyi_divergence(rho, sigma_blocks, alpha);
    const double bound = d + (2 * std::log2(1 / epsilon) + 1) / (alpha - 1);
    const double scale = std::exp2(bound);

    SmoothResult out{CqState{rho.labels, {}}, bound, 0.0, -kInf};
    double dist = 0;
    for (std::size_t i = 0; i < rho.blocks.size(); ++i) {
        const CMatrix& r = rho.blocks[i];
        CMatrix target = scale * sigma_blocks[i];
        // rho' = G rho G^dagger with G = T^{1/2} (T + (rho - T)_+)^{-1/2}
        CMatrix gap = r - target;
        CMatrix pos = spectral_map(gap, [](double x) { return x > 0 ? x : 0.0; });
        CMatrix t_half = support_power(target, 0.5).power;
        CMatrix inv_half = support_power(target + pos, -0.5).power;
        CMatrix G = t_half * inv_half;
        CMatrix smoothed = G * r * G.adjoint();
        smoothed = (smoothed + smoothed.adjoint()) / 2.0;
        CMatrix delta = smoothed - r;
        dist += singular_values(delta).sum();
        out.rho_smoothed.blocks.push_back(smoothed);
    }
    out.trace_distance = dist;
    out.dmax_smoothed = dmax(out.rho_smoothed, sigma_blocks);
    return out;
}

SmoothResult smooth_from_renyi(const CqState& rho, const CMatrix& sigma, double alpha, double epsilon) {
    return smooth_from_renyi(rho, std::vector<CMatrix>(rho.blocks.size(), sigma), alpha, epsilon);
}

MeasurementInstance measurement_split(const CMatrix& Z) {
    if (Z.rows() % 2 != 0 || Z.cols() == 0) throw std::invalid_argument("Z must map into W ⊗ C^2");
    const int dw = static_cast<int>(Z.rows() / 2);
    auto project = [&](cplx a, cplx b) {
        // rows w*2+0 and w*2+1 combine into <v| (a|0> + b|1>) with v = conj weights
        CMatrix Y = CMatrix::Zero(dw, Z.cols());
        for (int w = 0; w < dw; ++w) Y.row(w) = std::conj(a) * Z.row(2 * w) + std::conj(b) * Z.row(2 * w + 1);
        CMatrix r = Y.adjoint() * Y;
        return CMatrix((r + r.adjoint()) / 2.0);
    };
    const double s = 1 / std::sqrt(2.0);
    MeasurementInstance m;
    m.Z = Z;
    m.rho = Z.adjoint() * Z;
    m.rho = (m.rho + m.rho.adjoint()) / 2.0;
    m.rho0 = project(1, 0);
    m.rho1 = project(0, 1);
    m.rho_plus = project(s, s);
    m.rho_minus = project(s, -s);
    return m;
}

MeasurementInstance random_measurement_instance(std::mt19937_64& rng, int dim_v, int dim_w) {
    CMatrix Z = random_ginibre(rng, 2 * dim_w, dim_v);
    Z /= std::sqrt((Z.adjoint() * Z).trace().real());
    return measurement_split(Z);
}

UncertaintyResult uncertainty_check(const MeasurementInstance& inst, double epsilon) {
    if (!(epsilon > 0 && epsilon <= 1)) throw std::invalid_argument("epsilon must lie in (0, 1]");
    const double a = 1 + epsilon;
    const double base = trace_power(inst.rho, a);
    if (!(base > 0)) throw std::invalid_argument("rho must have positive trace");
    UncertaintyResult r;
    r.delta = std::clamp(trace_power(inst.rho1, a) / base, 0.0, 1.0);
    r.lhs_ratio = (trace_power(inst.rho_plus, a) + trace_power(inst.rho_minus, a)) / base;
    r.rhs = std::exp2(-epsilon * big_pi(epsilon, r.delta));
    r.holds = r.lhs_ratio <= r.rhs + 1e-9;
    return r;
}

SchattenResult schatten_ineq_check(const CMatrix& X, const CMatrix& Y, double p) {
    if (X.rows() != Y.rows() || X.cols() != Y.cols()) throw std::invalid_argument("X and Y differ in shape");
    if (!(p >= 2)) throw std::invalid_argument("p must be at least 2");
    const double r2 = std::sqrt(2.0);
    const double pp = 1 / (1 - 1 / p);
    SchattenResult s;
    s.lhs = std::pow(schatten_norm((X + Y) / r2, p), p) + std::pow(schatten_norm((X - Y) / r2, p), p);
    s.rhs = std::exp2(1 - p / 2) * std::pow(std::pow(schatten_norm(X, p), pp) + std::pow(schatten_norm(Y, p), pp), p / pp);
    s.holds = s.lhs <= s.rhs + 1e-9 * std::max(1.0, s.rhs);
    return s;
}

double conditional_renyi_entropy(const CMatrix& rho_ab, int dim_a, int dim_b, const CMatrix& sigma_b, double alpha) {
    if (rho_ab.rows() != dim_a * dim_b || sigma_b.rows() != dim_b) throw std::invalid_argument("dimension mismatch");
    return -renyi_divergence(rho_ab, kron(identity(dim_a), sigma_b), alpha);
}

double conditional_renyi_entropy_coarse(const CMatrix& rho_ab, int dim_a, int dim_b, double alpha) {
    CMatrix rho_b = partial_trace_left(rho_ab, dim_a, dim_b);
    rho_b /= rho_b.trace();
    double best = -kInf;
    for (int i = 0; i <= 100; ++i) {
        double t = i / 100.0;
        CMatrix s = (1 - t) * rho_b + t * identity(dim_b) / static_cast<double>(dim_b);
        try {
            best = std::max(best, conditional_renyi_entropy(rho_ab, dim_a, dim_b, s, alpha));
        } catch (const SupportViolation&) {
        }
    }
    return best;
}

CMatrix pinch(const CMatrix& rho, const std::vector<CMatrix>& projectors) {
    CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
    for (const auto& p : projectors) out += p * rho * p;
    return out;
}

std::vector<CMatrix> random_projective_measurement(std::mt19937_64& rng, int dim, int outcomes) {
    CMatrix U = random_unitary(rng, dim);
    std::vector<CMatrix> ps(outcomes, CMatrix::Zero(dim, dim));
    for (int i = 0; i < dim; ++i) ps[i % outcomes] += U.col(i) * U.col(i).adjoint();
    return ps;
}

}  // namespace diqr
