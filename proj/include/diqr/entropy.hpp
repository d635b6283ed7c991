#pragma once

#include <string>
#include <vector>

#include "diqr/matrixcore.hpp"

namespace diqr {

// Block-diagonal classical-quantum operator: one subnormalized PSD block per label.
struct CqState {
    std::vector<std::string> labels;
    std::vector<CMatrix> blocks;

    double trace() const;
    int block_dim() const { return blocks.empty() ? 0 : static_cast<int>(blocks.front().rows()); }
    CMatrix to_operator() const;
    // Checks equal block sizes, PSD blocks and total trace in [0, 1 + 1e-9].
    void validate() const;
};

struct SupportViolation : std::invalid_argument {
    double overlap;
    explicit SupportViolation(double overlap);
};

// D_alpha in bits, normalized by Tr(rho), for alpha in (1, 2].
double renyi_divergence(const CMatrix& rho, const CMatrix& sigma, double alpha);
// Block-wise version; sigma_blocks pairs with rho.blocks.
double renyi_divergence(const CqState& rho, const std::vector<CMatrix>& sigma_blocks, double alpha);
// Tr[(sigma^s rho sigma^s)^alpha] with s = (1-alpha)/(2 alpha), unnormalized.
// Block-wise D_alpha against sigma_x = 2^{log2_weights[x]} sigma_blocks[x]; the
// weights stay in the log domain, so factors like 2^{1/(q r)} cannot overflow.
double renyi_divergence_scaled(const CqState& rho, const std::vector<CMatrix>& sigma_blocks,
                               const std::vector<double>& log2_weights, double alpha);
double sandwiched_trace(const CMatrix& rho, const CMatrix& sigma, double alpha);

double dmax(const CMatrix& rho, const CMatrix& sigma);
double dmax(const CqState& rho, const std::vector<CMatrix>& sigma_blocks);

struct SmoothResult {
    CqState rho_smoothed;
    double bound;         // D_alpha + (2 log(1/eps) + 1)/(alpha - 1)
    double trace_distance;  // ||rho' - rho||_1
    double dmax_smoothed;   // D_max(rho' || sigma)
};

SmoothResult smooth_from_renyi(const CqState& rho, const std::vector<CMatrix>& sigma_blocks, double alpha,
                               double epsilon);
SmoothResult smooth_from_renyi(const CqState& rho, const CMatrix& sigma, double alpha, double epsilon);

// Z : V -> W ⊗ C^2, rows indexed by w*2 + b.
struct MeasurementInstance {
    CMatrix Z;
    CMatrix rho, rho0, rho1, rho_plus, rho_minus;
};

MeasurementInstance measurement_split(const CMatrix& Z);
MeasurementInstance random_measurement_instance(std::mt19937_64& rng, int dim_v, int dim_w);

struct UncertaintyResult {
    double delta;
    double lhs_ratio;
    double rhs;
    bool holds;
};

UncertaintyResult uncertainty_check(const MeasurementInstance& inst, double epsilon);

struct SchattenResult {
    double lhs;
    double rhs;
    bool holds;
};

SchattenResult schatten_ineq_check(const CMatrix& X, const CMatrix& Y, double p);

// H_alpha(A|B) relative to a caller-supplied sigma_B: -D_alpha(rho_AB || I_A ⊗ sigma_B).
double conditional_renyi_entropy(const CMatrix& rho_ab, int dim_a, int dim_b, const CMatrix& sigma_b, double alpha);
// Coarse maximization over sigma_B = (1-t) rho_B + t I/d_B on a 101-point grid.
double conditional_renyi_entropy_coarse(const CMatrix& rho_ab, int dim_a, int dim_b, double alpha);

// Pinching by a complete family of orthogonal projectors.
CMatrix pinch(const CMatrix& rho, const std::vector<CMatrix>& projectors);
std::vector<CMatrix> random_projective_measurement(std::mt19937_64& rng, int dim, int outcomes);

}  // namespace diqr
