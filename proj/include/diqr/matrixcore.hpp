#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <random>
#include <stdexcept>

namespace diqr {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using cplx = std::complex<double>;
using CMatrix = Matrix<cplx>;
using CVector = Vector<cplx>;
using RMatrix = Matrix<double>;
using RVector = Vector<double>;

inline constexpr int kMaxDim = 64;
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& a, double tol = kHermitianTol) {
    if (a.rows() != a.cols()) return false;
    return max_abs(a - a.adjoint()) <= tol * std::max(1.0, max_abs(a));
}

template <typename Derived>
void require_operator(const Eigen::MatrixBase<Derived>& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("operator must be square");
    if (a.rows() == 0 || a.rows() > kMaxDim) throw std::invalid_argument("operator dimension outside [1, 64]");
}

template <typename Derived>
void require_hermitian(const Eigen::MatrixBase<Derived>& a) {
    require_operator(a);
    if (!is_hermitian(a)) throw std::invalid_argument("operator is not Hermitian");
}

template <typename Scalar>
struct EigenDecomposition {
    RVector values;  // ascending
    Matrix<Scalar> vectors;
};

// Hermitian eigendecomposition. Input is symmetrized after the check.
template <typename Derived>
auto eig_hermitian(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    require_hermitian(a);
    Matrix<Scalar> sym = (a + a.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(sym);
    return EigenDecomposition<Scalar>{es.eigenvalues(), es.eigenvectors()};
}

template <typename Scalar, typename F>
Matrix<Scalar> apply_spectral(const EigenDecomposition<Scalar>& e, F&& f) {
    RVector mapped = e.values.unaryExpr(f);
    return e.vectors * mapped.template cast<Scalar>().asDiagonal() * e.vectors.adjoint();
}

// f(A) for Hermitian A.
template <typename Derived, typename F>
auto spectral_map(const Eigen::MatrixBase<Derived>& a, F&& f) {
    return apply_spectral(eig_hermitian(a), std::forward<F>(f));
}

template <typename Derived>
double min_eigenvalue(const Eigen::MatrixBase<Derived>& a) {
    return eig_hermitian(a).values(0);
}

template <typename Derived>
double max_eigenvalue(const Eigen::MatrixBase<Derived>& a) {
    auto e = eig_hermitian(a);
    return e.values(e.values.size() - 1);
}

template <typename Derived>
bool is_psd(const Eigen::MatrixBase<Derived>& a, double tol = kPsdTol) {
    return is_hermitian(a) && min_eigenvalue(a) >= -tol;
}

// A <= B in the Loewner order.
template <typename DA, typename DB>
bool psd_leq(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b, double tol = kPsdTol) {
    return min_eigenvalue(b - a) >= -tol;
}

inline double clamp_psd(double x, double scale) {
    if (x < -kPsdTol * std::max(1.0, scale)) throw std::invalid_argument("operator has a negative eigenvalue");
    return x < 0 ? 0.0 : x;
}

// A^p for PSD A and p > 0, with 0^p = 0.
template <typename Derived>
auto matrix_power(const Eigen::MatrixBase<Derived>& a, double p) {
    if (!(p > 0)) throw std::invalid_argument("matrix_power needs p > 0");
    auto e = eig_hermitian(a);
    const double scale = e.values.cwiseAbs().maxCoeff();
    return apply_spectral(e, [&](double x) {
        double c = clamp_psd(x, scale);
        return c == 0.0 ? 0.0 : std::pow(c, p);
    });
}

// Tr(A^p) for PSD A.
template <typename Derived>
double trace_power(const Eigen::MatrixBase<Derived>& a, double p) {
    auto e = eig_hermitian(a);
    const double scale = e.values.cwiseAbs().maxCoeff();
    double s = 0;
    for (double x : e.values) {
        double c = clamp_psd(x, scale);
        if (c > 0) s += std::pow(c, p);
    }
    return s;
}

template <typename Derived>
RVector singular_values(const Eigen::MatrixBase<Derived>& a) {
    return Eigen::JacobiSVD<Matrix<typename Derived::Scalar>>(a).singularValues();
}

// Schatten p-norm; p = kInf gives the operator norm.
template <typename Derived>
double schatten_norm(const Eigen::MatrixBase<Derived>& a, double p) {
    if (!(p >= 1)) throw std::invalid_argument("schatten_norm needs p >= 1");
    RVector s = singular_values(a);
    if (s.size() == 0) return 0.0;
    const double smax = s.maxCoeff();
    if (std::isinf(p) || smax == 0.0) return smax;
    return smax * std::pow((s / smax).array().pow(p).sum(), 1.0 / p);
}

template <typename Derived>
double operator_norm(const Eigen::MatrixBase<Derived>& a) {
    return schatten_norm(a, kInf);
}

template <typename DA, typename DB>
CMatrix kron(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                cplx(a(i, j)) * b.template cast<cplx>();
    return out;
}

CMatrix pauli_x();
CMatrix pauli_y();
CMatrix pauli_z();
CMatrix identity(int dim);

// Partial trace over the right factor of C^{left} ⊗ C^{right}.
CMatrix partial_trace_right(const CMatrix& a, int left, int right);
// Partial trace over the left factor.
CMatrix partial_trace_left(const CMatrix& a, int left, int right);

CMatrix random_ginibre(std::mt19937_64& rng, int rows, int cols);
CMatrix random_hermitian(std::mt19937_64& rng, int dim);
// Random PSD of rank <= rank (rank = dim gives full rank almost surely).
CMatrix random_psd(std::mt19937_64& rng, int dim, int rank);
CMatrix random_density(std::mt19937_64& rng, int dim, int rank);
CMatrix random_unitary(std::mt19937_64& rng, int dim);

}  // namespace diqr
