#include "diqr/matrixcore.hpp"

namespace diqr {

CMatrix pauli_x() {
    CMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

CMatrix pauli_y() {
    CMatrix m(2, 2);
    m << 0, cplx(0, -1), cplx(0, 1), 0;
    return m;
}

CMatrix pauli_z() {
    CMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

CMatrix identity(int dim) { return CMatrix::Identity(dim, dim); }

CMatrix partial_trace_right(const CMatrix& a, int left, int right) {
    if (a.rows() != left * right || a.cols() != left * right) throw std::invalid_argument("partial trace shape");
    CMatrix out = CMatrix::Zero(left, left);
    for (int i = 0; i < left; ++i)
        for (int j = 0; j < left; ++j)
            for (int k = 0; k < right; ++k) out(i, j) += a(i * right + k, j * right + k);
    return out;
}

CMatrix partial_trace_left(const CMatrix& a, int left, int right) {
    if (a.rows() != left * right || a.cols() != left * right) throw std::invalid_argument("partial trace shape");
    CMatrix out = CMatrix::Zero(right, right);
    for (int k = 0; k < left; ++k) out += a.block(k * right, k * right, right, right);
    return out;
}

CMatrix random_ginibre(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> nd(0.0, 1.0);
    CMatrix g(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) g(i, j) = cplx(nd(rng), nd(rng));
    return g;
}

CMatrix random_hermitian(std::mt19937_64& rng, int dim) {
    CMatrix g = random_ginibre(rng, dim, dim);
    return (g + g.adjoint()) / 2.0;
}

CMatrix random_psd(std::mt19937_64& rng, int dim, int rank) {
    CMatrix g = random_ginibre(rng, dim, rank);
    return g * g.adjoint();
}

CMatrix random_density(std::mt19937_64& rng, int dim, int rank) {
    CMatrix p = random_psd(rng, dim, rank);
    return p / p.trace().real();
}

CMatrix random_unitary(std::mt19937_64& rng, int dim) {
    CMatrix g = random_ginibre(rng, dim, dim);
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < dim; ++i) {
        cplx d = r(i, i);
        q.col(i) *= std::abs(d) > 0 ? d / std::abs(d) : cplx(1);
    }
    return q;
}

}  // namespace diqr
