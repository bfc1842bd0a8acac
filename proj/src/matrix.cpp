#include "shadow/matrix.hpp"

#include <Eigen/Eigenvalues>

namespace shadow {

bool approx_equal(const CMatrix& a, const CMatrix& b, double tol) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    return (a - b).cwiseAbs().maxCoeff() <= tol;
}

bool is_hermitian(const CMatrix& a, double tol) {
    if (a.rows() != a.cols()) return false;
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const CMatrix& a, double tol) {
    if (a.rows() != a.cols()) return false;
    CMatrix g = a.adjoint() * a;
    g.diagonal().array() -= 1.0;
    return g.cwiseAbs().maxCoeff() <= tol;
}

double min_eigenvalue(const CMatrix& hermitian) {
    CMatrix h = 0.5 * (hermitian + hermitian.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

bool is_psd(const CMatrix& a, double tol) {
    if (!is_hermitian(a, std::max(tol, 1e-8))) return false;
    return min_eigenvalue(a) >= -tol;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

RMatrix kron_real(const RMatrix& a, const RMatrix& b) {
    RMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CVector choi_vector(const CMatrix& u) {
    if (u.rows() != u.cols() && u.cols() == 0) throw std::invalid_argument("choi_vector: empty operator");
    const Eigen::Index din = u.cols(), dout = u.rows();
    CVector v(din * dout);
    for (Eigen::Index i = 0; i < din; ++i)
        for (Eigen::Index k = 0; k < dout; ++k) v(i * dout + k) = u(k, i);
    return v;
}

CMatrix choi_of_pair(const CMatrix& a, const CMatrix& b) {
    CVector va = choi_vector(a), vb = choi_vector(b);
    return va * vb.adjoint();
}

CMatrix switch_operator(int dim_a, int dim_b) {
    CMatrix f = CMatrix::Zero(dim_a * dim_b, dim_b * dim_a);
    for (int a = 0; a < dim_a; ++a)
        for (int b = 0; b < dim_b; ++b) f(a * dim_b + b, b * dim_a + a) = 1.0;
    return f;
}

CMatrix permutation_operator(const std::vector<int>& perm, const std::vector<int>& dims) {
    const size_t n = perm.size();
    if (dims.size() != n) throw std::invalid_argument("permutation_operator: perm/dims length mismatch");
    std::vector<int> inv(n, -1);
    for (size_t j = 0; j < n; ++j) {
        if (perm[j] < 0 || perm[j] >= static_cast<int>(n) || inv[perm[j]] != -1)
            throw std::invalid_argument("permutation_operator: not a permutation");
        inv[perm[j]] = static_cast<int>(j);
    }
    long total = 1;
    for (int d : dims) total *= d;
    // Row basis vector |i_1..i_n> maps to the state whose position k carries
    // the index previously at position inv[k].
    std::vector<int> out_dims(n);
    for (size_t k = 0; k < n; ++k) out_dims[k] = dims[inv[k]];
    CMatrix p = CMatrix::Zero(total, total);
    std::vector<int> idx(n, 0);
    for (long col = 0; col < total; ++col) {
        long row = 0;
        for (size_t k = 0; k < n; ++k) row = row * out_dims[k] + idx[inv[k]];
        p(row, col) = 1.0;
        for (int k = static_cast<int>(n) - 1; k >= 0; --k) {
            if (++idx[k] < dims[k]) break;
            idx[k] = 0;
        }
    }
    return p;
}

namespace {
CMatrix make_pauli(int j) {
    CMatrix m(2, 2);
    const Complex i(0, 1);
    switch (j) {
        case 0: m << 1, 0, 0, 1; break;
        case 1: m << 0, 1, 1, 0; break;
        case 2: m << 0, -i, i, 0; break;
        case 3: m << 1, 0, 0, -1; break;
        default: throw std::invalid_argument("pauli index out of range");
    }
    return m;
}
} // namespace

const CMatrix& pauli_i() { static const CMatrix m = make_pauli(0); return m; }
const CMatrix& pauli_x() { static const CMatrix m = make_pauli(1); return m; }
const CMatrix& pauli_y() { static const CMatrix m = make_pauli(2); return m; }
const CMatrix& pauli_z() { static const CMatrix m = make_pauli(3); return m; }

const CMatrix& pauli(int j) {
    switch (j) {
        case 0: return pauli_i();
        case 1: return pauli_x();
        case 2: return pauli_y();
        case 3: return pauli_z();
        default: throw std::invalid_argument("pauli index out of range");
    }
}

const CMatrix& hadamard() {
    static const CMatrix h = [] {
        CMatrix m(2, 2);
        const double s = 1.0 / std::sqrt(2.0);
        m << s, s, s, -s;
        return m;
    }();
    return h;
}

} // namespace shadow
