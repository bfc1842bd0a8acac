#include "shadow/random.hpp"

#include <Eigen/QR>

namespace shadow {

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
} // namespace

Rng Rng::fork(std::uint64_t salt) const {
    return Rng(splitmix64(seed_ ^ splitmix64(salt + 0x517cc1b727220a95ULL)));
}

CMatrix ginibre(int rows, int cols, Rng& rng) {
    CMatrix g(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) g(i, j) = rng.complex_normal();
    return g;
}

CMatrix haar_unitary(int d, Rng& rng) {
    if (d < 1) throw std::invalid_argument("haar_unitary: d must be >= 1");
    CMatrix g = ginibre(d, d, rng);
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i) {
        Complex rii = r(i, i);
        double a = std::abs(rii);
        q.col(i) *= (a > 0 ? rii / a : Complex(1, 0));
    }
    return q;
}

CMatrix haar_isometry(int rows, int cols, Rng& rng) {
    if (cols > rows) throw std::invalid_argument("haar_isometry: cols must not exceed rows");
    return haar_unitary(rows, rng).leftCols(cols);
}

CMatrix random_density(int d, Rng& rng) {
    CMatrix g = ginibre(d, d, rng);
    CMatrix w = g * g.adjoint();
    return w / w.trace();
}

CMatrix random_pure_state(int d, Rng& rng) {
    CVector v(d);
    for (int i = 0; i < d; ++i) v(i) = rng.complex_normal();
    v.normalize();
    return v * v.adjoint();
}

} // namespace shadow
