#pragma once

#include "shadow/matrix.hpp"

#include <cstdint>
#include <random>

namespace shadow {

// Seed wrapper: identical seeds reproduce identical sample streams.
struct RngSeed {
    std::uint64_t seed = 42;
};

class Rng {
public:
    explicit Rng(RngSeed s) : engine_(s.seed), seed_(s.seed) {}
    explicit Rng(std::uint64_t s) : engine_(s), seed_(s) {}

    // Derives an independent child stream; never shares engine state.
    Rng fork(std::uint64_t salt) const;

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    std::uint64_t raw() { return engine_(); }
    std::uint64_t seed() const { return seed_; }

    Complex complex_normal() { return Complex(normal(), normal()) / std::sqrt(2.0); }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Ginibre matrix with i.i.d. standard complex normal entries.
CMatrix ginibre(int rows, int cols, Rng& rng);

// Haar-distributed unitary via QR of a Ginibre matrix with the phase
// correction Q <- Q diag(r_ii/|r_ii|).
CMatrix haar_unitary(int d, Rng& rng);

// Haar isometry: first `cols` columns of a Haar unitary of size `rows`.
CMatrix haar_isometry(int rows, int cols, Rng& rng);

// Normalized Wishart state G G^dag / tr(G G^dag).
CMatrix random_density(int d, Rng& rng);

// Rank-1 projector onto a normalized Gaussian vector.
CMatrix random_pure_state(int d, Rng& rng);

} // namespace shadow
