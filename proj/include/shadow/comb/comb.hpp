#pragma once

#include "shadow/layout.hpp"
#include "shadow/random.hpp"
#include "shadow/rep/schur.hpp"

#include <optional>
#include <string>
#include <vector>

namespace shadow::comb {

enum class Architecture { Sequential, Parallel };

std::string to_string(Architecture a);
Architecture architecture_from_string(const std::string& s);

struct CombSpec {
    int d = 2;
    int t = 1;
    Architecture architecture = Architecture::Sequential;

    CombSpec() = default;
    CombSpec(int d_, int t_, Architecture a);
    // (P, I_1, O_1, ..., I_t, O_t, F) for sequential,
    // (P, I_1..I_t, O_1..O_t, F) for parallel; every dim is d.
    SubsystemLayout layout() const;
};

struct CombChoi {
    CombSpec spec;
    IndexedOperator op;

    CombChoi() = default;
    CombChoi(CombSpec s, IndexedOperator o);
};

struct Observable {
    CMatrix matrix;

    explicit Observable(CMatrix m);
    const rep::SpectralDecomposition& decomposition() const; // lazy

private:
    mutable std::optional<rep::SpectralDecomposition> spec_;
};

struct ValidationReport {
    struct Entry {
        std::string constraint;
        double residual;
    };
    std::vector<Entry> entries;
    double tolerance = 1e-8;

    double max_residual() const;
    bool ok() const { return max_residual() <= tolerance; }
};

ValidationReport validate_sequential_comb(const IndexedOperator& c, double tol = 1e-8);
ValidationReport validate_parallel_comb(const IndexedOperator& c, double tol = 1e-8);
ValidationReport validate_comb(const CombChoi& c, double tol = 1e-8);

// Random comb from Haar isometric encoders and a decoder with a traced
// Stinespring environment. aux_dim defaults to d^2.
CombChoi random_comb(const CombSpec& spec, Rng& rng, int aux_dim = -1);

// Choi of the channel induced by plugging t copies of u into the comb,
// on labels (P, F).
IndexedOperator apply_comb(const CombChoi& c, const CMatrix& u);

// Dual map on an observable: N^dag(O) = tr_F[Choi^T (I_P (x) O^T)].
CMatrix dual_on_observable(const IndexedOperator& channel_choi, const CMatrix& o);

// || N_u^dag(O) - u O u^dag ||_F
double shadow_residual(const CombChoi& c, const CMatrix& o, const CMatrix& u);

// Monte-Carlo mean of the shadow residual over Haar unitaries.
double objective_estimate(const CombChoi& c, const CMatrix& o, int n_samples, Rng rng);

std::string comb_to_json(const CombChoi& c);
CombChoi comb_from_json(const std::string& text);
void save_comb(const CombChoi& c, const std::string& path);
CombChoi load_comb(const std::string& path);

} // namespace shadow::comb
