#pragma once

#include "shadow/matrix.hpp"
#include "shadow/random.hpp"
#include "shadow/rep/partition.hpp"

#include <string>
#include <vector>

namespace shadow::rep {

// Distinct eigenvalues of a Hermitian matrix with their multiplicities and
// a unitary eigenbasis whose columns are grouped block by block.
struct SpectralDecomposition {
    RVector eigenvalues;             // strictly increasing, one per block
    std::vector<int> multiplicities; // l_1..l_m
    CMatrix eigenvectors;            // d x d unitary, columns grouped by block

    int block_count() const { return static_cast<int>(multiplicities.size()); }
    int dim() const { return static_cast<int>(eigenvectors.rows()); }
    CMatrix reconstruct() const;
};

// Irrep label of U^{(x)(t+1)} (x) V^{(x)t} (x) W with V, W in the
// centralizer of the observable. For a plain U^{(x)n} basis only
// `lambda` is populated.
struct IrrepLabel {
    Partition lambda;                       // U-factor shape
    std::vector<int> composition;           // eigenspace slot counts k_1..k_m
    std::vector<Partition> block_partitions; // per-eigenspace shapes, lambda^(r) |- k_r
    int w_index = -1;                       // eigenspace of the W factor

    bool operator<(const IrrepLabel& o) const;
    bool operator==(const IrrepLabel& o) const;
    std::string to_string() const;
};

struct SchurBlock {
    IrrepLabel label;
    int dim = 0;  // dim V_r
    int mult = 0; // m_r
};

struct SchurColumn {
    int block = 0; // index into blockTable
    int a = 0;     // dimension index, 0-based
    int alpha = 0; // multiplicity index, 0-based
};

// Real unitary change of basis with per-column (r, a, alpha) labels.
// Columns are grouped by (block, multiplicity copy, dimension index), so
// Q^T rho Q is block diagonal with m_r identical dim_r x dim_r blocks.
struct SchurBasis {
    RMatrix q;
    std::vector<SchurColumn> columns;
    std::vector<SchurBlock> blocks;

    long total_dim() const { return q.rows(); }
    long variable_count() const; // sum of m_r^2
    void check_consistent() const;
};

// Schur basis of U^{(x)n} on (C^d)^{(x)n}: blocks labeled by partitions of
// n with at most d rows; dim = #SSYT, mult = #SYT.
SchurBasis schur_basis_unitary_group(int d, int n);

// Spectral blocks of a Hermitian observable; eigenvalues closer than
// degeneracy_tol * max(1, |spectrum|) are merged.
SpectralDecomposition centralizer_decomposition(const CMatrix& o, double degeneracy_tol = 1e-8);

// Haar sample from the centralizer: block Haar unitaries conjugated back
// by the eigenbasis.
CMatrix sample_centralizer(const SpectralDecomposition& spec, Rng& rng);

// Basis block-diagonalizing U^{(x)(t+1)} (x) V^{(x)t} (x) W on
// (C^d)^{(x)(2t+2)} for all U in U(d) and all V, W block diagonal with
// respect to the ascending eigenframe of o. The basis is expressed in that
// frame (for an observable already diagonal with ascending eigenvalues the
// frame is the computational basis) and is always real.
SchurBasis combined_schur_basis(const CMatrix& o, int t);

// Group element U^{(x)(t+1)} (x) V^{(x)t} (x) W in the grouped ordering.
CMatrix grouped_group_element(const CMatrix& u, const CMatrix& v, const CMatrix& w, int t);

std::string schur_basis_to_json(const SchurBasis& basis);
void save_schur_basis(const SchurBasis& basis, const std::string& path);

} // namespace shadow::rep
