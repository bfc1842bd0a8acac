#pragma once

#include "shadow/comb/comb.hpp"
#include "shadow/rep/schur.hpp"
#include "shadow/solver/conic.hpp"

#include <cstdint>
#include <vector>

namespace shadow::sdp {

// Position permutations (0-based, causal position -> grouped position)
// taking the causal orderings to (P, O_1..O_t, I_1..I_t, F).
struct PermutationChoice {
    int t = 0;
    std::vector<int> pi;    // sequential causal (P, I1, O1, ..., F)
    std::vector<int> sigma; // parallel causal (P, I1..It, O1..Ot, F)
};

PermutationChoice default_permutations(int t);

// Sparse causal-order coefficients p^{r,a,alpha}: for basis column c the
// entry at causal flat index f is q(grouped flat of the permuted tuple, c).
struct CoefficientTensor {
    int d = 0;
    int t = 0;
    std::vector<int> perm; // causal -> grouped
    std::vector<std::vector<std::pair<long, double>>> cols; // aligned with basis columns

    // column grid per block: col_of[block](alpha * dim + a) -> column id
    std::vector<std::vector<long>> col_grid;
};

CoefficientTensor coefficient_tensor(const rep::SchurBasis& basis, const std::vector<int>& perm,
                                     int d, int t, double drop_tol = 1e-12);

// Constraint row as a complex linear functional sum_r tr[C^(r) M_r] = rhs.
struct BlockFunctionalRow {
    std::vector<std::pair<int, CMatrix>> terms; // (block id, coefficient matrix)
    Complex rhs = 0;
};

// Marginal-chain equality functionals. The causal index is split as
// (prefix | mid | last); the traced block is `last`, the delta coupling
// with weight 1/d^{mid} acts on `mid`.
std::vector<BlockFunctionalRow> marginal_functionals(const CoefficientTensor& tensor,
                                                     const rep::SchurBasis& basis, int n_prefix,
                                                     int n_mid, int n_last);

// Objective blocks M_{U,O}^r(j1, i1) for one sampled unitary; the reduced
// channel action is S(j1,i1) = sum_r tr[C^(r) M^r(j1,i1)].
struct ObjectiveBlocks {
    int d = 0;
    // m[(j1 * d + i1)][block] is an m_r x m_r coefficient matrix
    std::vector<std::vector<CMatrix>> m;
};

ObjectiveBlocks objective_blocks(const CoefficientTensor& tensor, const rep::SchurBasis& basis,
                                 const CMatrix& u, const CMatrix& o, comb::Architecture arch);

CMatrix reduced_channel_output(const ObjectiveBlocks& blocks, const std::vector<CMatrix>& c_blocks);

struct ReducedProblem {
    comb::Architecture architecture = comb::Architecture::Sequential;
    int d = 0;
    int t = 0;
    std::uint64_t seed = 0;
    rep::SpectralDecomposition frame; // spectral data of the original observable
    CMatrix observable_frame;         // diagonal observable in the eigenframe
    rep::SchurBasis basis;
    CoefficientTensor tensor;
    solver::ConicProblem conic;
    std::vector<CMatrix> samples;  // Haar unitaries in the original frame
    long constraint_rows = 0;
};

ReducedProblem assemble_reduced(const CMatrix& o, int t, comb::Architecture arch, int n_samples,
                                Rng rng, bool progress = false);

struct FullProblem {
    comb::Architecture architecture = comb::Architecture::Sequential;
    int d = 0;
    int t = 0;
    std::uint64_t seed = 0;
    CMatrix observable;
    solver::ConicProblem conic;
    std::vector<CMatrix> samples;
    long choi_side = 0;
};

// Unreduced problem over the full Choi operator; refuses above size_cap rows.
FullProblem assemble_full(const CMatrix& o, int t, comb::Architecture arch, int n_samples, Rng rng,
                          long size_cap = 4096, bool progress = false);

// Hermitian block matrices recovered from the solver's embedded PSD values.
std::vector<CMatrix> extract_block_solution(const ReducedProblem& rp, const solver::SolveResult& res);

// C = P_{pi^-1} ( sum_r sum_{ab} c_ab sum_a |v_ra alpha><v_ra beta| ) P_{pi^-1}^T
// mapped back to the causal ordering and to the original observable frame.
comb::CombChoi reconstruct_choi(const std::vector<CMatrix>& blocks, const ReducedProblem& rp);

// Inverse of reconstruct_choi for combs living in the symmetric subspace.
std::vector<CMatrix> extract_blocks_from_comb(const comb::CombChoi& c, const ReducedProblem& rp);

// Full Choi recovered from the solver's embedded value (original frame).
comb::CombChoi full_solution_choi(const FullProblem& fp, const solver::SolveResult& res);

// Variable vector of the full problem holding the given comb, e.g. to warm
// start the unreduced solve from a reduced optimum.
Eigen::VectorXd full_warm_start(const FullProblem& fp, const comb::CombChoi& c);

// Group element in the causal ordering: V_P (x) (V_I (x) V_O)^{(x)t} (x) V_F
// for sequential, V_P (x) V_I^{(x)t} (x) V_O^{(x)t} (x) V_F for parallel.
CMatrix causal_group_element(const CMatrix& vp, const CMatrix& vi, const CMatrix& vo,
                             const CMatrix& vf, int t, comb::Architecture arch);

std::string reduced_problem_to_json(const ReducedProblem& rp);

} // namespace shadow::sdp
