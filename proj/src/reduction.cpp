#include "shadow/sdp/reduction.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace shadow::sdp {

namespace {

long ipow(int d, int n) {
    long v = 1;
    for (int i = 0; i < n; ++i) v *= d;
    return v;
}

// Accumulates a symmetric coefficient matrix W over the embedded block of
// side 2m so that <X, W> = Re or Im of tr[C M]; emits svec rows.
class HermFunctional {
public:
    explicit HermFunctional(int m) : m_(m) {}

    // M_{pq} += v
    void add(int p, int q, Complex v) {
        const double vr = v.real(), vi = v.imag();
        // Re part: W11 = W22 = sym(Mr)/2, W12 = -anti(Mi)/2, W21 = -W12
        put(re_, p, q, vr / 4);
        put(re_, q, p, vr / 4);
        put(re_, m_ + p, m_ + q, vr / 4);
        put(re_, m_ + q, m_ + p, vr / 4);
        put(re_, p, m_ + q, -vi / 4);
        put(re_, q, m_ + p, vi / 4);
        put(re_, m_ + q, p, -vi / 4);
        put(re_, m_ + p, q, vi / 4);
        // Im part: W11 = W22 = sym(Mi)/2, W12 = anti(Mr)/2, W21 = -W12
        put(im_, p, q, vi / 4);
        put(im_, q, p, vi / 4);
        put(im_, m_ + p, m_ + q, vi / 4);
        put(im_, m_ + q, m_ + p, vi / 4);
        put(im_, p, m_ + q, vr / 4);
        put(im_, q, m_ + p, -vr / 4);
        put(im_, m_ + q, p, vr / 4);
        put(im_, m_ + p, q, -vr / 4);
    }

    void add_matrix(const CMatrix& m) {
        for (int p = 0; p < m.rows(); ++p)
            for (int q = 0; q < m.cols(); ++q)
                if (m(p, q) != Complex(0, 0)) add(p, q, m(p, q));
    }

    // svec coefficient rows (local indices within the embedded block)
    std::vector<std::pair<long, double>> re_row() const { return emit(re_); }
    std::vector<std::pair<long, double>> im_row() const { return emit(im_); }

private:
    using Acc = std::map<std::pair<int, int>, double>;

    void put(Acc& acc, int i, int j, double w) {
        if (w == 0) return;
        acc[{std::min(i, j), std::max(i, j)}] += w;
    }

    std::vector<std::pair<long, double>> emit(const Acc& acc) const {
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        std::vector<std::pair<long, double>> row;
        row.reserve(acc.size());
        const int side = 2 * m_;
        for (const auto& [key, val] : acc) {
            if (std::abs(val) < 1e-14) continue;
            const auto [i, j] = key;
            const double coeff = (i == j) ? val : val * inv_sqrt2;
            row.emplace_back(solver::svec_index(side, i, j), coeff);
        }
        return row;
    }

    int m_;
    Acc re_, im_;
};

// Hermitian matrix from an embedded symmetric block, averaging the two
// copies so PSD-ness of the embedding is preserved.
CMatrix hermitian_from_embedding(const Eigen::MatrixXd& x) {
    const int m = static_cast<int>(x.rows()) / 2;
    Eigen::MatrixXd a = 0.5 * (x.topLeftCorner(m, m) + x.bottomRightCorner(m, m));
    Eigen::MatrixXd b = 0.5 * (x.bottomLeftCorner(m, m) - x.topRightCorner(m, m));
    b = 0.5 * (b - b.transpose());
    a = 0.5 * (a + a.transpose());
    return a.cast<Complex>() + Complex(0, 1) * b.cast<Complex>();
}

Eigen::MatrixXd embed_hermitian(const CMatrix& c) {
    const int m = static_cast<int>(c.rows());
    Eigen::MatrixXd x(2 * m, 2 * m);
    x.topLeftCorner(m, m) = c.real();
    x.bottomRightCorner(m, m) = c.real();
    x.topRightCorner(m, m) = -c.imag();
    x.bottomLeftCorner(m, m) = c.imag();
    return x;
}

} // namespace

PermutationChoice default_permutations(int t) {
    PermutationChoice pc;
    pc.t = t;
    pc.pi.assign(2 * t + 2, 0);
    pc.sigma.assign(2 * t + 2, 0);
    pc.pi[0] = 0;
    pc.pi[2 * t + 1] = 2 * t + 1;
    for (int j = 1; j <= t; ++j) {
        pc.pi[2 * j - 1] = t + j; // I_j
        pc.pi[2 * j] = j;         // O_j
    }
    pc.sigma[0] = 0;
    pc.sigma[2 * t + 1] = 2 * t + 1;
    for (int i = 1; i <= t; ++i) {
        pc.sigma[i] = t + i;     // I_i
        pc.sigma[t + i] = i;     // O_i
    }
    return pc;
}

CoefficientTensor coefficient_tensor(const rep::SchurBasis& basis, const std::vector<int>& perm,
                                     int d, int t, double drop_tol) {
    const int n = 2 * t + 2;
    if (static_cast<int>(perm.size()) != n)
        throw std::invalid_argument("coefficient_tensor: permutation length mismatch");
    const long total = ipow(d, n);
    if (basis.q.rows() != total) throw std::invalid_argument("coefficient_tensor: basis size mismatch");

    CoefficientTensor ct;
    ct.d = d;
    ct.t = t;
    ct.perm = perm;
    ct.cols.resize(basis.columns.size());

    // causal flat index of a grouped flat index: causal tuple k carries the
    // grouped component at position perm[k].
    std::vector<long> causal_of(total);
    std::vector<int> tup(n, 0);
    for (long g = 0; g < total; ++g) {
        long f = g;
        for (int k = n - 1; k >= 0; --k) {
            tup[k] = static_cast<int>(f % d);
            f /= d;
        }
        long causal = 0;
        for (int k = 0; k < n; ++k) causal = causal * d + tup[perm[k]];
        causal_of[g] = causal;
    }

    double worst_norm = 0;
    for (size_t c = 0; c < basis.columns.size(); ++c) {
        double norm2 = 0;
        for (long g = 0; g < total; ++g) {
            const double v = basis.q(g, static_cast<long>(c));
            if (std::abs(v) > drop_tol) {
                ct.cols[c].emplace_back(causal_of[g], v);
                norm2 += v * v;
            }
        }
        worst_norm = std::max(worst_norm, std::abs(norm2 - 1.0));
    }
    if (worst_norm > 1e-9) throw std::runtime_error("coefficient_tensor: columns are not unit vectors");

    ct.col_grid.resize(basis.blocks.size());
    for (size_t b = 0; b < basis.blocks.size(); ++b)
        ct.col_grid[b].assign(static_cast<size_t>(basis.blocks[b].dim) * basis.blocks[b].mult, -1);
    for (size_t c = 0; c < basis.columns.size(); ++c) {
        const auto& col = basis.columns[c];
        const auto& blk = basis.blocks[col.block];
        ct.col_grid[col.block][static_cast<size_t>(col.alpha) * blk.dim + col.a] = static_cast<long>(c);
    }
    return ct;
}

std::vector<BlockFunctionalRow> marginal_functionals(const CoefficientTensor& tensor,
                                                     const rep::SchurBasis& basis, int n_prefix,
                                                     int n_mid, int n_last) {
    const int d = tensor.d;
    const int n = 2 * tensor.t + 2;
    if (n_prefix + n_mid + n_last != n)
        throw std::invalid_argument("marginal_functionals: split does not cover the index");
    const long dlast = ipow(d, n_last);
    const long dmid = ipow(d, n_mid);

    // per block: key2 = (a, last) -> list of (key1 = prefix*dmid + mid, alpha, value)
    struct Hit {
        long key1;
        int alpha;
        double val;
    };
    const size_t nblocks = basis.blocks.size();
    std::vector<std::map<long, std::vector<Hit>>> grouped(nblocks);
    for (size_t c = 0; c < basis.columns.size(); ++c) {
        const auto& col = basis.columns[c];
        for (const auto& [flat, val] : tensor.cols[c]) {
            const long last = flat % dlast;
            const long key1 = flat / dlast;
            const long key2 = static_cast<long>(col.a) * dlast + last;
            grouped[col.block][key2].push_back(Hit{key1, col.alpha, val});
        }
    }

    // accumulate M matrices per ordered pair (u, v) with u <= v
    std::map<std::pair<long, long>, std::vector<std::pair<int, CMatrix>>> pair_terms;
    for (size_t b = 0; b < nblocks; ++b) {
        const int mr = basis.blocks[b].mult;
        std::map<std::pair<long, long>, CMatrix> local;
        for (const auto& [key2, hits] : grouped[b]) {
            for (const auto& hu : hits)
                for (const auto& hv : hits) {
                    if (hu.key1 > hv.key1) continue;
                    auto it = local.find({hu.key1, hv.key1});
                    if (it == local.end())
                        it = local.emplace(std::make_pair(hu.key1, hv.key1), CMatrix::Zero(mr, mr)).first;
                    // [M(u,v)]_{beta,alpha} += p(u-side, alpha) p(v-side, beta)
                    it->second(hv.alpha, hu.alpha) += hu.val * hv.val;
                }
        }
        for (auto& [key, mmat] : local) pair_terms[key].emplace_back(static_cast<int>(b), std::move(mmat));
    }

    std::vector<BlockFunctionalRow> rows;
    // off-diagonal mid: sum_r tr[C M(u,v)] = 0
    std::map<std::pair<long, long>, std::vector<long>> diag_mids; // (pu, pv) -> mids present
    for (const auto& [key, terms] : pair_terms) {
        const long mu = key.first % dmid, mv = key.second % dmid;
        const long pu = key.first / dmid, pv = key.second / dmid;
        if (mu == mv) {
            diag_mids[{pu, pv}].push_back(mu);
            continue;
        }
        BlockFunctionalRow row;
        row.terms = terms;
        row.rhs = 0;
        rows.push_back(std::move(row));
    }
    // diagonal family: for all mids k, M((pu,k),(pv,k)) - 1/dmid sum_z M((pu,z),(pv,z)) = 0
    const double w = 1.0 / static_cast<double>(dmid);
    for (const auto& [pp, mids] : diag_mids) {
        for (long k = 0; k < dmid; ++k) {
            BlockFunctionalRow row;
            std::map<int, CMatrix> acc;
            auto add_terms = [&](long mid, double scale) {
                const long u = pp.first * dmid + mid, v = pp.second * dmid + mid;
                auto it = pair_terms.find({std::min(u, v), std::max(u, v)});
                if (it == pair_terms.end()) return;
                const bool swapped = u > v;
                for (const auto& [blk, mmat] : it->second) {
                    CMatrix mm = swapped ? CMatrix(mmat.adjoint()) : mmat;
                    auto ait = acc.find(blk);
                    if (ait == acc.end()) acc.emplace(blk, scale * mm);
                    else ait->second += scale * mm;
                }
            };
            add_terms(k, 1.0);
            for (long z = 0; z < dmid; ++z) add_terms(z, -w);
            for (auto& [blk, mmat] : acc)
                if (mmat.cwiseAbs().maxCoeff() > 1e-14) row.terms.emplace_back(blk, std::move(mmat));
            if (!row.terms.empty()) rows.push_back(std::move(row));
        }
    }
    return rows;
}

ObjectiveBlocks objective_blocks(const CoefficientTensor& tensor, const rep::SchurBasis& basis,
                                 const CMatrix& u, const CMatrix& o, comb::Architecture arch) {
    const int d = tensor.d;
    const int t = tensor.t;
    const int n = 2 * t + 2;
    ObjectiveBlocks ob;
    ob.d = d;
    ob.m.assign(static_cast<size_t>(d) * d, {});
    for (auto& per : ob.m) {
        per.reserve(basis.blocks.size());
        for (const auto& blk : basis.blocks) per.push_back(CMatrix::Zero(blk.mult, blk.mult));
    }

    // positions (0-based, causal): sequential I_l = 2l-1, O_l = 2l;
    // parallel I_l = l, O_l = t+l; F = 2t+2-1.
    std::vector<int> ipos(t), opos(t);
    for (int l = 1; l <= t; ++l) {
        if (arch == comb::Architecture::Sequential) {
            ipos[l - 1] = 2 * l - 1;
            opos[l - 1] = 2 * l;
        } else {
            ipos[l - 1] = l;
            opos[l - 1] = t + l;
        }
    }
    const int fpos = n - 1;

    struct Entry {
        int alpha;
        double val;
        int first;       // causal index at position 0
        int fidx;        // causal index at F
        Complex uprod;   // prod_l U[o_l, i_l] over this chain's own slot legs
    };

    // decompose flats once per column entry
    for (size_t b = 0; b < basis.blocks.size(); ++b) {
        const int mr = basis.blocks[b].mult;
        const int dim = basis.blocks[b].dim;
        for (int a = 0; a < dim; ++a) {
            std::vector<Entry> entries;
            for (int alpha = 0; alpha < mr; ++alpha) {
                const long c = tensor.col_grid[b][static_cast<size_t>(alpha) * dim + a];
                if (c < 0) continue;
                for (const auto& [flat, val] : tensor.cols[c]) {
                    std::vector<int> tup(n);
                    long f = flat;
                    for (int k = n - 1; k >= 0; --k) {
                        tup[k] = static_cast<int>(f % d);
                        f /= d;
                    }
                    Entry e;
                    e.alpha = alpha;
                    e.val = val;
                    e.first = tup[0];
                    e.fidx = tup[fpos];
                    Complex uprod = 1.0;
                    for (int l = 0; l < t; ++l) uprod *= u(tup[opos[l]], tup[ipos[l]]);
                    e.uprod = uprod;
                    entries.push_back(std::move(e));
                }
            }
            for (const auto& ei : entries) {
                for (const auto& ej : entries) {
                    // ei is the ket chain (alpha side), ej the bra chain
                    // (beta side); each carries its own slot-leg product.
                    Complex w = ei.val * ej.val * ei.uprod * std::conj(ej.uprod) * o(ej.fidx, ei.fidx);
                    if (w == Complex(0, 0)) continue;
                    const long cell = static_cast<long>(ej.first) * d + ei.first; // (j1, i1)
                    ob.m[cell][b](ej.alpha, ei.alpha) += w;
                }
            }
        }
    }
    return ob;
}

CMatrix reduced_channel_output(const ObjectiveBlocks& blocks, const std::vector<CMatrix>& c_blocks) {
    const int d = blocks.d;
    CMatrix s = CMatrix::Zero(d, d);
    for (int j1 = 0; j1 < d; ++j1)
        for (int i1 = 0; i1 < d; ++i1) {
            Complex acc = 0;
            const auto& per = blocks.m[static_cast<size_t>(j1) * d + i1];
            for (size_t b = 0; b < per.size(); ++b) acc += (c_blocks[b] * per[b]).trace();
            s(j1, i1) = acc;
        }
    return s;
}

namespace {

// Shared pieces of the reduced assembly. The embedding symmetry
// [[A, -B], [B, A]] needs no constraint rows: every functional row and the
// PSD projection commute with the symmetry and the iterate starts at zero,
// so the antisymmetric component stays zero throughout the solve.
void add_block_vars(solver::ConicProblem& conic, const rep::SchurBasis& basis,
                    std::vector<long>& offsets) {
    offsets.clear();
    for (size_t b = 0; b < basis.blocks.size(); ++b)
        offsets.push_back(conic.add_psd_block("C" + std::to_string(b), 2 * basis.blocks[b].mult));
}

void add_functional_rows(solver::ConicProblem& conic, const std::vector<BlockFunctionalRow>& funcs,
                         const std::vector<long>& offsets) {
    for (const auto& f : funcs) {
        solver::SparseRow re_row, im_row;
        for (const auto& [blk, mmat] : f.terms) {
            HermFunctional h(static_cast<int>(mmat.rows()));
            h.add_matrix(mmat);
            for (const auto& [idx, v] : h.re_row()) re_row.coeffs.emplace_back(offsets[blk] + idx, v);
            for (const auto& [idx, v] : h.im_row()) im_row.coeffs.emplace_back(offsets[blk] + idx, v);
        }
        re_row.rhs = f.rhs.real();
        im_row.rhs = f.rhs.imag();
        if (!re_row.coeffs.empty() || re_row.rhs != 0) conic.equalities.push_back(std::move(re_row));
        if (!im_row.coeffs.empty() || im_row.rhs != 0) conic.equalities.push_back(std::move(im_row));
    }
}

std::vector<CMatrix> draw_samples(int d, int n_samples, Rng& rng) {
    std::vector<CMatrix> samples;
    samples.reserve(n_samples);
    Rng stream = rng.fork(0xabcdef01);
    for (int s = 0; s < n_samples; ++s) samples.push_back(haar_unitary(d, stream));
    return samples;
}

} // namespace

ReducedProblem assemble_reduced(const CMatrix& o, int t, comb::Architecture arch, int n_samples,
                                Rng rng, bool progress) {
    ReducedProblem rp;
    rp.architecture = arch;
    rp.d = static_cast<int>(o.rows());
    rp.t = t;
    rp.seed = rng.seed();
    rp.frame = rep::centralizer_decomposition(o);

    const int d = rp.d;
    CMatrix sigma = CMatrix::Zero(d, d);
    {
        int off = 0;
        for (int b = 0; b < rp.frame.block_count(); ++b)
            for (int j = 0; j < rp.frame.multiplicities[b]; ++j) {
                sigma(off, off) = rp.frame.eigenvalues(b);
                ++off;
            }
    }
    rp.observable_frame = sigma;

    if (progress) std::cerr << "progress phase=basis d=" << d << " t=" << t << std::endl;
    rp.basis = rep::combined_schur_basis(sigma, t);
    const auto perms = default_permutations(t);
    const auto& perm = arch == comb::Architecture::Sequential ? perms.pi : perms.sigma;
    rp.tensor = coefficient_tensor(rp.basis, perm, d, t);

    std::vector<long> offsets;
    add_block_vars(rp.conic, rp.basis, offsets);

    if (progress) std::cerr << "progress phase=constraints" << std::endl;
    std::vector<BlockFunctionalRow> funcs;
    if (arch == comb::Architecture::Sequential) {
        for (int K = 2; K <= 2 * t + 2; K += 2) {
            auto rows = marginal_functionals(rp.tensor, rp.basis, 2 * t + 2 - K, 1, K - 1);
            funcs.insert(funcs.end(), rows.begin(), rows.end());
        }
    } else {
        auto rows1 = marginal_functionals(rp.tensor, rp.basis, t + 1, t, 1);
        auto rows2 = marginal_functionals(rp.tensor, rp.basis, 0, 1, 2 * t + 1);
        funcs = std::move(rows1);
        funcs.insert(funcs.end(), rows2.begin(), rows2.end());
    }
    // trace normalization: sum_r dim_r tr(C^r) = d^{t+1}
    {
        BlockFunctionalRow trace_row;
        for (size_t b = 0; b < rp.basis.blocks.size(); ++b)
            trace_row.terms.emplace_back(static_cast<int>(b),
                                         CMatrix(static_cast<double>(rp.basis.blocks[b].dim) *
                                                 CMatrix::Identity(rp.basis.blocks[b].mult,
                                                                   rp.basis.blocks[b].mult)));
        trace_row.rhs = static_cast<double>(ipow(d, t + 1));
        funcs.push_back(std::move(trace_row));
    }
    add_functional_rows(rp.conic, funcs, offsets);
    rp.constraint_rows = static_cast<long>(rp.conic.equalities.size());

    if (progress) std::cerr << "progress phase=samples n=" << n_samples << std::endl;
    rp.samples = draw_samples(d, n_samples, rng);

    // objective rows in the eigenframe: u' = R^dag u R
    const CMatrix r = rp.frame.eigenvectors;
    std::vector<solver::ResidualMap> maps;
    maps.reserve(rp.samples.size());
    for (size_t s = 0; s < rp.samples.size(); ++s) {
        const CMatrix uf = r.adjoint() * rp.samples[s] * r;
        const ObjectiveBlocks ob = objective_blocks(rp.tensor, rp.basis, uf, sigma, arch);
        const CMatrix target = uf * sigma * uf.adjoint();
        solver::ResidualMap rm;
        for (int j1 = 0; j1 < d; ++j1)
            for (int i1 = 0; i1 < d; ++i1) {
                const auto& per = ob.m[static_cast<size_t>(j1) * d + i1];
                solver::SparseRow re_row, im_row;
                for (size_t b = 0; b < per.size(); ++b) {
                    if (per[b].cwiseAbs().maxCoeff() < 1e-14) continue;
                    HermFunctional h(static_cast<int>(per[b].rows()));
                    h.add_matrix(per[b]);
                    for (const auto& [idx, v] : h.re_row()) re_row.coeffs.emplace_back(offsets[b] + idx, v);
                    for (const auto& [idx, v] : h.im_row()) im_row.coeffs.emplace_back(offsets[b] + idx, v);
                }
                re_row.rhs = target(j1, i1).real();
                im_row.rhs = target(j1, i1).imag();
                rm.rows.push_back(std::move(re_row));
                rm.rows.push_back(std::move(im_row));
            }
        maps.push_back(std::move(rm));
        if (progress && (s + 1) % 500 == 0)
            std::cerr << "progress phase=objective done=" << s + 1 << " total=" << rp.samples.size()
                      << std::endl;
    }
    rp.conic = solver::epigraph_formulate(std::move(rp.conic), maps);
    return rp;
}

FullProblem assemble_full(const CMatrix& o, int t, comb::Architecture arch, int n_samples, Rng rng,
                          long size_cap, bool progress) {
    FullProblem fp;
    fp.architecture = arch;
    fp.d = static_cast<int>(o.rows());
    fp.t = t;
    fp.seed = rng.seed();
    fp.observable = o;
    const int d = fp.d;
    const int n = 2 * t + 2;
    fp.choi_side = ipow(d, n);
    if (fp.choi_side > size_cap)
        throw std::invalid_argument("assemble_full: Choi side " + std::to_string(fp.choi_side) +
                                    " exceeds the size cap " + std::to_string(size_cap));

    const long side = fp.choi_side;
    const long off = fp.conic.add_psd_block("C", static_cast<int>(2 * side));

    // marginal-chain rows directly on Choi entries
    auto add_marginal_rows = [&](int n_prefix, int n_mid, int n_last) {
        const long dpre = ipow(d, n_prefix), dmid = ipow(d, n_mid), dlast = ipow(d, n_last);
        const double w = 1.0 / static_cast<double>(dmid);
        const long dkey = dpre * dmid;
        for (long ku = 0; ku < dkey; ++ku)
            for (long kv = ku; kv < dkey; ++kv) {
                const long pu = ku / dmid, mu = ku % dmid;
                const long pv = kv / dmid, mv = kv % dmid;
                HermFunctional h(static_cast<int>(side));
                // T1 entry: sum_last C[(ku,last),(kv,last)] -> M[(kv,last),(ku,last)] += 1
                auto add_entry = [&](long a, long b, double scale) {
                    for (long last = 0; last < dlast; ++last)
                        h.add(static_cast<int>(b * dlast + last), static_cast<int>(a * dlast + last), scale);
                };
                if (mu != mv) {
                    add_entry(ku, kv, 1.0);
                } else {
                    add_entry(ku, kv, 1.0);
                    for (long z = 0; z < dmid; ++z) add_entry(pu * dmid + z, pv * dmid + z, -w);
                }
                solver::SparseRow re_row, im_row;
                for (const auto& [idx, v] : h.re_row()) re_row.coeffs.emplace_back(off + idx, v);
                for (const auto& [idx, v] : h.im_row()) im_row.coeffs.emplace_back(off + idx, v);
                if (!re_row.coeffs.empty()) fp.conic.equalities.push_back(std::move(re_row));
                if (!im_row.coeffs.empty()) fp.conic.equalities.push_back(std::move(im_row));
            }
    };
    if (progress) std::cerr << "progress phase=constraints side=" << side << std::endl;
    if (arch == comb::Architecture::Sequential) {
        for (int K = 2; K <= 2 * t + 2; K += 2) add_marginal_rows(n - K, 1, K - 1);
    } else {
        add_marginal_rows(t + 1, t, 1);
        add_marginal_rows(0, 1, 2 * t + 1);
    }
    {
        // tr C = d^{t+1}
        HermFunctional h(static_cast<int>(side));
        for (long i = 0; i < side; ++i) h.add(static_cast<int>(i), static_cast<int>(i), 1.0);
        solver::SparseRow row;
        for (const auto& [idx, v] : h.re_row()) row.coeffs.emplace_back(off + idx, v);
        row.rhs = static_cast<double>(ipow(d, t + 1));
        fp.conic.equalities.push_back(std::move(row));
    }

    fp.samples = draw_samples(d, n_samples, rng);

    // plugged |U>><<U|^{(x)t} in the causal slot ordering
    const comb::CombSpec spec(d, t, arch);
    const auto layout = spec.layout();
    std::vector<std::string> slot_labels(layout.labels.begin() + 1, layout.labels.end() - 1);
    if (progress) std::cerr << "progress phase=objective n=" << n_samples << std::endl;

    std::vector<solver::ResidualMap> maps;
    const long dio = ipow(d, 2 * t);
    for (size_t s = 0; s < fp.samples.size(); ++s) {
        const CMatrix& u = fp.samples[s];
        // build the plugged operator in causal slot order
        CMatrix uu = choi_vector(u) * choi_vector(u).adjoint();
        IndexedOperator all(uu, SubsystemLayout({d, d}, {"I1", "O1"}));
        for (int i = 2; i <= t; ++i) {
            CMatrix joint = kron(all.mat, uu);
            SubsystemLayout jl = all.layout;
            jl.dims.push_back(d);
            jl.labels.push_back("I" + std::to_string(i));
            jl.dims.push_back(d);
            jl.labels.push_back("O" + std::to_string(i));
            all = IndexedOperator(std::move(joint), std::move(jl));
        }
        all = permute_subsystems(all, slot_labels);

        const CMatrix target = u * o * u.adjoint();
        solver::ResidualMap rm;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                HermFunctional h(static_cast<int>(side));
                for (int f = 0; f < d; ++f)
                    for (int fps = 0; fps < d; ++fps) {
                        const Complex ow = o(f, fps);
                        if (ow == Complex(0, 0)) continue;
                        for (long m = 0; m < dio; ++m)
                            for (long k = 0; k < dio; ++k) {
                                const Complex uw = all.mat(m, k);
                                if (uw == Complex(0, 0)) continue;
                                // coeff of C[(b,m,fps),(a,k,f)]
                                h.add(static_cast<int>((a * dio + k) * d + f),
                                      static_cast<int>((b * dio + m) * d + fps), ow * uw);
                            }
                    }
                solver::SparseRow re_row, im_row;
                for (const auto& [idx, v] : h.re_row()) re_row.coeffs.emplace_back(off + idx, v);
                for (const auto& [idx, v] : h.im_row()) im_row.coeffs.emplace_back(off + idx, v);
                re_row.rhs = target(a, b).real();
                im_row.rhs = target(a, b).imag();
                rm.rows.push_back(std::move(re_row));
                rm.rows.push_back(std::move(im_row));
            }
        maps.push_back(std::move(rm));
        if (progress && (s + 1) % 100 == 0)
            std::cerr << "progress phase=objective done=" << s + 1 << " total=" << fp.samples.size()
                      << std::endl;
    }
    fp.conic = solver::epigraph_formulate(std::move(fp.conic), maps);
    return fp;
}

std::vector<CMatrix> extract_block_solution(const ReducedProblem& rp, const solver::SolveResult& res) {
    std::vector<CMatrix> blocks;
    blocks.reserve(rp.basis.blocks.size());
    for (size_t b = 0; b < rp.basis.blocks.size(); ++b) {
        const auto it = res.psd_values.find("C" + std::to_string(b));
        if (it == res.psd_values.end()) throw std::runtime_error("extract_block_solution: missing block");
        blocks.push_back(hermitian_from_embedding(it->second));
    }
    return blocks;
}

CMatrix causal_group_element(const CMatrix& vp, const CMatrix& vi, const CMatrix& vo,
                             const CMatrix& vf, int t, comb::Architecture arch) {
    CMatrix g = vp;
    if (arch == comb::Architecture::Sequential) {
        for (int i = 0; i < t; ++i) g = kron(kron(g, vi), vo);
    } else {
        for (int i = 0; i < t; ++i) g = kron(g, vi);
        for (int i = 0; i < t; ++i) g = kron(g, vo);
    }
    return kron(g, vf);
}

comb::CombChoi reconstruct_choi(const std::vector<CMatrix>& blocks, const ReducedProblem& rp) {
    const int d = rp.d, t = rp.t;
    const int n = 2 * t + 2;
    const long total = ipow(d, n);
    if (blocks.size() != rp.basis.blocks.size())
        throw std::invalid_argument("reconstruct_choi: block count mismatch");

    // grouped-order operator B = sum_r Q_r (C^r (x) I_dim) Q_r^T
    CMatrix grouped = CMatrix::Zero(total, total);
    long col = 0;
    for (size_t b = 0; b < rp.basis.blocks.size(); ++b) {
        const int dim = rp.basis.blocks[b].dim, mult = rp.basis.blocks[b].mult;
        const long nb = static_cast<long>(dim) * mult;
        RMatrix qb = rp.basis.q.middleCols(col, nb);
        CMatrix expand = CMatrix::Zero(nb, nb);
        for (int alpha = 0; alpha < mult; ++alpha)
            for (int beta = 0; beta < mult; ++beta)
                for (int a = 0; a < dim; ++a)
                    expand(static_cast<long>(alpha) * dim + a, static_cast<long>(beta) * dim + a) =
                        blocks[b](alpha, beta);
        grouped += qb.cast<Complex>() * expand * qb.transpose().cast<Complex>();
        col += nb;
    }

    // back to causal ordering: C[iota, kappa] = B[g(iota), g(kappa)],
    // g(x)_{perm[k]} = x_k
    const auto& perm = rp.tensor.perm;
    std::vector<long> gmap(total);
    std::vector<int> tup(n, 0);
    for (long f = 0; f < total; ++f) {
        long ff = f;
        for (int k = n - 1; k >= 0; --k) {
            tup[k] = static_cast<int>(ff % d);
            ff /= d;
        }
        std::vector<int> gt(n, 0);
        for (int k = 0; k < n; ++k) gt[perm[k]] = tup[k];
        long g = 0;
        for (int k = 0; k < n; ++k) g = g * d + gt[k];
        gmap[f] = g;
    }
    CMatrix causal(total, total);
    for (long r = 0; r < total; ++r)
        for (long c = 0; c < total; ++c) causal(r, c) = grouped(gmap[r], gmap[c]);

    // restore the original observable frame: per-wire rotations
    const CMatrix r = rp.frame.eigenvectors;
    if ((r - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-14) {
        const CMatrix g = causal_group_element(r.conjugate(), r, r.conjugate(), r, t, rp.architecture);
        causal = g * causal * g.adjoint();
    }

    const comb::CombSpec spec(d, t, rp.architecture);
    return comb::CombChoi(spec, IndexedOperator(std::move(causal), spec.layout()));
}

std::vector<CMatrix> extract_blocks_from_comb(const comb::CombChoi& c, const ReducedProblem& rp) {
    const int d = rp.d, t = rp.t;
    const int n = 2 * t + 2;
    const long total = ipow(d, n);
    CMatrix causal = c.op.mat;

    const CMatrix r = rp.frame.eigenvectors;
    if ((r - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-14) {
        const CMatrix g = causal_group_element(r.conjugate(), r, r.conjugate(), r, t, rp.architecture);
        causal = g.adjoint() * causal * g;
    }

    const auto& perm = rp.tensor.perm;
    std::vector<long> gmap(total);
    std::vector<int> tup(n, 0);
    for (long f = 0; f < total; ++f) {
        long ff = f;
        for (int k = n - 1; k >= 0; --k) {
            tup[k] = static_cast<int>(ff % d);
            ff /= d;
        }
        std::vector<int> gt(n, 0);
        for (int k = 0; k < n; ++k) gt[perm[k]] = tup[k];
        long g = 0;
        for (int k = 0; k < n; ++k) g = g * d + gt[k];
        gmap[f] = g;
    }
    CMatrix grouped(total, total);
    for (long rr = 0; rr < total; ++rr)
        for (long cc = 0; cc < total; ++cc) grouped(gmap[rr], gmap[cc]) = causal(rr, cc);

    std::vector<CMatrix> blocks;
    long col = 0;
    for (size_t b = 0; b < rp.basis.blocks.size(); ++b) {
        const int dim = rp.basis.blocks[b].dim, mult = rp.basis.blocks[b].mult;
        const long nb = static_cast<long>(dim) * mult;
        RMatrix qb = rp.basis.q.middleCols(col, nb);
        CMatrix local = qb.transpose().cast<Complex>() * grouped * qb.cast<Complex>();
        CMatrix cb = CMatrix::Zero(mult, mult);
        for (int alpha = 0; alpha < mult; ++alpha)
            for (int beta = 0; beta < mult; ++beta) {
                Complex acc = 0;
                for (int a = 0; a < dim; ++a)
                    acc += local(static_cast<long>(alpha) * dim + a, static_cast<long>(beta) * dim + a);
                cb(alpha, beta) = acc / static_cast<double>(dim);
            }
        blocks.push_back(std::move(cb));
        col += nb;
    }
    return blocks;
}

Eigen::VectorXd full_warm_start(const FullProblem& fp, const comb::CombChoi& c) {
    const long side = fp.choi_side;
    if (c.op.mat.rows() != side) throw std::invalid_argument("full_warm_start: comb size mismatch");
    Eigen::VectorXd x = Eigen::VectorXd::Zero(fp.conic.num_vars());
    x.head(fp.conic.blocks[0].len) = solver::svec(embed_hermitian(c.op.mat));
    return x;
}

comb::CombChoi full_solution_choi(const FullProblem& fp, const solver::SolveResult& res) {
    const auto it = res.psd_values.find("C");
    if (it == res.psd_values.end()) throw std::runtime_error("full_solution_choi: missing block");
    CMatrix choi = hermitian_from_embedding(it->second);
    const comb::CombSpec spec(fp.d, fp.t, fp.architecture);
    return comb::CombChoi(spec, IndexedOperator(std::move(choi), spec.layout()));
}

std::string reduced_problem_to_json(const ReducedProblem& rp) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["architecture"] = comb::to_string(rp.architecture);
    j["d"] = rp.d;
    j["t"] = rp.t;
    j["seed"] = rp.seed;
    j["blocks"] = nlohmann::ordered_json::array();
    for (const auto& b : rp.basis.blocks)
        j["blocks"].push_back({{"label", b.label.to_string()}, {"dim", b.dim}, {"mult", b.mult}});
    j["variable_count"] = rp.basis.variable_count();
    j["constraint_rows"] = rp.constraint_rows;
    j["n_samples"] = rp.samples.size();
    j["problem"] = nlohmann::json::parse(solver::problem_to_json(rp.conic));
    return j.dump();
}

} // namespace shadow::sdp
