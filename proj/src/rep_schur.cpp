#include "shadow/rep/schur.hpp"

#include "shadow/rep/symmetric.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace shadow::rep {

CMatrix SpectralDecomposition::reconstruct() const {
    const int d = dim();
    CMatrix sigma = CMatrix::Zero(d, d);
    int off = 0;
    for (int b = 0; b < block_count(); ++b) {
        for (int j = 0; j < multiplicities[b]; ++j) sigma(off + j, off + j) = eigenvalues(b);
        off += multiplicities[b];
    }
    return eigenvectors * sigma * eigenvectors.adjoint();
}

bool IrrepLabel::operator<(const IrrepLabel& o) const {
    if (!(lambda == o.lambda)) return lambda < o.lambda;
    if (composition != o.composition) return composition < o.composition;
    if (block_partitions.size() != o.block_partitions.size())
        return block_partitions.size() < o.block_partitions.size();
    for (size_t i = 0; i < block_partitions.size(); ++i)
        if (!(block_partitions[i] == o.block_partitions[i])) return block_partitions[i] < o.block_partitions[i];
    return w_index < o.w_index;
}

bool IrrepLabel::operator==(const IrrepLabel& o) const {
    return lambda == o.lambda && composition == o.composition &&
           block_partitions.size() == o.block_partitions.size() &&
           std::equal(block_partitions.begin(), block_partitions.end(), o.block_partitions.begin()) &&
           w_index == o.w_index;
}

std::string IrrepLabel::to_string() const {
    std::ostringstream os;
    auto put = [&os](const Partition& p) {
        os << "(";
        for (size_t i = 0; i < p.parts.size(); ++i) os << (i ? "," : "") << p.parts[i];
        os << ")";
    };
    put(lambda);
    if (!composition.empty()) {
        os << "|k=(";
        for (size_t i = 0; i < composition.size(); ++i) os << (i ? "," : "") << composition[i];
        os << ")";
        for (const auto& p : block_partitions) put(p);
    }
    if (w_index >= 0) os << "|w=" << w_index;
    return os.str();
}

long SchurBasis::variable_count() const {
    long s = 0;
    for (const auto& b : blocks) s += static_cast<long>(b.mult) * b.mult;
    return s;
}

void SchurBasis::check_consistent() const {
    long total = 0;
    for (const auto& b : blocks) total += static_cast<long>(b.dim) * b.mult;
    if (total != q.rows() || q.rows() != q.cols())
        throw std::runtime_error("SchurBasis: block table does not fill the space");
    RMatrix g = q.transpose() * q;
    g.diagonal().array() -= 1.0;
    if (g.cwiseAbs().maxCoeff() > 1e-9) throw std::runtime_error("SchurBasis: Q not orthonormal");
}

namespace {

long ipow(int d, int n) {
    long t = 1;
    for (int i = 0; i < n; ++i) t *= d;
    return t;
}

long flat_index(const std::vector<int>& tuple, int d) {
    long f = 0;
    for (int x : tuple) f = f * d + x;
    return f;
}

// Twice-through classical Gram-Schmidt against the accepted columns.
bool gs_append(RMatrix& q, long& ncols, RVector v, double drop_tol) {
    for (int pass = 0; pass < 2; ++pass)
        for (long c = 0; c < ncols; ++c) v -= q.col(c).dot(v) * q.col(c);
    const double nrm = v.norm();
    if (nrm < drop_tol) return false;
    q.col(ncols++) = v / nrm;
    return true;
}

} // namespace

SchurBasis schur_basis_unitary_group(int d, int n) {
    if (d < 1 || n < 0) throw std::invalid_argument("schur_basis_unitary_group: bad arguments");
    const long total = ipow(d, n);
    SchurBasis basis;
    basis.q = RMatrix::Zero(total, total);
    long ncols = 0;

    for (const Partition& lambda : partitions(n, std::min(n, d))) {
        const int dim = static_cast<int>(count_ssyt(lambda, d));
        const int mult = static_cast<int>(count_syt(lambda));
        if (dim == 0) continue;
        const RMatrix proj = isotypic_projector(lambda, d);
        const auto syts = enumerate_syt(lambda);
        const auto ssyts = enumerate_ssyt(lambda, d);
        if (static_cast<int>(syts.size()) != mult || static_cast<int>(ssyts.size()) != dim)
            throw std::runtime_error("schur_basis_unitary_group: tableau enumeration mismatch");

        const int block_id = static_cast<int>(basis.blocks.size());
        basis.blocks.push_back(SchurBlock{IrrepLabel{lambda, {}, {}, -1}, dim, mult});

        long accepted = 0;
        for (int alpha = 0; alpha < mult; ++alpha) {
            const RMatrix symmetrizer = proj * young_symmetrizer(syts[alpha], d);
            for (int a = 0; a < dim; ++a) {
                RVector v = symmetrizer * RMatrix::Identity(total, total).col(flat_index(seed_tuple(syts[alpha], ssyts[a]), d));
                if (gs_append(basis.q, ncols, std::move(v), 1e-10)) {
                    basis.columns.push_back(SchurColumn{block_id, a, alpha});
                    ++accepted;
                }
            }
        }
        if (accepted != static_cast<long>(dim) * mult)
            throw std::runtime_error("schur_basis_unitary_group: surviving column count " +
                                     std::to_string(accepted) + " != dim*mult for shape " +
                                     basis.blocks.back().label.to_string());
    }
    if (ncols != total) throw std::runtime_error("schur_basis_unitary_group: basis incomplete");
    basis.check_consistent();
    return basis;
}

SpectralDecomposition centralizer_decomposition(const CMatrix& o, double degeneracy_tol) {
    if (!is_hermitian(o, 1e-10)) throw std::invalid_argument("centralizer_decomposition: not Hermitian");
    const int d = static_cast<int>(o.rows());
    RVector evals(d);
    CMatrix evecs(d, d);
    if ((o.imag().cwiseAbs().maxCoeff()) < 1e-13) {
        Eigen::SelfAdjointEigenSolver<RMatrix> es(o.real());
        evals = es.eigenvalues();
        evecs = es.eigenvectors().cast<Complex>();
    } else {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(o);
        evals = es.eigenvalues();
        evecs = es.eigenvectors();
    }
    const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());
    SpectralDecomposition spec;
    spec.eigenvectors = evecs;
    std::vector<double> distinct;
    std::vector<int> mult;
    for (int i = 0; i < d; ++i) {
        if (!distinct.empty() && std::abs(evals(i) - distinct.back()) <= degeneracy_tol * scale) {
            mult.back()++;
        } else {
            distinct.push_back(evals(i));
            mult.push_back(1);
        }
    }
    spec.eigenvalues = Eigen::Map<RVector>(distinct.data(), static_cast<long>(distinct.size()));
    spec.multiplicities = mult;
    return spec;
}

CMatrix sample_centralizer(const SpectralDecomposition& spec, Rng& rng) {
    const int d = spec.dim();
    CMatrix block = CMatrix::Zero(d, d);
    int off = 0;
    for (int b = 0; b < spec.block_count(); ++b) {
        const int l = spec.multiplicities[b];
        block.block(off, off, l, l) = haar_unitary(l, rng);
        off += l;
    }
    return spec.eigenvectors * block * spec.eigenvectors.adjoint();
}

CMatrix grouped_group_element(const CMatrix& u, const CMatrix& v, const CMatrix& w, int t) {
    CMatrix g = u;
    for (int i = 0; i < t; ++i) g = kron(g, u);
    for (int i = 0; i < t; ++i) g = kron(g, v);
    return kron(g, w);
}

namespace {

void gen_compositions(int remaining, int slots, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (slots == 1) {
        cur.push_back(remaining);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int k = remaining; k >= 0; --k) {
        cur.push_back(k);
        gen_compositions(remaining - k, slots - 1, cur, out);
        cur.pop_back();
    }
}

struct VFactorColumn {
    int block = 0;
    int a = 0;
    int alpha = 0;
    RVector vec;
};

struct VFactor {
    std::vector<SchurBlock> blocks;
    std::vector<VFactorColumn> columns;
};

// Basis of (C^d)^{(x)t} block-diagonalizing V^{(x)t} for block-diagonal V
// with eigenspace sizes l_1..l_m (eigen frame: consecutive index ranges).
VFactor v_factor_basis(const std::vector<int>& ls, int t, int d) {
    const int m = static_cast<int>(ls.size());
    std::vector<int> offsets(m, 0);
    for (int r = 1; r < m; ++r) offsets[r] = offsets[r - 1] + ls[r - 1];

    // Cache of per-block factor bases.
    std::map<std::pair<int, int>, SchurBasis> cache;
    auto factor = [&cache](int l, int k) -> const SchurBasis& {
        auto key = std::make_pair(l, k);
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, schur_basis_unitary_group(l, k)).first;
        return it->second;
    };

    std::vector<std::vector<int>> comps;
    std::vector<int> cur;
    gen_compositions(t, m, cur, comps);

    VFactor vf;
    for (const auto& comp : comps) {
        // All assignments g in [m]^t whose composition is comp, lex order.
        std::vector<std::vector<int>> assignments;
        std::vector<int> g(t, 0);
        while (true) {
            std::vector<int> cnt(m, 0);
            for (int p : g) cnt[p]++;
            if (cnt == comp) assignments.push_back(g);
            int k = t - 1;
            for (; k >= 0; --k) {
                if (++g[k] < m) break;
                g[k] = 0;
            }
            if (k < 0) break;
        }

        // Per-block shape tuples.
        std::vector<std::vector<Partition>> shape_lists(m);
        for (int r = 0; r < m; ++r) shape_lists[r] = partitions(comp[r], std::min(comp[r], ls[r]));
        std::vector<int> shape_idx(m, 0);
        bool shapes_done = m == 0;
        while (!shapes_done) {
            std::vector<Partition> shapes(m);
            for (int r = 0; r < m; ++r) shapes[r] = shape_lists[r][shape_idx[r]];

            int dim = 1, mult_per_assign = 1;
            for (int r = 0; r < m; ++r) {
                dim *= static_cast<int>(count_ssyt(shapes[r], ls[r]));
                mult_per_assign *= static_cast<int>(count_syt(shapes[r]));
            }
            if (dim > 0) {
                const int block_id = static_cast<int>(vf.blocks.size());
                IrrepLabel label;
                label.composition = comp;
                label.block_partitions = shapes;
                vf.blocks.push_back(SchurBlock{label, dim, static_cast<int>(assignments.size()) * mult_per_assign});

                int alpha = 0;
                for (const auto& assign : assignments) {
                    // positions of each eigenspace inside the assignment
                    std::vector<std::vector<int>> pos(m);
                    for (int p = 0; p < t; ++p) pos[assign[p]].push_back(p);

                    // factor column sets per block, indexed (alpha_r-major, a_r-minor)
                    std::vector<const SchurBasis*> fb(m);
                    for (int r = 0; r < m; ++r) fb[r] = &factor(ls[r], comp[r]);
                    std::vector<std::vector<long>> col_of(m); // [r][alpha_r*dim_r + a_r] -> column
                    for (int r = 0; r < m; ++r) {
                        const auto& basis = *fb[r];
                        long want_block = -1;
                        for (size_t b = 0; b < basis.blocks.size(); ++b)
                            if (basis.blocks[b].label.lambda == shapes[r]) want_block = static_cast<long>(b);
                        const int dr = static_cast<int>(count_ssyt(shapes[r], ls[r]));
                        const int mr = static_cast<int>(count_syt(shapes[r]));
                        col_of[r].assign(static_cast<size_t>(dr) * mr, -1);
                        for (size_t c = 0; c < basis.columns.size(); ++c)
                            if (basis.columns[c].block == want_block)
                                col_of[r][static_cast<size_t>(basis.columns[c].alpha) * dr + basis.columns[c].a] =
                                    static_cast<long>(c);
                    }

                    std::vector<int> dims_r(m), mults_r(m);
                    for (int r = 0; r < m; ++r) {
                        dims_r[r] = static_cast<int>(count_ssyt(shapes[r], ls[r]));
                        mults_r[r] = static_cast<int>(count_syt(shapes[r]));
                    }

                    // multiplicity copies: tuple of per-block alpha_r
                    std::vector<int> am(m, 0);
                    bool am_done = false;
                    while (!am_done) {
                        // dimension index: tuple of per-block a_r
                        std::vector<int> ad(m, 0);
                        int a_lin = 0;
                        bool ad_done = false;
                        while (!ad_done) {
                            // assemble the embedded column on (C^d)^{(x)t}
                            RVector v = RVector::Zero(ipow(d, t));
                            std::vector<int> local(t, 0); // local eigenvector index per position
                            while (true) {
                                double coeff = 1.0;
                                for (int r = 0; r < m && coeff != 0.0; ++r) {
                                    long lf = 0;
                                    for (int p : pos[r]) lf = lf * ls[r] + local[p];
                                    const long colid = col_of[r][static_cast<size_t>(am[r]) * dims_r[r] + ad[r]];
                                    coeff *= fb[r]->q(lf, colid);
                                }
                                if (coeff != 0.0) {
                                    long gf = 0;
                                    for (int p = 0; p < t; ++p) gf = gf * d + offsets[assign[p]] + local[p];
                                    v(gf) = coeff;
                                }
                                int p = t - 1;
                                for (; p >= 0; --p) {
                                    if (++local[p] < ls[assign[p]]) break;
                                    local[p] = 0;
                                }
                                if (p < 0) break;
                            }
                            vf.columns.push_back(VFactorColumn{block_id, a_lin, alpha, std::move(v)});
                            ++a_lin;
                            int r = m - 1;
                            for (; r >= 0; --r) {
                                if (++ad[r] < dims_r[r]) break;
                                ad[r] = 0;
                            }
                            ad_done = (r < 0);
                        }
                        ++alpha;
                        int r = m - 1;
                        for (; r >= 0; --r) {
                            if (++am[r] < mults_r[r]) break;
                            am[r] = 0;
                        }
                        am_done = (r < 0);
                    }
                }
                if (alpha != vf.blocks[block_id].mult)
                    throw std::runtime_error("v_factor_basis: multiplicity bookkeeping error");
            }
            int r = m - 1;
            for (; r >= 0; --r) {
                if (++shape_idx[r] < static_cast<int>(shape_lists[r].size())) break;
                shape_idx[r] = 0;
            }
            shapes_done = (r < 0);
        }
    }
    return vf;
}

} // namespace

SchurBasis combined_schur_basis(const CMatrix& o, int t) {
    if (t < 1) throw std::invalid_argument("combined_schur_basis: t must be >= 1");
    const int d = static_cast<int>(o.rows());
    const SpectralDecomposition spec = centralizer_decomposition(o);
    const int m = spec.block_count();

    const SchurBasis qu = schur_basis_unitary_group(d, t + 1);
    const VFactor qv = v_factor_basis(spec.multiplicities, t, d);

    // W factor: identity in the eigen frame, one defining block per eigenspace.
    std::vector<int> w_offsets(m, 0);
    for (int r = 1; r < m; ++r) w_offsets[r] = w_offsets[r - 1] + spec.multiplicities[r - 1];

    struct PendingColumn {
        IrrepLabel label;
        int a, alpha;
        long cu, cv;
        int w_col;
    };
    std::vector<PendingColumn> pending;
    std::map<std::vector<long>, int> block_of; // (u block, v block, w block) -> combined id
    SchurBasis out;

    for (size_t bu = 0; bu < qu.blocks.size(); ++bu) {
        for (size_t bv = 0; bv < qv.blocks.size(); ++bv) {
            for (int bw = 0; bw < m; ++bw) {
                IrrepLabel label;
                label.lambda = qu.blocks[bu].label.lambda;
                label.composition = qv.blocks[bv].label.composition;
                label.block_partitions = qv.blocks[bv].label.block_partitions;
                label.w_index = bw;
                const int dim = qu.blocks[bu].dim * qv.blocks[bv].dim * spec.multiplicities[bw];
                const int mult = qu.blocks[bu].mult * qv.blocks[bv].mult;
                block_of[{static_cast<long>(bu), static_cast<long>(bv), bw}] =
                    static_cast<int>(out.blocks.size());
                out.blocks.push_back(SchurBlock{label, dim, mult});
            }
        }
    }

    for (size_t cu = 0; cu < qu.columns.size(); ++cu) {
        const auto& u = qu.columns[cu];
        for (size_t cv = 0; cv < qv.columns.size(); ++cv) {
            const auto& v = qv.columns[cv];
            for (int bw = 0; bw < m; ++bw) {
                const int lw = spec.multiplicities[bw];
                for (int aw = 0; aw < lw; ++aw) {
                    const int bid = block_of[{static_cast<long>(u.block), static_cast<long>(v.block), bw}];
                    const auto& blk = out.blocks[bid];
                    const int dim_v = qv.blocks[v.block].dim;
                    PendingColumn pc;
                    pc.label = blk.label;
                    pc.a = (u.a * dim_v + v.a) * lw + aw;
                    pc.alpha = u.alpha * qv.blocks[v.block].mult + v.alpha;
                    pc.cu = static_cast<long>(cu);
                    pc.cv = static_cast<long>(cv);
                    pc.w_col = w_offsets[bw] + aw;
                    pending.push_back(std::move(pc));
                }
            }
        }
    }

    // Columns sorted by (block id, multiplicity copy, dimension index).
    std::vector<size_t> order(pending.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<long> bid_of(pending.size());
    {
        std::map<std::string, int> by_name;
        for (size_t b = 0; b < out.blocks.size(); ++b) by_name[out.blocks[b].label.to_string()] = static_cast<int>(b);
        for (size_t i = 0; i < pending.size(); ++i) bid_of[i] = by_name[pending[i].label.to_string()];
    }
    std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
        if (bid_of[x] != bid_of[y]) return bid_of[x] < bid_of[y];
        if (pending[x].alpha != pending[y].alpha) return pending[x].alpha < pending[y].alpha;
        return pending[x].a < pending[y].a;
    });

    const long total = ipow(d, 2 * t + 2);
    out.q = RMatrix::Zero(total, total);
    out.columns.reserve(pending.size());
    const long dv = ipow(d, t);

    for (size_t n = 0; n < order.size(); ++n) {
        const auto& pc = pending[order[n]];
        const RVector& ucol = qu.q.col(pc.cu);
        const RVector& vcol = qv.columns[pc.cv].vec;
        // W factor: frame basis vector of the selected eigenspace column
        RVector wcol = RVector::Zero(d);
        wcol(pc.w_col) = 1.0;
        // kron(ucol, vcol, wcol)
        for (long iu = 0; iu < ucol.size(); ++iu) {
            if (ucol(iu) == 0.0) continue;
            for (long iv = 0; iv < dv; ++iv) {
                const double uv = ucol(iu) * vcol(iv);
                if (uv == 0.0) continue;
                for (int iw = 0; iw < d; ++iw)
                    out.q((iu * dv + iv) * d + iw, static_cast<long>(n)) = uv * wcol(iw);
            }
        }
        out.columns.push_back(SchurColumn{static_cast<int>(bid_of[order[n]]), pc.a, pc.alpha});
    }

    // Drop empty blocks (zero dim or mult) and remap ids.
    std::vector<int> remap(out.blocks.size(), -1);
    std::vector<SchurBlock> kept;
    for (size_t b = 0; b < out.blocks.size(); ++b) {
        if (out.blocks[b].dim > 0 && out.blocks[b].mult > 0) {
            remap[b] = static_cast<int>(kept.size());
            kept.push_back(out.blocks[b]);
        }
    }
    for (auto& c : out.columns) c.block = remap[c.block];
    out.blocks = std::move(kept);

    out.check_consistent();
    return out;
}

std::string schur_basis_to_json(const SchurBasis& basis) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["total_dim"] = basis.q.rows();
    auto part_json = [](const Partition& p) { return p.parts; };
    j["blocks"] = nlohmann::ordered_json::array();
    for (const auto& b : basis.blocks) {
        nlohmann::ordered_json e;
        e["lambda"] = part_json(b.label.lambda);
        if (!b.label.composition.empty()) {
            e["composition"] = b.label.composition;
            auto shapes = nlohmann::ordered_json::array();
            for (const auto& p : b.label.block_partitions) shapes.push_back(part_json(p));
            e["block_partitions"] = shapes;
        }
        if (b.label.w_index >= 0) e["w_index"] = b.label.w_index;
        e["dim"] = b.dim;
        e["mult"] = b.mult;
        j["blocks"].push_back(e);
    }
    j["columns"] = nlohmann::ordered_json::array();
    for (const auto& c : basis.columns) j["columns"].push_back({c.block, c.a, c.alpha});
    std::vector<double> q;
    q.reserve(static_cast<size_t>(basis.q.size()));
    for (long r = 0; r < basis.q.rows(); ++r)
        for (long c = 0; c < basis.q.cols(); ++c) q.push_back(basis.q(r, c));
    j["q_row_major"] = q;
    return j.dump();
}

void save_schur_basis(const SchurBasis& basis, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_schur_basis: cannot open " + path);
    f << schur_basis_to_json(basis);
}

} // namespace shadow::rep
