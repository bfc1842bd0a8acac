#include "shadow/solver/conic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

namespace shadow::solver {

long svec_len(int side) { return static_cast<long>(side) * (side + 1) / 2; }

long svec_index(int side, int i, int j) {
    if (i > j) std::swap(i, j);
    // row-major upper triangle: (i,j) with i <= j
    return static_cast<long>(i) * side - static_cast<long>(i) * (i - 1) / 2 + (j - i);
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v, int side) {
    Eigen::MatrixXd m(side, side);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    long k = 0;
    for (int i = 0; i < side; ++i)
        for (int j = i; j < side; ++j, ++k) {
            if (i == j) m(i, j) = v(k);
            else m(i, j) = m(j, i) = v(k) * inv_sqrt2;
        }
    return m;
}

Eigen::VectorXd svec(const Eigen::MatrixXd& m) {
    const int side = static_cast<int>(m.rows());
    const double sqrt2 = std::sqrt(2.0);
    Eigen::VectorXd v(svec_len(side));
    long k = 0;
    for (int i = 0; i < side; ++i)
        for (int j = i; j < side; ++j, ++k) v(k) = (i == j) ? m(i, i) : sqrt2 * 0.5 * (m(i, j) + m(j, i));
    return v;
}

long ConicProblem::num_vars() const {
    long n = 0;
    for (const auto& b : blocks) n += b.len;
    return n;
}

long ConicProblem::add_psd_block(const std::string& id, int side) {
    VarBlock b;
    b.kind = BlockKind::Psd;
    b.id = id;
    b.side = side;
    b.len = svec_len(side);
    b.offset = num_vars();
    blocks.push_back(b);
    return b.offset;
}

long ConicProblem::add_free_block(const std::string& id, long len) {
    VarBlock b;
    b.kind = BlockKind::Free;
    b.id = id;
    b.len = len;
    b.offset = num_vars();
    blocks.push_back(b);
    return b.offset;
}

void ConicProblem::validate() const {
    const long n = num_vars();
    long off = 0;
    for (const auto& b : blocks) {
        if (b.offset != off) throw std::invalid_argument("ConicProblem: block offsets out of order");
        off += b.len;
    }
    for (const auto& row : equalities)
        for (const auto& [idx, val] : row.coeffs) {
            if (idx < 0 || idx >= n) throw std::invalid_argument("ConicProblem: coefficient references missing variable");
            (void)val;
        }
    for (const auto& [idx, val] : objective) {
        if (idx < 0 || idx >= n) throw std::invalid_argument("ConicProblem: objective references missing variable");
        (void)val;
    }
    for (const auto& s : socs)
        if (s.tau < 0 || s.tau >= n || s.offset < 0 || s.offset + s.dim > n || s.dim < 1)
            throw std::invalid_argument("ConicProblem: SOC block out of range");
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

void project_soc(double& tau, Eigen::VectorXd& v) {
    const double nv = v.norm();
    if (nv <= tau) return;
    if (nv <= -tau) {
        tau = 0;
        v.setZero();
        return;
    }
    const double s = 0.5 * (tau + nv);
    v *= s / nv;
    tau = s;
}

namespace {

struct Pattern {
    // global index partition
    std::vector<long> active;          // structural vars appearing in rows
    std::vector<long> active_of;       // global -> local (or -1)
    std::vector<SparseRow> ac_rows;    // rows over active vars only (local indices)
    // residual rows: r[res_var] = l . x_active - t
    std::vector<long> res_vars;
    Eigen::MatrixXd l; // res rows x active
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> l_row;
    Eigen::VectorXd t;
    bool fast = false;

    // threaded mat-vec products with the dense residual map
    Eigen::VectorXd l_mul(const Eigen::VectorXd& v) const {
        Eigen::VectorXd y(l_row.rows());
#pragma omp parallel for schedule(static)
        for (long i = 0; i < l_row.rows(); ++i) y(i) = l_row.row(i).dot(v);
        return y;
    }
    Eigen::VectorXd lt_mul(const Eigen::VectorXd& w) const {
        Eigen::VectorXd y(l.cols());
#pragma omp parallel for schedule(static)
        for (long j = 0; j < l.cols(); ++j) y(j) = l.col(j).dot(w);
        return y;
    }
};

Pattern analyze(const ConicProblem& p) {
    const long n = p.num_vars();
    std::vector<char> is_res(n, 0);
    for (const auto& s : p.socs)
        for (long k = 0; k < s.dim; ++k) is_res[s.offset + k] = 1;

    // count appearances of residual vars in rows
    std::vector<int> res_row_count(n, 0);
    bool fast = true;
    for (const auto& row : p.equalities) {
        int nres = 0;
        for (const auto& [idx, val] : row.coeffs) {
            if (is_res[idx] && val != 0.0) {
                ++nres;
                ++res_row_count[idx];
            }
        }
        if (nres > 1) fast = false;
    }
    for (long i = 0; i < n && fast; ++i)
        if (is_res[i] && res_row_count[i] > 1) fast = false;

    Pattern pat;
    pat.fast = fast;
    pat.active_of.assign(n, -1);
    std::vector<char> in_active(n, 0);
    auto touch = [&](long idx) {
        if (!in_active[idx]) {
            in_active[idx] = 1;
            pat.active.push_back(idx);
        }
    };

    if (!fast) {
        // generic path: every touched variable is "active"; all rows in ac_rows
        for (const auto& row : p.equalities)
            for (const auto& [idx, val] : row.coeffs)
                if (val != 0.0) touch(idx);
        std::sort(pat.active.begin(), pat.active.end());
        for (size_t k = 0; k < pat.active.size(); ++k) pat.active_of[pat.active[k]] = static_cast<long>(k);
        for (const auto& row : p.equalities) {
            SparseRow r;
            r.rhs = row.rhs;
            for (const auto& [idx, val] : row.coeffs)
                if (val != 0.0) r.coeffs.emplace_back(pat.active_of[idx], val);
            pat.ac_rows.push_back(std::move(r));
        }
        return pat;
    }

    std::vector<const SparseRow*> res_rows;
    for (const auto& row : p.equalities) {
        bool has_res = false;
        for (const auto& [idx, val] : row.coeffs)
            if (is_res[idx] && val != 0.0) has_res = true;
        if (has_res) res_rows.push_back(&row);
        for (const auto& [idx, val] : row.coeffs)
            if (!is_res[idx] && val != 0.0) touch(idx);
    }
    std::sort(pat.active.begin(), pat.active.end());
    for (size_t k = 0; k < pat.active.size(); ++k) pat.active_of[pat.active[k]] = static_cast<long>(k);

    for (const auto& row : p.equalities) {
        bool has_res = false;
        for (const auto& [idx, val] : row.coeffs)
            if (is_res[idx] && val != 0.0) has_res = true;
        if (has_res) continue;
        SparseRow r;
        r.rhs = row.rhs;
        for (const auto& [idx, val] : row.coeffs)
            if (val != 0.0) r.coeffs.emplace_back(pat.active_of[idx], val);
        pat.ac_rows.push_back(std::move(r));
    }

    pat.l.setZero(static_cast<long>(res_rows.size()), static_cast<long>(pat.active.size()));
    pat.t.setZero(static_cast<long>(res_rows.size()));
    pat.res_vars.resize(res_rows.size());
    for (size_t i = 0; i < res_rows.size(); ++i) {
        const auto& row = *res_rows[i];
        double rc = 0;
        long rv = -1;
        for (const auto& [idx, val] : row.coeffs)
            if (is_res[idx] && val != 0.0) {
                rv = idx;
                rc = val;
            }
        // normalize to  r = l.x - t
        pat.res_vars[i] = rv;
        for (const auto& [idx, val] : row.coeffs)
            if (!is_res[idx] && val != 0.0) pat.l(static_cast<long>(i), pat.active_of[idx]) = -val / rc;
        pat.t(static_cast<long>(i)) = -row.rhs / rc;
    }
    pat.l_row = pat.l;
    return pat;
}

// Projection onto {A_c x = b, r = L x - t} over (active, residual) vars.
class AffineProjector {
public:
    AffineProjector(const Pattern& pat, bool progress) : pat_(pat) {
        const long na = static_cast<long>(pat.active.size());
        const long nr = pat.l.rows();
        const long ne = static_cast<long>(pat.ac_rows.size());
        use_woodbury_ = pat.fast && nr > 0 && nr < na;

        if (progress) std::cerr << "progress phase=factorize active=" << na << " rows=" << ne
                                << " residual_rows=" << nr << " woodbury=" << (use_woodbury_ ? 1 : 0)
                                << std::endl;

        b_.setZero(ne);
        for (long i = 0; i < ne; ++i) b_(i) = pat.ac_rows[i].rhs;

        if (!pat.fast || !use_woodbury_) {
            // M = I + L^T L over active vars (identity when no residual rows)
            Eigen::MatrixXd m = Eigen::MatrixXd::Identity(na, na);
            if (pat.l.rows() > 0) m.noalias() += pat.l.transpose() * pat.l;
            mchol_.compute(m);
            if (mchol_.info() != Eigen::Success) throw std::runtime_error("conic solver: M factorization failed");
            if (ne > 0) {
                Eigen::MatrixXd act = Eigen::MatrixXd::Zero(ne, na);
                for (long i = 0; i < ne; ++i)
                    for (const auto& [idx, val] : pat.ac_rows[i].coeffs) act(i, idx) += val;
                ac_dense_ = act;
                minv_act_t_ = mchol_.solve(act.transpose());
                Eigen::MatrixXd s = act * minv_act_t_;
                regularize(s);
                schol_.compute(s);
                if (schol_.info() != Eigen::Success)
                    throw std::runtime_error("conic solver: Schur factorization failed");
            }
        } else {
            Eigen::MatrixXd g = Eigen::MatrixXd::Identity(nr, nr);
            g.noalias() += pat.l * pat.l.transpose();
            gchol_.compute(g);
            if (gchol_.info() != Eigen::Success) throw std::runtime_error("conic solver: G factorization failed");
            if (ne > 0) {
                Eigen::MatrixXd act = Eigen::MatrixXd::Zero(ne, na);
                for (long i = 0; i < ne; ++i)
                    for (const auto& [idx, val] : pat.ac_rows[i].coeffs) act(i, idx) += val;
                ac_dense_ = act;
                Eigen::MatrixXd aclt = act * pat.l.transpose(); // ne x nr
                Eigen::MatrixXd w = gchol_.solve(aclt.transpose());
                Eigen::MatrixXd s = act * act.transpose();
                s.noalias() -= aclt * w;
                regularize(s);
                schol_.compute(s);
                if (schol_.info() != Eigen::Success)
                    throw std::runtime_error("conic solver: Schur factorization failed");
            }
        }
    }

    // w is the full-length point; x output overwrites active/residual vars.
    void project(Eigen::VectorXd& w, double* bdotnu) const {
        const long na = static_cast<long>(pat_.active.size());
        const long nr = pat_.l.rows();
        const long ne = static_cast<long>(pat_.ac_rows.size());
        if (bdotnu) *bdotnu = 0;
        if (na == 0) return;

        Eigen::VectorXd wa(na);
        for (long k = 0; k < na; ++k) wa(k) = w(pat_.active[k]);
        Eigen::VectorXd g = wa;
        Eigen::VectorXd wr;
        if (nr > 0) {
            wr.resize(nr);
            for (long i = 0; i < nr; ++i) wr(i) = w(pat_.res_vars[i]);
            g.noalias() += pat_.lt_mul(wr + pat_.t);
        }

        Eigen::VectorXd x;
        if (!use_woodbury_) {
            Eigen::VectorXd h = mchol_.solve(g);
            if (ne > 0) {
                Eigen::VectorXd rhs = ac_dense_ * h - b_;
                Eigen::VectorXd nu = schol_.solve(rhs);
                // one refinement pass against the regularization shift
                nu += schol_.solve(rhs - (ac_dense_ * (minv_act_t_ * nu)));
                x = h - minv_act_t_ * nu;
                if (bdotnu) *bdotnu = b_.dot(nu);
            } else {
                x = h;
            }
        } else {
            auto minv = [&](const Eigen::VectorXd& v) {
                Eigen::VectorXd lv = pat_.l_mul(v);
                return Eigen::VectorXd(v - pat_.lt_mul(gchol_.solve(lv)));
            };
            Eigen::VectorXd h = minv(g);
            if (ne > 0) {
                Eigen::VectorXd rhs = ac_dense_ * h - b_;
                Eigen::VectorXd nu = schol_.solve(rhs);
                x = minv(g - ac_dense_.transpose() * nu);
                // one refinement pass against the regularization shift
                nu += schol_.solve(ac_dense_ * x - b_);
                x = minv(g - ac_dense_.transpose() * nu);
                if (bdotnu) *bdotnu = b_.dot(nu);
            } else {
                x = h;
            }
        }

        for (long k = 0; k < na; ++k) w(pat_.active[k]) = x(k);
        if (nr > 0) {
            Eigen::VectorXd r = pat_.l_mul(x) - pat_.t;
            if (bdotnu) *bdotnu += pat_.t.dot(r - wr); // residual-row multipliers
            for (long i = 0; i < nr; ++i) w(pat_.res_vars[i]) = r(i);
        }
    }

private:
    void regularize(Eigen::MatrixXd& s) {
        const double reg = 1e-10 * (1.0 + s.diagonal().cwiseAbs().mean());
        s.diagonal().array() += reg;
    }
    const Pattern& pat_;
    bool use_woodbury_ = false;
    Eigen::VectorXd b_;
    Eigen::MatrixXd ac_dense_;
    Eigen::MatrixXd minv_act_t_;
    Eigen::LLT<Eigen::MatrixXd> mchol_;
    Eigen::LLT<Eigen::MatrixXd> gchol_;
    Eigen::LDLT<Eigen::MatrixXd> schol_;
};

} // namespace

SolveResult solve(const ConicProblem& prob_in, const SolverSettings& settings) {
    ConicProblem prob = prob_in;
    prob.validate();
    if (settings.threads > 0) Eigen::setNbThreads(settings.threads);

    // Row equilibration and duplicate elimination. Rows that define an
    // epigraph residual are unique by construction (each holds its own
    // residual variable) and skip the canonicalization.
    {
        std::vector<char> is_res_var(prob.num_vars(), 0);
        for (const auto& sb : prob.socs)
            for (long k = 0; k < sb.dim; ++k) is_res_var[sb.offset + k] = 1;
        std::unordered_map<std::string, size_t> seen;
        std::vector<SparseRow> rows;
        for (auto row : prob.equalities) {
            bool touches_res = false;
            for (const auto& [idx, val] : row.coeffs)
                if (is_res_var[idx] && val != 0.0) touches_res = true;
            if (touches_res) {
                rows.push_back(std::move(row));
                continue;
            }
            std::sort(row.coeffs.begin(), row.coeffs.end());
            double mx = 0;
            for (const auto& [idx, val] : row.coeffs) mx = std::max(mx, std::abs(val));
            if (mx == 0) {
                if (std::abs(row.rhs) > 1e-12) throw std::runtime_error("conic solver: inconsistent empty row");
                continue;
            }
            if (settings.scaling) {
                for (auto& [idx, val] : row.coeffs) val /= mx;
                row.rhs /= mx;
            }
            const double keyscale = settings.scaling ? 1.0 : 1.0 / mx;
            std::ostringstream key;
            for (const auto& [idx, val] : row.coeffs)
                key << idx << ":" << std::llround(val * keyscale * 1e12) << ";";
            key << "=" << std::llround(row.rhs * keyscale * 1e12);
            if (seen.emplace(key.str(), rows.size()).second) rows.push_back(std::move(row));
        }
        prob.equalities = std::move(rows);
    }

    const long n = prob.num_vars();

    // Block-uniform column equilibration: rescaling variables changes the
    // geometry between the affine set and the cone product, which is what
    // drives the splitting's convergence. Scaling is uniform within each
    // PSD block and each SOC block so every cone is preserved.
    Eigen::VectorXd var_scale = Eigen::VectorXd::Ones(n);
    if (settings.scaling) {
        Eigen::VectorXd colnorm2 = Eigen::VectorXd::Zero(n);
        for (const auto& row : prob.equalities)
            for (const auto& [idx, val] : row.coeffs) colnorm2(idx) += val * val;
        std::vector<char> in_soc(n, 0);
        for (const auto& sb : prob.socs) {
            double m2 = colnorm2(sb.tau);
            for (long k = 0; k < sb.dim; ++k) m2 = std::max(m2, colnorm2(sb.offset + k));
            const double e = (m2 > 0) ? std::clamp(1.0 / std::sqrt(std::sqrt(m2)), 1e-3, 1e3) : 1.0;
            var_scale(sb.tau) = e;
            in_soc[sb.tau] = 1;
            for (long k = 0; k < sb.dim; ++k) {
                var_scale(sb.offset + k) = e;
                in_soc[sb.offset + k] = 1;
            }
        }
        for (const auto& b : prob.blocks) {
            if (b.kind == BlockKind::Psd) {
                double m2 = 0;
                for (long k = 0; k < b.len; ++k) m2 = std::max(m2, colnorm2(b.offset + k));
                const double e = (m2 > 0) ? std::clamp(1.0 / std::sqrt(std::sqrt(m2)), 1e-3, 1e3) : 1.0;
                for (long k = 0; k < b.len; ++k) var_scale(b.offset + k) = e;
            } else {
                for (long k = 0; k < b.len; ++k) {
                    if (in_soc[b.offset + k]) continue;
                    const double m2 = colnorm2(b.offset + k);
                    var_scale(b.offset + k) =
                        (m2 > 0) ? std::clamp(1.0 / std::sqrt(std::sqrt(m2)), 1e-3, 1e3) : 1.0;
                }
            }
        }
        for (auto& row : prob.equalities)
            for (auto& [idx, val] : row.coeffs) val *= var_scale(idx);
    }

    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (const auto& [idx, val] : prob.objective) c(idx) += val * var_scale(idx);
    // only scale down an oversized objective; a tiny one is left alone
    double cscale = 1.0;
    if (settings.scaling) {
        const double cn = c.cwiseAbs().maxCoeff();
        if (cn > 1.0) cscale = 1.0 / cn;
    }

    const Pattern pat = analyze(prob);
    const AffineProjector proj(pat, settings.progress);

    Eigen::VectorXd z = Eigen::VectorXd::Zero(n), u = Eigen::VectorXd::Zero(n);
    if (settings.warm_start.size() == n) z = settings.warm_start.cwiseQuotient(var_scale);
    Eigen::VectorXd x = z, zprev = z;
    double rho = settings.rho;
    double bdotnu = 0;

    SolveResult res;
    const Eigen::VectorXd cs = c * cscale;

    auto cone_project = [&](Eigen::VectorXd& v) {
        for (const auto& b : prob.blocks) {
            if (b.kind != BlockKind::Psd) continue;
            Eigen::VectorXd seg = v.segment(b.offset, b.len);
            v.segment(b.offset, b.len) = svec(project_psd(smat(seg, b.side)));
        }
        for (const auto& s : prob.socs) {
            double tau = v(s.tau);
            Eigen::VectorXd slice = v.segment(s.offset, s.dim);
            project_soc(tau, slice);
            v(s.tau) = tau;
            v.segment(s.offset, s.dim) = slice;
        }
    };

    long iter = 0;
    for (; iter < settings.max_iter; ++iter) {
        // x-step: projection onto the affine set of (z - u - c/rho)
        x = z - u - cs / rho;
        proj.project(x, &bdotnu);
        // relaxation + cone step
        Eigen::VectorXd v = settings.over_relax * x + (1 - settings.over_relax) * z + u;
        zprev = z;
        z = v;
        cone_project(z);
        u = v - z;

        if ((iter + 1) % settings.check_every == 0 || iter + 1 == settings.max_iter) {
            const double rp = (x - z).norm() / (1.0 + std::max(x.norm(), z.norm()));
            const double rd = rho * (z - zprev).norm() / (1.0 + rho * u.norm());
            const double pobj = c.dot(z);
            const double dobj = -rho / cscale * bdotnu;
            const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
            if (settings.progress && (iter + 1) % (settings.check_every * 40) == 0)
                std::cerr << "progress phase=solve iter=" << iter + 1 << " rp=" << rp << " rd=" << rd
                          << " gap=" << gap << " obj=" << pobj << " rho=" << rho << " unorm=" << u.norm()
                          << " znorm=" << z.norm() << std::endl;
            res.merit_history.emplace_back(iter + 1, rp + rd);
            if (rp < settings.eps_primal && rd < settings.eps_dual && gap < settings.eps_gap) {
                res.status = SolveStatus::Optimal;
                res.primal_residual = rp;
                res.dual_residual = rd;
                res.gap = gap;
                ++iter;
                break;
            }
            res.primal_residual = rp;
            res.dual_residual = rd;
            res.gap = gap;
            // residual balancing early on; u carries rho * dual, so it is
            // rescaled with every change. After the burn-in phase rho is
            // frozen so the iteration can contract undisturbed.
            const long burn_in = std::max<long>(3000, settings.max_iter / 20);
            if (settings.adaptive_rho && iter < burn_in && (iter + 1) % 500 == 0) {
                const double ratio = std::sqrt(rp / std::max(rd, 1e-14));
                const double factor = std::clamp(ratio, 0.5, 2.0);
                if ((factor > 1.5 || factor < 0.67) && rho * factor > 1e-5 && rho * factor < 1e5) {
                    rho *= factor;
                    u /= factor;
                }
            }
        }
    }
    if (res.status != SolveStatus::Optimal) {
        res.status = SolveStatus::MaxIter;
        if (res.primal_residual > 1e-2) res.status = SolveStatus::InfeasibleLikely;
    }

    res.iterations = iter;
    res.x = var_scale.cwiseProduct(z);
    res.objective = c.dot(z);
    for (const auto& b : prob.blocks)
        if (b.kind == BlockKind::Psd) {
            Eigen::VectorXd seg = var_scale.segment(b.offset, b.len).cwiseProduct(z.segment(b.offset, b.len));
            res.psd_values[b.id] = smat(seg, b.side);
        }
    return res;
}

ConicProblem epigraph_formulate(ConicProblem base, const std::vector<ResidualMap>& samples) {
    if (samples.empty()) throw std::invalid_argument("epigraph_formulate: no samples");
    const double w = 1.0 / static_cast<double>(samples.size());
    for (size_t s = 0; s < samples.size(); ++s) {
        const long k = static_cast<long>(samples[s].rows.size());
        if (k < 1) throw std::invalid_argument("epigraph_formulate: empty residual map");
        const long off = base.add_free_block("soc_" + std::to_string(s), k + 1);
        base.socs.push_back(SocBlock{off, off + 1, k});
        base.objective.emplace_back(off, w);
        for (long i = 0; i < k; ++i) {
            SparseRow row = samples[s].rows[i];
            row.coeffs.emplace_back(off + 1 + i, -1.0);
            base.equalities.push_back(std::move(row));
        }
    }
    return base;
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::MaxIter: return "maxIter";
        case SolveStatus::InfeasibleLikely: return "infeasibleLikely";
    }
    return "unknown";
}

std::string problem_to_json(const ConicProblem& p) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["blocks"] = nlohmann::ordered_json::array();
    for (const auto& b : p.blocks) {
        nlohmann::ordered_json e;
        e["id"] = b.id;
        e["kind"] = b.kind == BlockKind::Psd ? "psd" : "free";
        if (b.kind == BlockKind::Psd) e["side"] = b.side;
        e["len"] = b.len;
        j["blocks"].push_back(e);
    }
    j["socs"] = nlohmann::ordered_json::array();
    for (const auto& s : p.socs) j["socs"].push_back({s.tau, s.offset, s.dim});
    auto triplets = nlohmann::ordered_json::array();
    auto rhs = nlohmann::ordered_json::array();
    for (size_t r = 0; r < p.equalities.size(); ++r) {
        for (const auto& [idx, val] : p.equalities[r].coeffs)
            triplets.push_back({static_cast<long>(r), idx, val});
        rhs.push_back(p.equalities[r].rhs);
    }
    j["equalities"] = {{"rows", p.equalities.size()}, {"triplets", triplets}, {"rhs", rhs}};
    auto obj = nlohmann::ordered_json::array();
    for (const auto& [idx, val] : p.objective) obj.push_back({idx, val});
    j["objective"] = obj;
    return j.dump();
}

ConicProblem problem_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    if (j.at("version").get<int>() != 1) throw std::runtime_error("problem_from_json: unsupported version");
    ConicProblem p;
    for (const auto& e : j.at("blocks")) {
        if (e.at("kind") == "psd") p.add_psd_block(e.at("id"), e.at("side").get<int>());
        else p.add_free_block(e.at("id"), e.at("len").get<long>());
    }
    for (const auto& e : j.at("socs")) p.socs.push_back(SocBlock{e[0].get<long>(), e[1].get<long>(), e[2].get<long>()});
    const auto& eq = j.at("equalities");
    p.equalities.resize(eq.at("rows").get<size_t>());
    for (const auto& t : eq.at("triplets"))
        p.equalities[t[0].get<size_t>()].coeffs.emplace_back(t[1].get<long>(), t[2].get<double>());
    const auto& rhs = eq.at("rhs");
    for (size_t r = 0; r < p.equalities.size(); ++r) p.equalities[r].rhs = rhs[r].get<double>();
    for (const auto& o : j.at("objective")) p.objective.emplace_back(o[0].get<long>(), o[1].get<double>());
    p.validate();
    return p;
}

void export_problem(const ConicProblem& p, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("export_problem: cannot open " + path);
    f << problem_to_json(p);
}

ConicProblem import_problem(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("import_problem: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return problem_from_json(ss.str());
}

std::string result_to_json(const SolveResult& r, const SolverSettings& s) {
    nlohmann::ordered_json j;
    j["status"] = to_string(r.status);
    j["objective"] = r.objective;
    j["residuals"] = {{"primal", r.primal_residual}, {"dual", r.dual_residual}, {"gap", r.gap}};
    j["iterations"] = r.iterations;
    j["settings"] = {{"max_iter", s.max_iter}, {"eps_primal", s.eps_primal}, {"eps_dual", s.eps_dual},
                     {"eps_gap", s.eps_gap},   {"scaling", s.scaling},       {"rho", s.rho},
                     {"over_relax", s.over_relax}, {"seed", s.seed}};
    for (const auto& [id, m] : r.psd_values) {
        std::vector<double> vals;
        vals.reserve(static_cast<size_t>(m.size()));
        for (long i = 0; i < m.rows(); ++i)
            for (long k = 0; k < m.cols(); ++k) vals.push_back(m(i, k));
        j["blocks"][id] = vals;
    }
    return j.dump();
}

} // namespace shadow::solver
