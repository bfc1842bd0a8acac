#include "shadow/comb/comb.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace shadow::comb {

std::string to_string(Architecture a) {
    return a == Architecture::Sequential ? "sequential" : "parallel";
}

Architecture architecture_from_string(const std::string& s) {
    if (s == "sequential" || s == "seq") return Architecture::Sequential;
    if (s == "parallel" || s == "par") return Architecture::Parallel;
    throw std::invalid_argument("unknown architecture: " + s);
}

CombSpec::CombSpec(int d_, int t_, Architecture a) : d(d_), t(t_), architecture(a) {
    if (d < 2) throw std::invalid_argument("CombSpec: d must be >= 2");
    if (t < 1) throw std::invalid_argument("CombSpec: t must be >= 1");
}

SubsystemLayout CombSpec::layout() const {
    std::vector<std::string> labels;
    labels.push_back("P");
    if (architecture == Architecture::Sequential) {
        for (int i = 1; i <= t; ++i) {
            labels.push_back("I" + std::to_string(i));
            labels.push_back("O" + std::to_string(i));
        }
    } else {
        for (int i = 1; i <= t; ++i) labels.push_back("I" + std::to_string(i));
        for (int i = 1; i <= t; ++i) labels.push_back("O" + std::to_string(i));
    }
    labels.push_back("F");
    return SubsystemLayout(std::vector<int>(labels.size(), d), labels);
}

CombChoi::CombChoi(CombSpec s, IndexedOperator o) : spec(s), op(std::move(o)) {
    const auto want = spec.layout();
    if (op.layout.labels != want.labels || op.layout.dims != want.dims)
        throw std::invalid_argument("CombChoi: layout does not match architecture");
}

Observable::Observable(CMatrix m) : matrix(std::move(m)) {
    if (!is_hermitian(matrix, 1e-10)) throw std::invalid_argument("Observable: not Hermitian");
}

const rep::SpectralDecomposition& Observable::decomposition() const {
    if (!spec_) spec_ = rep::centralizer_decomposition(matrix);
    return *spec_;
}

double ValidationReport::max_residual() const {
    double m = 0;
    for (const auto& e : entries) m = std::max(m, e.residual);
    return m;
}

namespace {

double psd_residual(const CMatrix& c) {
    const double herm = (c - c.adjoint()).cwiseAbs().maxCoeff();
    const double neg = std::max(0.0, -min_eigenvalue(c));
    return std::max(herm, neg);
}

// || lhs - rhs (x) I/d ||_max where the identity factor is appended last.
double marginal_residual(const IndexedOperator& lhs, const IndexedOperator& rhs, int d) {
    CMatrix expected = kron(rhs.mat, CMatrix::Identity(d, d) / static_cast<double>(d));
    return (lhs.mat - expected).cwiseAbs().maxCoeff();
}

} // namespace

ValidationReport validate_sequential_comb(const IndexedOperator& c, double tol) {
    ValidationReport rep;
    rep.tolerance = tol;
    const int n = c.layout.size();
    if (n < 4 || n % 2 != 0 || c.layout.labels.front() != "P" || c.layout.labels.back() != "F")
        throw std::invalid_argument("validate_sequential_comb: layout is not (P, I1, O1, ..., F)");
    const int t = (n - 2) / 2;
    const int d = c.layout.dims[0];
    for (int i = 1; i <= t; ++i)
        if (!c.layout.has("I" + std::to_string(i)) || !c.layout.has("O" + std::to_string(i)))
            throw std::invalid_argument("validate_sequential_comb: missing slot label");

    rep.entries.push_back({"psd", psd_residual(c.mat)});

    std::vector<std::string> traced = {"F"};
    for (int k = t; k >= 1; --k) {
        IndexedOperator lhs = partial_trace(c, traced);
        std::vector<std::string> with_x = traced;
        with_x.push_back("O" + std::to_string(k));
        IndexedOperator rhs = partial_trace(c, with_x);
        rep.entries.push_back({"marginal_O" + std::to_string(k), marginal_residual(lhs, rhs, d)});
        traced = with_x;
        traced.push_back("I" + std::to_string(k));
    }
    IndexedOperator lhs = partial_trace(c, traced);
    std::vector<std::string> all = traced;
    all.push_back("P");
    IndexedOperator rhs = partial_trace(c, all);
    rep.entries.push_back({"marginal_P", marginal_residual(lhs, rhs, d)});

    double want_trace = std::pow(static_cast<double>(d), t + 1);
    rep.entries.push_back({"trace", std::abs(c.mat.trace() - Complex(want_trace, 0))});
    return rep;
}

ValidationReport validate_parallel_comb(const IndexedOperator& c, double tol) {
    ValidationReport rep;
    rep.tolerance = tol;
    const int n = c.layout.size();
    if (n < 4 || n % 2 != 0 || c.layout.labels.front() != "P" || c.layout.labels.back() != "F")
        throw std::invalid_argument("validate_parallel_comb: layout is not (P, I.., O.., F)");
    const int t = (n - 2) / 2;
    const int d = c.layout.dims[0];
    std::vector<std::string> ins, outs;
    for (int i = 1; i <= t; ++i) {
        ins.push_back("I" + std::to_string(i));
        outs.push_back("O" + std::to_string(i));
    }
    for (int i = 0; i < t; ++i)
        if (c.layout.labels[1 + i] != ins[i] || c.layout.labels[1 + t + i] != outs[i])
            throw std::invalid_argument("validate_parallel_comb: layout is not (P, I1..It, O1..Ot, F)");

    rep.entries.push_back({"psd", psd_residual(c.mat)});

    // tr_F(S) = tr_{OF}(S) (x) I_O / d^t
    IndexedOperator lhs = partial_trace(c, {"F"});
    std::vector<std::string> of = outs;
    of.push_back("F");
    IndexedOperator rhs = partial_trace(c, of);
    CMatrix expected =
        kron(rhs.mat, CMatrix::Identity(static_cast<long>(std::pow(d, t)), static_cast<long>(std::pow(d, t))) /
                          std::pow(static_cast<double>(d), t));
    rep.entries.push_back({"marginal_O", (lhs.mat - expected).cwiseAbs().maxCoeff()});

    // tr_{IOF}(S) = tr_{PIOF}(S) (x) I_P / d
    std::vector<std::string> iof = ins;
    iof.insert(iof.end(), of.begin(), of.end());
    IndexedOperator lhs2 = partial_trace(c, iof);
    std::vector<std::string> piof = iof;
    piof.push_back("P");
    IndexedOperator rhs2 = partial_trace(c, piof);
    rep.entries.push_back({"marginal_P", marginal_residual(lhs2, rhs2, d)});

    double want_trace = std::pow(static_cast<double>(d), t + 1);
    rep.entries.push_back({"trace", std::abs(c.mat.trace() - Complex(want_trace, 0))});
    return rep;
}

ValidationReport validate_comb(const CombChoi& c, double tol) {
    return c.spec.architecture == Architecture::Sequential ? validate_sequential_comb(c.op, tol)
                                                           : validate_parallel_comb(c.op, tol);
}

namespace {

// Choi of the channel rho -> tr_env[ S rho S^dag ] for an isometry S with
// output split (kept (x) env); env_dim == 1 means no environment.
IndexedOperator isometry_channel_choi(const CMatrix& s, const SubsystemLayout& in_layout,
                                      const SubsystemLayout& kept_layout, int env_dim) {
    const long din = in_layout.total_dim();
    const long dkept = kept_layout.total_dim();
    if (s.cols() != din || s.rows() != dkept * env_dim)
        throw std::invalid_argument("isometry_channel_choi: dimension mismatch");
    CMatrix choi = CMatrix::Zero(din * dkept, din * dkept);
    for (long i = 0; i < din; ++i)
        for (long j = 0; j < din; ++j)
            for (long a = 0; a < dkept; ++a)
                for (long b = 0; b < dkept; ++b) {
                    Complex acc = 0;
                    for (int e = 0; e < env_dim; ++e) acc += s(a * env_dim + e, i) * std::conj(s(b * env_dim + e, j));
                    choi(i * dkept + a, j * dkept + b) = acc;
                }
    SubsystemLayout layout;
    layout.dims = in_layout.dims;
    layout.labels = in_layout.labels;
    layout.dims.insert(layout.dims.end(), kept_layout.dims.begin(), kept_layout.dims.end());
    layout.labels.insert(layout.labels.end(), kept_layout.labels.begin(), kept_layout.labels.end());
    return IndexedOperator(std::move(choi), std::move(layout));
}

} // namespace

CombChoi random_comb(const CombSpec& spec, Rng& rng, int aux_dim) {
    const int d = spec.d, t = spec.t;
    const int aux = aux_dim > 0 ? aux_dim : d * d;

    if (spec.architecture == Architecture::Sequential) {
        // E1 : P -> (A1, I1)
        CMatrix s1 = haar_isometry(aux * d, d, rng);
        IndexedOperator acc = isometry_channel_choi(
            s1, SubsystemLayout({d}, {"P"}), SubsystemLayout({aux, d}, {"A1", "I1"}), 1);
        // E_i : (A_{i-1}, O_{i-1}) -> (A_i, I_i)
        for (int i = 2; i <= t; ++i) {
            CMatrix u = haar_unitary(aux * d, rng);
            IndexedOperator e = isometry_channel_choi(
                u,
                SubsystemLayout({aux, d}, {"A" + std::to_string(i - 1), "O" + std::to_string(i - 1)}),
                SubsystemLayout({aux, d}, {"A" + std::to_string(i), "I" + std::to_string(i)}), 1);
            acc = link_product(acc, e);
        }
        // D : (A_t, O_t) -> F with environment of size aux
        CMatrix sd = haar_unitary(aux * d, rng);
        IndexedOperator dec = isometry_channel_choi(
            sd, SubsystemLayout({aux, d}, {"A" + std::to_string(t), "O" + std::to_string(t)}),
            SubsystemLayout({d}, {"F"}), aux);
        acc = link_product(acc, dec);
        acc = permute_subsystems(acc, spec.layout().labels);
        return CombChoi(spec, std::move(acc));
    }

    // Parallel: E : P -> (A, I1..It), D : (A, O1..Ot) -> F.
    const long dio = static_cast<long>(std::pow(d, t));
    SubsystemLayout ins, outs;
    ins.dims.assign(t, d);
    outs.dims.assign(t, d);
    for (int i = 1; i <= t; ++i) {
        ins.labels.push_back("I" + std::to_string(i));
        outs.labels.push_back("O" + std::to_string(i));
    }
    CMatrix se = haar_isometry(static_cast<int>(aux * dio), d, rng);
    SubsystemLayout enc_out({aux}, {"A"});
    enc_out.dims.insert(enc_out.dims.end(), ins.dims.begin(), ins.dims.end());
    enc_out.labels.insert(enc_out.labels.end(), ins.labels.begin(), ins.labels.end());
    IndexedOperator enc = isometry_channel_choi(se, SubsystemLayout({d}, {"P"}), enc_out, 1);

    SubsystemLayout dec_in({aux}, {"A"});
    dec_in.dims.insert(dec_in.dims.end(), outs.dims.begin(), outs.dims.end());
    dec_in.labels.insert(dec_in.labels.end(), outs.labels.begin(), outs.labels.end());
    CMatrix sd = haar_unitary(static_cast<int>(aux * dio), rng);
    IndexedOperator dec =
        isometry_channel_choi(sd, dec_in, SubsystemLayout({d}, {"F"}), static_cast<int>(aux * dio / d));
    IndexedOperator acc = link_product(enc, dec);
    acc = permute_subsystems(acc, spec.layout().labels);
    return CombChoi(spec, std::move(acc));
}

IndexedOperator apply_comb(const CombChoi& c, const CMatrix& u) {
    if (!is_unitary(u, 1e-8)) throw std::invalid_argument("apply_comb: u is not unitary");
    if (u.rows() != c.spec.d) throw std::invalid_argument("apply_comb: wrong dimension");
    const int d = c.spec.d, t = c.spec.t;
    CMatrix uu = choi_vector(u) * choi_vector(u).adjoint();
    IndexedOperator plugged(uu, SubsystemLayout({d, d}, {"I1", "O1"}));
    IndexedOperator all = plugged;
    for (int i = 2; i <= t; ++i) {
        IndexedOperator next(uu, SubsystemLayout({d, d}, {"I" + std::to_string(i), "O" + std::to_string(i)}));
        CMatrix joint = kron(all.mat, next.mat);
        SubsystemLayout jl = all.layout;
        jl.dims.insert(jl.dims.end(), next.layout.dims.begin(), next.layout.dims.end());
        jl.labels.insert(jl.labels.end(), next.layout.labels.begin(), next.layout.labels.end());
        all = IndexedOperator(std::move(joint), std::move(jl));
    }
    IndexedOperator out = link_product(c.op, all);
    return permute_subsystems(out, {"P", "F"});
}

CMatrix dual_on_observable(const IndexedOperator& channel_choi, const CMatrix& o) {
    if (channel_choi.layout.size() != 2)
        throw std::invalid_argument("dual_on_observable: expected a (P, F) channel Choi");
    const int dp = channel_choi.layout.dims[0];
    const int df = channel_choi.layout.dims[1];
    if (o.rows() != df) throw std::invalid_argument("dual_on_observable: observable dimension mismatch");
    CMatrix m = channel_choi.mat.transpose() * kron(CMatrix::Identity(dp, dp), o.transpose());
    IndexedOperator tmp(std::move(m), channel_choi.layout);
    return partial_trace(tmp, {channel_choi.layout.labels[1]}).mat;
}

double shadow_residual(const CombChoi& c, const CMatrix& o, const CMatrix& u) {
    IndexedOperator choi = apply_comb(c, u);
    CMatrix lhs = dual_on_observable(choi, o);
    CMatrix target = u * o * u.adjoint();
    return (lhs - target).norm();
}

double objective_estimate(const CombChoi& c, const CMatrix& o, int n_samples, Rng rng) {
    if (n_samples < 1) throw std::invalid_argument("objective_estimate: need at least one sample");
    double acc = 0;
    for (int s = 0; s < n_samples; ++s) acc += shadow_residual(c, o, haar_unitary(c.spec.d, rng));
    return acc / n_samples;
}

std::string comb_to_json(const CombChoi& c) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["architecture"] = to_string(c.spec.architecture);
    j["d"] = c.spec.d;
    j["t"] = c.spec.t;
    j["labels"] = c.op.layout.labels;
    j["dims"] = c.op.layout.dims;
    std::vector<double> entries;
    entries.reserve(static_cast<size_t>(2 * c.op.mat.size()));
    for (long r = 0; r < c.op.mat.rows(); ++r)
        for (long col = 0; col < c.op.mat.cols(); ++col) {
            entries.push_back(c.op.mat(r, col).real());
            entries.push_back(c.op.mat(r, col).imag());
        }
    j["entries_re_im_row_major"] = entries;
    return j.dump();
}

CombChoi comb_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    if (j.at("format_version").get<int>() != 1)
        throw std::runtime_error("comb_from_json: unsupported format version");
    CombSpec spec(j.at("d").get<int>(), j.at("t").get<int>(),
                  architecture_from_string(j.at("architecture").get<std::string>()));
    auto labels = j.at("labels").get<std::vector<std::string>>();
    auto dims = j.at("dims").get<std::vector<int>>();
    SubsystemLayout layout(dims, labels);
    const long n = layout.total_dim();
    auto entries = j.at("entries_re_im_row_major").get<std::vector<double>>();
    if (static_cast<long>(entries.size()) != 2 * n * n)
        throw std::runtime_error("comb_from_json: entry count mismatch");
    CMatrix m(n, n);
    size_t k = 0;
    for (long r = 0; r < n; ++r)
        for (long c = 0; c < n; ++c) {
            m(r, c) = Complex(entries[k], entries[k + 1]);
            k += 2;
        }
    return CombChoi(spec, IndexedOperator(std::move(m), std::move(layout)));
}

void save_comb(const CombChoi& c, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_comb: cannot open " + path);
    f << comb_to_json(c);
}

CombChoi load_comb(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_comb: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return comb_from_json(ss.str());
}

} // namespace shadow::comb
