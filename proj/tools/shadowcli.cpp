// Command-line front end: shadow-inversion SDP solves, circuit verification,
// variable counting, Schur-basis checks, and the summary table runner.

#include "CLI11.hpp"

#include "shadow/circuit/qubit_inversion.hpp"
#include "shadow/rep/moments.hpp"
#include "shadow/sdp/reduction.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>

#include "json.hpp"

using namespace shadow;
using nlohmann::ordered_json;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

CMatrix parse_observable(const std::string& spec, int d) {
    if (spec == "Z") {
        if (d != 2) throw std::invalid_argument("observable Z requires d = 2");
        return pauli_z();
    }
    if (!spec.empty() && spec[0] == '@') {
        std::ifstream f(spec.substr(1));
        if (!f) throw std::invalid_argument("cannot open observable file " + spec.substr(1));
        auto j = nlohmann::json::parse(f);
        if (j.contains("diag")) {
            auto diag = j.at("diag").get<std::vector<double>>();
            if (static_cast<int>(diag.size()) != d)
                throw std::invalid_argument("observable diagonal has wrong dimension");
            CMatrix o = CMatrix::Zero(d, d);
            for (int i = 0; i < d; ++i) o(i, i) = diag[i];
            return o;
        }
        auto entries = j.at("entries_re_im_row_major").get<std::vector<double>>();
        if (static_cast<long>(entries.size()) != 2l * d * d)
            throw std::invalid_argument("observable entries have wrong dimension");
        CMatrix o(d, d);
        size_t k = 0;
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) {
                o(r, c) = Complex(entries[k], entries[k + 1]);
                k += 2;
            }
        if (!is_hermitian(o, 1e-10)) throw std::invalid_argument("observable is not Hermitian");
        return o;
    }
    // comma-separated diagonal
    CMatrix o = CMatrix::Zero(d, d);
    std::stringstream ss(spec);
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',')) {
        if (i >= d) throw std::invalid_argument("too many diagonal entries for d");
        o(i, i) = std::stod(tok);
        ++i;
    }
    if (i != d) throw std::invalid_argument("observable diagonal has wrong dimension");
    return o;
}

void write_record(const std::string& path, const ordered_json& record) {
    if (path.empty()) return;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file " + path);
    f << record.dump(2) << "\n";
}

int default_threads() {
    if (const char* env = std::getenv("SHADOWINV_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 0;
}

struct CommonOpts {
    int threads = default_threads();
    bool quiet = false;
};

struct SolveOpts {
    int d = 2;
    int t = 1;
    std::string arch = "sequential";
    std::string obs = "Z";
    int samples = 2000;
    std::uint64_t seed = 42;
    bool full = false;
    bool reduced = true;
    long max_iter = 200000;
    double eps_primal = 1e-6, eps_dual = 1e-6, eps_gap = 1e-5;
    double rho = 1.0;
    std::string out, export_comb, export_problem;
};

int run_solve(const CommonOpts& common, const SolveOpts& o) {
    Timer timer;
    const CMatrix obs = parse_observable(o.obs, o.d);
    const auto arch = comb::architecture_from_string(o.arch);

    solver::SolverSettings st;
    st.max_iter = o.max_iter;
    st.eps_primal = o.eps_primal;
    st.eps_dual = o.eps_dual;
    st.eps_gap = o.eps_gap;
    st.rho = o.rho;
    st.seed = o.seed;
    st.threads = common.threads;
    st.progress = !common.quiet;

    ordered_json record;
    record["schema_version"] = 1;
    record["command"] = "solve";
    record["config"] = {{"d", o.d},         {"t", o.t},           {"architecture", o.arch},
                        {"observable", o.obs}, {"samples", o.samples}, {"seed", o.seed},
                        {"reduced", !o.full},  {"max_iter", o.max_iter}};

    solver::SolveResult res;
    comb::CombChoi solution_comb;
    long variable_count = 0;
    if (o.full) {
        sdp::FullProblem fp = sdp::assemble_full(obs, o.t, arch, o.samples, Rng(o.seed), 4096,
                                                 !common.quiet);
        variable_count = fp.conic.num_vars();
        if (!o.export_problem.empty()) solver::export_problem(fp.conic, o.export_problem);
        res = solver::solve(fp.conic, st);
        solution_comb = sdp::full_solution_choi(fp, res);
    } else {
        sdp::ReducedProblem rp =
            sdp::assemble_reduced(obs, o.t, arch, o.samples, Rng(o.seed), !common.quiet);
        variable_count = rp.basis.variable_count();
        if (!o.export_problem.empty()) solver::export_problem(rp.conic, o.export_problem);
        res = solver::solve(rp.conic, st);
        solution_comb = sdp::reconstruct_choi(sdp::extract_block_solution(rp, res), rp);
    }

    // fresh-sample evaluation of the unsquared mean Frobenius residual
    const double fresh =
        comb::objective_estimate(solution_comb, obs, o.samples, Rng(o.seed).fork(0xf4e5));
    const auto validation = comb::validate_comb(solution_comb, 1e-6);

    record["results"] = {{"status", solver::to_string(res.status)},
                         {"objective", res.objective},
                         {"fresh_sample_objective", fresh},
                         {"variable_count", variable_count},
                         {"iterations", res.iterations},
                         {"residuals",
                          {{"primal", res.primal_residual},
                           {"dual", res.dual_residual},
                           {"gap", res.gap},
                           {"comb_validation", validation.max_residual()}}}};
    if (!o.export_comb.empty()) {
        comb::save_comb(solution_comb, o.export_comb);
        record["artifacts"]["comb"] = o.export_comb;
    }
    if (!o.export_problem.empty()) record["artifacts"]["problem"] = o.export_problem;
    record["wall_time_s"] = timer.seconds();
    record["timestamp_utc"] = utc_timestamp();
    write_record(o.out, record);
    if (!common.quiet)
        std::cout << "solve " << o.arch << " d=" << o.d << " t=" << o.t
                  << " objective=" << res.objective << " fresh=" << fresh
                  << " status=" << solver::to_string(res.status) << std::endl;
    return res.status == solver::SolveStatus::Optimal ? 0 : 2;
}

struct VerifyOpts {
    int trials = 100;
    std::uint64_t seed = 42;
    std::string out;
};

int run_verify_circuit(const CommonOpts& common, const VerifyOpts& o) {
    if (o.trials < 1) throw std::invalid_argument("--trials must be positive");
    Timer timer;
    Rng rng(o.seed);
    const circuit::CircuitGates gates = circuit::build_gates();

    double worst_identity = 0, worst_prob = 0, worst_fit = 0, worst_fidelity = 0;
    bool constraints_ok = true;
    std::vector<double> residuals, fitted_p, fitted_im_r, probabilities;
    for (int trial = 0; trial < o.trials; ++trial) {
        const CMatrix u = haar_unitary(2, rng);
        IndexedOperator choi = circuit::simulate_shadow_channel(u, gates);
        double sample_worst = 0;
        for (int k = 0; k < 10; ++k) {
            const CMatrix rho = random_density(2, rng);
            IndexedOperator state(rho, SubsystemLayout({2}, {"P"}));
            const CMatrix out = link_product(state, choi).mat;
            const Complex lhs = (out * pauli_z()).trace();
            const Complex rhs = (u.adjoint() * rho * u * pauli_z()).trace();
            sample_worst = std::max(sample_worst, std::abs(lhs - rhs));
        }
        residuals.push_back(sample_worst);
        worst_identity = std::max(worst_identity, sample_worst);
        const auto fit = circuit::fit_structure(choi, u);
        fitted_p.push_back(fit.p);
        fitted_im_r.push_back(fit.r.imag());
        worst_fit = std::max(worst_fit, fit.fit_residual);
        constraints_ok = constraints_ok && fit.constraints_ok(1e-8);
        const auto post = circuit::postselected_inversion(u, gates);
        probabilities.push_back(post.probability);
        worst_prob = std::max(worst_prob, std::abs(post.probability - 1.0 / 3.0));
        const CVector udag = choi_vector(u.adjoint());
        const Complex fid = udag.adjoint() * post.conditional_choi.mat * udag;
        worst_fidelity = std::max(worst_fidelity, std::abs(fid / 4.0 - Complex(1, 0)));
    }

    const bool pass = worst_identity < 1e-10 && worst_prob < 1e-10 && worst_fit < 1e-8 &&
                      worst_fidelity < 1e-10 && constraints_ok;
    ordered_json record;
    record["schema_version"] = 1;
    record["command"] = "verify-circuit";
    record["config"] = {{"trials", o.trials}, {"seed", o.seed}};
    record["results"] = {{"max_shadow_identity_residual", worst_identity},
                         {"max_postselection_probability_error", worst_prob},
                         {"max_structure_fit_residual", worst_fit},
                         {"max_process_infidelity", worst_fidelity},
                         {"structure_constraints_ok", constraints_ok},
                         {"pass", pass},
                         {"per_sample",
                          {{"shadow_identity_residuals", residuals},
                           {"fitted_p", fitted_p},
                           {"fitted_im_r", fitted_im_r},
                           {"postselection_probabilities", probabilities}}}};
    record["wall_time_s"] = timer.seconds();
    record["timestamp_utc"] = utc_timestamp();
    write_record(o.out, record);
    if (!common.quiet)
        std::cout << "verify-circuit trials=" << o.trials << " max_residual=" << worst_identity
                  << " postselection_error=" << worst_prob << (pass ? " PASS" : " FAIL") << std::endl;
    return pass ? 0 : 2;
}

struct CountOpts {
    int d = 2;
    int t = 1;
    std::string spectrum;
    std::string obs;
    std::string out;
};

int run_count(const CommonOpts& common, const CountOpts& o) {
    std::vector<int> mult;
    if (!o.spectrum.empty()) {
        std::stringstream ss(o.spectrum);
        std::string tok;
        while (std::getline(ss, tok, ',')) mult.push_back(std::stoi(tok));
        int sum = 0;
        for (int m : mult) {
            if (m <= 0) throw std::invalid_argument("spectrum multiplicities must be positive");
            sum += m;
        }
        if (sum != o.d) throw std::invalid_argument("spectrum multiplicities must sum to d");
    } else {
        const CMatrix obs = parse_observable(o.obs.empty() ? "Z" : o.obs, o.d);
        mult = rep::centralizer_decomposition(obs).multiplicities;
    }
    const std::uint64_t n = rep::variable_count(mult, o.t);
    const std::uint64_t bound = rep::variable_count_bound(o.d, o.t);
    // full-space variable count d^(4t+4)
    long double full = 1;
    for (int i = 0; i < 4 * o.t + 4; ++i) full *= o.d;

    ordered_json record;
    record["schema_version"] = 1;
    record["command"] = "count";
    record["config"] = {{"d", o.d}, {"t", o.t}, {"spectrum", mult}};
    record["results"] = {{"reduced_variables", n},
                         {"upper_bound", bound},
                         {"full_space_variables", static_cast<double>(full)}};
    record["timestamp_utc"] = utc_timestamp();
    write_record(o.out, record);
    if (!common.quiet)
        std::cout << "N = " << n << "  bound = " << bound << "  full-space = " << static_cast<double>(full)
                  << std::endl;
    return 0;
}

struct SchurOpts {
    int d = 2;
    int n = 0;
    int t = 0;
    std::string obs;
    std::uint64_t seed = 42;
    std::string out, export_basis;
};

int run_schur_check(const CommonOpts& common, const SchurOpts& o) {
    Timer timer;
    rep::SchurBasis basis;
    CMatrix obs;
    bool combined = false;
    if (o.t > 0) {
        combined = true;
        obs = parse_observable(o.obs.empty() ? "Z" : o.obs, o.d);
        basis = rep::combined_schur_basis(obs, o.t);
    } else {
        if (o.n < 1) throw std::invalid_argument("provide --n or --t");
        basis = rep::schur_basis_unitary_group(o.d, o.n);
    }

    // unitarity and block-diagonalization residuals
    RMatrix gram = basis.q.transpose() * basis.q;
    gram.diagonal().array() -= 1.0;
    const double unitarity = gram.cwiseAbs().maxCoeff();

    Rng rng(o.seed);
    double offblock = 0;
    std::vector<std::pair<long, long>> spans;
    {
        long col = 0;
        for (const auto& b : basis.blocks)
            for (int copy = 0; copy < b.mult; ++copy) {
                spans.emplace_back(col, b.dim);
                col += b.dim;
            }
    }
    for (int trial = 0; trial < 20; ++trial) {
        CMatrix el;
        if (combined) {
            const auto spec = rep::centralizer_decomposition(obs);
            CMatrix sigma = CMatrix::Zero(o.d, o.d);
            int off = 0;
            for (int b = 0; b < spec.block_count(); ++b)
                for (int j = 0; j < spec.multiplicities[b]; ++j) sigma(off, off) = spec.eigenvalues(b), ++off;
            const auto frame_spec = rep::centralizer_decomposition(sigma);
            el = rep::grouped_group_element(haar_unitary(o.d, rng), rep::sample_centralizer(frame_spec, rng),
                                            rep::sample_centralizer(frame_spec, rng), o.t);
        } else {
            CMatrix u = haar_unitary(o.d, rng);
            el = u;
            for (int i = 1; i < o.n; ++i) el = kron(el, u);
        }
        CMatrix m = basis.q.cast<Complex>().transpose() * el * basis.q.cast<Complex>();
        for (const auto& [start, len] : spans)
            for (long r = start; r < start + len; ++r)
                for (long c = 0; c < m.cols(); ++c)
                    if (c < start || c >= start + len) offblock = std::max(offblock, std::abs(m(r, c)));
    }

    long dim_sum = 0;
    for (const auto& b : basis.blocks) dim_sum += static_cast<long>(b.dim) * b.mult;
    const bool pass = unitarity < 1e-10 && offblock < 1e-10 && dim_sum == basis.total_dim();

    ordered_json record;
    record["schema_version"] = 1;
    record["command"] = "schur-check";
    record["config"] = combined
                           ? ordered_json{{"d", o.d}, {"t", o.t}, {"observable", o.obs.empty() ? "Z" : o.obs}}
                           : ordered_json{{"d", o.d}, {"n", o.n}};
    auto table = ordered_json::array();
    for (const auto& b : basis.blocks)
        table.push_back({{"label", b.label.to_string()}, {"dim", b.dim}, {"mult", b.mult}});
    record["results"] = {{"blocks", table},
                         {"total_dim", basis.total_dim()},
                         {"variable_count", basis.variable_count()},
                         {"unitarity_residual", unitarity},
                         {"offblock_residual", offblock},
                         {"pass", pass}};
    if (!o.export_basis.empty()) {
        rep::save_schur_basis(basis, o.export_basis);
        record["artifacts"]["basis"] = o.export_basis;
    }
    record["wall_time_s"] = timer.seconds();
    record["timestamp_utc"] = utc_timestamp();
    write_record(o.out, record);
    if (!common.quiet) {
        std::cout << "blocks:" << std::endl;
        for (const auto& b : basis.blocks)
            std::cout << "  " << b.label.to_string() << " dim=" << b.dim << " mult=" << b.mult
                      << std::endl;
        std::cout << "sum m_r^2 = " << basis.variable_count() << " unitarity=" << unitarity
                  << " offblock=" << offblock << (pass ? " PASS" : " FAIL") << std::endl;
    }
    return pass ? 0 : 2;
}

struct Table1Opts {
    int samples = 2000;
    std::uint64_t seed = 42;
    long max_iter = 200000;
    std::string csv = "table1.csv";
    std::string out;
};

int run_table1(const CommonOpts& common, const Table1Opts& o) {
    Timer timer;
    ordered_json record;
    record["schema_version"] = 1;
    record["command"] = "table1";
    record["config"] = {{"samples", o.samples}, {"seed", o.seed}};

    std::map<std::string, std::array<double, 3>> values, times;
    for (const std::string arch : {"sequential", "parallel"}) {
        for (int t = 1; t <= 3; ++t) {
            Timer cell;
            SolveOpts so;
            so.t = t;
            so.arch = arch;
            so.samples = o.samples;
            so.seed = o.seed;
            so.max_iter = o.max_iter;
            const CMatrix obs = pauli_z();
            solver::SolverSettings st;
            st.max_iter = o.max_iter;
            st.seed = o.seed;
            st.threads = common.threads;
            st.progress = !common.quiet;
            sdp::ReducedProblem rp = sdp::assemble_reduced(obs, t, comb::architecture_from_string(arch),
                                                           o.samples, Rng(o.seed), !common.quiet);
            solver::SolveResult res = solver::solve(rp.conic, st);
            values[arch][t - 1] = res.objective;
            times[arch][t - 1] = cell.seconds();
            if (!common.quiet)
                std::cout << "table1 " << arch << " t=" << t << " objective=" << res.objective
                          << " status=" << solver::to_string(res.status) << " (" << times[arch][t - 1]
                          << "s)" << std::endl;
            if (res.status != solver::SolveStatus::Optimal &&
                res.status != solver::SolveStatus::MaxIter)
                return 2;
        }
    }

    std::ofstream csv(o.csv);
    if (!csv) throw std::runtime_error("cannot open " + o.csv);
    csv << "architecture,t=1,t=2,t=3,seconds_t=1,seconds_t=2,seconds_t=3\n";
    for (const std::string arch : {"sequential", "parallel"}) {
        csv << arch;
        for (int i = 0; i < 3; ++i) csv << "," << values[arch][i];
        for (int i = 0; i < 3; ++i) csv << "," << times[arch][i];
        csv << "\n";
    }
    csv.close();

    record["results"] = {{"sequential", values["sequential"]}, {"parallel", values["parallel"]}};
    record["artifacts"] = {{"csv", o.csv}};
    record["wall_time_s"] = timer.seconds();
    record["timestamp_utc"] = utc_timestamp();
    write_record(o.out, record);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"shadow unitary inversion: combs, Schur reduction, and SDP solves"};
    app.require_subcommand(1);
    app.fallthrough();

    CommonOpts common;
    app.add_option("--threads", common.threads, "worker thread cap (env SHADOWINV_THREADS)");
    app.add_flag("--quiet", common.quiet, "suppress progress output");

    SolveOpts so;
    auto* solve_cmd = app.add_subcommand("solve", "assemble and solve a shadow-inversion SDP");
    solve_cmd->fallthrough();
    solve_cmd->add_option("--d", so.d)->check(CLI::Range(2, 6));
    solve_cmd->add_option("--t", so.t)->required()->check(CLI::Range(1, 4));
    solve_cmd->add_option("--arch", so.arch)->check(CLI::IsMember({"sequential", "parallel"}));
    solve_cmd->add_option("--obs", so.obs, "Z, a diagonal list, or @file.json");
    solve_cmd->add_option("--samples", so.samples)->check(CLI::PositiveNumber);
    solve_cmd->add_option("--seed", so.seed);
    auto* full_flag = solve_cmd->add_flag("--full", so.full, "solve the unreduced problem");
    solve_cmd->add_flag("--reduced", so.reduced, "solve the reduced problem (default)")
        ->excludes(full_flag);
    solve_cmd->add_option("--max-iter", so.max_iter);
    solve_cmd->add_option("--eps-primal", so.eps_primal);
    solve_cmd->add_option("--eps-dual", so.eps_dual);
    solve_cmd->add_option("--eps-gap", so.eps_gap);
    solve_cmd->add_option("--rho", so.rho);
    solve_cmd->add_option("--out", so.out, "result record path (JSON)");
    solve_cmd->add_option("--export-comb", so.export_comb);
    solve_cmd->add_option("--export-problem", so.export_problem);

    VerifyOpts vo;
    auto* verify_cmd = app.add_subcommand("verify-circuit", "check the 3-query qubit circuit");
    verify_cmd->fallthrough();
    verify_cmd->add_option("--trials", vo.trials)->check(CLI::PositiveNumber);
    verify_cmd->add_option("--seed", vo.seed);
    verify_cmd->add_option("--out", vo.out);

    CountOpts co;
    auto* count_cmd = app.add_subcommand("count", "reduced variable counting");
    count_cmd->fallthrough();
    count_cmd->add_option("--d", co.d)->check(CLI::Range(1, 12));
    count_cmd->add_option("--t", co.t)->check(CLI::Range(1, 6));
    count_cmd->add_option("--spectrum", co.spectrum, "eigenvalue multiplicities l1,l2,...");
    count_cmd->add_option("--obs", co.obs);
    count_cmd->add_option("--out", co.out);

    SchurOpts sco;
    auto* schur_cmd = app.add_subcommand("schur-check", "build and check a Schur basis");
    schur_cmd->fallthrough();
    schur_cmd->add_option("--d", sco.d)->check(CLI::Range(2, 6));
    schur_cmd->add_option("--n", sco.n);
    schur_cmd->add_option("--t", sco.t);
    schur_cmd->add_option("--obs", sco.obs);
    schur_cmd->add_option("--seed", sco.seed);
    schur_cmd->add_option("--out", sco.out);
    schur_cmd->add_option("--export-basis", sco.export_basis);

    Table1Opts to;
    auto* table_cmd = app.add_subcommand("table1", "reproduce the sequential/parallel summary table");
    table_cmd->fallthrough();
    table_cmd->add_option("--samples", to.samples)->check(CLI::PositiveNumber);
    table_cmd->add_option("--seed", to.seed);
    table_cmd->add_option("--max-iter", to.max_iter);
    table_cmd->add_option("--csv", to.csv);
    table_cmd->add_option("--out", to.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*solve_cmd) return run_solve(common, so);
        if (*verify_cmd) return run_verify_circuit(common, vo);
        if (*count_cmd) return run_count(common, co);
        if (*schur_cmd) return run_schur_check(common, sco);
        if (*table_cmd) return run_table1(common, to);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
    return 1;
}
