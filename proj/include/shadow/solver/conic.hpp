#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace shadow::solver {

// One linear equality  sum_j coeffs[j].second * x[coeffs[j].first] = rhs.
struct SparseRow {
    std::vector<std::pair<long, double>> coeffs;
    double rhs = 0;
};

enum class BlockKind { Free, Psd };

struct VarBlock {
    BlockKind kind = BlockKind::Free;
    std::string id;
    int side = 0;  // PSD side n; variables are svec entries (off-diagonals
                   // scaled by sqrt 2 so the embedding is isometric)
    long len = 0;  // number of variables
    long offset = 0;
};

struct SocBlock {
    long tau = 0;    // epigraph scalar variable
    long offset = 0; // start of the residual slice
    long dim = 0;    // slice length
};

// min c.x  s.t.  equalities, PSD blocks >= 0, (tau, slice) in second-order
// cones. Complex PSD data enters through the real symmetric embedding
// [[X_re, -X_im], [X_im, X_re]] built by the caller.
struct ConicProblem {
    std::vector<VarBlock> blocks;
    std::vector<SparseRow> equalities;
    std::vector<std::pair<long, double>> objective;
    std::vector<SocBlock> socs;

    long num_vars() const;
    long add_psd_block(const std::string& id, int side);
    long add_free_block(const std::string& id, long len);
    void validate() const;
};

long svec_len(int side);
// svec index of entry (i, j), i <= j, within a PSD block
long svec_index(int side, int i, int j);
Eigen::MatrixXd smat(const Eigen::VectorXd& v, int side);
Eigen::VectorXd svec(const Eigen::MatrixXd& m);

struct SolverSettings {
    long max_iter = 200000;
    double eps_primal = 1e-6;
    double eps_dual = 1e-6;
    double eps_gap = 1e-5;
    bool scaling = true;
    std::uint64_t seed = 42;
    double rho = 1.0;
    bool adaptive_rho = true;
    double over_relax = 1.0;
    int check_every = 25;
    int threads = 0;       // 0: leave Eigen defaults alone
    bool progress = false; // machine-readable progress lines on stderr
    Eigen::VectorXd warm_start; // optional initial cone-side iterate
};

enum class SolveStatus { Optimal, MaxIter, InfeasibleLikely };

std::string to_string(SolveStatus s);

struct SolveResult {
    SolveStatus status = SolveStatus::MaxIter;
    double objective = 0;
    Eigen::VectorXd x; // cone-feasible point (the z iterate)
    std::map<std::string, Eigen::MatrixXd> psd_values;
    double primal_residual = 0;
    double dual_residual = 0;
    double gap = 0;
    long iterations = 0;
    // (iteration, primal + dual residual) sampled at every convergence check
    std::vector<std::pair<long, double>> merit_history;
};

SolveResult solve(const ConicProblem& p, const SolverSettings& s = {});

// Euclidean cone projections (exposed for the oracle tests).
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& sym);
void project_soc(double& tau, Eigen::VectorXd& v);

// Epigraph assembly: one second-order cone and one averaged epigraph
// scalar per residual map. Each map's rows read  residual_i = coeffs.x - rhs.
struct ResidualMap {
    std::vector<SparseRow> rows;
};
ConicProblem epigraph_formulate(ConicProblem base, const std::vector<ResidualMap>& samples);

std::string problem_to_json(const ConicProblem& p);
ConicProblem problem_from_json(const std::string& text);
void export_problem(const ConicProblem& p, const std::string& path);
ConicProblem import_problem(const std::string& path);
std::string result_to_json(const SolveResult& r, const SolverSettings& s);

} // namespace shadow::solver
