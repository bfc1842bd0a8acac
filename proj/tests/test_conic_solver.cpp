#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "shadow/solver/conic.hpp"
#include "shadow/random.hpp"

#include <cstdio>

using namespace shadow;
using namespace shadow::solver;

namespace {

// Jacobi eigensolver, independent of Eigen, for the projection oracle.
void jacobi_eig(Eigen::MatrixXd a, Eigen::MatrixXd& v, Eigen::VectorXd& w) {
    const int n = static_cast<int>(a.rows());
    v = Eigen::MatrixXd::Identity(n, n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-26) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-18) continue;
                const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1.0 / std::sqrt(t * t + 1), s = t * c;
                Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(n, n);
                rot(p, p) = c;
                rot(q, q) = c;
                rot(p, q) = s;
                rot(q, p) = -s;
                a = rot.transpose() * a * rot;
                v = v * rot;
            }
    }
    w = a.diagonal();
}

} // namespace

TEST_CASE("svec round trip") {
    for (int n : {1, 2, 3, 5}) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Random(n, n);
        m = 0.5 * (m + m.transpose()).eval();
        Eigen::VectorXd v = svec(m);
        CHECK((smat(v, n) - m).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(v.norm() == doctest::Approx(m.norm()).epsilon(1e-12));
    }
    CHECK(svec_index(3, 0, 0) == 0);
    CHECK(svec_index(3, 0, 2) == 2);
    CHECK(svec_index(3, 1, 1) == 3);
    CHECK(svec_index(3, 2, 2) == 5);
}

TEST_CASE("PSD projection oracle") {
    Rng rng(303);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + static_cast<int>(rng.raw() % 5);
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
        m = 0.5 * (m + m.transpose()).eval();
        Eigen::MatrixXd p = project_psd(m);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p);
        CHECK(es.eigenvalues().minCoeff() > -1e-10);

        Eigen::MatrixXd v;
        Eigen::VectorXd w;
        jacobi_eig(m, v, w);
        Eigen::MatrixXd oracle = v * w.cwiseMax(0.0).asDiagonal() * v.transpose();
        CHECK((p - oracle).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("SOC projection oracle") {
    Rng rng(305);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + static_cast<int>(rng.raw() % 6);
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v(i) = 3 * rng.normal();
        double tau = 3 * rng.normal();
        Eigen::VectorXd v0 = v;
        const double tau0 = tau;
        project_soc(tau, v);

        const double nv0 = v0.norm();
        if (nv0 <= tau0) {
            CHECK(tau == tau0);
            CHECK((v - v0).norm() == 0.0);
        } else if (nv0 <= -tau0) {
            CHECK(tau == 0.0);
            CHECK(v.norm() == 0.0);
        } else {
            CHECK(tau == doctest::Approx(0.5 * (tau0 + nv0)));
            CHECK(v.norm() == doctest::Approx(tau).epsilon(1e-12));
        }
        CHECK(v.norm() <= tau + 1e-12);
        Eigen::VectorXd q(n);
        for (int i = 0; i < n; ++i) q(i) = rng.normal();
        double tq = q.norm() + std::abs(rng.normal());
        const double dist_p = std::sqrt((v - v0).squaredNorm() + (tau - tau0) * (tau - tau0));
        const double dist_q = std::sqrt((q - v0).squaredNorm() + (tq - tau0) * (tq - tau0));
        CHECK(dist_p <= dist_q + 1e-9);
    }
}

TEST_CASE("closed-form conic problems") {
    SUBCASE("single sample with zero residual map") {
        ConicProblem base;
        base.add_free_block("x", 1);
        ResidualMap rm;
        SparseRow row;
        row.coeffs.emplace_back(0, 0.0);
        row.rhs = 0;
        rm.rows.push_back(row);
        ConicProblem p = epigraph_formulate(base, {rm});
        SolverSettings st;
        st.max_iter = 20000;
        SolveResult res = solve(p, st);
        CHECK(res.status == SolveStatus::Optimal);
        CHECK(std::abs(res.objective) < 1e-8);
    }

    SUBCASE("min ||x - b||") {
        Eigen::Vector3d b(1.3, -0.4, 2.2);
        ConicProblem base;
        base.add_free_block("x", 3);
        ResidualMap rm;
        for (int i = 0; i < 3; ++i) {
            SparseRow row;
            row.coeffs.emplace_back(i, 1.0);
            row.rhs = b(i);
            rm.rows.push_back(row);
        }
        ConicProblem p = epigraph_formulate(base, {rm});
        SolveResult res = solve(p);
        CHECK(res.status == SolveStatus::Optimal);
        CHECK(std::abs(res.objective) < 1e-8);
        for (int i = 0; i < 3; ++i) CHECK(res.x(i) == doctest::Approx(b(i)).epsilon(1e-6));
    }

    SUBCASE("min tr X with X11 = 1, X12 = 2, X psd") {
        ConicProblem p;
        p.add_psd_block("X", 2);
        SparseRow r1;
        r1.coeffs.emplace_back(svec_index(2, 0, 0), 1.0);
        r1.rhs = 1.0;
        p.equalities.push_back(r1);
        SparseRow r2;
        r2.coeffs.emplace_back(svec_index(2, 0, 1), 1.0 / std::sqrt(2.0));
        r2.rhs = 2.0;
        p.equalities.push_back(r2);
        p.objective.emplace_back(svec_index(2, 0, 0), 1.0);
        p.objective.emplace_back(svec_index(2, 1, 1), 1.0);
        SolveResult res = solve(p);
        CHECK(res.status == SolveStatus::Optimal);
        // hand oracle: X22 >= X12^2 / X11 = 4, so tr X = 5
        CHECK(res.objective == doctest::Approx(5.0).epsilon(1e-6));
        const Eigen::MatrixXd x = res.psd_values.at("X");
        CHECK(x(0, 0) == doctest::Approx(1.0).epsilon(1e-5));
        CHECK(x(0, 1) == doctest::Approx(2.0).epsilon(1e-5));
        CHECK(x(1, 1) == doctest::Approx(4.0).epsilon(1e-4));
        CHECK(res.gap < 1e-5);
    }
}

TEST_CASE("least squares through the epigraph with equalities") {
    // min ||x - b|| s.t. x1 + x2 = 0 with b = (1, 1): optimum sqrt(2) at x = 0
    ConicProblem base;
    base.add_free_block("x", 2);
    SparseRow eq;
    eq.coeffs.emplace_back(0, 1.0);
    eq.coeffs.emplace_back(1, 1.0);
    eq.rhs = 0;
    base.equalities.push_back(eq);
    ResidualMap rm;
    for (int i = 0; i < 2; ++i) {
        SparseRow row;
        row.coeffs.emplace_back(i, 1.0);
        row.rhs = 1.0;
        rm.rows.push_back(row);
    }
    ConicProblem p = epigraph_formulate(base, {rm});
    SolveResult res = solve(p);
    CHECK(res.status == SolveStatus::Optimal);
    CHECK(res.objective == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("merit decreases without oscillating divergence") {
    ConicProblem p;
    p.add_psd_block("X", 2);
    SparseRow r1;
    r1.coeffs.emplace_back(svec_index(2, 0, 0), 1.0);
    r1.rhs = 1.0;
    p.equalities.push_back(r1);
    SparseRow r2;
    r2.coeffs.emplace_back(svec_index(2, 0, 1), 1.0 / std::sqrt(2.0));
    r2.rhs = 2.0;
    p.equalities.push_back(r2);
    p.objective.emplace_back(svec_index(2, 0, 0), 1.0);
    p.objective.emplace_back(svec_index(2, 1, 1), 1.0);
    SolverSettings st;
    st.eps_primal = 1e-12;
    st.eps_dual = 1e-12;
    st.eps_gap = 1e-12;
    st.max_iter = 30000;
    SolveResult res = solve(p, st);
    REQUIRE(res.merit_history.size() > 4);
    // after the burn-in adaptation the sampled merit never grows by more
    // than a small bounce and ends at its minimum order of magnitude
    double prev = res.merit_history.front().second;
    double worst_growth = 0;
    for (const auto& [iter, merit] : res.merit_history) {
        if (iter > 3000) worst_growth = std::max(worst_growth, merit - prev);
        prev = merit;
    }
    CHECK(worst_growth < 1e-3);
    CHECK(res.merit_history.back().second <= res.merit_history.front().second);
}

TEST_CASE("problem export and import") {
    ConicProblem p;
    p.add_psd_block("X", 2);
    p.add_free_block("y", 3);
    SparseRow r;
    r.coeffs.emplace_back(0, 1.0);
    r.coeffs.emplace_back(3, -2.0);
    r.rhs = 0.5;
    p.equalities.push_back(r);
    p.objective.emplace_back(0, 1.0);
    p.socs.push_back(SocBlock{3, 4, 2});

    const std::string path = "problem_roundtrip_test.json";
    export_problem(p, path);
    ConicProblem q = import_problem(path);
    CHECK(problem_to_json(p) == problem_to_json(q));
    CHECK(problem_to_json(p).find("\"version\":1") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("solver rejects malformed problems") {
    ConicProblem p;
    p.add_free_block("x", 2);
    SparseRow r;
    r.coeffs.emplace_back(5, 1.0);
    p.equalities.push_back(r);
    CHECK_THROWS(solve(p));
}
