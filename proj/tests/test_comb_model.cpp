#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "shadow/comb/comb.hpp"

#include <cstdio>

using namespace shadow;
using namespace shadow::comb;

namespace {

// Identity-routing 1-slot comb: input to slot, slot output to F.
CombChoi identity_routing_comb() {
    CMatrix ii = choi_of_pair(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2));
    IndexedOperator a(ii, SubsystemLayout({2, 2}, {"P", "I1"}));
    IndexedOperator b(ii, SubsystemLayout({2, 2}, {"O1", "F"}));
    CMatrix joint = kron(a.mat, b.mat);
    SubsystemLayout l({2, 2, 2, 2}, {"P", "I1", "O1", "F"});
    IndexedOperator op(joint, l);
    return CombChoi(CombSpec(2, 1, Architecture::Sequential), std::move(op));
}

} // namespace

TEST_CASE("sequential comb validation") {
    SUBCASE("random combs from channel links validate") {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            Rng r(seed);
            CombChoi c = random_comb(CombSpec(2, 1, Architecture::Sequential), r);
            auto report = validate_comb(c, 1e-8);
            CHECK(report.max_residual() < 1e-10);
            CombChoi c2 = random_comb(CombSpec(2, 2, Architecture::Sequential), r);
            CHECK(validate_comb(c2, 1e-8).max_residual() < 1e-10);
        }
    }

    SUBCASE("identity routing comb is valid") {
        CHECK(validate_comb(identity_routing_comb(), 1e-8).ok());
    }

    SUBCASE("perturbed combs are rejected") {
        Rng r(5);
        CombChoi c = random_comb(CombSpec(2, 2, Architecture::Sequential), r);
        CMatrix h = ginibre(static_cast<int>(c.op.mat.rows()), static_cast<int>(c.op.mat.rows()), r);
        h = 0.05 * (h + h.adjoint());
        IndexedOperator bad(c.op.mat + h, c.op.layout);
        auto report = validate_sequential_comb(bad, 1e-8);
        CHECK(report.max_residual() > 1e-3);
    }

    SUBCASE("wrong layout throws") {
        Rng r(6);
        CombChoi c = random_comb(CombSpec(2, 1, Architecture::Sequential), r);
        IndexedOperator moved = permute_subsystems(c.op, {"I1", "P", "O1", "F"});
        CHECK_THROWS(validate_sequential_comb(moved, 1e-8));
    }
}

TEST_CASE("parallel comb validation") {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        Rng r(seed);
        CombChoi c = random_comb(CombSpec(2, 2, Architecture::Parallel), r);
        CHECK(validate_comb(c, 1e-8).max_residual() < 1e-10);

        // a valid parallel comb reordered to sequential layout is a valid
        // sequential comb
        IndexedOperator seq_view =
            permute_subsystems(c.op, CombSpec(2, 2, Architecture::Sequential).layout().labels);
        CHECK(validate_sequential_comb(seq_view, 1e-8).max_residual() < 1e-9);
    }

    // trace violation is flagged
    Rng r(14);
    CombChoi c = random_comb(CombSpec(2, 1, Architecture::Parallel), r);
    IndexedOperator scaled(c.op.mat * 1.5, c.op.layout);
    auto report = validate_parallel_comb(scaled, 1e-8);
    double trace_res = 0;
    for (const auto& e : report.entries)
        if (e.constraint == "trace") trace_res = e.residual;
    CHECK(trace_res > 1e-3);
}

TEST_CASE("apply_comb") {
    Rng rng(107);

    SUBCASE("identity routing comb gives rho -> U rho U^dag") {
        CombChoi c = identity_routing_comb();
        for (int i = 0; i < 5; ++i) {
            CMatrix u = haar_unitary(2, rng);
            IndexedOperator choi = apply_comb(c, u);
            CHECK(approx_equal(choi.mat, choi_of_pair(u, u), 1e-10));
        }
    }

    SUBCASE("discard-and-reprepare comb is constant in U") {
        Rng r(21);
        CMatrix ii = choi_of_pair(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2));
        IndexedOperator enc(ii, SubsystemLayout({2, 2}, {"P", "I1"}));
        CMatrix sigma0 = CMatrix::Zero(2, 2);
        sigma0(0, 0) = 1;
        CMatrix dec_choi = kron(CMatrix::Identity(2, 2), sigma0); // tr_O1 then prepare |0>
        IndexedOperator dec(dec_choi, SubsystemLayout({2, 2}, {"O1", "F"}));
        IndexedOperator op(kron(enc.mat, dec.mat), SubsystemLayout({2, 2, 2, 2}, {"P", "I1", "O1", "F"}));
        CombChoi c(CombSpec(2, 1, Architecture::Sequential), std::move(op));
        REQUIRE(validate_comb(c).ok());
        IndexedOperator a = apply_comb(c, haar_unitary(2, r));
        IndexedOperator b = apply_comb(c, haar_unitary(2, r));
        CHECK(approx_equal(a.mat, b.mat, 1e-12));
    }

    SUBCASE("outputs are CPTP") {
        for (int trial = 0; trial < 20; ++trial) {
            Rng r(400 + trial);
            Architecture arch = trial % 2 ? Architecture::Parallel : Architecture::Sequential;
            CombChoi c = random_comb(CombSpec(2, 2, arch), r);
            for (int k = 0; k < 20; ++k) {
                IndexedOperator choi = apply_comb(c, haar_unitary(2, r));
                CHECK(min_eigenvalue(choi.mat) > -1e-9);
                IndexedOperator marg = partial_trace(choi, {"F"});
                CHECK(approx_equal(marg.mat, CMatrix::Identity(2, 2), 1e-9));
            }
        }
    }

    SUBCASE("non-unitary input rejected") {
        CombChoi c = identity_routing_comb();
        CMatrix bad(2, 2);
        bad << 1, 0, 0, 0.5;
        CHECK_THROWS(apply_comb(c, bad));
    }
}

TEST_CASE("dual_on_observable") {
    Rng rng(109);

    SUBCASE("unitary channel: dual of O is V^dag O V") {
        for (int i = 0; i < 10; ++i) {
            CMatrix v = haar_unitary(2, rng);
            CMatrix o = ginibre(2, 2, rng);
            o = o + o.adjoint();
            IndexedOperator choi(choi_of_pair(v, v), SubsystemLayout({2, 2}, {"P", "F"}));
            CHECK(approx_equal(dual_on_observable(choi, o), v.adjoint() * o * v, 1e-10));
        }
    }

    SUBCASE("identity channel returns O") {
        CMatrix o = pauli_y();
        IndexedOperator choi(choi_of_pair(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)),
                             SubsystemLayout({2, 2}, {"P", "F"}));
        CHECK(approx_equal(dual_on_observable(choi, o), o, 1e-12));
    }

    SUBCASE("depolarizing channel maps O to tr(O)/d I") {
        CMatrix choi = CMatrix::Zero(4, 4);
        for (int j = 0; j < 4; ++j) choi += choi_of_pair(pauli(j) / 2.0, pauli(j) / 2.0);
        IndexedOperator op(choi, SubsystemLayout({2, 2}, {"P", "F"}));
        CMatrix o = ginibre(2, 2, rng);
        o = o + o.adjoint();
        CHECK(approx_equal(dual_on_observable(op, o), o.trace() / 2.0 * CMatrix::Identity(2, 2), 1e-10));
    }

    SUBCASE("shadow identity tr[N(rho)O] = tr[rho N^dag(O)]") {
        for (int trial = 0; trial < 10; ++trial) {
            Rng r(600 + trial);
            CombChoi c = random_comb(CombSpec(2, 1, Architecture::Sequential), r);
            CMatrix u = haar_unitary(2, r);
            IndexedOperator choi = apply_comb(c, u);
            CMatrix o = ginibre(2, 2, r);
            o = o + o.adjoint();
            CMatrix rho = random_density(2, r);
            IndexedOperator state(rho, SubsystemLayout({2}, {"P"}));
            CMatrix nrho = link_product(state, choi).mat;
            Complex lhs = (nrho * o).trace();
            Complex rhs = (rho * dual_on_observable(choi, o)).trace();
            CHECK(std::abs(lhs - rhs) < 1e-10);
        }
    }
}

TEST_CASE("shadow residual and objective") {
    // comb that ignores U and implements the identity channel: P routed to
    // F, |0> fed into the slot, the slot output discarded
    CMatrix ii = choi_of_pair(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2));
    CMatrix zero_state = CMatrix::Zero(2, 2);
    zero_state(0, 0) = 1;
    CMatrix cmat = kron(kron(ii, zero_state), CMatrix::Identity(2, 2));
    IndexedOperator raw(cmat, SubsystemLayout({2, 2, 2, 2}, {"P", "F", "I1", "O1"}));
    IndexedOperator op = permute_subsystems(raw, {"P", "I1", "O1", "F"});
    CombChoi c(CombSpec(2, 1, Architecture::Sequential), std::move(op));
    REQUIRE(validate_comb(c).ok());

    CHECK(shadow_residual(c, pauli_z(), CMatrix::Identity(2, 2)) < 1e-12);
    const double res_x = shadow_residual(c, pauli_z(), pauli_x());
    CHECK(res_x == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-10));

    double obj = objective_estimate(c, pauli_z(), 200, Rng(7));
    CHECK(obj > 0.1);
    CHECK(obj == doctest::Approx(objective_estimate(c, pauli_z(), 200, Rng(7))).epsilon(1e-15));
}

TEST_CASE("comb json round trip") {
    Rng rng(127);
    CombChoi c = random_comb(CombSpec(2, 1, Architecture::Parallel), rng);
    std::string path = "comb_roundtrip_test.json";
    save_comb(c, path);
    CombChoi back = load_comb(path);
    CHECK(back.spec.d == c.spec.d);
    CHECK(back.spec.t == c.spec.t);
    CHECK(back.spec.architecture == c.spec.architecture);
    CHECK(approx_equal(back.op.mat, c.op.mat, 0.0));
    std::remove(path.c_str());
}

TEST_CASE("observable wrapper") {
    Observable o(pauli_z());
    CHECK(o.decomposition().block_count() == 2);
    CMatrix nh(2, 2);
    nh << 0, 1, 0, 0;
    CHECK_THROWS(Observable(nh));
}
