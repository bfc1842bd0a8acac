#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "shadow/rep/moments.hpp"
#include "shadow/rep/partition.hpp"
#include "shadow/rep/schur.hpp"
#include "shadow/rep/symmetric.hpp"

#include <set>

using namespace shadow;
using namespace shadow::rep;

namespace {

// Brute-force SYT count: enumerate all fillings and filter.
long brute_force_syt_count(const Partition& shape) {
    const int n = shape.n();
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i + 1;
    long count = 0;
    do {
        std::vector<std::vector<int>> fill(shape.rows());
        int k = 0;
        for (int r = 0; r < shape.rows(); ++r)
            for (int c = 0; c < shape.parts[r]; ++c) fill[r].push_back(perm[k++]);
        bool ok = true;
        for (int r = 0; r < shape.rows() && ok; ++r)
            for (int c = 0; c < shape.parts[r] && ok; ++c) {
                if (c > 0 && fill[r][c] <= fill[r][c - 1]) ok = false;
                if (r > 0 && c < shape.parts[r - 1] && fill[r][c] <= fill[r - 1][c]) ok = false;
            }
        if (ok) ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return count;
}

double offblock_magnitude(const SchurBasis& basis, const CMatrix& rep_element) {
    CMatrix m = basis.q.cast<Complex>().transpose() * rep_element * basis.q.cast<Complex>();
    double off = 0;
    long col = 0;
    std::vector<std::pair<long, long>> spans;
    for (const auto& b : basis.blocks) {
        for (int copy = 0; copy < b.mult; ++copy) {
            spans.emplace_back(col, b.dim);
            col += b.dim;
        }
    }
    for (long r = 0; r < m.rows(); ++r)
        for (long c = 0; c < m.cols(); ++c) {
            bool inside = false;
            for (const auto& [start, len] : spans)
                if (r >= start && r < start + len && c >= start && c < start + len) inside = true;
            if (!inside) off = std::max(off, std::abs(m(r, c)));
        }
    return off;
}

} // namespace

TEST_CASE("partitions enumeration") {
    auto p22 = partitions(2, 2);
    REQUIRE(p22.size() == 2);
    CHECK(p22[0].parts == std::vector<int>{2});
    CHECK(p22[1].parts == std::vector<int>{1, 1});

    auto p42 = partitions(4, 2);
    REQUIRE(p42.size() == 3);
    CHECK(p42[0].parts == std::vector<int>{4});
    CHECK(p42[1].parts == std::vector<int>{3, 1});
    CHECK(p42[2].parts == std::vector<int>{2, 2});

    auto p0 = partitions(0, 3);
    REQUIRE(p0.size() == 1);
    CHECK(p0[0].parts.empty());
}

TEST_CASE("hook lengths") {
    CHECK(hook_length(Partition({4, 3, 1})) == 576);
    CHECK(hook_length(Partition({1})) == 1);
    // (2,2): enumerate hooks by definition: boxes 3,2,2,1 -> 12
    CHECK(hook_length(Partition({2, 2})) == 12);
    CHECK(factorial(4) / hook_length(Partition({2, 2})) ==
          static_cast<std::uint64_t>(brute_force_syt_count(Partition({2, 2}))));
}

TEST_CASE("SYT counting and enumeration") {
    CHECK(count_syt(Partition({3, 1})) == 3);
    CHECK(count_syt(Partition({5})) == 1);
    CHECK(count_syt(Partition({2, 2})) == 2);
    CHECK(enumerate_syt(Partition({2, 2})).size() == 2);

    // hook formula matches brute force for all shapes with n <= 6
    for (int n = 1; n <= 6; ++n)
        for (const auto& shape : partitions(n, n)) {
            CHECK(count_syt(shape) == static_cast<std::uint64_t>(brute_force_syt_count(shape)));
            CHECK(enumerate_syt(shape).size() == count_syt(shape));
        }
}

TEST_CASE("SSYT counting and enumeration") {
    CHECK(enumerate_ssyt(Partition({2, 1}), 2).size() == 2);
    CHECK(enumerate_ssyt(Partition({2}), 2).size() == 3);
    CHECK(enumerate_ssyt(Partition({1, 1, 1}), 2).empty());

    for (int n = 1; n <= 6; ++n)
        for (int d = 1; d <= 4; ++d)
            for (const auto& shape : partitions(n, n))
                CHECK(enumerate_ssyt(shape, d).size() == count_ssyt(shape, d));
}

TEST_CASE("young symmetrizer small cases") {
    // single box: identity
    Tableau box{Partition({1}), {{1}}, TableauKind::Standard};
    CHECK((young_symmetrizer(box, 2) - RMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);

    // row pair: symmetric projector 1/2((1)+(12))
    Tableau row{Partition({2}), {{1, 2}}, TableauKind::Standard};
    RMatrix sym = young_symmetrizer(row, 2);
    RMatrix want = 0.5 * (RMatrix::Identity(4, 4) + perm_action({1, 0}, 2));
    CHECK((sym - want).cwiseAbs().maxCoeff() < 1e-14);

    // column pair applied to e1 (x) e2
    Tableau colt{Partition({1, 1}), {{1}, {2}}, TableauKind::Standard};
    RMatrix anti = young_symmetrizer(colt, 2);
    RVector e12 = RVector::Zero(4);
    e12(1) = 1;
    RVector got = anti * e12;
    RVector want_v = RVector::Zero(4);
    want_v(1) = 0.5;
    want_v(2) = -0.5;
    CHECK((got - want_v).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("S_n characters") {
    // chi on the identity class equals the SYT count
    for (int n = 1; n <= 6; ++n)
        for (const auto& lambda : partitions(n, n)) {
            Partition ones(std::vector<int>(n, 1));
            CHECK(sn_character(lambda, ones) == static_cast<long long>(count_syt(lambda)));
        }
    // sign character on a transposition class of S_3
    CHECK(sn_character(Partition({1, 1, 1}), Partition({2, 1})) == -1);
    CHECK(sn_character(Partition({3}), Partition({2, 1})) == 1);
}

TEST_CASE("schur basis for U(d)^n") {
    SUBCASE("d=2 n=2 reproduces the textbook Schur matrix") {
        SchurBasis basis = schur_basis_unitary_group(2, 2);
        REQUIRE(basis.q.cols() == 4);
        const double s = 1.0 / std::sqrt(2.0);
        RMatrix want(4, 4);
        want << 1, 0, 0, 0, 0, s, 0, s, 0, s, 0, -s, 0, 0, 1, 0;
        CHECK((basis.q - want).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE(basis.blocks.size() == 2);
        CHECK(basis.blocks[0].dim == 3);
        CHECK(basis.blocks[0].mult == 1);
        CHECK(basis.blocks[1].dim == 1);
        CHECK(basis.blocks[1].mult == 1);
    }

    SUBCASE("n=1 is the identity") {
        SchurBasis basis = schur_basis_unitary_group(3, 1);
        CHECK((basis.q - RMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("block diagonalization at small sizes") {
        Rng rng(51);
        for (auto [d, n] : std::vector<std::pair<int, int>>{{2, 2}, {2, 3}, {3, 2}}) {
            SchurBasis basis = schur_basis_unitary_group(d, n);
            long total = 1;
            for (int i = 0; i < n; ++i) total *= d;
            long sum = 0;
            for (const auto& b : basis.blocks) sum += static_cast<long>(b.dim) * b.mult;
            CHECK(sum == total);
            for (int trial = 0; trial < 20; ++trial) {
                CMatrix u = haar_unitary(d, rng);
                CMatrix rep_el = u;
                for (int i = 1; i < n; ++i) rep_el = kron(rep_el, u);
                CHECK(offblock_magnitude(basis, rep_el) < 1e-10);
            }
        }
    }

    SUBCASE("d=2 n=3 block multiset") {
        SchurBasis basis = schur_basis_unitary_group(2, 3);
        std::multiset<std::pair<int, int>> dims;
        for (const auto& b : basis.blocks) dims.insert({b.dim, b.mult});
        CHECK(dims == std::multiset<std::pair<int, int>>{{4, 1}, {2, 2}});
    }

    SUBCASE("repeated blocks are entrywise equal") {
        Rng rng(53);
        SchurBasis basis = schur_basis_unitary_group(2, 3);
        CMatrix u = haar_unitary(2, rng);
        CMatrix rep_el = kron(kron(u, u), u);
        CMatrix m = basis.q.cast<Complex>().transpose() * rep_el * basis.q.cast<Complex>();
        // lambda = (2,1): dim 2, mult 2; copies start after the dim-4 block
        CMatrix b1 = m.block(4, 4, 2, 2), b2 = m.block(6, 6, 2, 2);
        CHECK((b1 - b2).cwiseAbs().maxCoeff() < 1e-9);
    }

    SUBCASE("Schur-Weyl dimension sum for d,n <= 4") {
        for (int d = 2; d <= 4; ++d)
            for (int n = 1; n <= 4; ++n) {
                long total = 1;
                for (int i = 0; i < n; ++i) total *= d;
                long sum = 0;
                for (const auto& lambda : partitions(n, std::min(n, d)))
                    sum += static_cast<long>(count_ssyt(lambda, d)) * static_cast<long>(count_syt(lambda));
                CHECK(sum == total);
            }
    }
}

TEST_CASE("centralizer decomposition") {
    CMatrix z = pauli_z();
    SpectralDecomposition spec = centralizer_decomposition(z);
    REQUIRE(spec.block_count() == 2);
    CHECK(spec.eigenvalues(0) == doctest::Approx(-1));
    CHECK(spec.eigenvalues(1) == doctest::Approx(1));
    CHECK(spec.multiplicities == std::vector<int>{1, 1});

    SpectralDecomposition id = centralizer_decomposition(CMatrix::Identity(4, 4));
    CHECK(id.block_count() == 1);
    CHECK(id.multiplicities == std::vector<int>{4});

    CMatrix o = CMatrix::Zero(6, 6);
    o.diagonal() << 5, 5, 5, 2, 2, -1;
    SpectralDecomposition so = centralizer_decomposition(o);
    CHECK(so.multiplicities == std::vector<int>{1, 2, 3});
    CHECK(approx_equal(so.reconstruct(), o, 1e-10));

    CMatrix bad(2, 2);
    bad << 0, 1, 0, 0;
    CHECK_THROWS(centralizer_decomposition(bad));
}

TEST_CASE("centralizer sampling") {
    Rng rng(59);
    SpectralDecomposition specz = centralizer_decomposition(pauli_z());
    for (int i = 0; i < 10; ++i) {
        CMatrix v = sample_centralizer(specz, rng);
        CHECK(std::abs(v(0, 1)) < 1e-14);
        CHECK(std::abs(v(1, 0)) < 1e-14);
        CHECK(is_unitary(v, 1e-12));
    }

    CMatrix o = CMatrix::Zero(4, 4);
    o.diagonal() << 1, 1, 3, 3;
    CMatrix h = haar_unitary(4, rng);
    o = h * o * h.adjoint();
    SpectralDecomposition spec = centralizer_decomposition(o);
    for (int i = 0; i < 100; ++i) {
        CMatrix v = sample_centralizer(spec, rng);
        CHECK((v * o - o * v).norm() < 1e-10);
    }

    // O = I: full Haar moments
    SpectralDecomposition idspec = centralizer_decomposition(CMatrix::Identity(3, 3));
    double m2 = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double a = std::abs(sample_centralizer(idspec, rng).trace());
        m2 += a * a;
    }
    CHECK(std::abs(m2 / n - 1.0) < 0.05);
}

TEST_CASE("combined schur basis") {
    SUBCASE("d=2 O=Z t=1 counting") {
        SchurBasis basis = combined_schur_basis(pauli_z(), 1);
        CHECK(basis.total_dim() == 16);
        long sum = 0;
        for (const auto& b : basis.blocks) sum += static_cast<long>(b.dim) * b.mult;
        CHECK(sum == 16);
        CHECK(basis.variable_count() == 8);
    }

    SUBCASE("block diagonalization d=2 O=Z t=2") {
        Rng rng(61);
        CMatrix sigma = CMatrix::Zero(2, 2);
        sigma.diagonal() << -1, 1; // Z in its eigenframe
        SchurBasis basis = combined_schur_basis(sigma, 2);
        SpectralDecomposition spec = centralizer_decomposition(sigma);
        for (int trial = 0; trial < 20; ++trial) {
            CMatrix u = haar_unitary(2, rng);
            CMatrix v = sample_centralizer(spec, rng);
            CMatrix w = sample_centralizer(spec, rng);
            CHECK(offblock_magnitude(basis, grouped_group_element(u, v, w, 2)) < 1e-10);
        }
    }

    SUBCASE("block diagonalization d=3 degenerate O t=1") {
        Rng rng(67);
        CMatrix sigma = CMatrix::Zero(3, 3);
        sigma.diagonal() << 0, 1, 1;
        SchurBasis basis = combined_schur_basis(sigma, 1);
        SpectralDecomposition spec = centralizer_decomposition(sigma);
        long sum = 0;
        for (const auto& b : basis.blocks) sum += static_cast<long>(b.dim) * b.mult;
        CHECK(sum == basis.total_dim());
        for (int trial = 0; trial < 20; ++trial) {
            CMatrix u = haar_unitary(3, rng);
            CMatrix v = sample_centralizer(spec, rng);
            CMatrix w = sample_centralizer(spec, rng);
            CHECK(offblock_magnitude(basis, grouped_group_element(u, v, w, 1)) < 1e-10);
        }
    }

    SUBCASE("variable count matches sum of squared multiplicities") {
        for (int t = 1; t <= 3; ++t) {
            SchurBasis basis = combined_schur_basis(pauli_z(), t);
            CHECK(basis.variable_count() ==
                  static_cast<long>(variable_count(std::vector<int>{1, 1}, t)));
        }
        CMatrix sigma = CMatrix::Zero(3, 3);
        sigma.diagonal() << 0, 1, 1;
        for (int t = 1; t <= 2; ++t) {
            SchurBasis basis = combined_schur_basis(sigma, t);
            CHECK(basis.variable_count() ==
                  static_cast<long>(variable_count(std::vector<int>{1, 2}, t)));
        }
    }

    SUBCASE("t < 1 rejected") { CHECK_THROWS(combined_schur_basis(pauli_z(), 0)); }
}

TEST_CASE("moment formulas") {
    CHECK(moment_I(4, 6) == 24);
    CHECK(moment_I(1, 5) == 1);
    CHECK(moment_I(4, 2) == 14);
    CHECK(moment_I(3, 2) == 5);

    // Monte-Carlo oracle for I_3(2) = E |tr U|^6 over U(2)
    Rng rng(71);
    double m6 = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double a = std::abs(haar_unitary(2, rng).trace());
        m6 += std::pow(a, 6);
    }
    CHECK(std::abs(m6 / n - 5.0) < 0.3);

    CHECK(moment_J(3, {3, 3}) == 48);
    CHECK(moment_J(2, {4}) == moment_I(2, 4));
    CHECK(moment_J(1, {1, 1, 1}) == 3);
    CHECK(moment_J(3, {1, 1}) == 20);

    CHECK(variable_count({3, 3}, 3) == 2304);
    CHECK(variable_count({1, 1}, 1) == 8);
    CHECK(variable_count({1, 1}, 2) == 60);
    CHECK(variable_count({1, 1}, 3) == 560);
    CHECK(variable_count_bound(2, 3) == 2304);

    for (int d = 2; d <= 6; ++d)
        for (int t = 1; t <= 4; ++t) {
            // worst case over spectra: compare a few splittings
            std::vector<std::vector<int>> spectra = {{d}};
            if (d >= 2) spectra.push_back(std::vector<int>(d, 1));
            if (d >= 3) spectra.push_back({1, d - 1});
            for (const auto& ls : spectra)
                CHECK(variable_count(ls, t) <= variable_count_bound(d, t));
        }
}

TEST_CASE("schur basis export") {
    SchurBasis basis = schur_basis_unitary_group(2, 2);
    std::string json = schur_basis_to_json(basis);
    CHECK(json.find("\"format_version\":1") != std::string::npos);
    CHECK(json.find("q_row_major") != std::string::npos);
}
