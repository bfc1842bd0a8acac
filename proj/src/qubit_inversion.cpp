#include "shadow/circuit/qubit_inversion.hpp"

#include <Eigen/Eigenvalues>

namespace shadow::circuit {

namespace {

CVector ket3(int b1, int b2, int b3) {
    CVector v = CVector::Zero(8);
    v(4 * b1 + 2 * b2 + b3) = 1.0;
    return v;
}

// The six vectors |v_jk> (j < k) on the three ancilla qubits.
std::array<std::array<CVector, 4>, 4> v_vectors() {
    const Complex i(0, 1);
    const double s32 = std::sqrt(3.0) / 2.0;
    std::array<std::array<CVector, 4>, 4> v;
    for (auto& row : v) row.fill(CVector::Zero(8));
    v[0][1] = ket3(0, 0, 0);
    v[0][2] = ket3(0, 0, 1);
    v[0][3] = ket3(0, 1, 0);
    v[1][2] = s32 * ket3(1, 1, 0) + (i / 2.0) * ket3(0, 1, 0);
    v[1][3] = s32 * ket3(1, 0, 1) - (i / 2.0) * ket3(0, 0, 1);
    v[2][3] = s32 * ket3(1, 0, 0) + (i / 2.0) * ket3(0, 0, 0);
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < j; ++k) v[j][k] = -v[k][j];
    return v;
}

// Extends a partial isometry (orthonormal input columns `ins` mapping to
// orthonormal images `outs`) to a full unitary, completing with
// Gram-Schmidt over the canonical basis in index order.
CMatrix complete_unitary(const std::vector<CVector>& ins, const std::vector<CVector>& outs, int variant) {
    const long n = ins.at(0).size();
    CMatrix u = CMatrix::Zero(n, n);
    for (size_t c = 0; c < ins.size(); ++c) u += outs[c] * ins[c].adjoint();

    auto orthonormal_completion = [&](const std::vector<CVector>& have) {
        std::vector<CVector> acc = have;
        std::vector<CVector> extra;
        for (long pass = 0; pass < n && static_cast<long>(acc.size()) < n; ++pass) {
            long idx = (variant == 0) ? pass : (n - 1 - pass);
            CVector v = CVector::Zero(n);
            v(idx) = 1.0;
            for (int rep = 0; rep < 2; ++rep)
                for (const auto& q : acc) v -= q.dot(v) * q;
            if (v.norm() > 1e-8) {
                v.normalize();
                acc.push_back(v);
                extra.push_back(v);
            }
        }
        if (static_cast<long>(acc.size()) != n)
            throw std::runtime_error("complete_unitary: rank defect during completion");
        return extra;
    };

    const auto in_extra = orthonormal_completion(ins);
    const auto out_extra = orthonormal_completion(outs);
    for (size_t c = 0; c < in_extra.size(); ++c) u += out_extra[c] * in_extra[c].adjoint();
    if (!is_unitary(u, 1e-12)) throw std::runtime_error("complete_unitary: completion is not unitary");
    return u;
}

} // namespace

CircuitGates build_gates(int completion_variant) {
    CircuitGates g;
    const Complex i(0, 1);

    // V0 = sum_j |j><j| H^{(x)2} (x) P_j on qubits (2,3,4)
    CMatrix ctrl_pauli = CMatrix::Zero(8, 8);
    for (int j = 0; j < 4; ++j) {
        CMatrix pj = CMatrix::Zero(4, 4);
        pj(j, j) = 1.0;
        ctrl_pauli += kron(pj, pauli(j));
    }
    g.v0 = ctrl_pauli * kron(kron(hadamard(), hadamard()), CMatrix::Identity(2, 2));

    // V1 = (1/sqrt 3) sum_{j != k} |v_jk><k| (x) P_j on the |0> (x) . domain
    const auto v = v_vectors();
    std::vector<CVector> ins, outs;
    for (int k = 0; k < 4; ++k)
        for (int b = 0; b < 2; ++b) {
            CVector in = CVector::Zero(16);
            in((0 * 4 + k) * 2 + b) = 1.0; // |0>_q1 |k>_q23 |b>_q4
            CVector out = CVector::Zero(16);
            for (int j = 0; j < 4; ++j) {
                if (j == k) continue;
                CVector pj_b = pauli(j).col(b);
                for (int a = 0; a < 8; ++a)
                    for (int bb = 0; bb < 2; ++bb) out(a * 2 + bb) += v[j][k](a) * pj_b(bb) / std::sqrt(3.0);
            }
            ins.push_back(in);
            outs.push_back(out);
        }
    g.v1 = complete_unitary(ins, outs, completion_variant);

    // G in U(8): maps the four combination vectors to |0> (x) Hadamard rows.
    CVector w1 = -v[0][1] + i * v[2][3] - v[0][2] - i * v[1][3] - v[0][3] + i * v[1][2];
    CVector w2 = v[0][1] + i * v[2][3];
    CVector w3 = v[0][2] - i * v[1][3];
    CVector w4 = v[0][3] + i * v[1][2];
    auto row4 = [](double a, double b, double c, double d) {
        CVector r(8); // |0> (x) (a,b,c,d)
        r << a, b, c, d, 0, 0, 0, 0;
        return r;
    };
    std::vector<CVector> gins = {w1 / w1.norm(), w2, w3, w4};
    std::vector<CVector> gouts = {row4(.5, .5, .5, .5), row4(.5, .5, -.5, -.5), row4(.5, -.5, .5, -.5),
                                  row4(.5, -.5, -.5, .5)};
    g.g = complete_unitary(gins, gouts, completion_variant);
    // defining relations, unnormalized
    if (((g.g * w1) - 1.5 * row4(1, 1, 1, 1)).norm() > 1e-12)
        throw std::runtime_error("build_gates: G image relation failed");

    // V2 = (I (x) sum_j |j><j| (x) Z P_j) (G (x) I) (I (x) sum_j |j><j| (x) P_{j+1 mod 4})
    CMatrix pre = CMatrix::Zero(8, 8), post = CMatrix::Zero(8, 8);
    for (int j = 0; j < 4; ++j) {
        CMatrix pj = CMatrix::Zero(4, 4);
        pj(j, j) = 1.0;
        pre += kron(pj, pauli((j + 1) % 4));
        post += kron(pj, pauli_z() * pauli(j));
    }
    g.v2 = kron(CMatrix::Identity(2, 2), post) * kron(g.g, CMatrix::Identity(2, 2)) *
           kron(CMatrix::Identity(2, 2), pre);

    // V3 = CCX (H^{(x)2} (x) I) (|0><0| (x) Z - i|1><1| (x) Y + i|2><2| (x) X - |3><3| (x) I)
    CMatrix phase = CMatrix::Zero(8, 8);
    const CMatrix ops[4] = {pauli_z(), -i * pauli_y(), i * pauli_x(), -pauli_i()};
    for (int j = 0; j < 4; ++j) {
        CMatrix pj = CMatrix::Zero(4, 4);
        pj(j, j) = 1.0;
        phase += kron(pj, ops[j]);
    }
    CMatrix ccx = CMatrix::Identity(8, 8);
    ccx.block(6, 6, 2, 2) = pauli_x();
    g.v3 = ccx * kron(kron(hadamard(), hadamard()), CMatrix::Identity(2, 2)) * phase;

    for (const CMatrix* m : {&g.v0, &g.v1, &g.v2, &g.v3, &g.g})
        if (!is_unitary(*m, 1e-12)) throw std::runtime_error("build_gates: gate failed unitarity");
    return g;
}

namespace {

// Full 4-qubit evolution operator for a given query unitary.
CMatrix total_evolution(const CMatrix& u, const CircuitGates& g) {
    const CMatrix i2 = CMatrix::Identity(2, 2);
    const CMatrix i8 = CMatrix::Identity(8, 8);
    CMatrix stage0 = kron(i2, kron(CMatrix::Identity(4, 4), u) * g.v0);
    CMatrix q = kron(i8, u);
    return kron(i2, g.v3) * q * g.v2 * q * g.v1 * stage0;
}

IndexedOperator choi_from_branches(const CVector& a0, const CVector& a1, bool project_ancillas23,
                                   double* prob = nullptr, double* spread = nullptr) {
    // N(|i><j|) = tr_{q1q2q3}(A_i A_j^dag), optionally with ancillas 2,3
    // projected onto |00> first.
    std::array<CVector, 2> a = {a0, a1};
    if (project_ancillas23) {
        for (auto& vec : a) {
            CVector pv = CVector::Zero(16);
            for (int q1 = 0; q1 < 2; ++q1)
                for (int b = 0; b < 2; ++b) {
                    const int idx = ((q1 * 2 + 0) * 2 + 0) * 2 + b;
                    pv(idx) = vec(idx);
                }
            vec = pv;
        }
    }
    CMatrix choi = CMatrix::Zero(4, 4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            CMatrix block = CMatrix::Zero(2, 2);
            for (int anc = 0; anc < 8; ++anc)
                for (int x = 0; x < 2; ++x)
                    for (int y = 0; y < 2; ++y) block(x, y) += a[i](anc * 2 + x) * std::conj(a[j](anc * 2 + y));
            choi.block(2 * i, 2 * j, 2, 2) = block;
        }
    if (prob || spread) {
        // outcome probability for input rho is tr[rho marg^T]
        CMatrix marg(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) marg(i, j) = choi.block(2 * i, 2 * j, 2, 2).trace();
        Eigen::SelfAdjointEigenSolver<CMatrix> es(marg);
        if (prob) *prob = marg.trace().real() / 2.0;
        if (spread) *spread = (es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff());
    }
    return IndexedOperator(std::move(choi), SubsystemLayout({2, 2}, {"P", "F"}));
}

} // namespace

IndexedOperator simulate_shadow_channel(const CMatrix& u, const CircuitGates& g) {
    if (!is_unitary(u, 1e-8) || u.rows() != 2)
        throw std::invalid_argument("simulate_shadow_channel: u must be a qubit unitary");
    const CMatrix t = total_evolution(u, g);
    CVector in0 = CVector::Zero(16), in1 = CVector::Zero(16);
    in0(0) = 1.0; // |0 0 0 0>
    in1(1) = 1.0; // |0 0 0 1>
    return choi_from_branches(t * in0, t * in1, false);
}

IndexedOperator simulate_shadow_channel(const CMatrix& u) {
    static const CircuitGates g = build_gates();
    return simulate_shadow_channel(u, g);
}

comb::CombChoi circuit_comb(const CircuitGates& g) {
    using comb::Architecture;
    using comb::CombSpec;
    const CMatrix i2 = CMatrix::Identity(2, 2);

    // E1 : P -> (q1,q2,q3, I1) prepares |0> ancillas and routes the data
    // qubit through V0.
    CMatrix s1 = CMatrix::Zero(16, 2);
    {
        for (int b = 0; b < 2; ++b) {
            CVector in = CVector::Zero(8);
            in(b) = 1.0; // |00>_q23 (x) |b>
            CVector out = g.v0 * in;
            for (int k = 0; k < 8; ++k) s1(k, b) = out(k); // q1 = |0>
        }
    }

    auto aux_layout = [&](int stage) {
        SubsystemLayout l;
        for (const auto& name : {"q1", "q2", "q3"}) {
            l.dims.push_back(2);
            l.labels.push_back(std::string(name) + "_" + std::to_string(stage));
        }
        return l;
    };

    auto unitary_stage_choi = [&](const CMatrix& uu, int stage, const std::string& in_slot,
                                  const std::string& out_slot) {
        SubsystemLayout in = aux_layout(stage);
        in.dims.push_back(2);
        in.labels.push_back(in_slot);
        SubsystemLayout out = aux_layout(stage + 1);
        out.dims.push_back(2);
        out.labels.push_back(out_slot);
        CMatrix choi = choi_of_pair(uu, uu);
        SubsystemLayout joint = in;
        joint.dims.insert(joint.dims.end(), out.dims.begin(), out.dims.end());
        joint.labels.insert(joint.labels.end(), out.labels.begin(), out.labels.end());
        return IndexedOperator(std::move(choi), std::move(joint));
    };

    // E1 Choi on (P, aux_1, I1)
    SubsystemLayout e1_out = aux_layout(1);
    e1_out.dims.push_back(2);
    e1_out.labels.push_back("I1");
    CMatrix e1_choi = choi_of_pair(s1, s1);
    SubsystemLayout e1_layout({2}, {"P"});
    e1_layout.dims.insert(e1_layout.dims.end(), e1_out.dims.begin(), e1_out.dims.end());
    e1_layout.labels.insert(e1_layout.labels.end(), e1_out.labels.begin(), e1_out.labels.end());
    IndexedOperator acc(e1_choi, e1_layout);

    acc = link_product(acc, unitary_stage_choi(g.v1, 1, "O1", "I2"));
    acc = link_product(acc, unitary_stage_choi(g.v2, 2, "O2", "I3"));

    // D : (aux_3, O3) -> F applies V3 on (q2,q3,data) and traces the ancillas.
    {
        SubsystemLayout in = aux_layout(3);
        in.dims.push_back(2);
        in.labels.push_back("O3");
        CMatrix u3 = kron(i2, g.v3);
        // Choi on (in, F_full = q1q2q3F), then trace the ancilla outputs.
        SubsystemLayout out = aux_layout(4);
        out.dims.push_back(2);
        out.labels.push_back("F");
        CMatrix choi = choi_of_pair(u3, u3);
        SubsystemLayout joint = in;
        joint.dims.insert(joint.dims.end(), out.dims.begin(), out.dims.end());
        joint.labels.insert(joint.labels.end(), out.labels.begin(), out.labels.end());
        IndexedOperator dec(choi, joint);
        dec = partial_trace(dec, {"q1_4", "q2_4", "q3_4"});
        acc = link_product(acc, dec);
    }

    acc = permute_subsystems(acc, CombSpec(2, 3, Architecture::Sequential).layout().labels);
    return comb::CombChoi(CombSpec(2, 3, Architecture::Sequential), std::move(acc));
}

comb::CombChoi circuit_comb() { return circuit_comb(build_gates()); }

bool StructureFit::constraints_ok(double tol) const {
    if (p < -tol || p > 1 + tol) return false;
    if (std::abs(r.real()) > tol) return false;
    return std::norm(r) <= p * (1 - p) + tol;
}

StructureFit fit_structure(const IndexedOperator& channel_choi, const CMatrix& u) {
    const CMatrix udag = u.adjoint();
    const CMatrix zudag = pauli_z() * udag;
    const CMatrix c1 = choi_of_pair(udag, udag);
    const CMatrix c2 = choi_of_pair(zudag, zudag);
    const CMatrix c3 = choi_of_pair(udag, zudag); // rho -> U^dag rho U Z
    const CMatrix c4 = choi_of_pair(zudag, udag); // rho -> Z U^dag rho U

    // choi = c2 + p (c1 - c2) + x (c3 + c4) + y i(c3 - c4), unknowns (p, x, y)
    const CMatrix b0 = channel_choi.mat - c2;
    const CMatrix m1 = c1 - c2;
    const CMatrix m2 = c3 + c4;
    const CMatrix m3 = Complex(0, 1) * (c3 - c4);

    Eigen::MatrixXd a(2 * 16, 3);
    Eigen::VectorXd rhs(2 * 16);
    auto fill = [&](int col, const CMatrix& m) {
        for (int k = 0; k < 16; ++k) {
            a(2 * k, col) = m(k / 4, k % 4).real();
            a(2 * k + 1, col) = m(k / 4, k % 4).imag();
        }
    };
    fill(0, m1);
    fill(1, m2);
    fill(2, m3);
    for (int k = 0; k < 16; ++k) {
        rhs(2 * k) = b0(k / 4, k % 4).real();
        rhs(2 * k + 1) = b0(k / 4, k % 4).imag();
    }
    Eigen::Vector3d sol = a.colPivHouseholderQr().solve(rhs);

    StructureFit fit;
    fit.p = sol(0);
    fit.r = Complex(sol(1), sol(2));
    CMatrix model = c2 + sol(0) * m1 + sol(1) * m2 + sol(2) * m3;
    fit.fit_residual = (channel_choi.mat - model).norm();
    return fit;
}

IndexedOperator mixture_channel(const CMatrix& u) {
    const CMatrix udag = u.adjoint();
    const CMatrix zudag = pauli_z() * udag;
    CMatrix choi = 0.5 * choi_of_pair(udag, udag) + 0.5 * choi_of_pair(zudag, zudag);
    return IndexedOperator(std::move(choi), SubsystemLayout({2, 2}, {"P", "F"}));
}

PostselectionResult postselected_inversion(const CMatrix& u, const CircuitGates& g) {
    if (!is_unitary(u, 1e-8) || u.rows() != 2)
        throw std::invalid_argument("postselected_inversion: u must be a qubit unitary");
    const CMatrix t = total_evolution(u, g);
    CVector in0 = CVector::Zero(16), in1 = CVector::Zero(16);
    in0(0) = 1.0;
    in1(1) = 1.0;
    PostselectionResult res;
    IndexedOperator raw = choi_from_branches(t * in0, t * in1, true, &res.probability, &res.probability_spread);
    res.conditional_choi =
        IndexedOperator(raw.mat / res.probability, SubsystemLayout({2, 2}, {"P", "F"}));
    return res;
}

PostselectionResult postselected_inversion(const CMatrix& u) {
    static const CircuitGates g = build_gates();
    return postselected_inversion(u, g);
}

double kraus_diagonal_deviation(const IndexedOperator& channel_choi, const CMatrix& u) {
    // C_U(sigma) = N(U sigma U^dag): its Choi is (U^T (x) I) Choi (U^* (x) I).
    CMatrix cu = kron(u.transpose(), CMatrix::Identity(2, 2)) * channel_choi.mat *
                 kron(u.conjugate(), CMatrix::Identity(2, 2));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (cu + cu.adjoint()));
    double dev = 0;
    for (int k = 0; k < 4; ++k) {
        const double w = std::max(es.eigenvalues()(k), 0.0);
        if (w < 1e-14) continue;
        // Kraus operator from the Choi eigenvector: A[(out),(in)] entries.
        CMatrix a(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int o = 0; o < 2; ++o) a(o, i) = std::sqrt(w) * es.eigenvectors()(i * 2 + o, k);
        dev = std::max(dev, std::max(std::abs(a(0, 1)), std::abs(a(1, 0))));
    }
    return dev;
}

} // namespace shadow::circuit
