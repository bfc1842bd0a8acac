#pragma once

#include "shadow/comb/comb.hpp"
#include "shadow/matrix.hpp"

namespace shadow::circuit {

// Gates of the 3-query qubit shadow-inversion circuit. Qubit 1 is the top
// ancilla, qubits 2-3 the middle ancillas, qubit 4 the data qubit.
// V0, V3 act on qubits (2,3,4); V1, V2 on (1,2,3,4); G on (1,2,3).
struct CircuitGates {
    CMatrix v0; // 8x8
    CMatrix v1; // 16x16
    CMatrix v2; // 16x16
    CMatrix v3; // 8x8
    CMatrix g;  // 8x8, embedded in v2
};

// completion_variant selects the deterministic unitary completion used for
// the partially defined V1 and G (0: canonical index order, 1: reversed).
// The induced channel is completion-independent.
CircuitGates build_gates(int completion_variant = 0);

// Choi (on labels P, F) of the qubit->qubit channel obtained by running
// the circuit with three queries of u and tracing the three ancillas.
IndexedOperator simulate_shadow_channel(const CMatrix& u, const CircuitGates& gates);
IndexedOperator simulate_shadow_channel(const CMatrix& u);

// Packages the fixed circuit pieces into a 3-slot sequential comb Choi.
comb::CombChoi circuit_comb(const CircuitGates& gates);
comb::CombChoi circuit_comb();

struct StructureFit {
    double p = 0;
    Complex r = 0;
    double fit_residual = 0;

    bool constraints_ok(double tol = 1e-8) const;
};

// Least-squares fit of N(rho) = p U^dag rho U + (1-p) Z U^dag rho U Z
//                               + r U^dag rho U Z + conj(r) Z U^dag rho U
// over the Choi representation.
StructureFit fit_structure(const IndexedOperator& channel_choi, const CMatrix& u);

// Choi of M_U(rho) = 1/2 U^dag rho U + 1/2 Z U^dag rho U Z on labels (P, F).
IndexedOperator mixture_channel(const CMatrix& u);

struct PostselectionResult {
    double probability = 0;
    IndexedOperator conditional_choi; // normalized, labels (P, F)
    double probability_spread = 0;    // max deviation of the outcome probability over inputs
};

// Projects ancilla qubits 2 and 3 onto |00> before tracing; the success
// probability is state-independent and the conditional channel is exactly
// rho -> U^dag rho U.
PostselectionResult postselected_inversion(const CMatrix& u, const CircuitGates& gates);
PostselectionResult postselected_inversion(const CMatrix& u);

// Largest deviation of the Kraus operators of sigma -> N(U sigma U^dag)
// from diagonal form; zero exactly for valid shadow inversions under Z.
double kraus_diagonal_deviation(const IndexedOperator& channel_choi, const CMatrix& u);

} // namespace shadow::circuit
