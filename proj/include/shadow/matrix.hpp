#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace shadow {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kDefaultTol = 1e-10;

inline CMatrix dagger(const CMatrix& a) { return a.adjoint(); }

bool approx_equal(const CMatrix& a, const CMatrix& b, double tol = kDefaultTol);
bool is_hermitian(const CMatrix& a, double tol = kDefaultTol);
bool is_unitary(const CMatrix& a, double tol = kDefaultTol);
// Smallest eigenvalue of the Hermitian part must exceed -tol.
bool is_psd(const CMatrix& a, double tol = kDefaultTol);
double min_eigenvalue(const CMatrix& hermitian);

CMatrix kron(const CMatrix& a, const CMatrix& b);
RMatrix kron_real(const RMatrix& a, const RMatrix& b);

// Column-stacked Choi vector |U>> = sum_i |i>_in (x) (U|i>)_out.
// The input factor comes first.
CVector choi_vector(const CMatrix& u);

// Choi operator |A>><<B| of the map rho -> A rho B^dagger.
CMatrix choi_of_pair(const CMatrix& a, const CMatrix& b);

// Switch operator F : H_B (x) H_A -> H_A (x) H_B, |b>|a> -> |a>|b>.
CMatrix switch_operator(int dim_a, int dim_b);

// Permutation operator P_perm on n tensor factors with the paper
// convention P_{pi^{-1}} |e_{i_1} ... e_{i_n}> = |e_{i_pi(1)} ... e_{i_pi(n)}>,
// i.e. permutation_operator(perm) moves factor j to position perm[j].
// Satisfies P_pi P_sigma = P_{pi o sigma}. perm is 0-based.
CMatrix permutation_operator(const std::vector<int>& perm, const std::vector<int>& dims);

const CMatrix& pauli_i();
const CMatrix& pauli_x();
const CMatrix& pauli_y();
const CMatrix& pauli_z();
const CMatrix& pauli(int j); // P_0..P_3 = I, X, Y, Z
const CMatrix& hadamard();

} // namespace shadow
