#pragma once

#include "shadow/matrix.hpp"
#include "shadow/rep/partition.hpp"

#include <vector>

namespace shadow::rep {

// Permutations are 0-based images: sigma[j] is where j maps to.
using Perm = std::vector<int>;

Perm identity_perm(int n);
Perm compose(const Perm& a, const Perm& b); // (a o b)(x) = a[b[x]]
Perm inverse(const Perm& p);
int perm_sign(const Perm& p);
Partition cycle_type(const Perm& p);

// Action of sigma on (C^d)^{(x)n} in the paper convention
// P_sigma |i_1 .. i_n> = |i_{sigma^{-1}(1)} .. i_{sigma^{-1}(n)}>.
// Returned as a real 0/1 matrix of side d^n.
RMatrix perm_action(const Perm& sigma, int d);

// Irreducible S_n character chi_lambda evaluated on the class of cycle
// type mu (Murnaghan-Nakayama).
long long sn_character(const Partition& lambda, const Partition& mu);

// Normalized Young symmetrizer P_theta = R_theta C_theta of a standard
// tableau, acting on (C^d)^{(x)n}; every row/column factor carries a
// 1/k! normalization.
RMatrix young_symmetrizer(const Tableau& theta, int d);

// Projector onto the lambda-isotypic component of (C^d)^{(x)n} under the
// S_n action, (dim S_lambda / n!) sum_sigma chi_lambda(sigma) P_sigma.
RMatrix isotypic_projector(const Partition& lambda, int d);

// Seed vector index tuple: tensor slot p carries the entry of the SSYT
// phi sitting in the box numbered p by the SYT theta. Returned as the
// 0-based index tuple (i_1..i_n).
std::vector<int> seed_tuple(const Tableau& theta, const Tableau& phi);

} // namespace shadow::rep
