#pragma once

#include "shadow/rep/partition.hpp"

#include <cstdint>
#include <vector>

namespace shadow::rep {

// I_k(d) = sum over partitions of k with at most d rows of (k!/H_lambda)^2,
// the 2k-th Haar moment of |tr U| on U(d).
std::uint64_t moment_I(int k, int d);

// J_s over a centralizer with eigenspace sizes l_1..l_m:
// sum over compositions (k_1..k_m) of s of [s!/(k_1!..k_m!)]^2 prod I_{k_r}(l_r).
std::uint64_t moment_J(int s, const std::vector<int>& multiplicities);

// Number of scalar variables of the reduced SDP, N = m I_{t+1}(d) J_t.
std::uint64_t variable_count(const std::vector<int>& multiplicities, int t);

// Upper bound (t+1)! t! d^{t+1}.
std::uint64_t variable_count_bound(int d, int t);

} // namespace shadow::rep
