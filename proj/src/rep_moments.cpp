#include "shadow/rep/moments.hpp"

#include <numeric>
#include <stdexcept>

namespace shadow::rep {

std::uint64_t moment_I(int k, int d) {
    if (k < 0 || d < 1) throw std::invalid_argument("moment_I: bad arguments");
    std::uint64_t s = 0;
    for (const Partition& lambda : partitions(k, std::min(k, d))) {
        const std::uint64_t f = factorial(k) / hook_length(lambda);
        s += f * f;
    }
    return s;
}

std::uint64_t moment_J(int s, const std::vector<int>& multiplicities) {
    if (s < 0 || multiplicities.empty()) throw std::invalid_argument("moment_J: bad arguments");
    const int m = static_cast<int>(multiplicities.size());
    std::uint64_t total = 0;
    std::vector<int> k(m, 0);
    // iterate all compositions of s into m parts
    auto rec = [&](auto&& self, int slot, int remaining) -> void {
        if (slot == m - 1) {
            k[slot] = remaining;
            std::uint64_t multinom = factorial(s);
            for (int r = 0; r < m; ++r) multinom /= factorial(k[r]);
            std::uint64_t term = multinom * multinom;
            for (int r = 0; r < m; ++r) term *= moment_I(k[r], multiplicities[r]);
            total += term;
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            k[slot] = v;
            self(self, slot + 1, remaining - v);
        }
    };
    rec(rec, 0, s);
    return total;
}

std::uint64_t variable_count(const std::vector<int>& multiplicities, int t) {
    const int d = std::accumulate(multiplicities.begin(), multiplicities.end(), 0);
    return static_cast<std::uint64_t>(multiplicities.size()) * moment_I(t + 1, d) *
           moment_J(t, multiplicities);
}

std::uint64_t variable_count_bound(int d, int t) {
    std::uint64_t b = factorial(t + 1) * factorial(t);
    for (int i = 0; i < t + 1; ++i) b *= static_cast<std::uint64_t>(d);
    return b;
}

} // namespace shadow::rep
