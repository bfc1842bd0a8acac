#pragma once

#include <cstdint>
#include <vector>

namespace shadow::rep {

// Weakly decreasing positive parts; the empty partition has n = 0.
struct Partition {
    std::vector<int> parts;

    Partition() = default;
    explicit Partition(std::vector<int> p);

    int n() const;
    int rows() const { return static_cast<int>(parts.size()); }
    bool operator==(const Partition& o) const { return parts == o.parts; }
    bool operator<(const Partition& o) const; // lexicographic, larger first parts first
};

// All partitions of n with at most max_rows parts, in the deterministic
// order (n), (n-1,1), ... produced by descending first parts.
std::vector<Partition> partitions(int n, int max_rows);

// Product of the hook numbers of the diagram.
std::uint64_t hook_length(const Partition& lambda);

std::uint64_t factorial(int n);

// n! / H_lambda
std::uint64_t count_syt(const Partition& lambda);

// prod_boxes (d + j - i) / H_lambda, zero when the diagram has more than d rows.
std::uint64_t count_ssyt(const Partition& lambda, int d);

enum class TableauKind { Standard, Semistandard };

struct Tableau {
    Partition shape;
    std::vector<std::vector<int>> filling; // filling[row][col]
    TableauKind kind = TableauKind::Standard;
};

std::vector<Tableau> enumerate_syt(const Partition& lambda);
std::vector<Tableau> enumerate_ssyt(const Partition& lambda, int d);

} // namespace shadow::rep
