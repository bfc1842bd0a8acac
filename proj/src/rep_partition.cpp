#include "shadow/rep/partition.hpp"

#include <numeric>
#include <stdexcept>

namespace shadow::rep {

Partition::Partition(std::vector<int> p) : parts(std::move(p)) {
    for (size_t i = 0; i < parts.size(); ++i) {
        if (parts[i] <= 0) throw std::invalid_argument("Partition: parts must be positive");
        if (i > 0 && parts[i] > parts[i - 1])
            throw std::invalid_argument("Partition: parts must be weakly decreasing");
    }
}

int Partition::n() const { return std::accumulate(parts.begin(), parts.end(), 0); }

bool Partition::operator<(const Partition& o) const {
    return std::lexicographical_compare(o.parts.begin(), o.parts.end(), parts.begin(), parts.end());
}

namespace {
void gen_partitions(int remaining, int max_part, int rows_left, std::vector<int>& cur,
                    std::vector<Partition>& out) {
    if (remaining == 0) {
        out.push_back(Partition(cur));
        return;
    }
    if (rows_left == 0) return;
    for (int p = std::min(remaining, max_part); p >= 1; --p) {
        cur.push_back(p);
        gen_partitions(remaining - p, p, rows_left - 1, cur, out);
        cur.pop_back();
    }
}
} // namespace

std::vector<Partition> partitions(int n, int max_rows) {
    if (n < 0) throw std::invalid_argument("partitions: n must be >= 0");
    std::vector<Partition> out;
    std::vector<int> cur;
    gen_partitions(n, n, max_rows, cur, out);
    return out;
}

std::uint64_t hook_length(const Partition& lambda) {
    const auto& p = lambda.parts;
    std::vector<int> collen; // conjugate partition
    if (!p.empty()) {
        collen.assign(p[0], 0);
        for (int r = 0; r < lambda.rows(); ++r)
            for (int c = 0; c < p[r]; ++c) collen[c]++;
    }
    std::uint64_t h = 1;
    for (int r = 0; r < lambda.rows(); ++r)
        for (int c = 0; c < p[r]; ++c) h *= static_cast<std::uint64_t>((p[r] - c - 1) + (collen[c] - r - 1) + 1);
    return h;
}

std::uint64_t factorial(int n) {
    std::uint64_t f = 1;
    for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
    return f;
}

std::uint64_t count_syt(const Partition& lambda) { return factorial(lambda.n()) / hook_length(lambda); }

std::uint64_t count_ssyt(const Partition& lambda, int d) {
    if (lambda.rows() > d) return 0;
    std::uint64_t num = 1;
    for (int r = 0; r < lambda.rows(); ++r)
        for (int c = 0; c < lambda.parts[r]; ++c) num *= static_cast<std::uint64_t>(d + c - r);
    return num / hook_length(lambda);
}

namespace {

// Fills boxes in row-major order; `next[r]` is the next empty column of row r.
void gen_syt(const Partition& shape, int value, std::vector<int>& next,
             std::vector<std::vector<int>>& fill, std::vector<Tableau>& out) {
    if (value > shape.n()) {
        out.push_back(Tableau{shape, fill, TableauKind::Standard});
        return;
    }
    for (int r = 0; r < shape.rows(); ++r) {
        int c = next[r];
        if (c >= shape.parts[r]) continue;
        if (r > 0 && next[r - 1] <= c) continue; // box above must already be filled
        fill[r][c] = value;
        next[r]++;
        gen_syt(shape, value + 1, next, fill, out);
        next[r]--;
    }
}

void gen_ssyt(const Partition& shape, int d, int box, std::vector<std::vector<int>>& fill,
              std::vector<Tableau>& out) {
    int n = shape.n();
    if (box == n) {
        out.push_back(Tableau{shape, fill, TableauKind::Semistandard});
        return;
    }
    int r = 0, c = box;
    while (c >= shape.parts[r]) c -= shape.parts[r++];
    int lo = 1;
    if (c > 0) lo = std::max(lo, fill[r][c - 1]);      // weakly increasing along rows
    if (r > 0) lo = std::max(lo, fill[r - 1][c] + 1);  // strictly increasing down columns
    for (int v = lo; v <= d; ++v) {
        fill[r][c] = v;
        gen_ssyt(shape, d, box + 1, fill, out);
    }
}

} // namespace

std::vector<Tableau> enumerate_syt(const Partition& lambda) {
    std::vector<Tableau> out;
    std::vector<int> next(lambda.rows(), 0);
    std::vector<std::vector<int>> fill(lambda.rows());
    for (int r = 0; r < lambda.rows(); ++r) fill[r].assign(lambda.parts[r], 0);
    if (lambda.rows() == 0) {
        out.push_back(Tableau{lambda, {}, TableauKind::Standard});
        return out;
    }
    gen_syt(lambda, 1, next, fill, out);
    return out;
}

std::vector<Tableau> enumerate_ssyt(const Partition& lambda, int d) {
    std::vector<Tableau> out;
    if (lambda.rows() > d) return out;
    if (lambda.rows() == 0) {
        out.push_back(Tableau{lambda, {}, TableauKind::Semistandard});
        return out;
    }
    std::vector<std::vector<int>> fill(lambda.rows());
    for (int r = 0; r < lambda.rows(); ++r) fill[r].assign(lambda.parts[r], 0);
    gen_ssyt(lambda, d, 0, fill, out);
    return out;
}

} // namespace shadow::rep
