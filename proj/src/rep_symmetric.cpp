#include "shadow/rep/symmetric.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace shadow::rep {

Perm identity_perm(int n) {
    Perm p(n);
    std::iota(p.begin(), p.end(), 0);
    return p;
}

Perm compose(const Perm& a, const Perm& b) {
    Perm c(b.size());
    for (size_t i = 0; i < b.size(); ++i) c[i] = a[b[i]];
    return c;
}

Perm inverse(const Perm& p) {
    Perm q(p.size());
    for (size_t i = 0; i < p.size(); ++i) q[p[i]] = static_cast<int>(i);
    return q;
}

int perm_sign(const Perm& p) {
    std::vector<bool> seen(p.size(), false);
    int sign = 1;
    for (size_t i = 0; i < p.size(); ++i) {
        if (seen[i]) continue;
        int len = 0;
        for (size_t j = i; !seen[j]; j = p[j]) {
            seen[j] = true;
            ++len;
        }
        if (len % 2 == 0) sign = -sign;
    }
    return sign;
}

Partition cycle_type(const Perm& p) {
    std::vector<bool> seen(p.size(), false);
    std::vector<int> lens;
    for (size_t i = 0; i < p.size(); ++i) {
        if (seen[i]) continue;
        int len = 0;
        for (size_t j = i; !seen[j]; j = p[j]) {
            seen[j] = true;
            ++len;
        }
        lens.push_back(len);
    }
    std::sort(lens.rbegin(), lens.rend());
    return Partition(lens);
}

namespace {

long ipow_local(int d, int n) {
    long t = 1;
    for (int i = 0; i < n; ++i) t *= d;
    return t;
}

} // namespace

RMatrix perm_action(const Perm& sigma, int d) {
    RMatrix m = RMatrix::Zero(ipow_local(d, static_cast<int>(sigma.size())),
                              ipow_local(d, static_cast<int>(sigma.size())));
    const Perm inv = inverse(sigma);
    const int n = static_cast<int>(sigma.size());
    std::vector<int> idx(n, 0);
    for (long col = 0; col < m.cols(); ++col) {
        long row = 0;
        for (int k = 0; k < n; ++k) row = row * d + idx[inv[k]];
        m(row, col) = 1.0;
        for (int k = n - 1; k >= 0; --k) {
            if (++idx[k] < d) break;
            idx[k] = 0;
        }
    }
    return m;
}

namespace {

// acc += w * P_sigma on (C^d)^{(x)n}
void add_perm_action(RMatrix& acc, const Perm& sigma, int d, double w) {
    const int n = static_cast<int>(sigma.size());
    const Perm inv = inverse(sigma);
    const long total = acc.rows();
    std::vector<int> idx(n, 0);
    for (long col = 0; col < total; ++col) {
        long row = 0;
        for (int k = 0; k < n; ++k) row = row * d + idx[inv[k]];
        acc(row, col) += w;
        for (int k = n - 1; k >= 0; --k) {
            if (++idx[k] < d) break;
            idx[k] = 0;
        }
    }
}

long ipow(int d, int n) {
    long t = 1;
    for (int i = 0; i < n; ++i) t *= d;
    return t;
}

using Beta = std::vector<long long>;

Beta to_beta(const std::vector<int>& parts, int slots) {
    Beta b(slots);
    for (int i = 0; i < slots; ++i) {
        int part = (i < static_cast<int>(parts.size())) ? parts[i] : 0;
        b[slots - 1 - i] = part + (slots - 1 - i);
    }
    return b;
}

std::vector<int> from_beta(const Beta& b) {
    std::vector<int> parts;
    const int slots = static_cast<int>(b.size());
    for (int i = slots - 1; i >= 0; --i) {
        int part = static_cast<int>(b[i] - i);
        if (part > 0) parts.push_back(part);
    }
    return parts;
}

using MnMemo = std::map<std::pair<std::vector<int>, std::vector<int>>, long long>;

long long mn_recurse(const std::vector<int>& lambda, const std::vector<int>& mu, MnMemo& memo) {
    if (mu.empty()) return 1;
    auto key = std::make_pair(lambda, mu);
    if (auto it = memo.find(key); it != memo.end()) return it->second;

    const int k = mu[0];
    std::vector<int> mu_rest(mu.begin() + 1, mu.end());
    Beta beta = to_beta(lambda, static_cast<int>(lambda.size()) + k);

    long long total = 0;
    for (size_t i = 0; i < beta.size(); ++i) {
        const long long target = beta[i] - k;
        if (target < 0) continue;
        if (std::binary_search(beta.begin(), beta.end(), target)) continue;
        int height = 0;
        for (long long v : beta)
            if (v > target && v < beta[i]) ++height;
        Beta nb = beta;
        nb[i] = target;
        std::sort(nb.begin(), nb.end());
        const long long sub = mn_recurse(from_beta(nb), mu_rest, memo);
        total += (height % 2 == 0 ? sub : -sub);
    }
    memo[key] = total;
    return total;
}

} // namespace

long long sn_character(const Partition& lambda, const Partition& mu) {
    if (lambda.n() != mu.n()) throw std::invalid_argument("sn_character: sizes differ");
    MnMemo memo;
    return mn_recurse(lambda.parts, mu.parts, memo);
}

RMatrix young_symmetrizer(const Tableau& theta, int d) {
    if (theta.kind != TableauKind::Standard) throw std::invalid_argument("young_symmetrizer: SYT required");
    const int n = theta.shape.n();
    if (n == 0) return RMatrix::Identity(1, 1);
    const long total = ipow(d, n);

    // Sum over a direct product of symmetric groups acting on the given
    // position sets, divided by the product of the set factorials.
    auto group_sum = [&](const std::vector<std::vector<int>>& sets, bool signed_sum) {
        RMatrix acc = RMatrix::Zero(total, total);
        double norm = 1.0;
        for (const auto& s : sets) norm *= static_cast<double>(factorial(static_cast<int>(s.size())));
        std::vector<std::vector<int>> perms = sets;
        bool done = false;
        while (!done) {
            Perm sigma = identity_perm(n);
            for (size_t s = 0; s < sets.size(); ++s)
                for (size_t j = 0; j < sets[s].size(); ++j) sigma[sets[s][j]] = perms[s][j];
            const double w = signed_sum ? static_cast<double>(perm_sign(sigma)) : 1.0;
            add_perm_action(acc, sigma, d, w);
            size_t s = 0;
            while (s < perms.size() && !std::next_permutation(perms[s].begin(), perms[s].end())) ++s;
            done = (s == perms.size());
        }
        return RMatrix(acc / norm);
    };

    std::vector<std::vector<int>> row_sets;
    for (const auto& row : theta.filling) {
        std::vector<int> s;
        for (int v : row) s.push_back(v - 1);
        std::sort(s.begin(), s.end());
        row_sets.push_back(std::move(s));
    }
    std::vector<std::vector<int>> col_sets;
    const int ncols = theta.shape.rows() > 0 ? theta.shape.parts[0] : 0;
    for (int c = 0; c < ncols; ++c) {
        std::vector<int> s;
        for (int r = 0; r < theta.shape.rows(); ++r)
            if (c < theta.shape.parts[r]) s.push_back(theta.filling[r][c] - 1);
        std::sort(s.begin(), s.end());
        col_sets.push_back(std::move(s));
    }

    return group_sum(row_sets, false) * group_sum(col_sets, true);
}

RMatrix isotypic_projector(const Partition& lambda, int d) {
    const int n = lambda.n();
    if (n == 0) return RMatrix::Identity(1, 1);
    const long total = ipow(d, n);
    std::map<std::vector<int>, long long> chi_by_type;
    RMatrix acc = RMatrix::Zero(total, total);
    Perm sigma = identity_perm(n);
    do {
        const Partition type = cycle_type(sigma);
        auto it = chi_by_type.find(type.parts);
        if (it == chi_by_type.end()) it = chi_by_type.emplace(type.parts, sn_character(lambda, type)).first;
        if (it->second != 0) add_perm_action(acc, sigma, d, static_cast<double>(it->second));
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    const double f = static_cast<double>(count_syt(lambda));
    return acc * (f / static_cast<double>(factorial(n)));
}

std::vector<int> seed_tuple(const Tableau& theta, const Tableau& phi) {
    const int n = theta.shape.n();
    std::vector<int> tuple(n, 0);
    for (int r = 0; r < theta.shape.rows(); ++r)
        for (int c = 0; c < theta.shape.parts[r]; ++c) tuple[theta.filling[r][c] - 1] = phi.filling[r][c] - 1;
    return tuple;
}

} // namespace shadow::rep
