#include "shadow/layout.hpp"

#include <algorithm>
#include <set>

namespace shadow {

SubsystemLayout::SubsystemLayout(std::vector<int> d, std::vector<std::string> l)
    : dims(std::move(d)), labels(std::move(l)) {
    if (dims.size() != labels.size())
        throw std::invalid_argument("SubsystemLayout: dims/labels length mismatch");
    for (int x : dims)
        if (x <= 0) throw std::invalid_argument("SubsystemLayout: nonpositive dimension");
    std::set<std::string> seen(labels.begin(), labels.end());
    if (seen.size() != labels.size())
        throw std::invalid_argument("SubsystemLayout: duplicate labels");
}

long SubsystemLayout::total_dim() const {
    long t = 1;
    for (int d : dims) t *= d;
    return t;
}

int SubsystemLayout::index_of(const std::string& label) const {
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return static_cast<int>(i);
    return -1;
}

IndexedOperator::IndexedOperator(CMatrix m, SubsystemLayout l) : mat(std::move(m)), layout(std::move(l)) {
    if (mat.rows() != mat.cols()) throw std::invalid_argument("IndexedOperator: matrix not square");
    if (mat.rows() != layout.total_dim())
        throw std::invalid_argument("IndexedOperator: matrix side does not match layout dims");
}

namespace {

std::vector<int> positions_of(const SubsystemLayout& layout, const std::vector<std::string>& subset) {
    std::vector<int> pos;
    pos.reserve(subset.size());
    for (const auto& s : subset) {
        int k = layout.index_of(s);
        if (k < 0) throw std::invalid_argument("unknown subsystem label: " + s);
        pos.push_back(k);
    }
    std::sort(pos.begin(), pos.end());
    pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
    return pos;
}

// Strides for mixed-radix flattening, last factor fastest.
std::vector<long> strides_of(const std::vector<int>& dims) {
    std::vector<long> s(dims.size());
    long acc = 1;
    for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
        s[k] = acc;
        acc *= dims[k];
    }
    return s;
}

} // namespace

IndexedOperator partial_trace(const IndexedOperator& op, const std::vector<std::string>& subset) {
    const auto traced = positions_of(op.layout, subset);
    const auto& dims = op.layout.dims;
    const auto strides = strides_of(dims);

    std::vector<int> kept;
    for (int k = 0; k < op.layout.size(); ++k)
        if (!std::binary_search(traced.begin(), traced.end(), k)) kept.push_back(k);

    SubsystemLayout out_layout;
    for (int k : kept) {
        out_layout.dims.push_back(dims[k]);
        out_layout.labels.push_back(op.layout.labels[k]);
    }
    const long dkept = out_layout.total_dim();
    long dtr = 1;
    for (int k : traced) dtr *= dims[k];

    // Flat offsets of every kept-index tuple and traced-index tuple.
    auto offsets = [&](const std::vector<int>& pos) {
        long count = 1;
        for (int k : pos) count *= dims[k];
        std::vector<long> off(count, 0);
        std::vector<int> idx(pos.size(), 0);
        for (long c = 0; c < count; ++c) {
            long o = 0;
            for (size_t j = 0; j < pos.size(); ++j) o += idx[j] * strides[pos[j]];
            off[c] = o;
            for (int j = static_cast<int>(pos.size()) - 1; j >= 0; --j) {
                if (++idx[j] < dims[pos[j]]) break;
                idx[j] = 0;
            }
        }
        return off;
    };
    const auto kept_off = offsets(kept);
    const auto tr_off = offsets(traced);

    CMatrix out = CMatrix::Zero(dkept, dkept);
    for (long r = 0; r < dkept; ++r)
        for (long c = 0; c < dkept; ++c) {
            Complex acc = 0;
            for (long t = 0; t < dtr; ++t) acc += op.mat(kept_off[r] + tr_off[t], kept_off[c] + tr_off[t]);
            out(r, c) = acc;
        }
    return IndexedOperator(std::move(out), std::move(out_layout));
}

IndexedOperator partial_transpose(const IndexedOperator& op, const std::vector<std::string>& subset) {
    const auto tpos = positions_of(op.layout, subset);
    const auto& dims = op.layout.dims;
    const auto strides = strides_of(dims);
    const long n = op.layout.total_dim();

    CMatrix out(n, n);
    std::vector<int> ri(dims.size()), ci(dims.size());
    for (long r = 0; r < n; ++r) {
        long rr = r;
        for (size_t k = 0; k < dims.size(); ++k) {
            ri[k] = static_cast<int>(rr / strides[k]);
            rr %= strides[k];
        }
        for (long c = 0; c < n; ++c) {
            long cc = c;
            for (size_t k = 0; k < dims.size(); ++k) {
                ci[k] = static_cast<int>(cc / strides[k]);
                cc %= strides[k];
            }
            long sr = 0, sc = 0;
            for (size_t k = 0; k < dims.size(); ++k) {
                bool swap = std::binary_search(tpos.begin(), tpos.end(), static_cast<int>(k));
                sr += (swap ? ci[k] : ri[k]) * strides[k];
                sc += (swap ? ri[k] : ci[k]) * strides[k];
            }
            out(sr, sc) = op.mat(r, c);
        }
    }
    return IndexedOperator(std::move(out), op.layout);
}

IndexedOperator permute_subsystems(const IndexedOperator& op, const std::vector<std::string>& new_order) {
    if (new_order.size() != op.layout.labels.size())
        throw std::invalid_argument("permute_subsystems: label count mismatch");
    const auto& dims = op.layout.dims;
    const auto strides = strides_of(dims);
    std::vector<int> src(new_order.size());
    SubsystemLayout out_layout;
    for (size_t k = 0; k < new_order.size(); ++k) {
        int p = op.layout.index_of(new_order[k]);
        if (p < 0) throw std::invalid_argument("permute_subsystems: unknown label " + new_order[k]);
        src[k] = p;
        out_layout.dims.push_back(dims[p]);
        out_layout.labels.push_back(new_order[k]);
    }
    const long n = op.layout.total_dim();
    std::vector<long> map(n);
    const auto out_strides = strides_of(out_layout.dims);
    std::vector<int> idx(dims.size(), 0);
    for (long f = 0; f < n; ++f) {
        long g = 0;
        for (size_t k = 0; k < src.size(); ++k) g += idx[src[k]] * out_strides[k];
        map[f] = g;
        for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
            if (++idx[k] < dims[k]) break;
            idx[k] = 0;
        }
    }
    CMatrix out(n, n);
    for (long r = 0; r < n; ++r)
        for (long c = 0; c < n; ++c) out(map[r], map[c]) = op.mat(r, c);
    return IndexedOperator(std::move(out), std::move(out_layout));
}

IndexedOperator link_product(const IndexedOperator& a, const IndexedOperator& b) {
    std::vector<std::string> shared, a_only, b_only;
    for (const auto& l : a.layout.labels) {
        if (b.layout.has(l)) {
            shared.push_back(l);
            if (a.layout.dims[a.layout.index_of(l)] != b.layout.dims[b.layout.index_of(l)])
                throw std::invalid_argument("link_product: dimension mismatch on shared label " + l);
        } else {
            a_only.push_back(l);
        }
    }
    for (const auto& l : b.layout.labels)
        if (!a.layout.has(l)) b_only.push_back(l);

    // Bring a to (a_only, shared) and b to (shared, b_only).
    std::vector<std::string> a_order = a_only;
    a_order.insert(a_order.end(), shared.begin(), shared.end());
    std::vector<std::string> b_order = shared;
    b_order.insert(b_order.end(), b_only.begin(), b_only.end());
    IndexedOperator ap = permute_subsystems(a, a_order);
    IndexedOperator bp = permute_subsystems(b, b_order);

    long ds = 1;
    for (const auto& l : shared) ds *= a.layout.dims[a.layout.index_of(l)];
    const long da = ap.layout.total_dim() / ds;
    const long db = bp.layout.total_dim() / ds;

    // (A*B)[(x,y),(x',y')] = sum_{m,k} A[(x,m),(x',k)] B[(m,y),(k,y')]
    CMatrix out = CMatrix::Zero(da * db, da * db);
    for (long x = 0; x < da; ++x)
        for (long xp = 0; xp < da; ++xp)
            for (long y = 0; y < db; ++y)
                for (long yp = 0; yp < db; ++yp) {
                    Complex acc = 0;
                    for (long m = 0; m < ds; ++m)
                        for (long k = 0; k < ds; ++k)
                            acc += ap.mat(x * ds + m, xp * ds + k) * bp.mat(m * db + y, k * db + yp);
                    out(x * db + y, xp * db + yp) = acc;
                }

    SubsystemLayout out_layout;
    for (const auto& l : a_only) {
        out_layout.dims.push_back(a.layout.dims[a.layout.index_of(l)]);
        out_layout.labels.push_back(l);
    }
    for (const auto& l : b_only) {
        out_layout.dims.push_back(b.layout.dims[b.layout.index_of(l)]);
        out_layout.labels.push_back(l);
    }
    return IndexedOperator(std::move(out), std::move(out_layout));
}

} // namespace shadow
