#pragma once

#include "shadow/matrix.hpp"

#include <string>
#include <vector>

namespace shadow {

// Ordered list of subsystem dimensions with unique labels.
struct SubsystemLayout {
    std::vector<int> dims;
    std::vector<std::string> labels;

    SubsystemLayout() = default;
    SubsystemLayout(std::vector<int> d, std::vector<std::string> l);

    int size() const { return static_cast<int>(dims.size()); }
    long total_dim() const;
    int index_of(const std::string& label) const; // -1 if absent
    bool has(const std::string& label) const { return index_of(label) >= 0; }
};

// Square operator on a multipartite space, tagged with its layout.
struct IndexedOperator {
    CMatrix mat;
    SubsystemLayout layout;

    IndexedOperator() = default;
    IndexedOperator(CMatrix m, SubsystemLayout l);
};

IndexedOperator partial_trace(const IndexedOperator& op, const std::vector<std::string>& subset);
IndexedOperator partial_transpose(const IndexedOperator& op, const std::vector<std::string>& subset);

// Reorders tensor factors so that labels appear in the requested order
// (which must be a permutation of the existing labels).
IndexedOperator permute_subsystems(const IndexedOperator& op, const std::vector<std::string>& new_order);

// Link product A * B = tr_shared[(A^{T_shared} (x) I)(I (x) B)].
// Shared labels must carry equal dimensions; the result is laid out as
// (labels only in a, labels only in b).
IndexedOperator link_product(const IndexedOperator& a, const IndexedOperator& b);

} // namespace shadow
