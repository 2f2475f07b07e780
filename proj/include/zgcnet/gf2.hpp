#pragma once

// Sparse GF(2) columns: sorted vectors of row indices.

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <unordered_map>
#include <vector>

namespace zgcnet::gf2 {

using Column = std::vector<std::int64_t>;

/// a += b over GF(2).
inline void add_into(Column& a, const Column& b) {
    Column out;
    out.reserve(a.size() + b.size());
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    a.swap(out);
}

/// Largest row index, or -1 for the zero column.
inline std::int64_t pivot(const Column& c) { return c.empty() ? -1 : c.back(); }

inline bool contains(const Column& c, std::int64_t row) {
    return std::binary_search(c.begin(), c.end(), row);
}

/// Rank of a matrix given as columns (standard left-to-right reduction).
inline std::size_t rank(std::vector<Column> columns) {
    std::unordered_map<std::int64_t, std::size_t> owner;
    std::size_t r = 0;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        Column& col = columns[j];
        while (!col.empty()) {
            auto it = owner.find(pivot(col));
            if (it == owner.end()) break;
            add_into(col, columns[it->second]);
        }
        if (!col.empty()) {
            owner.emplace(pivot(col), j);
            ++r;
        }
    }
    return r;
}

}  // namespace zgcnet::gf2
