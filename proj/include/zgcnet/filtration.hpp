#pragma once

// Simplicial complexes (dimension <= 2) built from one weighted snapshot at a
// fixed scale, plus GF(2) Betti numbers.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "zgcnet/dyngraph.hpp"

namespace zgcnet {

/// Sorted set of 1 to 3 distinct vertices.
class Simplex {
public:
    Simplex() = default;
    explicit Simplex(NodeId a);
    Simplex(NodeId a, NodeId b);
    Simplex(NodeId a, NodeId b, NodeId c);

    int dim() const noexcept { return static_cast<int>(size_) - 1; }
    std::size_t size() const noexcept { return size_; }
    NodeId operator[](std::size_t i) const { return v_[i]; }
    const NodeId* begin() const noexcept { return v_.data(); }
    const NodeId* end() const noexcept { return v_.data() + size_; }

    /// Codimension-1 faces, in the order obtained by dropping vertex 0, 1, ...
    std::vector<Simplex> facets() const;

    /// Orders by dimension first, then lexicographically; a face-respecting order.
    friend bool operator<(const Simplex& a, const Simplex& b) noexcept {
        if (a.size_ != b.size_) return a.size_ < b.size_;
        return a.v_ < b.v_;
    }
    friend bool operator==(const Simplex& a, const Simplex& b) noexcept {
        return a.size_ == b.size_ && a.v_ == b.v_;
    }

    /// Collision-free 64-bit key for node ids below 2^21.
    std::uint64_t key() const noexcept;

private:
    std::array<NodeId, 3> v_{-1, -1, -1};
    std::uint8_t size_ = 0;
};

/// Face-closed set of simplices of dimension <= 2, kept sorted (dimension, then lexicographic).
class SimplicialComplex {
public:
    SimplicialComplex() = default;
    /// Sorts and deduplicates; throws InvalidInput if the result is not face-closed.
    explicit SimplicialComplex(std::vector<Simplex> simplices);

    const std::vector<Simplex>& simplices() const noexcept { return simplices_; }
    std::size_t size() const noexcept { return simplices_.size(); }
    std::size_t count(int dim) const;
    bool contains(const Simplex& s) const;
    bool is_subset_of(const SimplicialComplex& other) const;
    bool is_face_closed() const;

    friend bool operator==(const SimplicialComplex&, const SimplicialComplex&) = default;

private:
    std::vector<Simplex> simplices_;
};

enum class FiltrationKind {
    WeightSublevelClique,
    VietorisRips,
    WeightRankClique,
    Power,
    WeightedDegreeSublevel,
};

/// Filtration convention. For WeightedDegreeSublevel, `node_function` (one value
/// per universe node) replaces the weighted degree when non-empty.
struct FiltrationMode {
    FiltrationKind kind = FiltrationKind::WeightSublevelClique;
    std::vector<double> node_function;
};

FiltrationKind parse_filtration_kind(std::string_view name);
std::string to_string(FiltrationKind kind);

/// Complex of `s` at scale `nu_star` under `mode`.
SimplicialComplex build_complex(const Snapshot& s, double nu_star, const FiltrationMode& mode);

/// GF(2) Betti number of dimension p (0 or 1).
std::size_t betti_numbers(const SimplicialComplex& c, int p);

/// One simplex per line, vertices space-separated.
void write_complex(std::ostream& os, const SimplicialComplex& c);

}  // namespace zgcnet
