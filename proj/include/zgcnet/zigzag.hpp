#pragma once

// Zigzag persistence over a window of snapshots:
//
//   C(G1) -> C(G1 u G2) <- C(G2) -> ... <- C(GT)
//
// Positions on this diagram are half-integers 1, 1.5, 2, ..., T; they are stored
// doubled so all diagram arithmetic stays in integers.

#include <compare>
#include <cstddef>
#include <string>
#include <vector>

#include "zgcnet/dyngraph.hpp"
#include "zgcnet/filtration.hpp"

namespace zgcnet {

/// Position k (twice = 2k) or k + 1/2 (twice = 2k + 1) on the zigzag diagram.
struct HalfIndex {
    int twice = 2;

    constexpr HalfIndex() = default;
    constexpr explicit HalfIndex(int twice_value) : twice(twice_value) {}

    static constexpr HalfIndex snapshot(int k) { return HalfIndex(2 * k); }
    static constexpr HalfIndex union_after(int k) { return HalfIndex(2 * k + 1); }

    constexpr double value() const { return twice / 2.0; }
    constexpr bool is_union() const { return twice % 2 != 0; }

    friend constexpr auto operator<=>(HalfIndex, HalfIndex) = default;
};

/// How the complex at a union position is formed.
enum class UnionRule {
    /// C(G_k u G_{k+1}) from the union graph; inclusions are verified.
    GraphUnion,
    /// C(G_k) u C(G_{k+1}); always a valid zigzag, for modes that are not monotone under graph union.
    ComplexUnion,
};

/// The 2T-1 complexes of a window plus, per arrow, the simplices that change.
/// Arrow a connects position a and a+1 (0-based). Even arrows point forward into a
/// union (simplices added); odd arrows point backward out of a union (simplices removed).
struct ZigzagFiltration {
    std::vector<SimplicialComplex> complexes;
    std::vector<std::vector<Simplex>> changes;

    std::size_t window_length() const { return (complexes.size() + 1) / 2; }
    static HalfIndex position(std::size_t j) { return HalfIndex(static_cast<int>(j) + 2); }
    static bool is_forward(std::size_t arrow) { return arrow % 2 == 0; }
};

struct PersistencePoint {
    int dim = 0;
    HalfIndex birth;
    HalfIndex death;

    friend auto operator<=>(const PersistencePoint&, const PersistencePoint&) = default;
};

/// Zigzag persistence diagram: multiset of (dim, birth, death), birth <= death,
/// kept sorted so equal multisets compare equal.
class ZPD {
public:
    ZPD() = default;
    explicit ZPD(std::vector<PersistencePoint> points);

    const std::vector<PersistencePoint>& points() const noexcept { return points_; }
    std::vector<PersistencePoint> points_of(int dim) const;
    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }

    friend bool operator==(const ZPD&, const ZPD&) = default;

private:
    std::vector<PersistencePoint> points_;
};

ZigzagFiltration build_zigzag(const std::vector<Snapshot>& window, double nu_star, const FiltrationMode& mode,
                              UnionRule rule = UnionRule::GraphUnion);

/// Interval decomposition over GF(2) for homology dimensions 0..maxdim (maxdim <= 1).
/// Features alive in the last complex die at T.
ZPD compute_zigzag_persistence(const ZigzagFiltration& zf, int maxdim = 1);

struct BettiViolation {
    int dim = 0;
    HalfIndex at;
    std::size_t expected = 0;  // Betti number of the complex
    std::size_t observed = 0;  // bars covering the position
};

struct BettiReport {
    std::vector<BettiViolation> violations;
    bool ok() const { return violations.empty(); }
};

/// Compares, at every position and for p in {0,1}, the number of bars covering the
/// position with the Betti number of the complex there.
BettiReport betti_consistency_check(const ZigzagFiltration& zf, const ZPD& zpd);

}  // namespace zgcnet
