#include "zgcnet/zigzag.hpp"

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>

#include "zgcnet/error.hpp"
#include "zgcnet/gf2.hpp"

namespace zgcnet {

ZPD::ZPD(std::vector<PersistencePoint> points) : points_(std::move(points)) {
    for (const auto& p : points_)
        if (p.birth > p.death) throw InvalidInput("persistence point with birth after death");
    std::sort(points_.begin(), points_.end());
}

std::vector<PersistencePoint> ZPD::points_of(int dim) const {
    std::vector<PersistencePoint> out;
    for (const auto& p : points_)
        if (p.dim == dim) out.push_back(p);
    return out;
}

namespace {

SimplicialComplex complex_union(const SimplicialComplex& a, const SimplicialComplex& b) {
    std::vector<Simplex> all;
    std::set_union(a.simplices().begin(), a.simplices().end(), b.simplices().begin(), b.simplices().end(),
                   std::back_inserter(all));
    return SimplicialComplex(std::move(all));
}

std::vector<Simplex> difference(const SimplicialComplex& big, const SimplicialComplex& small) {
    std::vector<Simplex> out;
    std::set_difference(big.simplices().begin(), big.simplices().end(), small.simplices().begin(),
                        small.simplices().end(), std::back_inserter(out));
    return out;
}

// Simplex-wise zigzag engine. Every simplex insertion gets a fresh row id, so
// within one dimension the row order is insertion order and a column's pivot is
// its most recently inserted simplex.
//
// Per dimension p the engine keeps a basis of the cycle space Z_p in echelon
// form (distinct pivots). A column is either a live class (with a birth index)
// or a boundary, paired with a (p+1)-chain whose boundary it is.
class ZigzagEngine {
public:
    static constexpr int kTopDim = 2;

    struct Interval {
        int dim;
        std::int64_t birth;  // first simplex-wise complex K_birth containing the class
        std::int64_t death;  // last simplex-wise complex containing the class
    };

    void insert(const Simplex& s) {
        const std::int64_t step = ops_++;
        const int p = s.dim();
        const std::int64_t id = next_id_++;
        if (!ids_.emplace(s.key(), id).second) throw InvalidInput("simplex inserted twice in zigzag events");

        gf2::Column fresh{id};
        if (p == 0) {
            add_cycle(0, std::move(fresh), step + 1, true);
            return;
        }

        gf2::Column boundary = boundary_ids(s);
        std::vector<std::size_t> used;  // columns of Z_{p-1} summing to the boundary
        gf2::Column work = boundary;
        while (!work.empty()) {
            auto it = dims_[p - 1].owner.find(gf2::pivot(work));
            if (it == dims_[p - 1].owner.end()) throw InvalidInput("boundary is not a cycle of the current complex");
            gf2::add_into(work, dims_[p - 1].cols[it->second].cycle);
            used.push_back(it->second);
        }

        auto& lower = dims_[p - 1];
        std::vector<std::size_t> live;
        for (std::size_t c : used)
            if (!lower.cols[c].is_boundary()) live.push_back(c);

        if (live.empty()) {
            // s closes a new p-cycle
            for (std::size_t c : used) gf2::add_into(fresh, dims_[p].chains[lower.cols[c].chain].chain);
            add_cycle(p, std::move(fresh), step + 1, true);
            return;
        }

        // s kills the youngest of the live classes in its boundary
        std::size_t victim = live.front();
        for (std::size_t c : live)
            if (older(lower.cols[victim], lower.cols[c])) victim = c;
        emit(p - 1, lower.cols[victim].birth, step);

        lower.owner.erase(gf2::pivot(lower.cols[victim].cycle));
        lower.cols[victim].cycle = std::move(boundary);
        lower.cols[victim].birth = -1;
        lower.cols[victim].chain = add_chain(p, std::move(fresh));
        settle(p - 1, victim);
    }

    void remove(const Simplex& s) {
        const std::int64_t step = ops_++;
        const int p = s.dim();
        auto key_it = ids_.find(s.key());
        if (key_it == ids_.end()) throw InvalidInput("removing a simplex that is not present");
        const std::int64_t id = key_it->second;
        auto& here = dims_[p];

        std::vector<std::size_t> holding;
        for (std::size_t c = 0; c < here.cols.size(); ++c)
            if (here.cols[c].alive && gf2::contains(here.cols[c].cycle, id)) holding.push_back(c);

        if (!holding.empty()) {
            for (std::size_t c : holding)
                if (here.cols[c].is_boundary()) throw InvalidInput("removing a simplex before its cofaces");

            // clear s out of the chains first; adding a cycle keeps their boundaries
            const gf2::Column& some_cycle = here.cols[holding.front()].cycle;
            for (auto& ch : here.chains)
                if (ch.alive && gf2::contains(ch.chain, id)) gf2::add_into(ch.chain, some_cycle);

            std::sort(holding.begin(), holding.end(), [&](std::size_t a, std::size_t b) {
                return older(here.cols[a], here.cols[b]);
            });
            const std::size_t victim = holding.front();
            emit(p, here.cols[victim].birth, step);

            // Add the oldest column into the rest, swapping contents when needed so pivots stay distinct.
            gf2::Column carry = here.cols[victim].cycle;
            std::int64_t carry_pivot = gf2::pivot(carry);
            here.owner.erase(carry_pivot);
            for (std::size_t k = 1; k < holding.size(); ++k) {
                auto& col = here.cols[holding[k]].cycle;
                const std::int64_t col_pivot = gf2::pivot(col);
                if (col_pivot > carry_pivot) {
                    gf2::add_into(col, carry);
                } else {
                    gf2::Column previous = col;
                    gf2::add_into(col, carry);
                    here.owner[carry_pivot] = holding[k];
                    here.owner.erase(col_pivot);
                    carry = std::move(previous);
                    carry_pivot = col_pivot;
                }
            }
            here.cols[victim].alive = false;
            here.cols[victim].cycle.clear();
            here.free_cols.push_back(victim);
        } else {
            if (p == 0) throw InvalidInput("vertex removed while not a cycle (cofaces still present?)");
            auto& lower = dims_[p - 1];
            std::vector<std::size_t> bounded;
            for (std::size_t c = 0; c < lower.cols.size(); ++c) {
                const auto& col = lower.cols[c];
                if (col.alive && col.is_boundary() && gf2::contains(here.chains[col.chain].chain, id))
                    bounded.push_back(c);
            }
            if (bounded.empty()) throw InvalidInput("simplex is in neither a cycle nor a chain");

            std::size_t freed = bounded.front();
            for (std::size_t c : bounded)
                if (gf2::pivot(lower.cols[c].cycle) < gf2::pivot(lower.cols[freed].cycle)) freed = c;
            for (std::size_t c : bounded) {
                if (c == freed) continue;
                gf2::add_into(lower.cols[c].cycle, lower.cols[freed].cycle);
                gf2::add_into(here.chains[lower.cols[c].chain].chain, here.chains[lower.cols[freed].chain].chain);
            }
            drop_chain(p, lower.cols[freed].chain);
            lower.cols[freed].chain = 0;
            lower.cols[freed].birth = step + 1;
            lower.cols[freed].forward = false;
        }
        ids_.erase(key_it);
    }

    /// Closes every live class at the final complex.
    std::vector<Interval> finish(int maxdim) {
        std::vector<Interval> out;
        for (const auto& iv : intervals_)
            if (iv.dim <= maxdim) out.push_back(iv);
        for (int p = 0; p <= std::min(maxdim, kTopDim); ++p)
            for (const auto& col : dims_[p].cols)
                if (col.alive && !col.is_boundary()) out.push_back({p, col.birth, ops_});
        return out;
    }

    std::int64_t ops() const { return ops_; }

private:
    struct CycleColumn {
        gf2::Column cycle;
        std::int64_t birth = -1;  // -1 marks a boundary column
        bool forward = true;      // birth caused by an insertion
        std::size_t chain = 0;    // index into chains of dimension p+1 when a boundary
        bool alive = true;

        bool is_boundary() const { return birth < 0; }
    };
    struct ChainColumn {
        gf2::Column chain;
        bool alive = true;
    };
    struct Dimension {
        std::vector<CycleColumn> cols;
        std::vector<std::size_t> free_cols;
        std::unordered_map<std::int64_t, std::size_t> owner;  // pivot -> column
        std::vector<ChainColumn> chains;                       // chains of this dimension
        std::vector<std::size_t> free_chains;
    };

    // a is strictly older than b in the birth order induced by arrow directions:
    // classes born on backward arrows precede those born on forward arrows; among
    // forward births earlier is older, among backward births later is older.
    static bool older(const CycleColumn& a, const CycleColumn& b) {
        if (a.birth == b.birth) return false;
        if (a.birth < b.birth) return b.forward;
        return !a.forward;
    }

    static bool can_add(const CycleColumn& src, const CycleColumn& dst) {
        if (src.is_boundary()) return true;
        if (dst.is_boundary()) return false;
        return older(src, dst);
    }

    gf2::Column boundary_ids(const Simplex& s) const {
        gf2::Column out;
        for (const Simplex& f : s.facets()) {
            auto it = ids_.find(f.key());
            if (it == ids_.end()) throw InvalidInput("simplex inserted before its faces");
            out.push_back(it->second);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    void emit(int dim, std::int64_t birth, std::int64_t death) { intervals_.push_back({dim, birth, death}); }

    void add_cycle(int p, gf2::Column cycle, std::int64_t birth, bool forward) {
        auto& d = dims_[p];
        CycleColumn col{std::move(cycle), birth, forward, 0, true};
        std::size_t idx;
        if (!d.free_cols.empty()) {
            idx = d.free_cols.back();
            d.free_cols.pop_back();
            d.cols[idx] = std::move(col);
        } else {
            idx = d.cols.size();
            d.cols.push_back(std::move(col));
        }
        settle(p, idx);
    }

    std::size_t add_chain(int p, gf2::Column chain) {
        auto& d = dims_[p];
        if (!d.free_chains.empty()) {
            const std::size_t idx = d.free_chains.back();
            d.free_chains.pop_back();
            d.chains[idx] = {std::move(chain), true};
            return idx;
        }
        d.chains.push_back({std::move(chain), true});
        return d.chains.size() - 1;
    }

    void drop_chain(int p, std::size_t idx) {
        dims_[p].chains[idx] = {{}, false};
        dims_[p].free_chains.push_back(idx);
    }

    // Restores distinct pivots after column `c` of dimension p changed (its old
    // pivot must already be released). Additions only go in directions that keep
    // every birth label valid.
    void settle(int p, std::size_t c) {
        auto& d = dims_[p];
        for (;;) {
            const std::int64_t pv = gf2::pivot(d.cols[c].cycle);
            if (pv < 0) throw InvalidInput("cycle basis became dependent");
            auto it = d.owner.find(pv);
            if (it == d.owner.end() || it->second == c) {
                d.owner[pv] = c;
                return;
            }
            const std::size_t other = it->second;
            if (can_add(d.cols[other], d.cols[c])) {
                add_column(p, other, c);
            } else {
                add_column(p, c, other);
                d.owner[pv] = c;
                c = other;
            }
        }
    }

    void add_column(int p, std::size_t src, std::size_t dst) {
        auto& d = dims_[p];
        gf2::add_into(d.cols[dst].cycle, d.cols[src].cycle);
        if (d.cols[src].is_boundary() && d.cols[dst].is_boundary())
            gf2::add_into(dims_[p + 1].chains[d.cols[dst].chain].chain, dims_[p + 1].chains[d.cols[src].chain].chain);
    }

    Dimension dims_[kTopDim + 2];
    std::unordered_map<std::uint64_t, std::int64_t> ids_;
    std::int64_t next_id_ = 0;
    std::int64_t ops_ = 0;
    std::vector<Interval> intervals_;
};

}  // namespace

ZigzagFiltration build_zigzag(const std::vector<Snapshot>& window, double nu_star, const FiltrationMode& mode,
                              UnionRule rule) {
    if (window.empty()) throw InvalidInput("zigzag window must contain at least one snapshot");
    ZigzagFiltration zf;
    const std::size_t t = window.size();
    std::vector<SimplicialComplex> snaps;
    snaps.reserve(t);
    for (const auto& s : window) snaps.push_back(build_complex(s, nu_star, mode));

    zf.complexes.push_back(snaps[0]);
    for (std::size_t k = 0; k + 1 < t; ++k) {
        SimplicialComplex joint = rule == UnionRule::GraphUnion
                                      ? build_complex(union_graph(window[k], window[k + 1]), nu_star, mode)
                                      : complex_union(snaps[k], snaps[k + 1]);
        const std::string where = "C(G" + std::to_string(window[k].index()) + " u G" +
                                  std::to_string(window[k + 1].index()) + ")";
        if (!snaps[k].is_subset_of(joint))
            throw InclusionError("inclusion violated on arrow C(G" + std::to_string(window[k].index()) + ") -> " + where);
        if (!snaps[k + 1].is_subset_of(joint))
            throw InclusionError("inclusion violated on arrow " + where + " <- C(G" +
                                 std::to_string(window[k + 1].index()) + ")");
        zf.changes.push_back(difference(joint, snaps[k]));
        zf.changes.push_back(difference(joint, snaps[k + 1]));
        zf.complexes.push_back(std::move(joint));
        zf.complexes.push_back(snaps[k + 1]);
    }
    return zf;
}

ZPD compute_zigzag_persistence(const ZigzagFiltration& zf, int maxdim) {
    if (maxdim < 0 || maxdim > 1) throw InvalidInput("zigzag persistence supports homology dimensions 0 and 1");
    if (zf.complexes.empty() || zf.complexes.size() % 2 == 0 || zf.changes.size() + 1 != zf.complexes.size())
        throw InvalidInput("malformed zigzag filtration");

    ZigzagEngine engine;
    std::vector<std::int64_t> checkpoint;  // simplex-wise index of each diagram position
    checkpoint.reserve(zf.complexes.size());

    for (const Simplex& s : zf.complexes.front().simplices()) engine.insert(s);
    checkpoint.push_back(engine.ops());

    for (std::size_t a = 0; a < zf.changes.size(); ++a) {
        std::vector<Simplex> events = zf.changes[a];
        if (ZigzagFiltration::is_forward(a)) {
            std::sort(events.begin(), events.end());
            for (const Simplex& s : events) engine.insert(s);
        } else {
            std::sort(events.begin(), events.end(), [](const Simplex& x, const Simplex& y) { return y < x; });
            for (const Simplex& s : events) engine.remove(s);
        }
        checkpoint.push_back(engine.ops());
    }

    // Restrict simplex-wise intervals to the diagram positions.
    std::vector<PersistencePoint> points;
    for (const auto& iv : engine.finish(maxdim)) {
        const auto first = std::lower_bound(checkpoint.begin(), checkpoint.end(), iv.birth);
        const auto last = std::upper_bound(checkpoint.begin(), checkpoint.end(), iv.death);
        if (first == checkpoint.end() || last == checkpoint.begin()) continue;
        const auto b = static_cast<std::size_t>(first - checkpoint.begin());
        const auto d = static_cast<std::size_t>(last - checkpoint.begin()) - 1;
        if (b > d) continue;
        points.push_back({iv.dim, ZigzagFiltration::position(b), ZigzagFiltration::position(d)});
    }
    return ZPD(std::move(points));
}

BettiReport betti_consistency_check(const ZigzagFiltration& zf, const ZPD& zpd) {
    BettiReport report;
    for (std::size_t j = 0; j < zf.complexes.size(); ++j) {
        const HalfIndex at = ZigzagFiltration::position(j);
        for (int p = 0; p <= 1; ++p) {
            const std::size_t expected = betti_numbers(zf.complexes[j], p);
            std::size_t observed = 0;
            for (const auto& pt : zpd.points())
                if (pt.dim == p && pt.birth <= at && at <= pt.death) ++observed;
            if (observed != expected) report.violations.push_back({p, at, expected, observed});
        }
    }
    return report;
}

}  // namespace zgcnet
