#include "zgcnet/filtration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <unordered_map>

#include "zgcnet/error.hpp"
#include "zgcnet/gf2.hpp"

namespace zgcnet {

Simplex::Simplex(NodeId a) : v_{a, -1, -1}, size_(1) {}

Simplex::Simplex(NodeId a, NodeId b) : size_(2) {
    if (a == b) throw InvalidInput("simplex vertices must be distinct");
    v_ = {std::min(a, b), std::max(a, b), -1};
}

Simplex::Simplex(NodeId a, NodeId b, NodeId c) : size_(3) {
    if (a == b || b == c || a == c) throw InvalidInput("simplex vertices must be distinct");
    v_ = {a, b, c};
    std::sort(v_.begin(), v_.end());
}

std::vector<Simplex> Simplex::facets() const {
    switch (size_) {
        case 2: return {Simplex(v_[1]), Simplex(v_[0])};
        case 3: return {Simplex(v_[1], v_[2]), Simplex(v_[0], v_[2]), Simplex(v_[0], v_[1])};
        default: return {};
    }
}

std::uint64_t Simplex::key() const noexcept {
    std::uint64_t k = 0;
    for (int i = 0; i < 3; ++i) k = (k << 21) | static_cast<std::uint64_t>(v_[i] + 1);
    return k;
}

SimplicialComplex::SimplicialComplex(std::vector<Simplex> simplices) : simplices_(std::move(simplices)) {
    std::sort(simplices_.begin(), simplices_.end());
    simplices_.erase(std::unique(simplices_.begin(), simplices_.end()), simplices_.end());
    if (!is_face_closed()) throw InvalidInput("simplex set is not closed under faces");
}

std::size_t SimplicialComplex::count(int dim) const {
    return static_cast<std::size_t>(
        std::count_if(simplices_.begin(), simplices_.end(), [dim](const Simplex& s) { return s.dim() == dim; }));
}

bool SimplicialComplex::contains(const Simplex& s) const {
    return std::binary_search(simplices_.begin(), simplices_.end(), s);
}

bool SimplicialComplex::is_subset_of(const SimplicialComplex& other) const {
    return std::includes(other.simplices_.begin(), other.simplices_.end(), simplices_.begin(), simplices_.end());
}

bool SimplicialComplex::is_face_closed() const {
    for (const Simplex& s : simplices_)
        for (const Simplex& f : s.facets())
            if (!contains(f)) return false;
    return true;
}

FiltrationKind parse_filtration_kind(std::string_view name) {
    if (name == "sublevel" || name == "weight-sublevel") return FiltrationKind::WeightSublevelClique;
    if (name == "vr" || name == "vietoris-rips") return FiltrationKind::VietorisRips;
    if (name == "rank" || name == "weight-rank") return FiltrationKind::WeightRankClique;
    if (name == "power") return FiltrationKind::Power;
    if (name == "degree" || name == "weighted-degree") return FiltrationKind::WeightedDegreeSublevel;
    throw InvalidInput("unknown filtration mode '" + std::string(name) + "'");
}

std::string to_string(FiltrationKind kind) {
    switch (kind) {
        case FiltrationKind::WeightSublevelClique: return "sublevel";
        case FiltrationKind::VietorisRips: return "vr";
        case FiltrationKind::WeightRankClique: return "rank";
        case FiltrationKind::Power: return "power";
        case FiltrationKind::WeightedDegreeSublevel: return "degree";
    }
    return "?";
}

namespace {

using Adjacency = std::unordered_map<NodeId, std::vector<std::pair<NodeId, double>>>;

Adjacency adjacency_of(const Snapshot& s) {
    Adjacency adj;
    for (NodeId n : s.nodes()) adj[n];
    for (const auto& [e, w] : s.edges()) {
        adj[e.u].emplace_back(e.v, w);
        adj[e.v].emplace_back(e.u, w);
    }
    return adj;
}

// Flag complex: vertices, the given edges, and every triangle whose three edges are present.
SimplicialComplex clique_expand(const std::set<NodeId>& vertices, const std::vector<Edge>& edges) {
    std::vector<Simplex> out;
    out.reserve(vertices.size() + edges.size());
    for (NodeId v : vertices) out.emplace_back(v);

    std::unordered_map<NodeId, std::vector<NodeId>> higher;  // neighbours with larger id
    for (const Edge& e : edges) {
        out.emplace_back(e.u, e.v);
        higher[e.u].push_back(e.v);
    }
    for (auto& [n, nbrs] : higher) std::sort(nbrs.begin(), nbrs.end());

    for (const Edge& e : edges) {
        auto iu = higher.find(e.u);
        auto iv = higher.find(e.v);
        if (iv == higher.end()) continue;
        const auto& a = iu->second;
        const auto& b = iv->second;
        std::vector<NodeId> common;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
        for (NodeId w : common) out.emplace_back(e.u, e.v, w);
    }
    return SimplicialComplex(std::move(out));
}

std::vector<Edge> pairs_within(const Snapshot& s, double nu_star, bool hop_metric) {
    const Adjacency adj = adjacency_of(s);
    std::vector<Edge> out;
    if (nu_star < 0.0) return out;
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (NodeId src : s.nodes()) {
        std::unordered_map<NodeId, double> dist;
        using Item = std::pair<double, NodeId>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        dist[src] = 0.0;
        pq.emplace(0.0, src);
        while (!pq.empty()) {
            auto [d, u] = pq.top();
            pq.pop();
            if (d > dist[u] || d > nu_star) continue;
            for (const auto& [v, w] : adj.at(u)) {
                const double nd = d + (hop_metric ? 1.0 : w);
                auto it = dist.find(v);
                if (nd < (it == dist.end() ? inf : it->second)) {
                    dist[v] = nd;
                    pq.emplace(nd, v);
                }
            }
        }
        for (const auto& [v, d] : dist)
            if (v > src && d <= nu_star) out.emplace_back(src, v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

SimplicialComplex build_complex(const Snapshot& s, double nu_star, const FiltrationMode& mode) {
    if (std::isnan(nu_star)) throw InvalidInput("scale parameter is NaN");

    switch (mode.kind) {
        case FiltrationKind::WeightSublevelClique: {
            std::vector<Edge> kept;
            for (const auto& [e, w] : s.edges())
                if (w <= nu_star) kept.push_back(e);
            return clique_expand(s.nodes(), kept);
        }
        case FiltrationKind::VietorisRips:
            return clique_expand(s.nodes(), pairs_within(s, nu_star, false));
        case FiltrationKind::Power:
            if (nu_star < 0.0) throw InvalidInput("power filtration needs a nonnegative scale");
            return clique_expand(s.nodes(), pairs_within(s, nu_star, true));
        case FiltrationKind::WeightRankClique: {
            if (nu_star < 0.0) throw InvalidInput("rank filtration needs a nonnegative scale");
            std::vector<double> distinct;
            for (const auto& [e, w] : s.edges()) distinct.push_back(w);
            std::sort(distinct.begin(), distinct.end(), std::greater<>());
            distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
            const double m = static_cast<double>(distinct.size());
            std::vector<Edge> kept;
            for (const auto& [e, w] : s.edges()) {
                // rank 1 = heaviest weight
                const auto pos = std::lower_bound(distinct.begin(), distinct.end(), w, std::greater<>()) - distinct.begin();
                if (static_cast<double>(pos + 1) / m <= nu_star) kept.push_back(e);
            }
            return clique_expand(s.nodes(), kept);
        }
        case FiltrationKind::WeightedDegreeSublevel: {
            std::vector<double> f(s.universe_size(), 0.0);
            if (!mode.node_function.empty()) {
                if (mode.node_function.size() != s.universe_size())
                    throw ShapeError("node function must have one value per universe node");
                f = mode.node_function;
            } else {
                for (const auto& [e, w] : s.edges()) {
                    f[e.u] += w;
                    f[e.v] += w;
                }
            }
            std::set<NodeId> verts;
            for (NodeId n : s.nodes())
                if (f[n] <= nu_star) verts.insert(n);
            std::vector<Edge> kept;
            for (const auto& [e, w] : s.edges())
                if (verts.count(e.u) && verts.count(e.v)) kept.push_back(e);
            return clique_expand(verts, kept);
        }
    }
    throw InvalidInput("unhandled filtration mode");
}

std::size_t betti_numbers(const SimplicialComplex& c, int p) {
    if (p != 0 && p != 1) throw InvalidInput("Betti numbers are computed for p = 0 or 1");

    std::unordered_map<std::uint64_t, std::int64_t> row;
    std::size_t nv = 0, ne = 0;
    std::vector<gf2::Column> d1, d2;
    for (const Simplex& s : c.simplices()) {
        row.emplace(s.key(), static_cast<std::int64_t>(row.size()));
        if (s.dim() == 0) {
            ++nv;
            continue;
        }
        gf2::Column col;
        for (const Simplex& f : s.facets()) col.push_back(row.at(f.key()));
        std::sort(col.begin(), col.end());
        if (s.dim() == 1) {
            ++ne;
            d1.push_back(std::move(col));
        } else {
            d2.push_back(std::move(col));
        }
    }
    const std::size_t r1 = gf2::rank(std::move(d1));
    if (p == 0) return nv - r1;
    return ne - r1 - gf2::rank(std::move(d2));
}

void write_complex(std::ostream& os, const SimplicialComplex& c) {
    for (const Simplex& s : c.simplices()) {
        for (std::size_t i = 0; i < s.size(); ++i) os << (i ? " " : "") << s[i];
        os << '\n';
    }
}

}  // namespace zgcnet
