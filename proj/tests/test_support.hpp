#pragma once

#include <numeric>
#include <random>
#include <vector>

#include "zgcnet/dyngraph.hpp"
#include "zgcnet/filtration.hpp"

namespace zgcnet::fixture {

/// Erdos-Renyi snapshot with uniform (0,1] weights; every node active.
inline Snapshot random_snapshot(std::mt19937_64& rng, std::size_t n, double edge_prob, int index = 1) {
    std::bernoulli_distribution coin(edge_prob);
    std::uniform_real_distribution<double> weight(0.01, 1.0);
    Snapshot s(index, n);
    for (std::size_t u = 0; u < n; ++u) s.add_node(static_cast<NodeId>(u));
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v)
            if (coin(rng)) s.set_weight(static_cast<NodeId>(u), static_cast<NodeId>(v), weight(rng));
    return s;
}

inline std::vector<Snapshot> random_window(std::mt19937_64& rng, std::size_t n, std::size_t t, double edge_prob) {
    std::vector<Snapshot> w;
    for (std::size_t k = 0; k < t; ++k) w.push_back(random_snapshot(rng, n, edge_prob, static_cast<int>(k + 1)));
    return w;
}

/// Connected components of the 1-skeleton, by union-find (no linear algebra).
inline std::size_t component_count(const SimplicialComplex& c) {
    std::vector<NodeId> verts;
    for (const auto& s : c.simplices())
        if (s.dim() == 0) verts.push_back(s[0]);
    NodeId max_id = 0;
    for (NodeId v : verts) max_id = std::max(max_id, v);
    std::vector<NodeId> parent(static_cast<std::size_t>(max_id) + 1);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](NodeId x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::size_t comps = verts.size();
    for (const auto& s : c.simplices()) {
        if (s.dim() != 1) continue;
        NodeId a = find(s[0]), b = find(s[1]);
        if (a != b) {
            parent[a] = b;
            --comps;
        }
    }
    return comps;
}

}  // namespace zgcnet::fixture
