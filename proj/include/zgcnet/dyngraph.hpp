#pragma once

// Weighted graph snapshots over a fixed node universe, and the edge-weight
// constructions used to turn node signals / transaction counts into snapshots.

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <utility>
#include <vector>

namespace zgcnet {

using NodeId = std::int32_t;

/// Undirected edge key, always stored with u < v.
struct Edge {
    NodeId u = 0;
    NodeId v = 0;

    Edge() = default;
    Edge(NodeId a, NodeId b) : u(a < b ? a : b), v(a < b ? b : a) {}

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// One weighted graph at a time step. Weights are symmetric by construction:
/// only the canonical (u < v) key is stored, so w(u,v) and w(v,u) read the same entry.
class Snapshot {
public:
    Snapshot() = default;
    Snapshot(int index, std::size_t universe_size);

    int index() const noexcept { return index_; }
    std::size_t universe_size() const noexcept { return universe_; }

    const std::set<NodeId>& nodes() const noexcept { return nodes_; }
    const std::map<Edge, double>& edges() const noexcept { return weights_; }

    /// Adds an active node (no edges).
    void add_node(NodeId n);
    /// Sets w(u,v) = w(v,u). Endpoints become active. Zero removes the edge.
    void set_weight(NodeId u, NodeId v, double w);
    /// w(u,v); 0 when absent.
    double weight(NodeId u, NodeId v) const;

    std::size_t edge_count() const noexcept { return weights_.size(); }

    friend bool operator==(const Snapshot&, const Snapshot&) = default;

private:
    void check_node(NodeId n) const;

    int index_ = 1;
    std::size_t universe_ = 0;
    std::set<NodeId> nodes_;
    std::map<Edge, double> weights_;
};

/// Ordered sequence of snapshots sharing one universe; indices strictly increase.
class DynamicNetwork {
public:
    DynamicNetwork() = default;
    explicit DynamicNetwork(std::vector<Snapshot> snapshots);

    std::size_t size() const noexcept { return snapshots_.size(); }
    std::size_t universe_size() const noexcept { return universe_; }
    const Snapshot& operator[](std::size_t i) const { return snapshots_.at(i); }
    const std::vector<Snapshot>& snapshots() const noexcept { return snapshots_; }

private:
    std::vector<Snapshot> snapshots_;
    std::size_t universe_ = 0;
};

/// T x N x F node features, stored time-major.
class FeatureSeries {
public:
    FeatureSeries() = default;
    FeatureSeries(std::size_t steps, std::size_t nodes, std::size_t features);

    std::size_t steps() const noexcept { return steps_; }
    std::size_t nodes() const noexcept { return nodes_; }
    std::size_t features() const noexcept { return features_; }

    double& at(std::size_t t, std::size_t n, std::size_t f);
    double at(std::size_t t, std::size_t n, std::size_t f) const;

    /// N*F row-major view of one time step.
    std::span<const double> step(std::size_t t) const;
    std::span<double> step(std::size_t t);

    const std::vector<double>& data() const noexcept { return values_; }

    /// Throws InvalidInput on non-finite entries, ShapeError if N or T disagrees with `net`.
    void validate(const DynamicNetwork& net) const;

private:
    std::size_t steps_ = 0, nodes_ = 0, features_ = 0;
    std::vector<double> values_;
};

/// RBF similarity exp(-|x_u - x_v|^2 / gamma) on candidate edges, right-censored:
/// weights above nu_star become 0. `features` is N*F row-major. An empty `edges`
/// means the complete graph.
Snapshot rbf_censored_weights(std::span<const double> features, std::size_t num_features,
                              const std::vector<Edge>& edges, double gamma, double nu_star,
                              int index = 1);

/// Divides every count by the maximum count.
Snapshot normalize_transaction_weights(const std::map<Edge, std::int64_t>& counts,
                                       std::size_t universe_size, int index = 1);

/// Keeps the M heaviest edges (ties: lexicographic (u,v)) and their endpoints.
Snapshot reduce_top_edges(const Snapshot& s, std::size_t m);

/// Node and edge union; a shared edge keeps the smaller weight.
Snapshot union_graph(const Snapshot& g1, const Snapshot& g2);

/// All runs of `tau` consecutive snapshots, oldest first.
std::vector<std::vector<Snapshot>> sliding_windows(const DynamicNetwork& net, std::size_t tau);

}  // namespace zgcnet
