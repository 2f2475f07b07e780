#include "zgcnet/dyngraph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zgcnet/error.hpp"

namespace zgcnet {

Snapshot::Snapshot(int index, std::size_t universe_size) : index_(index), universe_(universe_size) {}

void Snapshot::check_node(NodeId n) const {
    if (n < 0 || static_cast<std::size_t>(n) >= universe_)
        throw InvalidInput("node " + std::to_string(n) + " outside universe of size " +
                           std::to_string(universe_));
}

void Snapshot::add_node(NodeId n) {
    check_node(n);
    nodes_.insert(n);
}

void Snapshot::set_weight(NodeId u, NodeId v, double w) {
    check_node(u);
    check_node(v);
    if (u == v) throw InvalidInput("self-loop on node " + std::to_string(u));
    if (!std::isfinite(w) || w < 0.0) throw InvalidInput("edge weight must be finite and nonnegative");
    if (w == 0.0) {
        weights_.erase(Edge(u, v));
        return;
    }
    nodes_.insert(u);
    nodes_.insert(v);
    weights_[Edge(u, v)] = w;
}

double Snapshot::weight(NodeId u, NodeId v) const {
    if (u == v) return 0.0;
    auto it = weights_.find(Edge(u, v));
    return it == weights_.end() ? 0.0 : it->second;
}

DynamicNetwork::DynamicNetwork(std::vector<Snapshot> snapshots) : snapshots_(std::move(snapshots)) {
    if (snapshots_.empty()) throw InvalidInput("dynamic network needs at least one snapshot");
    universe_ = snapshots_.front().universe_size();
    for (std::size_t i = 0; i < snapshots_.size(); ++i) {
        if (snapshots_[i].universe_size() != universe_)
            throw ShapeError("snapshot " + std::to_string(snapshots_[i].index()) +
                             " has a different node universe");
        if (i > 0 && snapshots_[i].index() <= snapshots_[i - 1].index())
            throw InvalidInput("snapshot indices must strictly increase");
    }
}

FeatureSeries::FeatureSeries(std::size_t steps, std::size_t nodes, std::size_t features)
    : steps_(steps), nodes_(nodes), features_(features), values_(steps * nodes * features, 0.0) {
    if (features == 0) throw InvalidInput("feature series needs F >= 1");
}

double& FeatureSeries::at(std::size_t t, std::size_t n, std::size_t f) {
    return values_.at((t * nodes_ + n) * features_ + f);
}

double FeatureSeries::at(std::size_t t, std::size_t n, std::size_t f) const {
    return values_.at((t * nodes_ + n) * features_ + f);
}

std::span<const double> FeatureSeries::step(std::size_t t) const {
    return {values_.data() + t * nodes_ * features_, nodes_ * features_};
}

std::span<double> FeatureSeries::step(std::size_t t) {
    return {values_.data() + t * nodes_ * features_, nodes_ * features_};
}

void FeatureSeries::validate(const DynamicNetwork& net) const {
    for (double v : values_)
        if (!std::isfinite(v)) throw InvalidInput("non-finite feature value");
    if (nodes_ != net.universe_size())
        throw ShapeError("feature series has " + std::to_string(nodes_) + " nodes, network has " +
                         std::to_string(net.universe_size()));
    if (steps_ != net.size())
        throw ShapeError("feature series has " + std::to_string(steps_) + " steps, network has " +
                         std::to_string(net.size()));
}

Snapshot rbf_censored_weights(std::span<const double> features, std::size_t num_features,
                              const std::vector<Edge>& edges, double gamma, double nu_star, int index) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidInput("gamma must be positive");
    if (num_features == 0 || features.size() % num_features != 0)
        throw ShapeError("feature block is not N x F");
    for (double v : features)
        if (!std::isfinite(v)) throw InvalidInput("non-finite feature value");

    const std::size_t n = features.size() / num_features;
    Snapshot out(index, n);
    for (std::size_t i = 0; i < n; ++i) out.add_node(static_cast<NodeId>(i));

    auto weigh = [&](NodeId u, NodeId v) {
        double d2 = 0.0;
        for (std::size_t f = 0; f < num_features; ++f) {
            const double diff = features[u * num_features + f] - features[v * num_features + f];
            d2 += diff * diff;
        }
        const double w = std::exp(-d2 / gamma);
        if (w <= nu_star) out.set_weight(u, v, w);
    };

    if (edges.empty()) {
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = u + 1; v < n; ++v) weigh(static_cast<NodeId>(u), static_cast<NodeId>(v));
    } else {
        for (const Edge& e : edges) {
            if (static_cast<std::size_t>(e.v) >= n || e.u < 0) throw ShapeError("candidate edge outside universe");
            if (e.u != e.v) weigh(e.u, e.v);
        }
    }
    return out;
}

Snapshot normalize_transaction_weights(const std::map<Edge, std::int64_t>& counts, std::size_t universe_size,
                                       int index) {
    std::int64_t max_count = 0;
    for (const auto& [e, c] : counts) {
        if (c < 0) throw InvalidInput("negative transaction count");
        max_count = std::max(max_count, c);
    }
    Snapshot out(index, universe_size);
    for (const auto& [e, c] : counts) {
        if (e.u == e.v) throw InvalidInput("self-loop in transaction counts");
        out.add_node(e.u);
        out.add_node(e.v);
        if (max_count > 0 && c > 0)
            out.set_weight(e.u, e.v, static_cast<double>(c) / static_cast<double>(max_count));
    }
    return out;
}

Snapshot reduce_top_edges(const Snapshot& s, std::size_t m) {
    if (m == 0) throw InvalidInput("M must be >= 1");
    if (s.edge_count() <= m) return s;

    std::vector<std::pair<Edge, double>> ranked(s.edges().begin(), s.edges().end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    ranked.resize(m);

    Snapshot out(s.index(), s.universe_size());
    for (const auto& [e, w] : ranked) out.set_weight(e.u, e.v, w);
    return out;
}

Snapshot union_graph(const Snapshot& g1, const Snapshot& g2) {
    if (g1.universe_size() != g2.universe_size()) throw ShapeError("union of snapshots over different universes");
    Snapshot out(g1.index(), g1.universe_size());
    for (NodeId n : g1.nodes()) out.add_node(n);
    for (NodeId n : g2.nodes()) out.add_node(n);
    for (const auto& [e, w] : g1.edges()) out.set_weight(e.u, e.v, w);
    for (const auto& [e, w] : g2.edges()) {
        const double prev = out.weight(e.u, e.v);
        out.set_weight(e.u, e.v, prev > 0.0 ? std::min(prev, w) : w);
    }
    return out;
}

std::vector<std::vector<Snapshot>> sliding_windows(const DynamicNetwork& net, std::size_t tau) {
    if (tau == 0) throw InvalidInput("window length must be positive");
    if (tau > net.size())
        throw InvalidInput("window length " + std::to_string(tau) + " exceeds series length " +
                           std::to_string(net.size()));
    std::vector<std::vector<Snapshot>> out;
    out.reserve(net.size() - tau + 1);
    for (std::size_t start = 0; start + tau <= net.size(); ++start)
        out.emplace_back(net.snapshots().begin() + static_cast<std::ptrdiff_t>(start),
                         net.snapshots().begin() + static_cast<std::ptrdiff_t>(start + tau));
    return out;
}

}  // namespace zgcnet
