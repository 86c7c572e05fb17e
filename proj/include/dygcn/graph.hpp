#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dygcn/core.hpp"
#include "dygcn/matrix.hpp"

namespace dygcn {

using NodeId = std::uint32_t;

// Unordered node pair, stored with first < second.
struct Edge {
    NodeId a, b;
    Edge() = default;
    Edge(NodeId u, NodeId v) : a(std::min(u, v)), b(std::max(u, v)) {
        if (u == v) throw contract_error("self-loop edge");
    }
    auto operator<=>(const Edge&) const = default;
};

using EdgeList = std::vector<Edge>;  // kept sorted and unique

inline void sort_unique(EdgeList& edges) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

// Undirected sparse adjacency over a fixed universe of node slots at one
// time index. Immutable after construction; zero-degree slots are valid
// dangling nodes. Neighbor lists are CSR with sorted neighbors.
class GraphSnapshot {
  public:
    GraphSnapshot(std::size_t n_slots, EdgeList edges, int time_index)
        : n_slots_(n_slots), time_index_(time_index), edges_(std::move(edges)) {
        if (time_index < 0) throw contract_error("negative time index");
        sort_unique(edges_);
        for (const Edge& e : edges_)
            if (e.b >= n_slots_) throw contract_error("edge endpoint out of slot range");
        build_csr();
    }

    std::size_t n_slots() const { return n_slots_; }
    int time_index() const { return time_index_; }
    const EdgeList& edges() const { return edges_; }
    std::size_t n_edges() const { return edges_.size(); }

    std::span<const NodeId> neighbors(NodeId v) const {
        check_node(v);
        return {adj_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }

    std::size_t degree(NodeId v) const {
        check_node(v);
        return offsets_[v + 1] - offsets_[v];
    }

    bool has_edge(NodeId u, NodeId v) const {
        if (u == v) return false;
        auto nb = neighbors(u);
        return std::binary_search(nb.begin(), nb.end(), v);
    }

    void check_node(NodeId v) const {
        if (v >= n_slots_) throw contract_error("node id out of range");
    }

  private:
    void build_csr() {
        offsets_.assign(n_slots_ + 1, 0);
        for (const Edge& e : edges_) {
            ++offsets_[e.a + 1];
            ++offsets_[e.b + 1];
        }
        for (std::size_t i = 0; i < n_slots_; ++i) offsets_[i + 1] += offsets_[i];
        adj_.resize(2 * edges_.size());
        std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
        for (const Edge& e : edges_) {
            adj_[cursor[e.a]++] = e.b;
            adj_[cursor[e.b]++] = e.a;
        }
        // edges_ is sorted, so each per-node list comes out sorted for the
        // low endpoint; sort explicitly to cover the high endpoint's list.
        for (std::size_t v = 0; v < n_slots_; ++v)
            std::sort(adj_.begin() + offsets_[v], adj_.begin() + offsets_[v + 1]);
    }

    std::size_t n_slots_;
    int time_index_;
    EdgeList edges_;
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> adj_;
};

// Edge changes between consecutive snapshots.
struct GraphDelta {
    EdgeList added;
    EdgeList removed;
    int from_time = 0;
    int to_time = 1;

    bool empty() const { return added.empty() && removed.empty(); }
};

// The partition V_1 .. V_K of nodes touched by a delta, each node at its
// lowest qualifying order.
struct InfluenceSets {
    std::vector<std::vector<NodeId>> orders;  // orders[k-1] = V_k, sorted

    std::size_t total() const {
        std::size_t n = 0;
        for (const auto& s : orders) n += s.size();
        return n;
    }
};

inline GraphDelta compute_delta(const GraphSnapshot& prev, const GraphSnapshot& next) {
    if (prev.n_slots() != next.n_slots())
        throw contract_error("compute_delta: slot-count mismatch");
    if (next.time_index() != prev.time_index() + 1)
        throw contract_error("compute_delta: snapshots are not consecutive");
    GraphDelta d;
    d.from_time = prev.time_index();
    d.to_time = next.time_index();
    std::set_difference(next.edges().begin(), next.edges().end(), prev.edges().begin(),
                        prev.edges().end(), std::back_inserter(d.added));
    std::set_difference(prev.edges().begin(), prev.edges().end(), next.edges().begin(),
                        next.edges().end(), std::back_inserter(d.removed));
    return d;
}

inline GraphSnapshot apply_delta(const GraphSnapshot& prev, const GraphDelta& delta) {
    if (delta.from_time != prev.time_index())
        throw contract_error("apply_delta: delta does not start at this snapshot");
    for (const Edge& e : delta.removed)
        if (!prev.has_edge(e.a, e.b))
            throw contract_error("apply_delta: removing a non-existent edge");
    for (const Edge& e : delta.added)
        if (prev.has_edge(e.a, e.b))
            throw contract_error("apply_delta: adding an existing edge");
    EdgeList kept;
    kept.reserve(prev.n_edges() + delta.added.size());
    std::set_difference(prev.edges().begin(), prev.edges().end(), delta.removed.begin(),
                        delta.removed.end(), std::back_inserter(kept));
    kept.insert(kept.end(), delta.added.begin(), delta.added.end());
    return GraphSnapshot(prev.n_slots(), std::move(kept), delta.to_time);
}

// Layered BFS frontier from the delta endpoints over the post-change graph:
// V_1 = endpoints of changed edges, V_k = fresh neighbors of V_{k-1}.
inline InfluenceSets influenced_sets(const GraphSnapshot& next, const GraphDelta& delta,
                                     int max_order) {
    if (max_order < 1) throw contract_error("influenced_sets: max_order must be >= 1");
    InfluenceSets out;
    out.orders.resize(static_cast<std::size_t>(max_order));

    std::vector<NodeId>& v1 = out.orders[0];
    for (const Edge& e : delta.added) {
        v1.push_back(e.a);
        v1.push_back(e.b);
    }
    for (const Edge& e : delta.removed) {
        v1.push_back(e.a);
        v1.push_back(e.b);
    }
    std::sort(v1.begin(), v1.end());
    v1.erase(std::unique(v1.begin(), v1.end()), v1.end());

    std::vector<char> seen(next.n_slots(), 0);
    for (NodeId v : v1) seen[v] = 1;

    for (int k = 2; k <= max_order; ++k) {
        const auto& frontier = out.orders[static_cast<std::size_t>(k - 2)];
        auto& layer = out.orders[static_cast<std::size_t>(k - 1)];
        for (NodeId v : frontier)
            for (NodeId u : next.neighbors(v))
                if (!seen[u]) {
                    seen[u] = 1;
                    layer.push_back(u);
                }
        std::sort(layer.begin(), layer.end());
    }
    return out;
}

// Default node features: the degree, one column.
inline Matrix degree_features(const GraphSnapshot& snap) {
    Matrix x(snap.n_slots(), 1);
    for (std::size_t v = 0; v < snap.n_slots(); ++v)
        x(v, 0) = static_cast<double>(snap.degree(static_cast<NodeId>(v)));
    return x;
}

}  // namespace dygcn
