#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "dygcn/core.hpp"
#include "dygcn/graph.hpp"
#include "dygcn/rng.hpp"

namespace dygcn {

// Dynamic stochastic block model: a planted-community initial snapshot plus a
// fixed add/remove edge churn per step that preserves expected density and
// community structure.
struct SbmConfig {
    std::size_t n_nodes = 500;
    int communities = 2;
    double intra_prob = 0.05;
    double inter_prob = 0.005;
    std::size_t churn_add = 20;
    std::size_t churn_remove = 20;
    std::size_t steps = 20;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_nodes < 2) throw input_error("sbm: need at least 2 nodes");
        if (communities < 1) throw input_error("sbm: need at least 1 community");
        if (static_cast<std::size_t>(communities) > n_nodes)
            throw input_error("sbm: more communities than nodes");
        if (intra_prob < 0 || intra_prob > 1 || inter_prob < 0 || inter_prob > 1)
            throw input_error("sbm: probabilities must be in [0,1]");
        if (steps < 1) throw input_error("sbm: need at least 1 step");
    }
};

struct SbmWorkload {
    std::vector<GraphSnapshot> snapshots;
    std::vector<int> labels;  // community per node
};

namespace detail {

inline int community_of(std::size_t v, std::size_t n, int c) {
    return static_cast<int>(v * static_cast<std::size_t>(c) / n);
}

// Community-biased random pair: intra with probability proportional to the
// expected intra edge mass.
inline Edge sample_pair(const SbmConfig& cfg, const std::vector<std::vector<NodeId>>& blocks,
                        double intra_weight, Rng& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_block(0, blocks.size() - 1);
    for (;;) {
        if (u01(rng) < intra_weight) {
            const auto& b = blocks[pick_block(rng)];
            if (b.size() < 2) continue;
            std::uniform_int_distribution<std::size_t> pick(0, b.size() - 1);
            std::size_t i = pick(rng), j = pick(rng);
            if (i == j) continue;
            return Edge(b[i], b[j]);
        }
        std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(cfg.n_nodes - 1));
        NodeId u = pick(rng), v = pick(rng);
        if (u == v) continue;
        if (community_of(u, cfg.n_nodes, cfg.communities) ==
            community_of(v, cfg.n_nodes, cfg.communities))
            continue;
        return Edge(u, v);
    }
}

}  // namespace detail

inline SbmWorkload generate_sbm(const SbmConfig& cfg) {
    cfg.validate();
    Rng rng = make_rng(cfg.seed, 21);

    std::vector<std::vector<NodeId>> blocks(static_cast<std::size_t>(cfg.communities));
    SbmWorkload w;
    w.labels.reserve(cfg.n_nodes);
    for (std::size_t v = 0; v < cfg.n_nodes; ++v) {
        int c = detail::community_of(v, cfg.n_nodes, cfg.communities);
        w.labels.push_back(c);
        blocks[static_cast<std::size_t>(c)].push_back(static_cast<NodeId>(v));
    }

    double intra_pairs = 0.0;
    for (const auto& b : blocks)
        intra_pairs += 0.5 * static_cast<double>(b.size()) * static_cast<double>(b.size() - 1);
    double all_pairs = 0.5 * static_cast<double>(cfg.n_nodes) *
                       static_cast<double>(cfg.n_nodes - 1);
    double inter_pairs = all_pairs - intra_pairs;
    double intra_mass = cfg.intra_prob * intra_pairs;
    double inter_mass = cfg.inter_prob * inter_pairs;
    if (intra_mass + inter_mass <= 0.0) throw input_error("sbm: zero expected edge count");
    double intra_weight = intra_mass / (intra_mass + inter_mass);

    std::size_t target_edges =
        static_cast<std::size_t>(intra_mass + inter_mass + 0.5);
    if (target_edges == 0) throw input_error("sbm: zero expected edge count");
    if (cfg.churn_remove > target_edges)
        throw input_error("sbm: churn_remove exceeds expected edge count");

    std::set<Edge> edges;
    std::size_t attempts = 0;
    while (edges.size() < target_edges) {
        edges.insert(detail::sample_pair(cfg, blocks, intra_weight, rng));
        if (++attempts > 100 * target_edges + 1000)
            throw input_error("sbm: cannot place requested edge count");
    }
    w.snapshots.emplace_back(cfg.n_nodes, EdgeList(edges.begin(), edges.end()), 0);

    std::uniform_int_distribution<std::size_t> u(0, ~std::size_t(0));
    for (std::size_t t = 1; t < cfg.steps; ++t) {
        if (cfg.churn_remove >= edges.size())
            throw input_error("sbm: churn exceeds available edges at step " +
                              std::to_string(t));
        GraphDelta delta;
        delta.from_time = static_cast<int>(t - 1);
        delta.to_time = static_cast<int>(t);
        for (std::size_t i = 0; i < cfg.churn_remove; ++i) {
            auto it = edges.begin();
            std::advance(it, u(rng) % edges.size());
            delta.removed.push_back(*it);
            edges.erase(it);
        }
        std::size_t added = 0;
        attempts = 0;
        while (added < cfg.churn_add) {
            Edge e = detail::sample_pair(cfg, blocks, intra_weight, rng);
            if (++attempts > 100 * (cfg.churn_add + 1) + 1000)
                throw input_error("sbm: cannot place churn edges at step " +
                                  std::to_string(t));
            if (edges.count(e)) continue;
            // an edge removed and re-added in the same step would violate the
            // delta invariants; skip it
            bool clashes = false;
            for (const Edge& r : delta.removed)
                if (r == e) clashes = true;
            if (clashes) continue;
            edges.insert(e);
            delta.added.push_back(e);
            ++added;
        }
        sort_unique(delta.added);
        sort_unique(delta.removed);
        w.snapshots.emplace_back(cfg.n_nodes, EdgeList(edges.begin(), edges.end()),
                                 static_cast<int>(t));
    }
    return w;
}

}  // namespace dygcn
