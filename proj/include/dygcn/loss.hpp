#pragma once

#include <cmath>
#include <vector>

#include "dygcn/core.hpp"
#include "dygcn/graph.hpp"
#include "dygcn/matrix.hpp"
#include "dygcn/rng.hpp"

namespace dygcn {

// Positive pairs are enumerated directed: for each v ascending, each
// u in N(v) ascending. Negatives are stored flat, Q per pair, in that order.
struct NegativeSamples {
    int q = 1;
    std::vector<NodeId> nodes;
};

inline std::size_t count_directed_pairs(const GraphSnapshot& snap) {
    return 2 * snap.n_edges();
}

// One uniform negative per positive pair per Q, over all slots except v.
inline NegativeSamples sample_negatives(const GraphSnapshot& snap, int q, Rng& rng) {
    if (q < 1) throw contract_error("sample_negatives: Q must be >= 1");
    if (snap.n_slots() < 2) throw contract_error("sample_negatives: need at least 2 slots");
    NegativeSamples ns;
    ns.q = q;
    ns.nodes.reserve(count_directed_pairs(snap) * static_cast<std::size_t>(q));
    std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(snap.n_slots() - 1));
    for (std::size_t v = 0; v < snap.n_slots(); ++v) {
        for ([[maybe_unused]] NodeId u : snap.neighbors(static_cast<NodeId>(v))) {
            for (int i = 0; i < q; ++i) {
                NodeId neg = pick(rng);
                while (neg == v) neg = pick(rng);
                ns.nodes.push_back(neg);
            }
        }
    }
    return ns;
}

inline double clamped_dot(std::span<const double> a, std::span<const double> b) {
    double s = dot(a, b);
    if (s > 30.0) return 30.0;
    if (s < -30.0) return -30.0;
    return s;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Structure-preserving negative-sampling loss:
//   L = -sum_v sum_{u in N(v)} [ log sig(z_v.z_u)
//                                + sum_q log(1 - sig(z_v.z_neg)) ]
inline double unsupervised_loss(const Matrix& z, const GraphSnapshot& snap,
                                const NegativeSamples& negatives) {
    if (!z.all_finite()) throw numeric_error("unsupervised_loss: non-finite embeddings");
    if (negatives.nodes.size() !=
        count_directed_pairs(snap) * static_cast<std::size_t>(negatives.q))
        throw contract_error("unsupervised_loss: negative sample count mismatch");
    double loss = 0.0;
    std::size_t idx = 0;
    for (std::size_t v = 0; v < snap.n_slots(); ++v) {
        auto zv = z.row(v);
        for (NodeId u : snap.neighbors(static_cast<NodeId>(v))) {
            loss -= std::log(sigmoid(clamped_dot(zv, z.row(u))));
            for (int i = 0; i < negatives.q; ++i) {
                NodeId neg = negatives.nodes[idx++];
                loss -= std::log(1.0 - sigmoid(clamped_dot(zv, z.row(neg))));
            }
        }
    }
    return loss;
}

// dL/dZ for the loss above. The clamp is treated as a hard cutoff: zero
// gradient outside [-30, 30].
inline Matrix unsupervised_loss_grad(const Matrix& z, const GraphSnapshot& snap,
                                     const NegativeSamples& negatives) {
    Matrix g(z.rows(), z.cols());
    std::size_t idx = 0;
    for (std::size_t v = 0; v < snap.n_slots(); ++v) {
        auto zv = z.row(v);
        auto gv = g.row(v);
        for (NodeId u : snap.neighbors(static_cast<NodeId>(v))) {
            double s = dot(zv, z.row(u));
            if (std::abs(s) <= 30.0) {
                double coef = -(1.0 - sigmoid(s));
                auto zu = z.row(u);
                auto gu = g.row(u);
                for (std::size_t j = 0; j < z.cols(); ++j) {
                    gv[j] += coef * zu[j];
                    gu[j] += coef * zv[j];
                }
            }
            for (int i = 0; i < negatives.q; ++i) {
                NodeId neg = negatives.nodes[idx++];
                double sn = dot(zv, z.row(neg));
                if (std::abs(sn) <= 30.0) {
                    double coef = sigmoid(sn);
                    auto zn = z.row(neg);
                    auto gn = g.row(neg);
                    for (std::size_t j = 0; j < z.cols(); ++j) {
                        gv[j] += coef * zn[j];
                        gn[j] += coef * zv[j];
                    }
                }
            }
        }
    }
    return g;
}

}  // namespace dygcn
