#pragma once

#include <vector>

#include "dygcn/core.hpp"
#include "dygcn/graph.hpp"
#include "dygcn/matrix.hpp"

namespace dygcn {

struct GcnLayerParams {
    Matrix weight;  // in_dim x out_dim
    Activation activation = Activation::identity;
};

// A-hat = A + I as a dense matrix. Intended for inspection and tests; the
// forward pass aggregates through the CSR lists instead.
inline Matrix normalize_adjacency(const GraphSnapshot& snap) {
    Matrix a = Matrix::identity(snap.n_slots());
    for (const Edge& e : snap.edges()) {
        a(e.a, e.b) = 1.0;
        a(e.b, e.a) = 1.0;
    }
    return a;
}

// a_v = sum of z_u over N(v) and v itself. Summation order is fixed: self
// first, then neighbors ascending.
inline std::vector<double> aggregate_node(NodeId v, const GraphSnapshot& snap,
                                          const Matrix& z) {
    snap.check_node(v);
    std::vector<double> a(z.row(v).begin(), z.row(v).end());
    for (NodeId u : snap.neighbors(v))
        for (std::size_t j = 0; j < z.cols(); ++j) a[j] += z(u, j);
    return a;
}

// (A + I) * Z through the adjacency lists.
inline Matrix aggregate_all(const GraphSnapshot& snap, const Matrix& z) {
    if (z.rows() != snap.n_slots()) throw contract_error("aggregate_all: row mismatch");
    Matrix out(z.rows(), z.cols());
    for (std::size_t v = 0; v < snap.n_slots(); ++v) {
        auto row = out.row(v);
        auto self = z.row(v);
        for (std::size_t j = 0; j < z.cols(); ++j) row[j] = self[j];
        for (NodeId u : snap.neighbors(static_cast<NodeId>(v)))
            for (std::size_t j = 0; j < z.cols(); ++j) row[j] += z(u, j);
    }
    return out;
}

// One graph convolution layer: sigma((A + I) Z W).
inline Matrix gconv(const GraphSnapshot& snap, const Matrix& z, const GcnLayerParams& layer) {
    if (z.cols() != layer.weight.rows())
        throw contract_error("gconv: embedding/weight dimension mismatch");
    return apply_activation(layer.activation, matmul(aggregate_all(snap, z), layer.weight));
}

inline Matrix gcn_forward(const GraphSnapshot& snap, const Matrix& x,
                          const std::vector<GcnLayerParams>& layers) {
    if (layers.empty()) throw contract_error("gcn_forward: empty layer list");
    Matrix z = x;
    for (const GcnLayerParams& layer : layers) z = gconv(snap, z, layer);
    return z;
}

}  // namespace dygcn
