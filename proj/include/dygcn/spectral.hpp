#pragma once

#include <cmath>
#include <vector>

#include "dygcn/core.hpp"
#include "dygcn/dygcn.hpp"
#include "dygcn/graph.hpp"
#include "dygcn/matrix.hpp"

namespace dygcn {

inline std::vector<double> inv_sqrt_degrees(const GraphSnapshot& snap) {
    std::vector<double> s(snap.n_slots(), 0.0);
    for (std::size_t v = 0; v < snap.n_slots(); ++v) {
        std::size_t deg = snap.degree(static_cast<NodeId>(v));
        s[v] = deg == 0 ? 0.0 : 1.0 / std::sqrt(static_cast<double>(deg));
    }
    return s;
}

// L = I - D^{-1/2} A D^{-1/2}, dense. Degrees come from A without self-loops;
// a zero-degree node keeps the plain identity row.
inline Matrix normalized_laplacian(const GraphSnapshot& snap) {
    Matrix l = Matrix::identity(snap.n_slots());
    auto s = inv_sqrt_degrees(snap);
    for (const Edge& e : snap.edges()) {
        double w = s[e.a] * s[e.b];
        l(e.a, e.b) = -w;
        l(e.b, e.a) = -w;
    }
    return l;
}

// (I + D^{-1/2} A D^{-1/2}) * Z through the adjacency lists.
inline Matrix spectral_operator_apply(const GraphSnapshot& snap, const Matrix& z) {
    if (z.rows() != snap.n_slots())
        throw contract_error("spectral_operator_apply: row mismatch");
    auto s = inv_sqrt_degrees(snap);
    Matrix out = z;
    for (std::size_t v = 0; v < snap.n_slots(); ++v) {
        auto row = out.row(v);
        for (NodeId u : snap.neighbors(static_cast<NodeId>(v))) {
            double w = s[v] * s[u];
            for (std::size_t j = 0; j < z.cols(); ++j) row[j] += w * z(u, j);
        }
    }
    return out;
}

// One global propagation: (I + D^{-1/2} A D^{-1/2}) Z W_s, no activation.
// Dangling rows reduce to z_v W_s.
inline Matrix spectral_propagate(const GraphSnapshot& snap, const Matrix& z,
                                 const Matrix& w_s) {
    if (z.cols() != w_s.rows())
        throw contract_error("spectral_propagate: embedding/weight dimension mismatch");
    return matmul(spectral_operator_apply(snap, z), w_s);
}

struct SpectralStepCache {
    StepCache first_order;  // order-1 update only
    Matrix propagated;      // (I + D^{-1/2} A D^{-1/2}) Z_1
    Matrix out;
};

// First-order update on V_1, then one global propagation over snapshot t+1.
// Every row may change.
inline SpectralStepCache spectral_dygcn_step_cached(const GraphSnapshot& prev,
                                                    const GraphSnapshot& next,
                                                    const Matrix& z_t,
                                                    const DyGcnParams& params) {
    params.validate();
    if (params.ws.empty())
        throw contract_error("spectral_dygcn_step: W_s is not set");
    SpectralStepCache c;
    c.first_order = dygcn_step_cached(prev, next, z_t, params, /*max_order=*/1);
    c.propagated = spectral_operator_apply(next, c.first_order.out);
    c.out = matmul(c.propagated, params.ws);
    return c;
}

inline Matrix spectral_dygcn_step(const GraphSnapshot& prev, const GraphSnapshot& next,
                                  const Matrix& z_t, const DyGcnParams& params) {
    return spectral_dygcn_step_cached(prev, next, z_t, params).out;
}

// Backward through propagation and the first-order update. The propagation
// operator is symmetric, so its adjoint is itself.
inline StepGradients spectral_step_backward(const GraphSnapshot& next,
                                            const DyGcnParams& params,
                                            const SpectralStepCache& cache,
                                            const Matrix& grad_out) {
    Matrix grad_z1 = spectral_operator_apply(next, matmul(grad_out, transpose(params.ws)));
    StepGradients g = dygcn_step_backward(next, params, cache.first_order, grad_z1);
    g.ws = matmul(transpose(cache.propagated), grad_out);
    return g;
}

}  // namespace dygcn
