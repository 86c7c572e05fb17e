#pragma once

#include <vector>

#include "dygcn/core.hpp"
#include "dygcn/graph.hpp"
#include "dygcn/matrix.hpp"

namespace dygcn {

// Transformation matrices of the incremental update. w0 is shared across all
// orders; wk[k-1] is the order-k matrix. ws is the spectral propagation
// weight and may be left empty for the plain variant.
struct DyGcnParams {
    Matrix w0;
    std::vector<Matrix> wk;
    Matrix ws;
    Activation activation = Activation::tanh_;

    int max_order() const { return static_cast<int>(wk.size()); }
    std::size_t dim() const { return w0.rows(); }

    void validate() const {
        if (wk.empty()) throw contract_error("params: need at least W_1");
        std::size_t d = dim();
        auto square_d = [d](const Matrix& m) { return m.rows() == d && m.cols() == d; };
        if (!square_d(w0)) throw contract_error("params: W_0 must be d x d");
        for (const Matrix& m : wk)
            if (!square_d(m)) throw contract_error("params: W_k must be d x d");
        if (!ws.empty() && !square_d(ws)) throw contract_error("params: W_s must be d x d");
        if (!w0.all_finite() || !ws.all_finite())
            throw numeric_error("params: non-finite entries");
        for (const Matrix& m : wk)
            if (!m.all_finite()) throw numeric_error("params: non-finite entries");
    }
};

// z_v for a node that was isolated at t and gained edges at t+1: the sum of
// its new neighbors' embeddings. Still-isolated nodes stay at zero.
inline std::vector<double> init_new_node(NodeId v, const GraphSnapshot& next,
                                         const Matrix& z_t) {
    next.check_node(v);
    std::vector<double> z(z_t.cols(), 0.0);
    for (NodeId u : next.neighbors(v))
        for (std::size_t j = 0; j < z.size(); ++j) z[j] += z_t(u, j);
    return z;
}

// Z_t with new-node rows replaced by their neighbor-sum initialization. Every
// z^t reference inside a step reads from this matrix.
inline Matrix prepare_step_base(const GraphSnapshot& prev, const GraphSnapshot& next,
                                const Matrix& z_t) {
    Matrix base = z_t;
    for (std::size_t v = 0; v < next.n_slots(); ++v) {
        NodeId id = static_cast<NodeId>(v);
        if (prev.degree(id) == 0 && next.degree(id) > 0) {
            auto z = init_new_node(id, next, z_t);
            auto row = base.row(v);
            for (std::size_t j = 0; j < z.size(); ++j) row[j] = z[j];
        }
    }
    return base;
}

// Change of aggregated message for a first-order node: the neighbor-and-self
// sum at t+1 minus the one at t. Equals sum over gained neighbors minus sum
// over lost neighbors.
inline std::vector<double> first_order_delta_agg(NodeId v, const Matrix& z_t,
                                                 const GraphSnapshot& prev,
                                                 const GraphSnapshot& next) {
    prev.check_node(v);
    std::vector<double> da(z_t.cols(), 0.0);
    for (NodeId u : next.neighbors(v))
        for (std::size_t j = 0; j < da.size(); ++j) da[j] += z_t(u, j);
    for (NodeId u : prev.neighbors(v))
        for (std::size_t j = 0; j < da.size(); ++j) da[j] -= z_t(u, j);
    return da;
}

// sigma(z_v W_0 + delta_a W_1).
inline std::vector<double> first_order_update(std::span<const double> z_v,
                                              std::span<const double> delta_a,
                                              const DyGcnParams& params) {
    params.validate();
    if (z_v.size() != params.dim() || delta_a.size() != params.dim())
        throw contract_error("first_order_update: dimension mismatch");
    std::vector<double> p(params.dim()), q(params.dim());
    row_times_matrix(z_v, params.w0, p);
    row_times_matrix(delta_a, params.wk[0], q);
    for (std::size_t j = 0; j < p.size(); ++j)
        p[j] = activate(params.activation, p[j] + q[j]);
    return p;
}

// Change of aggregated message for a higher-order node: sum of the already
// applied embedding changes over its t+1 neighborhood (and itself).
inline std::vector<double> high_order_delta_agg(NodeId v, const GraphSnapshot& next,
                                                const Matrix& z_t, const Matrix& z_partial) {
    next.check_node(v);
    std::vector<double> da(z_t.cols(), 0.0);
    for (std::size_t j = 0; j < da.size(); ++j) da[j] = z_partial(v, j) - z_t(v, j);
    for (NodeId u : next.neighbors(v))
        for (std::size_t j = 0; j < da.size(); ++j) da[j] += z_partial(u, j) - z_t(u, j);
    return da;
}

// Everything the backward pass needs from one incremental step.
struct StepCache {
    GraphDelta delta;
    InfluenceSets infl;
    std::vector<int> order_of;  // 1-based order per node, 0 if untouched
    Matrix base;                // Z_t with new-node rows initialized
    Matrix delta_agg;           // per updated row
    Matrix pre;                 // pre-activation per updated row
    Matrix out;
};

// Node-wise incremental step over the influence sets; only updated rows are
// written, everything else stays bit-identical to z_t.
inline StepCache dygcn_step_cached(const GraphSnapshot& prev, const GraphSnapshot& next,
                                   const Matrix& z_t, const DyGcnParams& params,
                                   int max_order = 0) {
    params.validate();
    if (z_t.rows() != prev.n_slots() || z_t.cols() != params.dim())
        throw contract_error("dygcn_step: embedding shape mismatch");
    int k_max = max_order > 0 ? max_order : params.max_order();
    if (k_max > params.max_order())
        throw contract_error("dygcn_step: not enough W_k matrices for requested order");

    StepCache c;
    c.delta = compute_delta(prev, next);
    c.infl = influenced_sets(next, c.delta, k_max);
    c.base = prepare_step_base(prev, next, z_t);
    c.out = z_t;
    c.delta_agg = Matrix(z_t.rows(), z_t.cols());
    c.pre = Matrix(z_t.rows(), z_t.cols());
    c.order_of.assign(z_t.rows(), 0);
    for (int k = 1; k <= k_max; ++k)
        for (NodeId v : c.infl.orders[static_cast<std::size_t>(k - 1)])
            c.order_of[v] = k;

    const std::size_t d = params.dim();
    std::vector<double> p(d), q(d);

    // Order 1: delta-scan accumulation of the changed aggregated message.
    for (const Edge& e : c.delta.added) {
        for (std::size_t j = 0; j < d; ++j) c.delta_agg(e.a, j) += c.base(e.b, j);
        for (std::size_t j = 0; j < d; ++j) c.delta_agg(e.b, j) += c.base(e.a, j);
    }
    for (const Edge& e : c.delta.removed) {
        for (std::size_t j = 0; j < d; ++j) c.delta_agg(e.a, j) -= c.base(e.b, j);
        for (std::size_t j = 0; j < d; ++j) c.delta_agg(e.b, j) -= c.base(e.a, j);
    }

    for (int k = 1; k <= k_max; ++k) {
        const auto& layer = c.infl.orders[static_cast<std::size_t>(k - 1)];
        if (k >= 2) {
            // Scatter the order-(k-1) embedding changes to their neighbors in V_k.
            for (NodeId u : c.infl.orders[static_cast<std::size_t>(k - 2)]) {
                for (NodeId w : next.neighbors(u)) {
                    if (c.order_of[w] != k) continue;
                    for (std::size_t j = 0; j < d; ++j)
                        c.delta_agg(w, j) += c.out(u, j) - c.base(u, j);
                }
            }
        }
        const Matrix& w_k = params.wk[static_cast<std::size_t>(k - 1)];
        for (NodeId v : layer) {
            row_times_matrix(c.base.row(v), params.w0, p);
            row_times_matrix(c.delta_agg.row(v), w_k, q);
            auto pre_row = c.pre.row(v);
            auto out_row = c.out.row(v);
            for (std::size_t j = 0; j < d; ++j) {
                pre_row[j] = p[j] + q[j];
                out_row[j] = activate(params.activation, pre_row[j]);
            }
        }
    }
    return c;
}

inline Matrix dygcn_step(const GraphSnapshot& prev, const GraphSnapshot& next,
                         const Matrix& z_t, const DyGcnParams& params, int max_order = 0) {
    return dygcn_step_cached(prev, next, z_t, params, max_order).out;
}

// Matrix-form route: full-matrix dynamic graph convolutions with mask-after-
// multiply row assembly. Cross-checks the node-wise step.
inline Matrix dygcn_step_matrix(const GraphSnapshot& prev, const GraphSnapshot& next,
                                const Matrix& z_t, const DyGcnParams& params,
                                int max_order = 0) {
    params.validate();
    if (z_t.rows() != prev.n_slots() || z_t.cols() != params.dim())
        throw contract_error("dygcn_step_matrix: embedding shape mismatch");
    int k_max = max_order > 0 ? max_order : params.max_order();
    if (k_max > params.max_order())
        throw contract_error("dygcn_step_matrix: not enough W_k matrices");

    GraphDelta delta = compute_delta(prev, next);
    InfluenceSets infl = influenced_sets(next, delta, k_max);
    Matrix base = prepare_step_base(prev, next, z_t);
    Matrix zw0 = matmul(base, params.w0);

    // Delta-adjacency times base; A-hat = A + I implies delta-A-hat = delta-A.
    Matrix dz(base.rows(), base.cols());
    for (const Edge& e : delta.added) {
        for (std::size_t j = 0; j < base.cols(); ++j) dz(e.a, j) += base(e.b, j);
        for (std::size_t j = 0; j < base.cols(); ++j) dz(e.b, j) += base(e.a, j);
    }
    for (const Edge& e : delta.removed) {
        for (std::size_t j = 0; j < base.cols(); ++j) dz(e.a, j) -= base(e.b, j);
        for (std::size_t j = 0; j < base.cols(); ++j) dz(e.b, j) -= base(e.a, j);
    }

    Matrix assembled = z_t;      // Z^{t+1}_{k} built layer by layer
    Matrix prev_assembled = z_t; // Z^{t+1}_{k-1}
    for (int k = 1; k <= k_max; ++k) {
        Matrix candidate;
        if (k == 1) {
            candidate = apply_activation(params.activation, matmul(dz, params.wk[0]) + zw0);
        } else {
            Matrix delta_z = assembled - prev_assembled;
            // A-hat^{t+1} * delta_z, including the self term.
            Matrix agg = delta_z;
            for (std::size_t v = 0; v < next.n_slots(); ++v)
                for (NodeId u : next.neighbors(static_cast<NodeId>(v)))
                    for (std::size_t j = 0; j < agg.cols(); ++j) agg(v, j) += delta_z(u, j);
            candidate = apply_activation(
                params.activation,
                matmul(agg, params.wk[static_cast<std::size_t>(k - 1)]) + zw0);
        }
        prev_assembled = assembled;
        for (NodeId v : infl.orders[static_cast<std::size_t>(k - 1)]) {
            auto dst = assembled.row(v);
            auto src = candidate.row(v);
            for (std::size_t j = 0; j < assembled.cols(); ++j) dst[j] = src[j];
        }
    }
    return assembled;
}

// Gradients of a scalar objective with respect to the step's parameters,
// given d(objective)/d(output rows). z_t is treated as a constant.
struct StepGradients {
    Matrix w0;
    std::vector<Matrix> wk;
    Matrix ws;
};

inline StepGradients dygcn_step_backward(const GraphSnapshot& next, const DyGcnParams& params,
                                         const StepCache& cache, const Matrix& grad_out) {
    const std::size_t d = params.dim();
    StepGradients g;
    g.w0 = Matrix(d, d);
    g.wk.assign(params.wk.size(), Matrix(d, d));

    Matrix gacc = grad_out;  // accumulates contributions flowing down the orders
    std::vector<double> gp(d), gda(d);
    int k_max = 0;
    for (int o : cache.order_of) k_max = std::max(k_max, o);

    for (int k = k_max; k >= 1; --k) {
        const Matrix& w_k = params.wk[static_cast<std::size_t>(k - 1)];
        for (NodeId v : cache.infl.orders[static_cast<std::size_t>(k - 1)]) {
            auto pre_row = cache.pre.row(v);
            for (std::size_t j = 0; j < d; ++j)
                gp[j] = gacc(v, j) * activate_deriv(params.activation, pre_row[j]);
            add_outer(g.w0, cache.base.row(v), gp);
            add_outer(g.wk[static_cast<std::size_t>(k - 1)], cache.delta_agg.row(v), gp);
            if (k >= 2) {
                // delta_agg depends on the outputs of lower-order neighbors.
                for (std::size_t i = 0; i < d; ++i) gda[i] = dot(w_k.row(i), gp);
                for (NodeId u : next.neighbors(v)) {
                    if (cache.order_of[u] == 0 || cache.order_of[u] >= k) continue;
                    for (std::size_t j = 0; j < d; ++j) gacc(u, j) += gda[j];
                }
            }
        }
    }
    return g;
}

}  // namespace dygcn
