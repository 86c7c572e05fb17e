#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dygcn/core.hpp"
#include "dygcn/dygcn.hpp"
#include "dygcn/gcn.hpp"
#include "dygcn/graph.hpp"
#include "dygcn/loss.hpp"
#include "dygcn/matrix.hpp"
#include "dygcn/rng.hpp"
#include "dygcn/spectral.hpp"

namespace dygcn {

enum class Variant { dygcn, spectral };

inline Variant variant_from_string(const std::string& s) {
    if (s == "dygcn") return Variant::dygcn;
    if (s == "spectral") return Variant::spectral;
    throw input_error("unknown variant: " + s);
}

inline const char* to_string(Variant v) {
    return v == Variant::dygcn ? "dygcn" : "spectral";
}

enum class Optimizer { sgd, adam };

inline Optimizer optimizer_from_string(const std::string& s) {
    if (s == "sgd") return Optimizer::sgd;
    if (s == "adam") return Optimizer::adam;
    throw input_error("unknown optimizer: " + s);
}

struct TrainConfig {
    double learning_rate = 1e-3;
    int epochs = 50;
    int negatives_per_positive = 1;
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::adam;
    std::size_t base_dim = 32;
    int max_order = 2;
    Variant variant = Variant::dygcn;
    bool grad_check = false;

    void validate() const {
        if (learning_rate < 0.0) throw input_error("learning_rate must be non-negative");
        if (negatives_per_positive < 1) throw input_error("negatives_per_positive must be >= 1");
        if (epochs < 0) throw input_error("epochs must be non-negative");
        if (base_dim < 1) throw input_error("base_dim must be >= 1");
        if (max_order < 1) throw input_error("max_order must be >= 1");
    }
};

struct LossReport {
    std::vector<double> gcn_per_epoch_loss;
    std::vector<double> per_epoch_loss;
    double final_grad_norm = 0.0;
};

struct TrainResult {
    DyGcnParams params;
    std::vector<GcnLayerParams> gcn_layers;
    LossReport report;
};

// Symmetric fan-based uniform init: [-sqrt(6/(fan_in+fan_out)), +...].
inline Matrix init_weight(std::size_t rows, std::size_t cols, Rng& rng) {
    double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-bound, bound);
    Matrix m(rows, cols);
    for (double& x : m.data()) x = u(rng);
    return m;
}

inline DyGcnParams init_params(std::size_t d, int max_order, Variant variant,
                               Activation act, Rng& rng) {
    DyGcnParams p;
    p.activation = act;
    p.w0 = init_weight(d, d, rng);
    for (int k = 0; k < max_order; ++k) p.wk.push_back(init_weight(d, d, rng));
    if (variant == Variant::spectral) p.ws = init_weight(d, d, rng);
    return p;
}

class AdamState {
  public:
    void step(Matrix& param, const Matrix& grad, double lr) {
        if (m_.empty()) {
            m_ = Matrix(param.rows(), param.cols());
            v_ = Matrix(param.rows(), param.cols());
        }
        ++t_;
        double bc1 = 1.0 - std::pow(beta1_, t_);
        double bc2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t i = 0; i < param.data().size(); ++i) {
            double g = grad.data()[i];
            double& m = m_.data()[i];
            double& v = v_.data()[i];
            m = beta1_ * m + (1.0 - beta1_) * g;
            v = beta2_ * v + (1.0 - beta2_) * g * g;
            param.data()[i] -= lr * (m / bc1) / (std::sqrt(v / bc2) + eps_);
        }
    }

  private:
    Matrix m_, v_;
    long t_ = 0;
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
};

// One optimizer slot per parameter matrix.
class ParamOptimizer {
  public:
    ParamOptimizer(Optimizer kind, double lr, std::size_t n_slots)
        : kind_(kind), lr_(lr), adam_(n_slots) {}

    void step(std::size_t slot, Matrix& param, const Matrix& grad) {
        if (kind_ == Optimizer::sgd) {
            for (std::size_t i = 0; i < param.data().size(); ++i)
                param.data()[i] -= lr_ * grad.data()[i];
        } else {
            adam_[slot].step(param, grad, lr_);
        }
    }

  private:
    Optimizer kind_;
    double lr_;
    std::vector<AdamState> adam_;
};

// ---- static GCN training (produces Z^0 and the per-step starting points) ----

struct GcnForwardCache {
    std::vector<Matrix> inputs;  // input of each layer
    std::vector<Matrix> aggs;    // (A+I) * input per layer
    std::vector<Matrix> pres;    // pre-activation per layer
    Matrix out;
};

inline GcnForwardCache gcn_forward_cached(const GraphSnapshot& snap, const Matrix& x,
                                          const std::vector<GcnLayerParams>& layers) {
    if (layers.empty()) throw contract_error("gcn_forward: empty layer list");
    GcnForwardCache c;
    Matrix z = x;
    for (const GcnLayerParams& layer : layers) {
        c.inputs.push_back(z);
        Matrix agg = aggregate_all(snap, z);
        Matrix pre = matmul(agg, layer.weight);
        z = apply_activation(layer.activation, pre);
        c.aggs.push_back(std::move(agg));
        c.pres.push_back(std::move(pre));
    }
    c.out = z;
    return c;
}

inline std::vector<Matrix> gcn_backward(const GraphSnapshot& snap,
                                        const std::vector<GcnLayerParams>& layers,
                                        const GcnForwardCache& cache, Matrix grad_out) {
    std::vector<Matrix> grads(layers.size());
    Matrix g = std::move(grad_out);
    for (std::size_t l = layers.size(); l-- > 0;) {
        const Matrix& pre = cache.pres[l];
        for (std::size_t i = 0; i < g.data().size(); ++i)
            g.data()[i] *= activate_deriv(layers[l].activation, pre.data()[i]);
        grads[l] = matmul(transpose(cache.aggs[l]), g);
        if (l > 0) g = aggregate_all(snap, matmul(g, transpose(layers[l].weight)));
    }
    return grads;
}

// ---- gradients of the loss through one incremental step ----

struct StepLossResult {
    double loss = 0.0;
    StepGradients grads;
    Matrix z_next;
};

// Forward the chosen variant from z_t, score the result against snapshot t+1
// with the negative-sampling loss, and backpropagate into the W matrices.
inline StepLossResult step_loss_and_gradients(const GraphSnapshot& prev,
                                              const GraphSnapshot& next, const Matrix& z_t,
                                              const DyGcnParams& params,
                                              const NegativeSamples& negatives,
                                              Variant variant) {
    StepLossResult r;
    if (variant == Variant::dygcn) {
        StepCache cache = dygcn_step_cached(prev, next, z_t, params);
        r.loss = unsupervised_loss(cache.out, next, negatives);
        Matrix g = unsupervised_loss_grad(cache.out, next, negatives);
        r.grads = dygcn_step_backward(next, params, cache, g);
        r.z_next = std::move(cache.out);
    } else {
        SpectralStepCache cache = spectral_dygcn_step_cached(prev, next, z_t, params);
        r.loss = unsupervised_loss(cache.out, next, negatives);
        Matrix g = unsupervised_loss_grad(cache.out, next, negatives);
        r.grads = spectral_step_backward(next, params, cache, g);
        r.z_next = std::move(cache.out);
    }
    return r;
}

// Central finite-difference check of the analytic step gradients. Returns the
// largest relative error over all parameter entries.
inline double gradient_check(const GraphSnapshot& prev, const GraphSnapshot& next,
                             const Matrix& z_t, DyGcnParams params,
                             const NegativeSamples& negatives, Variant variant,
                             double h = 1e-5) {
    StepLossResult r = step_loss_and_gradients(prev, next, z_t, params, negatives, variant);

    auto loss_at = [&]() {
        Matrix z = variant == Variant::dygcn ? dygcn_step(prev, next, z_t, params)
                                             : spectral_dygcn_step(prev, next, z_t, params);
        return unsupervised_loss(z, next, negatives);
    };

    double worst = 0.0;
    auto check_matrix = [&](Matrix& w, const Matrix& g) {
        for (std::size_t i = 0; i < w.data().size(); ++i) {
            double saved = w.data()[i];
            w.data()[i] = saved + h;
            double lp = loss_at();
            w.data()[i] = saved - h;
            double lm = loss_at();
            w.data()[i] = saved;
            double fd = (lp - lm) / (2.0 * h);
            double rel = std::abs(g.data()[i] - fd) / (std::abs(fd) + 1e-8);
            worst = std::max(worst, rel);
        }
    };
    check_matrix(params.w0, r.grads.w0);
    for (std::size_t k = 0; k < params.wk.size(); ++k)
        check_matrix(params.wk[k], r.grads.wk[k]);
    if (variant == Variant::spectral) check_matrix(params.ws, r.grads.ws);
    return worst;
}

// ---- full training ----

inline std::size_t training_snapshot_count(std::size_t total) {
    if (total < 2) throw contract_error("train: need at least 2 snapshots");
    return std::max<std::size_t>(2, total / 2);
}

inline std::vector<GcnLayerParams> make_gcn_layers(std::size_t in_dim, std::size_t d,
                                                   Rng& rng) {
    std::vector<GcnLayerParams> layers(2);
    layers[0].weight = init_weight(in_dim, d, rng);
    layers[0].activation = Activation::relu;
    layers[1].weight = init_weight(d, d, rng);
    layers[1].activation = Activation::identity;
    return layers;
}

inline std::size_t params_slot_count(const DyGcnParams& p) {
    return p.wk.size() + (p.ws.empty() ? 0 : 1);
}

// Trains the static 2-layer GCN on snapshot 0, then the incremental-step
// matrices over every consecutive training pair. Deterministic given the seed.
inline TrainResult train(const std::vector<GraphSnapshot>& sequence, const Matrix& x,
                         const TrainConfig& config) {
    config.validate();
    std::size_t n_train = training_snapshot_count(sequence.size());

    TrainResult result;
    Rng init_rng = make_rng(config.seed, 1);
    Rng gcn_neg_rng = make_rng(config.seed, 2);
    Rng step_neg_rng = make_rng(config.seed, 3);

    // Phase 1: static GCN on snapshot 0.
    result.gcn_layers = make_gcn_layers(x.cols(), config.base_dim, init_rng);
    {
        ParamOptimizer opt(config.optimizer, config.learning_rate, result.gcn_layers.size());
        const GraphSnapshot& snap0 = sequence.front();
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            NegativeSamples negs =
                sample_negatives(snap0, config.negatives_per_positive, gcn_neg_rng);
            GcnForwardCache cache = gcn_forward_cached(snap0, x, result.gcn_layers);
            double loss = unsupervised_loss(cache.out, snap0, negs);
            if (!std::isfinite(loss))
                throw numeric_error("GCN training diverged at epoch " + std::to_string(epoch));
            result.report.gcn_per_epoch_loss.push_back(loss);
            Matrix g = unsupervised_loss_grad(cache.out, snap0, negs);
            auto grads = gcn_backward(snap0, result.gcn_layers, cache, std::move(g));
            for (std::size_t l = 0; l < result.gcn_layers.size(); ++l)
                opt.step(l, result.gcn_layers[l].weight, grads[l]);
        }
    }

    // Per-step starting embeddings: the fixed GCN applied to each training snapshot.
    std::vector<Matrix> z_start;
    for (std::size_t t = 0; t + 1 < n_train; ++t)
        z_start.push_back(gcn_forward(sequence[t], x, result.gcn_layers));

    // Phase 2: the transformation matrices, full-batch over training pairs.
    result.params = init_params(config.base_dim, config.max_order, config.variant,
                                Activation::tanh_, init_rng);
    std::size_t n_slots = 1 + params_slot_count(result.params);
    ParamOptimizer opt(config.optimizer, config.learning_rate, n_slots);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_loss = 0.0;
        StepGradients total;
        total.w0 = Matrix(config.base_dim, config.base_dim);
        total.wk.assign(result.params.wk.size(), Matrix(config.base_dim, config.base_dim));
        if (config.variant == Variant::spectral)
            total.ws = Matrix(config.base_dim, config.base_dim);

        for (std::size_t t = 0; t + 1 < n_train; ++t) {
            NegativeSamples negs = sample_negatives(
                sequence[t + 1], config.negatives_per_positive, step_neg_rng);
            if (config.grad_check && epoch == 0 && t == 0) {
                // Finite differences are only valid away from the dot-product
                // clamp, so the check runs on a damped copy of the embeddings.
                Matrix z_check = z_start[t];
                double max_row = 0.0;
                for (std::size_t v = 0; v < z_check.rows(); ++v) {
                    double n2 = 0.0;
                    for (double e : z_check.row(v)) n2 += e * e;
                    max_row = std::max(max_row, std::sqrt(n2));
                }
                if (max_row > 4.0)
                    for (double& e : z_check.data()) e *= 4.0 / max_row;
                double rel = gradient_check(sequence[t], sequence[t + 1], z_check,
                                            result.params, negs, config.variant);
                if (rel >= 1e-4)
                    throw numeric_error("gradient check failed: relative error " +
                                        std::to_string(rel));
            }
            StepLossResult r = step_loss_and_gradients(
                sequence[t], sequence[t + 1], z_start[t], result.params, negs,
                config.variant);
            epoch_loss += r.loss;
            total.w0 += r.grads.w0;
            for (std::size_t k = 0; k < total.wk.size(); ++k) total.wk[k] += r.grads.wk[k];
            if (!total.ws.empty()) total.ws += r.grads.ws;
        }
        if (!std::isfinite(epoch_loss))
            throw numeric_error("training diverged at epoch " + std::to_string(epoch));
        result.report.per_epoch_loss.push_back(epoch_loss);

        std::size_t slot = 0;
        opt.step(slot++, result.params.w0, total.w0);
        for (std::size_t k = 0; k < total.wk.size(); ++k)
            opt.step(slot++, result.params.wk[k], total.wk[k]);
        if (!total.ws.empty()) opt.step(slot++, result.params.ws, total.ws);

        double norm = total.w0.frobenius_norm() * total.w0.frobenius_norm();
        for (const Matrix& m : total.wk) norm += m.frobenius_norm() * m.frobenius_norm();
        if (!total.ws.empty()) norm += total.ws.frobenius_norm() * total.ws.frobenius_norm();
        result.report.final_grad_norm = std::sqrt(norm);
    }
    return result;
}

}  // namespace dygcn
