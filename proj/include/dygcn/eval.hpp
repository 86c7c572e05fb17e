#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dygcn/core.hpp"
#include "dygcn/dygcn.hpp"
#include "dygcn/gcn.hpp"
#include "dygcn/graph.hpp"
#include "dygcn/matrix.hpp"
#include "dygcn/rng.hpp"
#include "dygcn/spectral.hpp"
#include "dygcn/trainer.hpp"

namespace dygcn {

struct LinkPredResult {
    double auc = 0.0;
    double f1 = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

// Rank-statistic AUC with ties counted as 0.5. Counting is integer-exact, so
// the result matches the pairwise-comparison definition bit for bit.
inline double auc_score(const std::vector<double>& pos, const std::vector<double>& neg) {
    if (pos.empty() || neg.empty()) throw contract_error("auc_score: empty score set");
    std::vector<double> sorted_neg = neg;
    std::sort(sorted_neg.begin(), sorted_neg.end());
    unsigned long long wins = 0, ties = 0;
    for (double p : pos) {
        auto lo = std::lower_bound(sorted_neg.begin(), sorted_neg.end(), p);
        auto hi = std::upper_bound(lo, sorted_neg.end(), p);
        wins += static_cast<unsigned long long>(lo - sorted_neg.begin());
        ties += static_cast<unsigned long long>(hi - lo);
    }
    return (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) /
           (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

// F1 with the decision threshold fixed at the median of the combined score
// multiset; scores >= threshold are predicted positive.
inline double f1_at_median(const std::vector<double>& pos, const std::vector<double>& neg) {
    std::vector<double> all;
    all.reserve(pos.size() + neg.size());
    all.insert(all.end(), pos.begin(), pos.end());
    all.insert(all.end(), neg.begin(), neg.end());
    std::sort(all.begin(), all.end());
    std::size_t n = all.size();
    double threshold = n % 2 == 1 ? all[n / 2] : 0.5 * (all[n / 2 - 1] + all[n / 2]);
    std::size_t tp = 0, fp = 0, fn = 0;
    for (double s : pos) (s >= threshold ? tp : fn)++;
    for (double s : neg)
        if (s >= threshold) ++fp;
    if (2 * tp + fp + fn == 0) return 0.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

// Cosine similarity; a zero vector scores 0 against anything.
inline double cosine(std::span<const double> a, std::span<const double> b) {
    double na = dot(a, a), nb = dot(b, b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / std::sqrt(na * nb);
}

// Equal-count non-edge sampling: never an existing edge, never a self-pair.
inline EdgeList sample_non_edges(const GraphSnapshot& snap, std::size_t count, Rng& rng) {
    std::size_t n = snap.n_slots();
    if (n < 2) throw contract_error("sample_non_edges: need at least 2 slots");
    std::size_t max_pairs = n * (n - 1) / 2;
    if (count > max_pairs - snap.n_edges())
        throw input_error("sample_non_edges: not enough non-edges to sample");
    std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
    EdgeList out;
    out.reserve(count);
    while (out.size() < count) {
        NodeId u = pick(rng), v = pick(rng);
        if (u == v || snap.has_edge(u, v)) continue;
        out.emplace_back(u, v);
    }
    return out;
}

inline LinkPredResult link_prediction_over_edges(const Matrix& z, const GraphSnapshot& next,
                                                 const EdgeList& positives,
                                                 std::uint64_t seed) {
    if (positives.empty()) throw input_error("link prediction: no positive edges");
    Rng rng = make_rng(seed, 11);
    EdgeList negatives = sample_non_edges(next, positives.size(), rng);
    std::vector<double> pos_scores, neg_scores;
    pos_scores.reserve(positives.size());
    neg_scores.reserve(negatives.size());
    for (const Edge& e : positives) pos_scores.push_back(cosine(z.row(e.a), z.row(e.b)));
    for (const Edge& e : negatives) neg_scores.push_back(cosine(z.row(e.a), z.row(e.b)));
    LinkPredResult r;
    r.n_pos = pos_scores.size();
    r.n_neg = neg_scores.size();
    r.auc = auc_score(pos_scores, neg_scores);
    r.f1 = f1_at_median(pos_scores, neg_scores);
    return r;
}

// Positives are all edges of snapshot t+1, scored by embeddings from time t.
inline LinkPredResult link_prediction_eval(const Matrix& z_t, const GraphSnapshot& next,
                                           std::uint64_t seed) {
    return link_prediction_over_edges(z_t, next, next.edges(), seed);
}

// ---- node classification (fixed logistic-regression head) ----

// L2-regularized multinomial logistic regression, trained once on the initial
// embeddings and then held fixed. Regularization strength 1.0 on the weights
// (not the intercept), tolerance 1e-4, at most 100 iterations.
class LogisticHead {
  public:
    void fit(const Matrix& x, const std::vector<int>& labels) {
        if (x.rows() != labels.size()) throw contract_error("fit: label count mismatch");
        n_classes_ = 0;
        for (int l : labels) {
            if (l < 0) throw input_error("fit: negative label");
            n_classes_ = std::max(n_classes_, l + 1);
        }
        if (n_classes_ < 2) throw input_error("fit: need at least two classes");
        std::size_t d = x.cols(), c = static_cast<std::size_t>(n_classes_);
        w_ = Matrix(d, c);
        b_.assign(c, 0.0);

        double lr = 1.0 / static_cast<double>(x.rows());
        double prev_loss = objective(x, labels);
        for (int iter = 0; iter < 100; ++iter) {
            Matrix gw(d, c);
            std::vector<double> gb(c, 0.0);
            gradient(x, labels, gw, gb);
            Matrix w_save = w_;
            std::vector<double> b_save = b_;
            double loss = prev_loss;
            // backtracking step
            for (int attempt = 0; attempt < 30; ++attempt) {
                w_ = w_save;
                b_ = b_save;
                for (std::size_t i = 0; i < w_.data().size(); ++i)
                    w_.data()[i] -= lr * gw.data()[i];
                for (std::size_t j = 0; j < c; ++j) b_[j] -= lr * gb[j];
                loss = objective(x, labels);
                if (loss <= prev_loss) break;
                lr *= 0.5;
            }
            if (loss > prev_loss) {  // no descent direction found
                w_ = w_save;
                b_ = b_save;
                break;
            }
            double rel = std::abs(prev_loss - loss) / (std::abs(prev_loss) + 1e-12);
            prev_loss = loss;
            lr *= 1.2;
            if (rel < 1e-4) break;
        }
    }

    int predict(std::span<const double> row) const {
        int best = 0;
        double best_s = score(row, 0);
        for (int j = 1; j < n_classes_; ++j) {
            double s = score(row, j);
            if (s > best_s) {
                best_s = s;
                best = j;
            }
        }
        return best;
    }

    double accuracy(const Matrix& x, const std::vector<int>& labels) const {
        std::size_t hit = 0;
        for (std::size_t i = 0; i < x.rows(); ++i)
            if (predict(x.row(i)) == labels[i]) ++hit;
        return static_cast<double>(hit) / static_cast<double>(x.rows());
    }

  private:
    double score(std::span<const double> row, int j) const {
        double s = b_[static_cast<std::size_t>(j)];
        for (std::size_t k = 0; k < row.size(); ++k)
            s += row[k] * w_(k, static_cast<std::size_t>(j));
        return s;
    }

    void softmax_row(std::span<const double> row, std::vector<double>& p) const {
        double mx = -1e300;
        for (int j = 0; j < n_classes_; ++j) {
            p[static_cast<std::size_t>(j)] = score(row, j);
            mx = std::max(mx, p[static_cast<std::size_t>(j)]);
        }
        double sum = 0.0;
        for (double& v : p) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (double& v : p) v /= sum;
    }

    double objective(const Matrix& x, const std::vector<int>& labels) const {
        std::vector<double> p(static_cast<std::size_t>(n_classes_));
        double loss = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            softmax_row(x.row(i), p);
            loss -= std::log(std::max(p[static_cast<std::size_t>(labels[i])], 1e-300));
        }
        for (double v : w_.data()) loss += 0.5 * v * v;
        return loss;
    }

    void gradient(const Matrix& x, const std::vector<int>& labels, Matrix& gw,
                  std::vector<double>& gb) const {
        std::vector<double> p(static_cast<std::size_t>(n_classes_));
        for (std::size_t i = 0; i < x.rows(); ++i) {
            softmax_row(x.row(i), p);
            p[static_cast<std::size_t>(labels[i])] -= 1.0;
            auto row = x.row(i);
            for (std::size_t j = 0; j < p.size(); ++j) {
                gb[j] += p[j];
                for (std::size_t k = 0; k < row.size(); ++k) gw(k, j) += row[k] * p[j];
            }
        }
        for (std::size_t i = 0; i < gw.data().size(); ++i) gw.data()[i] += w_.data()[i];
    }

    Matrix w_;
    std::vector<double> b_;
    int n_classes_ = 0;
};

// Head trained on Z_0 only, evaluated over all node slots at each later time.
inline std::vector<double> node_classification_eval(const Matrix& z_0,
                                                    const std::vector<int>& labels,
                                                    const std::vector<Matrix>& embeddings_at_t) {
    LogisticHead head;
    head.fit(z_0, labels);
    std::vector<double> acc;
    acc.reserve(embeddings_at_t.size());
    for (const Matrix& z : embeddings_at_t) acc.push_back(head.accuracy(z, labels));
    return acc;
}

// ---- long-term rolled-forward evaluation ----

inline Matrix variant_step(Variant variant, const GraphSnapshot& prev,
                           const GraphSnapshot& next, const Matrix& z,
                           const DyGcnParams& params, int max_order = 0) {
    return variant == Variant::dygcn ? dygcn_step(prev, next, z, params, max_order)
                                     : spectral_dygcn_step(prev, next, z, params);
}

// Z_0 .. Z_horizon, each step feeding on the previous output.
inline std::vector<Matrix> roll_forward(const Matrix& z_0,
                                        const std::vector<GraphSnapshot>& sequence,
                                        const DyGcnParams& params, Variant variant,
                                        std::size_t horizon) {
    if (horizon + 1 > sequence.size())
        throw contract_error("roll_forward: horizon exceeds sequence length - 1");
    std::vector<Matrix> zs;
    zs.push_back(z_0);
    for (std::size_t t = 0; t < horizon; ++t)
        zs.push_back(variant_step(variant, sequence[t], sequence[t + 1], zs.back(), params));
    return zs;
}

// Per-step link prediction along the roll: entry i scores snapshot i+1 with Z_i.
inline std::vector<LinkPredResult> long_term_eval(const Matrix& z_0,
                                                  const std::vector<GraphSnapshot>& sequence,
                                                  const DyGcnParams& params, Variant variant,
                                                  std::size_t horizon, std::uint64_t seed) {
    if (horizon + 2 > sequence.size())
        throw contract_error("long_term_eval: need a snapshot after the horizon");
    auto zs = roll_forward(z_0, sequence, params, variant, horizon);
    std::vector<LinkPredResult> out;
    for (std::size_t t = 0; t < zs.size(); ++t) {
        if (!zs[t].all_finite()) throw numeric_error("long_term_eval: non-finite embeddings");
        out.push_back(link_prediction_eval(zs[t], sequence[t + 1], seed + t));
    }
    return out;
}

// ---- timing benchmark and complexity fit ----

struct StepChurn {
    std::size_t delta_edges = 0;  // |added| + |removed|
    std::size_t delta_nodes = 0;  // nodes whose degree crossed zero
    std::vector<std::size_t> order_sizes;  // |V_1| .. |V_K|

    std::size_t updated_total() const {
        std::size_t n = 0;
        for (std::size_t s : order_sizes) n += s;
        return n;
    }
};

inline StepChurn measure_churn(const GraphSnapshot& prev, const GraphSnapshot& next,
                               int max_order) {
    GraphDelta delta = compute_delta(prev, next);
    StepChurn c;
    c.delta_edges = delta.added.size() + delta.removed.size();
    for (std::size_t v = 0; v < prev.n_slots(); ++v) {
        bool before = prev.degree(static_cast<NodeId>(v)) > 0;
        bool after = next.degree(static_cast<NodeId>(v)) > 0;
        if (before != after) ++c.delta_nodes;
    }
    InfluenceSets infl = influenced_sets(next, delta, max_order);
    for (const auto& s : infl.orders) c.order_sizes.push_back(s.size());
    return c;
}

struct TimingRecord {
    std::string variant;
    std::vector<double> per_step_seconds;
    double mean_seconds = 0.0;
    std::vector<StepChurn> churn;  // recorded once per step, same for all variants

    void finish() {
        double s = 0.0;
        for (double x : per_step_seconds) s += x;
        mean_seconds = per_step_seconds.empty() ? 0.0 : s / per_step_seconds.size();
    }
};

template <typename F>
double time_seconds(F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

struct BenchVariants {
    bool gcn_full = true;
    bool dygcn = true;
    bool spectral = true;
};

// Times, per step: a full GCN recompute, the incremental step, and the
// spectral step. Single-threaded by contract.
inline std::vector<TimingRecord> timing_bench(const std::vector<GraphSnapshot>& sequence,
                                              const Matrix& x,
                                              const std::vector<GcnLayerParams>& gcn_layers,
                                              const DyGcnParams& params,
                                              const BenchVariants& variants) {
    if (sequence.size() < 2) throw contract_error("timing_bench: need at least 2 snapshots");
    std::vector<TimingRecord> records;
    TimingRecord rec_gcn{"gcn_full", {}, 0.0, {}};
    TimingRecord rec_dygcn{"dygcn", {}, 0.0, {}};
    TimingRecord rec_spec{"spectral", {}, 0.0, {}};

    Matrix z = gcn_forward(sequence.front(), x, gcn_layers);
    // warm-up pass
    if (variants.dygcn) dygcn_step(sequence[0], sequence[1], z, params);

    for (std::size_t t = 0; t + 1 < sequence.size(); ++t) {
        const GraphSnapshot& prev = sequence[t];
        const GraphSnapshot& next = sequence[t + 1];
        StepChurn churn = measure_churn(prev, next, params.max_order());
        rec_dygcn.churn.push_back(churn);
        if (variants.gcn_full) {
            Matrix out;
            rec_gcn.per_step_seconds.push_back(
                time_seconds([&] { out = gcn_forward(next, x, gcn_layers); }));
        }
        if (variants.dygcn) {
            Matrix out;
            rec_dygcn.per_step_seconds.push_back(
                time_seconds([&] { out = dygcn_step(prev, next, z, params); }));
        }
        if (variants.spectral && !params.ws.empty()) {
            Matrix out;
            rec_spec.per_step_seconds.push_back(
                time_seconds([&] { out = spectral_dygcn_step(prev, next, z, params); }));
        }
        z = gcn_forward(next, x, gcn_layers);
    }
    if (variants.gcn_full) {
        rec_gcn.finish();
        records.push_back(std::move(rec_gcn));
    }
    if (variants.dygcn) {
        rec_dygcn.finish();
        records.push_back(std::move(rec_dygcn));
    }
    if (variants.spectral && !params.ws.empty()) {
        rec_spec.finish();
        records.push_back(std::move(rec_spec));
    }
    return records;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw contract_error("linear_fit: need at least 2 points");
    double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    double denom = n * sxx - sx * sx;
    LinearFit f;
    f.slope = denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0, ss_tot = 0, mean_y = sy / n;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double pred = f.slope * xs[i] + f.intercept;
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
    }
    f.r2 = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
    return f;
}

// ---- K-sweep and dimension-sweep tables ----

struct SweepRow {
    std::string setting;
    double metric = 0.0;        // mean link-prediction AUC
    double time_seconds = 0.0;  // mean per-step update time
    std::size_t updated_nodes = 0;
};

// Mean per-step time and updated-node count for each max order. The params
// must carry at least max(ks) order matrices.
inline std::vector<SweepRow> order_sweep(const std::vector<GraphSnapshot>& sequence,
                                         const Matrix& x,
                                         const std::vector<GcnLayerParams>& gcn_layers,
                                         const DyGcnParams& params,
                                         const std::vector<int>& ks, std::uint64_t seed) {
    std::vector<SweepRow> rows;
    for (int k : ks) {
        if (k > params.max_order())
            throw contract_error("order_sweep: K exceeds available W_k matrices");
        SweepRow row;
        row.setting = "K=" + std::to_string(k);
        double total_time = 0.0, total_auc = 0.0;
        std::size_t updated = 0, steps = 0;
        for (std::size_t t = 0; t + 1 < sequence.size(); ++t) {
            Matrix z = gcn_forward(sequence[t], x, gcn_layers);
            Matrix out;
            double best = 1e300;
            for (int rep = 0; rep < 3; ++rep)
                best = std::min(best, time_seconds([&] {
                                    out = dygcn_step(sequence[t], sequence[t + 1], z, params, k);
                                }));
            total_time += best;
            updated += measure_churn(sequence[t], sequence[t + 1], k).updated_total();
            if (t + 2 < sequence.size())
                total_auc += link_prediction_eval(out, sequence[t + 2], seed + t).auc;
            ++steps;
        }
        row.time_seconds = total_time / static_cast<double>(steps);
        row.metric = steps > 1 ? total_auc / static_cast<double>(steps - 1) : 0.0;
        row.updated_nodes = updated;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace dygcn
