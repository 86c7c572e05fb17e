// Acceptance gate: one pass/fail line per criterion, exit 0 only if all pass.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oracles.hpp"

#include "dygcn/eval.hpp"
#include "dygcn/loss.hpp"
#include "dygcn/sbm.hpp"
#include "dygcn/spectral.hpp"
#include "dygcn/trainer.hpp"

using namespace dygcn;

namespace {

int g_failures = 0;

void report(int idx, const std::string& name, bool ok, double seconds,
            const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%.1fs) %s\n", ok ? "PASS" : "FAIL", idx,
                name.c_str(), seconds, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

void run_criterion(int idx, const std::string& name,
                   const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool ok = false;
    auto t0 = std::chrono::steady_clock::now();
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(idx, name, ok, secs, detail);
}

// One-hot slot features, scaled so initial dot products stay well inside the
// loss clamp (raw identity features start saturated and cannot train).
Matrix identity_features(std::size_t n, double scale) {
    Matrix x(n, n);
    for (std::size_t i = 0; i < n; ++i) x(i, i) = scale;
    return x;
}

DyGcnParams random_params(std::size_t d, int k_max, Rng& rng, bool with_ws = false) {
    DyGcnParams p;
    p.w0 = oracle::random_matrix(d, d, rng, 0.4);
    for (int k = 0; k < k_max; ++k) p.wk.push_back(oracle::random_matrix(d, d, rng, 0.4));
    if (with_ws) p.ws = oracle::random_matrix(d, d, rng, 0.4);
    return p;
}

// ---- 1: locality ----
bool locality(std::string& detail) {
    Rng rng = make_rng(101, 0);
    std::size_t checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 20 + rng() % 481;  // up to 500
        double p = 4.0 / static_cast<double>(n);
        int k_max = 1 + static_cast<int>(rng() % 4);
        auto [prev, next] = oracle::random_snapshot_pair(n, p, 4 + rng() % 12, rng);
        DyGcnParams params = random_params(6, k_max, rng);
        Matrix z = oracle::random_matrix(n, 6, rng);
        StepCache c = dygcn_step_cached(prev, next, z, params);
        for (NodeId v = 0; v < n; ++v) {
            if (c.order_of[v] != 0) continue;
            for (std::size_t j = 0; j < 6; ++j)
                if (c.out(v, j) != z(v, j)) {
                    detail = "row " + std::to_string(v) + " changed outside the influence sets";
                    return false;
                }
            ++checked;
        }
    }
    detail = std::to_string(checked) + " untouched rows bit-identical over 200 instances";
    return true;
}

// ---- 2: node-wise vs matrix form ----
bool form_equivalence(std::string& detail) {
    Rng rng = make_rng(102, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 15 + rng() % 86;
        int k_max = 1 + static_cast<int>(rng() % 4);
        auto [prev, next] = oracle::random_snapshot_pair(n, 0.08, 4 + rng() % 10, rng);
        DyGcnParams params = random_params(5, k_max, rng);
        Matrix z = oracle::random_matrix(n, 5, rng);
        worst = std::max(worst, max_abs_diff(dygcn_step(prev, next, z, params),
                                             dygcn_step_matrix(prev, next, z, params)));
    }
    detail = "max |node_form - matrix_form| = " + std::to_string(worst);
    return worst <= 1e-10;
}

// ---- 3: spectral propagation vs eigendecomposition ----
bool spectral_oracle(std::string& detail) {
    Rng rng = make_rng(103, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 10 + rng() % 91;  // up to 100
        GraphSnapshot g = oracle::random_snapshot(n, 0.1, rng);
        Matrix z = oracle::random_matrix(n, 6, rng);
        Matrix got = spectral_propagate(g, z, Matrix::identity(6));

        Eigen::MatrixXd lap(n, n);
        Matrix lap_m = normalized_laplacian(g);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                lap(static_cast<long>(i), static_cast<long>(j)) = lap_m(i, j);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
        Eigen::MatrixXd u = es.eigenvectors();
        Eigen::VectorXd shifted = (2.0 - es.eigenvalues().array()).matrix();
        Eigen::MatrixXd ze(n, 6);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < 6; ++j)
                ze(static_cast<long>(i), static_cast<long>(j)) = z(i, j);
        Eigen::MatrixXd want = u * shifted.asDiagonal() * u.transpose() * ze;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < 6; ++j)
                worst = std::max(worst, std::abs(got(i, j) - want(static_cast<long>(i),
                                                                  static_cast<long>(j))));
    }
    detail = "max abs error vs U(2I-Lambda)U^T Z = " + std::to_string(worst);
    return worst <= 1e-8;
}

// ---- 4: analytic gradients vs finite differences ----
bool gradient_correctness(std::string& detail) {
    Rng rng = make_rng(104, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 4; ++trial) {
        std::size_t n = 20 + rng() % 31;  // up to 50
        auto [prev, next] = oracle::random_snapshot_pair(n, 0.12, 5 + rng() % 6, rng);
        std::size_t d = 4 + rng() % 5;  // up to 8
        Matrix z = oracle::random_matrix(n, d, rng, 0.5);
        Rng neg_rng = make_rng(104, static_cast<std::uint64_t>(trial) + 1);
        NegativeSamples negs = sample_negatives(next, 1, neg_rng);
        DyGcnParams pd = random_params(d, 2, rng);
        worst = std::max(worst, gradient_check(prev, next, z, pd, negs, Variant::dygcn));
        DyGcnParams ps = random_params(d, 1, rng, /*with_ws=*/true);
        worst = std::max(worst, gradient_check(prev, next, z, ps, negs, Variant::spectral));
    }
    detail = "worst relative error = " + std::to_string(worst);
    return worst < 1e-4;
}

// ---- 5: AUC vs quadratic oracle ----
bool auc_oracle(std::string& detail) {
    Rng rng = make_rng(105, 0);
    std::uniform_int_distribution<int> bucket(0, 19);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t np = 1 + rng() % 1000;
        std::size_t nn = 1 + rng() % 1000;
        std::vector<double> pos(np), neg(nn);
        for (double& x : pos) x = bucket(rng) / 20.0;
        for (double& x : neg) x = bucket(rng) / 20.0;
        if (auc_score(pos, neg) != oracle::pairwise_auc(pos, neg)) {
            detail = "mismatch at trial " + std::to_string(trial);
            return false;
        }
    }
    detail = "exact match on 100 tied score sets";
    return true;
}

// ---- shared SBM workload for 6 and 8 ----
struct SmokeSetup {
    SbmWorkload workload;      // 33 snapshots; first 20 form the training view
    Matrix features;           // scaled one-hot node ids
    TrainResult dygcn_result;  // trained on the 20-snapshot prefix, K=2
    TrainResult spectral_result;
    TrainResult roll_result;  // K=1 model for the long-horizon roll
};

TrainConfig smoke_config(Variant v, int max_order) {
    TrainConfig cfg;
    cfg.base_dim = 32;
    cfg.max_order = max_order;
    cfg.epochs = 200;
    cfg.learning_rate = 0.005;
    cfg.seed = 7;
    cfg.variant = v;
    return cfg;
}

SmokeSetup& smoke() {
    static SmokeSetup s = [] {
        SmokeSetup setup;
        SbmConfig sbm;
        sbm.n_nodes = 500;
        sbm.communities = 2;
        sbm.intra_prob = 0.05;
        sbm.inter_prob = 0.005;
        sbm.churn_add = 20;
        sbm.churn_remove = 20;
        sbm.steps = 33;
        sbm.seed = 6;
        setup.workload = generate_sbm(sbm);
        setup.features = identity_features(sbm.n_nodes, 0.05);
        std::vector<GraphSnapshot> prefix(setup.workload.snapshots.begin(),
                                          setup.workload.snapshots.begin() + 20);
        setup.dygcn_result = train(prefix, setup.features, smoke_config(Variant::dygcn, 2));
        setup.spectral_result =
            train(prefix, setup.features, smoke_config(Variant::spectral, 2));
        setup.roll_result = train(prefix, setup.features, smoke_config(Variant::dygcn, 1));
        return setup;
    }();
    return s;
}

double held_out_auc(const SmokeSetup& s, const TrainResult& r, Variant v) {
    const auto& snaps = s.workload.snapshots;
    std::size_t n_train = training_snapshot_count(20);
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t t = n_train; t + 1 < 20; ++t) {
        Matrix z_prev = gcn_forward(snaps[t - 1], s.features, r.gcn_layers);
        Matrix z = variant_step(v, snaps[t - 1], snaps[t], z_prev, r.params);
        total += link_prediction_eval(z, snaps[t + 1], 500 + t).auc;
        ++count;
    }
    return total / static_cast<double>(count);
}

// ---- 6: end-to-end learning smoke test ----
bool learning_smoke(std::string& detail) {
    SmokeSetup& s = smoke();
    double auc_d = held_out_auc(s, s.dygcn_result, Variant::dygcn);
    double auc_s = held_out_auc(s, s.spectral_result, Variant::spectral);
    detail = "held-out AUC: dygcn=" + std::to_string(auc_d) +
             " spectral=" + std::to_string(auc_s);
    return auc_d >= 0.80 && auc_s >= auc_d - 0.02;
}

// ---- 7: efficiency trend ----
// Complexity claim is about the first-order update cost, so the timing runs
// at K=1; feature dimension 128 stands in for a realistic attribute matrix.
bool efficiency(std::string& detail) {
    const std::size_t n = 10000;
    const std::size_t d = 32, f = 256;
    Rng rng = make_rng(107, 0);

    SbmConfig sbm;
    sbm.n_nodes = n;
    sbm.communities = 2;
    sbm.intra_prob = 0.0016;  // ~40k intra + ~10k inter edges
    sbm.inter_prob = 0.0004;
    sbm.steps = 7;
    sbm.seed = 17;

    Matrix x = oracle::random_matrix(n, f, rng);
    std::vector<GcnLayerParams> layers(2);
    layers[0].weight = oracle::random_matrix(f, d, rng, 0.1);
    layers[0].activation = Activation::relu;
    layers[1].weight = oracle::random_matrix(d, d, rng, 0.1);
    layers[1].activation = Activation::identity;
    DyGcnParams params = random_params(d, 1, rng);

    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        std::size_t m = v.size() / 2;
        return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    };

    auto run_level = [&](std::size_t churn_events, double& mean_churn, double& med_step,
                         double& med_full) {
        SbmConfig cfg = sbm;
        cfg.churn_add = churn_events / 2;
        cfg.churn_remove = churn_events - cfg.churn_add;
        cfg.seed = 17 + churn_events;
        SbmWorkload w = generate_sbm(cfg);
        Matrix z = gcn_forward(w.snapshots.front(), x, layers);
        // warm-up
        (void)dygcn_step(w.snapshots[0], w.snapshots[1], z, params);
        double churn_total = 0.0;
        std::vector<double> step_times, full_times;
        std::size_t steps = 0;
        for (std::size_t t = 0; t + 1 < w.snapshots.size(); ++t) {
            StepChurn churn = measure_churn(w.snapshots[t], w.snapshots[t + 1], 1);
            churn_total += static_cast<double>(churn.delta_edges + churn.delta_nodes);
            Matrix out;
            double best = 1e300;
            for (int rep = 0; rep < 7; ++rep)
                best = std::min(best, time_seconds([&] {
                    out = dygcn_step(w.snapshots[t], w.snapshots[t + 1], z, params);
                }));
            step_times.push_back(best);
            double full_best = 1e300;
            for (int rep = 0; rep < 3; ++rep)
                full_best = std::min(full_best, time_seconds([&] {
                    out = gcn_forward(w.snapshots[t + 1], x, layers);
                }));
            full_times.push_back(full_best);
            z = gcn_forward(w.snapshots[t], x, layers);
            ++steps;
        }
        mean_churn = churn_total / static_cast<double>(steps);
        med_step = median(step_times);
        med_full = median(full_times);
    };

    // 50k edges: churn levels 0.1%, 0.5%, 1%, 2% of the edge count; the fit
    // uses per-level median times so scheduler outliers cannot skew it
    std::vector<double> xs, ys;
    double speedup = 0.0;
    for (std::size_t events : {50u, 250u, 500u, 1000u}) {
        double mean_churn = 0.0, med_step = 0.0, med_full = 0.0;
        run_level(events, mean_churn, med_step, med_full);
        xs.push_back(mean_churn);
        ys.push_back(med_step);
        if (events == 250) speedup = med_full / med_step;
    }
    LinearFit fit = linear_fit(xs, ys);
    detail = "speedup at 0.5% churn = " + std::to_string(speedup) +
             "x, linear fit r2 = " + std::to_string(fit.r2);
    return speedup >= 20.0 && fit.r2 > 0.9;
}

// ---- 8: long-term rolling stability ----
// A first-order model rolls: on this dense workload K=2 rewrites nearly every
// row each step and repeated squashing erases structure within a few steps.
bool long_term_stability(std::string& detail) {
    SmokeSetup& s = smoke();
    Matrix z0 = gcn_forward(s.workload.snapshots.front(), s.features,
                            s.roll_result.gcn_layers);
    auto results = long_term_eval(z0, s.workload.snapshots, s.roll_result.params,
                                  Variant::dygcn, 30, 800);
    double worst = 1.0;
    for (const auto& r : results) worst = std::min(worst, r.auc);
    detail = "30-step roll, min per-step AUC = " + std::to_string(worst);
    return worst >= 0.6;
}

// ---- 9: K-sweep shape ----
bool k_sweep(std::string& detail) {
    // sparse graph so the influence layers keep growing through K=4
    SbmConfig sbm;
    sbm.n_nodes = 2000;
    sbm.communities = 2;
    sbm.intra_prob = 0.0035;
    sbm.inter_prob = 0.0005;
    sbm.churn_add = 10;
    sbm.churn_remove = 10;
    sbm.steps = 6;
    sbm.seed = 19;
    SbmWorkload w = generate_sbm(sbm);
    Rng rng = make_rng(109, 0);
    DyGcnParams params = random_params(16, 4, rng);
    Matrix z0 = oracle::random_matrix(sbm.n_nodes, 16, rng);

    std::vector<double> times(4, 0.0);
    std::vector<std::size_t> counted(4, 0), expected(4, 0);
    for (std::size_t t = 0; t + 1 < w.snapshots.size(); ++t) {
        const GraphSnapshot& prev = w.snapshots[t];
        const GraphSnapshot& next = w.snapshots[t + 1];
        auto layers = oracle::bfs_influence(next, compute_delta(prev, next), 4);
        for (int k = 1; k <= 4; ++k) {
            double best = 1e300;
            StepCache cache;
            for (int rep = 0; rep < 11; ++rep)
                best = std::min(best, time_seconds([&] {
                    cache = dygcn_step_cached(prev, next, z0, params, k);
                }));
            times[static_cast<std::size_t>(k - 1)] += best;
            for (int o : cache.order_of)
                if (o != 0) ++counted[static_cast<std::size_t>(k - 1)];
            for (int kk = 0; kk < k; ++kk)
                expected[static_cast<std::size_t>(k - 1)] +=
                    layers[static_cast<std::size_t>(kk)].size();
        }
    }
    bool counts_ok = counted == expected;
    bool mono = times[0] <= times[1] && times[1] <= times[2] && times[2] <= times[3];
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "times(ms/ K=1..4): %.3f %.3f %.3f %.3f, updated counts %s",
                  times[0] * 1e3, times[1] * 1e3, times[2] * 1e3, times[3] * 1e3,
                  counts_ok ? "exact" : "MISMATCH");
    detail = buf;
    return counts_ok && mono;
}

}  // namespace

int main() {
    run_criterion(1, "locality of incremental updates", locality);
    run_criterion(2, "node-wise vs matrix-form equivalence", form_equivalence);
    run_criterion(3, "spectral propagation vs eigendecomposition", spectral_oracle);
    run_criterion(4, "analytic gradients vs finite differences", gradient_correctness);
    run_criterion(5, "rank AUC vs pairwise oracle", auc_oracle);
    run_criterion(6, "end-to-end learning smoke test", learning_smoke);
    run_criterion(7, "incremental-update efficiency trend", efficiency);
    run_criterion(8, "long-term rolling stability", long_term_stability);
    run_criterion(9, "K-sweep time and update counts", k_sweep);

    if (g_failures == 0) {
        std::printf("all 9 criteria passed\n");
        return 0;
    }
    std::printf("%d criteria failed\n", g_failures);
    return 1;
}
