// Command-line front end: synthetic-data generation, training, stepping,
// evaluation, benchmarking, and format conversion, wired for reproducible
// seeded runs.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dygcn/eval.hpp"
#include "dygcn/io.hpp"
#include "dygcn/sbm.hpp"
#include "dygcn/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dygcn;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct GlobalOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out_dir = "out";
};

void write_manifest(const GlobalOpts& g, const std::string& command,
                    const std::vector<std::string>& inputs, std::uint64_t seed) {
    fs::create_directories(g.out_dir);
    json m;
    m["command"] = command;
    m["config_path"] = g.config_path;
    m["input_paths"] = inputs;
    m["seed"] = seed;
    m["output_dir"] = g.out_dir;
    m["tool_version"] = kToolVersion;
    std::ofstream out(fs::path(g.out_dir) / "manifest.json");
    if (!out) throw input_error("cannot write manifest in " + g.out_dir);
    out << m.dump(2) << '\n';
}

std::uint64_t parse_u64(const std::string& s, const std::string& key) {
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw input_error("bad value for " + key + ": " + s);
    }
}

double parse_double(const std::string& s, const std::string& key) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw input_error("bad value for " + key + ": " + s);
    }
}

long parse_long(const std::string& s, const std::string& key) {
    try {
        return std::stol(s);
    } catch (const std::exception&) {
        throw input_error("bad value for " + key + ": " + s);
    }
}

SbmConfig sbm_config_from(const KeyValueConfig& cfg, std::uint64_t default_seed) {
    check_config_keys(cfg,
                      {"nodes", "communities", "intra_prob", "inter_prob", "churn_add",
                       "churn_remove", "steps", "seed"},
                      "synth config");
    SbmConfig s;
    s.seed = default_seed;
    for (const auto& [k, v] : cfg) {
        if (k == "nodes") s.n_nodes = static_cast<std::size_t>(parse_long(v, k));
        else if (k == "communities") s.communities = static_cast<int>(parse_long(v, k));
        else if (k == "intra_prob") s.intra_prob = parse_double(v, k);
        else if (k == "inter_prob") s.inter_prob = parse_double(v, k);
        else if (k == "churn_add") s.churn_add = static_cast<std::size_t>(parse_long(v, k));
        else if (k == "churn_remove") s.churn_remove = static_cast<std::size_t>(parse_long(v, k));
        else if (k == "steps") s.steps = static_cast<std::size_t>(parse_long(v, k));
        else if (k == "seed") s.seed = parse_u64(v, k);
    }
    s.validate();
    return s;
}

TrainConfig train_config_from(const KeyValueConfig& cfg, std::uint64_t default_seed) {
    check_config_keys(cfg,
                      {"learning_rate", "epochs", "negatives_per_positive", "seed",
                       "optimizer", "base_dim", "max_order", "variant", "grad_check"},
                      "train config");
    TrainConfig t;
    t.seed = default_seed;
    for (const auto& [k, v] : cfg) {
        if (k == "learning_rate") t.learning_rate = parse_double(v, k);
        else if (k == "epochs") t.epochs = static_cast<int>(parse_long(v, k));
        else if (k == "negatives_per_positive")
            t.negatives_per_positive = static_cast<int>(parse_long(v, k));
        else if (k == "seed") t.seed = parse_u64(v, k);
        else if (k == "optimizer") t.optimizer = optimizer_from_string(v);
        else if (k == "base_dim") t.base_dim = static_cast<std::size_t>(parse_long(v, k));
        else if (k == "max_order") t.max_order = static_cast<int>(parse_long(v, k));
        else if (k == "variant") t.variant = variant_from_string(v);
        else if (k == "grad_check") t.grad_check = (v == "1" || v == "true");
    }
    t.validate();
    return t;
}

KeyValueConfig load_config(const GlobalOpts& g) {
    if (g.config_path.empty()) return {};
    return read_config_file(g.config_path);
}

int run_synth(const GlobalOpts& g) {
    SbmConfig cfg = sbm_config_from(load_config(g), g.seed);
    write_manifest(g, "synth", {}, cfg.seed);
    SbmWorkload w = generate_sbm(cfg);
    write_event_file((fs::path(g.out_dir) / "events.txt").string(), w.snapshots);
    write_label_file((fs::path(g.out_dir) / "labels.txt").string(), w.labels);
    std::cout << "synth: " << w.snapshots.size() << " snapshots, "
              << w.snapshots.front().n_edges() << " initial edges, "
              << cfg.communities << " communities\n";
    return 0;
}

int run_convert(const GlobalOpts& g, const std::string& snap_dir) {
    write_manifest(g, "convert", {snap_dir}, g.seed);
    auto snaps = read_snapshot_dir(snap_dir);
    write_event_file((fs::path(g.out_dir) / "events.txt").string(), snaps);
    std::cout << "convert: " << snaps.size() << " snapshots\n";
    return 0;
}

int run_train(const GlobalOpts& g, const std::string& data_path) {
    TrainConfig cfg = train_config_from(load_config(g), g.seed);
    write_manifest(g, "train", {data_path}, cfg.seed);
    TemporalEvents ev = read_event_file(data_path);
    Matrix x = degree_features(ev.snapshots.front());
    TrainResult r = train(ev.snapshots, x, cfg);
    write_checkpoint((fs::path(g.out_dir) / "checkpoint.txt").string(), r.params);
    write_gcn_layers((fs::path(g.out_dir) / "gcn_layers.txt").string(), r.gcn_layers);
    std::ofstream loss_log(fs::path(g.out_dir) / "loss.csv");
    loss_log << "phase,epoch,loss\n";
    for (std::size_t e = 0; e < r.report.gcn_per_epoch_loss.size(); ++e)
        loss_log << "gcn," << e << ',' << format_double(r.report.gcn_per_epoch_loss[e]) << '\n';
    for (std::size_t e = 0; e < r.report.per_epoch_loss.size(); ++e)
        loss_log << "step," << e << ',' << format_double(r.report.per_epoch_loss[e]) << '\n';
    if (!r.report.per_epoch_loss.empty())
        std::cout << "train: first epoch loss " << r.report.per_epoch_loss.front()
                  << ", final " << r.report.per_epoch_loss.back() << ", grad norm "
                  << r.report.final_grad_norm << '\n';
    else
        std::cout << "train: zero epochs, checkpoint holds the initialization\n";
    return 0;
}

int run_step(const GlobalOpts& g, const std::string& data_path,
             const std::string& checkpoint_path, const std::string& gcn_path, int t,
             const std::string& variant_name, const std::string& embeddings_path) {
    write_manifest(g, "step", {data_path, checkpoint_path, gcn_path}, g.seed);
    TemporalEvents ev = read_event_file(data_path);
    if (t < 0 || static_cast<std::size_t>(t) + 1 >= ev.snapshots.size())
        throw input_error("step: no snapshot pair at t=" + std::to_string(t));
    DyGcnParams params = read_checkpoint(checkpoint_path);
    Variant variant = variant_from_string(variant_name);
    Matrix z_t;
    if (!embeddings_path.empty()) {
        z_t = read_embedding_file(embeddings_path);
    } else {
        auto layers = read_gcn_layers(gcn_path);
        z_t = gcn_forward(ev.snapshots[static_cast<std::size_t>(t)],
                          degree_features(ev.snapshots.front()), layers);
    }
    const GraphSnapshot& prev = ev.snapshots[static_cast<std::size_t>(t)];
    const GraphSnapshot& next = ev.snapshots[static_cast<std::size_t>(t) + 1];
    StepChurn churn = measure_churn(prev, next, params.max_order());
    Matrix out;
    double secs = time_seconds([&] { out = variant_step(variant, prev, next, z_t, params); });
    std::string out_path =
        (fs::path(g.out_dir) / ("emb_" + std::to_string(t + 1) + ".txt")).string();
    write_embedding_file(out_path, out);
    std::cout << "step t=" << t << " variant=" << variant_name << " seconds="
              << format_double(secs);
    for (std::size_t k = 0; k < churn.order_sizes.size(); ++k)
        std::cout << " |V_" << (k + 1) << "|=" << churn.order_sizes[k];
    std::cout << " -> " << out_path << '\n';
    return 0;
}

int run_eval(const GlobalOpts& g, const std::string& data_path,
             const std::string& checkpoint_path, const std::string& gcn_path,
             const std::string& task, const std::string& labels_path,
             const std::string& variant_name, bool long_term, int horizon,
             bool new_edges_only) {
    write_manifest(g, "eval", {data_path, checkpoint_path, gcn_path}, g.seed);
    TemporalEvents ev = read_event_file(data_path);
    DyGcnParams params = read_checkpoint(checkpoint_path);
    auto layers = read_gcn_layers(gcn_path);
    Variant variant = variant_from_string(variant_name);
    Matrix x = degree_features(ev.snapshots.front());
    const auto& snaps = ev.snapshots;
    if (snaps.size() < 2) throw input_error("eval: need at least 2 snapshots");

    std::vector<int> labels;
    if (task == "classify") {
        if (labels_path.empty()) throw input_error("eval: --labels required for classify");
        labels = read_label_file(labels_path, ev.n_slots);
    } else if (task != "linkpred") {
        throw input_error("eval: unknown task: " + task);
    }

    std::vector<MetricRecord> records;
    std::string vname(to_string(variant));

    if (long_term) {
        std::size_t h = horizon >= 0 ? static_cast<std::size_t>(horizon)
                                     : std::min<std::size_t>(30, snaps.size() - 2);
        if (h + 2 > snaps.size()) throw input_error("eval: horizon exceeds sequence");
        Matrix z0 = gcn_forward(snaps.front(), x, layers);
        auto zs = roll_forward(z0, snaps, params, variant, h);
        if (task == "linkpred") {
            for (std::size_t t = 0; t <= h; ++t) {
                auto r = link_prediction_eval(zs[t], snaps[t + 1], g.seed + t);
                records.push_back({"linkpred", vname, static_cast<int>(t), "auc", r.auc});
                records.push_back({"linkpred", vname, static_cast<int>(t), "f1", r.f1});
            }
        } else {
            auto acc = node_classification_eval(z0, labels, zs);
            for (std::size_t t = 0; t < acc.size(); ++t)
                records.push_back(
                    {"classify", vname, static_cast<int>(t), "accuracy", acc[t]});
        }
    } else {
        // Short-term protocol: each evaluated embedding is one incremental
        // step away from the fixed GCN's output on the previous snapshot.
        std::size_t n_train = training_snapshot_count(snaps.size());
        std::size_t start = std::min(n_train, snaps.size() - 2);
        std::vector<Matrix> stepped;
        std::vector<std::size_t> ts;
        for (std::size_t t = start; t + 1 < snaps.size(); ++t) {
            Matrix z_prev = gcn_forward(snaps[t - 1], x, layers);
            stepped.push_back(variant_step(variant, snaps[t - 1], snaps[t], z_prev, params));
            ts.push_back(t);
        }
        if (task == "linkpred") {
            for (std::size_t i = 0; i < stepped.size(); ++i) {
                std::size_t t = ts[i];
                EdgeList positives = snaps[t + 1].edges();
                if (new_edges_only)
                    positives = compute_delta(snaps[t], snaps[t + 1]).added;
                auto r = link_prediction_over_edges(stepped[i], snaps[t + 1], positives,
                                                    g.seed + t);
                records.push_back({"linkpred", vname, static_cast<int>(t), "auc", r.auc});
                records.push_back({"linkpred", vname, static_cast<int>(t), "f1", r.f1});
            }
        } else {
            Matrix z0 = gcn_forward(snaps.front(), x, layers);
            auto acc = node_classification_eval(z0, labels, stepped);
            for (std::size_t i = 0; i < acc.size(); ++i)
                records.push_back(
                    {"classify", vname, static_cast<int>(ts[i]), "accuracy", acc[i]});
        }
    }

    write_metric_records((fs::path(g.out_dir) / "metrics.txt").string(), records);
    write_metric_summary_csv((fs::path(g.out_dir) / "summary.csv").string(), records);
    double mean = 0.0;
    std::size_t n = 0;
    for (const auto& r : records)
        if (r.metric == "auc" || r.metric == "accuracy") {
            mean += r.value;
            ++n;
        }
    std::cout << "eval " << task << " variant=" << vname << " records=" << records.size()
              << " mean=" << (n ? mean / static_cast<double>(n) : 0.0) << '\n';
    return 0;
}

int run_bench(const GlobalOpts& g, const std::string& data_path,
              const std::string& checkpoint_path, const std::string& gcn_path,
              const std::vector<std::string>& variant_names) {
    write_manifest(g, "bench", {data_path, checkpoint_path, gcn_path}, g.seed);
    TemporalEvents ev = read_event_file(data_path);
    DyGcnParams params = read_checkpoint(checkpoint_path);
    auto layers = read_gcn_layers(gcn_path);
    Matrix x = degree_features(ev.snapshots.front());

    BenchVariants bv{false, false, false};
    for (const std::string& v : variant_names) {
        if (v == "gcn_full") bv.gcn_full = true;
        else if (v == "dygcn") bv.dygcn = true;
        else if (v == "spectral") bv.spectral = true;
        else throw input_error("bench: unknown variant: " + v);
    }
    auto records = timing_bench(ev.snapshots, x, layers, params, bv);

    std::ofstream csv(fs::path(g.out_dir) / "timings.csv");
    csv << "variant,step,seconds,delta_edges,delta_nodes";
    for (int k = 1; k <= params.max_order(); ++k) csv << ",v" << k;
    csv << '\n';
    const TimingRecord* dygcn_rec = nullptr;
    const std::vector<StepChurn>* churn = nullptr;
    for (const auto& r : records)
        if (r.variant == "dygcn") {
            dygcn_rec = &r;
            churn = &r.churn;
        }
    for (const auto& r : records) {
        for (std::size_t s = 0; s < r.per_step_seconds.size(); ++s) {
            csv << r.variant << ',' << s << ',' << format_double(r.per_step_seconds[s]);
            if (churn && s < churn->size()) {
                csv << ',' << (*churn)[s].delta_edges << ',' << (*churn)[s].delta_nodes;
                for (std::size_t sz : (*churn)[s].order_sizes) csv << ',' << sz;
            }
            csv << '\n';
        }
        std::cout << "bench " << r.variant << " mean_seconds="
                  << format_double(r.mean_seconds) << '\n';
    }

    if (dygcn_rec && dygcn_rec->per_step_seconds.size() >= 2) {
        std::vector<double> xs, ys;
        for (std::size_t s = 0; s < dygcn_rec->per_step_seconds.size(); ++s) {
            xs.push_back(static_cast<double>((*churn)[s].delta_edges +
                                             (*churn)[s].delta_nodes));
            ys.push_back(dygcn_rec->per_step_seconds[s]);
        }
        LinearFit fit = linear_fit(xs, ys);
        std::ofstream ff(fs::path(g.out_dir) / "fit.txt");
        ff << "slope=" << format_double(fit.slope) << "\nintercept="
           << format_double(fit.intercept) << "\nr2=" << format_double(fit.r2) << '\n';
        std::cout << "fit dygcn time ~ (|dE|+|dV|): slope=" << fit.slope
                  << " intercept=" << fit.intercept << " r2=" << fit.r2 << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DyGCN incremental dynamic-graph embedding engine"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "key=value config file");
    app.add_option("--seed", g.seed, "root 64-bit seed");
    app.add_option("--threads", g.threads, "worker threads (1 for bit-reproducibility)");
    app.add_option("--out", g.out_dir, "output directory");

    auto* synth = app.add_subcommand("synth", "generate a synthetic SBM workload");

    std::string data_path, checkpoint_path, gcn_path, embeddings_path, labels_path;
    std::string task = "linkpred", variant_name = "dygcn", snap_dir;
    int step_t = 0, horizon = -1;
    bool long_term = false, new_edges_only = false;
    std::vector<std::string> bench_variants{"gcn_full", "dygcn", "spectral"};

    auto* train_cmd = app.add_subcommand("train", "train on the first half of snapshots");
    train_cmd->add_option("--data", data_path, "temporal event file")->required();

    auto* step_cmd = app.add_subcommand("step", "one incremental update t -> t+1");
    step_cmd->add_option("--data", data_path)->required();
    step_cmd->add_option("--checkpoint", checkpoint_path)->required();
    step_cmd->add_option("--gcn", gcn_path, "GCN layer file for bootstrap embeddings");
    step_cmd->add_option("--embeddings", embeddings_path, "embedding file for time t");
    step_cmd->add_option("--t", step_t)->required();
    step_cmd->add_option("--variant", variant_name);

    auto* eval_cmd = app.add_subcommand("eval", "link prediction / node classification");
    eval_cmd->add_option("--data", data_path)->required();
    eval_cmd->add_option("--checkpoint", checkpoint_path)->required();
    eval_cmd->add_option("--gcn", gcn_path)->required();
    eval_cmd->add_option("--task", task, "linkpred | classify");
    eval_cmd->add_option("--labels", labels_path);
    eval_cmd->add_option("--variant", variant_name);
    eval_cmd->add_flag("--long-term", long_term, "roll forward from Z_0 only");
    eval_cmd->add_option("--horizon", horizon);
    eval_cmd->add_flag("--new-edges-only", new_edges_only);

    auto* bench_cmd = app.add_subcommand("bench", "timing benchmark and complexity fit");
    bench_cmd->add_option("--data", data_path)->required();
    bench_cmd->add_option("--checkpoint", checkpoint_path)->required();
    bench_cmd->add_option("--gcn", gcn_path)->required();
    bench_cmd->add_option("--variants", bench_variants, "subset of gcn_full dygcn spectral");

    auto* convert_cmd = app.add_subcommand("convert", "snapshot directory -> event file");
    convert_cmd->add_option("--snap-dir", snap_dir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed()) return run_synth(g);
        if (train_cmd->parsed()) return run_train(g, data_path);
        if (step_cmd->parsed())
            return run_step(g, data_path, checkpoint_path, gcn_path, step_t, variant_name,
                            embeddings_path);
        if (eval_cmd->parsed())
            return run_eval(g, data_path, checkpoint_path, gcn_path, task, labels_path,
                            variant_name, long_term, horizon, new_edges_only);
        if (bench_cmd->parsed())
            return run_bench(g, data_path, checkpoint_path, gcn_path, bench_variants);
        if (convert_cmd->parsed()) return run_convert(g, snap_dir);
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
