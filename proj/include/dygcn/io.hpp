#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dygcn/core.hpp"
#include "dygcn/dygcn.hpp"
#include "dygcn/gcn.hpp"
#include "dygcn/graph.hpp"
#include "dygcn/matrix.hpp"

namespace dygcn {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---- temporal event file: one `t u v op` per line, sorted by t ----

struct TemporalEvents {
    std::size_t n_slots = 0;
    std::vector<GraphSnapshot> snapshots;
};

inline TemporalEvents read_event_file(const std::string& path, std::size_t n_slots_hint = 0) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open event file: " + path);

    struct Event {
        long t;
        NodeId u, v;
        char op;
    };
    std::vector<Event> events;
    std::string line;
    std::size_t lineno = 0;
    long max_t = 0;
    NodeId max_id = 0;
    long prev_t = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        Event e;
        std::string op;
        if (!(ls >> e.t >> e.u >> e.v >> op) || op.size() != 1 ||
            (op[0] != '+' && op[0] != '-'))
            throw input_error(path + ":" + std::to_string(lineno) + ": malformed event line");
        if (e.t < 0)
            throw input_error(path + ":" + std::to_string(lineno) + ": negative time");
        if (e.t < prev_t)
            throw input_error(path + ":" + std::to_string(lineno) +
                              ": events not sorted by time");
        if (e.u == e.v)
            throw input_error(path + ":" + std::to_string(lineno) + ": self-loop event");
        prev_t = e.t;
        e.op = op[0];
        max_t = std::max(max_t, e.t);
        max_id = std::max({max_id, e.u, e.v});
        events.push_back(e);
    }
    if (events.empty()) throw input_error(path + ": no events");

    TemporalEvents out;
    out.n_slots = std::max<std::size_t>(n_slots_hint, static_cast<std::size_t>(max_id) + 1);

    EdgeList current;
    std::size_t i = 0;
    for (long t = 0; t <= max_t; ++t) {
        for (; i < events.size() && events[i].t == t; ++i) {
            Edge e(events[i].u, events[i].v);
            auto pos = std::lower_bound(current.begin(), current.end(), e);
            bool present = pos != current.end() && *pos == e;
            if (events[i].op == '+') {
                if (present)
                    throw input_error(path + ": duplicate edge (" + std::to_string(e.a) +
                                      "," + std::to_string(e.b) + ") at t=" +
                                      std::to_string(t));
                current.insert(pos, e);
            } else {
                if (!present)
                    throw input_error(path + ": removing absent edge (" +
                                      std::to_string(e.a) + "," + std::to_string(e.b) +
                                      ") at t=" + std::to_string(t));
                current.erase(pos);
            }
        }
        out.snapshots.emplace_back(out.n_slots, current, static_cast<int>(t));
    }
    return out;
}

inline void write_event_file(const std::string& path,
                             const std::vector<GraphSnapshot>& snapshots) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write event file: " + path);
    if (snapshots.empty()) throw contract_error("write_event_file: empty sequence");
    for (const Edge& e : snapshots.front().edges())
        out << "0 " << e.a << ' ' << e.b << " +\n";
    for (std::size_t t = 1; t < snapshots.size(); ++t) {
        GraphDelta d = compute_delta(snapshots[t - 1], snapshots[t]);
        for (const Edge& e : d.added) out << t << ' ' << e.a << ' ' << e.b << " +\n";
        for (const Edge& e : d.removed) out << t << ' ' << e.a << ' ' << e.b << " -\n";
    }
}

// ---- snapshot directory: snap_<t>.edges files, one `u v` per line ----

inline std::vector<GraphSnapshot> read_snapshot_dir(const std::string& dir,
                                                    std::size_t n_slots_hint = 0) {
    namespace fs = std::filesystem;
    std::vector<std::pair<int, std::string>> files;
    if (!fs::is_directory(dir)) throw input_error("not a directory: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string name = entry.path().filename().string();
        if (name.starts_with("snap_") && name.ends_with(".edges")) {
            int t = 0;
            try {
                t = std::stoi(name.substr(5, name.size() - 11));
            } catch (const std::exception&) {
                throw input_error("bad snapshot file name: " + name);
            }
            files.emplace_back(t, entry.path().string());
        }
    }
    if (files.empty()) throw input_error("no snap_<t>.edges files in " + dir);
    std::sort(files.begin(), files.end());

    std::vector<EdgeList> lists;
    NodeId max_id = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (files[i].first != static_cast<int>(i))
            throw input_error("snapshot indices are not consecutive from 0 in " + dir);
        std::ifstream in(files[i].second);
        if (!in) throw input_error("cannot open " + files[i].second);
        EdgeList edges;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            NodeId u, v;
            if (!(ls >> u >> v))
                throw input_error(files[i].second + ":" + std::to_string(lineno) +
                                  ": malformed edge line");
            if (u == v)
                throw input_error(files[i].second + ":" + std::to_string(lineno) +
                                  ": self-loop");
            max_id = std::max({max_id, u, v});
            edges.emplace_back(u, v);
        }
        lists.push_back(std::move(edges));
    }
    std::size_t n_slots = std::max<std::size_t>(n_slots_hint,
                                                static_cast<std::size_t>(max_id) + 1);
    std::vector<GraphSnapshot> snaps;
    for (std::size_t t = 0; t < lists.size(); ++t)
        snaps.emplace_back(n_slots, std::move(lists[t]), static_cast<int>(t));
    return snaps;
}

// ---- node label file: `v label_int` per line ----

inline std::vector<int> read_label_file(const std::string& path, std::size_t n_slots) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open label file: " + path);
    std::vector<int> labels(n_slots, 0);
    std::vector<char> seen(n_slots, 0);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::size_t v;
        int label;
        if (!(ls >> v >> label))
            throw input_error(path + ":" + std::to_string(lineno) + ": malformed label line");
        if (v >= n_slots)
            throw input_error(path + ":" + std::to_string(lineno) + ": node id out of range");
        labels[v] = label;
        seen[v] = 1;
    }
    for (std::size_t v = 0; v < n_slots; ++v)
        if (!seen[v]) throw input_error(path + ": missing label for node " + std::to_string(v));
    return labels;
}

inline void write_label_file(const std::string& path, const std::vector<int>& labels) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write label file: " + path);
    for (std::size_t v = 0; v < labels.size(); ++v) out << v << ' ' << labels[v] << '\n';
}

// ---- embedding file: `N d`, then `node_id v_1 ... v_d` at 17 digits ----

inline void write_embedding_file(const std::string& path, const Matrix& z) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write embedding file: " + path);
    out << z.rows() << ' ' << z.cols() << '\n';
    for (std::size_t i = 0; i < z.rows(); ++i) {
        out << i;
        for (std::size_t j = 0; j < z.cols(); ++j) out << ' ' << format_double(z(i, j));
        out << '\n';
    }
}

inline Matrix read_embedding_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open embedding file: " + path);
    std::size_t n, d;
    if (!(in >> n >> d)) throw input_error(path + ": malformed embedding header");
    Matrix z(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t id;
        if (!(in >> id) || id >= n) throw input_error(path + ": bad node id in row");
        for (std::size_t j = 0; j < d; ++j)
            if (!(in >> z(id, j))) throw input_error(path + ": truncated embedding row");
    }
    return z;
}

// ---- parameter checkpoint: `d K activation`, W_0..W_K, optionally W_s ----

inline void write_checkpoint(const std::string& path, const DyGcnParams& p) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write checkpoint: " + path);
    out << p.dim() << ' ' << p.max_order() << ' ' << to_string(p.activation) << '\n';
    auto dump = [&](const Matrix& m) {
        for (std::size_t i = 0; i < m.rows(); ++i) {
            for (std::size_t j = 0; j < m.cols(); ++j)
                out << (j ? " " : "") << format_double(m(i, j));
            out << '\n';
        }
    };
    dump(p.w0);
    for (const Matrix& m : p.wk) dump(m);
    if (!p.ws.empty()) dump(p.ws);
}

inline DyGcnParams read_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open checkpoint: " + path);
    std::size_t d;
    int k;
    std::string act;
    if (!(in >> d >> k >> act)) throw input_error(path + ": malformed checkpoint header");
    DyGcnParams p;
    p.activation = activation_from_string(act);
    auto read_matrix = [&]() {
        Matrix m(d, d);
        for (double& x : m.data())
            if (!(in >> x)) throw input_error(path + ": truncated checkpoint");
        return m;
    };
    p.w0 = read_matrix();
    for (int i = 0; i < k; ++i) p.wk.push_back(read_matrix());
    double probe;
    if (in >> probe) {  // trailing floats are W_s
        Matrix ws(d, d);
        ws.data()[0] = probe;
        for (std::size_t i = 1; i < ws.data().size(); ++i)
            if (!(in >> ws.data()[i])) throw input_error(path + ": truncated W_s block");
        p.ws = std::move(ws);
    }
    p.validate();
    return p;
}

// ---- GCN layer file (bootstrap layers for Z^0) ----

inline void write_gcn_layers(const std::string& path,
                             const std::vector<GcnLayerParams>& layers) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write GCN layer file: " + path);
    out << layers.size() << '\n';
    for (const GcnLayerParams& l : layers) {
        out << l.weight.rows() << ' ' << l.weight.cols() << ' ' << to_string(l.activation)
            << '\n';
        for (std::size_t i = 0; i < l.weight.rows(); ++i) {
            for (std::size_t j = 0; j < l.weight.cols(); ++j)
                out << (j ? " " : "") << format_double(l.weight(i, j));
            out << '\n';
        }
    }
}

inline std::vector<GcnLayerParams> read_gcn_layers(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open GCN layer file: " + path);
    std::size_t n;
    if (!(in >> n) || n == 0) throw input_error(path + ": malformed GCN layer header");
    std::vector<GcnLayerParams> layers(n);
    for (GcnLayerParams& l : layers) {
        std::size_t r, c;
        std::string act;
        if (!(in >> r >> c >> act)) throw input_error(path + ": malformed layer header");
        l.activation = activation_from_string(act);
        l.weight = Matrix(r, c);
        for (double& x : l.weight.data())
            if (!(in >> x)) throw input_error(path + ": truncated layer matrix");
    }
    return layers;
}

// ---- flat key=value config ----

using KeyValueConfig = std::map<std::string, std::string>;

inline KeyValueConfig read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open config file: " + path);
    KeyValueConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0)
            throw input_error(path + ":" + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            std::size_t a = s.find_first_not_of(" \t\r");
            std::size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw input_error(path + ":" + std::to_string(lineno) + ": expected key=value");
        cfg[key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

// Rejects keys outside the allowed set.
inline void check_config_keys(const KeyValueConfig& cfg,
                              const std::vector<std::string>& allowed,
                              const std::string& context) {
    for (const auto& [key, _] : cfg)
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw input_error(context + ": unknown config key: " + key);
}

// ---- metric records: `task variant t metric value` ----

struct MetricRecord {
    std::string task;
    std::string variant;
    int t = 0;
    std::string metric;
    double value = 0.0;
};

inline void write_metric_records(const std::string& path,
                                 const std::vector<MetricRecord>& records) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write metric file: " + path);
    for (const MetricRecord& r : records)
        out << r.task << ' ' << r.variant << ' ' << r.t << ' ' << r.metric << ' '
            << format_double(r.value) << '\n';
}

inline std::vector<MetricRecord> read_metric_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open metric file: " + path);
    std::vector<MetricRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        MetricRecord r;
        if (!(ls >> r.task >> r.variant >> r.t >> r.metric >> r.value))
            throw input_error(path + ":" + std::to_string(lineno) + ": malformed record");
        records.push_back(std::move(r));
    }
    return records;
}

inline void write_metric_summary_csv(const std::string& path,
                                     const std::vector<MetricRecord>& records) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write summary: " + path);
    out << "task,variant,t,metric,value\n";
    for (const MetricRecord& r : records)
        out << r.task << ',' << r.variant << ',' << r.t << ',' << r.metric << ','
            << format_double(r.value) << '\n';
}

}  // namespace dygcn
