#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "oracles.hpp"

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "dygcn/io.hpp"
#include "dygcn/sbm.hpp"

using namespace dygcn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("dygcn_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& body) {
    std::ofstream f(path);
    f << body;
}

}  // namespace

TEST_CASE("event file round trip") {
    SbmConfig cfg;
    cfg.n_nodes = 40;
    cfg.steps = 4;
    cfg.churn_add = 5;
    cfg.churn_remove = 5;
    cfg.seed = 8;
    SbmWorkload w = generate_sbm(cfg);
    TempDir tmp;
    write_event_file(tmp.file("events.txt"), w.snapshots);
    TemporalEvents ev = read_event_file(tmp.file("events.txt"), 40);
    REQUIRE(ev.snapshots.size() == w.snapshots.size());
    for (std::size_t t = 0; t < ev.snapshots.size(); ++t) {
        CHECK(ev.snapshots[t].edges() == w.snapshots[t].edges());
        CHECK(ev.snapshots[t].n_slots() == 40);
    }
}

TEST_CASE("event file error reporting") {
    TempDir tmp;
    SUBCASE("malformed line") {
        write_text(tmp.file("e.txt"), "0 1 2 +\n0 bad\n");
        CHECK_THROWS_AS(read_event_file(tmp.file("e.txt")), input_error);
    }
    SUBCASE("unsorted times") {
        write_text(tmp.file("e.txt"), "1 0 1 +\n0 1 2 +\n");
        CHECK_THROWS_AS(read_event_file(tmp.file("e.txt")), input_error);
    }
    SUBCASE("self loop") {
        write_text(tmp.file("e.txt"), "0 3 3 +\n");
        CHECK_THROWS_AS(read_event_file(tmp.file("e.txt")), input_error);
    }
    SUBCASE("duplicate add") {
        write_text(tmp.file("e.txt"), "0 0 1 +\n1 0 1 +\n");
        CHECK_THROWS_AS(read_event_file(tmp.file("e.txt")), input_error);
    }
    SUBCASE("removing an absent edge") {
        write_text(tmp.file("e.txt"), "0 0 1 +\n1 2 3 -\n");
        CHECK_THROWS_AS(read_event_file(tmp.file("e.txt")), input_error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(read_event_file(tmp.file("absent.txt")), input_error);
    }
}

TEST_CASE("embedding file round trip is bit exact") {
    Rng rng = make_rng(61, 0);
    Matrix z = oracle::random_matrix(20, 7, rng, 3.0);
    z(0, 0) = 1.0 / 3.0;
    z(1, 1) = -1e-17;
    TempDir tmp;
    write_embedding_file(tmp.file("z.txt"), z);
    Matrix back = read_embedding_file(tmp.file("z.txt"));
    REQUIRE(back.rows() == z.rows());
    REQUIRE(back.cols() == z.cols());
    CHECK(max_abs_diff(z, back) == 0.0);
}

TEST_CASE("checkpoint round trip, with and without W_s") {
    Rng rng = make_rng(62, 0);
    DyGcnParams p;
    p.w0 = oracle::random_matrix(5, 5, rng);
    p.wk.push_back(oracle::random_matrix(5, 5, rng));
    p.wk.push_back(oracle::random_matrix(5, 5, rng));
    p.activation = Activation::relu;
    TempDir tmp;

    SUBCASE("without W_s") {
        write_checkpoint(tmp.file("ck.txt"), p);
        DyGcnParams back = read_checkpoint(tmp.file("ck.txt"));
        CHECK(back.ws.empty());
        CHECK(back.activation == Activation::relu);
        CHECK(max_abs_diff(back.w0, p.w0) == 0.0);
        REQUIRE(back.wk.size() == 2);
        CHECK(max_abs_diff(back.wk[1], p.wk[1]) == 0.0);
    }
    SUBCASE("with W_s") {
        p.ws = oracle::random_matrix(5, 5, rng);
        write_checkpoint(tmp.file("ck.txt"), p);
        DyGcnParams back = read_checkpoint(tmp.file("ck.txt"));
        REQUIRE_FALSE(back.ws.empty());
        CHECK(max_abs_diff(back.ws, p.ws) == 0.0);
    }
}

TEST_CASE("gcn layer file round trip") {
    Rng rng = make_rng(63, 0);
    std::vector<GcnLayerParams> layers(2);
    layers[0].weight = oracle::random_matrix(3, 6, rng);
    layers[0].activation = Activation::relu;
    layers[1].weight = oracle::random_matrix(6, 6, rng);
    layers[1].activation = Activation::identity;
    TempDir tmp;
    write_gcn_layers(tmp.file("g.txt"), layers);
    auto back = read_gcn_layers(tmp.file("g.txt"));
    REQUIRE(back.size() == 2);
    CHECK(back[0].activation == Activation::relu);
    CHECK(back[1].activation == Activation::identity);
    CHECK(max_abs_diff(back[0].weight, layers[0].weight) == 0.0);
    CHECK(max_abs_diff(back[1].weight, layers[1].weight) == 0.0);
}

TEST_CASE("label file round trip and validation") {
    TempDir tmp;
    std::vector<int> labels{0, 1, 1, 0, 2};
    write_label_file(tmp.file("l.txt"), labels);
    CHECK(read_label_file(tmp.file("l.txt"), 5) == labels);
    SUBCASE("missing label") {
        write_text(tmp.file("bad.txt"), "0 0\n1 1\n");
        CHECK_THROWS_AS(read_label_file(tmp.file("bad.txt"), 3), input_error);
    }
}

TEST_CASE("snapshot directory reader") {
    TempDir tmp;
    write_text(tmp.file("snap_0.edges"), "0 1\n1 2\n");
    write_text(tmp.file("snap_1.edges"), "0 1\n");
    auto snaps = read_snapshot_dir(tmp.path.string(), 4);
    REQUIRE(snaps.size() == 2);
    CHECK(snaps[0].edges().size() == 2);
    CHECK(snaps[1].edges().size() == 1);
    CHECK(snaps[1].time_index() == 1);
    SUBCASE("gap in indices") {
        write_text(tmp.file("snap_3.edges"), "0 1\n");
        CHECK_THROWS_AS(read_snapshot_dir(tmp.path.string(), 4), input_error);
    }
}

TEST_CASE("key=value config parsing and unknown key rejection") {
    TempDir tmp;
    write_text(tmp.file("c.cfg"), "# comment\nepochs = 10\nlearning_rate=0.01\n\n");
    KeyValueConfig cfg = read_config_file(tmp.file("c.cfg"));
    CHECK(cfg.at("epochs") == "10");
    CHECK(cfg.at("learning_rate") == "0.01");
    CHECK_NOTHROW(check_config_keys(cfg, {"epochs", "learning_rate", "seed"}, "test"));
    CHECK_THROWS_AS(check_config_keys(cfg, {"epochs"}, "test"), input_error);
}

TEST_CASE("metric records round trip and csv summary") {
    TempDir tmp;
    std::vector<MetricRecord> recs{{"link_pred", "dygcn", 3, "auc", 0.91},
                                   {"link_pred", "spectral", 3, "auc", 0.93}};
    write_metric_records(tmp.file("m.txt"), recs);
    auto back = read_metric_records(tmp.file("m.txt"));
    REQUIRE(back.size() == 2);
    CHECK(back[0].variant == "dygcn");
    CHECK(back[1].value == 0.93);
    write_metric_summary_csv(tmp.file("m.csv"), recs);
    CHECK(fs::exists(tmp.file("m.csv")));
}

TEST_CASE("format_double survives a parse round trip") {
    for (double v : {1.0 / 3.0, 1e-300, -2.5, 0.0, 123456789.123456789}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}
