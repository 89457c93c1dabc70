#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "voroblocks/io.hpp"
#include "voroblocks/pipeline.hpp"

using namespace voroblocks;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace {

std::filesystem::path fresh_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() /
                     ("voroblocks_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig staircase_config(const std::filesystem::path& dir) {
    std::ofstream csv(dir / "points.csv");
    csv << "x\n1\n2\n3\n9\n";
    csv.close();
    RunConfig cfg;
    cfg.dim = 1;
    cfg.input = (dir / "points.csv").string();
    cfg.bounds_auto = false;
    cfg.bounds = {Interval{0, 10}, Interval{}};
    cfg.quantum_auto = false;
    cfg.quantum = {0.5, 1.0};
    cfg.emit_history = true;
    cfg.emit_cells = true;
    cfg.out_dir = (dir / "out").string();
    return cfg;
}

}  // namespace

TEST_CASE("doubles print with 17 significant digits and read back exactly", "[io]") {
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(-2.5) == "-2.5");
    CHECK_THROWS_AS(format_double(std::nan("")), Error);
    CHECK_THROWS_AS(format_double(HUGE_VAL), Error);

    for (double x : {1.0 / 3.0, 0.1, 123456.789, -9.87e-301, 2.5e300,
                     -11.520893634619412, 4e-17}) {
        const std::string s = format_double(x);
        CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
}

TEST_CASE("json writer layout", "[io]") {
    std::ostringstream os;
    JsonWriter w(os);
    w.begin_object();
    w.key("name").value("a \"b\"\n");
    w.key("n").value(3);
    w.key("xs").begin_array(true).value(1.5).value(2.0).end_array();
    w.key("rows").begin_array();
    w.begin_object().key("id").value(0).end_object();
    w.begin_object().key("id").value(1).end_object();
    w.end_array();
    w.key("none").null();
    w.end_object();

    CHECK(os.str() ==
          "{\n"
          "  \"name\": \"a \\\"b\\\"\\n\",\n"
          "  \"n\": 3,\n"
          "  \"xs\": [1.5, 2],\n"
          "  \"rows\": [\n"
          "    {\n"
          "      \"id\": 0\n"
          "    },\n"
          "    {\n"
          "      \"id\": 1\n"
          "    }\n"
          "  ],\n"
          "  \"none\": null\n"
          "}");
    CHECK_NOTHROW(nlohmann::json::parse(os.str()));
}

TEST_CASE("json writer rejects misuse", "[io]") {
    std::ostringstream os;
    JsonWriter w(os);
    w.begin_object();
    CHECK_THROWS_AS(w.value(1.0), Error);  // value without key
    w.key("k");
    CHECK_THROWS_AS(w.key("k2"), Error);   // key while one is pending
    CHECK_THROWS_AS(w.end_object(), Error);
}

TEST_CASE("csv reader accepts headers, comments and blank lines", "[io]") {
    std::istringstream in(
        "x,y\n"
        "# comment\n"
        "1.5, 2.5\n"
        "\n"
        "3 4\n"
        "5\t6\n");
    const auto pts = read_points_csv(in, "test", 2);
    REQUIRE(pts.size() == 3);
    CHECK(pts[0] == Point{1.5, 2.5});
    CHECK(pts[1] == Point{3.0, 4.0});
    CHECK(pts[2] == Point{5.0, 6.0});
}

TEST_CASE("csv reader handles bom and crlf", "[io]") {
    std::istringstream in("\xEF\xBB\xBFx\r\n1\r\n2\r\n");
    const auto pts = read_points_csv(in, "test", 1);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0][0] == 1.0);
    CHECK(pts[1][0] == 2.0);
}

TEST_CASE("csv reader reports the offending line", "[io]") {
    SECTION("bad token after data started") {
        std::istringstream in("1,2\nx,y\n");
        try {
            read_points_csv(in, "pts.csv", 2);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK_THAT(e.what(), ContainsSubstring("pts.csv:2"));
        }
    }
    SECTION("column count mismatch") {
        std::istringstream in("1,2\n3\n");
        CHECK_THROWS_AS(read_points_csv(in, "pts.csv", 2), ParseError);
    }
    SECTION("second header is not forgiven") {
        std::istringstream in("x,y\nx,y\n1,2\n");
        CHECK_THROWS_AS(read_points_csv(in, "pts.csv", 2), ParseError);
    }
    SECTION("missing file") {
        CHECK_THROWS_AS(read_points_csv("/nonexistent/p.csv", 2), ParseError);
    }
}

TEST_CASE("points survive a csv round trip bit for bit", "[io]") {
    const std::vector<Point> pts = {
        {0.1, 1.0 / 3.0}, {-2.75, 9.999999999999999e-3}, {1e300, -4e-17}};
    std::ostringstream os;
    write_points_csv(os, pts, 2);
    std::istringstream in(os.str());
    CHECK(read_points_csv(in, "rt", 2) == pts);
}

TEST_CASE("run config round-trips through its file format", "[io]") {
    RunConfig cfg;
    cfg.dim = 1;
    cfg.input = "data.csv";
    cfg.bounds_auto = false;
    cfg.bounds = {Interval{-1.5, 12.25}, Interval{}};
    cfg.quantum_auto = false;
    cfg.quantum = {0.125, 1.0};
    cfg.penalty = -2.5;
    cfg.threshold_ratio = 3.0;
    cfg.emit_grid = true;
    cfg.grid = {64, 0};
    cfg.seed = 99;
    cfg.jitter = true;
    cfg.out_dir = "results";
    cfg.emit_history = true;
    cfg.adjacency = AdjacencyRule::SharedEdge;
    cfg.max_steps = 7;

    std::ostringstream os;
    write_run_config(os, cfg);
    const RunConfig back = load_run_config(nlohmann::json::parse(os.str()));

    CHECK(back.dim == cfg.dim);
    CHECK(back.input == cfg.input);
    CHECK(back.bounds_auto == cfg.bounds_auto);
    CHECK(back.bounds[0].lo == cfg.bounds[0].lo);
    CHECK(back.bounds[0].hi == cfg.bounds[0].hi);
    CHECK(back.quantum_auto == cfg.quantum_auto);
    CHECK(back.quantum[0] == cfg.quantum[0]);
    CHECK(back.penalty == cfg.penalty);
    CHECK(back.threshold_ratio == cfg.threshold_ratio);
    CHECK(back.emit_grid == cfg.emit_grid);
    CHECK(back.grid[0] == cfg.grid[0]);
    CHECK(back.seed == cfg.seed);
    CHECK(back.jitter == cfg.jitter);
    CHECK(back.out_dir == cfg.out_dir);
    CHECK(back.emit_history == cfg.emit_history);
    CHECK(back.emit_cells == cfg.emit_cells);
    CHECK(back.adjacency == cfg.adjacency);
    CHECK(back.max_steps == cfg.max_steps);

    // Auto modes and the unlimited step bound round-trip too.
    RunConfig autos;
    autos.input = "d.csv";
    std::ostringstream os2;
    write_run_config(os2, autos);
    const RunConfig back2 = load_run_config(nlohmann::json::parse(os2.str()));
    CHECK(back2.bounds_auto);
    CHECK(back2.quantum_auto);
    CHECK_FALSE(back2.emit_grid);
    CHECK(back2.max_steps == kNoStepLimit);
}

TEST_CASE("config rejects unknown keys and bad values", "[io]") {
    CHECK_THROWS_AS(load_run_config(nlohmann::json::parse(R"({"dimension": 2})")),
                    ConfigError);
    CHECK_THROWS_AS(load_run_config(nlohmann::json::parse(R"({"dim": "two"})")),
                    ConfigError);
    CHECK_THROWS_AS(load_run_config(nlohmann::json::parse(R"({"bounds": [[0,1]], "dim": 2})")),
                    ConfigError);

    RunConfig bad;
    bad.threshold_ratio = 1.0;
    CHECK_THROWS_AS(validate_config(bad), ConfigError);
    bad = RunConfig{};
    bad.dim = 3;
    CHECK_THROWS_AS(validate_config(bad), ConfigError);
    bad = RunConfig{};
    bad.bounds_expand = -0.1;
    CHECK_THROWS_AS(validate_config(bad), ConfigError);
}

TEST_CASE("synthetic spec round-trips", "[io]") {
    SyntheticSpec spec;
    spec.dim = 2;
    spec.box = {Interval{0, 5}, Interval{0, 5}};
    spec.background_rate = 50.0;
    spec.hotspots = {{Hotspot::Shape::Disk, {1.5, 1.5}, 0.35, 8.0},
                     {Hotspot::Shape::Gaussian, {3.5, 3.5}, 0.2, 4.0}};
    spec.seed = 7;

    std::ostringstream os;
    write_synthetic_spec(os, spec);
    const SyntheticSpec back = load_synthetic_spec(nlohmann::json::parse(os.str()));
    CHECK(back.dim == spec.dim);
    CHECK(back.box[0].hi == 5.0);
    CHECK(back.background_rate == spec.background_rate);
    CHECK(back.seed == spec.seed);
    REQUIRE(back.hotspots.size() == 2);
    CHECK(back.hotspots[0].shape == Hotspot::Shape::Disk);
    CHECK(back.hotspots[0].center == Point{1.5, 1.5});
    CHECK(back.hotspots[0].size == 0.35);
    CHECK(back.hotspots[0].rate_multiplier == 8.0);
    CHECK(back.hotspots[1].shape == Hotspot::Shape::Gaussian);

    CHECK_THROWS_AS(load_synthetic_spec(nlohmann::json::parse(R"({"speed": 1})")),
                    InvalidSpecError);
    CHECK_THROWS_AS(
        load_synthetic_spec(nlohmann::json::parse(
            R"({"dim":2,"box":[[0,1],[0,1]],"hotspots":[{"shape":"blob","center":[0.5,0.5]}]})")),
        InvalidSpecError);
}

TEST_CASE("pipeline artifacts are internally consistent", "[io]") {
    const auto dir = fresh_dir("pipeline");
    const RunConfig cfg = staircase_config(dir);
    const PipelineResult res = run_pipeline(cfg);

    CHECK_THAT(res.summary, ContainsSubstring("4 points -> 2 blocks -> 1 clusters"));

    const auto part = nlohmann::json::parse(slurp(dir / "out" / "partition.json"));
    CHECK(part["dim"] == 1);
    CHECK(part["n_points"] == 4);
    CHECK(part["n_blocks"] == 2);
    std::int64_t n_sum = 0;
    std::set<int> seen_points;
    for (const auto& b : part["blocks"]) {
        n_sum += b["n_points"].get<std::int64_t>();
        for (int idx : b["member_points"]) CHECK(seen_points.insert(idx).second);
    }
    CHECK(n_sum == 4);
    CHECK(seen_points == std::set<int>{0, 1, 2, 3});
    CHECK_THAT(part["total_log_posterior"].get<double>(),
               WithinRel(std::log(1.0 / 100800.0), 1e-10));

    const auto clus = nlohmann::json::parse(slurp(dir / "out" / "clusters.json"));
    CHECK(clus["n_clusters"] == 1);
    CHECK(clus["block_to_cluster"].size() == 2);

    const auto hist = nlohmann::json::parse(slurp(dir / "out" / "history.json"));
    CHECK(hist["truncated"] == false);
    REQUIRE(hist["steps"].size() == 2);
    CHECK(hist["steps"][0]["block_a"] == 2);
    CHECK(hist["steps"][0]["block_b"] == 3);

    const auto cells = nlohmann::json::parse(slurp(dir / "out" / "cells.json"));
    REQUIRE(cells["cells"].size() == 4);
    CHECK(cells["n_cells"] == 4);
    CHECK(cells["cells"][0]["volume_quanta"].get<double>() == 3.0);

    std::filesystem::remove_all(dir);
}

TEST_CASE("identical runs write identical bytes", "[io]") {
    const auto dir = fresh_dir("determinism");
    RunConfig cfg = staircase_config(dir);

    cfg.out_dir = (dir / "a").string();
    run_pipeline(cfg);
    cfg.out_dir = (dir / "b").string();
    run_pipeline(cfg);

    for (const char* name : {"partition.json", "clusters.json", "history.json", "cells.json"})
        CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));

    std::filesystem::remove_all(dir);
}

TEST_CASE("pipeline input errors", "[io]") {
    const auto dir = fresh_dir("errors");
    RunConfig cfg;
    cfg.dim = 1;
    cfg.out_dir = (dir / "out").string();

    cfg.input = "";
    CHECK_THROWS_AS(run_pipeline(cfg), ConfigError);

    const auto empty = dir / "empty.csv";
    std::ofstream(empty) << "x\n";
    cfg.input = empty.string();
    CHECK_THROWS_AS(run_pipeline(cfg), EmptyInputError);

    std::filesystem::remove_all(dir);
}
