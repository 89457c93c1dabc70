#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

// Integration tests drive the installed binary through a shell, so every
// assertion here is about observable behaviour: exit codes, stdout text,
// and the bytes of the artifacts.  CLI_PATH and GOLDEN_DIR come from CMake.

namespace fs = std::filesystem;

namespace {

const std::string cli = CLI_PATH;
const std::string golden = GOLDEN_DIR;

struct CmdResult {
    int code = -1;
    std::string output;
};

CmdResult run_cmd(const std::string& cmd) {
    std::FILE* pipe = ::popen((cmd + " 2>&1").c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    const int status = ::pclose(pipe);
    CmdResult res;
    res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    res.output = std::move(out);
    return res;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

fs::path fresh_dir(const std::string& name) {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path() /
                         ("voroblocks_cli_" + std::to_string(::getpid()) + "_" + name + "_" +
                          std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void require_same_bytes(const fs::path& got, const fs::path& want) {
    INFO("comparing " << got << " against " << want);
    REQUIRE(slurp(got) == slurp(want));
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream out(p, std::ios::binary);
    out << text;
    return p;
}

}  // namespace

TEST_CASE("help lists the four subcommands", "[cli]") {
    const CmdResult res = run_cmd(cli + " --help");
    REQUIRE(res.code == 0);
    REQUIRE_THAT(res.output, Catch::Matchers::ContainsSubstring("run"));
    REQUIRE_THAT(res.output, Catch::Matchers::ContainsSubstring("tessellate"));
    REQUIRE_THAT(res.output, Catch::Matchers::ContainsSubstring("oracle"));
    REQUIRE_THAT(res.output, Catch::Matchers::ContainsSubstring("generate"));
}

TEST_CASE("bad flags and missing input are input errors", "[cli]") {
    REQUIRE(run_cmd(cli + " run --no-such-flag").code == 2);
    REQUIRE(run_cmd(cli).code == 2);

    const CmdResult res = run_cmd(cli + " run");
    REQUIRE(res.code == 2);
    REQUIRE_THAT(res.output, Catch::Matchers::ContainsSubstring("error:"));
}

TEST_CASE("run reproduces the 1d golden artifacts byte for byte", "[cli]") {
    const fs::path out = fresh_dir("run1d");
    const fs::path input = fs::path(golden) / "staircase" / "points.csv";

    const CmdResult res = run_cmd(cli + " run -i " + q(input) +
                                  " -d 1 --bounds 0,10 --quantum 0.5"
                                  " --emit-history --emit-cells -o " +
                                  q(out));
    INFO(res.output);
    REQUIRE(res.code == 0);
    REQUIRE_THAT(res.output,
                 Catch::Matchers::ContainsSubstring("4 points -> 2 blocks -> 1 clusters"));
    REQUIRE_THAT(res.output, Catch::Matchers::ContainsSubstring("wrote"));

    for (const char* name : {"partition.json", "clusters.json", "history.json", "cells.json"})
        require_same_bytes(out / name, fs::path(golden) / "staircase" / name);
}

TEST_CASE("tessellate prints a quantization report and the same cells", "[cli]") {
    const fs::path out = fresh_dir("tess");
    const fs::path input = fs::path(golden) / "staircase" / "points.csv";

    const CmdResult res = run_cmd(cli + " tessellate -i " + q(input) +
                                  " -d 1 --bounds 0,10 --quantum 0.5 -o " + q(out));
    INFO(res.output);
    REQUIRE(res.code == 0);
    REQUIRE_THAT(res.output,
                 Catch::Matchers::ContainsSubstring("4 cells, total volume 20 quanta"));
    REQUIRE_THAT(res.output,
                 Catch::Matchers::ContainsSubstring("quantization: pass (smallest cell 2 quanta)"));
    require_same_bytes(out / "cells.json", fs::path(golden) / "staircase" / "cells.json");
}

TEST_CASE("quantization failure exits 3 and suggests a workable quantum", "[cli]") {
    const fs::path dir = fresh_dir("quant");
    const fs::path input = write_file(dir, "close.csv", "x\n1\n3\n");

    const CmdResult res = run_cmd(cli + " run -i " + q(input) +
                                  " -d 1 --bounds 0,10 --quantum 5 -o " + q(dir / "out"));
    INFO(res.output);
    REQUIRE(res.code == 3);
    REQUIRE_THAT(res.output, Catch::Matchers::ContainsSubstring("suggested quantum: 2"));
}

TEST_CASE("empty input exits 2", "[cli]") {
    const fs::path dir = fresh_dir("empty");
    const fs::path input = write_file(dir, "empty.csv", "x,y\n");

    const CmdResult res = run_cmd(cli + " run -i " + q(input) + " -o " + q(dir / "out"));
    REQUIRE(res.code == 2);
    REQUIRE_THAT(res.output, Catch::Matchers::ContainsSubstring("no data rows"));
}

TEST_CASE("generate matches the committed fixture and honours the seed", "[cli]") {
    const fs::path spec = fs::path(golden) / "twodisk" / "spec.json";

    const fs::path out7 = fresh_dir("gen7");
    const CmdResult res = run_cmd(cli + " generate --spec " + q(spec) + " -o " + q(out7));
    INFO(res.output);
    REQUIRE(res.code == 0);
    REQUIRE_THAT(res.output, Catch::Matchers::ContainsSubstring("generated"));
    require_same_bytes(out7 / "points.csv", fs::path(golden) / "twodisk" / "points.csv");
    require_same_bytes(out7 / "ground_truth.json",
                       fs::path(golden) / "twodisk" / "ground_truth.json");

    const fs::path out8 = fresh_dir("gen8");
    REQUIRE(run_cmd(cli + " generate --spec " + q(spec) + " --seed 8 -o " + q(out8)).code == 0);
    REQUIRE(slurp(out8 / "points.csv") != slurp(out7 / "points.csv"));
}

TEST_CASE("zero rate everywhere warns and writes a header-only csv", "[cli]") {
    const fs::path dir = fresh_dir("zero");
    const fs::path spec = write_file(dir, "spec.json",
                                     "{\"dim\": 2, \"box\": [[0, 1], [0, 1]],"
                                     " \"background_rate\": 0, \"hotspots\": [], \"seed\": 1}\n");

    const CmdResult res = run_cmd(cli + " generate --spec " + q(spec) + " -o " + q(dir / "out"));
    INFO(res.output);
    REQUIRE(res.code == 0);
    REQUIRE_THAT(res.output, Catch::Matchers::ContainsSubstring("warning: zero points generated"));
    REQUIRE(slurp(dir / "out" / "points.csv") == "x,y\n");
}

TEST_CASE("run recovers both clusters from the generated two-disk data", "[cli]") {
    const fs::path out = fresh_dir("run2d");
    const fs::path input = fs::path(golden) / "twodisk" / "points.csv";

    const CmdResult res = run_cmd(cli + " run -i " + q(input) +
                                  " -d 2 --bounds 0,5,0,5 --quantum auto"
                                  " --penalty -5 --threshold 2 -o " +
                                  q(out));
    INFO(res.output);
    REQUIRE(res.code == 0);
    REQUIRE_THAT(res.output, Catch::Matchers::ContainsSubstring("-> 2 clusters"));
    require_same_bytes(out / "clusters.json", fs::path(golden) / "twodisk" / "clusters.json");
}

TEST_CASE("oracle subcommand confirms the greedy result on a small instance", "[cli]") {
    const fs::path input = fs::path(golden) / "staircase" / "points.csv";

    const CmdResult res =
        run_cmd(cli + " oracle -i " + q(input) + " -d 1 --bounds 0,10 --quantum 0.5");
    INFO(res.output);
    REQUIRE(res.code == 0);
    REQUIRE_THAT(res.output, Catch::Matchers::ContainsSubstring("connected partitions: 8"));
    REQUIRE_THAT(res.output, Catch::Matchers::ContainsSubstring("(exact arithmetic)"));
    REQUIRE_THAT(res.output, Catch::Matchers::ContainsSubstring("structures match: yes"));

    // exact rational log vs a sum of lgamma calls, so the gap is fp noise
    const std::string tag = "gap (oracle - greedy): ";
    const auto pos = res.output.find(tag);
    REQUIRE(pos != std::string::npos);
    const double gap = std::strtod(res.output.c_str() + pos + tag.size(), nullptr);
    REQUIRE(std::abs(gap) < 1e-9);
}

TEST_CASE("config file drives a run and flags override it", "[cli]") {
    const fs::path dir = fresh_dir("config");
    const fs::path input = write_file(dir, "points.csv", "x\n1\n2\n3\n9\n");
    const fs::path base_out = dir / "base";
    const fs::path override_out = dir / "override";

    std::ostringstream cfg;
    cfg << "{\n"
        << "  \"dim\": 1,\n"
        << "  \"input\": \"" << input.string() << "\",\n"
        << "  \"bounds\": [[0, 10]],\n"
        << "  \"quantum\": [0.5],\n"
        << "  \"penalty\": 0,\n"
        << "  \"out_dir\": \"" << base_out.string() << "\"\n"
        << "}\n";
    const fs::path cfg_path = write_file(dir, "run.json", cfg.str());

    const CmdResult base = run_cmd(cli + " run -c " + q(cfg_path));
    INFO(base.output);
    REQUIRE(base.code == 0);
    REQUIRE_THAT(base.output,
                 Catch::Matchers::ContainsSubstring("4 points -> 2 blocks -> 1 clusters"));
    REQUIRE(fs::exists(base_out / "partition.json"));

    // a strongly negative penalty collapses everything into one block
    const CmdResult overridden =
        run_cmd(cli + " run -c " + q(cfg_path) + " --penalty -100 -o " + q(override_out));
    INFO(overridden.output);
    REQUIRE(overridden.code == 0);
    REQUIRE_THAT(overridden.output,
                 Catch::Matchers::ContainsSubstring("4 points -> 1 blocks -> 0 clusters"));
    REQUIRE(fs::exists(override_out / "partition.json"));
}
