#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "voroblocks/voroblocks.hpp"

namespace {

using voroblocks::RunConfig;

struct CommonOpts {
    std::string config_path;
    std::string input;
    int dim = 2;
    std::string bounds;
    double bounds_expand = 0.05;
    std::string quantum;
    double penalty = 0.0;
    double threshold = 2.0;
    std::string grid;
    std::uint64_t seed = 0;
    bool jitter = false;
    std::string out_dir = ".";
    bool emit_history = false;
    bool emit_cells = false;
    std::string adjacency = "vertex";
    std::uint64_t max_steps = 0;
};

bool given(const CLI::App* sub, const std::string& name) {
    const CLI::Option* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
}

std::vector<double> parse_number_list(const std::string& s, const std::string& flag) {
    std::vector<double> out;
    std::string cur;
    auto flush = [&] {
        double v = 0.0;
        if (!voroblocks::detail::parse_double_token(cur, v))
            throw voroblocks::ConfigError(flag + ": bad number '" + cur + "'");
        out.push_back(v);
        cur.clear();
    };
    for (const char c : s) {
        if (c == ',')
            flush();
        else if (c != ' ')
            cur += c;
    }
    flush();
    return out;
}

void add_geometry_flags(CLI::App* sub, CommonOpts& o) {
    sub->add_option("-c,--config", o.config_path, "JSON config file; flags override its values");
    sub->add_option("-i,--input", o.input, "input CSV of points");
    sub->add_option("-d,--dim", o.dim, "dimension of the data (1 or 2)");
    sub->add_option("--bounds", o.bounds,
                    "'auto' or lo,hi per dimension (x0,x1[,y0,y1])");
    sub->add_option("--bounds-expand", o.bounds_expand,
                    "per-side expansion fraction for auto bounds");
    sub->add_option("--quantum", o.quantum, "'auto' or one quantum per dimension (dx[,dy])");
    sub->add_option("--seed", o.seed, "seed for duplicate jitter");
    sub->add_flag("--jitter", o.jitter, "displace duplicate points instead of rejecting them");
    sub->add_option("--adjacency", o.adjacency, "cell adjacency rule: vertex or edge")
        ->check(CLI::IsMember({"vertex", "edge"}));
    sub->add_option("-o,--out", o.out_dir, "output directory");
}

RunConfig make_config(const CLI::App* sub, const CommonOpts& o) {
    RunConfig cfg;
    if (given(sub, "--config")) cfg = voroblocks::load_run_config_file(o.config_path);
    if (given(sub, "--input")) cfg.input = o.input;
    if (given(sub, "--dim")) cfg.dim = o.dim;
    if (given(sub, "--bounds")) {
        if (o.bounds == "auto") {
            cfg.bounds_auto = true;
        } else {
            const auto v = parse_number_list(o.bounds, "--bounds");
            if (static_cast<int>(v.size()) != 2 * cfg.dim)
                throw voroblocks::ConfigError("--bounds: expected " +
                                              std::to_string(2 * cfg.dim) + " numbers");
            cfg.bounds_auto = false;
            for (int d = 0; d < cfg.dim; ++d) cfg.bounds[d] = {v[2 * d], v[2 * d + 1]};
        }
    }
    if (given(sub, "--bounds-expand")) cfg.bounds_expand = o.bounds_expand;
    if (given(sub, "--quantum")) {
        if (o.quantum == "auto") {
            cfg.quantum_auto = true;
        } else {
            const auto v = parse_number_list(o.quantum, "--quantum");
            if (static_cast<int>(v.size()) != cfg.dim)
                throw voroblocks::ConfigError("--quantum: expected " + std::to_string(cfg.dim) +
                                              " numbers");
            cfg.quantum_auto = false;
            for (int d = 0; d < cfg.dim; ++d) cfg.quantum[d] = v[d];
        }
    }
    if (given(sub, "--penalty")) cfg.penalty = o.penalty;
    if (given(sub, "--threshold")) cfg.threshold_ratio = o.threshold;
    if (given(sub, "--grid")) {
        const auto v = parse_number_list(o.grid, "--grid");
        if (static_cast<int>(v.size()) != cfg.dim)
            throw voroblocks::ConfigError("--grid: expected " + std::to_string(cfg.dim) +
                                          " numbers");
        cfg.emit_grid = true;
        for (int d = 0; d < cfg.dim; ++d) cfg.grid[d] = static_cast<int>(v[d]);
    }
    if (given(sub, "--seed")) cfg.seed = o.seed;
    if (given(sub, "--jitter")) cfg.jitter = o.jitter;
    if (given(sub, "--out")) cfg.out_dir = o.out_dir;
    if (given(sub, "--emit-history")) cfg.emit_history = o.emit_history;
    if (given(sub, "--emit-cells")) cfg.emit_cells = o.emit_cells;
    if (given(sub, "--adjacency"))
        cfg.adjacency = o.adjacency == "edge" ? voroblocks::AdjacencyRule::SharedEdge
                                              : voroblocks::AdjacencyRule::SharedVertex;
    if (given(sub, "--max-steps")) cfg.max_steps = o.max_steps;
    voroblocks::validate_config(cfg);
    return cfg;
}

int do_run(const CLI::App* sub, const CommonOpts& o) {
    const RunConfig cfg = make_config(sub, o);
    const voroblocks::PipelineResult res = voroblocks::run_pipeline(cfg);
    std::cout << res.summary << '\n';
    for (const auto& name : res.artifacts) std::cout << "wrote " << cfg.out_dir << '/' << name << '\n';
    return 0;
}

int do_tessellate(const CLI::App* sub, const CommonOpts& o) {
    RunConfig cfg = make_config(sub, o);
    if (cfg.input.empty()) throw voroblocks::ConfigError("tessellate: an input file is required");
    std::vector<voroblocks::Point> pts = voroblocks::read_points_csv(cfg.input, cfg.dim);
    if (pts.empty()) throw voroblocks::EmptyInputError(cfg.input + ": no data rows");
    const voroblocks::CellComplex cc = voroblocks::prepare_complex(cfg, std::move(pts));

    std::filesystem::create_directories(cfg.out_dir);
    std::vector<std::string> artifacts;
    voroblocks::detail::write_artifact(cfg.out_dir, "cells.json", artifacts,
                                       [&](std::ostream& os) { voroblocks::write_cells_json(os, cc); });

    const voroblocks::QuantizationReport rep = voroblocks::validate_quantization(cc);
    std::cout << cc.cells.size() << " cells, total volume "
              << voroblocks::format_double(cc.total_volume_quanta) << " quanta\n";
    if (rep.pass) {
        std::cout << "quantization: pass (smallest cell "
                  << voroblocks::format_double(rep.min_volume_quanta) << " quanta)\n";
    } else {
        std::cout << "quantization: FAIL, " << rep.failing_cells.size()
                  << " cell(s) below one quantum; suggested quantum:";
        for (int d = 0; d < cfg.dim; ++d)
            std::cout << ' ' << voroblocks::format_double(rep.suggested_quantum[d]);
        std::cout << '\n';
    }
    std::cout << "wrote " << cfg.out_dir << "/cells.json\n";
    return 0;
}

int do_oracle(const CLI::App* sub, const CommonOpts& o) {
    RunConfig cfg = make_config(sub, o);
    if (cfg.input.empty()) throw voroblocks::ConfigError("oracle: an input file is required");
    std::vector<voroblocks::Point> pts = voroblocks::read_points_csv(cfg.input, cfg.dim);
    if (pts.empty()) throw voroblocks::EmptyInputError(cfg.input + ": no data rows");
    const voroblocks::CellComplex cc = voroblocks::prepare_complex(cfg, std::move(pts));

    const voroblocks::OracleResult oracle = voroblocks::exhaustive_optimum(cc, cfg.penalty);
    voroblocks::CoalesceResult greedy = voroblocks::run_coalescence(
        voroblocks::init_partition(cc, cfg.penalty), {cfg.max_steps ? cfg.max_steps
                                                                    : voroblocks::kNoStepLimit});

    std::vector<std::vector<int>> greedy_blocks;
    for (const auto& [root, cells] : greedy.partition.members_by_block())
        greedy_blocks.push_back(cells);

    std::cout << "cells: " << cc.cells.size() << '\n';
    std::cout << "connected partitions: " << oracle.n_partitions << '\n';
    std::cout << "oracle total log posterior: "
              << voroblocks::format_double(oracle.total_log_posterior)
              << (oracle.exact ? " (exact arithmetic)" : " (floating point)") << '\n';
    std::cout << "greedy total log posterior: "
              << voroblocks::format_double(greedy.partition.total_log_posterior()) << '\n';
    std::cout << "gap (oracle - greedy): "
              << voroblocks::format_double(oracle.total_log_posterior -
                                           greedy.partition.total_log_posterior())
              << '\n';
    std::cout << "structures match: " << (greedy_blocks == oracle.blocks ? "yes" : "no")
              << '\n';
    return 0;
}

int do_generate(const CLI::App* sub, const std::string& spec_path, std::uint64_t seed,
                const std::string& out_dir) {
    voroblocks::SyntheticSpec spec = voroblocks::load_synthetic_spec_file(spec_path);
    if (given(sub, "--seed")) spec.seed = seed;
    const voroblocks::SyntheticResult res = voroblocks::generate_synthetic(spec);

    std::filesystem::create_directories(out_dir);
    std::vector<std::string> artifacts;
    voroblocks::detail::write_artifact(out_dir, "points.csv", artifacts, [&](std::ostream& os) {
        voroblocks::write_points_csv(os, res.points, spec.dim);
    });
    voroblocks::detail::write_artifact(out_dir, "ground_truth.json", artifacts,
                                       [&](std::ostream& os) {
                                           voroblocks::write_ground_truth_json(os, spec, res);
                                       });
    if (res.points.empty()) std::cerr << "warning: zero points generated\n";
    std::cout << "generated " << res.points.size() << " points (expected "
              << voroblocks::format_double(voroblocks::expected_count(spec)) << ")\n";
    for (const auto& name : artifacts) std::cout << "wrote " << out_dir << '/' << name << '\n';
    return 0;
}

template <typename Fn>
int with_exit_codes(Fn&& body) {
    try {
        return body();
    } catch (const voroblocks::QuantizationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        std::cerr << "suggested quantum:";
        for (const double q : e.suggested_quantum)
            if (q > 0.0) std::cerr << ' ' << voroblocks::format_double(q);
        std::cerr << '\n';
        return 3;
    } catch (const voroblocks::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const voroblocks::TooLargeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const voroblocks::OutOfBoundsError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const voroblocks::InvalidMergeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const voroblocks::Error& e) {
        // remaining library errors are input-side: parse, config, spec, duplicates, empty
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Segments 1D/2D point data into constant-density blocks over a Voronoi "
                 "tessellation and groups dense blocks into clusters"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    CLI::App* run = app.add_subcommand("run", "full pipeline: tessellate, coalesce, cluster");
    add_geometry_flags(run, run_opts);
    run->add_option("--penalty", run_opts.penalty, "constant log prior per block");
    run->add_option("--threshold", run_opts.threshold,
                    "cluster threshold as a multiple of the background density");
    run->add_option("--grid", run_opts.grid, "density raster resolution (nx[,ny])");
    run->add_flag("--emit-history", run_opts.emit_history, "write history.json");
    run->add_flag("--emit-cells", run_opts.emit_cells, "write cells.json");
    run->add_option("--max-steps", run_opts.max_steps, "stop coalescence after this many merges");

    CommonOpts tess_opts;
    CLI::App* tess = app.add_subcommand("tessellate", "geometry only: cells.json plus a "
                                                      "quantization report");
    add_geometry_flags(tess, tess_opts);

    CommonOpts oracle_opts;
    CLI::App* orc = app.add_subcommand("oracle", "compare greedy against the exhaustive optimum "
                                                 "on a small instance");
    add_geometry_flags(orc, oracle_opts);
    orc->add_option("--penalty", oracle_opts.penalty, "constant log prior per block");
    orc->add_option("--max-steps", oracle_opts.max_steps,
                    "stop coalescence after this many merges");

    std::string gen_spec, gen_out = ".";
    std::uint64_t gen_seed = 0;
    CLI::App* gen = app.add_subcommand("generate", "draw a synthetic Poisson point set");
    gen->add_option("--spec", gen_spec, "synthetic spec JSON file")->required();
    gen->add_option("--seed", gen_seed, "override the spec's seed");
    gen->add_option("-o,--out", gen_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    return with_exit_codes([&]() -> int {
        if (run->parsed()) return do_run(run, run_opts);
        if (tess->parsed()) return do_tessellate(tess, tess_opts);
        if (orc->parsed()) return do_oracle(orc, oracle_opts);
        if (gen->parsed()) return do_generate(gen, gen_spec, gen_seed, gen_out);
        return 2;
    });
}
