#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "voroblocks/clusters.hpp"
#include "voroblocks/coalesce.hpp"
#include "voroblocks/errors.hpp"
#include "voroblocks/geometry.hpp"
#include "voroblocks/io.hpp"

namespace voroblocks {

/// Bounds resolution, optional duplicate jitter, tessellation, and the
/// auto-quantum rescale, in the order the pipeline applies them. In
/// auto-quantum mode the jitter scale falls back to a millionth of the box
/// side per dimension, since the quantum is only known after tessellation.
inline CellComplex prepare_complex(const RunConfig& cfg, std::vector<Point> pts) {
    if (pts.empty()) throw EmptyInputError("no data points");
    const std::array<Interval, 2> bounds =
        cfg.bounds_auto ? auto_bounds(cfg.dim, pts, cfg.bounds_expand) : cfg.bounds;
    if (cfg.jitter) {
        std::array<double, 2> scale = cfg.quantum;
        if (cfg.quantum_auto)
            for (int d = 0; d < cfg.dim; ++d) scale[d] = 1e-6 * bounds[d].length();
        pts = jitter_duplicates(cfg.dim, std::move(pts), bounds, scale, cfg.seed);
    }
    const std::array<double, 2> quantum =
        cfg.quantum_auto ? std::array<double, 2>{1.0, 1.0} : cfg.quantum;
    const PointSet ps = make_point_set(cfg.dim, std::move(pts), bounds, quantum);
    CellComplex cc = build_tessellation(ps, cfg.adjacency);
    if (cfg.quantum_auto) rescale_to_min_cell(cc);
    return cc;
}

struct PipelineResult {
    CellComplex cc;
    CoalesceResult coalesce;
    ClusterReport clusters;
    std::vector<std::string> artifacts;  // file names written under out_dir
    std::string summary;
};

namespace detail {

template <typename Fn>
void write_artifact(const std::string& out_dir, const std::string& name,
                    std::vector<std::string>& artifacts, Fn&& fn) {
    const std::filesystem::path path = std::filesystem::path(out_dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    fn(f);
    if (!f) throw Error("write failed for " + path.string());
    artifacts.push_back(name);
}

}  // namespace detail

/// The full run: ingest CSV, tessellate, coalesce, cluster, serialize.
/// Everything downstream of the seed and the input bytes is deterministic,
/// so rerunning a config reproduces every artifact byte for byte.
inline PipelineResult run_pipeline(const RunConfig& cfg) {
    validate_config(cfg);
    if (cfg.input.empty()) throw ConfigError("run: an input file is required");
    std::vector<Point> pts = read_points_csv(cfg.input, cfg.dim);
    if (pts.empty()) throw EmptyInputError(cfg.input + ": no data rows");

    PipelineResult out;
    out.cc = prepare_complex(cfg, std::move(pts));
    Partition initial = init_partition(out.cc, cfg.penalty);
    out.coalesce = run_coalescence(std::move(initial), CoalesceConfig{cfg.max_steps});
    out.clusters = extract_clusters(out.coalesce.partition, out.cc.quantum_volume,
                                    cfg.threshold_ratio);

    std::filesystem::create_directories(cfg.out_dir);
    detail::write_artifact(cfg.out_dir, "partition.json", out.artifacts, [&](std::ostream& os) {
        write_partition_json(os, out.coalesce.partition, out.cc);
    });
    detail::write_artifact(cfg.out_dir, "clusters.json", out.artifacts, [&](std::ostream& os) {
        write_clusters_json(os, out.clusters);
    });
    if (cfg.emit_history)
        detail::write_artifact(cfg.out_dir, "history.json", out.artifacts, [&](std::ostream& os) {
            write_history_json(os, out.coalesce.history, out.coalesce.truncated);
        });
    if (cfg.emit_cells)
        detail::write_artifact(cfg.out_dir, "cells.json", out.artifacts, [&](std::ostream& os) {
            write_cells_json(os, out.cc);
        });
    if (cfg.emit_grid) {
        const DensityRaster raster =
            density_grid(out.coalesce.partition, out.cc, cfg.grid);
        detail::write_artifact(cfg.out_dir, "density.csv", out.artifacts,
                               [&](std::ostream& os) { write_raster_csv(os, raster); });
    }

    out.summary = std::to_string(out.coalesce.partition.n_cells()) + " points -> " +
                  std::to_string(out.coalesce.partition.n_live_blocks()) + " blocks -> " +
                  std::to_string(out.clusters.clusters.size()) +
                  " clusters, total log posterior " +
                  format_double(out.coalesce.partition.total_log_posterior()) +
                  (out.coalesce.truncated ? " (truncated by max_steps)" : "");
    return out;
}

}  // namespace voroblocks
