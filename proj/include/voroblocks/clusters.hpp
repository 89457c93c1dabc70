#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "voroblocks/coalesce.hpp"
#include "voroblocks/errors.hpp"
#include "voroblocks/geometry.hpp"
#include "voroblocks/posterior.hpp"

namespace voroblocks {

/// Density of one block in points per unit coordinate volume.
inline double block_density(const BlockStats& b, double quantum_volume) {
    return static_cast<double>(b.n_points) / (b.volume_quanta * quantum_volume);
}

/// Volume-weighted median density: blocks sorted by density ascending, the
/// answer is the density at which cumulative volume first reaches half the
/// total. Robust against a few dense blocks of small volume dominating.
inline double estimate_background(const std::vector<BlockStats>& blocks,
                                  double quantum_volume) {
    if (blocks.empty()) throw EmptyInputError("estimate_background: no blocks");
    std::vector<std::pair<double, double>> dv;  // (density, volume share)
    dv.reserve(blocks.size());
    double total = 0.0;
    for (const auto& b : blocks) {
        dv.emplace_back(block_density(b, quantum_volume), b.volume_quanta);
        total += b.volume_quanta;
    }
    std::sort(dv.begin(), dv.end());
    double cum = 0.0;
    for (const auto& [density, volume] : dv) {
        cum += volume;
        if (cum >= 0.5 * total) return density;
    }
    return dv.back().first;  // rounding left the sum a hair short
}

inline double estimate_background(const Partition& p, double quantum_volume) {
    std::vector<BlockStats> blocks;
    blocks.reserve(p.n_live_blocks());
    for (const int r : p.live_roots()) blocks.push_back(p.block(r).stats);
    return estimate_background(blocks, quantum_volume);
}

struct Cluster {
    int id = -1;
    std::vector<int> member_blocks;  // block ids, ascending
    std::int64_t total_n = 0;
    double total_volume_quanta = 0.0;
    double total_volume_units = 0.0;
    double mean_density = 0.0;        // total_n / total_volume_units
    double peak_block_density = 0.0;  // densest member block
};

struct ClusterReport {
    double background_density = 0.0;
    double threshold_ratio = 0.0;
    std::vector<Cluster> clusters;
    std::map<int, int> block_to_cluster;  // every live block; -1 when in no cluster
};

/// Marks blocks whose density exceeds threshold_ratio times the background,
/// then groups marked blocks into connected components of the block adjacency
/// graph. Components are maximal by construction. Cluster ids order by
/// descending total point count, ties by smallest member block id.
inline ClusterReport extract_clusters(const Partition& p, double quantum_volume,
                                      double threshold_ratio = 2.0) {
    if (!(threshold_ratio > 1.0))
        throw ConfigError("extract_clusters: threshold_ratio must exceed 1");
    ClusterReport rep;
    rep.background_density = estimate_background(p, quantum_volume);
    rep.threshold_ratio = threshold_ratio;

    const std::vector<int> roots = p.live_roots();
    std::set<int> marked;
    for (const int r : roots) {
        rep.block_to_cluster[r] = -1;
        if (block_density(p.block(r).stats, quantum_volume) >
            threshold_ratio * rep.background_density)
            marked.insert(r);
    }

    std::vector<Cluster> found;
    std::set<int> seen;
    for (const int start : marked) {
        if (seen.count(start)) continue;
        Cluster cl;
        std::vector<int> stack{start};
        seen.insert(start);
        while (!stack.empty()) {
            const int r = stack.back();
            stack.pop_back();
            cl.member_blocks.push_back(r);
            const Block& b = p.block(r);
            cl.total_n += b.stats.n_points;
            cl.total_volume_quanta += b.stats.volume_quanta;
            cl.peak_block_density =
                std::max(cl.peak_block_density, block_density(b.stats, quantum_volume));
            for (const int x : b.neighbors) {
                if (marked.count(x) && !seen.count(x)) {
                    seen.insert(x);
                    stack.push_back(x);
                }
            }
        }
        std::sort(cl.member_blocks.begin(), cl.member_blocks.end());
        cl.total_volume_units = cl.total_volume_quanta * quantum_volume;
        cl.mean_density = static_cast<double>(cl.total_n) / cl.total_volume_units;
        found.push_back(std::move(cl));
    }
    std::sort(found.begin(), found.end(), [](const Cluster& a, const Cluster& b) {
        if (a.total_n != b.total_n) return a.total_n > b.total_n;
        return a.member_blocks.front() < b.member_blocks.front();
    });
    for (std::size_t i = 0; i < found.size(); ++i) {
        found[i].id = static_cast<int>(i);
        for (const int r : found[i].member_blocks)
            rep.block_to_cluster[r] = found[i].id;
    }
    rep.clusters = std::move(found);
    return rep;
}

/// Piecewise-constant density at a query point: the density of the block
/// owning the Voronoi cell of the nearest data point.
inline double density_at(const Partition& p, const CellComplex& cc, double x,
                         double y = 0.0) {
    const int cell = cc.locate_cell(x, y);
    return block_density(p.block(p.block_of(cell)).stats, cc.quantum_volume);
}

/// Plot-ready raster of densities at the centers of a regular grid.
struct DensityRaster {
    int dim = 1;
    std::array<int, 2> resolution{1, 1};  // {nx, ny}; ny is 1 in 1D
    std::array<Interval, 2> bounds{};
    std::vector<double> values;  // row-major, index = iy * nx + ix
};

inline DensityRaster density_grid(const Partition& p, const CellComplex& cc,
                                  std::array<int, 2> resolution) {
    const int nx = resolution[0];
    const int ny = cc.ps.dim == 2 ? resolution[1] : 1;
    if (nx < 1 || ny < 1)
        throw ConfigError("density_grid: resolution must be at least 1 per dimension");
    DensityRaster r;
    r.dim = cc.ps.dim;
    r.resolution = {nx, ny};
    r.bounds = cc.ps.bounds;
    r.values.resize(static_cast<std::size_t>(nx) * ny);
    const double dx = cc.ps.bounds[0].length() / nx;
    const double dy = cc.ps.dim == 2 ? cc.ps.bounds[1].length() / ny : 0.0;
    for (int iy = 0; iy < ny; ++iy) {
        const double y = cc.ps.dim == 2 ? cc.ps.bounds[1].lo + (iy + 0.5) * dy : 0.0;
        for (int ix = 0; ix < nx; ++ix) {
            const double x = cc.ps.bounds[0].lo + (ix + 0.5) * dx;
            r.values[static_cast<std::size_t>(iy) * nx + ix] = density_at(p, cc, x, y);
        }
    }
    return r;
}

/// Riemann sum of a raster over the box; approaches the total point count as
/// the resolution grows.
inline double integrate_raster(const DensityRaster& r) {
    double cell = r.bounds[0].length() / r.resolution[0];
    if (r.dim == 2) cell *= r.bounds[1].length() / r.resolution[1];
    double sum = 0.0;
    for (const double v : r.values) sum += v;
    return sum * cell;
}

/// Mean location of the data points inside a cluster's blocks. Cells are
/// index-aligned with points, so block members are point indices.
inline Point cluster_centroid(const Cluster& cl, const Partition& p,
                              const CellComplex& cc) {
    double sx = 0.0, sy = 0.0;
    std::int64_t n = 0;
    const auto members = p.members_by_block();
    for (const int r : cl.member_blocks) {
        for (const int c : members.at(r)) {
            sx += cc.ps.points[c][0];
            sy += cc.ps.points[c][1];
            ++n;
        }
    }
    if (n == 0) throw EmptyInputError("cluster_centroid: empty cluster");
    return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

/// Axis-aligned bounding box of a cluster's cell geometry.
inline std::array<Interval, 2> cluster_bounding_box(const Cluster& cl, const Partition& p,
                                                    const CellComplex& cc) {
    std::array<Interval, 2> box{};
    bool first = true;
    const auto members = p.members_by_block();
    for (const int r : cl.member_blocks) {
        for (const int c : members.at(r)) {
            const Cell& cell = cc.cells[c];
            if (cc.ps.dim == 1) {
                if (first) box[0] = cell.interval;
                box[0].lo = std::min(box[0].lo, cell.interval.lo);
                box[0].hi = std::max(box[0].hi, cell.interval.hi);
            } else {
                for (const auto& v : cell.polygon) {
                    if (first) box = {Interval{v[0], v[0]}, Interval{v[1], v[1]}};
                    box[0].lo = std::min(box[0].lo, v[0]);
                    box[0].hi = std::max(box[0].hi, v[0]);
                    box[1].lo = std::min(box[1].lo, v[1]);
                    box[1].hi = std::max(box[1].hi, v[1]);
                    first = false;
                }
            }
            first = false;
        }
    }
    return box;
}

}  // namespace voroblocks
