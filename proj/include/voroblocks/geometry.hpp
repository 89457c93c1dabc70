#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "voroblocks/errors.hpp"
#include "voroblocks/random.hpp"

namespace voroblocks {

/// Coordinates of one event. The second component is unused when dim == 1.
using Point = std::array<double, 2>;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

/// Raw event locations plus the observation window. `quantum[d]` is the
/// coordinate resolution unit of dimension d; all cell volumes are counted in
/// units of the quantum volume (product of the per-dimension quanta) so that
/// the posterior's V argument is a dimensionless count.
struct PointSet {
    int dim = 1;
    std::vector<Point> points;
    std::array<Interval, 2> bounds{};
    std::array<double, 2> quantum{1.0, 1.0};
};

enum class AdjacencyRule {
    SharedVertex,  // blocks touch when any two of their cells share a vertex
    SharedEdge,    // stricter variant: cells must share two distinct vertices
};

namespace detail {

inline double dist2(const Point& a, const Point& b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    return dx * dx + dy * dy;
}

/// Uniform bucket grid over the bounding box; supports nearest-site queries
/// and ring-ordered candidate enumeration for cell clipping.
struct SiteGrid {
    int nx = 0, ny = 0;
    double x0 = 0.0, y0 = 0.0;
    double cw = 1.0, ch = 1.0;
    std::vector<std::vector<std::int32_t>> buckets;

    bool empty() const { return buckets.empty(); }

    void build(const std::vector<Point>& pts, const std::array<Interval, 2>& bounds) {
        const double w = bounds[0].length();
        const double h = bounds[1].length();
        const double n = static_cast<double>(pts.size());
        const double aspect = w / h;
        nx = std::max(1, static_cast<int>(std::lround(std::sqrt(n * aspect))));
        ny = std::max(1, static_cast<int>(std::lround(std::sqrt(n / aspect))));
        x0 = bounds[0].lo;
        y0 = bounds[1].lo;
        cw = w / nx;
        ch = h / ny;
        buckets.assign(static_cast<std::size_t>(nx) * ny, {});
        for (std::size_t i = 0; i < pts.size(); ++i)
            buckets[bucket_of(pts[i][0], pts[i][1])].push_back(static_cast<std::int32_t>(i));
    }

    int clamp_ix(int ix) const { return std::min(std::max(ix, 0), nx - 1); }
    int clamp_iy(int iy) const { return std::min(std::max(iy, 0), ny - 1); }

    std::size_t bucket_of(double x, double y) const {
        const int ix = clamp_ix(static_cast<int>((x - x0) / cw));
        const int iy = clamp_iy(static_cast<int>((y - y0) / ch));
        return static_cast<std::size_t>(iy) * nx + ix;
    }

    /// Collects the point indices stored in buckets at Chebyshev ring `k`
    /// around the bucket containing (x, y). Returns false when the whole ring
    /// lies outside the grid.
    bool collect_ring(double x, double y, int k, std::vector<std::int32_t>& out) const {
        const int cx = clamp_ix(static_cast<int>((x - x0) / cw));
        const int cy = clamp_iy(static_cast<int>((y - y0) / ch));
        bool any_in_range = false;
        auto take = [&](int ix, int iy) {
            if (ix < 0 || ix >= nx || iy < 0 || iy >= ny) return;
            any_in_range = true;
            const auto& b = buckets[static_cast<std::size_t>(iy) * nx + ix];
            out.insert(out.end(), b.begin(), b.end());
        };
        if (k == 0) {
            take(cx, cy);
            return any_in_range;
        }
        for (int ix = cx - k; ix <= cx + k; ++ix) {
            take(ix, cy - k);
            take(ix, cy + k);
        }
        for (int iy = cy - k + 1; iy <= cy + k - 1; ++iy) {
            take(cx - k, iy);
            take(cx + k, iy);
        }
        return any_in_range;
    }

    /// Any point in a ring-k bucket is at least this far from a query inside
    /// the central bucket: k-1 whole bucket widths along some axis.
    double ring_lower_bound(int k) const {
        return k <= 1 ? 0.0 : (k - 1) * std::min(cw, ch);
    }
};

/// Sutherland-Hodgman clip of a convex CCW polygon against the half-plane
/// {p : nx*px + ny*py <= c}. Orientation is preserved.
inline void clip_halfplane(std::vector<Point>& poly, double nx, double ny, double c,
                           std::vector<Point>& scratch) {
    scratch.clear();
    const std::size_t m = poly.size();
    for (std::size_t e = 0; e < m; ++e) {
        const Point& p = poly[e];
        const Point& q = poly[(e + 1) % m];
        const double dp = nx * p[0] + ny * p[1] - c;
        const double dq = nx * q[0] + ny * q[1] - c;
        if (dp <= 0.0) scratch.push_back(p);
        if ((dp < 0.0) != (dq < 0.0)) {
            const double t = dp / (dp - dq);
            scratch.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
        }
    }
    poly.swap(scratch);
}

inline void dedupe_consecutive(std::vector<Point>& poly, double tol) {
    if (poly.size() < 2) return;
    std::vector<Point> out;
    out.reserve(poly.size());
    for (const auto& p : poly) {
        if (out.empty() || dist2(out.back(), p) > tol * tol) out.push_back(p);
    }
    while (out.size() > 1 && dist2(out.front(), out.back()) <= tol * tol) out.pop_back();
    poly.swap(out);
}

inline std::uint64_t mix_key(std::int64_t kx, std::int64_t ky) {
    std::uint64_t a = static_cast<std::uint64_t>(kx) * 0x9E3779B97F4A7C15ULL;
    std::uint64_t b = static_cast<std::uint64_t>(ky) * 0xC2B2AE3D27D4EB4FULL;
    return a ^ (b + 0x165667B19E3779F9ULL + (a << 6) + (a >> 2));
}

}  // namespace detail

/// Signed area of a polygon; positive for counterclockwise vertex order.
inline double polygon_area(const std::vector<Point>& poly) {
    double s = 0.0;
    const std::size_t m = poly.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % m];
        s += p[0] * q[1] - q[0] * p[1];
    }
    return 0.5 * s;
}

/// One Voronoi cell clipped to the bounding box. Exactly one of
/// interval/polygon is populated depending on the dimension.
struct Cell {
    int point_index = -1;
    double volume_quanta = 0.0;
    std::vector<int> neighbors;   // sorted, never contains point_index
    Interval interval{};          // 1D
    std::vector<Point> polygon;   // 2D, convex, counterclockwise
};

/// The full tessellation: one cell per point, index-aligned with the point
/// set. Immutable once built; safe for concurrent reads.
struct CellComplex {
    PointSet ps;
    std::vector<Cell> cells;
    double quantum_volume = 1.0;  // coordinate volume of one quantum
    double total_volume_quanta = 0.0;
    AdjacencyRule adjacency = AdjacencyRule::SharedVertex;

    // Locator state, built by the tessellation constructors. Synthetic
    // complexes assembled directly by tests may leave it empty; queries then
    // fall back to a linear scan.
    bool has_locator = false;
    std::vector<std::pair<double, std::int32_t>> locator_sorted;  // 1D
    detail::SiteGrid locator_grid;                                // 2D

    double box_volume_units() const {
        double v = ps.bounds[0].length();
        if (ps.dim == 2) v *= ps.bounds[1].length();
        return v;
    }

    double box_diagonal() const {
        if (ps.dim == 1) return ps.bounds[0].length();
        return std::hypot(ps.bounds[0].length(), ps.bounds[1].length());
    }

    /// All vertex comparisons in this library use one absolute tolerance.
    double geometric_tolerance() const { return 1e-9 * box_diagonal(); }

    bool in_bounds(double x, double y = 0.0) const {
        if (x < ps.bounds[0].lo || x > ps.bounds[0].hi) return false;
        if (ps.dim == 2 && (y < ps.bounds[1].lo || y > ps.bounds[1].hi)) return false;
        return true;
    }

    /// Index of the cell owning (x, y): the cell of the nearest data point.
    int locate_cell(double x, double y = 0.0) const {
        if (!in_bounds(x, y)) throw OutOfBoundsError("locate_cell: query outside bounds");
        if (has_locator && ps.dim == 1) {
            auto it = std::lower_bound(locator_sorted.begin(), locator_sorted.end(),
                                       std::make_pair(x, std::int32_t{-1}));
            if (it == locator_sorted.begin()) return it->second;
            if (it == locator_sorted.end()) return std::prev(it)->second;
            const auto& right = *it;
            const auto& left = *std::prev(it);
            return (x - left.first) <= (right.first - x) ? left.second : right.second;
        }
        if (has_locator && ps.dim == 2) return locate_grid(x, y);
        // fallback: linear scan
        int best = -1;
        double bestd2 = std::numeric_limits<double>::infinity();
        const Point q{x, y};
        for (std::size_t i = 0; i < ps.points.size(); ++i) {
            const double d2 = detail::dist2(ps.points[i], q);
            if (d2 < bestd2) {
                bestd2 = d2;
                best = static_cast<int>(i);
            }
        }
        if (best < 0) throw EmptyInputError("locate_cell: empty complex");
        return best;
    }

private:
    int locate_grid(double x, double y) const {
        const auto& g = locator_grid;
        int best = -1;
        double bestd2 = std::numeric_limits<double>::infinity();
        std::vector<std::int32_t> ring;
        const int max_ring = g.nx + g.ny + 1;
        for (int k = 0; k <= max_ring; ++k) {
            const double lb = g.ring_lower_bound(k);
            if (best >= 0 && lb * lb > bestd2) break;
            ring.clear();
            g.collect_ring(x, y, k, ring);
            for (std::int32_t j : ring) {
                const double d2 = detail::dist2(ps.points[j], {x, y});
                if (d2 < bestd2 || (d2 == bestd2 && j < best)) {
                    bestd2 = d2;
                    best = j;
                }
            }
        }
        return best;
    }
};

/// Per-dimension data bounds expanded by `expand` of the data range per side.
/// A zero range (single point, or all points sharing a coordinate) falls back
/// to a unit range so the box stays proper.
inline std::array<Interval, 2> auto_bounds(int dim, const std::vector<Point>& pts,
                                           double expand) {
    if (pts.empty()) throw EmptyInputError("auto_bounds: no points");
    std::array<Interval, 2> out{};
    for (int d = 0; d < dim; ++d) {
        double lo = pts[0][d], hi = pts[0][d];
        for (const auto& p : pts) {
            lo = std::min(lo, p[d]);
            hi = std::max(hi, p[d]);
        }
        const double range = hi - lo;
        const double pad = expand * (range > 0.0 ? range : 1.0);
        out[d] = {lo - pad, hi + pad};
    }
    return out;
}

/// Validates and assembles a PointSet. Throws InvalidSpecError for a malformed
/// window or quantum, DomainError for out-of-bounds or non-finite coordinates,
/// DuplicatePointsError when two points coincide exactly.
inline PointSet make_point_set(int dim, std::vector<Point> pts,
                               std::array<Interval, 2> bounds,
                               std::array<double, 2> quantum) {
    if (dim != 1 && dim != 2) throw InvalidSpecError("dim must be 1 or 2");
    for (int d = 0; d < dim; ++d) {
        if (!(bounds[d].lo < bounds[d].hi))
            throw InvalidSpecError("bounds must satisfy lo < hi in dimension " + std::to_string(d));
        if (!(quantum[d] > 0.0) || !std::isfinite(quantum[d]))
            throw InvalidSpecError("quantum must be positive in dimension " + std::to_string(d));
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (dim == 1) pts[i][1] = 0.0;
        for (int d = 0; d < dim; ++d) {
            const double x = pts[i][d];
            if (!std::isfinite(x))
                throw DomainError("point " + std::to_string(i) + " has a non-finite coordinate");
            if (x < bounds[d].lo || x > bounds[d].hi)
                throw DomainError("point " + std::to_string(i) + " lies outside bounds");
        }
    }
    // exact-duplicate scan
    std::vector<std::int32_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
        return pts[a] < pts[b];
    });
    for (std::size_t k = 1; k < order.size(); ++k) {
        if (pts[order[k - 1]] == pts[order[k]])
            throw DuplicatePointsError("points " + std::to_string(order[k - 1]) + " and " +
                                       std::to_string(order[k]) + " are identical");
    }
    PointSet ps;
    ps.dim = dim;
    ps.points = std::move(pts);
    ps.bounds = bounds;
    ps.quantum = quantum;
    return ps;
}

/// Displaces every duplicate beyond the first of each coincident group by a
/// seeded uniform offset of at most a tenth of a quantum per axis, clamped to
/// the bounds. Points that were already unique are left untouched.
inline std::vector<Point> jitter_duplicates(int dim, std::vector<Point> pts,
                                            const std::array<Interval, 2>& bounds,
                                            const std::array<double, 2>& quantum,
                                            std::uint64_t seed) {
    RandomSource rng(seed);
    for (int round = 0; round < 100; ++round) {
        std::map<std::pair<double, double>, int> seen;
        bool any = false;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto key = std::make_pair(pts[i][0], dim == 2 ? pts[i][1] : 0.0);
            auto [it, inserted] = seen.emplace(key, static_cast<int>(i));
            if (inserted) continue;
            any = true;
            for (int d = 0; d < dim; ++d) {
                const double off = rng.uniform(-0.1, 0.1) * quantum[d];
                pts[i][d] = std::min(std::max(pts[i][d] + off, bounds[d].lo), bounds[d].hi);
            }
        }
        if (!any) return pts;
    }
    throw DuplicatePointsError("jitter_duplicates: could not separate coincident points");
}

/// 1D tessellation: cell i spans from the midpoint with its left neighbor (or
/// the lower bound for the leftmost point) to the midpoint with its right
/// neighbor (or the upper bound). Volumes are lengths over the quantum.
inline CellComplex build_tessellation_1d(const PointSet& ps) {
    if (ps.dim != 1) throw DomainError("build_tessellation_1d: point set is not 1D");
    const std::size_t n = ps.points.size();
    if (n == 0) throw EmptyInputError("build_tessellation_1d: empty point set");
    std::vector<std::int32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
        return ps.points[a][0] < ps.points[b][0];
    });
    for (std::size_t k = 1; k < n; ++k)
        if (ps.points[order[k - 1]][0] == ps.points[order[k]][0])
            throw DuplicatePointsError("duplicate coordinate at points " +
                                       std::to_string(order[k - 1]) + ", " +
                                       std::to_string(order[k]));

    CellComplex cc;
    cc.ps = ps;
    cc.quantum_volume = ps.quantum[0];
    cc.cells.resize(n);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const int i = order[k];
        const double x = ps.points[i][0];
        const double lo = (k == 0) ? ps.bounds[0].lo : 0.5 * (ps.points[order[k - 1]][0] + x);
        const double hi =
            (k + 1 == n) ? ps.bounds[0].hi : 0.5 * (x + ps.points[order[k + 1]][0]);
        Cell& c = cc.cells[i];
        c.point_index = i;
        c.interval = {lo, hi};
        c.volume_quanta = (hi - lo) / ps.quantum[0];
        if (k > 0) c.neighbors.push_back(order[k - 1]);
        if (k + 1 < n) c.neighbors.push_back(order[k + 1]);
        std::sort(c.neighbors.begin(), c.neighbors.end());
        total += c.volume_quanta;
    }
    cc.total_volume_quanta = total;
    cc.locator_sorted.reserve(n);
    for (std::size_t k = 0; k < n; ++k)
        cc.locator_sorted.emplace_back(ps.points[order[k]][0], order[k]);
    cc.has_locator = true;
    return cc;
}

/// 2D tessellation by per-cell half-plane clipping against the bounding
/// rectangle. Candidate sites are visited in expanding bucket rings and
/// clipping stops once no remaining site can cut the polygon (a bisector of
/// sites farther than twice the polygon's circumradius misses it entirely).
/// Two cells are adjacent when their polygons share a vertex within the
/// geometric tolerance; AdjacencyRule::SharedEdge additionally requires two
/// clearly distinct shared vertex locations.
inline CellComplex build_tessellation_2d(const PointSet& ps,
                                         AdjacencyRule rule = AdjacencyRule::SharedVertex) {
    if (ps.dim != 2) throw DomainError("build_tessellation_2d: point set is not 2D");
    const std::size_t n = ps.points.size();
    if (n == 0) throw EmptyInputError("build_tessellation_2d: empty point set");
    for (int d = 0; d < 2; ++d)
        if (!(ps.bounds[d].lo < ps.bounds[d].hi))
            throw InvalidSpecError("bounds must form a proper rectangle");
    {
        std::vector<std::int32_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
            return ps.points[a] < ps.points[b];
        });
        for (std::size_t k = 1; k < n; ++k)
            if (ps.points[order[k - 1]] == ps.points[order[k]])
                throw DuplicatePointsError("duplicate point at indices " +
                                           std::to_string(order[k - 1]) + ", " +
                                           std::to_string(order[k]));
    }

    CellComplex cc;
    cc.ps = ps;
    cc.adjacency = rule;
    cc.quantum_volume = ps.quantum[0] * ps.quantum[1];
    cc.cells.resize(n);
    cc.locator_grid.build(ps.points, ps.bounds);
    cc.has_locator = true;
    const auto& grid = cc.locator_grid;

    const double blx = ps.bounds[0].lo, bhx = ps.bounds[0].hi;
    const double bly = ps.bounds[1].lo, bhy = ps.bounds[1].hi;
    const double diag = cc.box_diagonal();
    const double dedupe_tol = 1e-12 * diag;

    std::vector<Point> scratch;
    std::vector<std::int32_t> ring;
    std::vector<std::pair<double, std::int32_t>> candidates;
    double total = 0.0;

    for (std::size_t i = 0; i < n; ++i) {
        const Point& site = ps.points[i];
        std::vector<Point>& poly = cc.cells[i].polygon;
        poly = {{blx, bly}, {bhx, bly}, {bhx, bhy}, {blx, bhy}};
        double r2max = 0.0;
        for (const auto& v : poly) r2max = std::max(r2max, detail::dist2(v, site));

        const int max_ring = grid.nx + grid.ny + 1;
        for (int k = 0; k <= max_ring; ++k) {
            const double lb = grid.ring_lower_bound(k);
            if (lb * lb > 4.0 * r2max) break;
            ring.clear();
            if (!grid.collect_ring(site[0], site[1], k, ring) && k > 0) {
                // ring is fully outside the grid; so is every farther ring
                break;
            }
            candidates.clear();
            for (std::int32_t j : ring)
                if (static_cast<std::size_t>(j) != i)
                    candidates.emplace_back(detail::dist2(ps.points[j], site), j);
            std::sort(candidates.begin(), candidates.end());
            for (const auto& [d2, j] : candidates) {
                if (d2 > 4.0 * r2max) break;  // sorted: the rest are farther
                const Point& other = ps.points[j];
                const double nxv = other[0] - site[0];
                const double nyv = other[1] - site[1];
                const double c =
                    0.5 * (nxv * (site[0] + other[0]) + nyv * (site[1] + other[1]));
                detail::clip_halfplane(poly, nxv, nyv, c, scratch);
                r2max = 0.0;
                for (const auto& v : poly) r2max = std::max(r2max, detail::dist2(v, site));
            }
        }
        detail::dedupe_consecutive(poly, dedupe_tol);
        Cell& cell = cc.cells[i];
        cell.point_index = static_cast<int>(i);
        const double area = polygon_area(poly);
        cell.volume_quanta = area / cc.quantum_volume;
        total += cell.volume_quanta;
    }
    cc.total_volume_quanta = total;

    // Adjacency by shared polygon vertices within tolerance. Vertices are
    // hashed on a grid of the tolerance size and matched across the 3x3 key
    // neighborhood, so coincident vertices land together regardless of
    // floating-point noise in the per-cell clipping order.
    const double tol = cc.geometric_tolerance();
    struct VertexRec {
        std::int32_t cell;
        Point pos;
    };
    std::unordered_map<std::uint64_t, std::vector<VertexRec>> vertex_hash;
    auto key_of = [&](double x, double y, int dx, int dy) {
        const std::int64_t kx = static_cast<std::int64_t>(std::floor(x / tol)) + dx;
        const std::int64_t ky = static_cast<std::int64_t>(std::floor(y / tol)) + dy;
        return detail::mix_key(kx, ky);
    };
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& v : cc.cells[i].polygon)
            vertex_hash[key_of(v[0], v[1], 0, 0)].push_back(
                {static_cast<std::int32_t>(i), v});

    std::map<std::pair<int, int>, std::vector<Point>> shared;  // ordered: deterministic
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& v : cc.cells[i].polygon) {
            for (int dx = -1; dx <= 1; ++dx) {
                for (int dy = -1; dy <= 1; ++dy) {
                    auto it = vertex_hash.find(key_of(v[0], v[1], dx, dy));
                    if (it == vertex_hash.end()) continue;
                    for (const auto& rec : it->second) {
                        if (rec.cell == static_cast<std::int32_t>(i)) continue;
                        if (detail::dist2(rec.pos, v) > tol * tol) continue;
                        const int a = std::min<int>(i, rec.cell);
                        const int b = std::max<int>(i, rec.cell);
                        shared[{a, b}].push_back(v);
                    }
                }
            }
        }
    }
    const double distinct2 = (10.0 * tol) * (10.0 * tol);
    for (const auto& [pair, positions] : shared) {
        bool adjacent = true;
        if (rule == AdjacencyRule::SharedEdge) {
            adjacent = false;
            for (std::size_t a = 0; a < positions.size() && !adjacent; ++a)
                for (std::size_t b = a + 1; b < positions.size(); ++b)
                    if (detail::dist2(positions[a], positions[b]) > distinct2) {
                        adjacent = true;
                        break;
                    }
        }
        if (adjacent) {
            cc.cells[pair.first].neighbors.push_back(pair.second);
            cc.cells[pair.second].neighbors.push_back(pair.first);
        }
    }
    for (auto& cell : cc.cells) {
        std::sort(cell.neighbors.begin(), cell.neighbors.end());
        cell.neighbors.erase(std::unique(cell.neighbors.begin(), cell.neighbors.end()),
                             cell.neighbors.end());
    }
    return cc;
}

inline CellComplex build_tessellation(const PointSet& ps,
                                      AdjacencyRule rule = AdjacencyRule::SharedVertex) {
    return ps.dim == 1 ? build_tessellation_1d(ps) : build_tessellation_2d(ps, rule);
}

/// Result of the sub-quantum cell scan. `suggested_quantum` is the largest
/// per-dimension quantum (uniform rescaling of the current one) under which
/// every cell holds at least one quantum; zero when a cell has zero measure.
struct QuantizationReport {
    bool pass = true;
    std::vector<int> failing_cells;
    double min_volume_quanta = std::numeric_limits<double>::infinity();
    std::array<double, 2> suggested_quantum{0.0, 0.0};
};

/// Every cell must hold at least one quantum of volume, otherwise a block's V
/// could drop below its N and leave the posterior's domain. The tolerance
/// admits cells at exactly one quantum up to rounding (the auto-rescaled
/// minimum cell sits at 1.0 bit-exactly, but downstream sums need slack).
inline QuantizationReport validate_quantization(const CellComplex& cc) {
    constexpr double kTol = 1e-9;
    QuantizationReport rep;
    for (std::size_t i = 0; i < cc.cells.size(); ++i) {
        const double v = cc.cells[i].volume_quanta;
        rep.min_volume_quanta = std::min(rep.min_volume_quanta, v);
        if (v < 1.0 - kTol) {
            rep.pass = false;
            rep.failing_cells.push_back(static_cast<int>(i));
        }
    }
    if (cc.cells.empty()) {
        rep.min_volume_quanta = 0.0;
        rep.pass = false;
        return rep;
    }
    const double scale = cc.ps.dim == 1 ? rep.min_volume_quanta
                                        : std::sqrt(std::max(rep.min_volume_quanta, 0.0));
    for (int d = 0; d < cc.ps.dim; ++d) rep.suggested_quantum[d] = cc.ps.quantum[d] * scale;
    return rep;
}

/// Rescales the quantum so the smallest cell holds exactly one quantum (the
/// auto-min-cell mode). Volumes are divided by the current minimum, which
/// maps the minimum itself to 1.0 exactly.
inline void rescale_to_min_cell(CellComplex& cc) {
    if (cc.cells.empty()) throw EmptyInputError("rescale_to_min_cell: empty complex");
    double vmin = std::numeric_limits<double>::infinity();
    for (const auto& c : cc.cells) vmin = std::min(vmin, c.volume_quanta);
    if (!(vmin > 0.0))
        throw QuantizationError("rescale_to_min_cell: a cell has zero volume", {0.0, 0.0});
    double total = 0.0;
    for (auto& c : cc.cells) {
        c.volume_quanta /= vmin;
        total += c.volume_quanta;
    }
    cc.total_volume_quanta = total;
    cc.quantum_volume *= vmin;
    const double scale = cc.ps.dim == 1 ? vmin : std::sqrt(vmin);
    for (int d = 0; d < cc.ps.dim; ++d) cc.ps.quantum[d] *= scale;
}

/// True when (x, y) lies in cell `c` up to `tol` (distance to the boundary).
inline bool point_in_cell(const CellComplex& cc, int c, double x, double y, double tol) {
    const Cell& cell = cc.cells[c];
    if (cc.ps.dim == 1) return x >= cell.interval.lo - tol && x <= cell.interval.hi + tol;
    const auto& poly = cell.polygon;
    const std::size_t m = poly.size();
    if (m < 3) return false;
    for (std::size_t i = 0; i < m; ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % m];
        const double ex = q[0] - p[0];
        const double ey = q[1] - p[1];
        const double cross = ex * (y - p[1]) - ey * (x - p[0]);
        if (cross < -tol * std::hypot(ex, ey)) return false;
    }
    return true;
}

struct PartitionCheckResult {
    std::uint64_t probes = 0;
    std::uint64_t hits = 0;
    double hit_fraction() const {
        return probes == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(probes);
    }
};

/// Samples uniform probe points and checks that the cell of the nearest data
/// point geometrically contains each probe. Boundary ties make a perfect
/// score unreachable in principle, hence a fraction rather than a boolean.
inline PartitionCheckResult sample_partition_check(const CellComplex& cc,
                                                   std::uint64_t n_probes,
                                                   std::uint64_t seed) {
    RandomSource rng(seed);
    const double tol = cc.geometric_tolerance();
    PartitionCheckResult out;
    out.probes = n_probes;
    for (std::uint64_t t = 0; t < n_probes; ++t) {
        const double x = rng.uniform(cc.ps.bounds[0].lo, cc.ps.bounds[0].hi);
        const double y =
            cc.ps.dim == 2 ? rng.uniform(cc.ps.bounds[1].lo, cc.ps.bounds[1].hi) : 0.0;
        const int c = cc.locate_cell(x, y);
        if (point_in_cell(cc, c, x, y, tol)) ++out.hits;
    }
    return out;
}

/// Structural checks shared by tests: positive volumes, volume conservation
/// against the box, symmetric irreflexive adjacency. Throws on violation.
inline void verify_cell_complex(const CellComplex& cc) {
    if (cc.cells.size() != cc.ps.points.size())
        throw Error("complex: cells are not index-aligned with points");
    double total = 0.0;
    for (std::size_t i = 0; i < cc.cells.size(); ++i) {
        const Cell& c = cc.cells[i];
        if (!(c.volume_quanta > 0.0))
            throw Error("complex: cell " + std::to_string(i) + " has non-positive volume");
        total += c.volume_quanta;
        for (int j : c.neighbors) {
            if (j == static_cast<int>(i))
                throw Error("complex: cell " + std::to_string(i) + " is its own neighbor");
            const auto& back = cc.cells[j].neighbors;
            if (!std::binary_search(back.begin(), back.end(), static_cast<int>(i)))
                throw Error("complex: adjacency not symmetric between " + std::to_string(i) +
                            " and " + std::to_string(j));
        }
    }
    const double expected = cc.box_volume_units() / cc.quantum_volume;
    if (std::abs(total - expected) > 1e-9 * expected)
        throw Error("complex: cell volumes do not sum to the box volume");
    if (std::abs(cc.total_volume_quanta - total) > 1e-9 * expected)
        throw Error("complex: cached total volume is stale");
}

}  // namespace voroblocks
