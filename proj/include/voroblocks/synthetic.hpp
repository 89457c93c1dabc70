#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "voroblocks/errors.hpp"
#include "voroblocks/geometry.hpp"
#include "voroblocks/random.hpp"

namespace voroblocks {

/// One region of elevated rate. `rate_multiplier` scales the background rate
/// inside the region; when the background rate is zero the multiplier is read
/// as an absolute rate in points per unit volume, so a pure-hotspot spec still
/// means something. `size` is the half-side (rectangle), radius (disk), or
/// standard deviation (gaussian).
struct Hotspot {
    enum class Shape { Rectangle, Disk, Gaussian };
    Shape shape = Shape::Disk;
    Point center{0.0, 0.0};
    double size = 1.0;
    double rate_multiplier = 1.0;
};

struct SyntheticSpec {
    int dim = 2;
    std::array<Interval, 2> box{};
    double background_rate = 0.0;  // points per unit coordinate volume
    std::vector<Hotspot> hotspots;
    std::uint64_t seed = 0;
};

struct SyntheticResult {
    std::vector<Point> points;  // background first, then each hotspot in order
    std::int64_t n_background = 0;
    std::vector<std::int64_t> n_per_hotspot;  // observed inside the box
};

/// Extra rate a hotspot adds on top of the background.
inline double hotspot_added_rate(double background_rate, double multiplier) {
    return background_rate > 0.0 ? (multiplier - 1.0) * background_rate : multiplier;
}

/// Coordinate measure of a hotspot region; for a gaussian this is the
/// full-space integral of a unit-peak profile, so added_rate x measure is the
/// expected extra count in every case.
inline double hotspot_measure(const Hotspot& h, int dim) {
    constexpr double pi = 3.14159265358979323846;
    switch (h.shape) {
        case Hotspot::Shape::Rectangle:
            return dim == 1 ? 2.0 * h.size : 4.0 * h.size * h.size;
        case Hotspot::Shape::Disk:
            return dim == 1 ? 2.0 * h.size : pi * h.size * h.size;
        case Hotspot::Shape::Gaussian:
            return dim == 1 ? h.size * std::sqrt(2.0 * pi) : 2.0 * pi * h.size * h.size;
    }
    return 0.0;
}

inline void validate_spec(const SyntheticSpec& spec) {
    if (spec.dim != 1 && spec.dim != 2) throw InvalidSpecError("synthetic: dim must be 1 or 2");
    for (int d = 0; d < spec.dim; ++d)
        if (!(spec.box[d].lo < spec.box[d].hi))
            throw InvalidSpecError("synthetic: box must satisfy lo < hi per dimension");
    if (!(spec.background_rate >= 0.0) || !std::isfinite(spec.background_rate))
        throw InvalidSpecError("synthetic: background rate must be finite and non-negative");
    for (std::size_t i = 0; i < spec.hotspots.size(); ++i) {
        const Hotspot& h = spec.hotspots[i];
        if (!(h.size > 0.0) || !std::isfinite(h.size))
            throw InvalidSpecError("synthetic: hotspot " + std::to_string(i) +
                                   " size must be positive");
        if (hotspot_added_rate(spec.background_rate, h.rate_multiplier) < 0.0)
            throw InvalidSpecError("synthetic: hotspot " + std::to_string(i) +
                                   " would subtract rate; multipliers below 1 are not supported");
        for (int d = 0; d < spec.dim; ++d) {
            const double c = h.center[d];
            if (c < spec.box[d].lo || c > spec.box[d].hi)
                throw InvalidSpecError("synthetic: hotspot " + std::to_string(i) +
                                       " center outside the box");
            if (h.shape != Hotspot::Shape::Gaussian &&
                (c - h.size < spec.box[d].lo || c + h.size > spec.box[d].hi))
                throw InvalidSpecError("synthetic: hotspot " + std::to_string(i) +
                                       " extends outside the box");
        }
    }
}

/// Expected number of generated points (gaussian tails outside the box are
/// counted, so the observed mean sits slightly below this for gaussians near
/// an edge).
inline double expected_count(const SyntheticSpec& spec) {
    double vol = spec.box[0].length();
    if (spec.dim == 2) vol *= spec.box[1].length();
    double sum = spec.background_rate * vol;
    for (const auto& h : spec.hotspots)
        sum += hotspot_added_rate(spec.background_rate, h.rate_multiplier) *
               hotspot_measure(h, spec.dim);
    return sum;
}

/// Piecewise-constant (plus gaussian bumps) Poisson process sampler. Each
/// region contributes an independent Poisson-distributed count placed by its
/// own geometry; hotspot rates add to the background. Fully determined by the
/// spec seed. Gaussian points falling outside the box are dropped, which is
/// exactly the truncation an observation window applies.
inline SyntheticResult generate_synthetic(const SyntheticSpec& spec) {
    validate_spec(spec);
    constexpr double pi = 3.14159265358979323846;
    RandomSource rng(spec.seed);
    SyntheticResult out;

    double vol = spec.box[0].length();
    if (spec.dim == 2) vol *= spec.box[1].length();
    const std::int64_t n_bg = rng.poisson(spec.background_rate * vol);
    for (std::int64_t k = 0; k < n_bg; ++k) {
        Point p{rng.uniform(spec.box[0].lo, spec.box[0].hi), 0.0};
        if (spec.dim == 2) p[1] = rng.uniform(spec.box[1].lo, spec.box[1].hi);
        out.points.push_back(p);
    }
    out.n_background = n_bg;

    for (const auto& h : spec.hotspots) {
        const double extra =
            hotspot_added_rate(spec.background_rate, h.rate_multiplier) *
            hotspot_measure(h, spec.dim);
        const std::int64_t n = rng.poisson(extra);
        std::int64_t kept = 0;
        for (std::int64_t k = 0; k < n; ++k) {
            Point p{0.0, 0.0};
            switch (h.shape) {
                case Hotspot::Shape::Rectangle:
                    p[0] = rng.uniform(h.center[0] - h.size, h.center[0] + h.size);
                    if (spec.dim == 2)
                        p[1] = rng.uniform(h.center[1] - h.size, h.center[1] + h.size);
                    break;
                case Hotspot::Shape::Disk:
                    if (spec.dim == 1) {
                        p[0] = rng.uniform(h.center[0] - h.size, h.center[0] + h.size);
                    } else {
                        // area-uniform polar draw
                        const double r = h.size * std::sqrt(rng.uniform01());
                        const double theta = 2.0 * pi * rng.uniform01();
                        p[0] = h.center[0] + r * std::cos(theta);
                        p[1] = h.center[1] + r * std::sin(theta);
                    }
                    break;
                case Hotspot::Shape::Gaussian:
                    p[0] = h.center[0] + h.size * rng.normal();
                    if (spec.dim == 2) p[1] = h.center[1] + h.size * rng.normal();
                    break;
            }
            bool inside = p[0] >= spec.box[0].lo && p[0] <= spec.box[0].hi;
            if (spec.dim == 2)
                inside = inside && p[1] >= spec.box[1].lo && p[1] <= spec.box[1].hi;
            if (!inside) continue;
            out.points.push_back(p);
            ++kept;
        }
        out.n_per_hotspot.push_back(kept);
    }
    return out;
}

}  // namespace voroblocks
