#pragma once

#include <array>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "voroblocks/clusters.hpp"
#include "voroblocks/coalesce.hpp"
#include "voroblocks/errors.hpp"
#include "voroblocks/geometry.hpp"
#include "voroblocks/synthetic.hpp"

namespace voroblocks {

/// Every floating-point value in an output file goes through this one
/// formatter: 17 significant digits round-trip any double exactly and the
/// rendering never depends on locale or library version, so reruns produce
/// byte-identical files.
inline std::string format_double(double x) {
    if (!std::isfinite(x)) throw Error("output: non-finite number");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Streaming JSON writer with insertion-ordered keys and the fixed number
/// formatting above. Containers nest via begin/end; arrays may be marked
/// inline to keep short numeric lists on one line.
class JsonWriter {
public:
    explicit JsonWriter(std::ostream& os) : os_(os) {}

    JsonWriter& begin_object() {
        prefix();
        os_ << '{';
        stack_.push_back({'o', 0, false, false});
        return *this;
    }
    JsonWriter& end_object() {
        const Frame f = pop('o');
        if (f.count > 0) newline(stack_.size());
        os_ << '}';
        return *this;
    }
    JsonWriter& begin_array(bool inline_elements = false) {
        prefix();
        os_ << '[';
        stack_.push_back({'a', 0, false, inline_elements});
        return *this;
    }
    JsonWriter& end_array() {
        const Frame f = pop('a');
        if (f.count > 0 && !f.inline_elements) newline(stack_.size());
        os_ << ']';
        return *this;
    }
    JsonWriter& key(std::string_view k) {
        if (stack_.empty() || stack_.back().type != 'o' || stack_.back().key_pending)
            throw Error("json writer: key in a bad position");
        if (stack_.back().count > 0) os_ << ',';
        newline(stack_.size());
        quote(k);
        os_ << ": ";
        stack_.back().key_pending = true;
        return *this;
    }
    JsonWriter& value(double x) {
        prefix();
        os_ << format_double(x);
        return *this;
    }
    JsonWriter& value(std::int64_t x) {
        prefix();
        os_ << x;
        return *this;
    }
    JsonWriter& value(std::uint64_t x) {
        prefix();
        os_ << x;
        return *this;
    }
    JsonWriter& value(int x) { return value(static_cast<std::int64_t>(x)); }
    JsonWriter& value(bool b) {
        prefix();
        os_ << (b ? "true" : "false");
        return *this;
    }
    JsonWriter& value(std::string_view s) {
        prefix();
        quote(s);
        return *this;
    }
    JsonWriter& value(const char* s) { return value(std::string_view(s)); }
    JsonWriter& null() {
        prefix();
        os_ << "null";
        return *this;
    }

private:
    struct Frame {
        char type;
        std::size_t count;
        bool key_pending;
        bool inline_elements;
    };

    void newline(std::size_t depth) {
        os_ << '\n';
        for (std::size_t i = 0; i < depth; ++i) os_ << "  ";
    }
    void prefix() {
        if (stack_.empty()) return;
        Frame& f = stack_.back();
        if (f.type == 'o') {
            if (!f.key_pending) throw Error("json writer: object value without key");
            f.key_pending = false;
            ++f.count;
            return;
        }
        if (f.count > 0) os_ << (f.inline_elements ? ", " : ",");
        if (!f.inline_elements) newline(stack_.size());
        ++f.count;
    }
    Frame pop(char type) {
        if (stack_.empty() || stack_.back().type != type || stack_.back().key_pending)
            throw Error("json writer: mismatched container end");
        const Frame f = stack_.back();
        stack_.pop_back();
        return f;
    }
    void quote(std::string_view s) {
        os_ << '"';
        for (const char c : s) {
            switch (c) {
                case '"': os_ << "\\\""; break;
                case '\\': os_ << "\\\\"; break;
                case '\n': os_ << "\\n"; break;
                case '\r': os_ << "\\r"; break;
                case '\t': os_ << "\\t"; break;
                case '\b': os_ << "\\b"; break;
                case '\f': os_ << "\\f"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof buf, "\\u%04x", c);
                        os_ << buf;
                    } else {
                        os_ << c;
                    }
            }
        }
        os_ << '"';
    }

    std::vector<Frame> stack_;
    std::ostream& os_;
};

// ---------------------------------------------------------------- CSV

namespace detail {

inline bool parse_double_token(const std::string& t, double& out) {
    if (t.empty()) return false;
    errno = 0;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && errno == 0 && std::isfinite(out);
}

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        const auto b = cur.find_first_not_of(" \t");
        const auto e = cur.find_last_not_of(" \t");
        out.push_back(b == std::string::npos ? std::string{} : cur.substr(b, e - b + 1));
        cur.clear();
    };
    for (const char c : line) {
        if (c == ',')
            flush();
        else
            cur += c;
    }
    flush();
    if (out.size() == 1 && !out[0].empty()) {
        // no commas: fall back to whitespace separation
        std::vector<std::string> ws;
        std::string tok;
        for (const char c : out[0]) {
            if (c == ' ' || c == '\t') {
                if (!tok.empty()) ws.push_back(std::move(tok));
                tok.clear();
            } else {
                tok += c;
            }
        }
        if (!tok.empty()) ws.push_back(std::move(tok));
        if (ws.size() > 1) return ws;
    }
    return out;
}

}  // namespace detail

/// Reads point rows: `dim` numeric columns per row, comma or whitespace
/// separated. Blank lines and lines starting with '#' are skipped; one
/// leading non-numeric row is treated as a header. Errors carry the source
/// name and 1-based line number. Zero data rows is not an error here; the
/// pipeline decides whether empty input is acceptable.
inline std::vector<Point> read_points_csv(std::istream& is, const std::string& name, int dim) {
    if (dim != 1 && dim != 2) throw ConfigError("read_points_csv: dim must be 1 or 2");
    std::vector<Point> pts;
    std::string line;
    std::size_t lineno = 0;
    bool allow_header = true;
    while (std::getline(is, line)) {
        ++lineno;
        if (lineno == 1 && line.size() >= 3 && line[0] == '\xEF' && line[1] == '\xBB' &&
            line[2] == '\xBF')
            line.erase(0, 3);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const std::vector<std::string> fields = detail::split_fields(line);
        std::vector<double> vals(fields.size());
        bool ok = true;
        for (std::size_t i = 0; i < fields.size() && ok; ++i)
            ok = detail::parse_double_token(fields[i], vals[i]);
        if (!ok) {
            if (allow_header) {
                allow_header = false;
                continue;
            }
            throw ParseError(name + ":" + std::to_string(lineno) + ": non-numeric field");
        }
        if (static_cast<int>(vals.size()) != dim)
            throw ParseError(name + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(dim) + " column(s), found " +
                             std::to_string(vals.size()));
        allow_header = false;
        pts.push_back({vals[0], dim == 2 ? vals[1] : 0.0});
    }
    return pts;
}

inline std::vector<Point> read_points_csv(const std::string& path, int dim) {
    std::ifstream f(path);
    if (!f) throw ParseError(path + ": cannot open file");
    return read_points_csv(f, path, dim);
}

inline void write_points_csv(std::ostream& os, const std::vector<Point>& pts, int dim) {
    os << (dim == 2 ? "x,y\n" : "x\n");
    for (const auto& p : pts) {
        os << format_double(p[0]);
        if (dim == 2) os << ',' << format_double(p[1]);
        os << '\n';
    }
}

// ---------------------------------------------------------------- RunConfig

constexpr std::uint64_t kNoStepLimit = std::numeric_limits<std::uint64_t>::max();

struct RunConfig {
    int dim = 2;
    std::string input;
    bool bounds_auto = true;
    double bounds_expand = 0.05;  // per-side fraction of the data range
    std::array<Interval, 2> bounds{};
    bool quantum_auto = true;  // rescale so the smallest cell is one quantum
    std::array<double, 2> quantum{1.0, 1.0};
    double penalty = 0.0;
    double threshold_ratio = 2.0;
    bool emit_grid = false;
    std::array<int, 2> grid{0, 0};
    std::uint64_t seed = 0;
    bool jitter = false;
    std::string out_dir = ".";
    bool emit_history = false;
    bool emit_cells = false;
    AdjacencyRule adjacency = AdjacencyRule::SharedVertex;
    std::uint64_t max_steps = kNoStepLimit;
};

inline void validate_config(const RunConfig& cfg) {
    if (cfg.dim != 1 && cfg.dim != 2) throw ConfigError("config: dim must be 1 or 2");
    if (!(cfg.bounds_expand >= 0.0) || !std::isfinite(cfg.bounds_expand))
        throw ConfigError("config: bounds_expand must be a non-negative number");
    if (!cfg.bounds_auto)
        for (int d = 0; d < cfg.dim; ++d)
            if (!(cfg.bounds[d].lo < cfg.bounds[d].hi))
                throw ConfigError("config: bounds must satisfy lo < hi per dimension");
    if (!cfg.quantum_auto)
        for (int d = 0; d < cfg.dim; ++d)
            if (!(cfg.quantum[d] > 0.0) || !std::isfinite(cfg.quantum[d]))
                throw ConfigError("config: quantum must be positive per dimension");
    if (!std::isfinite(cfg.penalty)) throw ConfigError("config: penalty must be finite");
    if (!(cfg.threshold_ratio > 1.0))
        throw ConfigError("config: threshold_ratio must exceed 1");
    if (cfg.emit_grid)
        for (int d = 0; d < cfg.dim; ++d)
            if (cfg.grid[d] < 1)
                throw ConfigError("config: grid resolution must be at least 1 per dimension");
}

namespace detail {

inline nlohmann::json parse_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError(path + ": cannot open file");
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

template <typename T>
T get_as(const nlohmann::json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config: bad value for key '" + key + "'");
    }
}

}  // namespace detail

/// Loads a RunConfig from JSON. Unknown keys are rejected so typos fail loudly.
/// `base` carries the defaults; only keys present in the JSON are overridden.
inline RunConfig load_run_config(const nlohmann::json& j, RunConfig base = {}) {
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    nlohmann::json bounds_raw, quantum_raw, grid_raw;
    for (const auto& [key, val] : j.items()) {
        if (key == "dim")
            base.dim = detail::get_as<int>(val, key);
        else if (key == "input")
            base.input = detail::get_as<std::string>(val, key);
        else if (key == "bounds")
            bounds_raw = val;
        else if (key == "bounds_expand")
            base.bounds_expand = detail::get_as<double>(val, key);
        else if (key == "quantum")
            quantum_raw = val;
        else if (key == "penalty")
            base.penalty = detail::get_as<double>(val, key);
        else if (key == "threshold_ratio")
            base.threshold_ratio = detail::get_as<double>(val, key);
        else if (key == "grid")
            grid_raw = val;
        else if (key == "seed")
            base.seed = detail::get_as<std::uint64_t>(val, key);
        else if (key == "jitter")
            base.jitter = detail::get_as<bool>(val, key);
        else if (key == "out_dir")
            base.out_dir = detail::get_as<std::string>(val, key);
        else if (key == "emit_history")
            base.emit_history = detail::get_as<bool>(val, key);
        else if (key == "emit_cells")
            base.emit_cells = detail::get_as<bool>(val, key);
        else if (key == "adjacency") {
            const auto s = detail::get_as<std::string>(val, key);
            if (s == "vertex")
                base.adjacency = AdjacencyRule::SharedVertex;
            else if (s == "edge")
                base.adjacency = AdjacencyRule::SharedEdge;
            else
                throw ConfigError("config: adjacency must be \"vertex\" or \"edge\"");
        } else if (key == "max_steps") {
            base.max_steps =
                val.is_null() ? kNoStepLimit : detail::get_as<std::uint64_t>(val, key);
        } else {
            throw ConfigError("config: unknown configuration key '" + key + "'");
        }
    }
    if (!bounds_raw.is_null()) {
        if (bounds_raw.is_string() && bounds_raw.get<std::string>() == "auto") {
            base.bounds_auto = true;
        } else if (bounds_raw.is_array() &&
                   static_cast<int>(bounds_raw.size()) == base.dim) {
            base.bounds_auto = false;
            for (int d = 0; d < base.dim; ++d) {
                const auto& pair = bounds_raw[d];
                if (!pair.is_array() || pair.size() != 2)
                    throw ConfigError("config: bounds entries must be [lo, hi] pairs");
                base.bounds[d] = {detail::get_as<double>(pair[0], "bounds"),
                                  detail::get_as<double>(pair[1], "bounds")};
            }
        } else {
            throw ConfigError("config: bounds must be \"auto\" or one [lo, hi] per dimension");
        }
    }
    if (!quantum_raw.is_null()) {
        if (quantum_raw.is_string() && quantum_raw.get<std::string>() == "auto") {
            base.quantum_auto = true;
        } else if (quantum_raw.is_array() &&
                   static_cast<int>(quantum_raw.size()) == base.dim) {
            base.quantum_auto = false;
            for (int d = 0; d < base.dim; ++d)
                base.quantum[d] = detail::get_as<double>(quantum_raw[d], "quantum");
        } else {
            throw ConfigError("config: quantum must be \"auto\" or one value per dimension");
        }
    }
    if (!grid_raw.is_null()) {
        if (!grid_raw.is_array() || static_cast<int>(grid_raw.size()) != base.dim)
            throw ConfigError("config: grid must list one resolution per dimension");
        base.emit_grid = true;
        for (int d = 0; d < base.dim; ++d)
            base.grid[d] = detail::get_as<int>(grid_raw[d], "grid");
    }
    validate_config(base);
    return base;
}

inline RunConfig load_run_config_file(const std::string& path, RunConfig base = {}) {
    return load_run_config(detail::parse_json_file(path), std::move(base));
}

/// Inverse of load_run_config; a config survives a write/load cycle unchanged.
inline void write_run_config(std::ostream& os, const RunConfig& cfg) {
    JsonWriter w(os);
    w.begin_object();
    w.key("dim").value(cfg.dim);
    w.key("input").value(cfg.input);
    if (cfg.bounds_auto) {
        w.key("bounds").value("auto");
    } else {
        w.key("bounds").begin_array();
        for (int d = 0; d < cfg.dim; ++d) {
            w.begin_array(true).value(cfg.bounds[d].lo).value(cfg.bounds[d].hi).end_array();
        }
        w.end_array();
    }
    w.key("bounds_expand").value(cfg.bounds_expand);
    if (cfg.quantum_auto) {
        w.key("quantum").value("auto");
    } else {
        w.key("quantum").begin_array(true);
        for (int d = 0; d < cfg.dim; ++d) w.value(cfg.quantum[d]);
        w.end_array();
    }
    w.key("penalty").value(cfg.penalty);
    w.key("threshold_ratio").value(cfg.threshold_ratio);
    if (cfg.emit_grid) {
        w.key("grid").begin_array(true);
        for (int d = 0; d < cfg.dim; ++d) w.value(cfg.grid[d]);
        w.end_array();
    } else {
        w.key("grid").null();
    }
    w.key("seed").value(cfg.seed);
    w.key("jitter").value(cfg.jitter);
    w.key("out_dir").value(cfg.out_dir);
    w.key("emit_history").value(cfg.emit_history);
    w.key("emit_cells").value(cfg.emit_cells);
    w.key("adjacency").value(cfg.adjacency == AdjacencyRule::SharedEdge ? "edge" : "vertex");
    if (cfg.max_steps == kNoStepLimit)
        w.key("max_steps").null();
    else
        w.key("max_steps").value(cfg.max_steps);
    w.end_object();
    os << '\n';
}

// ---------------------------------------------------------------- SyntheticSpec

inline const char* hotspot_shape_name(Hotspot::Shape s) {
    switch (s) {
        case Hotspot::Shape::Rectangle: return "rectangle";
        case Hotspot::Shape::Disk: return "disk";
        case Hotspot::Shape::Gaussian: return "gaussian";
    }
    return "disk";
}

inline Hotspot::Shape hotspot_shape_from_name(const std::string& s) {
    if (s == "rectangle") return Hotspot::Shape::Rectangle;
    if (s == "disk") return Hotspot::Shape::Disk;
    if (s == "gaussian") return Hotspot::Shape::Gaussian;
    throw InvalidSpecError("synthetic: unknown hotspot shape '" + s + "'");
}

inline SyntheticSpec load_synthetic_spec(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidSpecError("synthetic spec: top level must be an object");
    SyntheticSpec spec;
    nlohmann::json box_raw, hotspots_raw;
    for (const auto& [key, val] : j.items()) {
        if (key == "dim")
            spec.dim = detail::get_as<int>(val, key);
        else if (key == "box")
            box_raw = val;
        else if (key == "background_rate")
            spec.background_rate = detail::get_as<double>(val, key);
        else if (key == "seed")
            spec.seed = detail::get_as<std::uint64_t>(val, key);
        else if (key == "hotspots")
            hotspots_raw = val;
        else
            throw InvalidSpecError("synthetic spec: unknown key '" + key + "'");
    }
    if (spec.dim != 1 && spec.dim != 2)
        throw InvalidSpecError("synthetic spec: dim must be 1 or 2");
    if (!box_raw.is_array() || static_cast<int>(box_raw.size()) != spec.dim)
        throw InvalidSpecError("synthetic spec: box must list one [lo, hi] per dimension");
    for (int d = 0; d < spec.dim; ++d) {
        const auto& pair = box_raw[d];
        if (!pair.is_array() || pair.size() != 2)
            throw InvalidSpecError("synthetic spec: box entries must be [lo, hi] pairs");
        spec.box[d] = {detail::get_as<double>(pair[0], "box"),
                       detail::get_as<double>(pair[1], "box")};
    }
    if (!hotspots_raw.is_null()) {
        if (!hotspots_raw.is_array())
            throw InvalidSpecError("synthetic spec: hotspots must be an array");
        for (const auto& hj : hotspots_raw) {
            Hotspot h;
            bool has_center = false;
            for (const auto& [key, val] : hj.items()) {
                if (key == "shape")
                    h.shape = hotspot_shape_from_name(detail::get_as<std::string>(val, key));
                else if (key == "center") {
                    if (!val.is_array() || static_cast<int>(val.size()) != spec.dim)
                        throw InvalidSpecError(
                            "synthetic spec: hotspot center must have one value per dimension");
                    for (int d = 0; d < spec.dim; ++d)
                        h.center[d] = detail::get_as<double>(val[d], "center");
                    has_center = true;
                } else if (key == "size")
                    h.size = detail::get_as<double>(val, key);
                else if (key == "rate_multiplier")
                    h.rate_multiplier = detail::get_as<double>(val, key);
                else
                    throw InvalidSpecError("synthetic spec: unknown hotspot key '" + key + "'");
            }
            if (!has_center)
                throw InvalidSpecError("synthetic spec: hotspot missing center");
            spec.hotspots.push_back(h);
        }
    }
    validate_spec(spec);
    return spec;
}

inline SyntheticSpec load_synthetic_spec_file(const std::string& path) {
    return load_synthetic_spec(detail::parse_json_file(path));
}

namespace detail {

inline void write_spec_body(JsonWriter& w, const SyntheticSpec& spec) {
    w.begin_object();
    w.key("dim").value(spec.dim);
    w.key("box").begin_array();
    for (int d = 0; d < spec.dim; ++d)
        w.begin_array(true).value(spec.box[d].lo).value(spec.box[d].hi).end_array();
    w.end_array();
    w.key("background_rate").value(spec.background_rate);
    w.key("seed").value(spec.seed);
    w.key("hotspots").begin_array();
    for (const auto& h : spec.hotspots) {
        w.begin_object();
        w.key("shape").value(hotspot_shape_name(h.shape));
        w.key("center").begin_array(true);
        for (int d = 0; d < spec.dim; ++d) w.value(h.center[d]);
        w.end_array();
        w.key("size").value(h.size);
        w.key("rate_multiplier").value(h.rate_multiplier);
        w.end_object();
    }
    w.end_array();
    w.end_object();
}

}  // namespace detail

inline void write_synthetic_spec(std::ostream& os, const SyntheticSpec& spec) {
    JsonWriter w(os);
    detail::write_spec_body(w, spec);
    os << '\n';
}

/// Sidecar recording what the generator actually drew, next to the spec that
/// drove it.
inline void write_ground_truth_json(std::ostream& os, const SyntheticSpec& spec,
                                    const SyntheticResult& res) {
    JsonWriter w(os);
    w.begin_object();
    w.key("spec");
    detail::write_spec_body(w, spec);
    w.key("expected_count").value(expected_count(spec));
    w.key("observed_total").value(static_cast<std::int64_t>(res.points.size()));
    w.key("observed_background").value(res.n_background);
    w.key("observed_per_hotspot").begin_array(true);
    for (const auto n : res.n_per_hotspot) w.value(n);
    w.end_array();
    w.end_object();
    os << '\n';
}

// ---------------------------------------------------------------- results

inline void write_partition_json(std::ostream& os, const Partition& p, const CellComplex& cc) {
    const auto members = p.members_by_block();
    JsonWriter w(os);
    w.begin_object();
    w.key("dim").value(cc.ps.dim);
    w.key("n_points").value(p.n_cells());
    w.key("quantum").begin_array(true);
    for (int d = 0; d < cc.ps.dim; ++d) w.value(cc.ps.quantum[d]);
    w.end_array();
    w.key("quantum_volume").value(cc.quantum_volume);
    w.key("total_log_posterior").value(p.total_log_posterior());
    w.key("n_blocks").value(p.n_live_blocks());
    w.key("blocks").begin_array();
    for (const auto& [root, cells] : members) {
        const Block& b = p.block(root);
        w.begin_object();
        w.key("id").value(root);
        w.key("n_points").value(b.stats.n_points);
        w.key("volume_quanta").value(b.stats.volume_quanta);
        w.key("volume_units").value(b.stats.volume_quanta * cc.quantum_volume);
        w.key("density").value(block_density(b.stats, cc.quantum_volume));
        w.key("log_phi").value(b.log_phi);
        w.key("member_points").begin_array(true);
        for (const int c : cells) w.value(c);
        w.end_array();
        w.end_object();
    }
    w.end_array();
    w.end_object();
    os << '\n';
}

inline void write_clusters_json(std::ostream& os, const ClusterReport& rep) {
    JsonWriter w(os);
    w.begin_object();
    w.key("background_density").value(rep.background_density);
    w.key("threshold_ratio").value(rep.threshold_ratio);
    w.key("n_clusters").value(static_cast<std::int64_t>(rep.clusters.size()));
    w.key("clusters").begin_array();
    for (const auto& cl : rep.clusters) {
        w.begin_object();
        w.key("id").value(cl.id);
        w.key("member_blocks").begin_array(true);
        for (const int b : cl.member_blocks) w.value(b);
        w.end_array();
        w.key("total_n").value(cl.total_n);
        w.key("volume_quanta").value(cl.total_volume_quanta);
        w.key("volume_units").value(cl.total_volume_units);
        w.key("mean_density").value(cl.mean_density);
        w.key("peak_block_density").value(cl.peak_block_density);
        w.end_object();
    }
    w.end_array();
    w.key("block_to_cluster").begin_array();
    for (const auto& [block, cluster] : rep.block_to_cluster) {
        w.begin_object();
        w.key("block").value(block);
        w.key("cluster").value(cluster);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    os << '\n';
}

inline void write_history_json(std::ostream& os, const IterationHistory& h, bool truncated) {
    JsonWriter w(os);
    w.begin_object();
    w.key("truncated").value(truncated);
    w.key("n_steps").value(static_cast<std::int64_t>(h.size()));
    w.key("steps").begin_array();
    for (const auto& e : h) {
        w.begin_object();
        w.key("step").value(e.step);
        w.key("block_a").value(e.block_a);
        w.key("block_b").value(e.block_b);
        w.key("log_merge_factor").value(e.log_merge_factor);
        w.key("total_log_posterior").value(e.total_log_posterior);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    os << '\n';
}

inline void write_cells_json(std::ostream& os, const CellComplex& cc) {
    JsonWriter w(os);
    w.begin_object();
    w.key("dim").value(cc.ps.dim);
    w.key("bounds").begin_array();
    for (int d = 0; d < cc.ps.dim; ++d)
        w.begin_array(true).value(cc.ps.bounds[d].lo).value(cc.ps.bounds[d].hi).end_array();
    w.end_array();
    w.key("quantum").begin_array(true);
    for (int d = 0; d < cc.ps.dim; ++d) w.value(cc.ps.quantum[d]);
    w.end_array();
    w.key("quantum_volume").value(cc.quantum_volume);
    w.key("adjacency").value(cc.adjacency == AdjacencyRule::SharedEdge ? "edge" : "vertex");
    w.key("total_volume_quanta").value(cc.total_volume_quanta);
    w.key("n_cells").value(static_cast<std::int64_t>(cc.cells.size()));
    w.key("cells").begin_array();
    for (std::size_t i = 0; i < cc.cells.size(); ++i) {
        const Cell& c = cc.cells[i];
        w.begin_object();
        w.key("index").value(static_cast<std::int64_t>(i));
        w.key("point").begin_array(true);
        for (int d = 0; d < cc.ps.dim; ++d) w.value(cc.ps.points[i][d]);
        w.end_array();
        w.key("volume_quanta").value(c.volume_quanta);
        w.key("neighbors").begin_array(true);
        for (const int nb : c.neighbors) w.value(nb);
        w.end_array();
        if (cc.ps.dim == 1) {
            w.key("interval").begin_array(true).value(c.interval.lo).value(c.interval.hi);
            w.end_array();
        } else {
            w.key("polygon").begin_array();
            for (const auto& v : c.polygon)
                w.begin_array(true).value(v[0]).value(v[1]).end_array();
            w.end_array();
        }
        w.end_object();
    }
    w.end_array();
    w.end_object();
    os << '\n';
}

/// Raster as CSV: '#' header lines carry the geometry, then one row of values
/// per grid row (a single row in 1D).
inline void write_raster_csv(std::ostream& os, const DensityRaster& r) {
    os << "# dim," << r.dim << '\n';
    os << "# bounds_x," << format_double(r.bounds[0].lo) << ',' << format_double(r.bounds[0].hi)
       << '\n';
    if (r.dim == 2)
        os << "# bounds_y," << format_double(r.bounds[1].lo) << ','
           << format_double(r.bounds[1].hi) << '\n';
    os << "# resolution," << r.resolution[0];
    if (r.dim == 2) os << ',' << r.resolution[1];
    os << '\n';
    const int nx = r.resolution[0];
    const int ny = r.dim == 2 ? r.resolution[1] : 1;
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            if (ix > 0) os << ',';
            os << format_double(r.values[static_cast<std::size_t>(iy) * nx + ix]);
        }
        os << '\n';
    }
}

}  // namespace voroblocks
