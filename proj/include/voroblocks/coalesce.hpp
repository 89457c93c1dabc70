#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "voroblocks/errors.hpp"
#include "voroblocks/geometry.hpp"
#include "voroblocks/posterior.hpp"

namespace voroblocks {

/// One live block of the partition. Blocks are identified by the smallest
/// member cell index; `version` bumps whenever the block's contents change so
/// queued merge candidates can detect staleness.
struct Block {
    BlockStats stats{};
    double log_phi = 0.0;
    std::uint64_t version = 0;
    bool alive = false;
    std::set<int> neighbors;  // live block ids, symmetric
};

/// A partition of the cells into blocks, maintained under merges. Membership
/// is a union-find forest over cell indices whose root is always the smallest
/// member id, so block ids are stable across runs. Path compression only
/// flattens the forest; root assignment depends on nothing but the merge
/// sequence.
class Partition {
public:
    Partition() = default;

    int n_cells() const { return static_cast<int>(blocks_.size()); }
    int n_live_blocks() const { return n_live_; }
    double total_log_posterior() const { return total_log_posterior_; }
    std::uint64_t version() const { return version_; }

    bool block_alive(int id) const {
        return id >= 0 && id < n_cells() && blocks_[id].alive;
    }

    const Block& block(int id) const { return blocks_[id]; }

    /// Block id owning a cell.
    int block_of(int cell) const {
        int r = cell;
        while (parent_[r] != r) r = parent_[r];
        while (parent_[cell] != r) {
            const int next = parent_[cell];
            parent_[cell] = r;
            cell = next;
        }
        return r;
    }

    /// Live block ids in ascending order.
    std::vector<int> live_roots() const {
        std::vector<int> out;
        out.reserve(n_live_);
        for (int i = 0; i < n_cells(); ++i)
            if (blocks_[i].alive) out.push_back(i);
        return out;
    }

    /// Member cells per live block, ascending within each block.
    std::map<int, std::vector<int>> members_by_block() const {
        std::map<int, std::vector<int>> out;
        for (int c = 0; c < n_cells(); ++c) out[block_of(c)].push_back(c);
        return out;
    }

    /// Total posterior recomputed from scratch; the incremental value must
    /// track this within rounding.
    double recompute_total_log_posterior() const {
        double sum = 0.0;
        for (int i = 0; i < n_cells(); ++i)
            if (blocks_[i].alive)
                sum += voroblocks::log_phi(blocks_[i].stats) + blocks_[i].stats.log_prior_penalty;
        return sum;
    }

    friend Partition init_partition(const CellComplex& cc, double penalty);
    friend double merge_blocks(Partition& p, int a, int b);

private:
    std::vector<Block> blocks_;
    mutable std::vector<int> parent_;
    double total_log_posterior_ = 0.0;
    std::uint64_t version_ = 0;
    int n_live_ = 0;
};

/// One block per cell: N = 1 (the generating point), V = the cell volume.
/// The quantization gate runs first; a sub-quantum cell would put a merged
/// block's V below its N - 1 eventually, so it is rejected here with the
/// largest quantum that would pass.
inline Partition init_partition(const CellComplex& cc, double penalty = 0.0) {
    const QuantizationReport rep = validate_quantization(cc);
    if (!rep.pass)
        throw QuantizationError(
            std::to_string(rep.failing_cells.size()) +
                " cell(s) hold less than one quantum of volume; largest passing quantum per"
                " dimension is carried in suggested_quantum",
            rep.suggested_quantum);
    Partition p;
    const int n = static_cast<int>(cc.cells.size());
    p.blocks_.resize(n);
    p.parent_.resize(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        p.parent_[i] = i;
        Block& b = p.blocks_[i];
        b.stats = BlockStats{1, cc.cells[i].volume_quanta, penalty};
        b.log_phi = log_phi(b.stats);
        b.alive = true;
        b.neighbors.insert(cc.cells[i].neighbors.begin(), cc.cells[i].neighbors.end());
        total += b.log_phi + penalty;
    }
    p.n_live_ = n;
    p.total_log_posterior_ = total;
    return p;
}

/// Merges two live adjacent blocks; the lower id absorbs the higher one.
/// Counts and volumes add, the absorbed block is deleted, and its neighbors
/// are rewired to the survivor. Returns the log merge factor, which is
/// exactly the change applied to the total log posterior.
inline double merge_blocks(Partition& p, int a, int b) {
    if (a > b) std::swap(a, b);
    if (a == b || !p.block_alive(a) || !p.block_alive(b))
        throw InvalidMergeError("merge_blocks: blocks " + std::to_string(a) + ", " +
                                std::to_string(b) + " are not two live blocks");
    Block& A = p.blocks_[a];
    Block& B = p.blocks_[b];
    if (A.neighbors.find(b) == A.neighbors.end())
        throw InvalidMergeError("merge_blocks: blocks " + std::to_string(a) + ", " +
                                std::to_string(b) + " are not adjacent");
    const double lmf = log_merge_factor_cached(A.stats, A.log_phi, B.stats, B.log_phi);
    A.stats = merged_stats(A.stats, B.stats);
    A.log_phi = log_phi(A.stats);
    ++A.version;
    B.alive = false;
    ++B.version;
    p.parent_[b] = a;
    A.neighbors.erase(b);
    for (const int x : B.neighbors) {
        if (x == a) continue;
        p.blocks_[x].neighbors.erase(b);
        p.blocks_[x].neighbors.insert(a);
        A.neighbors.insert(x);
    }
    B.neighbors.clear();
    p.total_log_posterior_ += lmf;
    ++p.version_;
    --p.n_live_;
    return lmf;
}

struct MergeEvent {
    std::uint64_t step = 0;  // 1-based
    int block_a = -1;
    int block_b = -1;
    double log_merge_factor = 0.0;
    double total_log_posterior = 0.0;  // after this step
};

using IterationHistory = std::vector<MergeEvent>;

struct CoalesceConfig {
    /// Hard step bound; a run can never take more than n_cells - 1 merges.
    std::uint64_t max_steps = std::numeric_limits<std::uint64_t>::max();
};

struct CoalesceResult {
    Partition partition;
    IterationHistory history;
    bool truncated = false;  // halted by max_steps while a positive pair remained
};

/// Greedy coalescence: repeatedly merge the adjacent pair with the largest
/// log merge factor while that factor is positive; a factor of exactly zero
/// halts. Equal factors break toward the smallest (a, b) id pair.
///
/// The max-heap holds one candidate per block: that block's best current
/// pair, stamped with both version counters. Queueing one entry per pair
/// would be correct too, but a block with a wide frontier then floods the
/// heap with entries it immediately invalidates again. Staleness is resolved
/// lazily when an entry surfaces: a changed owner means a newer entry for it
/// already exists and the old one is dropped; a changed partner means the
/// owner is rescanned and requeued. A merge only has to requeue the
/// survivor, because a pair's factor can change only through an event that
/// bumps one of its endpoints, so the endpoint queued last always carries a
/// candidate at least as good as the pair. A fresh non-positive top
/// therefore proves no positive pair remains.
inline CoalesceResult run_coalescence(Partition p, CoalesceConfig config = {}) {
    struct Cand {
        double lmf;
        int a, b;     // the pair, a < b
        int owner;    // the block whose scan produced this entry
        std::uint64_t va, vb;
    };
    struct Worse {
        bool operator()(const Cand& x, const Cand& y) const {
            if (x.lmf != y.lmf) return x.lmf < y.lmf;
            if (x.a != y.a) return x.a > y.a;
            return x.b > y.b;
        }
    };

    CoalesceResult out{std::move(p), {}, false};
    Partition& part = out.partition;

    std::priority_queue<Cand, std::vector<Cand>, Worse> heap;
    auto push_best = [&](int r) {
        const Block& R = part.block(r);
        Cand best{0.0, -1, -1, r, 0, 0};
        for (const int x : R.neighbors) {
            const Block& X = part.block(x);
            const double lmf = log_merge_factor_cached(R.stats, R.log_phi, X.stats, X.log_phi);
            Cand c{lmf, std::min(r, x), std::max(r, x), r, 0, 0};
            if (best.a < 0 || Worse{}(best, c)) best = c;
        }
        if (best.a < 0) return;
        best.va = part.block(best.a).version;
        best.vb = part.block(best.b).version;
        heap.push(best);
    };
    for (const int r : part.live_roots()) push_best(r);

    std::uint64_t steps = 0;
    while (!heap.empty()) {
        const Cand c = heap.top();
        const bool fresh = part.block_alive(c.a) && part.block_alive(c.b) &&
                           part.block(c.a).version == c.va && part.block(c.b).version == c.vb;
        if (!fresh) {
            heap.pop();
            // an intact owner means the partner side changed: rescan and
            // requeue; a changed owner already queued a newer entry itself
            const bool owner_intact =
                part.block_alive(c.owner) &&
                part.block(c.owner).version == (c.owner == c.a ? c.va : c.vb);
            if (owner_intact) push_best(c.owner);
            continue;
        }
        if (!(c.lmf > 0.0)) break;
        if (steps >= config.max_steps) {
            out.truncated = true;
            break;
        }
        heap.pop();
        const double applied = merge_blocks(part, c.a, c.b);
        ++steps;
        out.history.push_back({steps, c.a, c.b, applied, part.total_log_posterior()});
        push_best(c.a);
    }
    return out;
}

enum class BestModelMode { AtStop, MaxOverHistory };

/// Model selection over a completed run. The greedy engine only accepts
/// posterior-increasing merges, so the state at the stopping point and the
/// best state in the history are the same partition; MaxOverHistory verifies
/// that before returning it.
inline const Partition& best_model(const IterationHistory& history, const Partition& final_p,
                                   BestModelMode mode) {
    if (mode == BestModelMode::MaxOverHistory && !history.empty()) {
        double best = history.front().total_log_posterior;
        for (const auto& e : history) best = std::max(best, e.total_log_posterior);
        if (best != history.back().total_log_posterior ||
            best > final_p.total_log_posterior() + 1e-9)
            throw Error("best_model: history is not monotone; greedy invariant broken");
    }
    return final_p;
}

/// Structural audit used by tests: disjoint cover, per-block stats consistency,
/// volume conservation, adjacency matching the cell graph, and agreement of
/// the incremental total with a from-scratch recomputation. Throws on any
/// violation.
inline void verify_partition(const Partition& p, const CellComplex& cc) {
    const int n = p.n_cells();
    if (n != static_cast<int>(cc.cells.size()))
        throw Error("partition: cell count does not match the complex");
    const auto members = p.members_by_block();
    int covered = 0;
    double volume_sum = 0.0;
    for (const auto& [root, cells] : members) {
        if (!p.block_alive(root)) throw Error("partition: dead block owns cells");
        const Block& b = p.block(root);
        if (b.stats.n_points != static_cast<std::int64_t>(cells.size()))
            throw Error("partition: block " + std::to_string(root) +
                        " point count differs from its member count");
        if (cells.empty() || cells.front() != root)
            throw Error("partition: block id is not its smallest member cell");
        double v = 0.0;
        for (const int c : cells) v += cc.cells[c].volume_quanta;
        if (std::abs(v - b.stats.volume_quanta) > 1e-12 * std::max(1.0, v))
            throw Error("partition: block " + std::to_string(root) +
                        " volume differs from the sum of its member cells");
        covered += static_cast<int>(cells.size());
        volume_sum += b.stats.volume_quanta;
    }
    if (covered != n) throw Error("partition: blocks do not cover every cell exactly once");
    if (std::abs(volume_sum - cc.total_volume_quanta) >
        1e-9 * std::max(1.0, cc.total_volume_quanta))
        throw Error("partition: block volumes do not sum to the total volume");

    std::set<std::pair<int, int>> expected;
    for (int c = 0; c < n; ++c) {
        const int rc = p.block_of(c);
        for (const int d : cc.cells[c].neighbors) {
            const int rd = p.block_of(d);
            if (rc != rd) expected.insert({std::min(rc, rd), std::max(rc, rd)});
        }
    }
    std::set<std::pair<int, int>> actual;
    for (const auto& [root, cells] : members) {
        for (const int x : p.block(root).neighbors) {
            if (!p.block_alive(x))
                throw Error("partition: block " + std::to_string(root) +
                            " lists a dead neighbor");
            if (x == root) throw Error("partition: block is its own neighbor");
            if (p.block(x).neighbors.find(root) == p.block(x).neighbors.end())
                throw Error("partition: adjacency is not symmetric");
            actual.insert({std::min(root, x), std::max(root, x)});
        }
    }
    if (actual != expected)
        throw Error("partition: block adjacency does not match the contracted cell graph");

    if (std::abs(p.total_log_posterior() - p.recompute_total_log_posterior()) > 1e-8)
        throw Error("partition: cached total log posterior drifted from recomputation");
}

}  // namespace voroblocks
