#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "voroblocks/errors.hpp"
#include "voroblocks/geometry.hpp"
#include "voroblocks/posterior.hpp"

namespace voroblocks {

namespace detail {

using bigint = boost::multiprecision::cpp_int;

/// Factorials 0!..n! memoized across calls. The table is a deque so growth
/// never invalidates references already handed out; callers routinely hold
/// two entries at once inside one arithmetic expression.
inline const bigint& factorial(int n) {
    static std::deque<bigint> table{1};
    while (static_cast<int>(table.size()) <= n)
        table.push_back(table.back() * static_cast<int>(table.size()));
    return table[n];
}

/// log of a positive big integer. Large values are shifted down to 53 bits
/// first; the discarded tail perturbs the log by less than 2^-52.
inline double log_bigint(const bigint& x) {
    const unsigned bits = boost::multiprecision::msb(x);
    if (bits <= 52) return std::log(x.convert_to<double>());
    const bigint mantissa = x >> (bits - 52);
    return std::log(mantissa.convert_to<double>()) +
           static_cast<double>(bits - 52) * std::numbers::ln2_v<double>;
}

}  // namespace detail

/// A block posterior as an exact reduced fraction. Only defined for integer
/// N and V; the factorial form N! (V-N)! / (V+1)! is evaluated verbatim in
/// big-integer arithmetic.
struct ExactPosterior {
    detail::bigint numerator;
    detail::bigint denominator;

    double value() const {  // overflows double for very large V; fine below ~150
        return numerator.convert_to<double>() / denominator.convert_to<double>();
    }
    double log_value() const {
        return detail::log_bigint(numerator) - detail::log_bigint(denominator);
    }
};

inline ExactPosterior exact_phi(std::int64_t n, std::int64_t v) {
    if (n < 0 || n > v || v > 500)
        throw DomainError("exact_phi: need 0 <= n <= v <= 500, got n=" + std::to_string(n) +
                          " v=" + std::to_string(v));
    ExactPosterior out;
    out.numerator = detail::factorial(static_cast<int>(n)) *
                    detail::factorial(static_cast<int>(v - n));
    out.denominator = detail::factorial(static_cast<int>(v) + 1);
    const detail::bigint g = boost::multiprecision::gcd(out.numerator, out.denominator);
    out.numerator /= g;
    out.denominator /= g;
    return out;
}

struct OracleResult {
    std::vector<std::vector<int>> blocks;  // member cells, each ascending; blocks by smallest member
    double total_log_posterior = 0.0;
    bool exact = false;            // big-rational scoring was used
    std::uint64_t n_partitions = 0;  // connected partitions enumerated
};

namespace detail {

struct PartitionScore {
    bigint num{1};
    bigint den{1};
    long double log_score = 0.0L;
};

/// Exhaustive search over all partitions of up to 10 cells into connected
/// blocks. Blocks grow from the smallest unassigned cell, so each partition
/// is produced exactly once, in canonical order. Scores are exact rationals
/// when every volume is an integer and no prior penalty is in play, otherwise
/// extended-precision floating point.
class ExhaustiveSearch {
public:
    ExhaustiveSearch(std::vector<double> volumes, const std::vector<std::vector<int>>& neighbors,
                     double penalty)
        : volumes_(std::move(volumes)), penalty_(penalty) {
        n_ = static_cast<int>(volumes_.size());
        if (n_ == 0) throw EmptyInputError("exhaustive_optimum: no cells");
        if (n_ > 10)
            throw TooLargeError("exhaustive_optimum: " + std::to_string(n_) +
                                " cells; the connected-partition count grows too fast above 10");
        nbr_mask_.assign(n_, 0);
        for (int i = 0; i < n_; ++i)
            for (const int j : neighbors[i]) nbr_mask_[i] |= 1u << j;

        exact_ = penalty_ == 0.0;
        double total = 0.0;
        int_volumes_.assign(n_, 0);
        for (int i = 0; i < n_; ++i) {
            const double r = std::round(volumes_[i]);
            if (std::abs(volumes_[i] - r) > 1e-9) exact_ = false;
            int_volumes_[i] = static_cast<std::int64_t>(r);
            total += volumes_[i];
        }
        if (total > 500.0) exact_ = false;
    }

    OracleResult run() {
        std::vector<std::uint32_t> acc;
        recurse((1u << n_) - 1u, acc);
        self_check_path_count();
        OracleResult out;
        out.exact = exact_;
        out.n_partitions = count_;
        out.total_log_posterior =
            exact_ ? log_bigint(best_score_.num) - log_bigint(best_score_.den)
                   : static_cast<double>(best_score_.log_score);
        for (const std::uint32_t mask : best_) {
            std::vector<int> cells;
            for (int i = 0; i < n_; ++i)
                if (mask & (1u << i)) cells.push_back(i);
            out.blocks.push_back(std::move(cells));
        }
        return out;
    }

private:
    bool connected(std::uint32_t s) const {
        std::uint32_t seen = s & (~s + 1u);
        std::uint32_t frontier = seen;
        while (frontier) {
            std::uint32_t next = 0;
            std::uint32_t f = frontier;
            while (f) {
                const int i = std::countr_zero(f);
                f &= f - 1;
                next |= nbr_mask_[i];
            }
            next &= s & ~seen;
            seen |= next;
            frontier = next;
        }
        return seen == s;
    }

    void recurse(std::uint32_t remaining, std::vector<std::uint32_t>& acc) {
        if (remaining == 0) {
            visit(acc);
            return;
        }
        const int anchor = std::countr_zero(remaining);
        const std::uint32_t anchor_bit = 1u << anchor;
        const std::uint32_t rest = remaining & ~anchor_bit;
        std::uint32_t sub = rest;
        while (true) {
            const std::uint32_t block = sub | anchor_bit;
            if (connected(block)) {
                acc.push_back(block);
                recurse(remaining & ~block, acc);
                acc.pop_back();
            }
            if (sub == 0) break;
            sub = (sub - 1) & rest;
        }
    }

    PartitionScore score(const std::vector<std::uint32_t>& acc) const {
        PartitionScore s;
        for (const std::uint32_t mask : acc) {
            const int n = std::popcount(mask);
            if (exact_) {
                std::int64_t v = 0;
                std::uint32_t m = mask;
                while (m) {
                    v += int_volumes_[std::countr_zero(m)];
                    m &= m - 1;
                }
                s.num *= factorial(n) * factorial(static_cast<int>(v) - n);
                s.den *= factorial(static_cast<int>(v) + 1);
            } else {
                double v = 0.0;
                std::uint32_t m = mask;
                while (m) {
                    v += volumes_[std::countr_zero(m)];
                    m &= m - 1;
                }
                if (!(v > n - 1.0)) {
                    s.log_score = -std::numeric_limits<long double>::infinity();
                    return s;
                }
                s.log_score += std::lgammal(n + 1.0L) +
                               std::lgammal(static_cast<long double>(v) - n + 1.0L) -
                               std::lgammal(static_cast<long double>(v) + 2.0L) +
                               static_cast<long double>(penalty_);
            }
        }
        return s;
    }

    void visit(const std::vector<std::uint32_t>& acc) {
        ++count_;
        PartitionScore s = score(acc);
        int cmp;  // candidate vs incumbent: >0 better, 0 tie, <0 worse
        if (best_.empty()) {
            cmp = 1;
        } else if (exact_) {
            const bigint lhs = s.num * best_score_.den;
            const bigint rhs = best_score_.num * s.den;
            cmp = lhs > rhs ? 1 : (lhs == rhs ? 0 : -1);
        } else {
            cmp = s.log_score > best_score_.log_score
                      ? 1
                      : (s.log_score == best_score_.log_score ? 0 : -1);
        }
        if (cmp == 0) {
            // ties prefer fewer blocks, then the lexicographically smaller mask list
            if (acc.size() < best_.size() || (acc.size() == best_.size() && acc < best_))
                cmp = 1;
        }
        if (cmp > 0) {
            best_ = acc;
            best_score_ = std::move(s);
        }
    }

    /// A path of k cells has exactly 2^(k-1) connected partitions (each of the
    /// k-1 gaps is independently cut or not). When the input happens to be a
    /// path this closed form cross-checks the enumerator.
    void self_check_path_count() const {
        int deg1 = 0;
        for (int i = 0; i < n_; ++i) {
            const int d = std::popcount(nbr_mask_[i]);
            if (d == 1)
                ++deg1;
            else if (d != 2 && n_ > 1)
                return;
        }
        const bool path = (n_ == 1) || (deg1 == 2 && connected((1u << n_) - 1u));
        if (!path) return;
        const std::uint64_t expected = 1ull << (n_ - 1);
        if (count_ != expected)
            throw Error("exhaustive_optimum: path self-check expected " +
                        std::to_string(expected) + " partitions, enumerated " +
                        std::to_string(count_));
    }

    int n_ = 0;
    std::vector<double> volumes_;
    std::vector<std::int64_t> int_volumes_;
    std::vector<std::uint32_t> nbr_mask_;
    double penalty_ = 0.0;
    bool exact_ = false;
    std::uint64_t count_ = 0;
    std::vector<std::uint32_t> best_;
    PartitionScore best_score_;
};

}  // namespace detail

/// Global optimum over every partition of the cells into connected blocks,
/// scored by the same total posterior the greedy engine climbs. Each cell
/// carries one point. Ground truth for small instances.
inline OracleResult exhaustive_optimum(const std::vector<double>& volumes,
                                       const std::vector<std::vector<int>>& neighbors,
                                       double penalty = 0.0) {
    return detail::ExhaustiveSearch(volumes, neighbors, penalty).run();
}

inline OracleResult exhaustive_optimum(const CellComplex& cc, double penalty = 0.0) {
    std::vector<double> volumes;
    std::vector<std::vector<int>> neighbors;
    volumes.reserve(cc.cells.size());
    neighbors.reserve(cc.cells.size());
    for (const auto& c : cc.cells) {
        volumes.push_back(c.volume_quanta);
        neighbors.push_back(c.neighbors);
    }
    return exhaustive_optimum(volumes, neighbors, penalty);
}

}  // namespace voroblocks
