#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "voroblocks/errors.hpp"

namespace voroblocks {

/// Marginal statistics of one constant-rate block: point count N and volume V
/// counted in quanta. The local event rate never appears; it is integrated out
/// of the posterior. `log_prior_penalty` is an optional constant log-prior per
/// block (default 0) and is expected to be uniform across a partition.
struct BlockStats {
    std::int64_t n_points = 0;
    double volume_quanta = 0.0;
    double log_prior_penalty = 0.0;
};

/// log Phi(N, V) = lnG(N+1) + lnG(V-N+1) - lnG(V+2), the log posterior of a
/// single block with N points in volume V quanta. V may be non-integral.
/// Requires V > N - 1 so the middle gamma argument stays positive.
inline double log_phi(std::int64_t n, double v) {
    if (n < 0) throw DomainError("log_phi: negative point count N=" + std::to_string(n));
    const double nd = static_cast<double>(n);
    if (!(v > nd - 1.0))
        throw DomainError("log_phi: volume V=" + std::to_string(v) +
                          " must exceed N-1 with N=" + std::to_string(n));
    return std::lgamma(nd + 1.0) + std::lgamma(v - nd + 1.0) - std::lgamma(v + 2.0);
}

inline double log_phi(const BlockStats& b) { return log_phi(b.n_points, b.volume_quanta); }

/// Stats of the union of two blocks. Counts and volumes add. The merged block
/// keeps the (uniform) per-block penalty; the halved sum equals either input's
/// penalty exactly when they agree and stays symmetric in (a, b) when they don't.
inline BlockStats merged_stats(const BlockStats& a, const BlockStats& b) {
    return {a.n_points + b.n_points, a.volume_quanta + b.volume_quanta,
            0.5 * (a.log_prior_penalty + b.log_prior_penalty)};
}

/// Same merge factor with the two single-block log posteriors already known.
/// Callers that cache log_phi per block (the coalescence engine) use this form;
/// it is bit-identical to recomputing because log_phi is deterministic.
inline double log_merge_factor_cached(const BlockStats& a, double log_phi_a,
                                      const BlockStats& b, double log_phi_b) {
    const double joint =
        log_phi(a.n_points + b.n_points, a.volume_quanta + b.volume_quanta);
    return joint - (log_phi_a + log_phi_b) -
           0.5 * (a.log_prior_penalty + b.log_prior_penalty);
}

/// Log of the ratio posterior(merged) / posterior(separate) for two blocks.
/// Positive favors the merge. The penalty enters once: a merge removes one
/// block. Symmetric in (a, b) bit for bit: every subterm is commutative.
inline double log_merge_factor(const BlockStats& a, const BlockStats& b) {
    return log_merge_factor_cached(a, log_phi(a), b, log_phi(b));
}

/// Sum of per-block log posteriors plus penalties: the log of the total
/// partition posterior. Empty input is the empty product, log 1 = 0.
inline double total_log_posterior(const std::vector<BlockStats>& blocks) {
    double sum = 0.0;
    for (const auto& b : blocks) sum += log_phi(b) + b.log_prior_penalty;
    return sum;
}

}  // namespace voroblocks
