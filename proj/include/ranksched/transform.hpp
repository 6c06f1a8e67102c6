#pragma once

#include "ranksched/dist.hpp"
#include "ranksched/engine.hpp"
#include "ranksched/policy.hpp"

namespace ranksched {

// Wraps `inner` so its band-1 rank is quantized into levels 1..n via the
// cutoffs. Throws when inner is already LPL-wrapped or cutoffs are invalid.
PolicySpec lpl(PolicySpec inner, CutoffVector cutoffs);

// Wraps `inner` with the preemption-checkpoint transformation: inner's rank
// applies at ages k*delta; in between, the job is locked (band 0), and the
// server pays gamma each time a served job's age reaches a lattice point.
PolicySpec checkpointify(PolicySpec inner, CheckpointConfig cfg);

// Cutoffs on grid boundaries splitting the load E[S] as evenly as possible
// into n buckets: bucket i closes at the first boundary where the cumulative
// contribution E[S 1(S < c)] reaches i/n of E[S].
CutoffVector heuristic_cutoffs(const DiscreteDist& d, std::size_t levels);

struct OptimizeOptions {
    std::size_t budget = 200;  // simulation evaluations
    SimConfig eval;            // settings per evaluation; same seed for all candidates
};

// Coordinate descent over log-spaced per-cutoff candidate grids, objective =
// simulated mean response time with common random numbers. The heuristic
// vector is always a candidate, so the result is never worse than it.
CutoffVector optimize_cutoffs(const DiscreteDist& d, double lambda, const PolicySpec& family,
                              std::size_t levels, const OptimizeOptions& opts);

}  // namespace ranksched
