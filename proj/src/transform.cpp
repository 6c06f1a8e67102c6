#include "ranksched/transform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ranksched {

namespace {

bool contains_lpl(const PolicySpec& p) {
    if (std::holds_alternative<Lpl>(p.kind)) return true;
    if (const auto* ck = std::get_if<Checkpointed>(&p.kind)) return contains_lpl(*ck->inner);
    return false;
}

}  // namespace

PolicySpec lpl(PolicySpec inner, CutoffVector cutoffs) {
    if (contains_lpl(inner)) throw std::invalid_argument("lpl: inner is already LPL-wrapped");
    if (std::holds_alternative<Checkpointed>(inner.kind))
        throw std::invalid_argument("lpl: checkpoint transformation must stay outermost");
    validate(cutoffs);
    return PolicySpec{Lpl{std::make_shared<const PolicySpec>(std::move(inner)),
                          std::move(cutoffs)}};
}

PolicySpec checkpointify(PolicySpec inner, CheckpointConfig cfg) {
    if (!(cfg.delta > 0)) throw std::invalid_argument("checkpointify: delta must be > 0");
    if (cfg.gamma < 0) throw std::invalid_argument("checkpointify: gamma must be >= 0");
    if (std::holds_alternative<Checkpointed>(inner.kind))
        throw std::invalid_argument("checkpointify: inner is already checkpointed");
    return PolicySpec{Checkpointed{std::make_shared<const PolicySpec>(std::move(inner)), cfg}};
}

CutoffVector heuristic_cutoffs(const DiscreteDist& d, std::size_t levels) {
    if (levels < 1) throw std::invalid_argument("heuristic_cutoffs: need at least one level");
    if (levels > d.support().size())
        throw std::invalid_argument("heuristic_cutoffs: more levels than support points");
    CutoffVector out;
    if (levels == 1) return out;
    double total = d.mean();
    double acc = 0;
    std::size_t bucket = 1;
    for (std::size_t i : d.support()) {
        acc += d.size_at(i) * d.probs()[i];
        if (bucket >= levels) break;
        if (acc >= (static_cast<double>(bucket) / static_cast<double>(levels)) * total *
                       (1.0 - 1e-9)) {
            // Close the bucket at the next grid boundary so this support point
            // stays inside it (half-open [c_{i-1}, c_i) intervals).
            double boundary = d.size_at(i) + d.step();
            if (!out.cutoffs.empty() && boundary <= out.cutoffs.back())
                boundary = out.cutoffs.back() + d.step();
            out.cutoffs.push_back(boundary);
            ++bucket;
        }
    }
    // Mass concentrated at the top can leave buckets unfilled; pad just above
    // the previous boundary to keep n levels.
    while (out.cutoffs.size() + 1 < levels) {
        double base = out.cutoffs.empty() ? d.step() : out.cutoffs.back();
        out.cutoffs.push_back(base + d.step());
    }
    validate(out);
    return out;
}

CutoffVector optimize_cutoffs(const DiscreteDist& d, double lambda, const PolicySpec& family,
                              std::size_t levels, const OptimizeOptions& opts) {
    if (load(d, lambda) >= 1.0) throw std::domain_error("optimize_cutoffs: unstable input");
    if (opts.budget < 1) throw std::invalid_argument("optimize_cutoffs: budget must be >= 1");
    CutoffVector best = heuristic_cutoffs(d, levels);
    if (levels == 1) return best;

    Workload w = Workload::single(d);
    std::size_t evals = 0;
    auto objective = [&](const CutoffVector& c) {
        ++evals;
        return simulate(lpl(family, c), w, lambda, opts.eval).mean_T;
    };

    double best_obj = objective(best);
    double lo = d.size_at(d.support().front());
    double hi = d.size_at(d.support().back());
    std::size_t m = best.cutoffs.size();

    bool improved = true;
    while (improved && evals < opts.budget) {
        improved = false;
        for (std::size_t j = 0; j < m && evals < opts.budget; ++j) {
            double lo_j = j == 0 ? std::max(lo, d.step()) : best.cutoffs[j - 1] + d.step();
            double hi_j = j + 1 < m ? best.cutoffs[j + 1] - d.step() : hi;
            if (!(hi_j > lo_j)) continue;
            const int kCandidates = 8;
            for (int c = 0; c < kCandidates && evals < opts.budget; ++c) {
                double f = static_cast<double>(c) / (kCandidates - 1);
                double cand = lo_j * std::pow(hi_j / lo_j, f);
                // snap to the grid (cutoffs live on grid boundaries)
                cand = std::max(lo_j, std::round(cand / d.step()) * d.step());
                if (cand > hi_j) cand = hi_j;
                if (cand == best.cutoffs[j]) continue;
                CutoffVector trial = best;
                trial.cutoffs[j] = cand;
                double obj = objective(trial);
                if (obj < best_obj) {
                    best_obj = obj;
                    best = trial;
                    improved = true;
                }
            }
        }
    }
    return best;
}

}  // namespace ranksched
