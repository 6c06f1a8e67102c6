#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ranksched/dist.hpp"
#include "ranksched/policy.hpp"

namespace ranksched {

enum class TieMode { processor_sharing, fcfs_only };

struct SimConfig {
    uint64_t seed = 1;
    uint64_t jobs_per_replication = 200000;
    double warmup_fraction = 0.2;
    int replications = 10;
    TieMode tie_mode = TieMode::processor_sharing;
    bool allow_unstable = false;
    double unstable_time_horizon = 1e7;  // simulated-time cap for unstable runs
    int max_workers = 0;                 // 0 = hardware concurrency; never affects results
};

struct SimResult {
    double mean_T = 0;
    double ci_half_width = 0;  // 95% t-interval over replication means
    double mean_N = 0;
    double measured_utilization = 0;
    uint64_t completed_jobs = 0;
    bool flagged_unstable = false;
    double rho_effective = 0;
};

struct ClassComponent {
    int cls;
    DiscreteDist dist;
    double prob;
};

// Job source: class sampled first, then a size from the class distribution.
// A single component with prob 1 is the classless (size-oblivious) case.
struct Workload {
    std::vector<ClassComponent> components;

    static Workload single(DiscreteDist d) { return Workload{{{0, std::move(d), 1.0}}}; }
    DiscreteDist overall() const;
};

void validate(const Workload& w);

struct Arrival {
    double time;
    double size;
    int cls;
};

class UnstableError : public std::runtime_error {
  public:
    explicit UnstableError(double rho_eff)
        : std::runtime_error("unstable configuration: effective load " + std::to_string(rho_eff)),
          rho_effective(rho_eff) {}
    double rho_effective;
};

// First `count` arrivals of the seeded Poisson stream used by replication
// `replication`; identical seeds give identical sequences regardless of the
// policy under test (common random numbers).
std::vector<Arrival> arrival_stream_prefix(uint64_t seed, int replication, double lambda,
                                           const Workload& w, std::size_t count);

// Event-driven M/G/1 run of `policy` under Poisson(lambda) arrivals.
// Throws UnstableError when the effective load (including checkpoint
// overhead) is >= 1 and cfg.allow_unstable is not set.
SimResult simulate(const PolicySpec& policy, const Workload& w, double lambda,
                   const SimConfig& cfg);

// Scripted-arrival run (no warmup); used by tests and single-job probes.
struct TraceResult {
    std::vector<double> completion_times;  // indexed by arrival order
    double busy_time = 0;                  // service plus checkpoint overhead
    double area_jobs = 0;                  // integral of the number-in-system
    double end_time = 0;                   // time of the last departure
};

TraceResult simulate_trace(const PolicySpec& policy, std::span<const Arrival> arrivals,
                           TieMode tie_mode = TieMode::processor_sharing);

// 97.5% Student-t quantile for `df` degrees of freedom (95% two-sided CI).
double t_quantile_975(int df);

}  // namespace ranksched
