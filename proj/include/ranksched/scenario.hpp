#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ranksched/dist.hpp"
#include "ranksched/engine.hpp"

namespace ranksched {

// Scenario generator constants. The application weights and the stddev range
// are repo-pinned choices; means are uniform in [0,4], [4,8], [8,12], [12,16]
// for A, B, C, D respectively.
inline constexpr double kScenarioStep = 1.0 / 16.0;
inline constexpr double kScenarioMaxSize = 16.0;
inline constexpr double kScenarioStddevLo = 0.25;
inline constexpr double kScenarioStddevHi = 2.0;
inline constexpr double kScenarioAppWeight = 0.25;

// A four-application mixture on the [0, 16] grid; apps labeled A..D in
// increasing-mean order.
struct Scenario {
    uint64_t seed;
    std::array<DiscreteDist, 4> app_dists;
    std::array<double, 4> app_weights;

    DiscreteDist overall() const;
};

// Deterministic in `seed`.
Scenario random_scenario(uint64_t seed);

// Two-class workloads: 1122 (class 1 = A,B), 1212 (class 1 = A,C),
// 1221 (class 1 = A,D). Class ids are 1 and 2.
enum class SystemId { s1122 = 1122, s1212 = 1212, s1221 = 1221 };

Workload class_workload(const Scenario& s, SystemId system);

// Per-class distributions and probabilities, keyed by class id.
std::map<int, std::pair<DiscreteDist, double>> class_dists(const Scenario& s, SystemId system);

// Size-oblivious workload (single classless component).
Workload oblivious_workload(const Scenario& s);

struct WorstCaseEntry {
    std::string setting;  // "oblivious", "1122", "1212", "1221"
    std::string policy;
    double max_ratio;      // max over scenarios of mean_T(policy)/mean_T(Gittins)
    uint64_t argmax_seed;  // scenario where the max is attained
};

struct ScenarioRun {
    uint64_t scenario_seed;
    std::string setting;
    std::string policy;
    double mean_T;
    double ci;
    double ratio_vs_gittins;
};

struct WorstCaseTable {
    std::vector<ScenarioRun> runs;
    std::vector<WorstCaseEntry> summary;
};

// Named policies per setting. For "oblivious": fcfs, fb, srpt, psjf, sjf,
// serpt, gittins. In class-aware settings "serpt"/"gittins" bind the class
// variants and "pprio" prioritizes class 1 over class 2. Gittins is always
// evaluated (the ratio baseline, on common seeds).
WorstCaseTable worst_case_table(const std::vector<Scenario>& scenarios, double rho,
                                const std::vector<std::string>& policies,
                                const std::vector<std::string>& settings, const SimConfig& cfg);

}  // namespace ranksched
