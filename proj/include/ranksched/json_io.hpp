#pragma once

#include <json.hpp>

#include "ranksched/dist.hpp"
#include "ranksched/engine.hpp"
#include "ranksched/policy.hpp"

namespace ranksched {

using json = nlohmann::json;

// Throws std::invalid_argument when `j` carries keys outside `allowed`.
void require_keys(const json& j, const std::vector<std::string>& allowed,
                  const std::string& where);

// Tagged-union form: {"kind": "exponential", "rate": 1.0}, ...
ParametricSpec parametric_from_json(const json& j);
json to_json(const ParametricSpec& spec);

// Policies reference the run's distributions: "serpt"/"gittins" bind the
// workload's overall mixture, class variants bind the per-class mixtures.
PolicySpec policy_from_json(const json& j, const Workload& w);

json to_json(const CutoffVector& c);
CutoffVector cutoffs_from_json(const json& j);

SimConfig sim_config_from_json(const json& j);

// Per-class distributions of a workload (weight-renormalized), keyed by class.
std::map<int, DiscreteDist> workload_class_dists(const Workload& w);

// FNV-1a 64-bit, used for config provenance hashes.
uint64_t fnv1a64(std::string_view bytes);

}  // namespace ranksched
