#include "ranksched/json_io.hpp"

#include <algorithm>

#include "ranksched/transform.hpp"

namespace ranksched {

void require_keys(const json& j, const std::vector<std::string>& allowed,
                  const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
    for (const auto& [key, _] : j.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw std::invalid_argument(where + ": unknown key '" + key + "'");
}

namespace {

double need_number(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_number())
        throw std::invalid_argument(where + ": missing numeric '" + key + "'");
    return j[key].get<double>();
}

std::string need_kind(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw std::invalid_argument(where + ": missing 'kind'");
    return j["kind"].get<std::string>();
}

}  // namespace

ParametricSpec parametric_from_json(const json& j) {
    const std::string where = "dist";
    std::string kind = need_kind(j, where);
    if (kind == "exponential") {
        require_keys(j, {"kind", "rate"}, where);
        return ParametricSpec{Exponential{need_number(j, "rate", where)}};
    }
    if (kind == "bounded_pareto") {
        require_keys(j, {"kind", "lo", "hi"}, where);
        return ParametricSpec{BoundedPareto{need_number(j, "lo", where),
                                            need_number(j, "hi", where)}};
    }
    if (kind == "weibull_quarter") {
        require_keys(j, {"kind"}, where);
        return ParametricSpec{WeibullQuarter{}};
    }
    if (kind == "hyperexp2") {
        require_keys(j, {"kind", "mean", "scv"}, where);
        return ParametricSpec{Hyperexp2Balanced{need_number(j, "mean", where),
                                                need_number(j, "scv", where)}};
    }
    if (kind == "trunc_gaussian") {
        require_keys(j, {"kind", "mean", "stddev", "lo", "hi"}, where);
        return ParametricSpec{TruncGaussian{need_number(j, "mean", where),
                                            need_number(j, "stddev", where),
                                            need_number(j, "lo", where),
                                            need_number(j, "hi", where)}};
    }
    if (kind == "mixture") {
        require_keys(j, {"kind", "weights", "components"}, where);
        MixtureSpec m;
        if (!j.contains("weights") || !j["weights"].is_array() || !j.contains("components") ||
            !j["components"].is_array())
            throw std::invalid_argument("mixture: needs 'weights' and 'components' arrays");
        for (const auto& wj : j["weights"]) m.weights.push_back(wj.get<double>());
        for (const auto& cj : j["components"]) m.components.push_back(parametric_from_json(cj));
        return ParametricSpec{std::move(m)};
    }
    throw std::invalid_argument("dist: unknown kind '" + kind + "'");
}

json to_json(const ParametricSpec& spec) {
    return std::visit(
        [](const auto& law) -> json {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, Exponential>)
                return {{"kind", "exponential"}, {"rate", law.rate}};
            else if constexpr (std::is_same_v<T, BoundedPareto>)
                return {{"kind", "bounded_pareto"}, {"lo", law.lo}, {"hi", law.hi}};
            else if constexpr (std::is_same_v<T, WeibullQuarter>)
                return {{"kind", "weibull_quarter"}};
            else if constexpr (std::is_same_v<T, Hyperexp2Balanced>)
                return {{"kind", "hyperexp2"}, {"mean", law.mean}, {"scv", law.scv}};
            else if constexpr (std::is_same_v<T, TruncGaussian>)
                return {{"kind", "trunc_gaussian"},
                        {"mean", law.mean},
                        {"stddev", law.stddev},
                        {"lo", law.lo},
                        {"hi", law.hi}};
            else {
                json comps = json::array();
                for (const auto& c : law.components) comps.push_back(to_json(c));
                return {{"kind", "mixture"}, {"weights", law.weights}, {"components", comps}};
            }
        },
        spec.law);
}

std::map<int, DiscreteDist> workload_class_dists(const Workload& w) {
    std::map<int, std::pair<std::vector<DiscreteDist>, std::vector<double>>> parts;
    for (const auto& c : w.components) {
        parts[c.cls].first.push_back(c.dist);
        parts[c.cls].second.push_back(c.prob);
    }
    std::map<int, DiscreteDist> out;
    for (auto& [cls, pw] : parts) {
        double prob = 0;
        for (double x : pw.second) prob += x;
        std::vector<double> renorm = pw.second;
        for (double& x : renorm) x /= prob;
        out.emplace(cls, mixture(pw.first, renorm));
    }
    return out;
}

PolicySpec policy_from_json(const json& j, const Workload& w) {
    const std::string where = "policy";
    if (j.is_string()) return policy_from_json(json{{"kind", j.get<std::string>()}}, w);
    std::string kind = need_kind(j, where);
    if (kind == "fcfs") return PolicySpec{Fcfs{}};
    if (kind == "fb") return PolicySpec{Fb{}};
    if (kind == "srpt") return PolicySpec{Srpt{}};
    if (kind == "psjf") return PolicySpec{Psjf{}};
    if (kind == "sjf") return PolicySpec{Sjf{}};
    if (kind == "serpt") {
        require_keys(j, {"kind"}, where);
        return PolicySpec{Serpt{w.overall()}};
    }
    if (kind == "gittins") {
        require_keys(j, {"kind"}, where);
        return PolicySpec{Gittins{w.overall()}};
    }
    if (kind == "class_serpt") {
        require_keys(j, {"kind"}, where);
        return PolicySpec{ClassSerpt{workload_class_dists(w)}};
    }
    if (kind == "class_gittins") {
        require_keys(j, {"kind"}, where);
        return PolicySpec{ClassGittins{workload_class_dists(w)}};
    }
    if (kind == "pprio") {
        require_keys(j, {"kind", "order"}, where);
        PPrio p;
        if (j.contains("order")) {
            for (const auto& v : j["order"]) p.class_order.push_back(v.get<int>());
        } else {
            // default: classes ordered by mean class size
            auto dists = workload_class_dists(w);
            std::vector<std::pair<double, int>> order;
            for (const auto& [cls, d] : dists) order.emplace_back(d.mean(), cls);
            std::sort(order.begin(), order.end());
            for (const auto& [_, cls] : order) p.class_order.push_back(cls);
        }
        return PolicySpec{std::move(p)};
    }
    if (kind == "lpl") {
        require_keys(j, {"kind", "inner", "cutoffs", "levels"}, where);
        if (!j.contains("inner")) throw std::invalid_argument("lpl: missing 'inner'");
        PolicySpec inner = policy_from_json(j["inner"], w);
        CutoffVector cv;
        if (j.contains("cutoffs")) {
            cv = cutoffs_from_json(j["cutoffs"]);
        } else if (j.contains("levels")) {
            cv = heuristic_cutoffs(w.overall(), j["levels"].get<std::size_t>());
        } else {
            throw std::invalid_argument("lpl: needs 'cutoffs' or 'levels'");
        }
        return lpl(std::move(inner), std::move(cv));
    }
    if (kind == "checkpointed") {
        require_keys(j, {"kind", "inner", "delta", "gamma"}, where);
        if (!j.contains("inner")) throw std::invalid_argument("checkpointed: missing 'inner'");
        PolicySpec inner = policy_from_json(j["inner"], w);
        CheckpointConfig cfg{need_number(j, "delta", where), need_number(j, "gamma", where)};
        return checkpointify(std::move(inner), cfg);
    }
    throw std::invalid_argument("policy: unknown kind '" + kind + "'");
}

json to_json(const CutoffVector& c) { return json(c.cutoffs); }

CutoffVector cutoffs_from_json(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("cutoffs: expected a JSON array");
    CutoffVector c;
    for (const auto& v : j) c.cutoffs.push_back(v.get<double>());
    validate(c);
    return c;
}

SimConfig sim_config_from_json(const json& j) {
    require_keys(j,
                 {"seed", "jobs_per_replication", "warmup_fraction", "replications", "tie_mode",
                  "allow_unstable", "unstable_time_horizon", "max_workers"},
                 "sim");
    SimConfig cfg;
    if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
    if (j.contains("jobs_per_replication"))
        cfg.jobs_per_replication = j["jobs_per_replication"].get<uint64_t>();
    if (j.contains("warmup_fraction")) cfg.warmup_fraction = j["warmup_fraction"].get<double>();
    if (j.contains("replications")) cfg.replications = j["replications"].get<int>();
    if (j.contains("tie_mode")) {
        std::string m = j["tie_mode"].get<std::string>();
        if (m == "processor-sharing") cfg.tie_mode = TieMode::processor_sharing;
        else if (m == "fcfs-only") cfg.tie_mode = TieMode::fcfs_only;
        else throw std::invalid_argument("sim: unknown tie_mode '" + m + "'");
    }
    if (j.contains("allow_unstable")) cfg.allow_unstable = j["allow_unstable"].get<bool>();
    if (j.contains("unstable_time_horizon"))
        cfg.unstable_time_horizon = j["unstable_time_horizon"].get<double>();
    if (j.contains("max_workers")) cfg.max_workers = j["max_workers"].get<int>();
    return cfg;
}

uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace ranksched
