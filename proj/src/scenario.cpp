#include "ranksched/scenario.hpp"

#include <algorithm>
#include <stdexcept>

#include "ranksched/rng.hpp"

namespace ranksched {

namespace {

int class_of_app(int app, SystemId system) {
    switch (system) {
        case SystemId::s1122: return app < 2 ? 1 : 2;
        case SystemId::s1212: return app % 2 == 0 ? 1 : 2;
        case SystemId::s1221: return (app == 0 || app == 3) ? 1 : 2;
    }
    throw std::invalid_argument("unknown system id");
}

}  // namespace

DiscreteDist Scenario::overall() const {
    std::vector<DiscreteDist> ds(app_dists.begin(), app_dists.end());
    std::vector<double> ws(app_weights.begin(), app_weights.end());
    return mixture(ds, ws);
}

Scenario random_scenario(uint64_t seed) {
    Xoshiro256pp rng(seed, 0x5ce0a71eULL);
    std::vector<DiscreteDist> dists;
    dists.reserve(4);
    for (int app = 0; app < 4; ++app) {
        double mean = (4.0 * app) + 4.0 * rng.uniform();
        double sd = kScenarioStddevLo + (kScenarioStddevHi - kScenarioStddevLo) * rng.uniform();
        ParametricSpec spec{TruncGaussian{mean, sd, 0.0, kScenarioMaxSize}};
        dists.push_back(discretize(spec, kScenarioStep, kScenarioMaxSize));
    }
    Scenario s{seed,
               {std::move(dists[0]), std::move(dists[1]), std::move(dists[2]),
                std::move(dists[3])},
               {kScenarioAppWeight, kScenarioAppWeight, kScenarioAppWeight, kScenarioAppWeight}};
    return s;
}

Workload class_workload(const Scenario& s, SystemId system) {
    Workload w;
    for (int app = 0; app < 4; ++app)
        w.components.push_back(
            {class_of_app(app, system), s.app_dists[static_cast<std::size_t>(app)],
             s.app_weights[static_cast<std::size_t>(app)]});
    return w;
}

Workload oblivious_workload(const Scenario& s) {
    Workload w;
    for (int app = 0; app < 4; ++app)
        w.components.push_back({0, s.app_dists[static_cast<std::size_t>(app)],
                                s.app_weights[static_cast<std::size_t>(app)]});
    return w;
}

std::map<int, std::pair<DiscreteDist, double>> class_dists(const Scenario& s, SystemId system) {
    std::map<int, std::pair<std::vector<DiscreteDist>, std::vector<double>>> parts;
    for (int app = 0; app < 4; ++app) {
        int cls = class_of_app(app, system);
        parts[cls].first.push_back(s.app_dists[static_cast<std::size_t>(app)]);
        parts[cls].second.push_back(s.app_weights[static_cast<std::size_t>(app)]);
    }
    std::map<int, std::pair<DiscreteDist, double>> out;
    for (auto& [cls, pw] : parts) {
        double prob = 0;
        for (double x : pw.second) prob += x;
        std::vector<double> renorm = pw.second;
        for (double& x : renorm) x /= prob;
        out.emplace(cls, std::make_pair(mixture(pw.first, renorm), prob));
    }
    return out;
}

namespace {

PolicySpec policy_for(const std::string& name, const Scenario& s, const std::string& setting) {
    bool oblivious = setting == "oblivious";
    if (name == "fcfs") return PolicySpec{Fcfs{}};
    if (name == "fb") return PolicySpec{Fb{}};
    if (name == "srpt") return PolicySpec{Srpt{}};
    if (name == "psjf") return PolicySpec{Psjf{}};
    if (name == "sjf") return PolicySpec{Sjf{}};
    if (name == "serpt") {
        if (oblivious) return PolicySpec{Serpt{s.overall()}};
        auto cd = class_dists(s, SystemId{std::stoi(setting)});
        std::map<int, DiscreteDist> m;
        for (auto& [cls, dp] : cd) m.emplace(cls, dp.first);
        return PolicySpec{ClassSerpt{std::move(m)}};
    }
    if (name == "gittins") {
        if (oblivious) return PolicySpec{Gittins{s.overall()}};
        auto cd = class_dists(s, SystemId{std::stoi(setting)});
        std::map<int, DiscreteDist> m;
        for (auto& [cls, dp] : cd) m.emplace(cls, dp.first);
        return PolicySpec{ClassGittins{std::move(m)}};
    }
    if (name == "pprio") {
        if (oblivious) throw std::invalid_argument("pprio requires a class-aware setting");
        return PolicySpec{PPrio{{1, 2}}};  // class 1 always has the smaller apps
    }
    throw std::invalid_argument("unknown policy name: " + name);
}

}  // namespace

WorstCaseTable worst_case_table(const std::vector<Scenario>& scenarios, double rho,
                                const std::vector<std::string>& policies,
                                const std::vector<std::string>& settings, const SimConfig& cfg) {
    WorstCaseTable table;
    for (const auto& setting : settings) {
        std::vector<std::string> pols = policies;
        if (std::find(pols.begin(), pols.end(), "gittins") == pols.end())
            pols.push_back("gittins");

        std::map<std::string, std::pair<double, uint64_t>> worst;  // policy -> (ratio, seed)
        for (const auto& sc : scenarios) {
            Workload w = setting == "oblivious"
                             ? oblivious_workload(sc)
                             : class_workload(sc, SystemId{std::stoi(setting)});
            double lambda = rho / sc.overall().mean();

            std::map<std::string, SimResult> results;
            for (const auto& name : pols)
                results[name] = simulate(policy_for(name, sc, setting), w, lambda, cfg);

            double g = results.at("gittins").mean_T;
            for (const auto& name : pols) {
                double ratio = results.at(name).mean_T / g;
                table.runs.push_back({sc.seed, setting, name, results.at(name).mean_T,
                                      results.at(name).ci_half_width, ratio});
                auto it = worst.find(name);
                if (it == worst.end() || ratio > it->second.first)
                    worst[name] = {ratio, sc.seed};
            }
        }
        for (const auto& name : pols)
            table.summary.push_back({setting, name, worst[name].first, worst[name].second});
    }
    return table;
}

}  // namespace ranksched
