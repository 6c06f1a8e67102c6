#include "ranksched/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ranksched {

namespace {

void require_stable(const DiscreteDist& d, double lambda) {
    if (load(d, lambda) >= 1.0) throw std::domain_error("oracle: load must be < 1");
}

}  // namespace

double pk_fcfs_mean(const DiscreteDist& d, double lambda) {
    require_stable(d, lambda);
    double rho = load(d, lambda);
    return d.mean() + lambda * d.second_moment() / (2.0 * (1.0 - rho));
}

double srpt_mean(const DiscreteDist& d, double lambda) {
    require_stable(d, lambda);
    const auto& sup = d.support();
    std::size_t n = sup.size();

    // Residence time of a size-x job is sum over [0, x) of dt / (1 - rho(t))
    // with rho(t) = lambda E[S 1(S <= t)], a step function jumping at support
    // points. residence[j] = residence at x = support point j.
    std::vector<double> residence(n);
    double acc = 0, prev_size = 0, rho_le_prev = 0;
    for (std::size_t j = 0; j < n; ++j) {
        double s = d.size_at(sup[j]);
        acc += (s - prev_size) / (1.0 - rho_le_prev);
        residence[j] = acc;
        prev_size = s;
        rho_le_prev = lambda * d.cum_sp(sup[j]);
        if (rho_le_prev >= 1.0) throw std::domain_error("srpt_mean: unstable");
    }

    double total = 0;
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t i = sup[j];
        double x = d.size_at(i);
        double p = d.probs()[i];
        double m2_below = d.cum_ssp(i) - x * x * p;       // E[S^2 1(S < x)]
        double tail_ge = 1.0 - d.cum_prob(i) + p;         // P(S >= x)
        double rho_lt = lambda * (d.cum_sp(i) - x * p);   // load of sizes < x
        double rho_le = lambda * d.cum_sp(i);             // load of sizes <= x
        double wait =
            lambda * (m2_below + x * x * tail_ge) / (2.0 * (1.0 - rho_lt) * (1.0 - rho_le));
        total += p * (wait + residence[j]);
    }
    return total;
}

double fb_mean(const DiscreteDist& d, double lambda) {
    require_stable(d, lambda);
    double total = 0;
    for (std::size_t i : d.support()) {
        double x = d.size_at(i);
        double p = d.probs()[i];
        double tail_gt = 1.0 - d.cum_prob(i);
        double trunc_mean = d.cum_sp(i) + x * tail_gt;        // E[min(S, x)]
        double trunc_m2 = d.cum_ssp(i) + x * x * tail_gt;     // E[min(S, x)^2]
        double rho_x = lambda * trunc_mean;
        if (rho_x >= 1.0) throw std::domain_error("fb_mean: unstable");
        total += p * (lambda * trunc_m2 / (2.0 * (1.0 - rho_x) * (1.0 - rho_x)) +
                      x / (1.0 - rho_x));
    }
    return total;
}

bool fcfs_srpt_bound_check(const DiscreteDist& d, double lambda) {
    require_stable(d, lambda);
    double s_min = d.size_at(d.support().front());
    double s_max = d.size_at(d.support().back());
    return pk_fcfs_mean(d, lambda) <= (s_max / s_min) * srpt_mean(d, lambda) * (1.0 + 1e-12);
}

DiscreteDist effective_dist(const DiscreteDist& d, double delta, double gamma) {
    if (!(delta > 0)) throw std::invalid_argument("effective_dist: delta must be > 0");
    if (gamma < 0) throw std::invalid_argument("effective_dist: gamma must be >= 0");
    double step = d.step();
    std::vector<double> probs;
    for (std::size_t i : d.support()) {
        double s = d.size_at(i);
        double eff = s + std::floor(s / delta + 1e-9) * gamma;
        auto idx = static_cast<std::size_t>(std::ceil(eff / step - 1e-9));
        if (idx >= probs.size()) probs.resize(idx + 1, 0.0);
        probs[idx] += d.probs()[i];
    }
    return DiscreteDist(step, std::move(probs));
}

double rho_prime(const DiscreteDist& d, double lambda, double delta, double gamma) {
    if (!(delta > 0)) throw std::invalid_argument("rho_prime: delta must be > 0");
    double mean_eff = 0;
    for (std::size_t i : d.support()) {
        double s = d.size_at(i);
        mean_eff += d.probs()[i] * (s + std::floor(s / delta + 1e-9) * gamma);
    }
    return lambda * mean_eff;
}

double delta_safe(double gamma, double rho) {
    if (!(rho > 0 && rho < 1)) throw std::domain_error("delta_safe: need 0 < rho < 1");
    return gamma * rho / (1.0 - rho);
}

double delta_rule_of_thumb(double rho, double gamma, double mean_size) {
    if (!(rho > 0 && rho < 1)) throw std::domain_error("delta_rule_of_thumb: need 0 < rho < 1");
    return std::sqrt(gamma * mean_size / rho) / (1.0 - rho);
}

double right_wall(double rho, double mean_size) {
    if (!(rho > 0 && rho < 1)) throw std::domain_error("right_wall: need 0 < rho < 1");
    return mean_size / (rho * rho * (1.0 - rho));
}

CheckpointAssessment assess(const DiscreteDist& d, double lambda, const CheckpointConfig& cfg) {
    double rho = load(d, lambda);
    CheckpointAssessment a;
    a.rho_prime = rho_prime(d, lambda, cfg.delta, cfg.gamma);
    a.delta_safe = delta_safe(cfg.gamma, rho);
    a.delta_rule_of_thumb = delta_rule_of_thumb(rho, cfg.gamma, d.mean());
    a.right_wall = right_wall(rho, d.mean());
    a.stable = a.rho_prime < 1.0;
    a.outside_rot_regime =
        !(a.delta_rule_of_thumb > a.delta_safe && a.delta_rule_of_thumb < a.right_wall);
    return a;
}

}  // namespace ranksched
