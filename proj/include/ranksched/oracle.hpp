#pragma once

#include "ranksched/dist.hpp"
#include "ranksched/policy.hpp"

namespace ranksched {

// Pollaczek-Khinchine mean response time of FCFS:
//   E[T] = E[S] + lambda E[S^2] / (2 (1 - rho)).
// Throws std::domain_error when rho >= 1.
double pk_fcfs_mean(const DiscreteDist& d, double lambda);

// Mean response time of SRPT, evaluated exactly on the pmf (see
// docs/formulas.md for the discrete waiting + residence forms).
double srpt_mean(const DiscreteDist& d, double lambda);

// Mean response time of FB (least attained service, processor sharing among
// equal ages), evaluated exactly on the pmf.
double fb_mean(const DiscreteDist& d, double lambda);

// Checks E[T_FCFS] <= (s_max / s_min) * E[T_SRPT] for a bounded-support pmf.
bool fcfs_srpt_bound_check(const DiscreteDist& d, double lambda);

// Size with checkpoint overheads folded in: s -> s + floor(s/delta)*gamma,
// re-gridded by rounding up to the original step.
DiscreteDist effective_dist(const DiscreteDist& d, double delta, double gamma);

// Effective load lambda * E[S + floor(S/delta)*gamma], computed from the
// exact (pre-regrid) sizes so the bound rho' <= rho (1 + gamma/delta) holds
// with no grid slack.
double rho_prime(const DiscreteDist& d, double lambda, double delta, double gamma);

// Gap above which stability is guaranteed for any policy and distribution.
double delta_safe(double gamma, double rho);

// Near-optimal checkpoint gap when gamma is a fraction of the mean job size.
double delta_rule_of_thumb(double rho, double gamma, double mean_size);

// Estimate of the gap beyond which checkpointing no longer helps.
double right_wall(double rho, double mean_size);

struct CheckpointAssessment {
    double rho_prime;
    double delta_safe;
    double delta_rule_of_thumb;
    double right_wall;
    bool stable;                  // rho_prime < 1
    bool outside_rot_regime;      // delta_rule_of_thumb not in (delta_safe, right_wall)
};

CheckpointAssessment assess(const DiscreteDist& d, double lambda, const CheckpointConfig& cfg);

}  // namespace ranksched
