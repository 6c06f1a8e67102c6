#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace ranksched {

// Job size distribution as a pmf on a uniform grid: probs[i] is the mass at
// size i*step. Index 0 must carry zero mass (sizes are positive). Immutable
// after construction; safe to share across threads.
class DiscreteDist {
  public:
    DiscreteDist(double step, std::vector<double> probs);

    double step() const { return step_; }
    const std::vector<double>& probs() const { return probs_; }
    double size_at(std::size_t i) const { return static_cast<double>(i) * step_; }
    std::size_t grid_points() const { return probs_.size(); }
    double max_size() const { return size_at(probs_.size() - 1); }

    double mean() const { return mean_; }
    double second_moment() const { return m2_; }
    double scv() const;

    // P(S > a).
    double tail(double a) const;
    // E[S - a | S > a]; throws std::domain_error when tail(a) == 0.
    double expected_remaining(double a) const;

    // Largest grid index i with size_at(i) <= a (ages on the grid resolve
    // exactly). Returns grid_points()-1 when a is beyond the support.
    std::size_t index_at_or_below(double a) const;

    // Prefix sums over grid indices 0..i: sum p, sum s*p, sum s^2*p.
    double cum_prob(std::size_t i) const { return cum_p_[i]; }
    double cum_sp(std::size_t i) const { return cum_sp_[i]; }
    double cum_ssp(std::size_t i) const { return cum_ssp_[i]; }

    // Grid indices with positive mass, ascending.
    const std::vector<std::size_t>& support() const { return support_; }

    // Inverse-cdf sample for u in [0, 1).
    double sample(double u) const;

  private:
    double step_;
    std::vector<double> probs_;
    std::vector<double> cum_p_, cum_sp_, cum_ssp_;
    std::vector<std::size_t> support_;
    double mean_ = 0, m2_ = 0;
};

// Parametric job size laws; discretized via discretize() before use.
struct Exponential {
    double rate;
};
// Density proportional to 1/x^2 on [lo, hi).
struct BoundedPareto {
    double lo, hi;
};
// Density x^(-3/4) exp(-x^(1/4)) / 4, i.e. Weibull with shape 1/4, scale 1.
struct WeibullQuarter {};
// Two-phase hyperexponential with balanced means: p1/mu1 = p2/mu2.
struct Hyperexp2Balanced {
    double mean, scv;
};
// Gaussian restricted to [lo, hi] and renormalized.
struct TruncGaussian {
    double mean, stddev, lo, hi;
};
struct ParametricSpec;
struct MixtureSpec {
    std::vector<double> weights;
    std::vector<ParametricSpec> components;
};

struct ParametricSpec {
    std::variant<Exponential, BoundedPareto, WeibullQuarter, Hyperexp2Balanced, TruncGaussian,
                 MixtureSpec>
        law;
};

// Throws std::invalid_argument when parameters are out of range.
void validate(const ParametricSpec& spec);

// P(S <= x) of the continuous law.
double cdf(const ParametricSpec& spec, double x);

// Mass of ((i-1)*step, i*step] goes to grid point i*step; everything above
// cap is lumped at the top grid point.
DiscreteDist discretize(const ParametricSpec& spec, double step, double cap);

// rho = lambda * E[S].
double load(const DiscreteDist& d, double lambda);

// Pointwise weighted sum of pmfs; all components must share one grid step.
DiscreteDist mixture(const std::vector<DiscreteDist>& components,
                     const std::vector<double>& weights);

// Two-column CSV body: size,probability (support rows only).
void write_pmf_csv(std::ostream& os, const DiscreteDist& d);

std::string describe(const ParametricSpec& spec);

}  // namespace ranksched
