#include "ranksched/dist.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ranksched {

namespace {

constexpr double kProbTol = 1e-9;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

DiscreteDist::DiscreteDist(double step, std::vector<double> probs)
    : step_(step), probs_(std::move(probs)) {
    if (!(step_ > 0)) throw std::invalid_argument("DiscreteDist: step must be positive");
    if (probs_.empty()) throw std::invalid_argument("DiscreteDist: empty pmf");
    if (probs_[0] != 0.0) throw std::invalid_argument("DiscreteDist: mass at size 0");
    double sum = 0;
    for (double p : probs_) {
        if (p < 0) throw std::invalid_argument("DiscreteDist: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kProbTol)
        throw std::invalid_argument("DiscreteDist: probabilities sum to " + std::to_string(sum));
    while (probs_.size() > 1 && probs_.back() == 0.0) probs_.pop_back();

    cum_p_.resize(probs_.size());
    cum_sp_.resize(probs_.size());
    cum_ssp_.resize(probs_.size());
    double cp = 0, csp = 0, cssp = 0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        double s = size_at(i);
        cp += probs_[i];
        csp += s * probs_[i];
        cssp += s * s * probs_[i];
        cum_p_[i] = cp;
        cum_sp_[i] = csp;
        cum_ssp_[i] = cssp;
        if (probs_[i] > 0) support_.push_back(i);
    }
    mean_ = csp;
    m2_ = cssp;
}

double DiscreteDist::scv() const { return (m2_ - mean_ * mean_) / (mean_ * mean_); }

std::size_t DiscreteDist::index_at_or_below(double a) const {
    if (a <= 0) return 0;
    // Nudge so that ages sitting a hair below a grid point (float error)
    // resolve to that grid point.
    auto i = static_cast<std::size_t>(std::floor(a / step_ + 1e-9));
    return std::min(i, probs_.size() - 1);
}

double DiscreteDist::tail(double a) const {
    if (a < step_ * (1.0 - 1e-9)) return 1.0;
    std::size_t i = index_at_or_below(a);
    double t = 1.0 - cum_p_[i];
    return t < 0 ? 0.0 : t;
}

double DiscreteDist::expected_remaining(double a) const {
    double t = tail(a);
    if (t <= 0) throw std::domain_error("expected_remaining: age beyond support");
    std::size_t i = index_at_or_below(a);
    double sp_above = a < step_ * (1.0 - 1e-9) ? mean_ : mean_ - cum_sp_[i];
    return sp_above / t - a;
}

double DiscreteDist::sample(double u) const {
    auto it = std::upper_bound(cum_p_.begin(), cum_p_.end(), u);
    std::size_t i = static_cast<std::size_t>(it - cum_p_.begin());
    if (i >= probs_.size()) i = probs_.size() - 1;
    // Land on a support point even if rounding error put u in a zero-mass gap.
    auto sit = std::lower_bound(support_.begin(), support_.end(), i);
    if (sit == support_.end()) sit = std::prev(support_.end());
    return size_at(*sit);
}

void validate(const ParametricSpec& spec) {
    std::visit(
        [](const auto& law) {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                if (!(law.rate > 0)) throw std::invalid_argument("Exponential: rate must be > 0");
            } else if constexpr (std::is_same_v<T, BoundedPareto>) {
                if (!(law.lo > 0) || !(law.lo < law.hi))
                    throw std::invalid_argument("BoundedPareto: need 0 < lo < hi");
            } else if constexpr (std::is_same_v<T, Hyperexp2Balanced>) {
                if (!(law.mean > 0)) throw std::invalid_argument("Hyperexp2: mean must be > 0");
                if (!(law.scv > 1)) throw std::invalid_argument("Hyperexp2: scv must be > 1");
            } else if constexpr (std::is_same_v<T, TruncGaussian>) {
                if (!(law.stddev > 0)) throw std::invalid_argument("TruncGaussian: stddev <= 0");
                if (!(law.lo < law.hi)) throw std::invalid_argument("TruncGaussian: lo >= hi");
            } else if constexpr (std::is_same_v<T, MixtureSpec>) {
                if (law.weights.size() != law.components.size() || law.components.empty())
                    throw std::invalid_argument("Mixture: weights/components mismatch");
                double sum = 0;
                for (double w : law.weights) {
                    if (w < 0) throw std::invalid_argument("Mixture: negative weight");
                    sum += w;
                }
                if (std::abs(sum - 1.0) > kProbTol)
                    throw std::invalid_argument("Mixture: weights must sum to 1");
                for (const auto& c : law.components) validate(c);
            }
        },
        spec.law);
}

double cdf(const ParametricSpec& spec, double x) {
    if (x <= 0) return 0.0;
    return std::visit(
        [x](const auto& law) -> double {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return 1.0 - std::exp(-law.rate * x);
            } else if constexpr (std::is_same_v<T, BoundedPareto>) {
                if (x <= law.lo) return 0.0;
                if (x >= law.hi) return 1.0;
                double c = law.lo * law.hi / (law.hi - law.lo);
                return c * (1.0 / law.lo - 1.0 / x);
            } else if constexpr (std::is_same_v<T, WeibullQuarter>) {
                return 1.0 - std::exp(-std::pow(x, 0.25));
            } else if constexpr (std::is_same_v<T, Hyperexp2Balanced>) {
                // Balanced means: p1/mu1 = p2/mu2 = mean/2.
                double p1 = 0.5 * (1.0 + std::sqrt((law.scv - 1.0) / (law.scv + 1.0)));
                double p2 = 1.0 - p1;
                double mu1 = 2.0 * p1 / law.mean;
                double mu2 = 2.0 * p2 / law.mean;
                return 1.0 - p1 * std::exp(-mu1 * x) - p2 * std::exp(-mu2 * x);
            } else if constexpr (std::is_same_v<T, TruncGaussian>) {
                if (x <= law.lo) return 0.0;
                if (x >= law.hi) return 1.0;
                double flo = normal_cdf((law.lo - law.mean) / law.stddev);
                double fhi = normal_cdf((law.hi - law.mean) / law.stddev);
                double fx = normal_cdf((x - law.mean) / law.stddev);
                return (fx - flo) / (fhi - flo);
            } else {
                static_assert(std::is_same_v<T, MixtureSpec>);
                double f = 0;
                for (std::size_t i = 0; i < law.components.size(); ++i)
                    f += law.weights[i] * cdf(law.components[i], x);
                return f;
            }
        },
        spec.law);
}

DiscreteDist discretize(const ParametricSpec& spec, double step, double cap) {
    if (!(step > 0)) throw std::invalid_argument("discretize: step must be positive");
    if (!(cap >= step)) throw std::invalid_argument("discretize: cap must be >= step");
    validate(spec);
    auto n = static_cast<std::size_t>(std::floor(cap / step + 1e-9));
    std::vector<double> probs(n + 1, 0.0);
    double prev = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        double f = cdf(spec, static_cast<double>(i) * step);
        probs[i] = std::max(0.0, f - prev);
        prev = f;
    }
    probs[n] = std::max(0.0, 1.0 - prev);  // lump all remaining mass at the cap
    return DiscreteDist(step, std::move(probs));
}

double load(const DiscreteDist& d, double lambda) {
    if (lambda < 0) throw std::invalid_argument("load: lambda must be >= 0");
    return lambda * d.mean();
}

DiscreteDist mixture(const std::vector<DiscreteDist>& components,
                     const std::vector<double>& weights) {
    if (components.empty() || components.size() != weights.size())
        throw std::invalid_argument("mixture: components/weights mismatch");
    double step = components[0].step();
    std::size_t n = 0;
    for (const auto& c : components) {
        if (std::abs(c.step() - step) > 1e-12 * step)
            throw std::invalid_argument("mixture: mismatched grid steps");
        n = std::max(n, c.grid_points());
    }
    std::vector<double> probs(n, 0.0);
    for (std::size_t k = 0; k < components.size(); ++k)
        for (std::size_t i = 0; i < components[k].grid_points(); ++i)
            probs[i] += weights[k] * components[k].probs()[i];
    return DiscreteDist(step, std::move(probs));
}

void write_pmf_csv(std::ostream& os, const DiscreteDist& d) {
    os << "size,probability\n";
    for (std::size_t i : d.support()) os << d.size_at(i) << ',' << d.probs()[i] << '\n';
}

std::string describe(const ParametricSpec& spec) {
    std::ostringstream os;
    std::visit(
        [&os](const auto& law) {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                os << "exponential(" << law.rate << ")";
            } else if constexpr (std::is_same_v<T, BoundedPareto>) {
                os << "bounded_pareto(" << law.lo << "," << law.hi << ")";
            } else if constexpr (std::is_same_v<T, WeibullQuarter>) {
                os << "weibull_quarter";
            } else if constexpr (std::is_same_v<T, Hyperexp2Balanced>) {
                os << "hyperexp2(" << law.mean << "," << law.scv << ")";
            } else if constexpr (std::is_same_v<T, TruncGaussian>) {
                os << "trunc_gaussian(" << law.mean << "," << law.stddev << "," << law.lo << ","
                   << law.hi << ")";
            } else {
                os << "mixture[" << law.components.size() << "]";
            }
        },
        spec.law);
    return os.str();
}

}  // namespace ranksched
