#pragma once

#include <cmath>
#include <vector>

#include "ranksched/dist.hpp"

namespace ranksched::test {

// Independent summation oracles; intentionally written against the raw pmf,
// not the library's cached prefix sums.
inline double oracle_mean(const DiscreteDist& d) {
    double m = 0;
    for (std::size_t i = 0; i < d.grid_points(); ++i) m += d.size_at(i) * d.probs()[i];
    return m;
}

inline double oracle_second_moment(const DiscreteDist& d) {
    double m = 0;
    for (std::size_t i = 0; i < d.grid_points(); ++i) {
        double s = d.size_at(i);
        m += s * s * d.probs()[i];
    }
    return m;
}

inline double oracle_scv(const DiscreteDist& d) {
    double m = oracle_mean(d);
    return (oracle_second_moment(d) - m * m) / (m * m);
}

inline double oracle_tail(const DiscreteDist& d, double a) {
    double t = 0;
    for (std::size_t i = 0; i < d.grid_points(); ++i)
        if (d.size_at(i) > a + 1e-12) t += d.probs()[i];
    return t;
}

inline double oracle_expected_remaining(const DiscreteDist& d, double a) {
    double t = 0, num = 0;
    for (std::size_t i = 0; i < d.grid_points(); ++i) {
        if (d.size_at(i) > a + 1e-12) {
            t += d.probs()[i];
            num += (d.size_at(i) - a) * d.probs()[i];
        }
    }
    return num / t;
}

// pmf on the given grid points (step inferred as 1): sizes are indices.
inline DiscreteDist make_pmf(double step, std::vector<std::pair<std::size_t, double>> mass) {
    std::size_t n = 0;
    for (auto& [i, p] : mass) n = std::max(n, i);
    std::vector<double> probs(n + 1, 0.0);
    for (auto& [i, p] : mass) probs[i] += p;
    return DiscreteDist(step, std::move(probs));
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }
inline bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace ranksched::test
