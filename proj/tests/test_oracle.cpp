#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ranksched/oracle.hpp"
#include "ranksched/rng.hpp"
#include "test_util.hpp"

using namespace ranksched;
using namespace ranksched::test;

TEST_CASE("pk_fcfs_mean: M/M/1 and M/D/1 closed forms") {
    auto exp = discretize(ParametricSpec{Exponential{1.0}}, 1.0 / 256, 40.0);
    CHECK(close_rel(pk_fcfs_mean(exp, 0.5), 2.0, 0.01));  // 1/(mu - lambda)

    auto pm = make_pmf(1.0, {{1, 1.0}});
    CHECK(pk_fcfs_mean(pm, 0.5) == doctest::Approx(1.5));

    CHECK(pk_fcfs_mean(pm, 0.0) == doctest::Approx(pm.mean()));
    CHECK_THROWS_AS((void)pk_fcfs_mean(pm, 1.0), std::domain_error);
}

TEST_CASE("srpt and fb collapse to FCFS on a point mass") {
    auto pm = make_pmf(0.5, {{6, 1.0}});  // size 3
    double lambda = 0.25;                 // rho = 0.75
    CHECK(srpt_mean(pm, lambda) == doctest::Approx(pk_fcfs_mean(pm, lambda)));
    // FB on identical jobs shares the server among everything present; its
    // mean is strictly worse than FCFS's.
    CHECK(fb_mean(pm, lambda) > pk_fcfs_mean(pm, lambda));
}

TEST_CASE("exponential grid: srpt beats fcfs, fb matches fcfs (memorylessness)") {
    auto exp = discretize(ParametricSpec{Exponential{1.0}}, 1.0 / 128, 50.0);
    double lambda = 0.5;
    CHECK(srpt_mean(exp, lambda) <= pk_fcfs_mean(exp, lambda));
    CHECK(close_rel(fb_mean(exp, lambda), pk_fcfs_mean(exp, lambda), 0.02));
}

TEST_CASE("bounded pareto at rho 0.8: order-of-magnitude fcfs/srpt gap") {
    auto bp = discretize(ParametricSpec{BoundedPareto{1.0, 1e5}}, 0.125, 1e5);
    double lambda = 0.8 / bp.mean();
    double ratio = pk_fcfs_mean(bp, lambda) / srpt_mean(bp, lambda);
    CHECK(ratio >= 10.0);
}

TEST_CASE("fcfs_srpt_bound_check") {
    auto pm = make_pmf(1.0, {{2, 1.0}});
    CHECK(fcfs_srpt_bound_check(pm, 0.4));  // ratio bound 1, equality

    auto u12 = make_pmf(1.0, {{1, 0.5}, {2, 0.5}});
    CHECK(fcfs_srpt_bound_check(u12, 0.8 / u12.mean()));

    Xoshiro256pp rng(99);
    for (int t = 0; t < 50; ++t) {
        std::size_t n = 2 + rng.next() % 20;
        std::vector<double> probs(n + 2, 0.0);
        double sum = 0;
        for (std::size_t i = 1; i < probs.size(); ++i) {
            probs[i] = rng.uniform();
            sum += probs[i];
        }
        for (auto& p : probs) p /= sum;
        DiscreteDist d(0.5, probs);
        for (double rho : {0.5, 0.9}) CHECK(fcfs_srpt_bound_check(d, rho / d.mean()));
    }
}

TEST_CASE("effective_dist folds checkpoint overhead into sizes") {
    auto d = make_pmf(0.5, {{2, 0.5}, {6, 0.5}});  // sizes 1 and 3

    auto same = effective_dist(d, 0.8, 0.0);
    REQUIRE(same.grid_points() == d.grid_points());
    for (std::size_t i = 0; i < d.grid_points(); ++i)
        CHECK(same.probs()[i] == doctest::Approx(d.probs()[i]));

    double delta = 1.0, gamma = 0.25;
    auto pm = make_pmf(0.25, {{12, 1.0}});  // size 3 = 3*delta -> pays 3 gammas
    auto eff = effective_dist(pm, delta, gamma);
    CHECK(eff.mean() == doctest::Approx(3.0 + 3 * gamma));  // 3.75, on the grid

    // mean identity: regridding rounds up by less than one step
    double exact = 0;
    for (std::size_t i : d.support()) {
        double s = d.size_at(i);
        exact += d.probs()[i] * (s + std::floor(s / delta + 1e-9) * gamma);
    }
    auto e2 = effective_dist(d, delta, gamma);
    CHECK(e2.mean() >= exact - 1e-12);
    CHECK(e2.mean() <= exact + d.step());
}

TEST_CASE("rho_prime: appendix bound, exactness, monotonicity") {
    auto bp = discretize(ParametricSpec{BoundedPareto{1.0, 1e5}}, 0.125, 1e5);
    auto wb = discretize(ParametricSpec{WeibullQuarter{}}, 0.125, 5000.0);
    for (const auto& d : {bp, wb}) {
        for (double rho : {0.5, 0.8, 0.95}) {
            double lambda = rho / d.mean();
            for (double gfrac : {0.001, 0.01, 0.1}) {
                double gamma = gfrac * d.mean();
                double dsafe = delta_safe(gamma, rho);
                double rp = rho_prime(d, lambda, 1.01 * dsafe, gamma);
                CHECK(rp < 1.0);
                for (double delta : {0.5 * dsafe, dsafe, 2 * dsafe, 10 * dsafe}) {
                    double r = rho_prime(d, lambda, delta, gamma);
                    CHECK(r <= rho * (1.0 + gamma / delta) + 1e-12);
                }
                // monotone: non-increasing in delta, non-decreasing in gamma
                CHECK(rho_prime(d, lambda, 2 * dsafe, gamma) <=
                      rho_prime(d, lambda, dsafe, gamma) + 1e-12);
                CHECK(rho_prime(d, lambda, dsafe, 2 * gamma) >=
                      rho_prime(d, lambda, dsafe, gamma) - 1e-12);
            }
        }
    }
}

TEST_CASE("delta_safe and rule-of-thumb substitutions") {
    CHECK(delta_safe(0.1, 0.8) == doctest::Approx(0.4));
    CHECK(delta_rule_of_thumb(0.8, 0.01, 1.0) == doctest::Approx(5.0 * std::sqrt(0.0125)));
    CHECK(right_wall(0.8, 1.0) == doctest::Approx(1.0 / (0.64 * 0.2)));
    CHECK_THROWS_AS((void)delta_safe(0.1, 1.0), std::domain_error);
}

TEST_CASE("assess: walls bracket the rule of thumb in the moderate regime") {
    auto bp = discretize(ParametricSpec{BoundedPareto{1.0, 1e5}}, 0.125, 1e5);
    for (double rho : {0.3, 0.5, 0.8, 0.95}) {
        double lambda = rho / bp.mean();
        for (double gfrac : {0.001, 0.01, 0.1, 1.0}) {
            CheckpointConfig cfg{1.0, gfrac * bp.mean()};
            auto a = assess(bp, lambda, cfg);
            CHECK(a.stable == (a.rho_prime < 1.0));
            if (!a.outside_rot_regime) {
                CHECK(a.delta_rule_of_thumb > a.delta_safe);
                CHECK(a.delta_rule_of_thumb < a.right_wall);
            }
        }
    }
    // extreme overhead pushes the rule of thumb outside the walls
    CheckpointConfig big{1.0, 100.0 * bp.mean()};
    auto a = assess(bp, 0.9 / bp.mean(), big);
    CHECK(a.outside_rot_regime);
}
