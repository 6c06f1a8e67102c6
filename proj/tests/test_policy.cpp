#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ranksched/policy.hpp"
#include "ranksched/rng.hpp"
#include "test_util.hpp"

using namespace ranksched;
using namespace ranksched::test;

TEST_CASE("srpt rank is remaining size exactly") {
    auto pol = CompiledPolicy::compile(PolicySpec{Srpt{}});
    RankFunction f = pol.build_curve(5.0);
    CHECK(f.at(2.0).value == doctest::Approx(3.0));
    CHECK(f.at(0.0).value == doctest::Approx(5.0));
    CHECK(f.at(5.0).value == doctest::Approx(0.0));
    for (double a : {0.0, 1.25, 4.999}) CHECK(f.at(a).value == doctest::Approx(5.0 - a));
}

TEST_CASE("fb rank is the age") {
    auto pol = CompiledPolicy::compile(PolicySpec{Fb{}});
    for (double a : {0.0, 1.0, 7.0}) CHECK(pol.curve(0).at(a).value == doctest::Approx(a));
}

TEST_CASE("fcfs rank is a fixed constant") {
    auto pol = CompiledPolicy::compile(PolicySpec{Fcfs{}});
    CHECK(pol.curve(0).at(0.0).value == pol.curve(0).at(123.0).value);
}

TEST_CASE("sjf: band 1 with the size at age 0, locked afterwards") {
    auto pol = CompiledPolicy::compile(PolicySpec{Sjf{}});
    Rank r0 = pol.rank_at(0, 4.0, 0.0);
    CHECK(r0.band == 1);
    CHECK(r0.value == doctest::Approx(4.0));
    CHECK(pol.rank_at(0, 4.0, 0.01).band == 0);
    CHECK(pol.rank_at(0, 4.0, 3.99).band == 0);
}

TEST_CASE("pprio rank is the class position in the priority order") {
    auto pol = CompiledPolicy::compile(PolicySpec{PPrio{{2, 1}}});
    CHECK(pol.curve(2).at(0.0).value == doctest::Approx(1.0));
    CHECK(pol.curve(1).at(5.0).value == doctest::Approx(2.0));
    CHECK_THROWS((void)pol.curve(3));
}

TEST_CASE("serpt_rank examples") {
    auto exp = discretize(ParametricSpec{Exponential{1.0}}, 0.01, 50.0);
    for (double a : {0.0, 1.0, 5.0}) CHECK(close(serpt_rank(exp, a), 1.0, 2 * exp.step()));

    auto pm = make_pmf(1.0, {{3, 1.0}});
    CHECK(serpt_rank(pm, 1.0) == doctest::Approx(2.0));

    auto two = make_pmf(1.0, {{1, 0.9}, {10, 0.1}});
    CHECK(serpt_rank(two, 1.0) == doctest::Approx(9.0));
}

TEST_CASE("gittins_rank examples") {
    auto pm = make_pmf(1.0, {{3, 1.0}});
    CHECK(gittins_rank(pm, 0.0) == doctest::Approx(3.0));

    auto two = make_pmf(1.0, {{1, 0.9}, {10, 0.1}});
    CHECK(gittins_rank(two, 0.0) == doctest::Approx(1.0 / 0.9));

    auto exp = discretize(ParametricSpec{Exponential{1.0}}, 0.01, 50.0);
    double g0 = gittins_rank(exp, 0.0);
    double g2 = gittins_rank(exp, 2.0);
    CHECK(close(g0, 1.0, 2 * exp.step()));
    CHECK(close(g2, 1.0, 2 * exp.step()));
    CHECK(close(g0, g2, 2 * exp.step()));

    CHECK_THROWS_AS((void)gittins_rank(pm, 3.0), std::domain_error);
}

TEST_CASE("gittins never exceeds serpt") {
    std::vector<DiscreteDist> dists;
    dists.push_back(make_pmf(1.0, {{1, 0.9}, {10, 0.1}}));
    dists.push_back(discretize(ParametricSpec{Exponential{1.0}}, 0.05, 30.0));
    dists.push_back(discretize(ParametricSpec{BoundedPareto{1.0, 100.0}}, 0.5, 100.0));
    dists.push_back(discretize(ParametricSpec{TruncGaussian{8.0, 2.0, 0.0, 16.0}}, 0.125, 16.0));
    for (const auto& d : dists) {
        for (std::size_t i = 0; i < d.grid_points(); ++i) {
            double a = d.size_at(i);
            if (d.tail(a) <= 0) break;
            double g = gittins_rank(d, a);
            double s = serpt_rank(d, a);
            CHECK(g <= s + 1e-9);
            CHECK(g >= 0.0);
            CHECK(std::isfinite(g));
        }
    }
}

TEST_CASE("class_rank delegates to the class distribution") {
    ClassSerpt cs{{{1, make_pmf(1.0, {{2, 1.0}})}, {2, make_pmf(1.0, {{5, 1.0}})}}};
    CHECK(class_rank(cs, 1, 0.0) == doctest::Approx(2.0));
    CHECK(class_rank(cs, 2, 0.0) == doctest::Approx(5.0));
    CHECK_THROWS(class_rank(cs, 9, 0.0));

    auto exp = discretize(ParametricSpec{Exponential{0.5}}, 0.01, 80.0);
    ClassGittins cg{{{1, exp}}};
    double a0 = class_rank(cg, 1, 0.0);
    double a3 = class_rank(cg, 1, 3.0);
    CHECK(close(a0, a3, 2 * exp.step()));
}

TEST_CASE("serpt reduces to FB when expected remaining size increases (DFR)") {
    auto d = discretize(ParametricSpec{Hyperexp2Balanced{1.0, 10.0}}, 0.125, 200.0);
    // premise: expected_remaining strictly increasing on this age range
    // (beyond it the slow phase dominates and the curve is flat)
    double prev = serpt_rank(d, 0.0);
    bool increasing = true;
    std::vector<double> ages;
    for (double a = d.step(); a < 10.0; a += d.step()) {
        double cur = serpt_rank(d, a);
        if (cur <= prev) increasing = false;
        prev = cur;
        ages.push_back(a);
    }
    REQUIRE(increasing);
    // conclusion: SERPT's argmin over any job pair equals FB's (least age)
    Xoshiro256pp rng(11);
    for (int t = 0; t < 200; ++t) {
        double a1 = ages[rng.next() % ages.size()];
        double a2 = ages[rng.next() % ages.size()];
        if (a1 == a2) continue;
        bool serpt_picks_first = serpt_rank(d, a1) < serpt_rank(d, a2);
        bool fb_picks_first = a1 < a2;
        CHECK(serpt_picks_first == fb_picks_first);
    }
}

TEST_CASE("serpt reduces to FCFS when age zero has the largest expected remaining") {
    auto d = discretize(ParametricSpec{TruncGaussian{3.0, 1.0, 0.0, 6.0}}, 1.0 / 16, 6.0);
    double at0 = serpt_rank(d, 0.0);
    for (double a = d.step(); d.tail(a) > 0; a += d.step()) {
        CHECK(serpt_rank(d, a) <= at0 + 1e-9);  // in-service job outranks any age-0 job
    }
}

TEST_CASE("first_worse_age on linear and stepped curves") {
    RankFunction fb({{0.0, 0.0, 1.0, 1}});
    CHECK(fb.first_worse_age(0.5, 2.0, true) == doctest::Approx(2.0));
    CHECK(fb.first_worse_age(2.0, 2.0, true) == kInf);   // tie, strict: no event
    CHECK(fb.first_worse_age(2.0, 2.0, false) == doctest::Approx(2.0));
    CHECK(fb.first_worse_age(2.5, 2.0, true) == doctest::Approx(2.5));  // already worse

    RankFunction steps({{0.0, 5.0, 0.0, 1}, {1.0, 3.0, 0.0, 1}, {2.0, 7.0, 0.0, 1}});
    CHECK(steps.first_worse_age(0.0, 6.0, true) == doctest::Approx(2.0));
    CHECK(steps.first_worse_age(0.0, 5.0, false) == doctest::Approx(0.0));
    CHECK(steps.first_worse_age(0.5, 5.0, true) == doctest::Approx(2.0));
    CHECK(steps.first_worse_age(1.5, 2.0, true) == doctest::Approx(1.5));
    CHECK(steps.first_worse_age(0.0, 10.0, true) == kInf);
}

TEST_CASE("first_worse_age matches a linear scan on long staircases") {
    Xoshiro256pp rng(23);
    std::vector<RankSegment> segs;
    for (int i = 0; i < 500; ++i)
        segs.push_back({0.1 * i, 1.0 + 10.0 * rng.uniform(), 0.0, 1});
    RankFunction f(segs);
    for (int t = 0; t < 300; ++t) {
        double from = 50.0 * rng.uniform();
        double thr = 1.0 + 10.0 * rng.uniform();
        bool strict = (rng.next() & 1) != 0;
        double got = f.first_worse_age(from, thr, strict);
        // oracle: scan ages densely
        double expect = kInf;
        std::size_t i0 = f.segment_index(from);
        for (std::size_t i = i0; i < segs.size() && expect == kInf; ++i) {
            double start = std::max(from, segs[i].start_age);
            double v = segs[i].value;
            if (strict ? v > thr : v >= thr) expect = start;
        }
        if (expect == kInf) {
            CHECK(got == kInf);
        } else {
            CHECK(got == doctest::Approx(expect));
        }
    }
}

TEST_CASE("lpl quantization of SRPT, PSJF, FB") {
    CutoffVector one{{1.0}};

    auto lpl_srpt = CompiledPolicy::compile(
        PolicySpec{Lpl{std::make_shared<const PolicySpec>(PolicySpec{Srpt{}}), one}});
    RankFunction f = lpl_srpt.build_curve(2.0);
    CHECK(f.at(0.0).value == doctest::Approx(2.0));   // remaining 2 -> level 2
    CHECK(f.at(1.5).value == doctest::Approx(1.0));   // remaining 0.5 -> level 1
    RankFunction g = lpl_srpt.build_curve(0.5);
    CHECK(g.at(0.0).value == doctest::Approx(1.0));

    auto lpl_psjf = CompiledPolicy::compile(
        PolicySpec{Lpl{std::make_shared<const PolicySpec>(PolicySpec{Psjf{}}),
                       CutoffVector{{1.0, 4.0}}}});
    RankFunction h = lpl_psjf.build_curve(2.0);
    for (double a : {0.0, 0.5, 1.9}) CHECK(h.at(a).value == doctest::Approx(2.0));

    auto lpl_fb = CompiledPolicy::compile(
        PolicySpec{Lpl{std::make_shared<const PolicySpec>(PolicySpec{Fb{}}),
                       CutoffVector{{3.0}}}});
    CHECK(lpl_fb.curve(0).at(1.0).value == doctest::Approx(1.0));
    CHECK(lpl_fb.curve(0).at(3.5).value == doctest::Approx(2.0));
}

TEST_CASE("lpl output takes at most n integer values and preserves order") {
    auto d = discretize(ParametricSpec{BoundedPareto{1.0, 1000.0}}, 0.25, 1000.0);
    CutoffVector cuts{{2.0, 10.0, 50.0}};
    RankFunction inner = serpt_curve(d);
    RankFunction q = quantize_curve(inner, cuts);
    std::vector<double> seen;
    for (const auto& s : q.segments()) {
        CHECK(s.slope == 0.0);
        CHECK(s.value >= 1.0);
        CHECK(s.value <= 4.0);
        CHECK(s.value == std::floor(s.value));
        seen.push_back(s.value);
    }
    // monotone: quantization never inverts the inner order
    Xoshiro256pp rng(5);
    for (int t = 0; t < 300; ++t) {
        double a1 = 40.0 * rng.uniform();
        double a2 = 40.0 * rng.uniform();
        double v1 = inner.at(a1).value, v2 = inner.at(a2).value;
        double q1 = q.at(a1).value, q2 = q.at(a2).value;
        if (v1 < v2) CHECK(q1 <= q2);
    }
}

TEST_CASE("checkpointed FB: inner rank on the lattice, locked in between") {
    PolicySpec ck{Checkpointed{std::make_shared<const PolicySpec>(PolicySpec{Fb{}}),
                               CheckpointConfig{1.0, 0.1}}};
    auto pol = CompiledPolicy::compile(ck);
    for (double a : {0.0, 1.0, 2.0, 5.0}) {
        Rank r = pol.rank_at(0, 100.0, a);
        CHECK(r.band == 1);
        CHECK(r.value == doctest::Approx(a));
    }
    for (double a : {0.5, 1.25, 3.999}) CHECK(pol.rank_at(0, 100.0, a).band == 0);
}

TEST_CASE("policy nesting rules") {
    auto inner = std::make_shared<const PolicySpec>(PolicySpec{Fb{}});
    PolicySpec lpl_fb{Lpl{inner, CutoffVector{{1.0}}}};
    PolicySpec ck_lpl{Checkpointed{std::make_shared<const PolicySpec>(lpl_fb),
                                   CheckpointConfig{1.0, 0.0}}};
    CHECK_NOTHROW(CompiledPolicy::compile(ck_lpl));

    PolicySpec lpl_lpl{Lpl{std::make_shared<const PolicySpec>(lpl_fb), CutoffVector{{1.0}}}};
    CHECK_THROWS(CompiledPolicy::compile(lpl_lpl));

    PolicySpec ck_fb{Checkpointed{inner, CheckpointConfig{1.0, 0.0}}};
    PolicySpec ck_ck{Checkpointed{std::make_shared<const PolicySpec>(ck_fb),
                                  CheckpointConfig{2.0, 0.0}}};
    CHECK_THROWS(CompiledPolicy::compile(ck_ck));

    PolicySpec lpl_ck{Lpl{std::make_shared<const PolicySpec>(ck_fb), CutoffVector{{1.0}}}};
    CHECK_THROWS(CompiledPolicy::compile(lpl_ck));

    PolicySpec ck_sjf{Checkpointed{std::make_shared<const PolicySpec>(PolicySpec{Sjf{}}),
                                   CheckpointConfig{1.0, 0.1}}};
    CHECK_THROWS(CompiledPolicy::compile(ck_sjf));

    CHECK_THROWS(CompiledPolicy::compile(
        PolicySpec{Lpl{inner, CutoffVector{{2.0, 1.0}}}}));  // non-increasing cutoffs
}

TEST_CASE("rank curves require size or class where applicable") {
    CHECK(needs_size(PolicySpec{Srpt{}}));
    CHECK(needs_size(PolicySpec{Sjf{}}));
    CHECK(!needs_size(PolicySpec{Fb{}}));
    CHECK(needs_class(PolicySpec{PPrio{{1, 2}}}));
    CHECK(!needs_class(PolicySpec{Fcfs{}}));
    auto pol = CompiledPolicy::compile(PolicySpec{Srpt{}});
    CHECK_THROWS((void)pol.build_curve(0.0));
    CHECK_THROWS((void)pol.curve(0));
}
