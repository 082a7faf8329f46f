#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "cfrank/builders.hpp"
#include "cfrank/builders_infinite.hpp"
#include "cfrank/simulator.hpp"

using namespace cfrank;

namespace {

theta_ptr golden() { static theta_ptr t = theta::from_periodic({}, {Int(1)}); return t; }

cf_params doubling(size_t levels) {
    cf_params p;
    p.h.push_back(1);
    p.C.push_back(explicit_level{Int(0)});
    for (size_t n = 1; n <= levels; ++n) {
        p.h.push_back(p.h.back() * 2);
        p.C.push_back(explicit_level{Int(0), p.h[n - 1]});
    }
    return p;
}

const infinite_rigid_result& RB7() {
    static infinite_rigid_result r = [] {
        build_config cfg;
        cfg.levels = 7;
        return build_infinite_rigid(golden(), cfg);
    }();
    return r;
}

const infinite_rigid_result& RB5() {
    static infinite_rigid_result r = [] {
        build_config cfg;
        cfg.levels = 5;
        return build_infinite_rigid(golden(), cfg);
    }();
    return r;
}

const build_result& RC4() {
    static build_result r = [] {
        build_config cfg;
        cfg.levels = 4;
        return build_infinite_zerotype(golden(), cfg);
    }();
    return r;
}

}  // namespace

TEST_CASE("towers and cylinder positions on a doubling fixture", "[simulator]") {
    cf_params p = doubling(3);
    tower tw = make_tower(p, 3);
    CHECK(tw.N == 3);
    CHECK(tw.h_N == 8);
    CHECK(tw.rung_weight == Rat(1, 8));
    CHECK_THROWS_AS(make_tower(p, 4), out_of_range);

    CHECK(cylinder_positions(nullptr, p, {1, Int(0)}, 3) ==
          std::vector<Int>{Int(0), Int(2), Int(4), Int(6)});
    CHECK(cylinder_positions(nullptr, p, {1, Int(1)}, 3) ==
          std::vector<Int>{Int(1), Int(3), Int(5), Int(7)});
    CHECK(cylinder_positions(nullptr, p, {3, Int(5)}, 3) == std::vector<Int>{Int(5)});
    CHECK_THROWS_AS(cylinder_positions(nullptr, p, {1, Int(2)}, 3), out_of_range);
    CHECK_THROWS_AS(cylinder_positions(nullptr, p, {1, Int(0)}, 3, Int(2)),
                    sumset_too_large);
}

TEST_CASE("correlations count exact overlaps with a spill bound", "[simulator]") {
    cf_params p = doubling(3);
    cylinder A{1, Int(0)}, B{2, Int(0)};

    correlation_result ab = correlation(nullptr, p, A, B, Int(0), 3);
    CHECK(ab.value == Rat(1, 4));
    CHECK(ab.error_bound == 0);

    correlation_result aa = correlation(nullptr, p, A, A, Int(2), 3);
    CHECK(aa.value == Rat(3, 8));
    CHECK(aa.error_bound == Rat(1, 8));

    correlation_result far = correlation(nullptr, p, A, A, Int(7), 3);
    CHECK(far.value == 0);
    CHECK(far.error_bound == Rat(3, 8));

    CHECK_THROWS_AS(correlation(nullptr, p, A, A, Int(-1), 3), out_of_range);
    CHECK_THROWS_AS(correlation(nullptr, p, A, A, Int(8), 3), out_of_range);

    std::vector<Int> times{Int(0), Int(2), Int(4)};
    std::vector<profile_row> rows = correlation_profile(nullptr, p, A, times, 3);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].m == 0);
    CHECK(rows[0].value == Rat(1, 2));
    CHECK(rows[1].value == Rat(3, 8));
    CHECK(rows[2].value == Rat(1, 4));
}

TEST_CASE("progression tower returns at its recorded times", "[simulator]") {
    const cf_params& p = RB7().params;
    theta_ptr t = golden();
    struct row {
        size_t n;
        const char* m;
        Rat expect;
    };
    std::vector<row> rows = {{3, "92736", Rat(7, 64)},
                             {4, "38460215808", Rat(15, 1024)},
                             {5, "3307565366710932676608", Rat(31, 32768)}};
    for (const row& r : rows) {
        Int m = p.element(t, r.n, 1);
        CHECK(m == Int(r.m));
        correlation_result c =
            correlation(t, p, {r.n - 1, Int(0)}, {r.n - 1, Int(0)}, m, r.n + 2);
        CHECK(c.value == r.expect);
        CHECK(c.error_bound == 0);
        // the return mass is (1 - 2^-n) of the cylinder mass exactly
        Int prod = 1;
        for (size_t k = 1; k < r.n; ++k) prod *= p.count(k);
        CHECK(c.value == (Rat(1) - Rat(1, pow2(long(r.n)))) / Rat(prod));
    }
}

TEST_CASE("decay windows sample structured times and shrink", "[simulator]") {
    const cf_params& p = RC4().params;
    theta_ptr t = golden();

    std::vector<Int> ts = decay_times(t, p, 2);
    CHECK(ts.size() == 40);
    CHECK(ts.front() == p.h[2]);
    CHECK(ts.back() == p.h[3] - p.h[2]);
    CHECK(std::is_sorted(ts.begin(), ts.end()));
    CHECK(std::adjacent_find(ts.begin(), ts.end()) == ts.end());

    decay_report dr = decay_profile(t, p, 2, 3, 4);
    CHECK(dr.windows == std::vector<size_t>{2, 3});
    CHECK(dr.base_mass == Rat(1, 2));
    REQUIRE(dr.maxima.size() == 2);
    CHECK(dr.maxima[0] == Rat(1, 8));
    CHECK(dr.maxima[1] == Rat(1, 10));
    CHECK(dr.max_errors[0] == 0);
    CHECK(dr.rows.size() == 124);
    // normalized by the probed mass this is 1 / #C_{k+1}
    CHECK(dr.maxima[0] / dr.base_mass == Rat(1, Int(p.count(3))));
    CHECK(dr.maxima[1] / dr.base_mass == Rat(1, Int(p.count(4))));

    CHECK_THROWS_AS(decay_times(t, p, 0), out_of_range);
    CHECK_THROWS_AS(decay_times(t, p, 4), out_of_range);
}

TEST_CASE("sampled points and their eigenvalue data", "[simulator]") {
    const cf_params& p = RB5().params;
    theta_ptr t = golden();
    std::mt19937_64 rng(11);
    point_sample x = sample_point(t, p, 3, rng);
    CHECK(x.n == 0);
    CHECK(x.f == 0);
    CHECK(x.digits == std::vector<Int>{Int(2), Int(144), Int(463680)});

    eigen_value ev = eigen_eval(t, p, x, 3, RB5().trace.majorant);
    CHECK(dec_string(ev.angle.center, 6) == "2.32866e-1");
    CHECK(dy_to_rat(ev.angle.radius) < Rat(1, pow2(100)));
    CHECK(dy_to_rat(ev.tail_hi) < Rat(1, 1000000));
    CHECK(dy_to_rat(ev.tail_hi) > 0);

    point_sample bad = x;
    bad.digits[1] = 5;
    CHECK_THROWS_AS(eigen_eval(t, p, bad, 3, RB5().trace.majorant), out_of_range);
    CHECK_THROWS_AS(sample_point(t, p, 9, rng), out_of_range);
}

TEST_CASE("one-step eigenvalue defect stays inside the certified bound",
          "[simulator]") {
    const cf_params& p = RB5().params;
    theta_ptr t = golden();
    defect_report d = eigen_defect(t, p, 3, 25, 7, RB5().trace.majorant);
    CHECK(d.samples == 25);
    CHECK(d.skipped == 0);
    CHECK(d.seed == 7);
    CHECK(d.bound == Rat(Int("56745027541821486770823512067"),
                         Int("41538374868278621028243970633760768")));
    CHECK(dy_to_rat(d.max_defect) < Rat(1, pow2(120)));
    CHECK(dy_to_rat(d.max_defect) <= d.bound);

    defect_report d2 = eigen_defect(t, p, 3, 25, 7, RB5().trace.majorant);
    CHECK(dy_cmp(d.max_defect, d2.max_defect) == 0);

    defect_report d3 = eigen_defect(t, p, 3, 25, 8, RB5().trace.majorant);
    CHECK(d3.seed == 8);

    CHECK_THROWS_AS(eigen_defect(t, p, 0, 5, 7, RB5().trace.majorant), out_of_range);
}

TEST_CASE("pair separation gap certifies against the tail", "[simulator]") {
    const cf_params& p = RB5().params;
    theta_ptr t = golden();
    gap_report g = injectivity_gap(t, p, 2, 5, RB5().trace.majorant);
    CHECK_FALSE(g.vacuous);
    CHECK(g.witness_d == 377);
    CHECK(g.certified);
    CHECK(dy_to_rat(g.gap_lo) > 0);
    CHECK(dy_to_rat(g.gap_lo) > 2 * dy_to_rat(g.tail_hi));

    gap_report g0 = injectivity_gap(t, p, 0, 5, RB5().trace.majorant);
    CHECK(g0.vacuous);
    CHECK(g0.certified);

    CHECK_THROWS_AS(injectivity_gap(t, p, 6, 5, RB5().trace.majorant), out_of_range);
}
