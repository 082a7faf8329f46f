#include <catch2/catch_amalgamated.hpp>

#include "cfrank/builder_wellapprox.hpp"
#include "cfrank/builders.hpp"
#include "cfrank/builders_infinite.hpp"
#include "cfrank/verifier.hpp"

using namespace cfrank;

namespace {

theta_ptr golden() { static theta_ptr t = theta::from_periodic({}, {Int(1)}); return t; }
theta_ptr silver() { static theta_ptr t = theta::from_surd(-1, 2, 1); return t; }

theta_ptr ramp() {
    static theta_ptr t = [] {
        std::vector<Int> cs;
        for (long i = 0; i <= 200; ++i) cs.push_back(Int(i));
        return theta::from_coeffs(cs);
    }();
    return t;
}

const build_result& R41() {
    static build_result r = [] {
        build_config cfg;
        cfg.levels = 8;
        return build_problem2_general(silver(), cfg);
    }();
    return r;
}

const build_result& R45() {
    static build_result r = [] {
        build_config cfg;
        cfg.levels = 5;
        return build_problem1_wellapprox(ramp(), cfg);
    }();
    return r;
}

const infinite_rigid_result& RB() {
    static infinite_rigid_result r = [] {
        build_config cfg;
        cfg.levels = 5;
        return build_infinite_rigid(golden(), cfg);
    }();
    return r;
}

const build_result& RC() {
    static build_result r = [] {
        build_config cfg;
        cfg.levels = 4;
        return build_infinite_zerotype(golden(), cfg);
    }();
    return r;
}

const build_result& R42() {
    static build_result r = [] {
        build_config cfg;
        cfg.levels = 6;
        return build_problem2_twocut(silver(), Int(1024), cfg);
    }();
    return r;
}

const build_result& G41() {
    static build_result r = [] {
        build_config cfg;
        cfg.levels = 12;
        return build_problem2_general(golden(), cfg);
    }();
    return r;
}

}  // namespace

TEST_CASE("summability reports window sum and tail bound", "[verifier]") {
    spectral_certificate s =
        check_summability(silver(), R41().params, R41().trace.majorant);
    CHECK(s.pass);
    CHECK(s.kind == check_kind::summability);
    CHECK(s.margins.size() == 8);
    CHECK_FALSE(s.window_only);
    CHECK(s.data.at("window_sum_hi") == "5.035589003e+0");
    CHECK(s.data.at("tail_hi") == "1.570796327e+0");
    CHECK(s.data.at("max_level") == "1");
    CHECK(s.data.at("max_level_hi") == "1.997862251e+0");
    CHECK(s.tail_note == "tail majorant: inverse_square");

    tail_majorant none;
    spectral_certificate w = check_summability(silver(), R41().params, none);
    CHECK(w.pass);
    CHECK(w.window_only);
}

TEST_CASE("base-pair separation certifies the walk tower only", "[verifier]") {
    for (size_t n = 1; n <= 5; ++n) {
        spectral_certificate c =
            check_injective_arg(ramp(), R45().params, n, R45().trace.majorant);
        CHECK(c.pass);
        REQUIRE(c.margins.size() == 1);
        CHECK(dy_to_rat(c.margins[0].value) > 0);
        CHECK(c.data.at("verdict") == "greater");
    }
    for (size_t n = 1; n <= 7; ++n) {
        spectral_certificate c =
            check_injective_arg(silver(), R41().params, n, R41().trace.majorant);
        CHECK_FALSE(c.pass);
        CHECK(c.data.at("verdict") == "less");
    }
    CHECK_THROWS_AS(check_injective_arg(silver(), R41().params, 8, R41().trace.majorant),
                    undecidable_comparison);
    CHECK_THROWS_AS(check_injective_arg(silver(), R41().params, 9, R41().trace.majorant),
                    out_of_range);
    spectral_certificate base =
        check_injective_arg(silver(), R41().params, 0, R41().trace.majorant);
    CHECK(base.pass);
    CHECK(base.data.count("vacuous") == 1);
    spectral_certificate dist =
        check_injective_dist(ramp(), R45().params, 1, R45().trace.majorant);
    CHECK(dist.pass);
    CHECK(dist.kind == check_kind::injectivity_dist);
}

TEST_CASE("rigidity shape screens arithmetic progressions", "[verifier]") {
    spectral_certificate b = check_rigidity_shape(RB().params, golden());
    CHECK(b.pass);
    CHECK(b.data.at("qualifying_levels") == "1,2,3,4,5");
    CHECK(b.data.at("rigidity_times") ==
          "2,144,92736,38460215808,3307565366710932676608");
    CHECK(b.data.at("qualifying_counts") == "2,4,8,16,32");

    spectral_certificate a = check_rigidity_shape(R41().params, silver());
    CHECK_FALSE(a.pass);
    CHECK(a.data.at("qualifying_levels") == "1,5,6,7,8");
    CHECK(a.data.at("rigidity_times") == "1,5193,21612,43282,86593");

    spectral_certificate w = check_rigidity_shape(R45().params, ramp());
    CHECK_FALSE(w.pass);
    CHECK(w.data.at("qualifying_levels") == "1");
}

TEST_CASE("zero-type shape separates the two infinite towers", "[verifier]") {
    spectral_certificate c = check_zerotype_shape(RC().params, golden());
    CHECK(c.pass);
    REQUIRE(c.margins.size() == 4);
    for (const level_margin& m : c.margins) CHECK(dy_to_rat(m.value) > 0);

    spectral_certificate b = check_zerotype_shape(RB().params, golden());
    CHECK_FALSE(b.pass);
    CHECK(b.data.at("witness") == "level 2: repeated ordered digit difference");
}

TEST_CASE("torsion obstruction measures residue shares", "[verifier]") {
    for (long mod : {2L, 3L}) {
        spectral_certificate c =
            check_torsion_obstruction(RC().params, Int(mod), golden());
        CHECK(c.pass);
        CHECK(c.data.at("modulus") == std::to_string(mod));
        CHECK(c.data.at("threshold") == "7/10");
        CHECK(c.data.at("qualifying_levels") == "1,2,3,4");
        CHECK(c.data.at("shares") == "1/2,2/3,1/2,3/5");
    }
    CHECK_THROWS_AS(check_torsion_obstruction(RC().params, Int(1), golden()),
                    out_of_range);
}

TEST_CASE("finite-order necessity runs only where shape allows it", "[verifier]") {
    spectral_certificate c = check_finite_order_necessity(silver(), R42().params);
    CHECK(c.pass);
    CHECK(c.data.at("M") == "1276");
    CHECK(c.data.at("drift_bound") == "1630728");
    CHECK(c.data.at("drifts") == "0,0,0,0,0,0,0,0,0,0,0,0,0,30,102,36,1108");
    CHECK(c.data.at("drift_ok") == "true");
    CHECK(c.data.at("verdict") == "no-vanishing-on-window");

    CHECK_THROWS_AS(check_finite_order_necessity(silver(), R41().params),
                    not_applicable);
    CHECK_THROWS_AS(check_finite_order_necessity(golden(), RB().params),
                    not_applicable);
}

TEST_CASE("window concentration test agrees with the quadratic reference",
          "[verifier]") {
    for (size_t n = 1; n <= 12; ++n)
        CHECK(G41().params.count(n) ==
              std::vector<Int>{Int(19), Int(11), Int(4), Int(4), Int(3), Int(2), Int(3),
                               Int(2), Int(2), Int(2), Int(2), Int(2)}[n - 1]);

    eigen_window_report top = eigenvalue_window_test(
        golden(), G41().params, candidate_irrational(golden()), Rat(1, 10), 11, 12);
    CHECK(top.pass);
    CHECK(top.best_count == 4);
    CHECK(top.total == 4);
    CHECK(top.density == 1);
    CHECK(eigen_window_brute(golden(), G41().params, candidate_irrational(golden()),
                             Rat(1, 10), 11, 12) == 4);

    eigen_window_report half = eigenvalue_window_test(
        golden(), RC().params, candidate_rational(Rat(1, 2)), Rat(1, 10), 2, 4);
    CHECK_FALSE(half.pass);
    CHECK(half.best_count == 30);
    CHECK(half.total == 60);
    CHECK(half.density == Rat(1, 2));
    CHECK(eigen_window_brute(golden(), RC().params, candidate_rational(Rat(1, 2)),
                             Rat(1, 10), 2, 4) == 30);

    CHECK_THROWS_AS(eigenvalue_window_test(golden(), RC().params,
                                           candidate_rational(Rat(1, 2)), Rat(0), 2, 4),
                    out_of_range);
    CHECK_THROWS_AS(eigenvalue_window_test(golden(), RC().params,
                                           candidate_rational(Rat(1, 2)), Rat(1, 10), 0, 4),
                    out_of_range);
    CHECK_THROWS_AS(eigenvalue_window_test(golden(), RC().params,
                                           candidate_rational(Rat(1, 2)), Rat(1, 10), 2, 9),
                    out_of_range);
}

TEST_CASE("replaying traces matches every stored certificate", "[verifier]") {
    struct row {
        const certificate_trace* tr;
        const cf_params* p;
        theta_ptr t;
        size_t total, replayed, exact;
    };
    std::vector<row> rows = {
        {&R41().trace, &R41().params, silver(), 72, 72, 0},
        {&R42().trace, &R42().params, silver(), 24, 24, 0},
        {&R45().trace, &R45().params, ramp(), 30, 25, 5},
        {&RB().trace, &RB().params, golden(), 9, 4, 5},
        {&RC().trace, &RC().params, golden(), 46, 12, 34},
    };
    for (const row& r : rows) {
        recheck_report rep = recheck_trace(*r.tr, r.t, *r.p);
        CHECK(rep.total == r.total);
        CHECK(rep.replayed == r.replayed);
        CHECK(rep.exact == r.exact);
        CHECK(rep.all_match);
    }
}

TEST_CASE("tampered certificates are caught on replay", "[verifier]") {
    certificate_trace bad_exact = RC().trace;
    bool touched = false;
    for (auto& lv : bad_exact.levels)
        for (auto& c : lv.certs)
            if (!touched && c.name == "(ii)") {
                c.lhs.value += 1;
                touched = true;
            }
    REQUIRE(touched);
    recheck_report r1 = recheck_trace(bad_exact, golden(), RC().params);
    CHECK_FALSE(r1.all_match);
    CHECK_FALSE(r1.notes.empty());

    certificate_trace bad_replay = RC().trace;
    touched = false;
    for (auto& lv : bad_replay.levels)
        for (auto& c : lv.certs)
            if (!touched && c.name == "(v)/k<=L-1") {
                c.verdict = ordering::less;
                touched = true;
            }
    REQUIRE(touched);
    recheck_report r2 = recheck_trace(bad_replay, golden(), RC().params);
    CHECK_FALSE(r2.all_match);

    certificate_trace unknown = RB().trace;
    ineq_cert stray;
    stray.name = "(zz)";
    stray.level = 1;
    stray.lhs = qdesc::level(qdesc::kind::eta_abs, 3);
    stray.rhs = qdesc::constant(Rat(1));
    stray.verdict = ordering::less;
    stray.bits = 0;
    unknown.levels.front().certs.push_back(stray);
    recheck_report r3 = recheck_trace(unknown, golden(), RB().params);
    CHECK(r3.all_match);
    CHECK(r3.skipped == 1);
    REQUIRE_FALSE(r3.notes.empty());
    CHECK(r3.notes.back().find("no replay rule") != std::string::npos);
}
