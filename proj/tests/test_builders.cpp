#include <catch2/catch_amalgamated.hpp>

#include "cfrank/builder_wellapprox.hpp"
#include "cfrank/builders.hpp"
#include "cfrank/builders_infinite.hpp"

using namespace cfrank;

namespace {

theta_ptr golden() { return theta::from_periodic({}, {Int(1)}); }
theta_ptr silver() { return theta::from_surd(-1, 2, 1); }

theta_ptr ramp() {
    std::vector<Int> cs;
    for (long i = 0; i <= 200; ++i) cs.push_back(Int(i));
    return theta::from_coeffs(cs);
}

size_t cert_count(const certificate_trace& tr) {
    size_t n = 0;
    for (const auto& lv : tr.levels) n += lv.certs.size();
    return n;
}

std::vector<const ineq_cert*> certs_named(const certificate_trace& tr,
                                          const std::string& name) {
    std::vector<const ineq_cert*> out;
    for (const auto& lv : tr.levels)
        for (const auto& c : lv.certs)
            if (c.name == name) out.push_back(&c);
    return out;
}

std::vector<Int> ints_of(const std::string& joined) {
    std::vector<Int> out;
    size_t pos = 0;
    while (pos < joined.size()) {
        size_t next = joined.find(',', pos);
        if (next == std::string::npos) next = joined.size();
        out.push_back(Int(joined.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

}  // namespace

TEST_CASE("general finite tower freezes its heights and digit counts", "[builders]") {
    build_config cfg;
    cfg.levels = 8;
    build_result r = build_problem2_general(silver(), cfg);

    CHECK(r.trace.builder == "thm41");
    CHECK(r.params.meta.at("builder") == "thm41");
    CHECK(r.params.h ==
          std::vector<Int>{Int(1), Int(16), Int(192), Int(1539), Int(4989), Int(20568),
                           Int(42180), Int(85462), Int(258648)});
    CHECK(r.params.meta.at("fillers") == "0");
    CHECK(cert_count(r.trace) == 72);
    CHECK(r.trace.majorant.k == tail_majorant::kind::inverse_square);
    CHECK(r.trace.majorant.L == 8);
    CHECK(r.trace.majorant.offset == 0);

    std::vector<Int> digit_counts;
    for (const auto& lv : r.trace.levels)
        if (lv.phase == "proper") digit_counts.push_back(Int(lv.data.at("r")));
    CHECK(digit_counts == std::vector<Int>{Int(16), Int(11), Int(7), Int(3), Int(4),
                                           Int(2), Int(2), Int(3)});
    for (size_t n = 1; n <= 8; ++n) CHECK(r.params.count(n) == digit_counts[n - 1]);

    CHECK(certs_named(r.trace, "(4.1)").size() == 8);
    CHECK(certs_named(r.trace, "(stop)").size() == 8);
    for (const ineq_cert* c : certs_named(r.trace, "(measure)"))
        CHECK(c->verdict == ordering::less);
    for (const ineq_cert* c : certs_named(r.trace, "(4.3)"))
        CHECK(dy_to_rat(c->margin) > 0);

    CHECK(validate(r.params).ok);
    measure_report m = measure_tail(r.params);
    CHECK(m.all_nonneg);
    CHECK(m.total < 1);
}

TEST_CASE("building zero levels leaves the trivial tower", "[builders]") {
    build_config cfg;
    cfg.levels = 0;
    build_result r = build_problem2_general(silver(), cfg);
    CHECK(r.params.levels() == 0);
    CHECK(r.trace.levels.empty());
    cfg.digit_cap = 32;
    CHECK_THROWS_AS(build_problem2_general(silver(), cfg), out_of_range);
}

TEST_CASE("two-digit variant admits its scale once and then doubles", "[builders]") {
    theta_ptr s = silver();
    CHECK(choose_twocut_N(s, 6) == 1024);

    build_config cfg;
    cfg.levels = 6;
    build_result r = build_problem2_twocut(s, Int(1024), cfg);
    CHECK(r.trace.builder == "thm42");
    CHECK(r.params.meta.at("N") == "1024");
    CHECK(r.params.levels() == 18);
    CHECK(r.params.meta.at("fillers") == "12");
    CHECK(cert_count(r.trace) == 24);
    CHECK(r.params.h.back() == 264524);
    for (size_t n = 1; n <= 18; ++n) CHECK(r.params.count(n) == 2);

    REQUIRE(!r.trace.levels.empty());
    const level_record& pre = r.trace.levels.front();
    CHECK(pre.phase == "bootstrap");
    CHECK(pre.certs.size() == 6);
    for (const ineq_cert& c : pre.certs) {
        CHECK(c.name == "(e-member)");
        CHECK(c.verdict == ordering::less);
    }
    CHECK(certs_named(r.trace, "(4.4)").size() == 6);
    CHECK(certs_named(r.trace, "(measure)").size() == 6);
    CHECK(validate(r.params).ok);
    CHECK(measure_tail(r.params).all_nonneg);

    CHECK_THROWS_AS(build_problem2_twocut(s, Int(512), cfg), e_membership_failed);
    CHECK_THROWS_AS(build_problem2_twocut(s, Int(0), cfg), out_of_range);

    Int huge = 1;
    for (int i = 0; i < 200; ++i) huge *= 10;
    cfg.digit_cap = 64;
    CHECK_THROWS_AS(build_problem2_twocut(s, huge, cfg), digit_cap_exceeded);
}

TEST_CASE("walk tower records its spike indices and walk sizes", "[builders]") {
    build_config cfg;
    cfg.levels = 5;
    build_result r = build_problem1_wellapprox(ramp(), cfg);

    CHECK(r.trace.builder == "thm45");
    CHECK(r.params.meta.at("m_seq") == "4,8,18,32,50,72,98,128");
    CHECK(cert_count(r.trace) == 30);
    CHECK(r.params.h ==
          std::vector<Int>{Int(1), Int(10), Int(9976), Int("764582487395121"),
                           Int("18149958584402171827506220321204096"),
                           Int("1358624514966649027502870115314388268653615780367348460080"
                               "044625")});
    CHECK(r.params.count(1) == 2);
    CHECK_FALSE(is_walk(r.params.C[1]));
    std::vector<Int> walk_counts{Int(709), Int("66054427075"),
                                 Int("22350863069559914225"),
                                 Int("72445609693614179550168096471")};
    for (size_t n = 2; n <= 5; ++n) {
        CHECK(is_walk(r.params.C[n]));
        CHECK(r.params.count(n) == walk_counts[n - 2]);
    }

    CHECK(r.trace.majorant.k == tail_majorant::kind::wellapprox_telescope);
    CHECK(r.trace.majorant.L == 5);
    CHECK(r.trace.majorant.m_seq ==
          std::vector<size_t>{4, 8, 18, 32, 50, 72, 98, 128});

    CHECK(certs_named(r.trace, "(4.6)").size() == 8);
    CHECK(certs_named(r.trace, "(final)").size() == 8);
    CHECK(certs_named(r.trace, "(aux_con3)").size() == 4);
    CHECK(certs_named(r.trace, "(4.11)").size() == 5);
    CHECK(certs_named(r.trace, "(master)").size() == 5);
    for (const ineq_cert* c : certs_named(r.trace, "(master)")) {
        CHECK(c->verdict == ordering::greater);
        CHECK(dy_to_rat(c->margin) > 0);
    }

    theta_ptr t = ramp();
    validation_report rep = validate(r.params, t);
    CHECK(rep.ok);
    CHECK(rep.full_scope);

    CHECK_THROWS_AS(build_problem1_wellapprox(silver(), cfg), m_sequence_not_found);
}

TEST_CASE("geometric progression tower freezes steps and rejections", "[builders]") {
    build_config cfg;
    cfg.levels = 5;
    infinite_rigid_result r = build_infinite_rigid(golden(), cfg);

    CHECK(r.trace.builder == "thmB");
    CHECK(r.params.meta.at("q_seq") == "2,36,161,51841,5374978561");
    CHECK(cert_count(r.trace) == 9);
    CHECK(r.params.h ==
          std::vector<Int>{Int(1), Int(4), Int(576), Int(741888), Int("615363452928"),
                           Int("105842091734749845651456")});
    for (size_t n = 1; n <= 5; ++n) CHECK(r.params.count(n) == pow2(long(n)));

    std::vector<std::string> gaps, rejected;
    for (const auto& lv : r.trace.levels) {
        gaps.push_back(lv.data.at("gap"));
        rejected.push_back(lv.data.at("rejected"));
    }
    CHECK(gaps == std::vector<std::string>{"2", "144", "92736", "38460215808",
                                           "3307565366710932676608"});
    CHECK(rejected ==
          std::vector<std::string>{"", "2,17", "80", "6480", "83984040"});

    // each level is a full arithmetic progression with the recorded gap
    theta_ptr t = golden();
    for (size_t n = 1; n <= 5; ++n) {
        Int gap(gaps[n - 1]);
        std::vector<Int> c = r.params.materialize(t, n, 100);
        for (size_t j = 0; j < c.size(); ++j) CHECK(c[j] == Int(j) * gap);
        CHECK(r.params.h[n] == Int(c.size()) * gap);
    }

    const level_record& l1 = r.trace.levels.front();
    REQUIRE(l1.certs.size() == 1);
    CHECK(l1.certs[0].name == "(mass)");
    CHECK(l1.certs[0].bits == 0);
    CHECK(dy_to_rat(l1.certs[0].margin) == 0);
    CHECK(certs_named(r.trace, "first/k<=n-1").size() == 4);
    for (const ineq_cert* c : certs_named(r.trace, "first/k<=n-1")) {
        CHECK(c->verdict == ordering::greater);
        CHECK(dy_to_rat(c->margin) > 0);
    }

    CHECK(validate(r.params, t).ok);

    build_config tight = cfg;
    tight.m_window = 1;
    CHECK_THROWS_AS(build_infinite_rigid(golden(), tight), search_cap_exceeded);
}

TEST_CASE("two-cut companion telescopes back to the progression tower",
          "[builders]") {
    build_config cfg;
    cfg.levels = 5;
    theta_ptr t = golden();
    infinite_rigid_result r = build_infinite_rigid(t, cfg);

    const cf_params& v = r.two_cut_variant;
    CHECK(v.meta.at("builder") == "thmB");
    CHECK(v.meta.at("variant") == "two_cut");
    CHECK(v.meta.at("block_boundaries") == "1,3,6,10,15");
    CHECK(v.levels() == 15);
    for (size_t n = 1; n <= 15; ++n) CHECK(v.count(n) == 2);
    CHECK(validate(v, t).ok);

    std::vector<size_t> boundaries{1, 3, 6, 10, 15};
    cf_params merged = telescope(v, boundaries, t);
    CHECK(merged.h == r.params.h);
    for (size_t n = 1; n <= 5; ++n)
        CHECK(merged.materialize(t, n, 100) == r.params.materialize(t, n, 100));
}

TEST_CASE("alternating-residue tower freezes digits and residues", "[builders]") {
    build_config cfg;
    cfg.levels = 4;
    theta_ptr t = golden();
    build_result r = build_infinite_zerotype(t, cfg);

    CHECK(r.trace.builder == "thmC");
    CHECK(cert_count(r.trace) == 46);
    CHECK(r.params.h ==
          std::vector<Int>{Int(1), Int(7), Int(271457), Int("1591822965280983"),
                           Int("8757039683021898356985021108850274930")});

    std::vector<Int> fibers;
    for (const auto& lv : r.trace.levels) fibers.push_back(Int(lv.data.at("p")));
    CHECK(fibers == std::vector<Int>{Int(2), Int(3), Int(2), Int(4)});

    std::vector<std::vector<Int>> elems = {
        {Int(0), Int(5)},
        {Int(0), Int(27670), Int(271443)},
        {Int(0), Int("96460929100277"), Int("498454011879264"),
         Int("1591822964738069")},
        {Int(0), Int("22294354670762532580231174328794393"),
         Int("488013095596382371170128698437458308"),
         Int("1486333641459909646090617269641169317"),
         Int("8757039683021898356981837462919712964")}};
    for (size_t L = 1; L <= 4; ++L) {
        std::vector<Int> c = r.params.materialize(t, L, 100);
        CHECK(c == elems[L - 1]);
        CHECK(ints_of(r.trace.levels[L - 1].data.at("elements")) == elems[L - 1]);
        CHECK(r.params.count(L) == Int(L + 1));
        // geometric growth and alternating residues mod the fiber index
        const Int& p = fibers[L - 1];
        for (size_t j = 1; j < c.size(); ++j) {
            CHECK(c[j] > 3 * (r.params.h[L - 1] + c[j - 1]));
            CHECK(c[j] % p == (j % 2 == 1 ? 1 : 0));
        }
        // all ordered differences distinct
        std::set<Int> diffs;
        size_t pairs = 0;
        for (size_t i = 0; i < c.size(); ++i)
            for (size_t j = 0; j < c.size(); ++j)
                if (i != j) diffs.insert(c[i] - c[j]), ++pairs;
        CHECK(diffs.size() == pairs);
        // minimal height: exactly two copies of the previous tower fit
        CHECK(r.params.h[L] == 2 * r.params.h[L - 1] + c.back());
    }

    for (const ineq_cert* c : certs_named(r.trace, "(ii)"))
        CHECK(dy_to_rat(c->margin) == 2);
    std::vector<Rat> vi_expect{Rat(2, 5), Rat(1, 10), Rat(4, 5), Rat(1, 2)};
    auto vi = certs_named(r.trace, "(vi)");
    REQUIRE(vi.size() == 4);
    for (size_t i = 0; i < 4; ++i) {
        Rat got = dy_to_rat(vi[i]->margin);
        Rat diff = vi_expect[i] - got;
        if (diff < 0) diff = -diff;
        CHECK(diff < Rat(1, pow2(63)));
    }
    for (const ineq_cert* c : certs_named(r.trace, "(mass)"))
        CHECK(c->verdict == ordering::greater);
    CHECK(certs_named(r.trace, "(v)/k<=L-1").size() == 12);

    measure_report m = measure_tail(r.params);
    CHECK(m.all_nonneg);
    // infinite-measure direction: increments stay above one half
    for (const Rat& inc : m.increments) CHECK(inc > Rat(1, 2));
    CHECK(validate(r.params, t).ok);
}
