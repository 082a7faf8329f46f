#include <catch2/catch_amalgamated.hpp>

#include "cfrank/params.hpp"

using namespace cfrank;

namespace {

theta_ptr silver() { return theta::from_surd(-1, 2, 1); }

// heights double and every level keeps both possible digits, so no measure
// is lost anywhere
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

// explicit two-level tower that loses one third of its mass per level
cf_params leaky() {
    cf_params p;
    p.h = {Int(1), Int(3), Int(9)};
    p.C.push_back(explicit_level{Int(0)});
    p.C.push_back(explicit_level{Int(0), Int(2)});
    p.C.push_back(explicit_level{Int(0), Int(4)});
    return p;
}

// walk level over the silver rotation sitting on an explicit base
cf_params walk_fixture() {
    cf_params p;
    p.h = {Int(1), Int(29), Int(396)};
    p.C.push_back(explicit_level{Int(0)});
    p.C.push_back(explicit_level{Int(0), Int(14)});
    p.C.push_back(walk_level{5, Int(29), Int(12), Int(8), +1});
    return p;
}

const std::vector<Int> walk_elems = {Int(0),   Int(29),  Int(58),  Int(128),
                                     Int(198), Int(227), Int(297), Int(367)};

}  // namespace

TEST_CASE("levels, counts and element access on explicit sets", "[params]") {
    cf_params p = doubling(4);
    CHECK(p.levels() == 4);
    CHECK(p.h == std::vector<Int>{Int(1), Int(2), Int(4), Int(8), Int(16)});
    for (size_t n = 1; n <= 4; ++n) {
        CHECK(p.count(n) == 2);
        CHECK(p.element(nullptr, n, 0) == 0);
        CHECK(p.element(nullptr, n, 1) == p.h[n - 1]);
        CHECK(p.max_element(nullptr, n) == p.h[n - 1]);
    }
    CHECK_THROWS_AS(p.element(nullptr, 1, 2), out_of_range);
    CHECK_THROWS_AS(p.element(nullptr, 1, -1), out_of_range);
    CHECK(p.materialize(nullptr, 2, 10) == std::vector<Int>{Int(0), Int(2)});
}

TEST_CASE("walk levels evaluate through the closed form", "[params]") {
    theta_ptr s = silver();
    cf_params p = walk_fixture();
    CHECK(p.count(2) == 8);
    for (size_t i = 0; i < walk_elems.size(); ++i)
        CHECK(p.element(s, 2, Int(i)) == walk_elems[i]);
    CHECK(p.max_element(s, 2) == 367);
    CHECK(p.materialize(s, 2, 100) == walk_elems);
    CHECK_THROWS_AS(p.element(s, 2, 8), out_of_range);
    CHECK_THROWS_AS(p.element(s, 2, -1), out_of_range);
    CHECK_THROWS_AS(p.materialize(s, 2, 4), sumset_too_large);
    // gaps take exactly the two values h_prev and 2 h_prev + q_prev
    for (size_t i = 1; i < walk_elems.size(); ++i) {
        Int gap = walk_elems[i] - walk_elems[i - 1];
        CHECK((gap == 29 || gap == 70));
    }
}

TEST_CASE("validation accepts the fixtures", "[params]") {
    CHECK(validate(doubling(4)).ok);
    CHECK(validate(leaky()).ok);
    theta_ptr s = silver();
    validation_report full = validate(walk_fixture(), s);
    CHECK(full.ok);
    CHECK(full.full_scope);
    validation_report blind = validate(walk_fixture());
    CHECK(blind.ok);
    CHECK_FALSE(blind.full_scope);
}

TEST_CASE("validation flags malformed parameter lists", "[params]") {
    cf_params p = doubling(2);

    cf_params bad_base = p;
    bad_base.h[0] = 2;
    CHECK_FALSE(validate(bad_base).ok);

    cf_params bad_c0 = p;
    bad_c0.C[0] = explicit_level{Int(1)};
    CHECK_FALSE(validate(bad_c0).ok);

    cf_params shrink = p;
    shrink.h[2] = 2;
    CHECK_FALSE(validate(shrink).ok);

    cf_params lone = p;
    lone.C[1] = explicit_level{Int(0)};
    CHECK_FALSE(validate(lone).ok);

    cf_params offset = p;
    offset.C[1] = explicit_level{Int(1), Int(2)};
    CHECK_FALSE(validate(offset).ok);

    cf_params tight = p;
    tight.C[2] = explicit_level{Int(0), Int(1)};
    REQUIRE_FALSE(validate(tight).ok);
    CHECK(validate(tight).issues[0].find("gap below previous height") != std::string::npos);

    cf_params overhang = p;
    overhang.C[2] = explicit_level{Int(0), Int(3)};
    REQUIRE_FALSE(validate(overhang).ok);
    CHECK(validate(overhang).issues[0].find("no room") != std::string::npos);

    cf_params mismatch = walk_fixture();
    std::get<walk_level>(mismatch.C[2]).h_prev = 30;
    CHECK_FALSE(validate(mismatch).ok);

    cf_params wrong_sign = walk_fixture();
    std::get<walk_level>(wrong_sign.C[2]).sign = -1;
    CHECK_FALSE(validate(wrong_sign, silver()).ok);
}

TEST_CASE("measure accounting is exact", "[params]") {
    measure_report full = measure_tail(doubling(4));
    CHECK(full.total == 0);
    CHECK(full.all_nonneg);
    for (const Rat& inc : full.increments) CHECK(inc == 0);

    measure_report lost = measure_tail(leaky());
    CHECK(lost.increments == std::vector<Rat>{Rat(1, 3), Rat(1, 3)});
    CHECK(lost.partials == std::vector<Rat>{Rat(1, 3), Rat(2, 3)});
    CHECK(lost.total == Rat(2, 3));
    CHECK(lost.all_nonneg);
}

TEST_CASE("telescoping merges consecutive blocks by sumset", "[params]") {
    cf_params p = doubling(4);
    cf_params q = telescope(p, {2, 4});
    CHECK(q.levels() == 2);
    CHECK(q.h == std::vector<Int>{Int(1), Int(4), Int(16)});
    CHECK(std::get<explicit_level>(q.C[1]) ==
          std::vector<Int>{Int(0), Int(1), Int(2), Int(3)});
    CHECK(std::get<explicit_level>(q.C[2]) ==
          std::vector<Int>{Int(0), Int(4), Int(8), Int(12)});
    CHECK(q.meta.at("telescoped_from_levels") == "4");
    CHECK(validate(q).ok);
    CHECK(measure_tail(q).total == 0);

    cf_params one = telescope(p, {4});
    CHECK(one.levels() == 1);
    CHECK(Int(std::get<explicit_level>(one.C[1]).size()) == 16);

    theta_ptr s = silver();
    cf_params w = telescope(walk_fixture(), {1, 2}, s);
    CHECK(std::get<explicit_level>(w.C[2]) == walk_elems);
}

TEST_CASE("telescoping rejects bad boundary lists", "[params]") {
    cf_params p = doubling(4);
    CHECK_THROWS_AS(telescope(p, {}), block_not_consecutive);
    CHECK_THROWS_AS(telescope(p, {2}), block_not_consecutive);
    CHECK_THROWS_AS(telescope(p, {2, 2, 4}), block_not_consecutive);
    CHECK_THROWS_AS(telescope(p, {3, 2, 4}), block_not_consecutive);
    CHECK_THROWS_AS(telescope(p, {4}, nullptr, Int(8)), sumset_too_large);
}

TEST_CASE("boundedness statistics summarize counts and spacers", "[params]") {
    boundedness_report d = boundedness_stats(doubling(4));
    CHECK(d.counts == std::vector<Int>(4, Int(2)));
    CHECK(d.max_count == 2);
    CHECK(d.max_ratio == 1);
    CHECK(d.note == "max digit count 2, max spacer ratio 1");

    theta_ptr s = silver();
    boundedness_report w = boundedness_stats(walk_fixture(), s);
    CHECK(w.counts == std::vector<Int>{Int(2), Int(8)});
    // widest spacer on the walk level is 2 h_prev + q_prev = 70, giving
    // floor(70 / 29) = 2
    CHECK(w.max_gap_ratio == std::vector<Int>{Int(15), Int(2)});
    CHECK(w.max_count == 8);
    CHECK(w.max_ratio == 15);
}
