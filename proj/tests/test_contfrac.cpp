#include <catch2/catch_amalgamated.hpp>

#include "cfrank/contfrac.hpp"

using namespace cfrank;

namespace {

theta_ptr golden() { return theta::from_periodic({}, {Int(1)}); }
theta_ptr silver() { return theta::from_surd(-1, 2, 1); }

// High-precision rational reference with certified error bound, for checking
// enclosures computed another way.
struct rat_ref {
    Rat value;
    Rat err;
};

rat_ref reference(const theta_ptr& t, size_t depth) {
    auto [lo, hi] = t->bracket(depth);
    return {(lo + hi) / 2, (hi - lo) / 2};
}

Rat dist_to_int(const Rat& x) {
    Int n = floor_rat(x + Rat(1, 2));
    Rat d = x - Rat(n);
    return d < 0 ? -d : d;
}

}  // namespace

TEST_CASE("convergents follow the standard recurrence", "[contfrac]") {
    theta_ptr g = golden();
    CHECK(g->conv(0).p == 1);
    CHECK(g->conv(0).q == 0);
    CHECK(g->conv(1).p == 0);
    CHECK(g->conv(1).q == 1);
    for (size_t k = 2; k <= 20; ++k) {
        const convergent& c = g->conv(k);
        CHECK(c.p == g->coeff(k - 1) * g->conv(k - 1).p + g->conv(k - 2).p);
        CHECK(c.q == g->coeff(k - 1) * g->conv(k - 1).q + g->conv(k - 2).q);
    }
    // golden denominators are the Fibonacci numbers
    std::vector<long> fib{0, 1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89};
    for (size_t k = 1; k < fib.size(); ++k) CHECK(g->conv(k).q == fib[k]);
}

TEST_CASE("surd source expands sqrt(2)-1 as all twos", "[contfrac]") {
    theta_ptr s = silver();
    CHECK(s->coeff(0) == 0);
    for (size_t k = 1; k <= 40; ++k) CHECK(s->coeff(k) == 2);
    std::vector<long> pell{0, 1, 2, 5, 12, 29, 70, 169, 408, 985, 2378};
    for (size_t k = 1; k < pell.size(); ++k) CHECK(s->conv(k).q == pell[k]);
}

TEST_CASE("coefficient list and surd agree on a shared prefix", "[contfrac]") {
    theta_ptr s = silver();
    theta_ptr c = theta::from_coeffs({0, 2, 2, 2, 2, 2, 2, 2, 2});
    for (size_t k = 1; k <= 8; ++k) {
        CHECK(s->conv(k).p == c->conv(k).p);
        CHECK(s->conv(k).q == c->conv(k).q);
    }
    CHECK(c->has_coeff(8));
    CHECK_FALSE(c->has_coeff(9));
    CHECK_THROWS_AS(c->coeff(9), coefficient_budget_exhausted);
}

TEST_CASE("eta enclosures respect the denominator sandwich", "[contfrac]") {
    for (theta_ptr t : {golden(), silver(), theta::from_periodic({Int(3)}, {Int(1), Int(2)})}) {
        for (size_t k = 1; k <= 30; ++k) {
            auto [slo, shi] = t->eta_abs_sandwich(k);
            CHECK(slo == Rat(1, t->conv(k).q + t->conv(k + 1).q));
            CHECK(shi == Rat(1, t->conv(k + 1).q));
            Rat eps(1, t->conv(k + 1).q * 1000);
            auto [lo, hi] = t->eta(k, eps);
            CHECK(hi - lo <= eps);
            Rat alo = t->eta_sign(k) > 0 ? lo : -hi;
            Rat ahi = t->eta_sign(k) > 0 ? hi : -lo;
            CHECK(alo > 0);
            CHECK(alo >= slo - eps);
            CHECK(ahi <= shi);
        }
    }
}

TEST_CASE("eta signs alternate starting negative", "[contfrac]") {
    theta_ptr g = golden();
    for (size_t k = 0; k <= 12; ++k) CHECK(g->eta_sign(k) == (k % 2 == 1 ? 1 : -1));
    Rat eps(1, 1000000);
    for (size_t k = 1; k <= 10; ++k) {
        auto [lo, hi] = g->eta(k, eps);
        if (g->eta_sign(k) > 0)
            CHECK(lo > 0);
        else
            CHECK(hi < 0);
    }
}

TEST_CASE("convergents are best approximations on a window", "[contfrac]") {
    for (theta_ptr t : {golden(), silver()}) {
        rat_ref ref = reference(t, 40);
        for (size_t k = 2; t->conv(k + 1).q <= 250; ++k) {
            const Int& qk = t->conv(k).q;
            Rat best = dist_to_int(Rat(qk) * ref.value);
            for (Int q = 1; q < t->conv(k + 1).q; ++q) {
                if (q == qk) continue;
                Rat d = dist_to_int(Rat(q) * ref.value);
                // reference error is far below the gap between competitors
                CHECK(d - Rat(q) * ref.err > best + Rat(qk) * ref.err);
            }
        }
    }
}

TEST_CASE("bracket nests and controls width", "[contfrac]") {
    theta_ptr s = silver();
    auto [lo1, hi1] = s->bracket(3);
    auto [lo2, hi2] = s->bracket(7);
    CHECK(lo1 < lo2);
    CHECK(hi2 < hi1);
    CHECK(hi2 - lo2 == Rat(1, s->conv(7).q * s->conv(8).q));
    size_t d = s->depth_for_width(Rat(1, 100000));
    CHECK(Rat(1, s->conv(d).q * s->conv(d + 1).q) <= Rat(1, 100000));
    CHECK(Rat(1, s->conv(d - 1).q * s->conv(d).q) > Rat(1, 100000));
}

TEST_CASE("largest denominator index honors the bound", "[contfrac]") {
    theta_ptr g = golden();
    CHECK(g->largest_q_index_le(55) == 10);
    CHECK(g->largest_q_index_le(54) == 9);
    CHECK(g->largest_q_index_le(2) == 3);
    // ties between q_1 = q_2 = 1 resolve to the larger index
    CHECK(g->largest_q_index_le(1) == 2);
    CHECK_THROWS_AS(g->largest_q_index_le(0), out_of_range);
}

TEST_CASE("decimal source certifies only what the guard supports", "[contfrac]") {
    // sqrt(2)-1 to 30 places, enclosure certified to 25
    theta_ptr d = theta::from_decimal("0.414213562373095048801688724209", 25);
    for (size_t k = 1; k <= 10; ++k) CHECK(d->coeff(k) == 2);
    size_t certified = 0;
    while (d->has_coeff(certified)) ++certified;
    CHECK(certified > 15);
    CHECK(certified < 45);
    CHECK_THROWS_AS(d->coeff(certified), coefficient_budget_exhausted);
}

TEST_CASE("sources reject values outside the open unit interval", "[contfrac]") {
    CHECK_THROWS_AS(theta::from_coeffs({Int(1), Int(2)}), out_of_range);
    CHECK_THROWS_AS(theta::from_coeffs({Int(0)}), out_of_range);
    CHECK_THROWS_AS(theta::from_coeffs({Int(0), Int(0)}), out_of_range);
    CHECK_THROWS_AS(theta::from_periodic({}, {}), out_of_range);
    CHECK_THROWS_AS(theta::from_surd(-1, 4, 1, 100), not_irrational);
    CHECK_THROWS_AS(theta::from_surd(-1, 2, 0, 100), not_irrational);
    CHECK_THROWS_AS(theta::from_surd(1, 2, 1, 100), out_of_range);
    CHECK_THROWS_AS(theta::from_decimal("1.5", 4), out_of_range);
}

TEST_CASE("describe names the source", "[contfrac]") {
    CHECK(golden()->describe() == "periodic(pre=[],period=[1])");
    CHECK(silver()->describe() == "surd((-1+sqrt(2))/1)");
    CHECK(theta::from_coeffs({0, 1, 2})->describe() == "cf[0,1,2]");
    CHECK(theta::from_decimal("0.25001", 2)->describe() == "decimal(0.25001,guard=2)");
}
