#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "quantities.hpp"

// Finite-level model of the constructed systems: exact set arithmetic on one
// tower (correlations are rational numbers, not floats), truncated
// eigenfunction evaluation, and seeded sampling with recorded seeds.

namespace cfrank {

struct tower {
    size_t N = 0;
    Int h_N = 1;
    Rat rung_weight = 1;  // mass of a single level-N rung
};

inline tower make_tower(const cf_params& p, size_t N) {
    if (N > p.levels()) throw out_of_range("tower: level beyond the built window");
    tower tw;
    tw.N = N;
    tw.h_N = p.h[N];
    Int prod = 1;
    for (size_t k = 1; k <= N; ++k) prod *= p.count(k);
    tw.rung_weight = Rat(1, prod);
    return tw;
}

struct cylinder {
    size_t level = 0;
    Int base = 0;  // 0 <= base < h_level
};

struct point_sample {
    size_t n = 0;            // base level
    Int f = 0;               // base position in F_n
    std::vector<Int> digits;  // one digit per level n+1 .. K
};

// ---------------------------------------------------------------------------
// positions and correlations

inline std::vector<Int> cylinder_positions(const theta_ptr& t, const cf_params& p,
                                           const cylinder& cyl, size_t N,
                                           const Int& cap = Int(1) << 20) {
    if (cyl.level > N || N > p.levels())
        throw out_of_range("cylinder positions: level range outside the built window");
    if (cyl.base < 0 || cyl.base >= p.h[cyl.level])
        throw out_of_range("cylinder positions: base outside the level");
    std::vector<Int> sums{cyl.base};
    Int total = 1;
    for (size_t k = cyl.level + 1; k <= N; ++k) {
        std::vector<Int> ck = p.materialize(t, k, cap);
        total *= Int(ck.size());
        if (total > cap)
            throw sumset_too_large("cylinder positions: digit-sum set exceeds the cap at level " +
                                   std::to_string(k));
        std::vector<Int> next;
        next.reserve(sums.size() * ck.size());
        for (const Int& c : ck)
            for (const Int& s : sums) next.push_back(s + c);
        sums = std::move(next);
    }
    std::sort(sums.begin(), sums.end());
    return sums;
}

struct correlation_result {
    Rat value = 0;        // rung mass of (positions(A) + m) meeting positions(B)
    Rat error_bound = 0;  // mass shifted past the tower top
};

namespace detail {

inline correlation_result correlate_positions(const std::vector<Int>& sa,
                                              const std::vector<Int>& sb, const Int& m,
                                              const tower& tw) {
    size_t hits = 0;
    size_t spill = 0;
    size_t j = 0;
    for (const Int& s : sa) {
        Int u = s + m;
        if (u >= tw.h_N) {
            ++spill;
            continue;
        }
        while (j < sb.size() && sb[j] < u) ++j;
        if (j < sb.size() && sb[j] == u) ++hits;
    }
    correlation_result out;
    out.value = tw.rung_weight * Rat(Int(hits));
    out.error_bound = tw.rung_weight * Rat(Int(spill));
    return out;
}

}  // namespace detail

inline correlation_result correlation(const theta_ptr& t, const cf_params& p,
                                      const cylinder& A, const cylinder& B, const Int& m,
                                      size_t N, const Int& cap = Int(1) << 20) {
    if (m < 0) throw out_of_range("correlation: negative time");
    tower tw = make_tower(p, N);
    if (m >= tw.h_N) throw out_of_range("correlation: time beyond the tower height");
    std::vector<Int> sa = cylinder_positions(t, p, A, N, cap);
    std::vector<Int> sb = (A.level == B.level && A.base == B.base)
                              ? sa
                              : cylinder_positions(t, p, B, N, cap);
    return detail::correlate_positions(sa, sb, m, tw);
}

struct profile_row {
    Int m = 0;
    Rat value = 0;
    Rat error_bound = 0;
};

inline std::vector<profile_row> correlation_profile(const theta_ptr& t, const cf_params& p,
                                                    const cylinder& A,
                                                    const std::vector<Int>& times, size_t N,
                                                    const Int& cap = Int(1) << 20) {
    tower tw = make_tower(p, N);
    std::vector<profile_row> out;
    if (times.empty()) return out;
    std::vector<Int> sa = cylinder_positions(t, p, A, N, cap);
    for (const Int& m : times) {
        if (m < 0 || m >= tw.h_N)
            throw out_of_range("correlation profile: time outside the tower");
        correlation_result c = detail::correlate_positions(sa, sa, m, tw);
        out.push_back({m, c.value, c.error_bound});
    }
    return out;
}

// Sampled times inside [h_k, h_{k+1} - h_k]: a doubling grid from the lower
// edge, the top edge, and the structured candidates where mass can return,
// namely differences of level-(k+1) digits.  Small windows get a full sweep.
inline std::vector<Int> decay_times(const theta_ptr& t, const cf_params& p, size_t k,
                                    const Int& cap = Int(1) << 20,
                                    const Int& sweep_cap = 4096) {
    if (k == 0 || k + 1 > p.levels())
        throw out_of_range("decay times: window needs levels k and k+1");
    Int lo = p.h[k];
    Int hi = p.h[k + 1] - p.h[k];
    if (hi < lo) return {};
    std::vector<Int> ms;
    if (hi - lo < sweep_cap) {
        for (Int m = lo; m <= hi; ++m) ms.push_back(m);
        return ms;
    }
    for (Int m = lo; m < hi; m <<= 1) ms.push_back(m);
    ms.push_back(hi);
    std::vector<Int> ck = p.materialize(t, k + 1, cap);
    for (const Int& a : ck)
        for (const Int& b : ck) {
            Int d = a - b;
            if (d >= lo && d <= hi) ms.push_back(d);
        }
    std::sort(ms.begin(), ms.end());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    return ms;
}

struct decay_report {
    std::vector<size_t> windows;   // k values
    std::vector<Rat> maxima;       // max correlation over sampled times, per window
    std::vector<Rat> max_errors;   // spill bound at the maximizing time
    Rat base_mass = 0;             // mass of the probed cylinder
    std::vector<profile_row> rows;
};

inline decay_report decay_profile(const theta_ptr& t, const cf_params& p, size_t k_lo,
                                  size_t k_hi, size_t N, const Int& cap = Int(1) << 20,
                                  const Int& sweep_cap = 4096) {
    if (k_lo == 0 || k_lo > k_hi || k_hi + 1 > p.levels() || N > p.levels())
        throw out_of_range("decay profile: bad window range");
    decay_report out;
    tower tw = make_tower(p, N);
    cylinder A{1, Int(0)};
    std::vector<Int> sa = cylinder_positions(t, p, A, N, cap);
    out.base_mass = tw.rung_weight * Rat(Int(sa.size()));
    for (size_t k = k_lo; k <= k_hi; ++k) {
        Rat best = 0;
        Rat best_err = 0;
        for (const Int& m : decay_times(t, p, k, cap, sweep_cap)) {
            if (m >= tw.h_N) continue;
            correlation_result c = detail::correlate_positions(sa, sa, m, tw);
            out.rows.push_back({m, c.value, c.error_bound});
            if (c.value > best) {
                best = c.value;
                best_err = c.error_bound;
            }
        }
        out.windows.push_back(k);
        out.maxima.push_back(best);
        out.max_errors.push_back(best_err);
    }
    return out;
}

// ---------------------------------------------------------------------------
// truncated eigenfunction evaluation

namespace detail {

// Angle representative of the truncated value: base plus digit contributions,
// each an exactly-centered fractional part.
inline cert_real sample_rep(const theta_ptr& t, const point_sample& x) {
    std::vector<cert_real> parts;
    if (x.f != 0) parts.push_back(cr_frac_rep(t, x.f));
    for (const Int& c : x.digits)
        if (c != 0) parts.push_back(cr_frac_rep(t, c));
    if (parts.empty()) return cr_const_rat(Rat(0));
    return cr_sum(std::move(parts));
}

inline void check_sample(const theta_ptr& t, const cf_params& p, const point_sample& x,
                         size_t K, const Int& cap) {
    if (x.n > p.levels() || K > p.levels() || x.n > K)
        throw out_of_range("point sample: levels outside the built window");
    if (x.digits.size() != K - x.n)
        throw out_of_range("point sample: digit list does not reach the truncation level");
    if (x.f < 0 || x.f >= p.h[x.n])
        throw out_of_range("point sample: base outside its level");
    for (size_t i = 0; i < x.digits.size(); ++i) {
        size_t k = x.n + 1 + i;
        const level_set& s = p.C.at(k);
        if (is_walk(s)) continue;  // sampler-produced digits; walks stay unchecked
        std::vector<Int> ck = p.materialize(t, k, cap);
        if (std::find(ck.begin(), ck.end(), x.digits[i]) == ck.end())
            throw out_of_range("point sample: digit not in its level at level " +
                               std::to_string(k));
    }
}

}  // namespace detail

struct eigen_value {
    certified_angle angle;  // angle of the truncated value, in turns
    dyadic tail_hi;         // chord bound on everything beyond the truncation
};

inline eigen_value eigen_eval(const theta_ptr& t, const cf_params& p, const point_sample& x,
                              size_t K, const tail_majorant& mj, long bits = 128,
                              const Int& cap = Int(1) << 20) {
    detail::check_sample(t, p, x, K, cap);
    eigen_value out;
    out.angle = freeze(detail::sample_rep(t, x), bits);
    out.tail_hi = cr_tail_bound(t, p, mj, K, false).eval(bits).hi;
    return out;
}

// Uniformly drawn digits per level up to K, base level 0.  The generator is
// the caller's; identical seeds give identical samples.
inline point_sample sample_point(const theta_ptr& t, const cf_params& p, size_t K,
                                 std::mt19937_64& rng) {
    if (K > p.levels()) throw out_of_range("sample: truncation beyond the built window");
    point_sample x;
    x.n = 0;
    x.f = 0;
    for (size_t k = 1; k <= K; ++k) {
        Int cnt = p.count(k);
        Int idx = Int(rng()) % cnt;
        x.digits.push_back(p.element(t, k, idx));
    }
    return x;
}

struct defect_report {
    dyadic max_defect;   // largest certified one-step mismatch over the samples
    Rat bound = 0;       // twice the tail bound plus evaluation slack
    size_t samples = 0;
    size_t skipped = 0;  // samples at the tower top, no in-tower image
    uint64_t seed = 0;
};

inline defect_report eigen_defect(const theta_ptr& t, const cf_params& p, size_t K,
                                  size_t sample_count, uint64_t seed,
                                  const tail_majorant& mj, long bits = 96) {
    if (K == 0 || K > p.levels())
        throw out_of_range("defect: truncation level outside the built window");
    defect_report out;
    out.seed = seed;
    std::mt19937_64 rng(seed);
    dyadic tail = cr_tail_bound(t, p, mj, K, false).eval(bits).hi;
    out.bound = 2 * dy_to_rat(tail) + Rat(1, pow2(bits - 4));
    cert_real step = cr_frac_rep(t, 1);
    for (size_t i = 0; i < sample_count; ++i) {
        point_sample x = sample_point(t, p, K, rng);
        Int s = x.f;
        for (const Int& c : x.digits) s += c;
        if (s + 1 >= p.h[K]) {
            ++out.skipped;
            continue;
        }
        // one route multiplies the truncated value by the rotation step, the
        // other evaluates the shifted position directly; they agree up to a
        // whole turn, so the chord of the gap is the certified defect
        cert_real via_step = cr_add(detail::sample_rep(t, x), step);
        cert_real direct = cr_frac_rep(t, s + 1);
        cert_real d = cr_sub(via_step, direct);
        dyi dv = d.eval(bits);
        Rat mid = dy_to_rat(dy_shift(dy_add(dv.lo, dv.hi), -1));
        Rat turns = Rat(floor_rat(mid + Rat(1, 2)));
        dyadic defect = cr_chord_of_rep(cr_sub(d, cr_const_rat(turns))).eval(bits).hi;
        if (out.samples == 0 || dy_to_rat(defect) > dy_to_rat(out.max_defect))
            out.max_defect = defect;
        ++out.samples;
    }
    return out;
}

struct gap_report {
    bool vacuous = false;
    Int witness_d = 0;    // base difference with the smallest separation
    dyadic gap_lo;        // certified lower bound on the smallest pair chord
    dyadic tail_hi;       // chord tail beyond the truncation level
    bool certified = false;  // gap exceeds twice the tail
    long bits = 0;
};

inline gap_report injectivity_gap(const theta_ptr& t, const cf_params& p, size_t n, size_t K,
                                  const tail_majorant& mj, long bits = 128) {
    if (n > p.levels() || K > p.levels())
        throw out_of_range("injectivity gap: level outside the built window");
    gap_report out;
    out.bits = bits;
    if (n == 0 || p.h[n] < 2) {
        out.vacuous = true;
        out.certified = true;
        return out;
    }
    delta_record d = delta_min(t, p.h[n] - 1);
    out.witness_d = d.j;
    out.gap_lo = d.delta.eval(bits).lo;
    out.tail_hi = cr_tail_bound(t, p, mj, K, false).eval(bits).hi;
    out.certified = dy_to_rat(out.gap_lo) > 2 * dy_to_rat(out.tail_hi);
    return out;
}

}  // namespace cfrank
