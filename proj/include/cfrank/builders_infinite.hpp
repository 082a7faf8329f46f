#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "builders.hpp"

// Infinite-measure tower builders.  The first grows doubling arithmetic
// progressions whose common difference is a rotation power with tiny chord,
// so the tower stays rigid while its mass diverges.  The second grows levels
// of alternating residue classes modulo a per-level prime-like index, spread
// apart fast enough that ordered differences never collide, which kills the
// correlation tail.  Both record every admission inequality for replay.

namespace cfrank {

// Dyadic fiber index: p = 2 + (trailing zero bits of n).  The fibers
// {n : n == 2^(p-2) mod 2^(p-1)} are infinite and partition the positive
// integers, so every residue modulus is revisited forever.
inline size_t partition_index(size_t n) {
    if (n == 0) throw out_of_range("partition_index: n must be >= 1");
    size_t p = 2;
    while ((n & 1) == 0) {
        n >>= 1;
        ++p;
    }
    return p;
}

struct infinite_rigid_result {
    cf_params params;
    certificate_trace trace;
    cf_params two_cut_variant;
};

namespace detail {

// Record an inequality decided by exact rational comparison.  bits = 0 marks
// the certificate as exact; greater means lhs >= rhs (strict when asked).
inline ineq_cert exact_rat_cert(const std::string& name, size_t level, const Rat& lhs,
                                const Rat& rhs, ordering required, bool strict) {
    Rat diff = required == ordering::greater ? lhs - rhs : rhs - lhs;
    if (diff < 0 || (strict && diff == 0))
        throw error(name + " at level " + std::to_string(level) +
                    ": exact inequality fails");
    ineq_cert c;
    c.name = name;
    c.level = level;
    c.lhs = qdesc::constant(lhs);
    c.rhs = qdesc::constant(rhs);
    c.verdict = required;
    if (diff > 0)
        c.margin = dy_from_rat(numerator(diff), denominator(diff), 64, false);
    c.bits = 0;
    c.data["exact"] = "rational";
    return c;
}

// Positive rational lower bound of a certified quantity, refining as needed.
inline Rat positive_lower(const cert_real& x, const char* what) {
    for (long bits = 64; bits <= 4096; bits *= 2) {
        dyi v = x.eval(bits);
        if (v.lo.m > 0) return dy_to_rat(v.lo);
    }
    throw undecidable_comparison(std::string(what) +
                                 ": no positive lower bound within the precision cap");
}

inline Rat midpoint_rat(const dyi& v) {
    return dy_to_rat(dy_shift(dy_add(v.lo, v.hi), -1));
}

inline Int round_rat(const Rat& x) { return floor_rat(x + Rat(1, 2)); }

struct q_pick {
    Int Q;
    std::vector<Int> rejected;
};

// Smallest multiplier denominator of frac(p theta) at or above q_min whose
// step p*Q clears the admission inequality min_F > scale * chord(p*Q).
inline q_pick pick_step_multiple(const theta_ptr& t, refined_cf& rc, const Int& p,
                                 const Int& q_min, const cert_real& min_F,
                                 const Rat& scale, bool vacuous, size_t window,
                                 int rounds, size_t level) {
    if (vacuous) return {q_min, {}};
    q_pick out;
    Int last = 0;
    size_t tried = 0;
    for (size_t k = 2;; ++k) {
        Int Q = rc.conv(k).q;
        if (Q == last) continue;
        last = Q;
        if (Q < q_min) continue;
        cert_real rhs = cr_scale_rat(cr_chord_of_rep(cr_frac_rep(t, p * Q)), scale);
        cmp_result c = cmp_certified(min_F, rhs, rounds);
        if (c.ord == ordering::undecidable)
            throw undecidable_comparison("step multiple at level " + std::to_string(level) +
                                         ": admission for Q=" + Q.str() + " undecidable");
        if (c.ord == ordering::greater) {
            out.Q = Q;
            return out;
        }
        out.rejected.push_back(Q);
        if (++tried >= window)
            throw search_cap_exceeded("step multiple at level " + std::to_string(level) +
                                      ": no admissible Q among " + std::to_string(window) +
                                      " denominators of the step angle");
    }
}

// Q at or above q_min with p*Q+1 admissible: ride the denominator lattice of
// frac(p theta) toward the point where the extra +1 rotation cancels, then
// try a few neighbours; deepen the lattice when the landing misses.
inline q_pick pick_step_offset(const theta_ptr& t, refined_cf& rc, const Int& p,
                               const Int& q_min, const cert_real& min_F,
                               const Rat& scale, bool vacuous, size_t window,
                               int rounds, size_t level) {
    if (vacuous) return {q_min, {}};
    q_pick out;
    Rat thr_lo = positive_lower(cr_scale_rat(min_F, Rat(1) / scale), "step offset threshold");
    Rat arc_half = thr_lo / 16;
    size_t k_base = 2;
    while (Rat(1, rc.conv(k_base + 1).q) >= arc_half) ++k_base;
    std::set<Int> seen;
    for (size_t deepen = 0; deepen < window; ++deepen) {
        size_t k = k_base + deepen;
        Int qk = rc.conv(k).q;
        Int qk1 = rc.conv(k + 1).q;
        // the proposal multiplies the step estimate by up to one period, so
        // its absolute error must stay below the step size squared
        long prop_bits = 2 * static_cast<long>(bit_length(qk1)) + 16;
        Rat rep0 = midpoint_rat(cr_frac_rep(t, p * q_min + 1).eval(prop_bits));
        Rat eta_mid = midpoint_rat(cr_frac_rep(t, p * qk).eval(prop_bits));
        if (eta_mid == 0)
            throw undecidable_comparison("step offset at level " + std::to_string(level) +
                                         ": step estimate vanished");
        Rat x = -rep0 / eta_mid;
        Rat period = abs(Rat(1) / eta_mid);
        Rat xn = x - Rat(floor_rat(x / period)) * period;
        Int j_star = round_rat(xn);
        for (int dj : {0, 1, -1, 2, -2}) {
            Int j = j_star + dj;
            if (j < 0) continue;
            Int Q = q_min + j * qk;
            if (!seen.insert(Q).second) continue;
            cert_real rhs = cr_scale_rat(cr_chord_of_rep(cr_frac_rep(t, p * Q + 1)), scale);
            cmp_result c = cmp_certified(min_F, rhs, rounds);
            if (c.ord == ordering::undecidable)
                throw undecidable_comparison("step offset at level " + std::to_string(level) +
                                             ": admission for Q=" + Q.str() + " undecidable");
            if (c.ord == ordering::greater) {
                out.Q = Q;
                return out;
            }
            out.rejected.push_back(Q);
        }
    }
    throw search_cap_exceeded("step offset at level " + std::to_string(level) +
                              ": no admissible Q after " + std::to_string(window) +
                              " lattice refinements");
}

} // namespace detail

// Doubling-progression tower with diverging mass.  Level n picks the smallest
// multiplier q > 1 from the denominator ladder of frac(h_{n-1} theta) whose
// progression of 2^n digits keeps every pair chord a factor 2^n below the
// smallest chord already separating the previous block, then stacks the
// progression at height 2^n q h_{n-1}.  The two-cut variant lists the same
// tower as consecutive two-digit levels, one doubling cut per sublevel.
inline infinite_rigid_result build_infinite_rigid(const theta_ptr& t,
                                                  const build_config& cfg) {
    detail::check_config(cfg);
    int rounds = cfg.precision_rounds;
    build_result out;
    detail::start_trace(out, t, "thmB", cfg);

    std::vector<Int> q_seq;
    for (size_t n = 1; n <= cfg.levels; ++n) {
        Int h_prev = out.params.h.back();
        Int count = pow2(static_cast<long>(n));
        refined_cf rc(frac_enclosure(t, h_prev));

        cert_real min_F;
        if (n >= 2) min_F = cr_chord_min_F(t, out.params, n - 1);

        Int accepted = 0;
        std::vector<Int> rejected;
        Int last = 0;
        size_t tried = 0;
        for (size_t k = 2; accepted == 0; ++k) {
            Int q = rc.conv(k).q;
            if (q == last) continue;
            last = q;
            if (q < 2) continue;
            if (n == 1) {
                accepted = q;
                break;
            }
            std::vector<cert_real> chords;
            for (Int j = 1; j < count; ++j)
                chords.push_back(cr_chord_of_rep(cr_frac_rep(t, j * q * h_prev)));
            cert_real rhs = cr_scale_rat(cr_max(std::move(chords)), Rat(count));
            cmp_result c = cmp_certified(min_F, rhs, rounds);
            if (c.ord == ordering::undecidable)
                throw undecidable_comparison("progression step at level " + std::to_string(n) +
                                             ": admission for q=" + q.str() + " undecidable");
            if (c.ord == ordering::greater) {
                accepted = q;
                break;
            }
            rejected.push_back(q);
            if (++tried >= cfg.m_window)
                throw search_cap_exceeded("progression step at level " + std::to_string(n) +
                                          ": no admissible q among " +
                                          std::to_string(cfg.m_window) +
                                          " denominators of the block angle");
        }

        Int gap = accepted * h_prev;
        explicit_level C;
        for (Int j = 0; j < count; ++j) C.push_back(j * gap);
        Int h_n = count * gap;
        detail::guard_digits(h_n, cfg, n);
        out.params.C.push_back(std::move(C));
        out.params.h.push_back(h_n);
        q_seq.push_back(accepted);

        level_record rec;
        rec.level = n;
        rec.phase = "proper";
        rec.data["q"] = accepted.str();
        rec.data["gap"] = gap.str();
        rec.data["h"] = h_n.str();
        rec.data["count"] = count.str();
        rec.data["rejected"] = detail::join_ints(rejected);
        if (n == 1) {
            rec.data["note"] = "selection vacuous at the first level";
        } else {
            qdesc lq = qdesc::level(qdesc::kind::chord_min_F, n - 1);
            qdesc rq = qdesc::level(qdesc::kind::chord_max_pairs, n);
            rq.scale = Rat(count);
            ineq_cert c = decide_cert("first/k<=n-1", n,
                                      eval_qdesc(lq, t, out.params, out.trace.majorant), lq,
                                      eval_qdesc(rq, t, out.params, out.trace.majorant), rq,
                                      ordering::greater, rounds);
            c.data["q"] = accepted.str();
            c.data["rejected"] = detail::join_ints(rejected);
            rec.certs.push_back(std::move(c));
        }
        rec.certs.push_back(detail::exact_rat_cert("(mass)", n, Rat(accepted - 1, accepted),
                                                   Rat(1, 2), ordering::greater, false));
        out.trace.levels.push_back(std::move(rec));
    }
    out.params.meta["q_seq"] = detail::join_ints(q_seq);
    detail::seal(out, t, tail_majorant::kind::geometric_halving, 0);

    infinite_rigid_result res;
    res.params = std::move(out.params);
    res.trace = std::move(out.trace);

    cf_params v;
    v.h.push_back(1);
    v.C.push_back(explicit_level{Int(0)});
    v.meta["builder"] = "thmB";
    v.meta["variant"] = "two_cut";
    std::vector<size_t> boundaries;
    for (size_t n = 1; n <= cfg.levels; ++n) {
        Int gap = q_seq[n - 1] * res.params.h[n - 1];
        for (size_t k = 0; k < n; ++k) {
            Int cut = pow2(static_cast<long>(k)) * gap;
            v.C.push_back(explicit_level{Int(0), cut});
            v.h.push_back(cut * 2);
        }
        boundaries.push_back(v.levels());
    }
    {
        std::string bs;
        for (size_t i = 0; i < boundaries.size(); ++i) {
            if (i) bs += ",";
            bs += std::to_string(boundaries[i]);
        }
        v.meta["block_boundaries"] = bs;
    }
    validation_report rep = validate(v, t);
    if (!rep.ok) {
        std::string msg = "two-cut variant failed validation:";
        for (const auto& issue : rep.issues) msg += " " + issue;
        throw error(msg);
    }
    res.two_cut_variant = std::move(v);
    return res;
}

// Alternating-residue tower with diverging mass and vanishing correlations.
// Level L fixes p = partition_index(L) and grows digits a(1) < ... < a(L),
// each more than three times the reach of everything below it, alternating
// between multiples of p and numbers congruent to 1 mod p; each digit's chord
// stays a factor 2^(L+1) below the smallest chord separating the previous
// block.  The height is the minimal one that fits two copies of the previous
// block around the largest digit.
inline build_result build_infinite_zerotype(const theta_ptr& t, const build_config& cfg) {
    detail::check_config(cfg);
    int rounds = cfg.precision_rounds;
    build_result out;
    detail::start_trace(out, t, "thmC", cfg);

    for (size_t L = 1; L <= cfg.levels; ++L) {
        Int h_prev = out.params.h.back();
        Int p(partition_index(L));
        bool vacuous = L == 1;
        Rat scale(pow2(static_cast<long>(L + 1)));
        cert_real min_F;
        if (!vacuous) min_F = cr_chord_min_F(t, out.params, L - 1);
        refined_cf rc(frac_enclosure(t, p));

        level_record rec;
        rec.level = L;
        rec.phase = "proper";
        rec.data["p"] = p.str();
        if (vacuous) rec.data["note"] = "chord admission vacuous at the first level";

        std::vector<Int> a{Int(0)};
        for (size_t j = 1; j <= L; ++j) {
            Int bound = 3 * (h_prev + a.back());
            bool odd = j % 2 == 1;
            Int q_min = odd ? ceil_div(bound, p) : floor_div(bound, p) + 1;
            detail::q_pick pick =
                odd ? detail::pick_step_offset(t, rc, p, q_min, min_F, scale, vacuous,
                                               cfg.m_window, rounds, L)
                    : detail::pick_step_multiple(t, rc, p, q_min, min_F, scale, vacuous,
                                                 cfg.m_window, rounds, L);
            Int value = odd ? Int(p * pick.Q + 1) : Int(p * pick.Q);
            if (value % p != (odd ? 1 : 0))
                throw error("residue drift in digit construction");
            ineq_cert g = detail::exact_rat_cert("(growth)", L, Rat(value), Rat(bound),
                                                 ordering::greater, true);
            g.data["j"] = std::to_string(j);
            g.data["Q"] = pick.Q.str();
            g.data["Q_min"] = q_min.str();
            g.data["residue"] = odd ? "1" : "0";
            rec.certs.push_back(std::move(g));
            if (!vacuous) {
                qdesc lq = qdesc::level(qdesc::kind::chord_min_F, L - 1);
                qdesc rq = qdesc::power(qdesc::kind::chord, value);
                rq.scale = scale;
                ineq_cert c = decide_cert("(v)/k<=L-1", L,
                                          eval_qdesc(lq, t, out.params, out.trace.majorant),
                                          lq,
                                          eval_qdesc(rq, t, out.params, out.trace.majorant),
                                          rq, ordering::greater, rounds);
                c.data["j"] = std::to_string(j);
                c.data["rejected"] = detail::join_ints(pick.rejected);
                rec.certs.push_back(std::move(c));
            }
            a.push_back(value);
        }

        Int max_c = a.back();
        Int h_n = 2 * h_prev + max_c;
        detail::guard_digits(h_n, cfg, L);
        size_t cnt = a.size();
        out.params.C.push_back(explicit_level(a.begin(), a.end()));
        out.params.h.push_back(h_n);

        rec.data["elements"] = detail::join_ints(a);
        rec.data["h"] = h_n.str();
        rec.data["count"] = std::to_string(cnt);

        rec.certs.push_back(detail::exact_rat_cert("(i)", L, Rat(Int(cnt)), Rat(1),
                                                   ordering::greater, true));
        rec.certs.push_back(detail::exact_rat_cert("(ii)", L, Rat(h_n),
                                                   Rat(2 * (h_prev - 1) + max_c),
                                                   ordering::greater, true));
        {
            std::vector<Int> diffs;
            for (size_t i = 0; i < a.size(); ++i)
                for (size_t j = 0; j < a.size(); ++j)
                    if (i != j) diffs.push_back(a[i] - a[j]);
            std::set<Int> uniq(diffs.begin(), diffs.end());
            if (uniq.size() != diffs.size())
                throw error("(iii) at level " + std::to_string(L) +
                            ": repeated ordered difference");
            Int sep = 0;
            bool first = true;
            std::vector<Int> ds(uniq.begin(), uniq.end());
            ds.push_back(Int(0));
            std::sort(ds.begin(), ds.end());
            for (size_t i = 1; i < ds.size(); ++i) {
                Int d = ds[i] - ds[i - 1];
                if (first || d < sep) sep = d;
                first = false;
            }
            ineq_cert c = detail::exact_rat_cert("(iii)", L, Rat(sep), Rat(2 * h_prev - 1),
                                                 ordering::greater, false);
            c.data["min_separation"] = sep.str();
            rec.certs.push_back(std::move(c));
        }
        rec.certs.push_back(detail::exact_rat_cert("(iv)", L, Rat(Int(cnt)),
                                                   Rat(Int(out.params.count(L - 1))),
                                                   ordering::greater, true));
        if (!vacuous) {
            qdesc lq = qdesc::level(qdesc::kind::chord_min_F, L - 1);
            qdesc rq = qdesc::level(qdesc::kind::chord_max_level, L);
            rq.scale = scale;
            ineq_cert c = decide_cert("(v)/k<=L-1", L,
                                      eval_qdesc(lq, t, out.params, out.trace.majorant), lq,
                                      eval_qdesc(rq, t, out.params, out.trace.majorant), rq,
                                      ordering::greater, rounds);
            c.data["form"] = "max";
            rec.certs.push_back(std::move(c));
        }
        {
            size_t even_cnt = 0, odd_cnt = 0;
            for (size_t j = 0; j < a.size(); ++j) (j % 2 == 0 ? even_cnt : odd_cnt)++;
            ineq_cert c = detail::exact_rat_cert(
                "(vi)", L, Rat(Int(std::min(even_cnt, odd_cnt))),
                Rat(3 * Int(cnt), 10), ordering::greater, true);
            c.data["multiples"] = std::to_string(even_cnt);
            c.data["offset_by_one"] = std::to_string(odd_cnt);
            rec.certs.push_back(std::move(c));
        }
        rec.certs.push_back(detail::exact_rat_cert(
            "(mass)", L, Rat(h_n - Int(cnt) * h_prev, h_n), Rat(1, 2),
            ordering::greater, false));
        out.trace.levels.push_back(std::move(rec));
    }
    detail::seal(out, t, tail_majorant::kind::zerotype_halving, 0);
    return out;
}

} // namespace cfrank
