#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "quantities.hpp"

// Finite-measure tower builders driven by a chord net.  Each new digit is the
// previous one shifted by the current height plus a small multiple of the best
// rotation power below the level bound, picked so the digit's own chord stays
// under the level target.  Every inequality used on the way is decided in
// certified arithmetic and recorded for replay against the finished tower.

namespace cfrank {

struct build_config {
    size_t levels = 6;              // proper levels to build; fillers come extra
    size_t digit_cap = 4096;        // decimal digits allowed in a height
    Int search_cap = Int(1) << 20;  // abort threshold for scans and counts
    size_t m_window = 64;           // index window for convergent searches
    Int materialize_cap = Int(1) << 20;
    size_t tail_extension = 3;      // window indices certified past the top level
    int precision_rounds = -1;      // -1 defers to the environment cap
};

struct build_result {
    cf_params params;
    certificate_trace trace;
};

namespace detail {

inline void check_config(const build_config& cfg) {
    if (cfg.digit_cap < 64) throw out_of_range("build_config: digit_cap must be >= 64");
}

inline void guard_digits(const Int& h, const build_config& cfg, size_t level) {
    size_t digits = h.str().size();
    if (digits > cfg.digit_cap)
        throw digit_cap_exceeded("height at level " + std::to_string(level) + " needs " +
                                 std::to_string(digits) + " digits, cap " +
                                 std::to_string(cfg.digit_cap));
}

inline std::map<std::string, std::string> config_map(const build_config& cfg) {
    return {{"levels", std::to_string(cfg.levels)},
            {"digit_cap", std::to_string(cfg.digit_cap)},
            {"search_cap", cfg.search_cap.str()},
            {"m_window", std::to_string(cfg.m_window)},
            {"materialize_cap", cfg.materialize_cap.str()},
            {"tail_extension", std::to_string(cfg.tail_extension)},
            {"precision_rounds", std::to_string(cfg.precision_rounds)}};
}

inline void start_trace(build_result& out, const theta_ptr& t, const char* builder,
                        const build_config& cfg) {
    out.trace.builder = builder;
    out.trace.theta_desc = t->describe();
    out.trace.config = config_map(cfg);
    out.params.meta["builder"] = builder;
    out.params.h.push_back(1);
    out.params.C.push_back(explicit_level{Int(0)});
}

inline void push_filler(build_result& out, const build_config& cfg, const std::string& why) {
    Int h_prev = out.params.h.back();
    Int h = h_prev * 2;
    guard_digits(h, cfg, out.params.levels() + 1);
    out.params.C.push_back(explicit_level{Int(0), h_prev});
    out.params.h.push_back(h);
    level_record rec;
    rec.level = out.params.levels();
    rec.phase = "filler";
    rec.data["h"] = h.str();
    rec.data["why"] = why;
    out.trace.levels.push_back(std::move(rec));
}

inline void seal(build_result& out, const theta_ptr& t, tail_majorant::kind k,
                 size_t fillers) {
    out.trace.majorant.k = k;
    out.trace.majorant.L = out.params.levels();
    out.trace.majorant.offset = fillers;
    out.params.meta["fillers"] = std::to_string(fillers);
    validation_report rep = validate(out.params, t);
    if (!rep.ok) {
        std::string msg = "built parameters failed validation:";
        for (const auto& issue : rep.issues) msg += " " + issue;
        throw error(msg);
    }
}

// Comparisons of the shape h * delta vs n^4 share one recorded template.
inline ineq_cert threshold_cert(const std::string& name, size_t level, const Int& h,
                                const delta_record& d, const Int& rhs_pow,
                                ordering required, int rounds) {
    qdesc lq = qdesc::power(qdesc::kind::chord, d.j);
    lq.scale = Rat(h);
    qdesc rq = qdesc::constant(Rat(rhs_pow));
    ineq_cert c = decide_cert(name, level, cr_scale_rat(d.delta, Rat(h)), lq,
                              cr_const_rat(Rat(rhs_pow)), rq, required, rounds);
    c.data["delta_power"] = d.j.str();
    c.data["delta_index"] = std::to_string(d.k);
    c.data["delta_bound"] = d.bound.str();
    return c;
}

struct net_step {
    Int a;
    Int k;
    ineq_cert cert;
};

// Smallest k in [0, count] whose shifted digit has chord below pi * eps_rat.
// The net steps by the chord of the minimizing power, so one sweep of the
// circle is guaranteed to land inside the target arc.
inline net_step net_extend(const theta_ptr& t, const Int& a_prev, const Int& h_prev,
                           const Int& j, const Int& count, size_t level,
                           const Rat& eps_rat, int rounds) {
    Int base = a_prev + h_prev;
    cert_real eps = cr_pi_mul_rat(eps_rat);
    for (Int k = 0; k <= count; ++k) {
        Int cand = base + k * j;
        cmp_result c = cmp_certified(cr_chord_of_rep(cr_frac_rep(t, cand)), eps, rounds);
        if (c.ord == ordering::undecidable)
            throw undecidable_comparison("net scan: candidate at offset " + k.str() +
                                         " sits on the target boundary");
        if (c.ord != ordering::less) continue;
        net_step s;
        s.a = cand;
        s.k = k;
        s.cert.name = "(4.3)";
        s.cert.level = level;
        s.cert.lhs = qdesc::power(qdesc::kind::chord, cand);
        s.cert.rhs = qdesc::pi_times(eps_rat);
        s.cert.verdict = c.ord;
        s.cert.margin = c.margin;
        s.cert.bits = c.bits;
        s.cert.data["k"] = k.str();
        return s;
    }
    throw search_cap_exceeded("net scan: no admissible digit within " + count.str() +
                              " offsets of the base");
}

inline std::string join_ints(const std::vector<Int>& xs) {
    std::string s;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ",";
        s += xs[i].str();
    }
    return s;
}

} // namespace detail

// General finite-measure tower: level n keeps adding digits until the height
// clears the chord threshold of level n+1, so the entry inequality propagates
// by construction and the measure increments decay like 1/n^2.
inline build_result build_problem2_general(const theta_ptr& t, const build_config& cfg) {
    detail::check_config(cfg);
    build_result out;
    detail::start_trace(out, t, "thm41", cfg);
    if (cfg.levels == 0) return out;
    int rounds = cfg.precision_rounds;

    // doubling prefix until the first entry threshold h > 1/delta(1) certifies
    delta_record d1 = delta_min(t, Int(1));
    size_t fillers = 0;
    for (;;) {
        cmp_result c = cmp_certified(cr_scale_rat(d1.delta, Rat(out.params.h.back())),
                                     cr_const_rat(Rat(1)), rounds);
        if (c.ord == ordering::undecidable)
            throw undecidable_comparison("entry threshold undecidable during bootstrap");
        if (c.ord == ordering::greater) break;
        detail::push_filler(out, cfg, "height below entry threshold");
        ++fillers;
    }

    for (size_t n = 1; n <= cfg.levels; ++n) {
        size_t level = fillers + n;
        Int h_prev = out.params.h.back();
        level_record rec;
        rec.level = level;
        rec.phase = "proper";
        rec.data["n"] = std::to_string(n);

        net_record nr = net_params(t, Int(n) * n);
        if (nr.count > cfg.search_cap)
            throw search_cap_exceeded("net too fine at level " + std::to_string(level));
        Int p4 = Int(n) * n * n * n;
        rec.certs.push_back(detail::threshold_cert("(4.1)", level, h_prev, nr.dmin, p4,
                                                   ordering::greater, rounds));
        rec.data["net_count"] = nr.count.str();
        rec.data["net_count_tight"] = nr.count_tight ? "1" : "0";

        delta_record dnext = delta_min(t, Int(n + 1) * (n + 1));
        Int p4next = Int(n + 1) * (n + 1) * (n + 1) * (n + 1);

        // r = 1 would leave a single digit, so the first stop test only
        // records whether the count had to be forced up to two
        cmp_result first = cmp_certified(cr_scale_rat(dnext.delta, Rat(h_prev)),
                                         cr_const_rat(Rat(p4next)), rounds);
        if (first.ord == ordering::undecidable)
            throw undecidable_comparison("stopping rule undecidable at level " +
                                         std::to_string(level));
        bool forced = first.ord == ordering::greater;
        if (forced) rec.data["r_min_forced"] = "1";

        Rat eps(2, Int(n) * n);
        std::vector<Int> elems{Int(0)};
        std::vector<Int> ks;
        Int r = 0;
        for (Int l = 1;; ++l) {
            if (l >= 2) {
                Int hcand = elems.back() + h_prev;
                cmp_result st = cmp_certified(cr_scale_rat(dnext.delta, Rat(hcand)),
                                              cr_const_rat(Rat(p4next)), rounds);
                if (st.ord == ordering::undecidable)
                    throw undecidable_comparison("stopping rule undecidable at level " +
                                                 std::to_string(level));
                if (st.ord == ordering::greater) {
                    r = l;
                    break;
                }
            }
            detail::net_step s = detail::net_extend(t, elems.back(), h_prev, nr.dmin.j,
                                                    nr.count, level, eps, rounds);
            elems.push_back(s.a);
            ks.push_back(s.k);
            rec.certs.push_back(std::move(s.cert));
            if (Int(elems.size()) > cfg.search_cap)
                throw search_cap_exceeded("digit count ran away at level " +
                                          std::to_string(level));
        }

        Int h_n = elems.back() + h_prev;
        detail::guard_digits(h_n, cfg, level);
        ineq_cert stop = detail::threshold_cert("(stop)", level, h_n, dnext, p4next,
                                                ordering::greater, rounds);
        stop.data["l"] = r.str();
        rec.certs.push_back(std::move(stop));
        if (!forced) {
            Int h_short = elems[static_cast<size_t>(r) - 2] + h_prev;
            ineq_cert stop_min = detail::threshold_cert("(stop-min)", level, h_short, dnext,
                                                        p4next, ordering::less, rounds);
            stop_min.data["l"] = Int(r - 1).str();
            rec.certs.push_back(std::move(stop_min));
        }

        Rat inc(h_n - h_prev * r, h_n);
        rec.certs.push_back(decide_cert("(measure)", level, cr_const_rat(inc),
                                        qdesc::constant(inc), cr_pi_mul_rat(eps),
                                        qdesc::pi_times(eps), ordering::less, rounds));
        rec.data["k_list"] = detail::join_ints(ks);
        rec.data["r"] = r.str();
        rec.data["h"] = h_n.str();
        rec.data["increment"] = inc.str();

        out.params.C.push_back(std::move(elems));
        out.params.h.push_back(h_n);
        out.trace.levels.push_back(std::move(rec));
    }

    detail::seal(out, t, tail_majorant::kind::inverse_square, fillers);
    return out;
}

// Two-digit variant: the scale N is admitted once against the whole window,
// after which every level keeps exactly two digits and halves the remaining
// mass at most geometrically slower than 1/n^2.
inline build_result build_problem2_twocut(const theta_ptr& t, const Int& N,
                                          const build_config& cfg) {
    detail::check_config(cfg);
    if (N < 1) throw out_of_range("build_problem2_twocut: N must be >= 1");
    build_result out;
    detail::start_trace(out, t, "thm42", cfg);
    out.trace.config["N"] = N.str();
    out.params.meta["N"] = N.str();
    if (cfg.levels == 0) return out;
    int rounds = cfg.precision_rounds;

    // scale admission: n^4 / (N 2^(n-1)) < delta(n^2) across the window
    level_record pre;
    pre.level = 0;
    pre.phase = "bootstrap";
    for (size_t n = 1; n <= cfg.levels; ++n) {
        Rat lhs(Int(n) * n * n * n, N * pow2(static_cast<long>(n) - 1));
        delta_record d = delta_min(t, Int(n) * n);
        cmp_result c = cmp_certified(cr_const_rat(lhs), d.delta, rounds);
        if (c.ord == ordering::undecidable)
            throw undecidable_comparison("scale admission undecidable at n=" +
                                         std::to_string(n));
        if (c.ord != ordering::less)
            throw e_membership_failed("scale " + N.str() + " rejected at window index " +
                                      std::to_string(n));
        ineq_cert cert;
        cert.name = "(e-member)";
        cert.level = 0;
        cert.lhs = qdesc::constant(lhs);
        cert.rhs = qdesc::power(qdesc::kind::chord, d.j);
        cert.verdict = c.ord;
        cert.margin = c.margin;
        cert.bits = c.bits;
        cert.data["n"] = std::to_string(n);
        cert.data["delta_power"] = d.j.str();
        cert.data["delta_index"] = std::to_string(d.k);
        pre.certs.push_back(std::move(cert));
    }
    out.trace.levels.push_back(std::move(pre));

    size_t fillers = 0;
    while (out.params.h.back() <= 2 * N) {
        detail::push_filler(out, cfg, "height not above twice the scale");
        ++fillers;
    }

    for (size_t n = 1; n <= cfg.levels; ++n) {
        size_t level = fillers + n;
        Int h_prev = out.params.h.back();
        level_record rec;
        rec.level = level;
        rec.phase = "proper";
        rec.data["n"] = std::to_string(n);

        Int scale_n = N * pow2(static_cast<long>(n));
        rec.certs.push_back(decide_cert("(4.4)", level, cr_const_rat(Rat(h_prev)),
                                        qdesc::constant(Rat(h_prev)),
                                        cr_const_rat(Rat(scale_n)),
                                        qdesc::constant(Rat(scale_n)),
                                        ordering::greater, rounds));

        net_record nr = net_params(t, Int(n) * n);
        if (nr.count > cfg.search_cap)
            throw search_cap_exceeded("net too fine at level " + std::to_string(level));
        rec.data["net_count"] = nr.count.str();
        rec.data["net_count_tight"] = nr.count_tight ? "1" : "0";

        Rat eps(2, Int(n) * n);
        detail::net_step s = detail::net_extend(t, Int(0), h_prev, nr.dmin.j, nr.count,
                                                level, eps, rounds);
        Int h_n = s.a + h_prev;
        detail::guard_digits(h_n, cfg, level);
        rec.certs.push_back(std::move(s.cert));

        Rat inc(h_n - 2 * h_prev, h_n);
        Rat target(1, 2 * Int(n) * n);
        rec.certs.push_back(decide_cert("(measure)", level, cr_const_rat(inc),
                                        qdesc::constant(inc), cr_pi_mul_rat(target),
                                        qdesc::pi_times(target), ordering::less, rounds));
        rec.data["k"] = s.k.str();
        rec.data["h"] = h_n.str();
        rec.data["increment"] = inc.str();

        out.params.C.push_back(explicit_level{Int(0), s.a});
        out.params.h.push_back(h_n);
        out.trace.levels.push_back(std::move(rec));
    }

    detail::seal(out, t, tail_majorant::kind::inverse_square, fillers);
    return out;
}

// Smallest power-of-two scale the admission window accepts.
inline Int choose_twocut_N(const theta_ptr& t, size_t K, size_t max_doublings = 64) {
    Int N = 1;
    for (size_t i = 0; i <= max_doublings; ++i) {
        if (e_membership_window(t, N, K).pass) return N;
        N *= 2;
    }
    throw search_cap_exceeded("no admissible power-of-two scale up to 2^" +
                              std::to_string(max_doublings));
}

} // namespace cfrank
