#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "builders.hpp"

// Well-approximable tower builder.  Levels are cut at convergent indices
// whose partial quotient spikes past a growing threshold, so consecutive
// rotation windows collapse fast enough that the smallest angle reachable
// inside a full block dominates everything the later levels contribute.
// Digit sets are kept as walk descriptors; nothing here expands one.

namespace cfrank {

namespace detail {

struct spike_pick {
    size_t m = 0;
    Int threshold;
    std::vector<size_t> rejected;
};

// Smallest index at least m_lo whose partial quotient reaches the threshold.
// The ratio of consecutive window widths at index m lies strictly between
// a_m and a_m + 1, so an integer threshold is decided by the quotient alone.
inline spike_pick pick_spike(const theta_ptr& t, size_t k, size_t m_lo, size_t window) {
    spike_pick out;
    out.threshold = 2 * Int(k) * Int(k);
    if (out.threshold < 4) out.threshold = 4;
    for (size_t m = m_lo; m < m_lo + window; ++m) {
        if (t->coeff(m) >= out.threshold) {
            out.m = m;
            return out;
        }
        out.rejected.push_back(m);
    }
    throw m_sequence_not_found("no quotient spike reaching " + out.threshold.str() +
                               " for step " + std::to_string(k) + " in index window [" +
                               std::to_string(m_lo) + ", " +
                               std::to_string(m_lo + window - 1) + "]");
}

// Smallest j with j * |eta_m| >= |eta_{m-1}| / 2, pinned by refining rational
// enclosures of the two window widths; the ratio is irrational, so the floor
// stabilizes.
inline Int first_bad_index(const theta_ptr& t, size_t m) {
    int sA = t->eta_sign(m);
    int sG = t->eta_sign(m - 1);
    Rat eps(1, t->conv(m + 1).q * 4);
    for (;;) {
        auto [alo, ahi] = t->eta(m, eps);
        auto [glo, ghi] = t->eta(m - 1, eps);
        Rat Alo = sA > 0 ? alo : -ahi, Ahi = sA > 0 ? ahi : -alo;
        Rat Glo = sG > 0 ? glo : -ghi, Ghi = sG > 0 ? ghi : -glo;
        if (Alo > 0 && Glo > 0) {
            Int flo = floor_rat(Glo / (2 * Ahi));
            Int fhi = floor_rat(Ghi / (2 * Alo));
            if (flo == fhi) return flo + 1;
        }
        eps /= 16;
    }
}

inline std::string join_sizes(const std::vector<size_t>& xs) {
    std::string s;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(xs[i]);
    }
    return s;
}

} // namespace detail

// Finite-measure tower over a well-approximable angle: heights are the
// convergent denominators at the spike indices, and each level walks the
// previous height across the new one with occasional corrective steps.
inline build_result build_problem1_wellapprox(const theta_ptr& t, const build_config& cfg) {
    detail::check_config(cfg);
    if (cfg.tail_extension < 1)
        throw out_of_range("build_problem1_wellapprox: tail_extension must be >= 1");
    build_result out;
    detail::start_trace(out, t, "thm45", cfg);
    if (cfg.levels == 0) return out;
    int rounds = cfg.precision_rounds;
    size_t K = cfg.levels;
    size_t T = cfg.tail_extension;

    // index sequence first, extension included, so a dead end aborts before
    // any tower state exists
    std::vector<detail::spike_pick> picks;
    std::vector<size_t> m_seq;
    size_t m_prev_idx = 2;
    for (size_t k = 1; k <= K + T; ++k) {
        detail::spike_pick p = detail::pick_spike(t, k, m_prev_idx + 2, cfg.m_window);
        m_prev_idx = p.m;
        m_seq.push_back(p.m);
        picks.push_back(std::move(p));
    }
    out.params.meta["m_seq"] = detail::join_sizes(m_seq);

    const tail_majorant& mj = out.trace.majorant;  // evaluated before it is set:
    // only index-based descriptors are decided below until the majorant exists

    auto spike_cert = [&](size_t k, size_t level) {
        size_t m = m_seq[k - 1];
        const detail::spike_pick& p = picks[k - 1];
        qdesc lhs = qdesc::level(qdesc::kind::eta_abs, m - 1);
        qdesc rhs = qdesc::level(qdesc::kind::eta_abs, m);
        rhs.scale = Rat(p.threshold);
        ineq_cert c = decide_cert("(4.6)", level, eval_qdesc(lhs, t, out.params, mj), lhs,
                                  eval_qdesc(rhs, t, out.params, mj), rhs,
                                  ordering::greater, rounds);
        c.data["m"] = std::to_string(m);
        c.data["threshold"] = p.threshold.str();
        c.data["m_rejected"] = detail::join_sizes(p.rejected);
        return c;
    };
    auto final_cert = [&](size_t k, size_t level) {
        size_t prev = k == 1 ? 2 : m_seq[k - 2];
        size_t m = m_seq[k - 1];
        qdesc lhs = qdesc::level(qdesc::kind::eta_abs, prev);
        qdesc rhs = qdesc::level(qdesc::kind::eta_abs, m - 1);
        ineq_cert c = decide_cert("(final)", level, eval_qdesc(lhs, t, out.params, mj), lhs,
                                  eval_qdesc(rhs, t, out.params, mj), rhs,
                                  ordering::greater, rounds);
        c.data["m_prev"] = std::to_string(prev);
        c.data["m"] = std::to_string(m);
        return c;
    };
    auto index_match_cert = [&](size_t n, const Int& h_n) {
        size_t m = m_seq[n - 1];
        size_t kstar = t->largest_q_index_le(h_n - 1);
        if (kstar != m - 1)
            throw error("smallest-angle index mismatch at level " + std::to_string(n));
        ineq_cert c;
        c.name = "(4.11)";
        c.level = n;
        c.lhs = qdesc::level(qdesc::kind::arg_min_F, n);
        c.rhs = qdesc::level(qdesc::kind::arg_eta, m - 1);
        c.verdict = ordering::less;
        c.margin = dyadic();
        c.bits = 0;
        c.data["index"] = std::to_string(m - 1);
        c.data["note"] = "index match";
        return c;
    };

    // level 1: minimal two-digit base under the first spike height
    {
        Int h1 = t->conv(m_seq[0]).q;
        if (h1 < 2) throw error("first spike height is too small for a two-digit base");
        detail::guard_digits(h1, cfg, 1);
        out.params.C.push_back(explicit_level{Int(0), Int(1)});
        out.params.h.push_back(h1);
        level_record rec;
        rec.level = 1;
        rec.phase = "bootstrap";
        rec.data["m"] = std::to_string(m_seq[0]);
        rec.data["h"] = h1.str();
        rec.data["increment"] = Rat(h1 - 2, h1).str();
        rec.certs.push_back(spike_cert(1, 1));
        rec.certs.push_back(final_cert(1, 1));
        rec.certs.push_back(index_match_cert(1, h1));
        out.trace.levels.push_back(std::move(rec));
    }

    for (size_t n = 2; n <= K; ++n) {
        size_t m = m_seq[n - 2];
        size_t mn = m_seq[n - 1];
        Int h_prev = out.params.h.back();
        Int h_n = t->conv(mn).q;
        detail::guard_digits(h_n, cfg, n);
        if (h_n <= 2 * h_prev) throw error("spike heights failed to grow at level " +
                                           std::to_string(n));

        walk_level w;
        w.m_prev = m;
        w.h_prev = t->conv(m).q;
        w.q_prev = t->conv(m - 1).q;
        w.sign = t->eta_sign(m);

        // largest digit count whose top stays strictly under h_n - h_prev
        Int target = h_n - h_prev;
        walk_level probe = w;
        Int lo = 1;
        Int hi = floor_div(h_n, h_prev) + 2;
        probe.r = hi + 1;
        if (!(walk_element(t, probe, lo) < target))
            throw error("walk has no room at level " + std::to_string(n));
        if (walk_element(t, probe, hi) < target)
            throw error("walk count bracket failed at level " + std::to_string(n));
        while (hi - lo > 1) {
            Int mid = (lo + hi) / 2;
            if (walk_element(t, probe, mid) < target)
                lo = mid;
            else
                hi = mid;
        }
        w.r = lo + 1;

        level_record rec;
        rec.level = n;
        rec.phase = "walk";
        rec.data["m"] = std::to_string(mn);
        rec.data["m_driver"] = std::to_string(m);
        rec.data["h"] = h_n.str();
        rec.data["r"] = w.r.str();
        rec.data["b_last"] = walk_element(t, probe, lo).str();
        rec.data["b_next"] = walk_element(t, probe, lo + 1).str();
        rec.data["increment"] = Rat(h_n - h_prev * w.r, h_n).str();
        rec.certs.push_back(spike_cert(n, n));
        rec.certs.push_back(final_cert(n, n));

        // spot pair around the first corrective step: its two representatives
        // sit at opposite ends of the walk window
        Int M1 = detail::first_bad_index(t, m);
        Int i0 = M1, i1 = M1 + 1;
        bool fallback = false;
        if (i1 >= w.r) {
            i0 = w.r - 2;
            i1 = w.r - 1;
            fallback = true;
        }
        Int d = walk_element(t, w, i1) - walk_element(t, w, i0);
        qdesc pair_lhs = qdesc::power(qdesc::kind::arg_abs, d);
        qdesc g = qdesc::level(qdesc::kind::arg_eta, m - 1);
        qdesc a = qdesc::level(qdesc::kind::arg_eta, m);
        a.scale = -1;
        qdesc pair_rhs;
        pair_rhs.k = qdesc::kind::sum;
        pair_rhs.children = {g, a};
        ineq_cert pc = decide_cert("(aux_con3)", n,
                                   eval_qdesc(pair_lhs, t, out.params, mj), pair_lhs,
                                   eval_qdesc(pair_rhs, t, out.params, mj), pair_rhs,
                                   ordering::less, rounds);
        pc.data["j_low"] = i0.str();
        pc.data["j_high"] = i1.str();
        pc.data["difference"] = d.str();
        if (fallback) pc.data["fallback"] = "window shorter than first corrective step";
        rec.certs.push_back(std::move(pc));
        rec.certs.push_back(index_match_cert(n, h_n));

        out.params.C.push_back(w);
        out.params.h.push_back(h_n);
        out.trace.levels.push_back(std::move(rec));
    }

    // extension steps live in the trace only; they feed the tail bound
    for (size_t i = 1; i <= T; ++i) {
        size_t k = K + i;
        level_record rec;
        rec.level = k;
        rec.phase = "extension";
        rec.data["m"] = std::to_string(m_seq[k - 1]);
        rec.certs.push_back(spike_cert(k, k));
        rec.certs.push_back(final_cert(k, k));
        out.trace.levels.push_back(std::move(rec));
    }

    out.trace.majorant.k = tail_majorant::kind::wellapprox_telescope;
    out.trace.majorant.L = K;
    out.trace.majorant.m_seq = m_seq;

    // every block minimum dominates all later pair angles plus the tail
    for (size_t n = 1; n <= K; ++n) {
        qdesc lhs = qdesc::level(qdesc::kind::arg_min_F, n);
        qdesc rhs;
        rhs.k = qdesc::kind::sum;
        for (size_t j = n + 1; j <= K; ++j)
            rhs.children.push_back(qdesc::level(qdesc::kind::arg_max_pairs, j));
        rhs.children.push_back(qdesc::level(qdesc::kind::tail_arg, K));
        ineq_cert mc = decide_cert("(master)", n,
                                   eval_qdesc(lhs, t, out.params, out.trace.majorant), lhs,
                                   eval_qdesc(rhs, t, out.params, out.trace.majorant), rhs,
                                   ordering::greater, rounds);
        out.trace.levels[n - 1].certs.push_back(std::move(mc));
    }

    validation_report rep = validate(out.params, t);
    if (!rep.ok) {
        std::string msg = "built parameters failed validation:";
        for (const auto& issue : rep.issues) msg += " " + issue;
        throw error(msg);
    }
    return out;
}

} // namespace cfrank
