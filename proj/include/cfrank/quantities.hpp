#pragma once

#include <set>
#include <string>
#include <vector>

#include "trace.hpp"

// Evaluation of certificate quantities against finished parameters.  The
// builder and the verifier both come through here, so a recorded inequality
// means the same thing when it is replayed later.

namespace cfrank {

// Minimal chord (or angle) over nonzero differences of F_n = [0, h_n): the
// minimum sits at the largest convergent denominator below h_n.
inline cert_real cr_chord_min_F(const theta_ptr& t, const cf_params& p, size_t n,
                                bool arg_units = false) {
    if (n >= p.h.size() || p.h[n] < 2)
        throw out_of_range("cr_chord_min_F: level has no nonzero differences");
    size_t k = t->largest_q_index_le(p.h[n] - 1);
    cert_real rep = cr_frac_rep(t, t->conv(k).q);
    return arg_units ? cr_arg_abs_of_rep(rep) : cr_chord_of_rep(rep);
}

// Upper enclosures for walk levels: every element representative lies in a
// window of width G - A located within (-(G/2), G/2 + A), so pair distances
// stay below G - A and single distances below G/2 + A, in circle units.
inline cert_real cr_walk_bound(const theta_ptr& t, const walk_level& w, bool pairs) {
    cert_real G = cr_eta_abs(t, w.m_prev - 1);
    cert_real A = cr_eta_abs(t, w.m_prev);
    cert_real width = pairs ? cr_sub(G, A)
                            : cr_add(cr_scale_rat(G, Rat(1, 2)), A);
    return cert_real([width](long bits) {
        dyi v = width.eval(bits + 4);
        dyi p = pi_interval(bits + 4);
        dyi ub = di_mul(p, v, bits);
        dyadic hi = dy_shift(ub.hi, 1);  // 2 pi * width
        return dyi{dyadic(), hi};
    });
}

// Max chord/angle over a level's digits (pairs=false) or digit differences
// (pairs=true).  Explicit levels enumerate; walk levels give window bounds.
inline cert_real cr_level_max(const theta_ptr& t, const cf_params& p, size_t n,
                              bool pairs, bool arg_units,
                              const Int& cap = Int(1) << 16) {
    const level_set& s = p.C.at(n);
    if (is_walk(s)) return cr_walk_bound(t, std::get<walk_level>(s), pairs);
    const auto& c = std::get<explicit_level>(s);
    std::set<Int> ds;
    if (pairs) {
        for (size_t i = 0; i < c.size(); ++i)
            for (size_t j = i + 1; j < c.size(); ++j) {
                ds.insert(c[j] - c[i]);
                if (Int(ds.size()) > cap)
                    throw sumset_too_large("cr_level_max: too many pair differences");
            }
    } else {
        for (const Int& v : c)
            if (v != 0) ds.insert(v);
    }
    if (ds.empty()) throw out_of_range("cr_level_max: no nonzero values at level " +
                                       std::to_string(n));
    std::vector<cert_real> xs;
    xs.reserve(ds.size());
    for (const Int& d : ds) {
        cert_real rep = cr_frac_rep(t, d);
        xs.push_back(arg_units ? cr_arg_abs_of_rep(rep) : cr_chord_of_rep(rep));
    }
    return cr_max(std::move(xs));
}

// Upper enclosure [0, bound] of the sum of per-level pair maxima over all
// levels beyond L, including the unbuilt infinite tail.
inline cert_real cr_tail_bound(const theta_ptr& t, const cf_params& p,
                               const tail_majorant& mj, size_t L, bool arg_units) {
    using K = tail_majorant::kind;
    switch (mj.k) {
        case K::none:
            throw no_tail_majorant("no tail bound attached to these parameters");
        case K::inverse_square: {
            // per-level pair chords below 4 pi / n^2, with n counted from the
            // end of the filler prefix; sum beyond L below 4 pi / (L - offset)
            if (L <= mj.offset)
                throw no_tail_majorant("inverse-square tail starts after the filler prefix");
            Rat scale = Rat(4, Int(L - mj.offset));
            cert_real base = cr_pi_mul_rat(scale);
            if (!arg_units)
                return cert_real([base](long bits) {
                    return dyi{dyadic(), base.eval(bits).hi};
                });
            // angle units cost another pi/2
            return cert_real([base](long bits) {
                dyi b = base.eval(bits + 4);
                dyi p2 = pi_interval(bits + 4);
                dyi v = di_mul(b, p2, bits);
                return dyi{dyadic(), dy_round(dy_shift(v.hi, -1), bits, true)};
            });
        }
        case K::geometric_halving:
        case K::zerotype_halving: {
            cert_real fl = cr_chord_min_F(t, p, L, false);
            Rat scale(1, pow2(static_cast<long>(L)));
            cert_real base = cr_scale_rat(fl, scale);
            if (!arg_units)
                return cert_real([base](long bits) {
                    return dyi{dyadic(), base.eval(bits).hi};
                });
            return cert_real([base](long bits) {
                dyi b = base.eval(bits + 4);
                dyi p2 = pi_interval(bits + 4);
                dyi v = di_mul(b, p2, bits);
                return dyi{dyadic(), dy_round(dy_shift(v.hi, -1), bits, true)};
            });
        }
        case K::wellapprox_telescope: {
            size_t J = mj.m_seq.size();  // levels with window data: 2..J
            if (L + 1 > J)
                throw no_tail_majorant("telescope tail: extension does not reach past level " +
                                       std::to_string(L));
            std::vector<cert_real> parts;
            for (size_t j = L + 1; j <= J; ++j) {
                size_t m = mj.m_seq[j - 2];  // m_{j-1}
                cert_real W = cr_sub(cr_eta_abs(t, m - 1), cr_eta_abs(t, m));
                parts.push_back(W);
            }
            size_t m_last = mj.m_seq[J - 1];
            cert_real Glast = cr_eta_abs(t, m_last - 1);
            cert_real width_sum = cr_sum(std::move(parts));
            return cert_real([width_sum, Glast](long bits) {
                dyi w = width_sum.eval(bits + 6);
                dyi g = Glast.eval(bits + 6);
                dyi p = pi_interval(bits + 6);
                // 2 pi * sum + 4 pi * G, as an upper bound from zero
                dyi tot = di_add(w, dyi{dy_shift(g.lo, 1), dy_shift(g.hi, 1)}, bits + 6);
                dyi v = di_mul(p, tot, bits + 4);
                return dyi{dyadic(), dy_round(dy_shift(v.hi, 1), bits, true)};
            });
        }
    }
    throw no_tail_majorant("unhandled majorant kind");
}

// ---------------------------------------------------------------------------

inline cert_real eval_qdesc(const qdesc& q, const theta_ptr& t, const cf_params& p,
                            const tail_majorant& mj) {
    using K = qdesc::kind;
    cert_real base;
    switch (q.k) {
        case K::const_rat: base = cr_const_rat(q.value); break;
        case K::pi_rat: base = cr_pi_mul_rat(q.value); break;
        case K::chord: base = cr_chord_of_rep(cr_frac_rep(t, q.c)); break;
        case K::arg_abs: base = cr_arg_abs_of_rep(cr_frac_rep(t, q.c)); break;
        case K::eta_abs: base = cr_eta_abs(t, q.n); break;
        case K::arg_eta: {
            cert_real e = cr_eta_abs(t, q.n);
            base = cert_real([e](long bits) {
                dyi v = e.eval(bits + 4);
                dyi pp = pi_interval(bits + 4);
                dyi r = di_mul(pp, v, bits);
                return dyi{dy_shift(r.lo, 1), dy_shift(r.hi, 1)};
            });
            break;
        }
        case K::chord_min_F: base = cr_chord_min_F(t, p, q.n, false); break;
        case K::arg_min_F: base = cr_chord_min_F(t, p, q.n, true); break;
        case K::chord_max_level: base = cr_level_max(t, p, q.n, false, false); break;
        case K::chord_max_pairs: base = cr_level_max(t, p, q.n, true, false); break;
        case K::arg_max_pairs: base = cr_level_max(t, p, q.n, true, true); break;
        case K::tail_chord: base = cr_tail_bound(t, p, mj, q.n, false); break;
        case K::tail_arg: base = cr_tail_bound(t, p, mj, q.n, true); break;
        case K::sum: {
            std::vector<cert_real> xs;
            xs.reserve(q.children.size());
            for (const qdesc& ch : q.children) xs.push_back(eval_qdesc(ch, t, p, mj));
            base = cr_sum(std::move(xs));
            break;
        }
    }
    if (q.scale == 1) return base;
    return cr_scale_rat(base, q.scale);
}

// Decide lhs < rhs (or >) and persist the decision.  Builders abort on
// undecidable rather than guessing.
inline ineq_cert decide_cert(const std::string& name, size_t level,
                             const cert_real& lhs_cr, const qdesc& lhs,
                             const cert_real& rhs_cr, const qdesc& rhs,
                             ordering required, int max_rounds = -1) {
    cmp_result c = cmp_certified(lhs_cr, rhs_cr, max_rounds);
    ineq_cert out;
    out.name = name;
    out.level = level;
    out.lhs = lhs;
    out.rhs = rhs;
    out.verdict = c.ord;
    out.margin = c.margin;
    out.bits = c.bits;
    if (c.ord == ordering::undecidable)
        throw undecidable_comparison(name + " at level " + std::to_string(level) +
                                     ": comparison undecidable within the precision cap");
    if (c.ord != required)
        throw error(name + " at level " + std::to_string(level) +
                    ": inequality holds in the wrong direction");
    return out;
}

} // namespace cfrank
