#pragma once

#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "contfrac.hpp"
#include "dyadic.hpp"

// Certified circle arithmetic over a shared angle.  A cert_real is a lazy
// real number: ask it for an enclosure at any precision and it delivers one
// that provably contains the value.  Comparisons refine on a fixed precision
// schedule and either decide with a recorded margin or give up explicitly.

namespace cfrank {

// Refinement rounds allowed for certified comparisons; round i runs at
// 64 * 2^i bits.  Overridable through CFRANK_PRECISION_CAP.
inline int precision_rounds() {
    static int rounds = [] {
        if (const char* s = std::getenv("CFRANK_PRECISION_CAP")) {
            int v = std::atoi(s);
            if (v >= 0 && v <= 14) return v;
        }
        return 6;
    }();
    return rounds;
}

namespace detail {

struct cr_state {
    std::function<dyi(long)> f;
    std::map<long, dyi> cache;
};

} // namespace detail

class cert_real {
public:
    cert_real() = default;
    explicit cert_real(std::function<dyi(long)> f)
        : s_(std::make_shared<detail::cr_state>()) {
        s_->f = std::move(f);
    }

    dyi eval(long bits) const {
        auto it = s_->cache.find(bits);
        if (it != s_->cache.end()) return it->second;
        dyi v = s_->f(bits);
        s_->cache.emplace(bits, v);
        return v;
    }

    bool valid() const { return static_cast<bool>(s_); }

private:
    std::shared_ptr<detail::cr_state> s_;
};

inline cert_real cr_const_rat(const Rat& r) {
    return cert_real([r](long bits) { return di_from_rat(r, bits); });
}

inline cert_real cr_const_int(const Int& v) {
    Rat r(v);
    return cr_const_rat(r);
}

// scale * pi
inline cert_real cr_pi_mul_rat(const Rat& scale) {
    return cert_real([scale](long bits) {
        return di_round(di_mul_rat(pi_interval(bits + 8), scale, bits + 8), bits);
    });
}

inline cert_real cr_add(const cert_real& a, const cert_real& b) {
    return cert_real([a, b](long bits) {
        return di_add(a.eval(bits + 8), b.eval(bits + 8), bits);
    });
}

inline cert_real cr_sub(const cert_real& a, const cert_real& b) {
    return cert_real([a, b](long bits) {
        return di_sub(a.eval(bits + 8), b.eval(bits + 8), bits);
    });
}

inline cert_real cr_neg(const cert_real& a) {
    return cert_real([a](long bits) { return di_neg(a.eval(bits)); });
}

inline cert_real cr_abs(const cert_real& a) {
    return cert_real([a](long bits) { return di_abs(a.eval(bits)); });
}

inline cert_real cr_scale_int(const cert_real& a, const Int& k) {
    return cert_real([a, k](long bits) { return di_mul_int(a.eval(bits + 8), k, bits); });
}

inline cert_real cr_scale_rat(const cert_real& a, const Rat& r) {
    return cert_real([a, r](long bits) { return di_mul_rat(a.eval(bits + 8), r, bits); });
}

inline cert_real cr_mul(const cert_real& a, const cert_real& b) {
    return cert_real([a, b](long bits) {
        return di_mul(a.eval(bits + 8), b.eval(bits + 8), bits);
    });
}

inline cert_real cr_sum(std::vector<cert_real> xs) {
    return cert_real([xs = std::move(xs)](long bits) {
        dyi acc{};
        long w = bits + 8 + bit_length(Int(xs.size() + 1));
        for (const auto& x : xs) acc = di_add(acc, x.eval(w), w);
        return di_round(acc, bits);
    });
}

inline cert_real cr_min(std::vector<cert_real> xs) {
    if (xs.empty()) throw out_of_range("cr_min: empty");
    return cert_real([xs = std::move(xs)](long bits) {
        dyi acc = xs[0].eval(bits);
        for (size_t i = 1; i < xs.size(); ++i) acc = di_min(acc, xs[i].eval(bits));
        return acc;
    });
}

inline cert_real cr_max(std::vector<cert_real> xs) {
    if (xs.empty()) throw out_of_range("cr_max: empty");
    return cert_real([xs = std::move(xs)](long bits) {
        dyi acc = xs[0].eval(bits);
        for (size_t i = 1; i < xs.size(); ++i) acc = di_max(acc, xs[i].eval(bits));
        return acc;
    });
}

// ---------------------------------------------------------------------------
// angles on the circle

// Distance to the nearest integer, for an input known to be a centered
// representative (value in (-1/2, 1/2] up to enclosure slack).
inline cert_real cr_norm_of_rep(const cert_real& rep) {
    return cert_real([rep](long bits) {
        dyi y = di_abs(rep.eval(bits + 8));
        dyadic half{Int(1), -1};
        dyadic one{Int(1), 0};
        // fold x -> min(x, 1-x) on [0, 1]; increasing then decreasing
        dyadic lo, hi;
        if (dy_cmp(y.hi, half) <= 0) {
            lo = y.lo; hi = y.hi;
        } else if (dy_cmp(y.lo, half) >= 0) {
            lo = dy_sub(one, y.hi); hi = dy_sub(one, y.lo);
        } else {
            dyadic l1 = y.lo, l2 = dy_sub(one, y.hi);
            lo = dy_cmp(l1, l2) <= 0 ? l1 : l2;
            hi = half;
        }
        if (lo.sign() < 0) lo = dyadic();
        return di_round({lo, hi}, bits);
    });
}

// chord length |1 - e(x)| = 2 sin(pi ||x||) from a centered representative
inline cert_real cr_chord_of_rep(const cert_real& rep) {
    cert_real nrm = cr_norm_of_rep(rep);
    return cert_real([nrm](long bits) {
        dyi s = sin_pi_half(nrm.eval(bits + 8), bits + 4);
        return di_round({dy_shift(s.lo, 1), dy_shift(s.hi, 1)}, bits);
    });
}

// 2 pi ||x||
inline cert_real cr_arg_abs_of_rep(const cert_real& rep) {
    cert_real nrm = cr_norm_of_rep(rep);
    return cert_real([nrm](long bits) {
        dyi p = pi_interval(bits + 8);
        dyi v = di_mul(p, nrm.eval(bits + 8), bits + 4);
        return di_round({dy_shift(v.lo, 1), dy_shift(v.hi, 1)}, bits);
    });
}

// 2 pi x (signed)
inline cert_real cr_arg_signed_of_rep(const cert_real& rep) {
    return cert_real([rep](long bits) {
        dyi p = pi_interval(bits + 8);
        dyi v = di_mul(p, rep.eval(bits + 8), bits + 4);
        return di_round({dy_shift(v.lo, 1), dy_shift(v.hi, 1)}, bits);
    });
}

// ---------------------------------------------------------------------------
// fractional parts through the convergent ladder

struct ostrowski_digits {
    size_t K = 0;           // index of the largest denominator used
    std::vector<Int> b;     // b[k] multiplies q_k, entries 1..K
    Int B = 0;              // sum b_k p_k
};

inline ostrowski_digits ostrowski_decompose(const theta_ptr& t, const Int& c_abs) {
    if (c_abs < 1) throw out_of_range("ostrowski_decompose: need c >= 1");
    ostrowski_digits d;
    d.K = t->largest_q_index_le(c_abs);
    d.b.assign(d.K + 1, Int(0));
    Int rem = c_abs;
    for (size_t k = d.K; k >= 1; --k) {
        const Int& qk = t->conv(k).q;
        d.b[k] = rem / qk;
        rem -= d.b[k] * qk;
        d.B += d.b[k] * t->conv(k).p;
        if (rem == 0) break;
    }
    return d;
}

namespace detail {

struct frac_state {
    theta_ptr t;
    Int c;
    bool have_B = false;
    Int B;  // Ostrowski integer part for |c|
    bool have_R = false;
    Int R;  // residual centering integer, round(c theta) = sgn(c) B + R
};

inline std::pair<Rat, Rat> frac_rep_interval(frac_state& st, long bits) {
    if (!st.have_B) {
        st.B = ostrowski_decompose(st.t, abs(st.c)).B;
        st.have_B = true;
    }
    Int S = st.c > 0 ? st.B : -st.B;
    Rat w = Rat(1, pow2(bits + 2)) / Rat(abs(st.c));
    for (;;) {
        size_t d = st.t->depth_for_width(w);
        auto [L, U] = st.t->bracket(d);
        Rat xlo = Rat(st.c) * (st.c > 0 ? L : U) - Rat(S);
        Rat xhi = Rat(st.c) * (st.c > 0 ? U : L) - Rat(S);
        if (!st.have_R) {
            Int rlo = floor_rat(xlo + Rat(1, 2));
            Int rhi = floor_rat(xhi + Rat(1, 2));
            if (rlo != rhi) { w /= 16; continue; }
            st.R = rlo;
            st.have_R = true;
        }
        return {xlo - Rat(st.R), xhi - Rat(st.R)};
    }
}

} // namespace detail

// Centered representative of c*theta mod 1, value in (-1/2, 1/2].
inline cert_real cr_frac_rep(const theta_ptr& t, const Int& c) {
    auto st = std::make_shared<detail::frac_state>();
    st->t = t;
    st->c = c;
    if (c == 0) throw out_of_range("cr_frac_rep: c must be nonzero");
    return cert_real([st](long bits) {
        auto [lo, hi] = detail::frac_rep_interval(*st, bits);
        return di_from_rat(lo, hi, bits);
    });
}

// |eta_k| = |q_k theta - p_k| as a certified real.
inline cert_real cr_eta_abs(const theta_ptr& t, size_t k) {
    return cert_real([t, k](long bits) {
        auto [lo, hi] = t->eta(k, Rat(1, pow2(bits + 2)));
        dyi v = di_from_rat(lo, hi, bits);
        return di_abs(v);
    });
}

// Centered representative of the rational angle p/q.
inline cert_real cr_rat_rep(const Rat& x) {
    Rat r = x - Rat(floor_rat(x));          // now in [0,1)
    if (r > Rat(1, 2)) r -= 1;              // centered, keeping +1/2
    return cr_const_rat(r);
}

struct power_geometry {
    Int c;
    cert_real rep;         // centered representative of c theta
    cert_real chord;       // |1 - e(c theta)|
    cert_real arg_abs;     // 2 pi || c theta ||
    cert_real arg_signed;  // 2 pi rep
};

inline power_geometry pow_geometry(const theta_ptr& t, const Int& c) {
    power_geometry g;
    g.c = c;
    g.rep = cr_frac_rep(t, c);
    g.chord = cr_chord_of_rep(g.rep);
    g.arg_abs = cr_arg_abs_of_rep(g.rep);
    g.arg_signed = cr_arg_signed_of_rep(g.rep);
    return g;
}

// ---------------------------------------------------------------------------
// certified comparison

enum class ordering { less, greater, undecidable };

inline const char* to_string(ordering o) {
    switch (o) {
        case ordering::less: return "less";
        case ordering::greater: return "greater";
        default: return "undecidable";
    }
}

struct cmp_result {
    ordering ord = ordering::undecidable;
    dyadic margin;   // separation when decided, final overlap when not
    long bits = 0;   // precision at which the decision fell
};

inline cmp_result cmp_certified(const cert_real& a, const cert_real& b,
                                int max_rounds = -1) {
    if (max_rounds < 0) max_rounds = precision_rounds();
    cmp_result r;
    for (int round = 0; round <= max_rounds; ++round) {
        long bits = 64L << round;
        dyi ia = a.eval(bits);
        dyi ib = b.eval(bits);
        r.bits = bits;
        if (dy_cmp(ia.hi, ib.lo) < 0) {
            r.ord = ordering::less;
            r.margin = dy_sub(ib.lo, ia.hi);
            return r;
        }
        if (dy_cmp(ib.hi, ia.lo) < 0) {
            r.ord = ordering::greater;
            r.margin = dy_sub(ia.lo, ib.hi);
            return r;
        }
        dyadic ov1 = dy_sub(ia.hi, ib.lo), ov2 = dy_sub(ib.hi, ia.lo);
        r.margin = dy_cmp(ov1, ov2) <= 0 ? ov1 : ov2;
    }
    r.ord = ordering::undecidable;
    return r;
}

// A certified enclosure frozen at some precision, for records and JSON.
struct certified_angle {
    dyadic center;
    dyadic radius;
    bool reduced = true;
};

inline certified_angle freeze(const cert_real& x, long bits) {
    dyi v = x.eval(bits);
    dyadic mid = dy_shift(dy_add(v.lo, v.hi), -1);
    dyadic rad = dy_round(dy_shift(dy_sub(v.hi, v.lo), -1), 16, true);
    return {mid, rad, true};
}

// ---------------------------------------------------------------------------
// module surface: frac_mul, delta_min, net_params, e_membership_window

// Enclosure of the centered representative of c theta, radius <= eps.
inline certified_angle frac_mul(const theta_ptr& t, const Int& c, const Rat& eps) {
    if (eps <= 0) throw out_of_range("frac_mul: eps must be positive");
    long bits = 8;
    while (Rat(1, pow2(bits)) > eps) ++bits;
    cert_real rep = cr_frac_rep(t, c);
    return freeze(rep, bits + 2);
}

struct delta_record {
    size_t k = 0;       // convergent index attaining the minimum
    Int j;              // q_k, the minimizing power
    cert_real delta;    // |1 - e(j theta)|, the minimal chord over 1..bound
    Int bound;
};

// Minimal chord distance |1 - e(d theta)| over 1 <= d <= bound, located at
// the largest convergent denominator not exceeding the bound.
inline delta_record delta_min(const theta_ptr& t, const Int& bound) {
    delta_record r;
    r.bound = bound;
    r.k = t->largest_q_index_le(bound);
    r.j = t->conv(r.k).q;
    r.delta = cr_chord_of_rep(cr_frac_rep(t, r.j));
    return r;
}

struct net_record {
    delta_record dmin;
    Int count;          // ceil(2 pi / delta); count * delta >= 2 pi
    bool count_tight;   // false when the ceiling had to be taken conservatively
};

inline net_record net_params(const theta_ptr& t, const Int& bound) {
    net_record r{delta_min(t, bound), Int(0), true};
    for (int round = 0;; ++round) {
        long bits = 64L << round;
        dyi d = r.dmin.delta.eval(bits);
        if (d.lo.sign() <= 0) {
            if (round >= precision_rounds())
                throw undecidable_comparison("net_params: could not separate delta from 0");
            continue;
        }
        dyi two_pi = di_round(di_mul_rat(pi_interval(bits), Rat(2), bits), bits);
        dyi q = di_div(two_pi, d, bits);
        Int clo = -dy_floor(dy_neg(q.lo));  // ceil of lower endpoint
        Int chi = -dy_floor(dy_neg(q.hi));
        if (clo == chi) {
            r.count = clo;
            r.count_tight = true;
            return r;
        }
        if (round >= precision_rounds()) {
            r.count = chi;
            r.count_tight = false;
            return r;
        }
    }
}

struct membership_report {
    bool pass = true;
    size_t fail_level = 0;
    std::vector<std::string> notes;
};

// Window check that the scale N dominates the chord minima: for each
// 1 <= n <= K require n^4 / (N 2^(n-1)) < delta(n^2).
inline membership_report e_membership_window(const theta_ptr& t, const Int& N, size_t K) {
    if (N < 1) throw out_of_range("e_membership_window: N must be >= 1");
    membership_report rep;
    for (size_t n = 1; n <= K; ++n) {
        Rat lhs(Int(n) * n * n * n, N * pow2(static_cast<long>(n) - 1));
        delta_record d = delta_min(t, Int(n) * n);
        cmp_result c = cmp_certified(cr_const_rat(lhs), d.delta);
        if (c.ord == ordering::undecidable)
            throw undecidable_comparison(
                "e_membership_window: undecidable at n=" + std::to_string(n));
        std::string note = "n=" + std::to_string(n) + " j=" + d.j.str() + " " +
                           to_string(c.ord) + " margin " + dec_string(c.margin, 6);
        rep.notes.push_back(note);
        if (c.ord != ordering::less) {
            rep.pass = false;
            rep.fail_level = n;
            return rep;
        }
    }
    return rep;
}

} // namespace cfrank
