#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bigint.hpp"
#include "dyadic.hpp"
#include "errors.hpp"

// Continued-fraction machinery for irrational angles in (0,1).  An angle is
// held as a lazy partial-quotient stream plus cached convergents; everything
// downstream (certified torus arithmetic, builders) works from rational
// brackets produced here, so this file stays exact: no floating point.

namespace cfrank {

struct convergent {
    Int p, q;
};

namespace detail {

// State machine generating the partial quotients of (P + sqrt(D))/Q.
class surd_state {
public:
    surd_state(Int P, Int D, Int Q) {
        if (Q == 0) throw not_irrational("surd: zero denominator");
        bool square = false;
        Int s0 = isqrt(D < 0 ? Int(0) : D, &square);
        (void)s0;
        if (D <= 0 || square) throw not_irrational("surd: D must be a positive non-square");
        if (Q < 0 || (D - P * P) % Q != 0) {
            P *= abs(Q);
            D *= Q * Q;
            Q *= abs(Q);
        }
        P_ = P; D_ = D; Q_ = Q;
        s_ = isqrt(D_);
    }

    Int next() {
        Int a = floor_div(P_ + s_, Q_);
        P_ = a * Q_ - P_;
        Q_ = (D_ - P_ * P_) / Q_;
        return a;
    }

    std::pair<Int, Int> state() const { return {P_, Q_}; }

private:
    Int P_, D_, Q_, s_;
};

} // namespace detail

struct src_coeffs   { std::vector<Int> a; };
struct src_periodic { std::vector<Int> pre, period; };
struct src_surd     { Int P, D, Q; };
struct src_decimal  { std::string value; unsigned guard_digits; };

using theta_source = std::variant<src_coeffs, src_periodic, src_surd, src_decimal>;

class theta;
using theta_ptr = std::shared_ptr<theta>;

// A lazily expanded irrational angle.  coeff(0) is always 0; coeff(k) for
// k >= 1 is the k-th partial quotient.  Convergents use p_0/q_0 = 1/0,
// p_1/q_1 = 0/1, p_k = a_{k-1} p_{k-1} + p_{k-2} and likewise for q.
class theta {
public:
    static theta_ptr from_coeffs(std::vector<Int> a) {
        auto t = std::make_shared<theta>(tag{});
        if (a.empty() || a[0] != 0)
            throw out_of_range("theta: coefficient list must start with 0 (angle in (0,1))");
        for (size_t k = 1; k < a.size(); ++k)
            if (a[k] < 1) throw out_of_range("theta: partial quotients must be >= 1");
        if (a.size() < 2) throw out_of_range("theta: need at least one partial quotient");
        t->limit_ = a.size();
        t->source_ = src_coeffs{a};
        t->coeffs_ = std::move(a);
        t->init();
        return t;
    }

    static theta_ptr from_periodic(std::vector<Int> pre, std::vector<Int> period,
                                   size_t k_max = default_k_max()) {
        auto t = std::make_shared<theta>(tag{});
        if (period.empty()) throw out_of_range("theta: empty period");
        for (const Int& v : pre)
            if (v < 1) throw out_of_range("theta: partial quotients must be >= 1");
        for (const Int& v : period)
            if (v < 1) throw out_of_range("theta: partial quotients must be >= 1");
        t->limit_ = k_max;
        t->source_ = src_periodic{std::move(pre), std::move(period)};
        t->coeffs_.push_back(0);
        t->init();
        return t;
    }

    static theta_ptr from_surd(const Int& P, const Int& D, const Int& Q,
                               size_t k_max = default_k_max()) {
        auto t = std::make_shared<theta>(tag{});
        t->surd_.emplace(P, D, Q);
        Int a0 = t->surd_->next();
        if (a0 != 0) throw out_of_range("theta: surd value not in (0,1)");
        t->limit_ = k_max;
        t->source_ = src_surd{P, D, Q};
        t->coeffs_.push_back(0);
        t->init();
        return t;
    }

    static theta_ptr from_decimal(const std::string& value, unsigned guard_digits,
                                  size_t k_max = default_k_max()) {
        auto t = std::make_shared<theta>(tag{});
        Rat d = parse_decimal(value);
        Rat g(1, pow10(guard_digits));
        Rat lo = d - g, hi = d + g;
        if (!(lo > 0 && hi < 1))
            throw out_of_range("theta: decimal enclosure not inside (0,1)");
        t->dec_lo_ = lo;
        t->dec_hi_ = hi;
        t->limit_ = k_max;
        t->source_ = src_decimal{value, guard_digits};
        t->coeffs_.push_back(0);
        t->init();
        return t;
    }

    struct tag {};
    explicit theta(tag) {}

    static size_t default_k_max() { return 1000000; }

    const theta_source& source() const { return source_; }

    // Number of coefficients this source could still certify, counting a_0.
    // For decimal sources the true limit is discovered on demand.
    size_t coeff_limit() const { return limit_; }

    const Int& coeff(size_t k) const {
        ensure_coeffs(k + 1);
        return coeffs_[k];
    }

    bool has_coeff(size_t k) const {
        try {
            ensure_coeffs(k + 1);
            return true;
        } catch (const coefficient_budget_exhausted&) {
            return false;
        }
    }

    const convergent& conv(size_t k) const {
        ensure_convs(k + 1);
        return convs_[k];
    }

    // Open rational bracket around theta with endpoints p_d/q_d, p_{d+1}/q_{d+1}.
    std::pair<Rat, Rat> bracket(size_t depth) const {
        if (depth < 1) throw out_of_range("theta::bracket: depth must be >= 1");
        ensure_convs(depth + 2);
        const convergent& c1 = convs_[depth];
        const convergent& c2 = convs_[depth + 1];
        Rat v1(c1.p, c1.q), v2(c2.p, c2.q);
        return v1 < v2 ? std::make_pair(v1, v2) : std::make_pair(v2, v1);
    }

    size_t depth_for_width(const Rat& w) const {
        if (w <= 0) throw out_of_range("theta::depth_for_width: width must be positive");
        for (size_t d = 1;; ++d) {
            ensure_convs(d + 2);
            if (Rat(1, convs_[d].q * convs_[d + 1].q) <= w) return d;
        }
    }

    // Largest index k (k >= 1) with q_k <= bound.  Ties between equal
    // denominators resolve to the larger index.
    size_t largest_q_index_le(const Int& bound) const {
        if (bound < 1) throw out_of_range("theta::largest_q_index_le: bound must be >= 1");
        size_t k = 1;
        while (true) {
            if (!has_coeff(k))  // need a_k to build q_{k+1}
                throw coefficient_budget_exhausted(
                    "largest_q_index_le: coefficient stream exhausted before bound");
            if (conv(k + 1).q > bound) return k;
            ++k;
        }
    }

    // Enclosure of eta_k = q_k theta - p_k with width <= eps.
    std::pair<Rat, Rat> eta(size_t k, const Rat& eps) const {
        if (k == 0) return {Rat(-1), Rat(-1)};
        const convergent c = conv(k);  // copy: deepening below reallocates convs_
        size_t d = depth_for_width(eps / Rat(c.q));
        auto [blo, bhi] = bracket(d);
        return {Rat(c.q) * blo - Rat(c.p), Rat(c.q) * bhi - Rat(c.p)};
    }

    // Exact sandwich 1/(q_k + q_{k+1}) <= |eta_k| <= 1/q_{k+1}.
    std::pair<Rat, Rat> eta_abs_sandwich(size_t k) const {
        ensure_convs(k + 2);
        const Int& qk = convs_[k].q;
        const Int& qk1 = convs_[k + 1].q;
        return {Rat(1, qk + qk1), Rat(1, qk1)};
    }

    int eta_sign(size_t k) const { return k == 0 ? -1 : (k % 2 == 1 ? 1 : -1); }

    std::string describe() const {
        struct v {
            std::string operator()(const src_coeffs& s) const {
                std::string r = "cf[";
                size_t n = std::min<size_t>(s.a.size(), 8);
                for (size_t i = 0; i < n; ++i) r += (i ? "," : "") + s.a[i].str();
                if (s.a.size() > n) r += ",...";
                return r + "]";
            }
            std::string operator()(const src_periodic& s) const {
                std::string r = "periodic(pre=[";
                for (size_t i = 0; i < s.pre.size(); ++i) r += (i ? "," : "") + s.pre[i].str();
                r += "],period=[";
                for (size_t i = 0; i < s.period.size(); ++i) r += (i ? "," : "") + s.period[i].str();
                return r + "])";
            }
            std::string operator()(const src_surd& s) const {
                return "surd((" + s.P.str() + "+sqrt(" + s.D.str() + "))/" + s.Q.str() + ")";
            }
            std::string operator()(const src_decimal& s) const {
                return "decimal(" + s.value + ",guard=" + std::to_string(s.guard_digits) + ")";
            }
        };
        return std::visit(v{}, source_);
    }

private:
    void init() {
        convs_.push_back({Int(1), Int(0)});
        convs_.push_back({Int(0), Int(1)});
    }

    void ensure_coeffs(size_t n) const {
        while (coeffs_.size() < n) {
            size_t k = coeffs_.size();
            if (k >= limit_)
                throw coefficient_budget_exhausted(
                    "theta: coefficient budget exhausted at index " + std::to_string(k) +
                    " (" + describe() + ")");
            if (std::holds_alternative<src_periodic>(source_)) {
                const auto& s = std::get<src_periodic>(source_);
                size_t i = k - 1;
                coeffs_.push_back(i < s.pre.size()
                                      ? s.pre[i]
                                      : s.period[(i - s.pre.size()) % s.period.size()]);
            } else if (std::holds_alternative<src_surd>(source_)) {
                coeffs_.push_back(surd_->next());
            } else if (std::holds_alternative<src_decimal>(source_)) {
                if (!extend_decimal()) {
                    limit_ = coeffs_.size();
                    throw coefficient_budget_exhausted(
                        "theta: decimal guard digits certify only " +
                        std::to_string(coeffs_.size() - 1) + " partial quotients (" +
                        describe() + ")");
                }
            } else {
                throw coefficient_budget_exhausted("theta: coefficient list exhausted (" +
                                                   describe() + ")");
            }
        }
    }

    // One lockstep step of the endpoint expansions; false when they disagree.
    bool extend_decimal() const {
        if (dec_lo_ <= 0 || dec_hi_ <= 0) return false;
        Int alo = floor_rat(Rat(1) / dec_hi_);
        Int ahi = floor_rat(Rat(1) / dec_lo_);
        if (alo != ahi || alo < 1) return false;
        Rat nlo = Rat(1) / dec_hi_ - Rat(alo);
        Rat nhi = Rat(1) / dec_lo_ - Rat(alo);
        dec_lo_ = nlo;
        dec_hi_ = nhi;
        coeffs_.push_back(alo);
        return true;
    }

    void ensure_convs(size_t n) const {
        while (convs_.size() < n) {
            size_t k = convs_.size();  // building conv k
            const Int& a = coeff(k - 1);
            convs_.push_back({a * convs_[k - 1].p + convs_[k - 2].p,
                              a * convs_[k - 1].q + convs_[k - 2].q});
        }
    }

    theta_source source_;
    mutable std::vector<Int> coeffs_;
    mutable std::vector<convergent> convs_;
    mutable size_t limit_ = 0;
    mutable std::optional<detail::surd_state> surd_;
    mutable Rat dec_lo_, dec_hi_;
};

// ---------------------------------------------------------------------------
// free-function module surface

inline std::vector<convergent> convergents(const theta_ptr& t, size_t K) {
    std::vector<convergent> out;
    out.reserve(K + 1);
    for (size_t k = 0; k <= K; ++k) out.push_back(t->conv(k));
    return out;
}

inline std::pair<Rat, Rat> approx_error(const theta_ptr& t, size_t k, const Rat& eps) {
    return t->eta(k, eps);
}

struct window_report {
    size_t K = 0;
    Int max_coeff;
    size_t argmax_k = 0;
    Rat min_scaled_norm_lb;  // min over k<=K of q_k/(q_k+q_{k+1}), lower bound for q_k*dist(q_k theta)
    Rat max_scaled_norm_ub;  // max over k<=K of q_k/q_{k+1}
    std::string note;
};

inline window_report classify_window(const theta_ptr& t, size_t K) {
    if (K < 1) throw out_of_range("classify_window: K must be >= 1");
    window_report r;
    r.K = K;
    r.max_coeff = 0;
    for (size_t k = 1; k <= K; ++k) {
        const Int a = t->coeff(k);
        if (a > r.max_coeff) { r.max_coeff = a; r.argmax_k = k; }
        const Int qk = t->conv(k).q;
        const Int qk1 = t->conv(k + 1).q;
        Rat lb(qk, qk + qk1), ub(qk, qk1);
        if (k == 1 || lb < r.min_scaled_norm_lb) r.min_scaled_norm_lb = lb;
        if (k == 1 || ub > r.max_scaled_norm_ub) r.max_scaled_norm_ub = ub;
    }
    r.note = "max partial quotient " + r.max_coeff.str() + " at k=" +
             std::to_string(r.argmax_k) + "; min scaled norm >= " +
             r.min_scaled_norm_lb.str();
    return r;
}

struct quadratic_expansion {
    std::vector<Int> coeffs;  // starts with a_0
    size_t preperiod = 0;     // indices 1..preperiod are pre-periodic
    size_t period = 0;
};

inline quadratic_expansion expand_quadratic(const Int& P, const Int& D, const Int& Q,
                                            size_t max_terms = 100000) {
    detail::surd_state st(P, D, Q);
    quadratic_expansion out;
    std::map<std::pair<Int, Int>, size_t> seen;
    Int a0 = st.next();
    if (a0 != 0) throw out_of_range("expand_quadratic: value not in (0,1)");
    out.coeffs.push_back(0);
    for (size_t k = 1; k <= max_terms; ++k) {
        auto key = st.state();
        auto it = seen.find(key);
        if (it != seen.end()) {
            out.preperiod = it->second - 1;
            out.period = k - it->second;
            return out;
        }
        seen.emplace(key, k);
        out.coeffs.push_back(st.next());
    }
    throw search_cap_exceeded("expand_quadratic: no period within " +
                              std::to_string(max_terms) + " terms");
}

// ---------------------------------------------------------------------------
// certified re-expansion of a derived value in (0,1)

using enclosure_fn = std::function<std::pair<Rat, Rat>(long bits)>;

// Enclosure of frac(c * theta) refinable to width 2^-bits.  The integer part
// is pinned once at modest precision; irrationality guarantees it is pinned
// correctly once the bracket is narrow enough.
inline enclosure_fn frac_enclosure(const theta_ptr& t, const Int& c) {
    if (c == 0) throw out_of_range("frac_enclosure: c must be nonzero");
    return [t, c](long bits) {
        Rat w = Rat(1, pow2(bits)) / Rat(abs(c));
        for (;;) {
            size_t d = t->depth_for_width(w);
            auto [lo, hi] = t->bracket(d);
            Rat xlo = Rat(c) * (c > 0 ? lo : hi);
            Rat xhi = Rat(c) * (c > 0 ? hi : lo);
            Int fl = floor_rat(xlo), fh = floor_rat(xhi);
            if (fl == fh) return std::make_pair(xlo - Rat(fl), xhi - Rat(fl));
            w /= 16;  // bracket straddles an integer; tighten until it does not
        }
    };
}

// Continued fraction of a certified enclosure, with automatic precision
// escalation when a partial quotient is ambiguous at the current width.
class refined_cf {
public:
    explicit refined_cf(enclosure_fn src, long start_bits = 128, long bits_cap = (1L << 22))
        : src_(std::move(src)), bits_(start_bits), bits_cap_(bits_cap) {
        coeffs_.push_back(0);
        convs_.push_back({Int(1), Int(0)});
        convs_.push_back({Int(0), Int(1)});
    }

    const Int& coeff(size_t k) {
        while (coeffs_.size() <= k) extend();
        return coeffs_[k];
    }

    const convergent& conv(size_t k) {
        while (convs_.size() <= k) {
            size_t j = convs_.size();
            const Int& a = coeff(j - 1);
            convs_.push_back({a * convs_[j - 1].p + convs_[j - 2].p,
                              a * convs_[j - 1].q + convs_[j - 2].q});
        }
        return convs_[k];
    }

    long bits_used() const { return bits_; }

private:
    void extend() {
        size_t want = coeffs_.size() + 1;
        for (;;) {
            auto [lo, hi] = src_(bits_);
            if (!(lo > 0 && hi < 1))
                throw out_of_range("refined_cf: enclosure not inside (0,1)");
            std::vector<Int> got{Int(0)};
            Rat x = lo, y = hi;
            while (got.size() < want + 4) {  // grab a few extra while we are here
                if (x <= 0 || y <= 0) break;
                Int alo = floor_rat(Rat(1) / y);
                Int ahi = floor_rat(Rat(1) / x);
                if (alo != ahi || alo < 1) break;
                Rat nx = Rat(1) / y - Rat(alo);
                Rat ny = Rat(1) / x - Rat(alo);
                x = nx; y = ny;
                got.push_back(alo);
            }
            if (got.size() >= want) {
                for (size_t i = 0; i < coeffs_.size(); ++i)
                    if (got[i] != coeffs_[i])
                        throw error("refined_cf: certified prefix changed under refinement");
                coeffs_ = std::move(got);
                return;
            }
            if (bits_ >= bits_cap_)
                throw coefficient_budget_exhausted(
                    "refined_cf: precision cap reached at " + std::to_string(bits_) + " bits");
            bits_ = std::min(bits_cap_, bits_ * 2);
        }
    }

    enclosure_fn src_;
    long bits_;
    long bits_cap_;
    std::vector<Int> coeffs_;
    std::vector<convergent> convs_;
};

} // namespace cfrank
