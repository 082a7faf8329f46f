#pragma once

#include <map>
#include <mutex>
#include <string>
#include <utility>

#include "bigint.hpp"
#include "errors.hpp"

// Dyadic interval arithmetic with directed rounding.  Every routine that can
// lose information takes a working precision in bits and rounds outward, so an
// interval always encloses the exact value it stands for.

namespace cfrank {

struct dyadic {
    Int m;  // value is m * 2^e
    long e = 0;

    dyadic() : m(0) {}
    dyadic(Int mm, long ee) : m(std::move(mm)), e(ee) {}
    explicit dyadic(long v) : m(v) {}

    bool is_zero() const { return m == 0; }
    int sign() const { return m == 0 ? 0 : (m < 0 ? -1 : 1); }
};

inline dyadic dy_neg(const dyadic& a) { return {-a.m, a.e}; }
inline dyadic dy_abs(const dyadic& a) { return {abs(a.m), a.e}; }

inline int dy_cmp(const dyadic& a, const dyadic& b) {
    if (a.m == 0 && b.m == 0) return 0;
    Int am = a.m, bm = b.m;
    if (a.e >= b.e) am <<= (a.e - b.e); else bm <<= (b.e - a.e);
    if (am < bm) return -1;
    if (am > bm) return 1;
    return 0;
}

inline dyadic dy_add(const dyadic& a, const dyadic& b) {
    if (a.m == 0) return b;
    if (b.m == 0) return a;
    long e = std::min(a.e, b.e);
    return {(a.m << (a.e - e)) + (b.m << (b.e - e)), e};
}

inline dyadic dy_sub(const dyadic& a, const dyadic& b) { return dy_add(a, dy_neg(b)); }

inline dyadic dy_mul(const dyadic& a, const dyadic& b) { return {a.m * b.m, a.e + b.e}; }

inline dyadic dy_mul_int(const dyadic& a, const Int& k) { return {a.m * k, a.e}; }

inline dyadic dy_shift(const dyadic& a, long k) { return {a.m, a.e + k}; }

// Keep at most `bits` significant bits; round toward -inf (up=false) or +inf.
inline dyadic dy_round(const dyadic& a, long bits, bool up) {
    long bl = bit_length(a.m);
    if (bl <= bits) return a;
    long drop = bl - bits;
    Int m = up ? ceil_shift(a.m, drop) : floor_shift(a.m, drop);
    return {std::move(m), a.e + drop};
}

// num/den rounded to `bits` significant bits in the given direction.
inline dyadic dy_from_rat(Int num, Int den, long bits, bool up) {
    if (den == 0) throw out_of_range("dy_from_rat: zero denominator");
    if (num == 0) return dyadic();
    if (den < 0) { den = -den; num = -num; }
    long scale = bits - (bit_length(num) - bit_length(den)) + 1;
    Int n = num, d = den;
    if (scale >= 0) n <<= scale; else d <<= -scale;
    Int q = up ? ceil_div(n, d) : floor_div(n, d);
    return {std::move(q), -scale};
}

inline dyadic dy_from_rat(const Rat& r, long bits, bool up) {
    return dy_from_rat(numerator(r), denominator(r), bits, up);
}

inline Rat dy_to_rat(const dyadic& a) {
    if (a.e >= 0) return Rat(a.m << a.e);
    return Rat(a.m, Int(1) << (-a.e));
}

inline Int dy_floor(const dyadic& a) {
    if (a.e >= 0) return a.m << a.e;
    return floor_shift(a.m, -a.e);
}

inline dyadic dy_div(const dyadic& a, const dyadic& b, long bits, bool up) {
    if (b.m == 0) throw out_of_range("dy_div: zero divisor");
    dyadic q = dy_from_rat(a.m, b.m, bits, up);
    q.e += a.e - b.e;
    return q;
}

struct dyi {
    dyadic lo, hi;

    dyi() = default;
    dyi(dyadic l, dyadic h) : lo(std::move(l)), hi(std::move(h)) {}
    explicit dyi(long v) : lo(dyadic(v)), hi(dyadic(v)) {}

    bool valid() const { return dy_cmp(lo, hi) <= 0; }
    dyadic width() const { return dy_sub(hi, lo); }
    bool contains_zero() const { return lo.sign() <= 0 && hi.sign() >= 0; }
    int sign() const {  // definite sign, 0 when the interval straddles zero
        if (lo.sign() > 0) return 1;
        if (hi.sign() < 0) return -1;
        return 0;
    }
};

inline dyi di_exact(const dyadic& d) { return {d, d}; }
inline dyi di_int(const Int& v) { dyadic d{v, 0}; return {d, d}; }

inline dyi di_round(const dyi& a, long bits) {
    return {dy_round(a.lo, bits, false), dy_round(a.hi, bits, true)};
}

inline dyi di_neg(const dyi& a) { return {dy_neg(a.hi), dy_neg(a.lo)}; }

inline dyi di_add(const dyi& a, const dyi& b, long bits) {
    return di_round({dy_add(a.lo, b.lo), dy_add(a.hi, b.hi)}, bits);
}

inline dyi di_sub(const dyi& a, const dyi& b, long bits) {
    return di_add(a, di_neg(b), bits);
}

inline dyi di_mul(const dyi& a, const dyi& b, long bits) {
    dyadic c[4] = {dy_mul(a.lo, b.lo), dy_mul(a.lo, b.hi),
                   dy_mul(a.hi, b.lo), dy_mul(a.hi, b.hi)};
    dyadic lo = c[0], hi = c[0];
    for (int i = 1; i < 4; ++i) {
        if (dy_cmp(c[i], lo) < 0) lo = c[i];
        if (dy_cmp(c[i], hi) > 0) hi = c[i];
    }
    return di_round({lo, hi}, bits);
}

inline dyi di_mul_int(const dyi& a, const Int& k, long bits) {
    dyi r = (k >= 0) ? dyi{dy_mul_int(a.lo, k), dy_mul_int(a.hi, k)}
                     : dyi{dy_mul_int(a.hi, k), dy_mul_int(a.lo, k)};
    return di_round(r, bits);
}

inline dyi di_mul_rat(const dyi& a, const Rat& r, long bits) {
    dyi num = di_mul_int(a, numerator(r), bits + 8);
    Int den = denominator(r);
    if (den == 1) return di_round(num, bits);
    dyadic lo = dy_from_rat(num.lo.m, den, bits, false);
    lo.e += num.lo.e;
    dyadic hi = dy_from_rat(num.hi.m, den, bits, true);
    hi.e += num.hi.e;
    return {lo, hi};
}

inline dyi di_abs(const dyi& a) {
    if (a.lo.sign() >= 0) return a;
    if (a.hi.sign() <= 0) return di_neg(a);
    dyadic hi = dy_abs(a.lo);
    if (dy_cmp(dy_abs(a.hi), hi) > 0) hi = dy_abs(a.hi);
    return {dyadic(), hi};
}

inline dyi di_hull(const dyi& a, const dyi& b) {
    return {dy_cmp(a.lo, b.lo) <= 0 ? a.lo : b.lo,
            dy_cmp(a.hi, b.hi) >= 0 ? a.hi : b.hi};
}

inline dyi di_min(const dyi& a, const dyi& b) {
    return {dy_cmp(a.lo, b.lo) <= 0 ? a.lo : b.lo,
            dy_cmp(a.hi, b.hi) <= 0 ? a.hi : b.hi};
}

inline dyi di_max(const dyi& a, const dyi& b) {
    return {dy_cmp(a.lo, b.lo) >= 0 ? a.lo : b.lo,
            dy_cmp(a.hi, b.hi) >= 0 ? a.hi : b.hi};
}

inline dyi di_div(const dyi& a, const dyi& b, long bits) {
    if (b.sign() == 0) throw out_of_range("di_div: divisor interval straddles zero");
    dyadic lo, hi;
    bool first = true;
    const dyadic* as[2] = {&a.lo, &a.hi};
    const dyadic* bs[2] = {&b.lo, &b.hi};
    for (auto* x : as)
        for (auto* y : bs) {
            dyadic d = dy_div(*x, *y, bits + 4, false);
            dyadic u = dy_div(*x, *y, bits + 4, true);
            if (first) { lo = d; hi = u; first = false; }
            else {
                if (dy_cmp(d, lo) < 0) lo = d;
                if (dy_cmp(u, hi) > 0) hi = u;
            }
        }
    return {lo, hi};
}

inline dyi di_from_rat(const Rat& lo, const Rat& hi, long bits) {
    return {dy_from_rat(lo, bits, false), dy_from_rat(hi, bits, true)};
}

inline dyi di_from_rat(const Rat& v, long bits) { return di_from_rat(v, v, bits); }

// ---------------------------------------------------------------------------
// pi

namespace detail {

// Interval for arctan(1/x), x >= 2 integer, via the alternating series.
inline dyi atan_inv(long x, long bits) {
    long w = bits + 16;
    dyi sum{dyadic(), dyadic()};
    Int x2 = Int(x) * x;
    Int denpow = x;  // x^(2k+1)
    long k = 0;
    for (;;) {
        Int d = denpow * (2 * k + 1);
        dyi term{dy_from_rat(1, d, w, false), dy_from_rat(1, d, w, true)};
        sum = (k % 2 == 0) ? di_add(sum, term, w) : di_sub(sum, term, w);
        denpow *= x2;
        ++k;
        Int dn = denpow * (2 * k + 1);
        if (bit_length(dn) > w + 2) {
            dyadic tb = dy_from_rat(1, dn, 16, true);
            sum.lo = dy_sub(sum.lo, tb);
            sum.hi = dy_add(sum.hi, tb);
            break;
        }
    }
    return sum;
}

} // namespace detail

// Certified enclosure of pi (Machin's identity), cached per precision.
inline dyi pi_interval(long bits) {
    static std::map<long, dyi> cache;
    static std::mutex mu;
    {
        std::lock_guard<std::mutex> g(mu);
        auto it = cache.find(bits);
        if (it != cache.end()) return it->second;
    }
    long w = bits + 16;
    dyi a = detail::atan_inv(5, w);
    dyi b = detail::atan_inv(239, w);
    dyi pi = di_sub(di_mul_int(a, 16, w), di_mul_int(b, 4, w), bits);
    std::lock_guard<std::mutex> g(mu);
    cache.emplace(bits, pi);
    return pi;
}

// ---------------------------------------------------------------------------
// sin(pi x) on [0, 1/2]

namespace detail {

// Taylor series of sin at an interval argument y (|y| <= 1.6), truncation
// absorbed into the enclosure.
inline dyi sin_taylor(const dyi& y, long bits) {
    long w = bits + 16;
    dyi y2 = di_mul(y, y, w);
    dyi term = y;
    dyi sum = y;
    Int fac_step;
    for (long k = 1;; ++k) {
        term = di_mul(term, y2, w);
        fac_step = Int(2 * k) * (2 * k + 1);
        term = di_mul_rat(term, Rat(1, fac_step), w);
        sum = (k % 2 == 1) ? di_sub(sum, term, w) : di_add(sum, term, w);
        dyadic tb = dy_round(di_abs(term).hi, 16, true);
        if (tb.is_zero() || bit_length(tb.m) + tb.e < -(w + 2)) {
            sum.lo = dy_sub(sum.lo, tb);
            sum.hi = dy_add(sum.hi, tb);
            break;
        }
        if (k > 200) throw search_cap_exceeded("sin_taylor: series failed to converge");
    }
    return sum;
}

} // namespace detail

// Enclosure of sin(pi x) for an interval x inside [0, 1/2]; monotone there, so
// the endpoints are evaluated separately for tightness.
inline dyi sin_pi_half(const dyi& x, long bits) {
    dyadic half{Int(1), -1};
    dyadic lo = x.lo, hi = x.hi;
    if (lo.sign() < 0) lo = dyadic();
    if (dy_cmp(hi, half) > 0) hi = half;
    if (dy_cmp(lo, hi) > 0) lo = hi;
    long w = bits + 8;
    dyi pi = pi_interval(w);
    dyi ylo = di_mul(pi, di_exact(lo), w);
    dyi yhi = di_mul(pi, di_exact(hi), w);
    dyi slo = detail::sin_taylor(ylo, w);
    dyi shi = detail::sin_taylor(yhi, w);
    dyi out{slo.lo, shi.hi};
    if (out.lo.sign() < 0) out.lo = dyadic();
    dyadic one{Int(1), 0};
    if (dy_cmp(out.hi, one) > 0) out.hi = one;
    return di_round(out, bits);
}

// ---------------------------------------------------------------------------
// decimal I/O

namespace detail {

// compare m * 2^e (m > 0) against 10^k
inline int cmp_pow10(const Int& m, long e, long k) {
    Int lhs = m, rhs = 1;
    long e2 = e, k2 = k;
    if (e2 >= 0) lhs <<= e2; else rhs <<= -e2;
    if (k2 >= 0) rhs *= pow10(static_cast<unsigned>(k2));
    else lhs *= pow10(static_cast<unsigned>(-k2));
    return lhs.compare(rhs);
}

} // namespace detail

// Scientific-notation rendering with `sig` significant digits.
// dir: -1 round down (toward zero is wrong for negatives, so this is true
// directed toward -inf), +1 toward +inf, 0 nearest (ties away from zero).
inline std::string dec_string(const dyadic& v, int sig, int dir = 0) {
    if (v.m == 0) return "0";
    bool neg = v.m < 0;
    Int m = abs(v.m);
    long bits = bit_length(m) + v.e;
    long E = static_cast<long>((static_cast<double>(bits) - 1) * 0.30102999566398) - 1;
    while (detail::cmp_pow10(m, v.e, E + 1) >= 0) ++E;
    while (detail::cmp_pow10(m, v.e, E) < 0) --E;
    // N = |v| / 10^(E-sig+1), rounded
    long t = E - sig + 1;
    Int num = m, den = 1;
    if (v.e >= 0) num <<= v.e; else den <<= -v.e;
    if (t >= 0) den *= pow10(static_cast<unsigned>(t));
    else num *= pow10(static_cast<unsigned>(-t));
    Int q = num / den, r = num % den;
    bool round_up_mag;
    if (dir == 0) round_up_mag = (2 * r >= den);
    else if (dir > 0) round_up_mag = !neg && r != 0;
    else round_up_mag = neg && r != 0;
    if (round_up_mag) ++q;
    if (q == pow10(static_cast<unsigned>(sig))) { q = pow10(static_cast<unsigned>(sig - 1)); ++E; }
    std::string digits = q.str();
    std::string out;
    if (neg) out += '-';
    out += digits[0];
    if (digits.size() > 1) { out += '.'; out += digits.substr(1); }
    out += 'e';
    out += (E < 0) ? '-' : '+';
    out += std::to_string(E < 0 ? -E : E);
    return out;
}

// Exact rational value of a decimal string in the formats dec_string emits
// (plus plain integer/fixed-point forms).
inline Rat parse_decimal(const std::string& s) {
    if (s.empty()) throw format_error("parse_decimal: empty string");
    size_t i = 0;
    bool neg = false;
    if (s[i] == '+' || s[i] == '-') { neg = (s[i] == '-'); ++i; }
    Int mant = 0;
    long frac_digits = 0;
    bool seen_digit = false, in_frac = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c >= '0' && c <= '9') {
            mant = mant * 10 + (c - '0');
            if (in_frac) ++frac_digits;
            seen_digit = true;
        } else if (c == '.') {
            if (in_frac) throw format_error("parse_decimal: two decimal points in '" + s + "'");
            in_frac = true;
        } else if (c == 'e' || c == 'E') {
            break;
        } else {
            throw format_error("parse_decimal: bad character in '" + s + "'");
        }
    }
    if (!seen_digit) throw format_error("parse_decimal: no digits in '" + s + "'");
    long expo = 0;
    if (i < s.size()) {  // exponent part
        ++i;
        bool eneg = false;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) { eneg = (s[i] == '-'); ++i; }
        if (i >= s.size()) throw format_error("parse_decimal: empty exponent in '" + s + "'");
        long ev = 0;
        for (; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9') throw format_error("parse_decimal: bad exponent in '" + s + "'");
            ev = ev * 10 + (s[i] - '0');
            if (ev > 1000000) throw format_error("parse_decimal: exponent out of range in '" + s + "'");
        }
        expo = eneg ? -ev : ev;
    }
    if (neg) mant = -mant;
    long net = expo - frac_digits;
    Rat r(mant);
    if (net > 0) r *= Rat(pow10(static_cast<unsigned>(net)));
    else if (net < 0) r /= Rat(pow10(static_cast<unsigned>(-net)));
    return r;
}

} // namespace cfrank
