#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>

#include "errors.hpp"

namespace cfrank {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Int pow2(long k) {
    Int r = 1;
    return r << k;
}

inline Int pow10(unsigned n) {
    Int r = 1;
    for (unsigned i = 0; i < n; ++i) r *= 10;
    return r;
}

inline long bit_length(const Int& x) {
    if (x == 0) return 0;
    return static_cast<long>(boost::multiprecision::msb(boost::multiprecision::abs(x))) + 1;
}

// floor(x / 2^k) for any sign of x.
inline Int floor_shift(const Int& x, long k) {
    if (k <= 0) return x << (-k);
    if (x >= 0) return x >> k;
    Int m = -x;
    return -((m + (pow2(k) - 1)) >> k);
}

// ceil(x / 2^k) for any sign of x.
inline Int ceil_shift(const Int& x, long k) {
    return -floor_shift(-x, k);
}

inline Int floor_div(const Int& num, const Int& den) {
    if (den == 0) throw out_of_range("floor_div: zero denominator");
    Int q = num / den, r = num % den;
    if (r != 0 && ((r < 0) != (den < 0))) --q;
    return q;
}

inline Int ceil_div(const Int& num, const Int& den) {
    return -floor_div(-num, den);
}

inline Int floor_rat(const Rat& x) {
    return floor_div(numerator(x), denominator(x));
}

inline Int ceil_rat(const Rat& x) {
    return -floor_rat(-x);
}

// Integer square root; exact flag reports whether n is a perfect square.
inline Int isqrt(const Int& n, bool* exact = nullptr) {
    if (n < 0) throw out_of_range("isqrt: negative argument");
    Int r = boost::multiprecision::sqrt(n);
    if (exact) *exact = (r * r == n);
    return r;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

} // namespace cfrank
