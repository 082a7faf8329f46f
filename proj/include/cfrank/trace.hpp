#pragma once

#include <map>
#include <string>
#include <vector>

#include "angles.hpp"
#include "params.hpp"

// Build-time certificates.  Every inequality a builder relies on is recorded
// with re-evaluable operand descriptors, the decided direction, and the
// margin, so a verifier can redo the decision from scratch against the
// finished parameters instead of trusting stored numbers.

namespace cfrank {

// A quantity that can be rebuilt from (theta, params, majorant) alone.
struct qdesc {
    enum class kind {
        const_rat,        // value
        pi_rat,           // pi * value
        chord,            // |1 - e(c theta)|
        arg_abs,          // 2 pi ||c theta||
        eta_abs,          // |eta_n|                       (n = convergent index)
        arg_eta,          // 2 pi |eta_n|
        chord_min_F,      // min chord over differences of F_n
        arg_min_F,        // 2 pi min ||d theta||, d a difference of F_n
        chord_max_level,  // max chord over C_n
        chord_max_pairs,  // max chord over differences of C_n
        arg_max_pairs,    // max |arg| over differences of C_n
        tail_chord,       // majorant tail beyond level n, chord units
        tail_arg,         // majorant tail beyond level n, angle units
        sum,              // sum of children
    };

    kind k = kind::const_rat;
    Rat scale = 1;   // multiplies the base quantity
    Rat value = 0;   // payload for const_rat / pi_rat
    Int c = 0;       // payload for chord / arg_abs
    size_t n = 0;    // level or index payload
    std::vector<qdesc> children;

    static qdesc constant(const Rat& v) { qdesc q; q.value = v; return q; }
    static qdesc pi_times(const Rat& v) { qdesc q; q.k = kind::pi_rat; q.value = v; return q; }
    static qdesc power(kind kk, const Int& cc) { qdesc q; q.k = kk; q.c = cc; return q; }
    static qdesc level(kind kk, size_t nn) { qdesc q; q.k = kk; q.n = nn; return q; }
};

struct ineq_cert {
    std::string name;
    size_t level = 0;
    qdesc lhs, rhs;
    ordering verdict = ordering::undecidable;
    dyadic margin;
    long bits = 0;
    std::map<std::string, std::string> data;
};

struct level_record {
    size_t level = 0;
    std::string phase;  // "filler", "proper", "bootstrap", "walk"
    std::map<std::string, std::string> data;
    std::vector<ineq_cert> certs;
};

struct tail_majorant {
    enum class kind {
        none,
        inverse_square,       // per-level chord maxima below 2 pi / n^2
        geometric_halving,    // level maxima halve against a frozen floor
        zerotype_halving,     // same decay, from the per-element strengthened bound
        wellapprox_telescope  // window widths from an extended index sequence
    };

    kind k = kind::none;
    size_t L = 0;                // last built level the bound starts after
    size_t offset = 0;           // filler levels preceding the counted ones
    std::vector<size_t> m_seq;   // full index sequence incl. extension (telescope)
};

struct certificate_trace {
    std::string builder;
    std::string theta_desc;
    std::map<std::string, std::string> config;
    std::vector<level_record> levels;
    tail_majorant majorant;
};

inline const char* to_string(qdesc::kind k) {
    switch (k) {
        case qdesc::kind::const_rat: return "const";
        case qdesc::kind::pi_rat: return "pi_mul";
        case qdesc::kind::chord: return "chord";
        case qdesc::kind::arg_abs: return "arg_abs";
        case qdesc::kind::eta_abs: return "eta_abs";
        case qdesc::kind::arg_eta: return "arg_eta";
        case qdesc::kind::chord_min_F: return "chord_min_F";
        case qdesc::kind::arg_min_F: return "arg_min_F";
        case qdesc::kind::chord_max_level: return "chord_max_level";
        case qdesc::kind::chord_max_pairs: return "chord_max_pairs";
        case qdesc::kind::arg_max_pairs: return "arg_max_pairs";
        case qdesc::kind::tail_chord: return "tail_chord";
        case qdesc::kind::tail_arg: return "tail_arg";
        case qdesc::kind::sum: return "sum";
    }
    return "?";
}

inline qdesc::kind qdesc_kind_from_string(const std::string& s) {
    using K = qdesc::kind;
    for (K k : {K::const_rat, K::pi_rat, K::chord, K::arg_abs, K::eta_abs, K::arg_eta,
                K::chord_min_F, K::arg_min_F, K::chord_max_level, K::chord_max_pairs,
                K::arg_max_pairs, K::tail_chord, K::tail_arg, K::sum})
        if (s == to_string(k)) return k;
    throw format_error("unknown quantity kind '" + s + "'");
}

inline const char* to_string(tail_majorant::kind k) {
    switch (k) {
        case tail_majorant::kind::none: return "none";
        case tail_majorant::kind::inverse_square: return "inverse_square";
        case tail_majorant::kind::geometric_halving: return "geometric_halving";
        case tail_majorant::kind::zerotype_halving: return "zerotype_halving";
        case tail_majorant::kind::wellapprox_telescope: return "wellapprox_telescope";
    }
    return "?";
}

inline tail_majorant::kind majorant_kind_from_string(const std::string& s) {
    using K = tail_majorant::kind;
    for (K k : {K::none, K::inverse_square, K::geometric_halving, K::zerotype_halving,
                K::wellapprox_telescope})
        if (s == to_string(k)) return k;
    throw format_error("unknown majorant kind '" + s + "'");
}

} // namespace cfrank
