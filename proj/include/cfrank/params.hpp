#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "angles.hpp"
#include "contfrac.hpp"

// Parameter sequences (h_n, C_n) for tower constructions.  A level's digit
// set is stored either as an explicit sorted vector or as a walk descriptor:
// an arithmetic progression with occasional corrective steps, evaluated on
// demand through a closed form.  Walk levels keep towers with astronomically
// many digits usable; nothing in this file ever expands one unless asked.

namespace cfrank {

using explicit_level = std::vector<Int>;

// Orbit-walk level: elements b(0) < b(1) < ... < b(r-1) with
//   b(j) = j h_prev + B(j) (q_prev + h_prev),
// driven by the rotation data at convergent index m_prev of the angle.
struct walk_level {
    size_t m_prev = 0;  // convergent index m with q_m = h_prev
    Int h_prev;         // q_{m_prev}, the plain step
    Int q_prev;         // q_{m_prev - 1}, the corrective addition
    Int r;              // element count
    int sign = 1;       // sign of eta_{m_prev}
};

using level_set = std::variant<explicit_level, walk_level>;

inline bool is_walk(const level_set& s) { return std::holds_alternative<walk_level>(s); }

// Number of corrective steps taken before step j; exact, decided by refining
// rational enclosures of the two rotation lengths until the floor is pinned.
inline Int walk_reset_count(const theta_ptr& t, const walk_level& w, const Int& j) {
    size_t m = w.m_prev;
    if (m < 2) throw out_of_range("walk_reset_count: m_prev must be >= 2");
    int sA = t->eta_sign(m);
    int sG = t->eta_sign(m - 1);
    Rat eps(1, t->conv(m + 1).q * 4);
    for (;;) {
        auto [alo, ahi] = t->eta(m, eps);
        auto [glo, ghi] = t->eta(m - 1, eps);
        Rat Alo = sA > 0 ? alo : -ahi, Ahi = sA > 0 ? ahi : -alo;
        Rat Glo = sG > 0 ? glo : -ghi, Ghi = sG > 0 ? ghi : -glo;
        if (!(Alo > 0 && Glo > 0)) { eps /= 16; continue; }
        // numerator (j-2) A + G/2, denominator G - A, both positive here
        Rat j2 = Rat(j) - 2;
        Rat Nlo = (j2 >= 0 ? j2 * Alo : j2 * Ahi) + Glo / 2;
        Rat Nhi = (j2 >= 0 ? j2 * Ahi : j2 * Alo) + Ghi / 2;
        Rat Dlo = Glo - Ahi, Dhi = Ghi - Alo;
        if (Dlo <= 0 || Nlo <= 0) { eps /= 16; continue; }
        Int flo = floor_rat(Nlo / Dhi);
        Int fhi = floor_rat(Nhi / Dlo);
        if (flo == fhi) return flo;
        eps /= 16;
    }
}

inline Int walk_element(const theta_ptr& t, const walk_level& w, const Int& j) {
    if (j < 0 || j >= w.r) throw out_of_range("walk_element: index out of range");
    if (j == 0) return 0;
    Int B = walk_reset_count(t, w, j);
    return j * w.h_prev + B * (w.q_prev + w.h_prev);
}

struct cf_params {
    // h[n] and C[n] describe level n; h[0] = 1 and C[0] = {0} by convention.
    std::vector<Int> h;
    std::vector<level_set> C;
    std::map<std::string, std::string> meta;

    size_t levels() const { return h.empty() ? 0 : h.size() - 1; }

    Int count(size_t n) const {
        const level_set& s = C.at(n);
        if (is_walk(s)) return std::get<walk_level>(s).r;
        return Int(std::get<explicit_level>(s).size());
    }

    Int element(const theta_ptr& t, size_t n, const Int& idx) const {
        const level_set& s = C.at(n);
        if (is_walk(s)) return walk_element(t, std::get<walk_level>(s), idx);
        const auto& v = std::get<explicit_level>(s);
        if (idx < 0 || idx >= Int(v.size()))
            throw out_of_range("cf_params::element: index out of range");
        return v[static_cast<size_t>(idx)];
    }

    Int max_element(const theta_ptr& t, size_t n) const {
        return element(t, n, count(n) - 1);
    }

    std::vector<Int> materialize(const theta_ptr& t, size_t n, const Int& cap) const {
        const level_set& s = C.at(n);
        if (!is_walk(s)) return std::get<explicit_level>(s);
        const walk_level& w = std::get<walk_level>(s);
        if (w.r > cap)
            throw sumset_too_large("materialize: level " + std::to_string(n) + " has " +
                                   w.r.str() + " elements, cap " + cap.str());
        std::vector<Int> out;
        out.reserve(static_cast<size_t>(w.r));
        for (Int j = 0; j < w.r; ++j) out.push_back(walk_element(t, w, j));
        return out;
    }
};

// ---------------------------------------------------------------------------
// validation

struct validation_report {
    bool ok = true;
    bool full_scope = true;  // false when walk levels were only spot-checked
    std::vector<std::string> issues;

    void fail(std::string msg) {
        ok = false;
        issues.push_back(std::move(msg));
    }
};

namespace detail {

inline void validate_walk(const cf_params& p, size_t n, const walk_level& w,
                          const theta_ptr& t, validation_report& rep) {
    std::string at = "level " + std::to_string(n) + ": ";
    if (w.r < 2) rep.fail(at + "walk has fewer than 2 elements");
    if (w.h_prev != p.h[n - 1]) rep.fail(at + "walk step differs from previous height");
    if (!t) {
        rep.full_scope = false;
        return;
    }
    if (t->conv(w.m_prev).q != w.h_prev) rep.fail(at + "h_prev is not q_{m_prev}");
    if (t->conv(w.m_prev - 1).q != w.q_prev) rep.fail(at + "q_prev is not q_{m_prev-1}");
    if (t->eta_sign(w.m_prev) != w.sign) rep.fail(at + "stored sign is wrong");
    // spot checks: ends, middle, and one consecutive pair at each
    std::vector<Int> js{Int(0), Int(1), w.r / 2, w.r / 2 + 1, w.r - 2, w.r - 1};
    std::sort(js.begin(), js.end());
    js.erase(std::unique(js.begin(), js.end()), js.end());
    Int prev = -1;
    Int prev_j = -1;
    for (const Int& j : js) {
        if (j < 0 || j >= w.r) continue;
        if (j == prev_j) continue;
        Int b = walk_element(t, w, j);
        if (j == 0 && b != 0) rep.fail(at + "walk does not start at 0");
        if (prev_j >= 0) {
            if (b <= prev) rep.fail(at + "walk elements not increasing at j=" + j.str());
            if (j == prev_j + 1 && b - prev < w.h_prev)
                rep.fail(at + "walk gap below previous height at j=" + j.str());
        }
        prev = b;
        prev_j = j;
    }
    Int top = walk_element(t, w, w.r - 1);
    if (top > p.h[n] - w.h_prev)
        rep.fail(at + "walk top element leaves no room for the previous tower");
}

} // namespace detail

inline validation_report validate(const cf_params& p, const theta_ptr& t = nullptr) {
    validation_report rep;
    if (p.h.empty() || p.h[0] != 1) {
        rep.fail("h[0] must be 1");
        return rep;
    }
    if (p.C.size() != p.h.size()) {
        rep.fail("h and C length mismatch");
        return rep;
    }
    if (!is_walk(p.C[0])) {
        const auto& c0 = std::get<explicit_level>(p.C[0]);
        if (c0.size() != 1 || c0[0] != 0) rep.fail("C[0] must be {0}");
    } else {
        rep.fail("C[0] must be explicit {0}");
    }
    for (size_t n = 1; n < p.h.size(); ++n) {
        std::string at = "level " + std::to_string(n) + ": ";
        if (p.h[n] <= p.h[n - 1]) rep.fail(at + "heights must increase");
        if (p.count(n) < 2) rep.fail(at + "digit set needs at least 2 elements");
        if (is_walk(p.C[n])) {
            detail::validate_walk(p, n, std::get<walk_level>(p.C[n]), t, rep);
            continue;
        }
        const auto& c = std::get<explicit_level>(p.C[n]);
        if (c.empty() || c[0] != 0) {
            rep.fail(at + "digit set must start at 0");
            continue;
        }
        for (size_t i = 1; i < c.size(); ++i) {
            if (c[i] - c[i - 1] < p.h[n - 1]) {
                rep.fail(at + "gap below previous height at position " + std::to_string(i));
                break;
            }
        }
        if (c.back() > p.h[n] - p.h[n - 1])
            rep.fail(at + "top digit leaves no room for the previous tower");
    }
    return rep;
}

// ---------------------------------------------------------------------------
// measure bookkeeping

struct measure_report {
    std::vector<Rat> increments;  // (h_n - h_{n-1} #C_n) / h_n, level by level
    std::vector<Rat> partials;
    Rat total = 0;
    bool all_nonneg = true;
};

inline measure_report measure_tail(const cf_params& p) {
    measure_report r;
    for (size_t n = 1; n <= p.levels(); ++n) {
        Rat inc(p.h[n] - p.h[n - 1] * p.count(n), p.h[n]);
        if (inc < 0) r.all_nonneg = false;
        r.total += inc;
        r.increments.push_back(inc);
        r.partials.push_back(r.total);
    }
    return r;
}

// ---------------------------------------------------------------------------
// telescoping

// Merge levels into consecutive blocks; boundaries lists the last level of
// each block, strictly increasing and ending at the top level.
inline cf_params telescope(const cf_params& p, const std::vector<size_t>& boundaries,
                           const theta_ptr& t = nullptr, const Int& cap = Int(1) << 20) {
    if (boundaries.empty() || boundaries.back() != p.levels())
        throw block_not_consecutive("telescope: block boundaries must end at the top level");
    for (size_t i = 0; i < boundaries.size(); ++i) {
        size_t lo = i == 0 ? 1 : boundaries[i - 1] + 1;
        if (boundaries[i] < lo)
            throw block_not_consecutive("telescope: boundaries must be strictly increasing");
    }
    cf_params out;
    out.meta = p.meta;
    out.meta["telescoped_from_levels"] = std::to_string(p.levels());
    out.h.push_back(1);
    out.C.push_back(explicit_level{Int(0)});
    size_t from = 1;
    for (size_t b : boundaries) {
        std::vector<Int> block{Int(0)};
        for (size_t n = from; n <= b; ++n) {
            std::vector<Int> cn = p.materialize(t, n, cap);
            std::vector<Int> next;
            if (Int(block.size()) * Int(cn.size()) > cap)
                throw sumset_too_large("telescope: block starting at level " +
                                       std::to_string(from) + " exceeds cap");
            next.reserve(block.size() * cn.size());
            for (const Int& chi : cn)
                for (const Int& clo : block) next.push_back(clo + chi);
            block = std::move(next);
        }
        out.h.push_back(p.h[b]);
        out.C.push_back(std::move(block));
        from = b + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// boundedness diagnostics

struct boundedness_report {
    std::vector<Int> counts;          // #C_n per level
    std::vector<Int> max_gap_ratio;   // floor(max spacer / h_{n-1}), tail gap included
    Int max_count = 0;
    Int max_ratio = 0;
    std::string note;
};

inline boundedness_report boundedness_stats(const cf_params& p, const theta_ptr& t = nullptr,
                                            const Int& sample_cap = 4096) {
    boundedness_report r;
    for (size_t n = 1; n <= p.levels(); ++n) {
        Int cnt = p.count(n);
        r.counts.push_back(cnt);
        if (cnt > r.max_count) r.max_count = cnt;
        Int max_gap = 0;
        const Int& hp = p.h[n - 1];
        if (is_walk(p.C[n])) {
            const walk_level& w = std::get<walk_level>(p.C[n]);
            // gaps take exactly two values; the tail gap needs the top element
            max_gap = 2 * w.h_prev + w.q_prev;
            if (t) {
                Int tail = p.h[n] - walk_element(t, w, w.r - 1);
                if (tail > max_gap) max_gap = tail;
            }
        } else {
            const auto& c = std::get<explicit_level>(p.C[n]);
            if (Int(c.size()) <= sample_cap) {
                for (size_t i = 1; i < c.size(); ++i)
                    if (c[i] - c[i - 1] > max_gap) max_gap = c[i] - c[i - 1];
                Int tail = p.h[n] - c.back();
                if (tail > max_gap) max_gap = tail;
            }
        }
        Int ratio = hp > 0 ? Int(max_gap / hp) : Int(0);
        r.max_gap_ratio.push_back(ratio);
        if (ratio > r.max_ratio) r.max_ratio = ratio;
    }
    r.note = "max digit count " + r.max_count.str() + ", max spacer ratio " + r.max_ratio.str();
    return r;
}

} // namespace cfrank
