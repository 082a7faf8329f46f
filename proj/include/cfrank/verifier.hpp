#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "quantities.hpp"

// Independent checkers for finished parameters.  Everything here re-derives
// its verdict from (theta, params, majorant) alone; builder-recorded numbers
// enter only as claims to be replayed, never as inputs to a decision.

namespace cfrank {

enum class check_kind {
    summability,
    injectivity_dist,
    injectivity_arg,
    window_eigen,
    rigidity_shape,
    zerotype_shape,
    torsion_obstruction,
    finite_order_necessity,
};

inline const char* to_string(check_kind k) {
    switch (k) {
        case check_kind::summability: return "summability";
        case check_kind::injectivity_dist: return "injectivity-dist";
        case check_kind::injectivity_arg: return "injectivity-arg";
        case check_kind::window_eigen: return "window-eigen";
        case check_kind::rigidity_shape: return "rigidity-shape";
        case check_kind::zerotype_shape: return "zerotype-shape";
        case check_kind::torsion_obstruction: return "torsion-obstruction";
        case check_kind::finite_order_necessity: return "finite-order-necessity";
    }
    return "?";
}

inline check_kind check_kind_from_string(const std::string& s) {
    using K = check_kind;
    for (K k : {K::summability, K::injectivity_dist, K::injectivity_arg, K::window_eigen,
                K::rigidity_shape, K::zerotype_shape, K::torsion_obstruction,
                K::finite_order_necessity})
        if (s == to_string(k)) return k;
    throw format_error("unknown check kind '" + s + "'");
}

struct level_margin {
    size_t level = 0;
    dyadic value;
    long bits = 0;
};

struct spectral_certificate {
    check_kind kind = check_kind::summability;
    bool pass = false;
    bool window_only = false;  // no tail majorant consumed; claims stop at built levels
    size_t window_lo = 0;
    size_t window_hi = 0;
    std::vector<level_margin> margins;
    std::string tail_note;
    std::map<std::string, std::string> data;
};

namespace detail {

inline std::string join_levels(const std::vector<size_t>& xs) {
    std::string s;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(xs[i]);
    }
    return s;
}

inline std::string join_big(const std::vector<Int>& xs) {
    std::string s;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ",";
        s += xs[i].str();
    }
    return s;
}

inline std::string join_shares(const std::vector<Rat>& xs) {
    std::string s;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ",";
        s += Int(numerator(xs[i])).str() + "/" + Int(denominator(xs[i])).str();
    }
    return s;
}

inline dyadic rat_margin(const Rat& r) { return dy_from_rat(r, 64, false); }

// A level contributes nothing to a digit maximum when its only digit is zero,
// and nothing to a pair maximum when it has a single digit.
inline bool trivial_for_singles(const cf_params& p, const theta_ptr& t, size_t n) {
    return p.count(n) < 2 && p.max_element(t, n) == 0;
}

inline bool trivial_for_pairs(const cf_params& p, size_t n) { return p.count(n) < 2; }

}  // namespace detail

// ---------------------------------------------------------------------------
// summability of per-level digit maxima

inline spectral_certificate check_summability(const theta_ptr& t, const cf_params& p,
                                              const tail_majorant& mj, int rounds = -1) {
    (void)rounds;
    spectral_certificate out;
    out.kind = check_kind::summability;
    out.window_lo = 1;
    out.window_hi = p.levels();
    const long mbits = 96;
    std::vector<cert_real> parts;
    Rat worst = 0;
    size_t worst_level = 0;
    for (size_t n = 1; n <= p.levels(); ++n) {
        if (detail::trivial_for_singles(p, t, n)) {
            out.margins.push_back({n, dyadic(), mbits});
            continue;
        }
        cert_real mx = cr_level_max(t, p, n, false, false);
        dyadic hi = mx.eval(mbits).hi;
        out.margins.push_back({n, hi, mbits});
        Rat rhi = dy_to_rat(hi);
        if (worst_level == 0 || rhi > worst) {
            worst = rhi;
            worst_level = n;
        }
        parts.push_back(std::move(mx));
    }
    if (!parts.empty()) {
        dyadic sum_hi = cr_sum(std::move(parts)).eval(mbits).hi;
        out.data["window_sum_hi"] = dec_string(sum_hi, 10, 1);
    } else {
        out.data["window_sum_hi"] = "0";
    }
    if (worst_level > 0) {
        out.data["max_level"] = std::to_string(worst_level);
        out.data["max_level_hi"] = dec_string(out.margins[worst_level - 1].value, 10, 1);
    }
    if (mj.k == tail_majorant::kind::none) {
        out.window_only = true;
        out.tail_note = "no tail majorant attached; claims restricted to built levels";
    } else {
        dyadic tail_hi = cr_tail_bound(t, p, mj, p.levels(), false).eval(mbits).hi;
        out.data["tail_hi"] = dec_string(tail_hi, 10, 1);
        out.tail_note = std::string("tail majorant: ") + to_string(mj.k);
    }
    out.pass = true;
    return out;
}

// ---------------------------------------------------------------------------
// base-pair separation against the downstream digit oscillation

namespace detail {

inline spectral_certificate injectivity_check(const theta_ptr& t, const cf_params& p,
                                              size_t n, const tail_majorant& mj,
                                              bool arg_units, int rounds) {
    spectral_certificate out;
    out.kind = arg_units ? check_kind::injectivity_arg : check_kind::injectivity_dist;
    out.window_lo = n;
    out.window_hi = p.levels();
    if (n > p.levels()) throw out_of_range("injectivity check: level beyond the window");
    if (n == 0 || p.h[n] < 2) {
        out.pass = true;
        out.data["vacuous"] = "no distinct base pair below the level height";
        return out;
    }
    cert_real lhs = cr_chord_min_F(t, p, n, arg_units);
    size_t kstar = t->largest_q_index_le(p.h[n] - 1);
    out.data["lhs_witness_exponent"] = Int(t->conv(kstar).q).str();

    const long mbits = 96;
    std::vector<cert_real> parts;
    Rat peak = 0;
    size_t peak_level = 0;
    for (size_t k = n + 1; k <= p.levels(); ++k) {
        if (trivial_for_pairs(p, k)) continue;
        cert_real mx = cr_level_max(t, p, k, true, arg_units);
        Rat hi = dy_to_rat(mx.eval(mbits).hi);
        if (peak_level == 0 || hi > peak) {
            peak = hi;
            peak_level = k;
        }
        parts.push_back(std::move(mx));
    }
    if (peak_level > 0) out.data["rhs_peak_level"] = std::to_string(peak_level);

    if (mj.k == tail_majorant::kind::none) {
        out.window_only = true;
        out.tail_note = "no tail majorant attached; claims restricted to built levels";
    } else {
        parts.push_back(cr_tail_bound(t, p, mj, p.levels(), arg_units));
        out.tail_note = std::string("tail majorant: ") + to_string(mj.k);
    }
    if (parts.empty()) {
        out.pass = true;
        out.data["vacuous"] = "no digit oscillation beyond the level in the window";
        return out;
    }
    cert_real rhs = cr_sum(std::move(parts));
    cmp_result c = cmp_certified(lhs, rhs, rounds);
    if (c.ord == ordering::undecidable)
        throw undecidable_comparison("injectivity check at level " + std::to_string(n) +
                                     ": comparison undecidable within the precision cap");
    out.pass = c.ord == ordering::greater;
    out.margins.push_back({n, c.margin, c.bits});
    out.data["verdict"] = to_string(c.ord);
    return out;
}

}  // namespace detail

inline spectral_certificate check_injective_dist(const theta_ptr& t, const cf_params& p,
                                                 size_t n, const tail_majorant& mj,
                                                 int rounds = -1) {
    return detail::injectivity_check(t, p, n, mj, false, rounds);
}

inline spectral_certificate check_injective_arg(const theta_ptr& t, const cf_params& p,
                                                size_t n, const tail_majorant& mj,
                                                int rounds = -1) {
    return detail::injectivity_check(t, p, n, mj, true, rounds);
}

// ---------------------------------------------------------------------------
// concentration of a digit-sum window near a candidate circle point

// A candidate rotation number: either a certified irrational or an exact
// fraction (finite-order candidates are fractions).
struct circle_candidate {
    theta_ptr irrational;
    Rat rational = 0;
};

inline circle_candidate candidate_irrational(const theta_ptr& t) {
    circle_candidate c;
    c.irrational = t;
    return c;
}

inline circle_candidate candidate_rational(const Rat& r) {
    circle_candidate c;
    c.rational = r - Rat(floor_rat(r));
    return c;
}

struct eigen_window_report {
    bool pass = false;
    size_t n = 0;
    size_t m = 0;
    Rat eps = 0;
    Int total = 0;         // digit tuples counted with multiplicity
    size_t best_count = 0;
    Rat density = 0;
    Rat diameter = 0;      // circle span of the winning cluster, in turns
    std::vector<Int> members;
    std::map<std::string, std::string> data;
};

namespace detail {

struct arc_points {
    std::vector<std::pair<Rat, Int>> pts;  // position in [0,1), digit sum
    Int total = 0;
    Rat slack = 0;  // position uncertainty for irrational candidates
};

inline arc_points window_points(const theta_ptr& t, const cf_params& p,
                                const circle_candidate& cand, size_t n, size_t m,
                                const Int& cap, long pos_bits) {
    if (n == 0 || n > m || m > p.levels())
        throw out_of_range("window test: level range outside the built window");
    std::vector<Int> sums{Int(0)};
    Int total = 1;
    for (size_t k = n; k <= m; ++k) {
        std::vector<Int> ck = p.materialize(t, k, cap);
        total *= Int(ck.size());
        if (total > cap)
            throw sumset_too_large("window test: digit-sum set exceeds the cap at level " +
                                   std::to_string(k));
        std::vector<Int> next;
        next.reserve(sums.size() * ck.size());
        for (const Int& c : ck)
            for (const Int& s : sums) next.push_back(s + c);
        sums = std::move(next);
    }
    arc_points out;
    out.total = total;
    out.pts.reserve(sums.size());
    if (cand.irrational) {
        for (const Int& s : sums) {
            if (s == 0) {
                out.pts.push_back({Rat(0), s});
                continue;
            }
            dyi v = cr_frac_rep(cand.irrational, s).eval(pos_bits);
            Rat x = dy_to_rat(dy_shift(dy_add(v.lo, v.hi), -1));
            if (x < 0) x += 1;
            if (x >= 1) x -= 1;
            out.pts.push_back({x, s});
        }
        out.slack = Rat(1, pow2(pos_bits - 3));
    } else {
        for (const Int& s : sums) {
            Rat x = cand.rational * Rat(s);
            x -= Rat(floor_rat(x));
            out.pts.push_back({x, s});
        }
        out.slack = 0;
    }
    std::sort(out.pts.begin(), out.pts.end());
    return out;
}

// Largest point count inside a half-open arc of width w, arcs anchored at
// points; returns the winning index range into the doubled circle.
inline size_t arc_sweep(const std::vector<std::pair<Rat, Int>>& pts, const Rat& w,
                        size_t& best_i, size_t& best_j) {
    size_t N = pts.size();
    best_i = best_j = 0;
    if (N == 0) return 0;
    auto pos = [&](size_t idx) {
        return idx < N ? pts[idx].first : pts[idx - N].first + 1;
    };
    size_t best = 0;
    size_t j = 0;
    for (size_t i = 0; i < N; ++i) {
        if (j < i) j = i;
        while (j + 1 < i + N && pos(j + 1) - pts[i].first < w) ++j;
        size_t cnt = j - i + 1;
        if (cnt > best) {
            best = cnt;
            best_i = i;
            best_j = j;
        }
    }
    return best;
}

// Rational enclosure w_lo < eps / (2 pi) < w_hi.
inline std::pair<Rat, Rat> arc_width_bounds(const Rat& eps) {
    dyi pv = pi_interval(160);
    Rat plo = dy_to_rat(pv.lo), phi = dy_to_rat(pv.hi);
    return {eps / (2 * phi), eps / (2 * plo)};
}

}  // namespace detail

inline eigen_window_report eigenvalue_window_test(const theta_ptr& t, const cf_params& p,
                                                  const circle_candidate& cand,
                                                  const Rat& eps, size_t n, size_t m,
                                                  const Int& cap = Int(1) << 20,
                                                  long pos_bits = 192) {
    if (eps <= 0) throw out_of_range("window test: tolerance must be positive");
    eigen_window_report out;
    out.n = n;
    out.m = m;
    out.eps = eps;
    detail::arc_points ap = detail::window_points(t, p, cand, n, m, cap, pos_bits);
    out.total = ap.total;
    auto [wlo, whi] = detail::arc_width_bounds(eps);
    Rat w_minus = wlo - ap.slack;
    Rat w_plus = whi + ap.slack;
    if (w_minus < 0) w_minus = 0;
    size_t i1 = 0, j1 = 0, i2 = 0, j2 = 0;
    size_t b1 = detail::arc_sweep(ap.pts, w_minus, i1, j1);
    size_t b2 = detail::arc_sweep(ap.pts, w_plus, i2, j2);
    if (b1 != b2)
        throw undecidable_comparison("window test: a point sits on the arc boundary "
                                     "within the position precision");
    out.best_count = b1;
    size_t N = ap.pts.size();
    for (size_t idx = i1; idx <= j1 && N > 0; ++idx)
        out.members.push_back(ap.pts[idx % N].second);
    std::sort(out.members.begin(), out.members.end());
    if (N > 0) {
        Rat hi_pos = j1 < N ? ap.pts[j1].first : ap.pts[j1 - N].first + 1;
        out.diameter = hi_pos - ap.pts[i1].first;
    }
    out.density = Rat(Int(b1), ap.total);
    out.pass = out.density > 1 - eps;
    out.data["arc_width_lo"] = Int(numerator(w_minus)).str() + "/" +
                               Int(denominator(w_minus)).str();
    out.data["pos_bits"] = std::to_string(pos_bits);
    out.data["chord_note"] = "pair chords inside the arc stay below the tolerance "
                             "because the chord is at most the subtended angle";
    return out;
}

// Quadratic reference: every anchored arc counted directly.
inline size_t eigen_window_brute(const theta_ptr& t, const cf_params& p,
                                 const circle_candidate& cand, const Rat& eps,
                                 size_t n, size_t m, const Int& cap = Int(1) << 20,
                                 long pos_bits = 192) {
    detail::arc_points ap = detail::window_points(t, p, cand, n, m, cap, pos_bits);
    auto [wlo, whi] = detail::arc_width_bounds(eps);
    (void)whi;
    Rat w = wlo - ap.slack;
    if (w < 0) w = 0;
    size_t best = 0;
    size_t N = ap.pts.size();
    for (size_t i = 0; i < N; ++i) {
        size_t cnt = 0;
        for (size_t j = 0; j < N; ++j) {
            Rat d = ap.pts[j].first - ap.pts[i].first;
            if (d < 0) d += 1;
            if (d < w || i == j) ++cnt;
        }
        if (cnt > best) best = cnt;
    }
    return best;
}

// ---------------------------------------------------------------------------
// progression shape screens

inline spectral_certificate check_rigidity_shape(const cf_params& p,
                                                 const theta_ptr& t = nullptr,
                                                 const Int& sample_cap = 4096) {
    spectral_certificate out;
    out.kind = check_kind::rigidity_shape;
    out.window_lo = 1;
    out.window_hi = p.levels();
    std::vector<size_t> qual;
    std::vector<Int> times;
    std::vector<Int> qual_counts;
    std::vector<std::string> notes;
    for (size_t n = 1; n <= p.levels(); ++n) {
        Int cnt = p.count(n);
        if (cnt < 2) continue;
        bool ap = true;
        bool certain = true;
        Int d = 0;
        if (is_walk(p.C[n]) && cnt > sample_cap) {
            const walk_level& w = std::get<walk_level>(p.C[n]);
            d = walk_element(t, w, 1) - walk_element(t, w, 0);
            Int limit = cnt - 1 < 64 ? Int(cnt - 1) : Int(64);
            for (Int j = 1; j < limit && ap; ++j)
                if (walk_element(t, w, j + 1) - walk_element(t, w, j) != d) ap = false;
            if (ap) {
                certain = false;
                notes.push_back("level " + std::to_string(n) +
                                ": progression status sampled, not certified");
            }
        } else {
            std::vector<Int> c = p.materialize(t, n, sample_cap);
            d = c[1] - c[0];
            for (size_t i = 2; i < c.size() && ap; ++i)
                if (c[i] - c[i - 1] != d) ap = false;
        }
        if (ap && certain) {
            qual.push_back(n);
            times.push_back(d);
            qual_counts.push_back(cnt);
        }
    }
    bool growing = qual.size() >= 2;
    for (size_t i = 1; i < qual_counts.size(); ++i)
        if (qual_counts[i] <= qual_counts[i - 1]) growing = false;
    out.pass = growing;
    out.data["qualifying_levels"] = detail::join_levels(qual);
    out.data["rigidity_times"] = detail::join_big(times);
    out.data["qualifying_counts"] = detail::join_big(qual_counts);
    if (!notes.empty()) {
        std::string s;
        for (size_t i = 0; i < notes.size(); ++i) {
            if (i) s += "; ";
            s += notes[i];
        }
        out.data["notes"] = s;
    }
    return out;
}

inline spectral_certificate check_zerotype_shape(const cf_params& p,
                                                 const theta_ptr& t = nullptr,
                                                 const Int& cap = Int(1) << 16) {
    spectral_certificate out;
    out.kind = check_kind::zerotype_shape;
    out.window_lo = 1;
    out.window_hi = p.levels();
    bool ok = true;
    for (size_t n = 0; n + 1 <= p.levels(); ++n) {
        Int width = 2 * p.h[n] - 1;
        Rat inc_slack(p.h[n + 1] - 1 - (2 * (p.h[n] - 1) + p.max_element(t, n + 1)));
        if (inc_slack < 0 && ok) {
            ok = false;
            out.data["witness"] = "level " + std::to_string(n + 1) +
                                  ": double base plus top digit leaves the next level";
        }
        bool checked = true;
        std::vector<Int> c;
        try {
            c = p.materialize(t, n + 1, cap);
        } catch (const sumset_too_large&) {
            checked = false;
        }
        if (checked && Int(c.size()) * Int(c.size()) > cap) checked = false;
        Rat sep_slack = inc_slack;
        if (!checked) {
            ok = false;
            out.data["witness_unchecked"] = "level " + std::to_string(n + 1) +
                                            ": too many digits to enumerate differences";
        } else if (c.size() >= 2) {
            std::vector<Int> diffs;
            for (size_t i = 0; i < c.size(); ++i)
                for (size_t j = 0; j < c.size(); ++j)
                    if (i != j) diffs.push_back(c[i] - c[j]);
            std::set<Int> uniq(diffs.begin(), diffs.end());
            if (uniq.size() != diffs.size()) {
                ok = false;
                if (!out.data.count("witness"))
                    out.data["witness"] = "level " + std::to_string(n + 1) +
                                          ": repeated ordered digit difference";
                sep_slack = Rat(-width);
            } else {
                std::vector<Int> ds(uniq.begin(), uniq.end());
                ds.push_back(Int(0));
                std::sort(ds.begin(), ds.end());
                Int sep = 0;
                for (size_t i = 1; i < ds.size(); ++i) {
                    Int g = ds[i] - ds[i - 1];
                    if (i == 1 || g < sep) sep = g;
                }
                Rat gap_slack(sep - width);
                if (gap_slack < sep_slack) sep_slack = gap_slack;
                if (gap_slack < 0) {
                    ok = false;
                    if (!out.data.count("witness"))
                        out.data["witness"] = "level " + std::to_string(n + 1) +
                                              ": difference translates overlap";
                }
            }
        }
        out.margins.push_back({n + 1, detail::rat_margin(sep_slack), 0});
    }
    if (p.levels() >= 2) {
        for (size_t n = 2; n <= p.levels(); ++n)
            if (p.count(n) <= p.count(n - 1)) {
                ok = false;
                if (!out.data.count("witness_growth"))
                    out.data["witness_growth"] =
                        "digit counts not strictly increasing at level " + std::to_string(n);
            }
    }
    out.pass = ok;
    return out;
}

inline spectral_certificate check_torsion_obstruction(const cf_params& p, const Int& modulus,
                                                      const theta_ptr& t = nullptr,
                                                      const Int& sample_cap = 4096) {
    if (modulus < 2) throw out_of_range("torsion check: modulus must be at least 2");
    spectral_certificate out;
    out.kind = check_kind::torsion_obstruction;
    out.window_lo = 1;
    out.window_hi = p.levels();
    const Rat thr(7, 10);
    std::vector<size_t> qual;
    std::vector<Rat> shares;
    for (size_t n = 1; n <= p.levels(); ++n) {
        if (p.count(n) > sample_cap) {
            shares.push_back(Rat(1));
            out.margins.push_back({n, detail::rat_margin(thr - 1), 0});
            out.data["unchecked"] = (out.data.count("unchecked")
                                         ? out.data["unchecked"] + ","
                                         : std::string()) + std::to_string(n);
            continue;
        }
        std::vector<Int> c = p.materialize(t, n, sample_cap);
        std::map<Int, Int> hist;
        for (const Int& v : c) hist[Int(((v % modulus) + modulus) % modulus)] += 1;
        Int top = 0;
        for (const auto& kv : hist)
            if (kv.second > top) top = kv.second;
        Rat share(top, Int(c.size()));
        shares.push_back(share);
        out.margins.push_back({n, detail::rat_margin(thr - share), 0});
        if (share <= thr) qual.push_back(n);
    }
    out.pass = !qual.empty();
    out.data["modulus"] = modulus.str();
    out.data["threshold"] = "7/10";
    out.data["qualifying_levels"] = detail::join_levels(qual);
    out.data["shares"] = detail::join_shares(shares);
    return out;
}

inline spectral_certificate check_finite_order_necessity(const theta_ptr& t,
                                                         const cf_params& p,
                                                         int rounds = -1) {
    (void)rounds;
    size_t L = p.levels();
    if (L == 0) throw not_applicable("no built levels to examine");
    std::vector<Int> counts, spacers;
    for (size_t n = 1; n <= L; ++n) {
        counts.push_back(p.count(n));
        spacers.push_back(p.h[n] - p.h[n - 1] * p.count(n));
    }
    auto grows = [](const std::vector<Int>& v) {
        if (v.size() < 3) return false;
        for (size_t i = 1; i < v.size(); ++i)
            if (v[i] <= v[i - 1]) return false;
        return true;
    };
    if (grows(counts))
        throw not_applicable("digit counts grow across the whole window");
    if (grows(spacers))
        throw not_applicable("spacer counts grow across the whole window");

    spectral_certificate out;
    out.kind = check_kind::finite_order_necessity;
    out.window_lo = 1;
    out.window_hi = L;
    Int M = 0;
    for (const Int& v : counts)
        if (v > M) M = v;
    for (const Int& v : spacers)
        if (v > M) M = v;
    out.data["M"] = M.str();

    std::vector<Int> least(L + 1, Int(0));
    for (size_t n = 1; n <= L; ++n) {
        Int e0 = p.element(t, n, 0);
        if (e0 > 0)
            least[n] = e0;
        else if (p.count(n) >= 2)
            least[n] = p.element(t, n, 1);
    }
    Int drift_bound = 2 * M + M * M;
    bool drift_ok = true;
    std::vector<Int> drifts;
    for (size_t n = 1; n + 1 <= L; ++n) {
        if (least[n] == 0 || least[n + 1] == 0) continue;
        Int d = least[n + 1] - least[n] * counts[n - 1];
        if (d < 0) d = -d;
        drifts.push_back(d);
        if (d > drift_bound) drift_ok = false;
    }
    out.data["drifts"] = detail::join_big(drifts);
    out.data["drift_bound"] = drift_bound.str();
    out.data["drift_ok"] = drift_ok ? "true" : "false";

    const long mbits = 128;
    std::vector<Rat> his;
    for (size_t n = 1; n <= L; ++n) {
        if (detail::trivial_for_singles(p, t, n)) {
            out.margins.push_back({n, dyadic(), mbits});
            continue;
        }
        dyi v = cr_level_max(t, p, n, false, false).eval(mbits);
        out.margins.push_back({n, v.lo, mbits});
        his.push_back(dy_to_rat(v.hi));
    }
    // vanishing evidence: the top quarter of digit-bearing levels sits well
    // below the window peak
    bool vanishing = false;
    if (his.size() >= 4) {
        Rat peak = 0;
        for (const Rat& v : his)
            if (v > peak) peak = v;
        vanishing = true;
        for (size_t i = his.size() - (his.size() + 3) / 4; i < his.size(); ++i)
            if (4 * his[i] >= peak) vanishing = false;
    }
    out.data["verdict"] = vanishing ? "maxima-vanishing" : "no-vanishing-on-window";
    out.pass = drift_ok;
    return out;
}

// ---------------------------------------------------------------------------
// replay of builder certificates from the finished parameters

struct recheck_report {
    size_t total = 0;
    size_t replayed = 0;  // re-decided by interval comparison
    size_t exact = 0;     // re-derived by exact integer or rational arithmetic
    size_t skipped = 0;   // stored constants only, direction verified
    bool all_match = true;
    std::vector<std::string> notes;
};

namespace detail {

inline void recheck_fail(recheck_report& r, const ineq_cert& c, const std::string& why) {
    r.all_match = false;
    r.notes.push_back(c.name + " at level " + std::to_string(c.level) + ": " + why);
}

inline size_t fiber_index(size_t n) {
    if (n == 0) throw out_of_range("fiber index needs a positive level");
    size_t p = 2;
    while ((n & 1) == 0) {
        n >>= 1;
        ++p;
    }
    return p;
}

inline bool const_pair(const ineq_cert& c) {
    return c.lhs.k == qdesc::kind::const_rat && c.rhs.k == qdesc::kind::const_rat &&
           c.lhs.children.empty() && c.rhs.children.empty();
}

}  // namespace detail

inline recheck_report recheck_trace(const certificate_trace& tr, const theta_ptr& t,
                                    const cf_params& p, int rounds = -1) {
    recheck_report rep;
    for (const level_record& rec : tr.levels) {
        for (const ineq_cert& c : rec.certs) {
            rep.total += 1;
            if (c.bits > 0) {
                cert_real lhs = eval_qdesc(c.lhs, t, p, tr.majorant);
                cert_real rhs = eval_qdesc(c.rhs, t, p, tr.majorant);
                cmp_result r = cmp_certified(lhs, rhs, rounds);
                rep.replayed += 1;
                if (r.ord != c.verdict)
                    detail::recheck_fail(rep, c, std::string("replayed verdict ") +
                                                     to_string(r.ord) + ", recorded " +
                                                     to_string(c.verdict));
                continue;
            }
            size_t n = c.level;
            if (c.name == "(4.11)") {
                size_t kstar = t->largest_q_index_le(p.h[n] - 1);
                bool okc = c.rhs.n == kstar && c.data.count("index") &&
                           c.data.at("index") == std::to_string(kstar);
                rep.exact += 1;
                if (!okc) detail::recheck_fail(rep, c, "smallest-angle index does not match");
                continue;
            }
            if (c.name == "(iii)") {
                std::vector<Int> cs = p.materialize(t, n, Int(1) << 16);
                std::vector<Int> diffs;
                for (size_t i = 0; i < cs.size(); ++i)
                    for (size_t j = 0; j < cs.size(); ++j)
                        if (i != j) diffs.push_back(cs[i] - cs[j]);
                std::set<Int> uniq(diffs.begin(), diffs.end());
                rep.exact += 1;
                if (uniq.size() != diffs.size()) {
                    detail::recheck_fail(rep, c, "repeated ordered difference");
                    continue;
                }
                std::vector<Int> ds(uniq.begin(), uniq.end());
                ds.push_back(Int(0));
                std::sort(ds.begin(), ds.end());
                Int sep = 0;
                for (size_t i = 1; i < ds.size(); ++i) {
                    Int g = ds[i] - ds[i - 1];
                    if (i == 1 || g < sep) sep = g;
                }
                if (Rat(sep) != c.lhs.value || Rat(2 * p.h[n - 1] - 1) != c.rhs.value ||
                    sep < 2 * p.h[n - 1] - 1)
                    detail::recheck_fail(rep, c, "separation does not replay");
                continue;
            }
            if (c.name == "(vi)") {
                size_t mod = detail::fiber_index(n);
                std::vector<Int> cs = p.materialize(t, n, Int(1) << 16);
                Int c0 = 0, c1 = 0, other = 0;
                for (const Int& v : cs) {
                    Int r = v % Int(mod);
                    if (r == 0)
                        c0 += 1;
                    else if (r == 1)
                        c1 += 1;
                    else
                        other += 1;
                }
                rep.exact += 1;
                Int mn = c0 < c1 ? c0 : c1;
                bool okc = other == 0 && Rat(mn) == c.lhs.value &&
                           Rat(3 * Int(cs.size()), 10) == c.rhs.value &&
                           10 * mn > 3 * Int(cs.size());
                if (rec.data.count("p") && rec.data.at("p") != std::to_string(mod)) okc = false;
                if (!okc) detail::recheck_fail(rep, c, "residue split does not replay");
                continue;
            }
            if (c.name == "(mass)") {
                Rat inc(p.h[n] - p.h[n - 1] * p.count(n), p.h[n]);
                rep.exact += 1;
                if (inc != c.lhs.value || c.rhs.value != Rat(1, 2) || inc < Rat(1, 2))
                    detail::recheck_fail(rep, c, "mass increment does not replay");
                continue;
            }
            if (c.name == "(i)") {
                Int cnt = p.count(n);
                rep.exact += 1;
                if (Rat(cnt) != c.lhs.value || cnt <= 1)
                    detail::recheck_fail(rep, c, "digit count does not replay");
                continue;
            }
            if (c.name == "(ii)") {
                Rat rhs(2 * (p.h[n - 1] - 1) + p.max_element(t, n));
                rep.exact += 1;
                if (Rat(p.h[n]) != c.lhs.value || rhs != c.rhs.value ||
                    Rat(p.h[n]) <= rhs)
                    detail::recheck_fail(rep, c, "height headroom does not replay");
                continue;
            }
            if (c.name == "(iv)") {
                rep.exact += 1;
                if (Rat(p.count(n)) != c.lhs.value || Rat(p.count(n - 1)) != c.rhs.value ||
                    p.count(n) <= p.count(n - 1))
                    detail::recheck_fail(rep, c, "count growth does not replay");
                continue;
            }
            if (c.name == "(growth)") {
                rep.exact += 1;
                if (!c.data.count("j")) {
                    detail::recheck_fail(rep, c, "missing element index");
                    continue;
                }
                size_t j = static_cast<size_t>(std::stoul(c.data.at("j")));
                Int val = p.element(t, n, Int(j));
                Int prev = p.element(t, n, Int(j) - 1);
                Int bound = 3 * (p.h[n - 1] + prev);
                size_t mod = detail::fiber_index(n);
                Int want = j % 2 == 1 ? Int(1) : Int(0);
                if (Rat(val) != c.lhs.value || Rat(bound) != c.rhs.value || val <= bound ||
                    val % Int(mod) != want)
                    detail::recheck_fail(rep, c, "element growth does not replay");
                continue;
            }
            if (detail::const_pair(c)) {
                rep.skipped += 1;
                Rat diff = c.verdict == ordering::greater ? c.lhs.value - c.rhs.value
                                                          : c.rhs.value - c.lhs.value;
                if (diff < 0)
                    detail::recheck_fail(rep, c, "stored constants contradict the verdict");
                continue;
            }
            rep.skipped += 1;
            rep.notes.push_back(c.name + " at level " + std::to_string(n) +
                                ": exact certificate with no replay rule");
        }
    }
    return rep;
}

}  // namespace cfrank
