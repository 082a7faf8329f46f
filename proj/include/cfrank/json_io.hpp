#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "simulator.hpp"
#include "trace.hpp"
#include "verifier.hpp"

// File formats.  All big integers and rationals travel as decimal strings;
// dyadics keep their exact mantissa and exponent with a readable decimal
// rendering alongside.  Serialization is field-order stable so identical
// inputs give byte-identical files.

namespace cfrank {

using ojson = nlohmann::ordered_json;

inline constexpr const char* params_format_tag = "cfrank-params-1";
inline constexpr const char* certs_format_tag = "cfrank-certs-1";
inline constexpr const char* report_format_tag = "cfrank-report-1";

// ---------------------------------------------------------------------------
// scalar codecs

inline std::string int_str(const Int& v) { return v.str(); }

inline Int int_from_str(const std::string& s) {
    try {
        return Int(s);
    } catch (const std::exception&) {
        throw format_error("bad integer literal '" + s + "'");
    }
}

inline std::string rat_str(const Rat& r) { return r.str(); }

inline Rat rat_from_str(const std::string& s) {
    try {
        return Rat(s);
    } catch (const std::exception&) {
        throw format_error("bad rational literal '" + s + "'");
    }
}

inline ojson dyadic_to_json(const dyadic& d) {
    ojson j;
    j["m"] = int_str(d.m);
    j["e"] = d.e;
    j["dec"] = dec_string(d, 6, 0);
    return j;
}

inline dyadic dyadic_from_json(const ojson& j) {
    if (!j.is_object() || !j.contains("m") || !j.contains("e"))
        throw format_error("dyadic: expected {m, e}");
    return {int_from_str(j.at("m").get<std::string>()), j.at("e").get<long>()};
}

// Exact one-line form "m*2^e" for certificate margins.
inline std::string dyadic_str(const dyadic& d) {
    return int_str(d.m) + "*2^" + std::to_string(d.e);
}

inline dyadic dyadic_from_str(const std::string& s) {
    size_t pos = s.find("*2^");
    if (pos == std::string::npos) throw format_error("bad dyadic literal '" + s + "'");
    Int m = int_from_str(s.substr(0, pos));
    long e = 0;
    try {
        e = std::stol(s.substr(pos + 3));
    } catch (const std::exception&) {
        throw format_error("bad dyadic exponent in '" + s + "'");
    }
    return {std::move(m), e};
}

template <typename Map>
inline ojson string_map_to_json(const Map& m) {
    ojson j = ojson::object();
    for (const auto& [k, v] : m) j[k] = v;
    return j;
}

inline std::map<std::string, std::string> string_map_from_json(const ojson& j) {
    std::map<std::string, std::string> out;
    if (j.is_null()) return out;
    if (!j.is_object()) throw format_error("expected a string map");
    for (const auto& [k, v] : j.items()) out[k] = v.get<std::string>();
    return out;
}

// ---------------------------------------------------------------------------
// parameters

// An explicit level is a plain array of decimal strings; a lazily walked
// level is an object carrying the walk data instead.
inline ojson level_set_to_json(const level_set& s) {
    if (is_walk(s)) {
        const walk_level& w = std::get<walk_level>(s);
        ojson j;
        j["kind"] = "walk";
        j["m_prev"] = w.m_prev;
        j["h_prev"] = int_str(w.h_prev);
        j["q_prev"] = int_str(w.q_prev);
        j["r"] = int_str(w.r);
        j["sign"] = w.sign;
        return j;
    }
    ojson els = ojson::array();
    for (const Int& c : std::get<explicit_level>(s)) els.push_back(int_str(c));
    return els;
}

inline level_set level_set_from_json(const ojson& j) {
    if (j.is_array()) {
        explicit_level v;
        for (const auto& e : j) v.push_back(int_from_str(e.get<std::string>()));
        return v;
    }
    if (j.is_object() && j.value("kind", "") == "walk") {
        walk_level w;
        w.m_prev = j.at("m_prev").get<size_t>();
        w.h_prev = int_from_str(j.at("h_prev").get<std::string>());
        w.q_prev = int_from_str(j.at("q_prev").get<std::string>());
        w.r = int_from_str(j.at("r").get<std::string>());
        w.sign = j.at("sign").get<int>();
        return w;
    }
    throw format_error("level set: expected an element array or a walk object");
}

inline ojson params_to_json(const cf_params& p) {
    ojson j;
    j["format"] = params_format_tag;
    ojson hs = ojson::array();
    for (const Int& h : p.h) hs.push_back(int_str(h));
    j["h"] = std::move(hs);
    ojson cs = ojson::array();
    for (const level_set& s : p.C) cs.push_back(level_set_to_json(s));
    j["C"] = std::move(cs);
    j["provenance"] = string_map_to_json(p.meta);
    return j;
}

inline cf_params params_from_json(const ojson& j) {
    if (!j.is_object() || j.value("format", "") != params_format_tag)
        throw format_error("parameters file: missing format tag '" +
                           std::string(params_format_tag) + "'");
    cf_params p;
    for (const auto& h : j.at("h")) p.h.push_back(int_from_str(h.get<std::string>()));
    for (const auto& c : j.at("C")) p.C.push_back(level_set_from_json(c));
    if (p.h.size() != p.C.size())
        throw format_error("parameters file: heights and level sets disagree in length");
    if (j.contains("provenance")) p.meta = string_map_from_json(j.at("provenance"));
    return p;
}

// ---------------------------------------------------------------------------
// certificates

inline ojson qdesc_to_json(const qdesc& q) {
    ojson j;
    j["kind"] = to_string(q.k);
    j["scale"] = rat_str(q.scale);
    j["value"] = rat_str(q.value);
    j["c"] = int_str(q.c);
    j["n"] = q.n;
    if (!q.children.empty()) {
        ojson ch = ojson::array();
        for (const qdesc& c : q.children) ch.push_back(qdesc_to_json(c));
        j["children"] = std::move(ch);
    }
    return j;
}

inline qdesc qdesc_from_json(const ojson& j) {
    if (!j.is_object() || !j.contains("kind")) throw format_error("quantity: expected {kind, ...}");
    qdesc q;
    q.k = qdesc_kind_from_string(j.at("kind").get<std::string>());
    q.scale = rat_from_str(j.at("scale").get<std::string>());
    q.value = rat_from_str(j.at("value").get<std::string>());
    q.c = int_from_str(j.at("c").get<std::string>());
    q.n = j.at("n").get<size_t>();
    if (j.contains("children"))
        for (const auto& c : j.at("children")) q.children.push_back(qdesc_from_json(c));
    return q;
}

inline ojson cert_to_json(const ineq_cert& c) {
    ojson j;
    j["level"] = c.level;
    j["name"] = c.name;
    j["lhs"] = qdesc_to_json(c.lhs);
    j["rhs"] = qdesc_to_json(c.rhs);
    j["margin"] = dyadic_str(c.margin);
    j["bits"] = c.bits;
    j["verdict"] = to_string(c.verdict);
    j["data"] = string_map_to_json(c.data);
    return j;
}

inline ineq_cert cert_from_json(const ojson& j) {
    ineq_cert c;
    c.level = j.at("level").get<size_t>();
    c.name = j.at("name").get<std::string>();
    c.lhs = qdesc_from_json(j.at("lhs"));
    c.rhs = qdesc_from_json(j.at("rhs"));
    c.margin = dyadic_from_str(j.at("margin").get<std::string>());
    c.bits = j.at("bits").get<long>();
    std::string v = j.at("verdict").get<std::string>();
    c.verdict = v == "less" ? ordering::less
                            : v == "greater" ? ordering::greater : ordering::undecidable;
    if (j.contains("data")) c.data = string_map_from_json(j.at("data"));
    return c;
}

inline ojson majorant_to_json(const tail_majorant& m) {
    ojson j;
    j["kind"] = to_string(m.k);
    j["L"] = m.L;
    j["offset"] = m.offset;
    ojson seq = ojson::array();
    for (size_t v : m.m_seq) seq.push_back(v);
    j["m_seq"] = std::move(seq);
    return j;
}

inline tail_majorant majorant_from_json(const ojson& j) {
    tail_majorant m;
    m.k = majorant_kind_from_string(j.at("kind").get<std::string>());
    m.L = j.at("L").get<size_t>();
    m.offset = j.at("offset").get<size_t>();
    if (j.contains("m_seq"))
        for (const auto& v : j.at("m_seq")) m.m_seq.push_back(v.get<size_t>());
    return m;
}

// The certificate list is flat, ordered by level; per-level phase notes sit
// beside it so the trace reassembles exactly.
inline ojson trace_to_json(const certificate_trace& tr) {
    ojson j;
    j["format"] = certs_format_tag;
    j["builder"] = tr.builder;
    j["theta"] = tr.theta_desc;
    j["config"] = string_map_to_json(tr.config);
    j["majorant"] = majorant_to_json(tr.majorant);
    ojson lv = ojson::array();
    ojson cs = ojson::array();
    for (const level_record& r : tr.levels) {
        ojson l;
        l["level"] = r.level;
        l["phase"] = r.phase;
        l["data"] = string_map_to_json(r.data);
        l["certs"] = r.certs.size();
        lv.push_back(std::move(l));
        for (const ineq_cert& c : r.certs) cs.push_back(cert_to_json(c));
    }
    j["levels"] = std::move(lv);
    j["certificates"] = std::move(cs);
    return j;
}

inline certificate_trace trace_from_json(const ojson& j) {
    if (!j.is_object() || j.value("format", "") != certs_format_tag)
        throw format_error("certificates file: missing format tag '" +
                           std::string(certs_format_tag) + "'");
    certificate_trace tr;
    tr.builder = j.value("builder", "");
    tr.theta_desc = j.value("theta", "");
    if (j.contains("config")) tr.config = string_map_from_json(j.at("config"));
    tr.majorant = majorant_from_json(j.at("majorant"));
    std::vector<size_t> counts;
    for (const auto& l : j.at("levels")) {
        level_record r;
        r.level = l.at("level").get<size_t>();
        r.phase = l.at("phase").get<std::string>();
        if (l.contains("data")) r.data = string_map_from_json(l.at("data"));
        counts.push_back(l.value("certs", size_t(0)));
        tr.levels.push_back(std::move(r));
    }
    const auto& cs = j.at("certificates");
    size_t pos = 0;
    for (size_t i = 0; i < tr.levels.size(); ++i)
        for (size_t k = 0; k < counts[i]; ++k) {
            if (pos >= cs.size())
                throw format_error("certificates file: fewer certificates than declared");
            tr.levels[i].certs.push_back(cert_from_json(cs.at(pos++)));
        }
    if (pos != cs.size())
        throw format_error("certificates file: more certificates than declared");
    return tr;
}

// ---------------------------------------------------------------------------
// verifier and simulator reports

inline ojson spectral_to_json(const spectral_certificate& c) {
    ojson j;
    j["check"] = to_string(c.kind);
    j["pass"] = c.pass;
    j["window_only"] = c.window_only;
    j["window"] = ojson::array({c.window_lo, c.window_hi});
    ojson ms = ojson::array();
    for (const level_margin& m : c.margins) {
        ojson e;
        e["level"] = m.level;
        e["value"] = dyadic_to_json(m.value);
        e["bits"] = m.bits;
        ms.push_back(std::move(e));
    }
    j["margins"] = std::move(ms);
    if (!c.tail_note.empty()) j["tail_note"] = c.tail_note;
    j["data"] = string_map_to_json(c.data);
    return j;
}

inline ojson eigen_window_to_json(const eigen_window_report& r) {
    ojson j;
    j["check"] = "eigenvalue-window";
    j["pass"] = r.pass;
    j["window"] = ojson::array({r.n, r.m});
    j["eps"] = rat_str(r.eps);
    j["total"] = int_str(r.total);
    j["best_count"] = r.best_count;
    j["density"] = rat_str(r.density);
    j["diameter"] = rat_str(r.diameter);
    ojson ms = ojson::array();
    for (const Int& v : r.members) ms.push_back(int_str(v));
    j["members"] = std::move(ms);
    j["data"] = string_map_to_json(r.data);
    return j;
}

inline ojson recheck_to_json(const recheck_report& r) {
    ojson j;
    j["check"] = "replay";
    j["total"] = r.total;
    j["replayed"] = r.replayed;
    j["exact"] = r.exact;
    j["skipped"] = r.skipped;
    j["all_match"] = r.all_match;
    ojson ns = ojson::array();
    for (const std::string& n : r.notes) ns.push_back(n);
    j["notes"] = std::move(ns);
    return j;
}

inline ojson profile_to_json(const std::vector<profile_row>& rows) {
    ojson arr = ojson::array();
    for (const profile_row& r : rows) {
        ojson e;
        e["m"] = int_str(r.m);
        e["value"] = rat_str(r.value);
        e["error_bound"] = rat_str(r.error_bound);
        arr.push_back(std::move(e));
    }
    return arr;
}

inline std::string profile_to_csv(const std::vector<profile_row>& rows) {
    std::ostringstream os;
    os << "m,value_num,value_den,err_num,err_den\n";
    for (const profile_row& r : rows)
        os << r.m.str() << ',' << numerator(r.value).str() << ',' << denominator(r.value).str()
           << ',' << numerator(r.error_bound).str() << ',' << denominator(r.error_bound).str()
           << '\n';
    return os.str();
}

inline ojson decay_to_json(const decay_report& r) {
    ojson j;
    j["check"] = "decay-window";
    j["base_mass"] = rat_str(r.base_mass);
    ojson ws = ojson::array();
    for (size_t i = 0; i < r.windows.size(); ++i) {
        ojson e;
        e["k"] = r.windows[i];
        e["max"] = rat_str(r.maxima[i]);
        e["error_at_max"] = rat_str(r.max_errors[i]);
        if (r.base_mass != 0) e["normalized"] = rat_str(r.maxima[i] / r.base_mass);
        ws.push_back(std::move(e));
    }
    j["windows"] = std::move(ws);
    j["rows"] = profile_to_json(r.rows);
    return j;
}

inline ojson defect_to_json(const defect_report& r) {
    ojson j;
    j["check"] = "eigenfunction-defect";
    j["max_defect"] = dyadic_to_json(r.max_defect);
    j["bound"] = rat_str(r.bound);
    j["pass"] = dy_to_rat(r.max_defect) <= r.bound;
    j["samples"] = r.samples;
    j["skipped"] = r.skipped;
    j["seed"] = r.seed;
    return j;
}

inline ojson gap_to_json(const gap_report& r) {
    ojson j;
    j["check"] = "injectivity-gap";
    j["vacuous"] = r.vacuous;
    j["witness_d"] = int_str(r.witness_d);
    j["gap_lo"] = dyadic_to_json(r.gap_lo);
    j["tail_hi"] = dyadic_to_json(r.tail_hi);
    j["certified"] = r.certified;
    j["bits"] = r.bits;
    return j;
}

// ---------------------------------------------------------------------------
// files and hashes

inline std::string render_json(const ojson& j) { return j.dump(2) + "\n"; }

inline std::string content_hash(const ojson& j) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(render_json(j));
    return os.str();
}

inline void write_json_file(const std::string& path, const ojson& j) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw format_error("cannot open '" + path + "' for writing");
    os << render_json(j);
    if (!os) throw format_error("write failed for '" + path + "'");
}

inline ojson read_json_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw format_error("cannot open '" + path + "'");
    try {
        return ojson::parse(is);
    } catch (const std::exception& e) {
        throw format_error("cannot parse '" + path + "': " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw format_error("cannot open '" + path + "' for writing");
    os << text;
    if (!os) throw format_error("write failed for '" + path + "'");
}

}  // namespace cfrank
