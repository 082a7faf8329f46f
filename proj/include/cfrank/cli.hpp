#pragma once

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "builder_wellapprox.hpp"
#include "builders.hpp"
#include "builders_infinite.hpp"
#include "json_io.hpp"

// Command-line driver.  Four commands: construct writes parameter and
// certificate files, verify reruns checks against saved files, simulate runs
// tower experiments, report drives all three from one config document.
// Exit codes: 0 pass, 1 runtime or check failure, 2 usage or file format,
// 3 a comparison that could not be decided at the precision cap.

namespace cfrank {
namespace cli {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::vector<Int> int_list(const std::string& s) {
    std::vector<Int> out;
    if (s.empty()) return out;
    for (const std::string& p : split(s, ',')) out.push_back(int_from_str(p));
    return out;
}

// Sources: cf:a0,a1,...  periodic:pre|period  surd:P,D,Q  decimal:digits[,guard]
inline theta_ptr parse_theta(const std::string& spec) {
    size_t colon = spec.find(':');
    if (colon == std::string::npos)
        throw format_error("theta '" + spec + "': expected source:payload");
    std::string kind = spec.substr(0, colon);
    std::string body = spec.substr(colon + 1);
    if (kind == "cf") {
        std::vector<Int> as = int_list(body);
        if (as.empty()) throw format_error("theta: empty coefficient list");
        return theta::from_coeffs(as);
    }
    if (kind == "periodic") {
        std::vector<std::string> halves = split(body, '|');
        if (halves.size() != 2)
            throw format_error("theta: periodic needs pre|period");
        return theta::from_periodic(int_list(halves[0]), int_list(halves[1]));
    }
    if (kind == "surd") {
        std::vector<Int> pdq = int_list(body);
        if (pdq.size() != 3) throw format_error("theta: surd needs P,D,Q");
        return theta::from_surd(pdq[0], pdq[1], pdq[2]);
    }
    if (kind == "decimal") {
        std::vector<std::string> parts = split(body, ',');
        unsigned guard = 8;
        if (parts.size() == 2)
            guard = static_cast<unsigned>(std::stoul(parts[1]));
        else if (parts.size() != 1)
            throw format_error("theta: decimal needs digits[,guard]");
        return theta::from_decimal(parts[0], guard);
    }
    throw format_error("theta: unknown source '" + kind + "'");
}

struct construct_output {
    cf_params params;
    certificate_trace trace;
    std::optional<cf_params> variant;  // the two-cut companion when one exists
};

inline construct_output run_builder(const std::string& name, const theta_ptr& t,
                                    const build_config& cfg, const Int& twocut_n) {
    construct_output out;
    if (name == "thm41") {
        build_result r = build_problem2_general(t, cfg);
        out.params = std::move(r.params);
        out.trace = std::move(r.trace);
    } else if (name == "thm42") {
        build_result r = build_problem2_twocut(t, twocut_n, cfg);
        out.params = std::move(r.params);
        out.trace = std::move(r.trace);
    } else if (name == "thm45") {
        build_result r = build_problem1_wellapprox(t, cfg);
        out.params = std::move(r.params);
        out.trace = std::move(r.trace);
    } else if (name == "thmB") {
        infinite_rigid_result r = build_infinite_rigid(t, cfg);
        out.params = std::move(r.params);
        out.trace = std::move(r.trace);
        out.variant = std::move(r.two_cut_variant);
    } else if (name == "thmC") {
        build_result r = build_infinite_zerotype(t, cfg);
        out.params = std::move(r.params);
        out.trace = std::move(r.trace);
    } else {
        throw format_error("unknown builder '" + name + "'");
    }
    return out;
}

// ---------------------------------------------------------------------------
// construct

struct construct_options {
    std::string builder;
    std::string theta_spec;
    size_t levels = 6;
    size_t digit_cap = 4096;
    std::string twocut_n = "1024";
    std::string out_dir = ".";
};

inline int cmd_construct(const construct_options& opt) {
    theta_ptr t = parse_theta(opt.theta_spec);
    build_config cfg;
    cfg.levels = opt.levels;
    cfg.digit_cap = opt.digit_cap;
    construct_output r = run_builder(opt.builder, t, cfg, int_from_str(opt.twocut_n));
    r.trace.config["theta_spec"] = opt.theta_spec;
    r.trace.config["levels"] = std::to_string(opt.levels);
    r.trace.config["digit_cap"] = std::to_string(opt.digit_cap);
    if (opt.builder == "thm42") r.trace.config["twocut_n"] = opt.twocut_n;

    ojson pj = params_to_json(r.params);
    ojson cj = trace_to_json(r.trace);
    std::string pfile = opt.out_dir + "/params.json";
    std::string cfile = opt.out_dir + "/certificates.json";
    write_json_file(pfile, pj);
    write_json_file(cfile, cj);
    std::cout << "params: " << pfile << " sha=" << content_hash(pj) << "\n";
    std::cout << "certificates: " << cfile << " sha=" << content_hash(cj) << "\n";
    if (r.variant) {
        ojson vj = params_to_json(*r.variant);
        std::string vfile = opt.out_dir + "/params_twocut.json";
        write_json_file(vfile, vj);
        std::cout << "two-cut variant: " << vfile << " sha=" << content_hash(vj) << "\n";
    }
    size_t certs = 0;
    for (const level_record& lv : r.trace.levels) certs += lv.certs.size();
    std::cout << "levels built: " << r.params.levels() << ", certificates: " << certs << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// verify

struct verify_options {
    std::string params_path;
    std::string certs_path;
    std::string theta_spec;
    std::vector<std::string> checks;
    std::vector<long> torsion_moduli;
    std::string eps = "1/10";
    std::string window;     // "n:m"
    std::string candidate = "theta";
    std::string out_path;
};

namespace detail {

inline void report_check(ojson& results, bool& all_pass, const std::string& label,
                         const spectral_certificate& c) {
    results.push_back(spectral_to_json(c));
    results.back()["label"] = label;
    std::cout << label << ": " << (c.pass ? "pass" : "FAIL");
    if (c.window_only) std::cout << " (window only)";
    std::cout << "\n";
    if (!c.pass) all_pass = false;
}

}  // namespace detail

inline int cmd_verify(const verify_options& opt) {
    ojson pj = read_json_file(opt.params_path);
    cf_params p = params_from_json(pj);
    certificate_trace tr;
    bool have_trace = false;
    ojson cj;
    if (!opt.certs_path.empty()) {
        cj = read_json_file(opt.certs_path);
        tr = trace_from_json(cj);
        have_trace = true;
    }
    std::string theta_spec = opt.theta_spec;
    if (theta_spec.empty() && have_trace) {
        auto it = tr.config.find("theta_spec");
        if (it != tr.config.end()) theta_spec = it->second;
    }
    if (theta_spec.empty())
        throw format_error("verify: no --theta given and none recorded in the certificates");
    theta_ptr t = parse_theta(theta_spec);
    tail_majorant mj = have_trace ? tr.majorant : tail_majorant{};

    ojson report;
    report["format"] = report_format_tag;
    report["command"] = "verify";
    report["inputs"] = ojson::object();
    report["inputs"]["params"] = content_hash(pj);
    if (have_trace) report["inputs"]["certificates"] = content_hash(cj);
    report["theta"] = theta_spec;
    ojson results = ojson::array();
    bool all_pass = true;

    for (const std::string& name : opt.checks) {
        if (name == "summability") {
            detail::report_check(results, all_pass, name, check_summability(t, p, mj));
        } else if (name == "injectivity-dist" || name == "injectivity-arg") {
            bool arg = name == "injectivity-arg";
            for (size_t n = 1; n <= p.levels(); ++n) {
                spectral_certificate c = arg ? check_injective_arg(t, p, n, mj)
                                             : check_injective_dist(t, p, n, mj);
                detail::report_check(results, all_pass, name + " n=" + std::to_string(n), c);
            }
        } else if (name == "rigidity-shape") {
            detail::report_check(results, all_pass, name, check_rigidity_shape(p, t));
        } else if (name == "zerotype-shape") {
            detail::report_check(results, all_pass, name, check_zerotype_shape(p, t));
        } else if (name == "torsion" || name == "torsion-obstruction") {
            if (opt.torsion_moduli.empty())
                throw format_error("verify: torsion needs at least one --p modulus");
            for (long q : opt.torsion_moduli)
                detail::report_check(results, all_pass, "torsion p=" + std::to_string(q),
                                     check_torsion_obstruction(p, Int(q), t));
        } else if (name == "finite-order" || name == "finite-order-necessity") {
            try {
                detail::report_check(results, all_pass, name,
                                     check_finite_order_necessity(t, p));
            } catch (const not_applicable& e) {
                ojson entry;
                entry["label"] = name;
                entry["applicable"] = false;
                entry["reason"] = e.what();
                results.push_back(std::move(entry));
                std::cout << name << ": not applicable (" << e.what() << ")\n";
            }
        } else if (name == "replay") {
            if (!have_trace) throw format_error("verify: replay needs --certs");
            recheck_report rr = recheck_trace(tr, t, p);
            results.push_back(recheck_to_json(rr));
            results.back()["label"] = name;
            std::cout << name << ": " << (rr.all_match ? "pass" : "FAIL") << " ("
                      << rr.replayed << " replayed, " << rr.exact << " exact, " << rr.skipped
                      << " skipped)\n";
            if (!rr.all_match) all_pass = false;
        } else if (name == "eigen-window" || name == "window-eigen") {
            if (opt.window.empty()) throw format_error("verify: eigen-window needs --window n:m");
            std::vector<std::string> nm = split(opt.window, ':');
            if (nm.size() != 2) throw format_error("verify: --window wants n:m");
            size_t wn = std::stoul(nm[0]);
            size_t wm = std::stoul(nm[1]);
            circle_candidate cand = opt.candidate == "theta"
                                        ? candidate_irrational(t)
                                        : candidate_rational(rat_from_str(opt.candidate));
            eigen_window_report r =
                eigenvalue_window_test(t, p, cand, rat_from_str(opt.eps), wn, wm);
            results.push_back(eigen_window_to_json(r));
            results.back()["label"] = name;
            std::cout << name << " [" << wn << "," << wm << "] candidate=" << opt.candidate
                      << ": " << (r.pass ? "pass" : "FAIL") << " density=" << r.density.str()
                      << "\n";
            if (!r.pass) all_pass = false;
        } else {
            throw format_error("unknown check '" + name + "'");
        }
    }

    report["results"] = std::move(results);
    report["pass"] = all_pass;
    if (!opt.out_path.empty()) write_json_file(opt.out_path, report);
    return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// simulate

struct simulate_options {
    std::string params_path;
    std::string certs_path;
    std::string theta_spec;
    std::string plan;
    std::string rig_levels = "3,4,5";
    size_t k_lo = 2, k_hi = 4;
    size_t N = 0;  // 0 means all built levels
    size_t K = 0;
    size_t samples = 1000;
    uint64_t seed = 1;
    size_t gap_level = 2;
    std::string cylinder;  // "level:base"
    std::string times;
    std::string out_path;
    std::string csv_path;
};

inline int cmd_simulate(const simulate_options& opt) {
    ojson pj = read_json_file(opt.params_path);
    cf_params p = params_from_json(pj);
    certificate_trace tr;
    bool have_trace = false;
    ojson cj;
    if (!opt.certs_path.empty()) {
        cj = read_json_file(opt.certs_path);
        tr = trace_from_json(cj);
        have_trace = true;
    }
    std::string theta_spec = opt.theta_spec;
    if (theta_spec.empty() && have_trace) {
        auto it = tr.config.find("theta_spec");
        if (it != tr.config.end()) theta_spec = it->second;
    }
    if (theta_spec.empty())
        throw format_error("simulate: no --theta given and none recorded in the certificates");
    theta_ptr t = parse_theta(theta_spec);
    tail_majorant mj = have_trace ? tr.majorant : tail_majorant{};
    size_t N = opt.N ? opt.N : p.levels();
    size_t K = opt.K ? opt.K : p.levels();

    ojson report;
    report["format"] = report_format_tag;
    report["command"] = "simulate";
    report["plan"] = opt.plan;
    report["inputs"] = ojson::object();
    report["inputs"]["params"] = content_hash(pj);
    if (have_trace) report["inputs"]["certificates"] = content_hash(cj);
    report["theta"] = theta_spec;
    std::vector<profile_row> csv_rows;

    if (opt.plan == "rigidity") {
        ojson rows = ojson::array();
        for (const std::string& ns : split(opt.rig_levels, ',')) {
            size_t n = std::stoul(ns);
            if (n < 1 || n > p.levels() || p.count(n) < 2)
                throw out_of_range("rigidity plan: level " + ns + " has no return time");
            size_t NN = std::min(n + 2, p.levels());
            Int m = p.element(t, n, 1);
            cylinder A{n - 1, Int(0)};
            correlation_result c = correlation(t, p, A, A, m, NN);
            tower tw = make_tower(p, NN);
            Rat mu = tw.rung_weight * Rat(Int(cylinder_positions(t, p, A, NN).size()));
            ojson e;
            e["n"] = n;
            e["N"] = NN;
            e["m"] = int_str(m);
            e["value"] = rat_str(c.value);
            e["error_bound"] = rat_str(c.error_bound);
            e["mass"] = rat_str(mu);
            rows.push_back(std::move(e));
            csv_rows.push_back({m, c.value, c.error_bound});
            std::cout << "rigidity n=" << n << " m=" << m.str() << " value=" << c.value.str()
                      << " err=" << c.error_bound.str() << " mass=" << mu.str() << "\n";
        }
        report["rows"] = std::move(rows);
    } else if (opt.plan == "decay") {
        decay_report r = decay_profile(t, p, opt.k_lo, opt.k_hi, N);
        report["decay"] = decay_to_json(r);
        csv_rows = r.rows;
        for (size_t i = 0; i < r.windows.size(); ++i)
            std::cout << "decay k=" << r.windows[i] << " max=" << r.maxima[i].str() << "\n";
    } else if (opt.plan == "defect") {
        defect_report r = eigen_defect(t, p, K, opt.samples, opt.seed, mj);
        report["defect"] = defect_to_json(r);
        std::cout << "defect max=" << dec_string(r.max_defect, 6, 1)
                  << " bound=" << r.bound.str() << " samples=" << r.samples << " skipped="
                  << r.skipped << "\n";
    } else if (opt.plan == "gap") {
        gap_report r = injectivity_gap(t, p, opt.gap_level, K, mj);
        report["gap"] = gap_to_json(r);
        std::cout << "gap n=" << opt.gap_level << " certified=" << (r.certified ? "yes" : "no")
                  << "\n";
    } else if (opt.plan == "correlation") {
        if (opt.cylinder.empty() || opt.times.empty())
            throw format_error("correlation plan needs --cylinder level:base and --times");
        std::vector<std::string> lb = split(opt.cylinder, ':');
        if (lb.size() != 2) throw format_error("--cylinder wants level:base");
        cylinder A{std::stoul(lb[0]), int_from_str(lb[1])};
        std::vector<profile_row> rows = correlation_profile(t, p, A, int_list(opt.times), N);
        report["rows"] = profile_to_json(rows);
        csv_rows = rows;
        for (const profile_row& r : rows)
            std::cout << "m=" << r.m.str() << " value=" << r.value.str() << " err="
                      << r.error_bound.str() << "\n";
    } else if (opt.plan.empty()) {
        report["rows"] = ojson::array();
    } else {
        throw format_error("unknown plan '" + opt.plan + "'");
    }

    if (!opt.out_path.empty()) write_json_file(opt.out_path, report);
    if (!opt.csv_path.empty()) write_text_file(opt.csv_path, profile_to_csv(csv_rows));
    return 0;
}

// ---------------------------------------------------------------------------
// report: one config document drives construct + verify + simulate

struct report_options {
    std::string config_path;
    std::string out_dir;     // overrides config "out"
    std::string theta_spec;  // overrides config "theta"
    size_t levels = 0;       // overrides config "levels" when nonzero
};

inline int cmd_report(const report_options& opt) {
    ojson cfg = read_json_file(opt.config_path);
    if (!cfg.is_object()) throw format_error("config: expected a JSON object");
    std::string theta_spec =
        !opt.theta_spec.empty() ? opt.theta_spec : cfg.value("theta", "");
    std::string builder = cfg.value("builder", "");
    if (theta_spec.empty() || builder.empty())
        throw format_error("config: needs theta and builder");
    size_t levels = opt.levels ? opt.levels : cfg.value("levels", size_t(6));
    std::string out_dir = !opt.out_dir.empty() ? opt.out_dir : cfg.value("out", ".");

    construct_options co;
    co.builder = builder;
    co.theta_spec = theta_spec;
    co.levels = levels;
    co.digit_cap = cfg.value("digit_cap", size_t(4096));
    co.twocut_n = cfg.value("twocut_n", "1024");
    co.out_dir = out_dir;
    int rc = cmd_construct(co);
    if (rc != 0) return rc;

    ojson resolved = cfg;
    resolved["theta"] = theta_spec;
    resolved["levels"] = levels;
    resolved["out"] = out_dir;

    int worst = 0;
    if (cfg.contains("verify")) {
        const ojson& v = cfg.at("verify");
        verify_options vo;
        vo.params_path = out_dir + "/params.json";
        vo.certs_path = out_dir + "/certificates.json";
        vo.theta_spec = theta_spec;
        for (const auto& c : v.value("checks", ojson::array()))
            vo.checks.push_back(c.get<std::string>());
        for (const auto& q : v.value("torsion_p", ojson::array()))
            vo.torsion_moduli.push_back(q.get<long>());
        vo.eps = v.value("eps", "1/10");
        vo.window = v.value("window", "");
        vo.candidate = v.value("candidate", "theta");
        vo.out_path = out_dir + "/verify_report.json";
        worst = std::max(worst, cmd_verify(vo));
    }
    if (cfg.contains("simulate")) {
        for (const ojson& pl : cfg.at("simulate")) {
            simulate_options so;
            so.params_path = out_dir + "/params.json";
            so.certs_path = out_dir + "/certificates.json";
            so.theta_spec = theta_spec;
            so.plan = pl.value("plan", "");
            so.rig_levels = pl.value("n", std::string("3,4,5"));
            so.k_lo = pl.value("k_lo", size_t(2));
            so.k_hi = pl.value("k_hi", size_t(4));
            so.N = pl.value("N", size_t(0));
            so.K = pl.value("K", size_t(0));
            so.samples = pl.value("samples", size_t(1000));
            so.seed = pl.value("seed", uint64_t(1));
            so.gap_level = pl.value("level", size_t(2));
            so.cylinder = pl.value("cylinder", "");
            so.times = pl.value("times", "");
            so.out_path = out_dir + "/simulate_" + so.plan + ".json";
            if (pl.value("csv", false))
                so.csv_path = out_dir + "/simulate_" + so.plan + ".csv";
            worst = std::max(worst, cmd_simulate(so));
        }
    }

    ojson summary;
    summary["format"] = report_format_tag;
    summary["command"] = "report";
    summary["config"] = std::move(resolved);
    summary["inputs"] = ojson::object();
    summary["inputs"]["params"] = content_hash(read_json_file(out_dir + "/params.json"));
    summary["inputs"]["certificates"] =
        content_hash(read_json_file(out_dir + "/certificates.json"));
    summary["pass"] = worst == 0;
    write_json_file(out_dir + "/report.json", summary);
    std::cout << "report: " << out_dir << "/report.json"
              << " pass=" << (worst == 0 ? "yes" : "no") << "\n";
    return worst;
}

// ---------------------------------------------------------------------------

inline int run(int argc, char** argv) {
    CLI::App app{"exact rank-one system constructor and checker"};
    app.require_subcommand(1);

    construct_options co;
    CLI::App* c = app.add_subcommand("construct", "build parameters and certificates");
    c->add_option("--builder", co.builder, "thm41|thm42|thm45|thmB|thmC")->required();
    c->add_option("--theta", co.theta_spec, "cf:...|periodic:pre|period|surd:P,D,Q|decimal:...")
        ->required();
    c->add_option("--levels", co.levels, "levels to build");
    c->add_option("--digit-cap", co.digit_cap, "decimal digit budget per height");
    c->add_option("--cut", co.twocut_n, "target count for the two-cut builder");
    c->add_option("--out", co.out_dir, "output directory");

    verify_options vo;
    CLI::App* v = app.add_subcommand("verify", "recheck saved parameters");
    v->add_option("--in", vo.params_path, "params.json")->required();
    v->add_option("--certs", vo.certs_path, "certificates.json");
    v->add_option("--theta", vo.theta_spec, "theta source (default: recorded)");
    v->add_option("--check", vo.checks, "check names, repeatable")
        ->required()
        ->delimiter(',');
    v->add_option("--p", vo.torsion_moduli, "torsion moduli, repeatable");
    v->add_option("--eps", vo.eps, "window test tolerance, a fraction");
    v->add_option("--window", vo.window, "window test levels n:m");
    v->add_option("--candidate", vo.candidate, "'theta' or an exact fraction");
    v->add_option("--out", vo.out_path, "report file");

    simulate_options so;
    CLI::App* s = app.add_subcommand("simulate", "tower experiments");
    s->add_option("--in", so.params_path, "params.json")->required();
    s->add_option("--certs", so.certs_path, "certificates.json");
    s->add_option("--theta", so.theta_spec, "theta source (default: recorded)");
    s->add_option("--plan", so.plan, "rigidity|decay|defect|gap|correlation");
    s->add_option("--n", so.rig_levels, "rigidity levels, comma separated");
    s->add_option("--k-lo", so.k_lo, "first decay window");
    s->add_option("--k-hi", so.k_hi, "last decay window");
    s->add_option("--N", so.N, "tower level (default: all built)");
    s->add_option("--K", so.K, "truncation level (default: all built)");
    s->add_option("--samples", so.samples, "sample count");
    s->add_option("--seed", so.seed, "sampler seed");
    s->add_option("--level", so.gap_level, "gap base level");
    s->add_option("--cylinder", so.cylinder, "level:base");
    s->add_option("--times", so.times, "comma separated times");
    s->add_option("--out", so.out_path, "report file");
    s->add_option("--csv", so.csv_path, "row table file");

    report_options ro;
    CLI::App* r = app.add_subcommand("report", "run a whole experiment from a config");
    r->add_option("--config", ro.config_path, "experiment JSON")->required();
    r->add_option("--out", ro.out_dir, "output directory override");
    r->add_option("--theta", ro.theta_spec, "theta override");
    r->add_option("--levels", ro.levels, "levels override");

    try {
        app.parse(argc, argv);
        if (c->parsed()) return cmd_construct(co);
        if (v->parsed()) return cmd_verify(vo);
        if (s->parsed()) return cmd_simulate(so);
        if (r->parsed()) return cmd_report(ro);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const undecidable_comparison& e) {
        std::cerr << "undecidable: " << e.what() << "\n";
        return 3;
    } catch (const format_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace cli
}  // namespace cfrank
