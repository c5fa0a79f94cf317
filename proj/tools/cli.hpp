#pragma once
// Command-line front end. Every subcommand writes JSON (or CSV) to the given
// streams; errors become one JSON object on the error stream and an exit
// code: 1 for invalid input, 2 for a tripped internal invariant.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bvatoms/bvatoms.hpp"

namespace bvatoms::cli {

namespace fs = std::filesystem;

inline constexpr const char* kRieszConvention = "pi^{d/2} 2^alpha Gamma(alpha/2) / Gamma((d-alpha)/2)";

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError(path.string() + ": cannot open for writing");
    f << text;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// "key=value" tokens of a multi-valued flag.
inline std::map<std::string, std::string> key_values(const std::vector<std::string>& items, const std::string& flag,
                                                     const std::vector<std::string>& allowed) {
    std::map<std::string, std::string> kv;
    for (const auto& it : items) {
        const auto eq = it.find('=');
        if (eq == std::string::npos || eq == 0) throw ValidationError(flag + ": expected key=value, got '" + it + "'");
        const std::string key = it.substr(0, eq);
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ValidationError(flag + ": unknown key '" + key + "'");
        kv[key] = it.substr(eq + 1);
    }
    for (const auto& k : allowed)
        if (!kv.count(k)) throw ValidationError(flag + ": missing " + k + "=");
    return kv;
}

inline double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
        throw ValidationError(what + ": malformed number '" + s + "'");
    return v;
}

inline Mode parse_mode(const std::string& mode, int n, const std::string& scheme) {
    if (mode == "exact") return Mode::exact();
    if (mode != "riemann") throw ValidationError("--mode must be exact or riemann");
    if (n < 1) throw ValidationError("riemann mode needs --n >= 1");
    if (scheme != "uniform" && scheme != "quantile") throw ValidationError("--scheme must be uniform or quantile");
    return Mode::riemann(n, scheme == "uniform" ? SamplingScheme::uniform : SamplingScheme::quantile);
}

inline json layers_json(const std::vector<Layer>& layers) {
    json arr = json::array();
    for (const auto& L : layers)
        arr.push_back({{"sigma", L.sigma}, {"a", L.a}, {"t", L.t}, {"perimeter", perimeter(L.omega)},
                       {"cells", L.omega.count()}});
    return arr;
}

inline json boxing_json(const Boxing& b, int dim, double threshold) {
    json cubes = json::array();
    for (const auto& bc : b.cubes) {
        json c = cube_to_json(bc.cube, dim);
        c["side"] = bc.cube.side(b.system.spec);
        c["cells"] = bc.cells;
        c["density"] = bc.density;
        c["boundary_mass"] = bc.boundary_mass;
        c["ratio"] = bc.ratio;
        cubes.push_back(std::move(c));
    }
    return {{"threshold", threshold},
            {"max_level", b.system.max_level},
            {"cubes", std::move(cubes)},
            {"constant", b.constant},
            {"partition_ok", b.partition_ok}};
}

inline std::string atoms_csv(const Decomposition& dec) {
    std::ostringstream o;
    o << "index,layer,sigma,l,level,q1,q2,q3,side_Q,side_S,lambda,faces,mass,boundary_mass\n";
    const int d = dec.spec.dim;
    for (std::size_t i = 0; i < dec.entries.size(); ++i) {
        const auto& e = dec.entries[i];
        const auto& a = e.atom;
        const int layer = a.provenance.layer;
        o << i << ',' << layer << ',' << (layer >= 0 ? dec.layers[static_cast<std::size_t>(layer)].sigma : 0) << ','
          << a.axis << ',' << a.cube.level;
        for (int k = 0; k < 3; ++k) o << ',' << (k < d ? std::to_string(a.cube.coords[k]) : std::string());
        o << ',' << fmt(a.cube.side(dec.spec)) << ',' << fmt(a.support.side) << ',' << fmt(e.lambda) << ','
          << a.faces.size() << ',' << fmt(atom_mass(a)) << ',' << fmt(a.boundary_mass) << '\n';
    }
    return o.str();
}

inline std::string summary_text(const Decomposition& dec) {
    const Summary& s = dec.summary;
    std::ostringstream o;
    o << "input digest        " << dec.digest << '\n';
    o << "mode                " << (dec.mode.is_exact() ? "exact" : "riemann n=" + std::to_string(dec.mode.n)) << '\n';
    o << "layers              " << dec.layers.size() << '\n';
    o << "atoms               " << s.atoms << '\n';
    o << "C'                  " << fmt(dec.cprime) << '\n';
    o << "max boxing constant " << fmt(s.max_boxing_constant) << '\n';
    o << "|Du|                " << fmt(s.tv) << '\n';
    o << "sum a*per           " << fmt(s.layered_perimeter) << '\n';
    o << "sum |lambda|        " << fmt(s.sum_abs_lambda) << '\n';
    o << "ratio               " << fmt(s.ratio) << '\n';
    o << "closed overcount    " << fmt(s.closed_overcount) << '\n';
    o << "reconstruction      " << fmt(s.reconstruction_residual) << '\n';
    for (const auto& w : s.weak_star) o << "weak-star " << w.field << std::string(10 - std::min<std::size_t>(9, w.field.size()), ' ') << fmt(w.residual) << '\n';
    return o.str();
}

inline std::string levels_csv(const Decomposition& dec) {
    std::ostringstream o;
    o << "layer,sigma,t,a,cells,cubes,perimeter,boxing_constant\n";
    for (std::size_t i = 0; i < dec.layers.size(); ++i) {
        const auto& L = dec.layers[i];
        o << i << ',' << L.sigma << ',' << fmt(L.t) << ',' << fmt(L.a) << ',' << L.cells << ',' << L.cubes << ','
          << fmt(L.perimeter) << ',' << fmt(L.boxing_constant) << '\n';
    }
    return o.str();
}

inline HeatEvalPlan plan_for(const GridSpec& s, const Atom& a, const std::optional<double>& rho,
                             const std::optional<double>& margin, const std::optional<double>& eps,
                             const std::optional<double>& tmin, const std::optional<double>& tmax) {
    HeatEvalPlan p = HeatEvalPlan::standard(s.h, a.support.side);
    if (rho) p.rho = *rho;
    if (margin) p.margin = *margin;
    if (eps) p.eps_trunc = *eps;
    if (tmin) p.t_min = *tmin;
    if (tmax) p.t_max = *tmax;
    p.validate();
    return p;
}

inline std::vector<std::string> corpus_files(const std::string& dir) {
    if (!fs::is_directory(dir)) throw ValidationError(dir + ": not a directory");
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto ext = e.path().extension().string();
        if (e.is_regular_file() && (ext == ".bvgrid" || ext == ".pgm")) files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ValidationError(dir + ": no .bvgrid or .pgm files");
    return files;
}

inline json distribution_json(const Distribution& d) {
    return {{"count", d.count}, {"min", d.min}, {"median", d.median}, {"max", d.max}};
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Atomic decomposition of discrete BV functions"};
    app.require_subcommand(1);
    unsigned threads = 1;
    app.add_option("--threads", threads, "worker threads (results do not depend on it)")->check(CLI::Range(1u, 1024u));

    // tv
    std::string tv_input;
    auto* tv = app.add_subcommand("tv", "total variation and per-axis breakdown");
    tv->add_option("input", tv_input, "BVGRID or PGM file")->required();

    // coarea
    std::string co_input, co_mode = "exact", co_scheme = "uniform";
    int co_n = 0;
    std::vector<int> co_sweep;
    auto* co = app.add_subcommand("coarea", "layer decomposition");
    co->add_option("input", co_input)->required();
    co->add_option("--mode", co_mode, "exact | riemann");
    co->add_option("--n", co_n, "levels per sign (riemann)");
    co->add_option("--scheme", co_scheme, "uniform | quantile");
    co->add_option("--sweep", co_sweep, "riemann level counts; emits a convergence CSV")->delimiter(',');

    // boxing
    std::string bx_input;
    double bx_threshold = 0.0;
    auto* bx = app.add_subcommand("boxing", "dyadic boxing of {u > threshold}");
    bx->add_option("input", bx_input)->required();
    bx->add_option("--threshold", bx_threshold)->required();

    // decompose
    std::string dc_input, dc_mode = "exact", dc_scheme = "uniform", dc_cprime = "auto", dc_out;
    int dc_n = 0;
    bool dc_plot = false, dc_no_weak = false;
    auto* dc = app.add_subcommand("decompose", "full atomic decomposition");
    dc->add_option("input", dc_input)->required();
    dc->add_option("--mode", dc_mode, "exact | riemann");
    dc->add_option("--n", dc_n, "levels per sign (riemann)");
    dc->add_option("--scheme", dc_scheme, "uniform | quantile");
    dc->add_option("--cprime", dc_cprime, "auto or a positive value");
    dc->add_option("-o,--out", dc_out, "output directory")->required();
    dc->add_flag("--plotdata", dc_plot, "also write levels.csv");
    dc->add_flag("--no-weak-star", dc_no_weak, "skip the weak-star residuals");

    // verify-atoms
    std::string va_input, va_out;
    bool va_refine = false;
    std::optional<double> va_rho, va_margin, va_eps, va_tmin, va_tmax;
    auto* va = app.add_subcommand("verify-atoms", "re-verify every atom of a decomposition artifact");
    va->add_option("input", va_input, "decomposition JSON")->required();
    va->add_option("-o,--out", va_out, "directory for report.json and atoms_report.csv (default: stdout JSON)");
    va->add_flag("--refine", va_refine, "run the heat refinement study per atom");
    va->add_option("--rho", va_rho);
    va->add_option("--margin", va_margin);
    va->add_option("--eps-trunc", va_eps);
    va->add_option("--t-min", va_tmin);
    va->add_option("--t-max", va_tmax);

    // diagnose
    std::string dg_input;
    bool dg_gn = false;
    std::vector<std::string> dg_trace, dg_constants;
    bool dg_no_heat = false;
    auto* dg = app.add_subcommand("diagnose", "Gagliardo-Nirenberg, trace and constants probes");
    dg->add_option("input", dg_input, "grid file (for --gn and --trace)");
    dg->add_flag("--gn", dg_gn);
    dg->add_option("--trace", dg_trace, "alpha=<v> nu=<file>")->expected(2);
    dg->add_option("--constants", dg_constants, "corpus=<dir>")->expected(1);
    dg->add_flag("--no-heat", dg_no_heat, "skip heat margins in --constants");

    // gen-corpus
    std::string gc_kind, gc_out;
    std::uint64_t gc_seed = 0;
    std::size_t gc_count = 1;
    CorpusParams gc;
    auto* gcmd = app.add_subcommand("gen-corpus", "seeded synthetic inputs");
    gcmd->add_option("--kind", gc_kind, "blobs | union-of-cubes | smooth-bumps | percolation")->required();
    gcmd->add_option("--seed", gc_seed)->required();
    gcmd->add_option("--count", gc_count)->required();
    gcmd->add_option("--size", gc.size)->required();
    gcmd->add_option("--dim", gc.dim);
    gcmd->add_option("--p", gc.p, "percolation probability");
    gcmd->add_option("--levels", gc.levels, "smooth-bumps quantisation levels");
    gcmd->add_option("--noise", gc.noise, "smooth-bumps noise in quantisation steps");
    gcmd->add_option("-o,--out", gc_out)->required();

    auto fail = [&](const char* kind, const std::string& msg, int code) {
        err << json{{"error", kind}, {"message", msg}, {"exit_code", code}}.dump() << '\n';
        return code;
    };

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp&) {
            out << app.help();
            return 0;
        } catch (const CLI::CallForAllHelp&) {
            out << app.help("", CLI::AppFormatMode::All);
            return 0;
        } catch (const CLI::ParseError& e) {
            return fail("usage", e.what(), 1);
        }

        if (tv->parsed()) {
            const auto u = read_grid_file(tv_input);
            const auto du = gradient_measure(u);
            json comps = json::array();
            for (int l = 0; l < u.spec().dim; ++l) {
                CompensatedSum c;
                for (const auto& fw : du.component(l)) c.add(std::abs(fw.weight));
                comps.push_back(c.value());
            }
            out << dump({{"spec", spec_to_json(u.spec())},
                         {"tv", total_variation(du)},
                         {"components", std::move(comps)},
                         {"faces", du.size()},
                         {"isotropic_tv", isotropic_total_variation(u)}});
            return 0;
        }

        if (co->parsed()) {
            const auto u = read_grid_file(co_input);
            if (!co_sweep.empty()) {
                const auto du = gradient_measure(u);
                const double tvv = total_variation(du);
                const auto fields = builtin_fields(u.spec());
                std::ostringstream o;
                o << "n,layers,layered_perimeter,tv,relative_gap,max_pairing_residual\n";
                for (int n : co_sweep) {
                    const auto layers = riemann_sample(u, n, parse_mode("riemann", n, co_scheme).scheme);
                    const auto lg = layered_gradient(u.spec(), layers);
                    double worst = 0.0;
                    for (const auto& f : fields)
                        worst = std::max(worst, std::abs(pair(du, f.eval) - pair(lg, f.eval)) / (1.0 + f.sup_norm * tvv));
                    const double lp = layered_perimeter(layers);
                    o << n << ',' << layers.size() << ',' << fmt(lp) << ',' << fmt(tvv) << ','
                      << fmt(std::abs(lp - tvv) / tvv) << ',' << fmt(worst) << '\n';
                }
                out << o.str();
                return 0;
            }
            const Mode mode = parse_mode(co_mode, co_n, co_scheme);
            out << dump(layers_json(make_layers(u, mode)));
            return 0;
        }

        if (bx->parsed()) {
            const auto u = read_grid_file(bx_input);
            const CellSet set = superlevel(u, bx_threshold);
            require(!set.empty(), "threshold " + fmt(bx_threshold) + " leaves an empty set");
            out << dump(boxing_json(box_set(set), u.spec().dim, bx_threshold));
            return 0;
        }

        if (dc->parsed()) {
            const auto u = read_grid_file(dc_input);
            const Mode mode = parse_mode(dc_mode, dc_n, dc_scheme);
            CprimePolicy policy;
            if (dc_cprime != "auto") {
                policy = CprimePolicy::fixed_value(parse_double(dc_cprime, "--cprime"));
                require(*policy.fixed > 0.0, "--cprime must be positive");
            }
            const auto dec = decompose(u, mode, policy, {threads, !dc_no_weak});
            fs::create_directories(dc_out);
            write_text(fs::path(dc_out) / "decomposition.json", dump(decomposition_to_json(dec)));
            write_text(fs::path(dc_out) / "atoms.csv", atoms_csv(dec));
            const std::string text = summary_text(dec);
            write_text(fs::path(dc_out) / "summary.txt", text);
            if (dc_plot) write_text(fs::path(dc_out) / "levels.csv", levels_csv(dec));
            out << text;
            return 0;
        }

        if (va->parsed()) {
            const auto dec = decomposition_from_json(read_json_file(va_input));
            const auto reps = parallel_map(dec.entries.size(), threads, [&](std::size_t i) {
                const Atom& a = dec.entries[i].atom;
                VerifyOptions opt;
                opt.plan = plan_for(dec.spec, a, va_rho, va_margin, va_eps, va_tmin, va_tmax);
                opt.refinement_study = va_refine;
                return verify_atom(dec.spec, a, opt);
            });
            std::size_t pass = 0;
            double worst_margin = 0.0, worst_mass = 0.0;
            json rows = json::array();
            std::ostringstream csv;
            csv << "index,l,level,q1,q2,q3,side_S,mass,signed_mass,heat_sup,heat_budget,heat_margin,heat_movement,"
                   "support_ok,cancellation_ok,heat_ok,mass_ok,heat_stable\n";
            const int d = dec.spec.dim;
            for (std::size_t i = 0; i < reps.size(); ++i) {
                const auto& r = reps[i];
                const auto& a = dec.entries[i].atom;
                pass += r.all_ok();
                worst_margin = std::max(worst_margin, r.heat_margin);
                worst_mass = std::max(worst_mass, r.mass);
                rows.push_back({{"index", i},
                                {"l", a.axis},
                                {"Q", cube_to_json(a.cube, d)},
                                {"mass", r.mass},
                                {"signed_mass", r.signed_mass},
                                {"heat_sup", r.heat_sup},
                                {"heat_budget", r.heat_budget},
                                {"heat_margin", r.heat_margin},
                                {"heat_movement", r.heat_movement},
                                {"support_ok", r.support_ok},
                                {"cancellation_ok", r.cancellation_ok},
                                {"heat_ok", r.heat_ok},
                                {"mass_ok", r.mass_ok},
                                {"heat_stable", r.heat_stable}});
                csv << i << ',' << a.axis << ',' << a.cube.level;
                for (int k = 0; k < 3; ++k) csv << ',' << (k < d ? std::to_string(a.cube.coords[k]) : std::string());
                csv << ',' << fmt(a.support.side) << ',' << fmt(r.mass) << ',' << fmt(r.signed_mass) << ','
                    << fmt(r.heat_sup) << ',' << fmt(r.heat_budget) << ',' << fmt(r.heat_margin) << ','
                    << fmt(r.heat_movement) << ',' << r.support_ok << ',' << r.cancellation_ok << ',' << r.heat_ok
                    << ',' << r.mass_ok << ',' << r.heat_stable << '\n';
            }
            const json report = {{"digest", dec.digest},
                                 {"atoms", reps.size()},
                                 {"passed", pass},
                                 {"all_ok", pass == reps.size()},
                                 {"refinement_study", va_refine},
                                 {"worst_heat_margin", worst_margin},
                                 {"worst_mass", worst_mass},
                                 {"report", std::move(rows)}};
            if (!va_out.empty()) {
                fs::create_directories(va_out);
                write_text(fs::path(va_out) / "report.json", dump(report));
                write_text(fs::path(va_out) / "atoms_report.csv", csv.str());
                out << dump({{"atoms", reps.size()}, {"passed", pass}, {"all_ok", pass == reps.size()}});
            } else {
                out << dump(report);
            }
            return 0;
        }

        if (dg->parsed()) {
            const int chosen = static_cast<int>(dg_gn) + static_cast<int>(!dg_trace.empty()) +
                               static_cast<int>(!dg_constants.empty());
            require(chosen == 1, "diagnose needs exactly one of --gn, --trace, --constants");
            json j{{"riesz_normalization", kRieszConvention}};
            if (dg_gn) {
                require(!dg_input.empty(), "--gn needs an input grid");
                const auto u = read_grid_file(dg_input);
                j["probe"] = "gn";
                j["gn_ratio"] = gn_ratio(u);
                j["bound"] = 1.0 / (2.0 * u.spec().dim);
            } else if (!dg_trace.empty()) {
                require(!dg_input.empty(), "--trace needs an input grid");
                const auto kv = key_values(dg_trace, "--trace", {"alpha", "nu"});
                const double alpha = parse_double(kv.at("alpha"), "--trace alpha");
                const auto u = read_grid_file(dg_input);
                const auto nu = read_frostman_file(kv.at("nu"));
                if (nu.dim != u.spec().dim)
                    throw ValidationError(kv.at("nu") + ": Frostman dimension " + std::to_string(nu.dim) +
                                          " does not match grid dimension " + std::to_string(u.spec().dim));
                const auto r = trace_ratio(u, alpha, nu);
                j["probe"] = "trace";
                j["alpha"] = alpha;
                j["trace_ratio"] = r.ratio;
                j["growth_ok"] = r.growth_ok;
                j["growth_worst"] = r.growth_worst;
                if (!r.growth_ok) j["warning"] = "Frostman growth check failed";
            } else {
                const auto kv = key_values(dg_constants, "--constants", {"corpus"});
                std::vector<GridFunction> corpus;
                std::vector<std::string> names;
                for (const auto& f : corpus_files(kv.at("corpus"))) {
                    corpus.push_back(read_grid_file(f));
                    names.push_back(fs::path(f).filename().string());
                }
                ConstantsOptions opt;
                opt.threads = threads;
                opt.heat = !dg_no_heat;
                const auto r = constants_report(corpus, opt);
                j["probe"] = "constants";
                j["items"] = r.items;
                j["files"] = names;
                j["boxing_constant"] = distribution_json(r.boxing_constant);
                j["lambda_ratio"] = distribution_json(r.lambda_ratio);
                j["gn_ratio"] = distribution_json(r.gn_ratio);
                j["heat_margin"] = distribution_json(r.heat_margin);
                j["cprime_max"] = r.cprime_max;
            }
            out << dump(j);
            return 0;
        }

        if (gcmd->parsed()) {
            const auto kind = parse_corpus_kind(gc_kind);
            require(gc_count >= 1 && gc_count <= 100000, "--count must lie in [1, 100000]");
            const auto paths = write_corpus(gc_out, kind, gc_seed, gc_count, gc);
            json files = json::array();
            for (const auto& p : paths) files.push_back(fs::path(p).filename().string());
            out << dump({{"kind", corpus_kind_name(kind)},
                         {"seed", gc_seed},
                         {"count", gc_count},
                         {"size", gc.size},
                         {"dim", gc.dim},
                         {"files", std::move(files)}});
            return 0;
        }
        return fail("usage", "no subcommand", 1);
    } catch (const ValidationError& e) {
        return fail("validation", e.what(), 1);
    } catch (const json::exception& e) {
        return fail("validation", std::string("malformed JSON artifact: ") + e.what(), 1);
    } catch (const fs::filesystem_error& e) {
        return fail("validation", e.what(), 1);
    } catch (const InvariantViolation& e) {
        return fail("invariant", e.what(), 2);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 2);
    }
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"bvatoms"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace bvatoms::cli
