#include <CLI11.hpp>
#include <iostream>

#include "distflag/document.hpp"
#include "distflag/errors.hpp"

using namespace distflag;
using json = nlohmann::ordered_json;

namespace {

struct Options {
    std::uint64_t seed = 0;
    int trials = 5;
    double tolerance = 1e-9;
    int max_steps = 16;
    std::string route = "deprolong-first";
    std::string format = "text";
    std::vector<std::string> point;
    std::vector<std::string> param;
    std::string doc_path;
};

SamplerConfig sampler(const Options& o, const Document& doc) {
    SamplerConfig cfg;
    cfg.seed = o.seed;
    cfg.trials = doc.sampler_trials.value_or(o.trials);
    cfg.float_tolerance = doc.sampler_tolerance.value_or(o.tolerance);
    if (cfg.trials < 1) input_error("SchemaError", "--trials must be at least 1");
    if (!(cfg.float_tolerance > 0)) input_error("SchemaError", "--tolerance must be positive");
    if (o.max_steps < 1) input_error("SchemaError", "--max-steps must be at least 1");
    return cfg;
}

ParamPins pins_of(const Options& o) {
    ParamPins pins;
    for (const auto& kv : o.param) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) input_error("SchemaError", "--param expects name=value");
        pins[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return pins;
}

Point point_overrides(const Options& o) {
    Point p;
    for (const auto& kv : o.point) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) input_error("SchemaError", "--point expects coord=value");
        p[kv.substr(0, eq)] = Rational::from_string(kv.substr(eq + 1));
    }
    return p;
}

void apply_point(Chart& chart, const Point& p) {
    for (const auto& [k, v] : p) {
        if (std::find(chart.coords.begin(), chart.coords.end(), k) == chart.coords.end())
            input_error("SchemaError", "--point coordinate '" + k + "' not in chart");
        chart.base_point[k] = v;
    }
}

PipelineOptions pipeline_options(const Options& o) {
    PipelineOptions po;
    po.max_steps = o.max_steps;
    if (o.route == "deprolong-first") po.route = PipelineOptions::Route::deprolong_first;
    else if (o.route == "restrict-first") po.route = PipelineOptions::Route::restrict_first;
    else input_error("SchemaError", "--route must be deprolong-first or restrict-first");
    return po;
}

void emit(const Options& o, const json& j, const std::string& text) {
    if (o.format == "json") std::cout << j.dump(2) << "\n";
    else std::cout << text;
}

// Rank-2 distribution for a document: distributions verbatim (with --point
// applied), systems through the Cauchy-characteristic reduction.
Distribution doc_rank2(const Document& doc, const Options& o, const SamplerConfig& cfg,
                       ReductionReport* rep_out = nullptr) {
    if (doc.kind == Document::Kind::distribution) {
        Distribution d = build_distribution(doc, cfg, pins_of(o));
        apply_point(d.chart, point_overrides(o));
        for (auto& g : d.gens) g.chart = d.chart;
        return d;
    }
    if (doc.kind == Document::Kind::system) {
        PdeSystem sys = build_system(doc, cfg, pins_of(o));
        for (const auto& [k, v] : point_overrides(o)) sys.base_point[k] = v;
        ReductionReport rep = reduce_system(sys, cfg);
        Distribution red = *rep.reduced;
        if (rep_out) *rep_out = std::move(rep);
        return red;
    }
    input_error("SchemaError", "this command needs a distribution or system document");
}

Distribution doc_cartan_or_dist(const Document& doc, const Options& o, const SamplerConfig& cfg) {
    if (doc.kind == Document::Kind::distribution) {
        Distribution d = build_distribution(doc, cfg, pins_of(o));
        apply_point(d.chart, point_overrides(o));
        for (auto& g : d.gens) g.chart = d.chart;
        return d;
    }
    if (doc.kind == Document::Kind::system) {
        PdeSystem sys = build_system(doc, cfg, pins_of(o));
        while (sys.free_top().size() != 1) sys = prolong_system(sys, cfg);
        return cartan_distribution(sys, cfg);
    }
    input_error("SchemaError", "this command needs a distribution or system document");
}

std::string growth_str(const std::vector<int>& g) {
    std::string s = "(";
    for (size_t i = 0; i < g.size(); ++i) s += (i ? "," : "") + std::to_string(g[i]);
    return s + ")";
}

int cmd_flag(const Options& o) {
    Document doc = load_document(o.doc_path);
    SamplerConfig cfg = sampler(o, doc);
    Distribution d = doc_cartan_or_dist(doc, o, cfg);
    Flag w = derived_flag(d, FlagMode::weak, o.max_steps, cfg);
    Flag s = derived_flag(d, FlagMode::strong, o.max_steps, cfg);
    json j;
    j["chart_dim"] = d.dim();
    j["rank"] = d.rank();
    j["weak"] = flag_to_json(w);
    j["strong"] = flag_to_json(s);
    std::ostringstream t;
    t << "rank " << d.rank() << " distribution on " << d.dim() << "-chart\n"
      << "weak growth   " << growth_str(w.growth) << "  reduced " << growth_str(w.reduced_growth)
      << "\n"
      << "strong growth " << growth_str(s.growth) << "  reduced " << growth_str(s.reduced_growth)
      << "\n";
    emit(o, j, t.str());
    return 0;
}

int cmd_cauchy(const Options& o) {
    Document doc = load_document(o.doc_path);
    SamplerConfig cfg = sampler(o, doc);
    Distribution d = doc_cartan_or_dist(doc, o, cfg);
    CauchyResult ch = cauchy_characteristics_full(d, cfg);
    json j;
    j["rank"] = ch.fields.size();
    json fs = json::array(), gb = json::array();
    for (const auto& f : ch.fields) {
        json row = json::array();
        for (const auto& c : f.coeffs) row.push_back(c.str());
        fs.push_back(row);
    }
    for (const auto& a : ch.in_generator_basis) {
        json row = json::array();
        for (const auto& c : a) row.push_back(c.str());
        gb.push_back(row);
    }
    j["fields"] = fs;
    j["in_generator_basis"] = gb;
    std::ostringstream t;
    t << "Cauchy characteristic space has rank " << ch.fields.size() << "\n";
    for (size_t i = 0; i < ch.fields.size(); ++i) {
        t << "  field: [";
        for (size_t k = 0; k < ch.fields[i].coeffs.size(); ++k)
            t << (k ? ", " : "") << ch.fields[i].coeffs[k].str();
        t << "]\n  over generators: [";
        for (size_t k = 0; k < ch.in_generator_basis[i].size(); ++k)
            t << (k ? ", " : "") << ch.in_generator_basis[i][k].str();
        t << "]\n";
    }
    emit(o, j, t.str());
    return 0;
}

int cmd_reduce(const Options& o) {
    Document doc = load_document(o.doc_path);
    SamplerConfig cfg = sampler(o, doc);
    if (doc.kind != Document::Kind::system)
        input_error("SchemaError", "reduce needs a system document");
    PdeSystem sys = build_system(doc, cfg, pins_of(o));
    for (const auto& [k, v] : point_overrides(o)) sys.base_point[k] = v;
    ReductionReport rep = reduce_system(sys, cfg);
    emit(o, report_to_json(rep), report_to_text(rep));
    return 0;
}

int cmd_deprolong(const Options& o) {
    Document doc = load_document(o.doc_path);
    SamplerConfig cfg = sampler(o, doc);
    Distribution d = doc_rank2(doc, o, cfg);
    DeprolongStep st = deprolong_full(d, cfg);
    Flag w = derived_flag(st.result, FlagMode::weak, o.max_steps, cfg);
    json j;
    j["sliced_coordinate"] = st.sliced_coord;
    j["slice_value"] = st.slice_value.str();
    j["chart_dim"] = st.result.dim();
    j["chart"] = st.result.chart.coords;
    json gens = json::array();
    for (const auto& g : st.result.gens) {
        json row = json::array();
        for (const auto& c : g.coeffs) row.push_back(c.str());
        gens.push_back(row);
    }
    j["generators"] = gens;
    j["weak"] = flag_to_json(w);
    std::ostringstream t;
    t << "deprolonged along " << st.sliced_coord << " = " << st.slice_value.str() << " to "
      << st.result.dim() << "-chart; weak growth " << growth_str(w.growth) << "\n";
    for (const auto& g : st.result.gens) {
        t << "  [";
        for (size_t k = 0; k < g.coeffs.size(); ++k) t << (k ? ", " : "") << g.coeffs[k].str();
        t << "]\n";
    }
    emit(o, j, t.str());
    return 0;
}

int run_analysis(const Options& o, ReductionReport& rep) {
    Document doc = load_document(o.doc_path);
    SamplerConfig cfg = sampler(o, doc);
    PipelineOptions po = pipeline_options(o);
    ReductionReport partial;
    Distribution d = doc_rank2(doc, o, cfg, &partial);
    for (const auto& s : doc.integrals)
        po.candidate_integrals.push_back(parse_on_chart(s, d.chart.coords, doc, pins_of(o)));
    rep = analyze_distribution(d, po, cfg, std::move(partial));
    return 0;
}

int cmd_analyze(const Options& o) {
    ReductionReport rep;
    run_analysis(o, rep);
    emit(o, report_to_json(rep), report_to_text(rep));
    return 0;
}

int cmd_classify(const Options& o) {
    ReductionReport rep;
    run_analysis(o, rep);
    json j;
    if (rep.has_system) j["type"] = rep.profile.type_string;
    j["case"] = rep.case_label;
    j["verdict"] = rep.verdict.str();
    j["first_integral_count"] = rep.first_integral_count;
    std::ostringstream t;
    if (rep.has_system) t << "type " << rep.profile.type_string << "  ";
    t << "case " << rep.case_label << "  " << rep.verdict.str() << "  integrals "
      << rep.first_integral_count << "\n";
    emit(o, j, t.str());
    return 0;
}

int cmd_carnot(const Options& o, bool leaf) {
    Document doc = load_document(o.doc_path);
    SamplerConfig cfg = sampler(o, doc);
    Distribution d = doc_rank2(doc, o, cfg);
    CarnotAlgebra alg = carnot_algebra(d, point_overrides(o), leaf, cfg);
    alg.validate();
    json j = carnot_to_json(alg);
    std::ostringstream t;
    t << "carnot dims " << growth_str(alg.dims) << "\n";
    for (const auto& [ij, v] : alg.brackets) {
        bool all_zero = true;
        for (const auto& x : v)
            if (!x.is_zero()) all_zero = false;
        if (all_zero) continue;
        t << "  [" << alg.labels[ij.first] << "," << alg.labels[ij.second] << "] =";
        for (size_t k = 0; k < v.size(); ++k) {
            if (v[k].is_zero()) continue;
            t << " ";
            if (!v[k].is_one()) t << v[k].str() << "*";
            t << alg.labels[k];
        }
        t << "\n";
    }
    emit(o, j, t.str());
    return 0;
}

int cmd_monge(const Options& o) {
    Document doc = load_document(o.doc_path);
    SamplerConfig cfg = sampler(o, doc);
    Distribution d = doc_rank2(doc, o, cfg);
    MongeInvariants inv = monge_invariants(d, cfg);
    json j;
    j["theta0"] = {{"nonzero", inv.nonzero0}, {"expr", inv.theta0.str()}};
    j["theta1"] = {{"nonzero", inv.nonzero1}, {"expr", inv.theta1.str()}};
    j["theta2"] = {{"nonzero", inv.nonzero2}, {"expr", inv.theta2.str()}};
    j["theta3"] = {{"nonzero", inv.nonzero3}, {"expr", inv.theta3.str()}};
    std::ostringstream t;
    t << "theta0 " << (inv.nonzero0 ? "nonzero" : "zero") << "\n"
      << "theta1 " << (inv.nonzero1 ? "nonzero" : "zero") << "\n"
      << "theta2 " << (inv.nonzero2 ? "nonzero" : "zero") << "\n"
      << "theta3 " << (inv.nonzero3 ? "nonzero" : "zero") << "\n";
    emit(o, j, t.str());
    return 0;
}

int cmd_check_sym(const Options& o, const std::string& mode) {
    Document doc = load_document(o.doc_path);
    SamplerConfig cfg = sampler(o, doc);
    Distribution d = doc_rank2(doc, o, cfg);
    std::vector<VectorField> fields = build_symmetries(doc, d.chart, cfg, pins_of(o));
    if (fields.empty()) input_error("SchemaError", "no candidate symmetries in the document");
    SymmetryMode m = mode == "generalized" ? SymmetryMode::generalized : SymmetryMode::strict;
    bool all = true;
    json results = json::array();
    std::ostringstream t;
    for (size_t i = 0; i < fields.size(); ++i) {
        Distribution v = make_distribution(d.chart, std::vector<VectorField>{fields[i]}, cfg);
        bool ok = symmetry_check(d, v, m, cfg);
        all = all && ok;
        results.push_back({{"index", i}, {"passes", ok}});
        t << "candidate " << i << ": " << (ok ? "symmetry" : "NOT a symmetry") << "\n";
    }
    json j;
    j["mode"] = mode;
    j["all_pass"] = all;
    j["results"] = results;
    emit(o, j, t.str());
    return all ? 0 : 1;
}

int cmd_check_integral(const Options& o, const std::vector<std::string>& exprs) {
    Document doc = load_document(o.doc_path);
    SamplerConfig cfg = sampler(o, doc);
    Distribution d = doc_rank2(doc, o, cfg);
    std::vector<std::string> todo = exprs;
    if (todo.empty()) todo = doc.integrals;
    if (todo.empty()) input_error("SchemaError", "no integral candidates (--expr or document)");
    bool all = true;
    json results = json::array();
    std::ostringstream t;
    for (const auto& s : todo) {
        Expr f = parse_on_chart(s, d.chart.coords, doc, pins_of(o));
        bool ok = first_integral_check(d, f, cfg);
        all = all && ok;
        results.push_back({{"expr", s}, {"verified", ok}});
        t << "'" << s << "': " << (ok ? "first integral" : "NOT an integral") << "\n";
    }
    json j;
    j["all_pass"] = all;
    j["results"] = results;
    emit(o, j, t.str());
    return all ? 0 : 1;
}

int cmd_check_extension(const Options& o) {
    Document doc = load_document(o.doc_path);
    if (doc.kind != Document::Kind::check_suite)
        input_error("SchemaError", "check-extension needs a check-suite document");
    SamplerConfig cfg = sampler(o, doc);
    Distribution total = doc_cartan_or_dist(*doc.total, o, cfg);
    Distribution base = doc_cartan_or_dist(*doc.base, o, cfg);
    if (doc.has_maps) {
        if (doc.map_target_chart.empty())
            input_error("SchemaError", "check-suite maps need target_chart");
        Chart target{doc.name + "_mapped", doc.map_target_chart, {}};
        std::map<std::string, Expr> fwd, inv;
        for (const auto& [k, v] : doc.map_forward)
            fwd[k] = parse_on_chart(v, total.chart.coords, doc, pins_of(o));
        for (const auto& [k, v] : doc.map_inverse)
            inv[k] = parse_on_chart(v, doc.map_target_chart, doc, pins_of(o));
        total = change_coordinates(total, target, fwd, inv, cfg);
    }
    // Empty projections degenerate to certifying that total and base are the
    // same distribution (used by the diffeomorphism companions).
    bool ok = integrable_extension_check(total, doc.projections, base, cfg);
    json j;
    j["is_integrable_extension"] = ok;
    emit(o, j, std::string(ok ? "integrable extension: certified\n"
                              : "integrable extension: FAILS\n"));
    return ok ? 0 : 1;
}

int cmd_check_solvable(const Options& o) {
    Document doc = load_document(o.doc_path);
    SamplerConfig cfg = sampler(o, doc);
    Distribution d = doc_rank2(doc, o, cfg);
    std::vector<VectorField> fields = build_symmetries(doc, d.chart, cfg, pins_of(o));
    if (fields.empty()) input_error("SchemaError", "no candidate symmetries in the document");
    SolvableReport rep = solvable_transversal_check(d, fields, cfg);
    json j;
    j["count_ok"] = rep.count_ok;
    j["is_symmetry_algebra"] = rep.is_symmetry_algebra;
    j["closes_with_constants"] = rep.closes_with_constants;
    j["solvable"] = rep.solvable;
    j["derived_length"] = rep.derived_length;
    j["transversal"] = rep.transversal;
    std::ostringstream t;
    t << "fields " << fields.size() << (rep.count_ok ? "" : " (count != dim - rank)") << "\n"
      << "symmetry algebra: " << (rep.is_symmetry_algebra ? "yes" : "no") << "\n"
      << "closes with rational constants: " << (rep.closes_with_constants ? "yes" : "no") << "\n"
      << "solvable: " << (rep.solvable ? "yes" : "no") << " (derived length "
      << rep.derived_length << ")\n"
      << "transversal: " << (rep.transversal ? "yes" : "no") << "\n";
    emit(o, j, t.str());
    bool pass = rep.count_ok && rep.is_symmetry_algebra && rep.closes_with_constants &&
                rep.solvable && rep.transversal;
    return pass ? 0 : 1;
}

int cmd_prolong(const Options& o, int steps) {
    Document doc = load_document(o.doc_path);
    SamplerConfig cfg = sampler(o, doc);
    if (doc.kind != Document::Kind::system)
        input_error("SchemaError", "prolong needs a system document");
    PdeSystem sys = build_system(doc, cfg, pins_of(o));
    for (int i = 0; i < steps; ++i) sys = prolong_system(sys, cfg);
    json j;
    j["order"] = sys.order;
    json sol;
    for (const auto& [m, e] : sys.solved) sol[jet_coord_name(m)] = e.str();
    j["solved"] = sol;
    j["internal"] = sys.internal_coords();
    std::ostringstream t;
    t << "order " << sys.order << "\n";
    for (const auto& [m, e] : sys.solved)
        t << "  " << jet_coord_name(m) << " = " << e.str() << "\n";
    t << "internal coordinates (" << sys.internal_coords().size() << "):";
    for (const auto& c : sys.internal_coords()) t << " " << c;
    t << "\n";
    emit(o, j, t.str());
    return 0;
}

int cmd_chars(const Options& o) {
    Document doc = load_document(o.doc_path);
    SamplerConfig cfg = sampler(o, doc);
    if (doc.kind != Document::Kind::system)
        input_error("SchemaError", "chars needs a system document");
    PdeSystem sys = build_system(doc, cfg, pins_of(o));
    SymbolProfile prof = symbol_profile(sys, cfg);
    CharacteristicLine line = characteristic_line(sys, cfg);
    json j;
    j["type"] = prof.type_string;
    j["omega"] = prof.omega;
    j["vertical"] = line.vertical;
    j["lambda_char"] = line.vertical ? "infinity" : line.slope.str();
    std::ostringstream t;
    t << "type " << prof.type_string << ", omega = 1\n";
    if (line.vertical)
        t << "characteristic covector dy (vertical slope); Cauchy direction D_x\n";
    else
        t << "lambda_char = " << line.slope.str() << "\n";
    emit(o, j, t.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"distflag: derived flags, Cauchy reductions and integrability verdicts for "
                 "rank-2 distributions and class-1 PDE systems"};
    app.require_subcommand(1);

    Options o;
    app.add_option("--seed", o.seed, "sampler seed")->capture_default_str();
    app.add_option("--trials", o.trials, "sample points per certificate")->capture_default_str();
    app.add_option("--tolerance", o.tolerance, "numeric tolerance for transcendental classes")
        ->capture_default_str();
    app.add_option("--max-steps", o.max_steps, "derived flag step cap")->capture_default_str();
    app.add_option("--route", o.route, "deprolong-first|restrict-first")->capture_default_str();
    app.add_option("--format", o.format, "json|text")->capture_default_str();
    app.add_option("--point", o.point, "base point overrides coord=value")->delimiter(',');
    app.add_option("--param", o.param, "parameter pins name=value")->delimiter(',');

    std::string mode = "strict";
    std::vector<std::string> exprs;
    int prolong_steps = 1;
    bool leaf = false;

    auto add_doc = [&](CLI::App* sub) {
        sub->fallthrough(); // global options may follow the subcommand
        sub->add_option("document", o.doc_path, "input document (JSON)")->required();
    };
    std::map<std::string, std::function<int()>> handlers;

    auto* c_flag = app.add_subcommand("flag", "weak and strong derived flags");
    add_doc(c_flag);
    handlers["flag"] = [&] { return cmd_flag(o); };

    auto* c_cauchy = app.add_subcommand("cauchy", "Cauchy characteristic space");
    add_doc(c_cauchy);
    handlers["cauchy"] = [&] { return cmd_cauchy(o); };

    auto* c_reduce = app.add_subcommand("reduce", "reduce a class-1 system to its rank-2 model");
    add_doc(c_reduce);
    handlers["reduce"] = [&] { return cmd_reduce(o); };

    auto* c_dep = app.add_subcommand("deprolong", "one de-prolongation step");
    add_doc(c_dep);
    handlers["deprolong"] = [&] { return cmd_deprolong(o); };

    auto* c_an = app.add_subcommand("analyze", "full reduction analysis report");
    add_doc(c_an);
    handlers["analyze"] = [&] { return cmd_analyze(o); };

    auto* c_cl = app.add_subcommand("classify", "case I/II/III and verdict only");
    add_doc(c_cl);
    handlers["classify"] = [&] { return cmd_classify(o); };

    auto* c_car = app.add_subcommand("carnot", "graded nilpotent algebra at the base point");
    add_doc(c_car);
    c_car->add_flag("--leaf", leaf, "restrict to the closure leaf when not fully nonholonomic");
    handlers["carnot"] = [&] { return cmd_carnot(o, leaf); };

    auto* c_mon = app.add_subcommand("monge", "wedge invariants of a (2,5) distribution");
    add_doc(c_mon);
    handlers["monge"] = [&] { return cmd_monge(o); };

    auto* c_sym = app.add_subcommand("check-sym", "verify candidate symmetries");
    add_doc(c_sym);
    c_sym->add_option("--mode", mode, "strict|generalized")->capture_default_str();
    handlers["check-sym"] = [&] { return cmd_check_sym(o, mode); };

    auto* c_int = app.add_subcommand("check-integral", "verify candidate first integrals");
    add_doc(c_int);
    c_int->add_option("--expr", exprs, "integral candidate (repeatable)");
    handlers["check-integral"] = [&] { return cmd_check_integral(o, exprs); };

    auto* c_ext = app.add_subcommand("check-extension", "verify an integrable extension");
    add_doc(c_ext);
    handlers["check-extension"] = [&] { return cmd_check_extension(o); };

    auto* c_sol = app.add_subcommand("check-solvable",
                                     "solvable transversal symmetry algebra check");
    add_doc(c_sol);
    handlers["check-solvable"] = [&] { return cmd_check_solvable(o); };

    auto* c_pro = app.add_subcommand("prolong", "prolong a system");
    add_doc(c_pro);
    c_pro->add_option("--steps", prolong_steps, "number of prolongations")->capture_default_str();
    handlers["prolong"] = [&] { return cmd_prolong(o, prolong_steps); };

    auto* c_chr = app.add_subcommand("chars", "characteristic slope from the symbol GCD");
    add_doc(c_chr);
    handlers["chars"] = [&] { return cmd_chars(o); };

    CLI11_PARSE(app, argc, argv);

    std::string sub = app.get_subcommands().front()->get_name();
    try {
        return handlers.at(sub)();
    } catch (const EngineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.cls()) {
            case ErrorClass::math: return 1;
            case ErrorClass::input: return 2;
            case ErrorClass::certify: return 3;
        }
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: DomainError: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
