#include "distflag/document.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "distflag/errors.hpp"
#include "distflag/parser.hpp"

namespace distflag {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
    input_error("SchemaError", path + ": " + msg);
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) schema_error(path, "expected a string");
    return j.get<std::string>();
}

std::vector<std::string> get_string_array(const json& j, const std::string& path) {
    if (!j.is_array()) schema_error(path, "expected an array of strings");
    std::vector<std::string> out;
    for (size_t i = 0; i < j.size(); ++i)
        out.push_back(get_string(j[i], path + "/" + std::to_string(i)));
    return out;
}

Document parse_document_json(const json& j, const std::string& path);

Document::SymCandidate parse_sym(const json& j, const std::string& path) {
    Document::SymCandidate c;
    if (j.is_array()) {
        c.field = get_string_array(j, path);
        return c;
    }
    if (!j.is_object()) schema_error(path, "expected a field array or an object");
    if (j.contains("field")) c.field = get_string_array(j["field"], path + "/field");
    if (j.contains("point_field")) {
        c.point_field = get_string_array(j["point_field"], path + "/point_field");
        if (!j.contains("jet")) schema_error(path, "point_field requires jet depths");
        const json& jet = j["jet"];
        if (!jet.is_array()) schema_error(path + "/jet", "expected [[name, depth], ...]");
        for (size_t i = 0; i < jet.size(); ++i) {
            const json& e = jet[i];
            if (!e.is_array() || e.size() != 2 || !e[0].is_string() ||
                !e[1].is_number_integer())
                schema_error(path + "/jet/" + std::to_string(i), "expected [name, depth]");
            c.jet.emplace_back(e[0].get<std::string>(), e[1].get<int>());
        }
    }
    if (c.field.empty() == c.point_field.empty())
        schema_error(path, "exactly one of field / point_field is required");
    return c;
}

Document parse_document_json(const json& j, const std::string& path) {
    if (!j.is_object()) schema_error(path, "expected an object");
    Document doc;
    if (!j.contains("kind")) schema_error(path, "missing 'kind'");
    std::string kind = get_string(j["kind"], path + "/kind");
    if (kind == "distribution") doc.kind = Document::Kind::distribution;
    else if (kind == "system") doc.kind = Document::Kind::system;
    else if (kind == "check-suite") doc.kind = Document::Kind::check_suite;
    else schema_error(path + "/kind", "unknown kind '" + kind + "'");

    if (j.contains("name")) doc.name = get_string(j["name"], path + "/name");

    if (j.contains("params")) {
        const json& p = j["params"];
        if (!p.is_object()) schema_error(path + "/params", "expected an object");
        for (const auto& [k, v] : p.items()) {
            if (v.is_null()) doc.params.emplace_back(k, std::nullopt);
            else doc.params.emplace_back(k, get_string(v, path + "/params/" + k));
        }
    }
    if (j.contains("base_point")) {
        const json& p = j["base_point"];
        if (!p.is_object()) schema_error(path + "/base_point", "expected an object");
        for (const auto& [k, v] : p.items())
            doc.base_point.emplace_back(k, get_string(v, path + "/base_point/" + k));
    }
    if (j.contains("sampler")) {
        const json& s = j["sampler"];
        if (!s.is_object()) schema_error(path + "/sampler", "expected an object");
        if (s.contains("trials")) doc.sampler_trials = s["trials"].get<int>();
        if (s.contains("tolerance")) doc.sampler_tolerance = s["tolerance"].get<double>();
    }

    switch (doc.kind) {
        case Document::Kind::distribution: {
            if (!j.contains("chart")) schema_error(path, "distribution needs 'chart'");
            doc.chart = get_string_array(j["chart"], path + "/chart");
            if (!j.contains("fields")) schema_error(path, "distribution needs 'fields'");
            const json& fs = j["fields"];
            if (!fs.is_array() || fs.empty()) schema_error(path + "/fields", "expected arrays");
            for (size_t i = 0; i < fs.size(); ++i) {
                auto row = get_string_array(fs[i], path + "/fields/" + std::to_string(i));
                if (row.size() != doc.chart.size())
                    schema_error(path + "/fields/" + std::to_string(i),
                                 "field length " + std::to_string(row.size()) +
                                     " does not match chart dimension " +
                                     std::to_string(doc.chart.size()));
                doc.fields.push_back(std::move(row));
            }
            break;
        }
        case Document::Kind::system: {
            if (!j.contains("equations")) schema_error(path, "system needs 'equations'");
            const json& eq = j["equations"];
            if (!eq.is_object() || !eq.contains("order") || !eq.contains("solved"))
                schema_error(path + "/equations", "expected {order, solved}");
            doc.order = eq["order"].get<int>();
            const json& sol = eq["solved"];
            if (!sol.is_object() || sol.empty())
                schema_error(path + "/equations/solved", "expected a non-empty object");
            for (const auto& [k, v] : sol.items()) {
                if (k.size() != 2 || !std::isdigit(static_cast<unsigned char>(k[0])) ||
                    !std::isdigit(static_cast<unsigned char>(k[1])))
                    schema_error(path + "/equations/solved/" + k,
                                 "keys are two digits 'ij' (u21 = u_xxy)");
                doc.solved.emplace_back(k, get_string(v, path + "/equations/solved/" + k));
            }
            std::sort(doc.solved.begin(), doc.solved.end());
            break;
        }
        case Document::Kind::check_suite: {
            if (!j.contains("total") || !j.contains("base"))
                schema_error(path, "check-suite needs 'total' and 'base'");
            doc.total = std::make_shared<Document>(
                parse_document_json(j["total"], path + "/total"));
            doc.base = std::make_shared<Document>(parse_document_json(j["base"], path + "/base"));
            break;
        }
    }

    if (j.contains("maps")) {
        const json& m = j["maps"];
        if (!m.is_object()) schema_error(path + "/maps", "expected an object");
        doc.has_maps = true;
        if (m.contains("target_chart"))
            doc.map_target_chart = get_string_array(m["target_chart"], path + "/maps/target_chart");
        for (const char* key : {"forward", "inverse"}) {
            if (!m.contains(key)) schema_error(path + "/maps", std::string("missing ") + key);
            const json& mm = m[key];
            if (!mm.is_object()) schema_error(path + "/maps/" + key, "expected an object");
            auto& dst = std::string(key) == "forward" ? doc.map_forward : doc.map_inverse;
            for (const auto& [k, v] : mm.items())
                dst.emplace_back(k, get_string(v, path + "/maps/" + key + "/" + k));
        }
    }

    if (j.contains("candidates")) {
        const json& c = j["candidates"];
        if (!c.is_object()) schema_error(path + "/candidates", "expected an object");
        if (c.contains("symmetries")) {
            const json& ss = c["symmetries"];
            if (!ss.is_array()) schema_error(path + "/candidates/symmetries", "expected an array");
            for (size_t i = 0; i < ss.size(); ++i)
                doc.symmetries.push_back(
                    parse_sym(ss[i], path + "/candidates/symmetries/" + std::to_string(i)));
        }
        if (c.contains("integrals"))
            doc.integrals = get_string_array(c["integrals"], path + "/candidates/integrals");
        if (c.contains("projections"))
            doc.projections = get_string_array(c["projections"], path + "/candidates/projections");
    }

    // Validate every expression by compiling once with unpinned parameters.
    try {
        if (doc.kind == Document::Kind::distribution) {
            SamplerConfig probe;
            probe.trials = 3;
            build_distribution(doc, probe, {});
        } else if (doc.kind == Document::Kind::system) {
            build_system(doc, SamplerConfig{}, {});
        }
    } catch (const EngineError& e) {
        if (e.cls() == ErrorClass::input) throw;
        // Degenerate-at-sample errors are surfaced by the actual commands.
    }
    return doc;
}

} // namespace

Document parse_document(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        input_error("SchemaError", std::string("invalid JSON: ") + e.what());
    }
    return parse_document_json(j, "");
}

Document load_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) input_error("SchemaError", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_document(ss.str());
}

nlohmann::ordered_json Document::to_json() const {
    json j;
    switch (kind) {
        case Kind::distribution: j["kind"] = "distribution"; break;
        case Kind::system: j["kind"] = "system"; break;
        case Kind::check_suite: j["kind"] = "check-suite"; break;
    }
    if (!name.empty()) j["name"] = name;
    if (kind == Kind::distribution) {
        j["chart"] = chart;
        json fs = json::array();
        for (const auto& row : fields) fs.push_back(row);
        j["fields"] = fs;
    } else if (kind == Kind::system) {
        json sol;
        for (const auto& [k, v] : solved) sol[k] = v;
        j["equations"] = {{"order", order}, {"solved", sol}};
    } else {
        j["total"] = total->to_json();
        j["base"] = base->to_json();
    }
    if (!params.empty()) {
        json p;
        for (const auto& [k, v] : params) {
            if (v) p[k] = *v;
            else p[k] = nullptr;
        }
        j["params"] = p;
    }
    if (!base_point.empty()) {
        json p;
        for (const auto& [k, v] : base_point) p[k] = v;
        j["base_point"] = p;
    }
    if (has_maps) {
        json m;
        if (!map_target_chart.empty()) m["target_chart"] = map_target_chart;
        json f, inv;
        for (const auto& [k, v] : map_forward) f[k] = v;
        for (const auto& [k, v] : map_inverse) inv[k] = v;
        m["forward"] = f;
        m["inverse"] = inv;
        j["maps"] = m;
    }
    if (!symmetries.empty() || !integrals.empty() || !projections.empty()) {
        json c;
        if (!symmetries.empty()) {
            json ss = json::array();
            for (const auto& s : symmetries) {
                if (!s.field.empty()) {
                    ss.push_back(s.field);
                } else {
                    json e;
                    e["point_field"] = s.point_field;
                    json jet = json::array();
                    for (const auto& [n, d] : s.jet) jet.push_back(json::array({n, d}));
                    e["jet"] = jet;
                    ss.push_back(e);
                }
            }
            c["symmetries"] = ss;
        }
        if (!integrals.empty()) c["integrals"] = integrals;
        if (!projections.empty()) c["projections"] = projections;
        j["candidates"] = c;
    }
    if (sampler_trials || sampler_tolerance) {
        json s;
        if (sampler_trials) s["trials"] = *sampler_trials;
        if (sampler_tolerance) s["tolerance"] = *sampler_tolerance;
        j["sampler"] = s;
    }
    return j;
}

std::vector<std::string> document_vars(const Document& doc) {
    std::vector<std::string> vars;
    if (doc.kind == Document::Kind::distribution) vars = doc.chart;
    else if (doc.kind == Document::Kind::system) vars = scalar_jet_coords(doc.order);
    for (const auto& [p, v] : doc.params) vars.push_back(p);
    return vars;
}

namespace {

std::map<std::string, Expr> pin_bindings(const Document& doc, const ParamPins& pins) {
    std::map<std::string, Expr> bind;
    for (const auto& [p, v] : doc.params)
        if (v) bind[p] = Expr::constant(Rational::from_string(*v));
    for (const auto& [p, v] : pins) {
        bool known = false;
        for (const auto& [dp, dv] : doc.params) known = known || dp == p;
        if (!known) input_error("SchemaError", "--param " + p + " is not a declared parameter");
        bind[p] = Expr::constant(Rational::from_string(v));
    }
    return bind;
}

Point parse_base_point(const Document& doc) {
    Point p;
    for (const auto& [k, v] : doc.base_point) p[k] = Rational::from_string(v);
    return p;
}

} // namespace

Expr parse_on_chart(const std::string& text, const std::vector<std::string>& chart_coords,
                    const Document& doc, const ParamPins& pins) {
    std::vector<std::string> vars = chart_coords;
    for (const auto& [p, v] : doc.params) vars.push_back(p);
    Expr e = parse_expr(text, vars);
    auto bind = pin_bindings(doc, pins);
    return bind.empty() ? e : substitute(e, bind);
}

Distribution build_distribution(const Document& doc, const SamplerConfig& cfg,
                                const ParamPins& pins) {
    if (doc.kind != Document::Kind::distribution)
        input_error("SchemaError", "document is not a distribution");
    Chart chart{doc.name.empty() ? "M" : doc.name, doc.chart, parse_base_point(doc)};
    std::vector<std::vector<Expr>> coeffs;
    for (const auto& row : doc.fields) {
        std::vector<Expr> r;
        for (const auto& s : row) r.push_back(parse_on_chart(s, doc.chart, doc, pins));
        coeffs.push_back(std::move(r));
    }
    return make_distribution(std::move(chart), std::move(coeffs), cfg);
}

PdeSystem build_system(const Document& doc, const SamplerConfig& cfg, const ParamPins& pins) {
    (void)cfg;
    if (doc.kind != Document::Kind::system) input_error("SchemaError", "document is not a system");
    std::map<MultiIndex, Expr> solved;
    std::vector<std::string> jet_vars = scalar_jet_coords(doc.order);
    for (const auto& [k, v] : doc.solved) {
        MultiIndex m{k[0] - '0', k[1] - '0'};
        solved[m] = parse_on_chart(v, jet_vars, doc, pins);
    }
    std::vector<std::string> free_params;
    auto bind = pin_bindings(doc, pins);
    for (const auto& [p, v] : doc.params)
        if (!bind.count(p)) free_params.push_back(p);
    return make_system(doc.name.empty() ? "E" : doc.name, doc.order, std::move(solved),
                       std::move(free_params), parse_base_point(doc));
}

std::vector<VectorField> build_symmetries(const Document& doc, const Chart& chart,
                                          const SamplerConfig& cfg, const ParamPins& pins) {
    std::vector<VectorField> out;
    for (const auto& s : doc.symmetries) {
        if (!s.field.empty()) {
            if (static_cast<int>(s.field.size()) != chart.dim())
                input_error("SchemaError", "symmetry field length does not match the chart");
            VectorField f{chart, {}};
            for (const auto& c : s.field) f.coeffs.push_back(parse_on_chart(c, chart.coords, doc, pins));
            out.push_back(std::move(f));
        } else {
            std::vector<std::string> base{"x"};
            for (const auto& [n, d] : s.jet) base.push_back(n);
            VectorField pt{Chart{"J0", base, {}}, {}};
            if (s.point_field.size() != base.size())
                input_error("SchemaError", "point field must have one coefficient per (x, deps)");
            for (const auto& c : s.point_field)
                pt.coeffs.push_back(parse_on_chart(c, base, doc, pins));
            VectorField lifted = prolong_point_field(pt, s.jet, cfg);
            if (lifted.chart.coords != chart.coords)
                input_error("SchemaError",
                            "prolonged point field lives on a different chart than the document");
            lifted.chart = chart;
            out.push_back(std::move(lifted));
        }
    }
    return out;
}

} // namespace distflag
