#pragma once

#include <memory>
#include <optional>

#include "distflag/pipeline.hpp"

namespace distflag {

// Parsed input document. Expression strings are validated (parsed) at load
// time; compilation against a chart happens in the build_* helpers so that
// --param pins can be applied uniformly.
struct Document {
    enum class Kind { distribution, system, check_suite };
    Kind kind = Kind::distribution;
    std::string name;

    // kind == distribution
    std::vector<std::string> chart;
    std::vector<std::vector<std::string>> fields;

    // kind == system
    int order = 0;
    std::vector<std::pair<std::string, std::string>> solved; // "ij" -> expr, sorted keys

    // shared
    std::vector<std::pair<std::string, std::optional<std::string>>> params; // pinned or free
    std::vector<std::pair<std::string, std::string>> base_point;

    bool has_maps = false;
    std::vector<std::string> map_target_chart;
    std::vector<std::pair<std::string, std::string>> map_forward;
    std::vector<std::pair<std::string, std::string>> map_inverse;

    struct SymCandidate {
        std::vector<std::string> field;               // full-chart coefficients, or:
        std::vector<std::string> point_field;         // point field on (x, dependents)
        std::vector<std::pair<std::string, int>> jet; // dependents with jet depths
    };
    std::vector<SymCandidate> symmetries;

    std::vector<std::string> integrals;
    std::vector<std::string> projections;

    std::optional<int> sampler_trials;
    std::optional<double> sampler_tolerance;

    // kind == check_suite
    std::shared_ptr<Document> total;
    std::shared_ptr<Document> base;

    nlohmann::ordered_json to_json() const;
};

Document parse_document(const std::string& text);
Document load_document(const std::string& path);

using ParamPins = std::map<std::string, std::string>;

// All identifiers admissible in this document's expressions.
std::vector<std::string> document_vars(const Document& doc);

Distribution build_distribution(const Document& doc, const SamplerConfig& cfg,
                                const ParamPins& pins);
PdeSystem build_system(const Document& doc, const SamplerConfig& cfg, const ParamPins& pins);

// Candidate symmetry fields on the document's chart; point fields are
// prolonged to the declared jet structure first.
std::vector<VectorField> build_symmetries(const Document& doc, const Chart& chart,
                                          const SamplerConfig& cfg, const ParamPins& pins);

// Parses an expression against an arbitrary chart with the document's
// parameters and pins applied.
Expr parse_on_chart(const std::string& text, const std::vector<std::string>& chart_coords,
                    const Document& doc, const ParamPins& pins);

} // namespace distflag
