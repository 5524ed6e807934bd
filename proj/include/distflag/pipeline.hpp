#pragma once

#include <optional>

#include "distflag/jets.hpp"

#include <json.hpp>

namespace distflag {

struct PipelineOptions {
    enum class Route { deprolong_first, restrict_first };
    Route route = Route::deprolong_first;
    int max_steps = 16;
    // Candidate first integrals on the reduced chart; verified candidates
    // with a linear coordinate occurrence enable the explicit case-II
    // restriction, everything else falls back to the closure-leaf view.
    std::vector<Expr> candidate_integrals;
};

struct ChainStep {
    std::string kind;   // "deprolong" | "restrict"
    std::string detail; // sliced coordinate, integral used, or "leaf"
    int chart_dim = 0;
    std::vector<int> weak_growth, strong_growth;
    std::vector<int> weak_reduced, strong_reduced;
};

struct IntegralCheck {
    std::string expr;
    bool verified = false;
};

// Everything the reduction workflow produces; the JSON field names rendered
// from this struct are the stable report contract (see README).
struct ReductionReport {
    // System identity (absent when analyzing a bare distribution).
    bool has_system = false;
    std::string system_name;
    SymbolProfile profile;
    int dim_equation = 0; // internal coordinate count of the prolonged system
    int mu = 0;           // reduced chart dimension
    bool dimensions_consistent = false;
    std::optional<CharacteristicLine> characteristic;
    std::vector<Expr> cauchy_generator_basis; // over (D_x, D_y, symbol)
    std::vector<Expr> cauchy_field;           // chart coefficients
    bool cauchy_collinear_ok = false;
    std::string slice_coord;
    Rational slice_value;
    std::vector<int> cartan_weak_growth; // flag of C_E
    std::optional<Distribution> reduced;

    // Analysis of the rank-2 distribution.
    bool has_analysis = false;
    Flag weak, strong;
    int first_integral_count = 0;
    GoursatVerdict verdict;
    std::string case_label; // "I" | "II" | "III"
    std::vector<ChainStep> chain;
    std::optional<CarnotAlgebra> carnot;
    std::string carnot_note; // set when the Carnot computation is unavailable
    std::vector<IntegralCheck> integral_checks;
};

// Reduction workflow: certify class 1, prolong to the stabilization order,
// build the induced Cartan distribution, quotient by the rank-1 Cauchy
// characteristic along a transversal slice.
ReductionReport reduce_system(const PdeSystem& sys, const SamplerConfig& cfg);

// Flags, integrals count, Goursat verdict, case I/II/III, the reduction
// chain (de-prolongations and case-II restrictions per the route), and the
// Carnot algebra of the final distribution at its base point.
ReductionReport analyze_distribution(const Distribution& d, const PipelineOptions& opts,
                                     const SamplerConfig& cfg,
                                     ReductionReport partial = ReductionReport{});

ReductionReport analyze_system(const PdeSystem& sys, const PipelineOptions& opts,
                               const SamplerConfig& cfg);

nlohmann::ordered_json report_to_json(const ReductionReport& rep);
std::string report_to_text(const ReductionReport& rep);

nlohmann::ordered_json carnot_to_json(const CarnotAlgebra& alg);
nlohmann::ordered_json flag_to_json(const Flag& f);

} // namespace distflag
