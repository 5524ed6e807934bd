#pragma once

#include <optional>
#include <string>
#include <vector>

#include "distflag/linalg.hpp"

namespace distflag {

struct Chart {
    std::string name;
    std::vector<std::string> coords;
    Point base_point; // empty = unset; otherwise binds every coordinate

    int dim() const { return static_cast<int>(coords.size()); }
    int index_of(const std::string& c) const;
    bool same_coords(const Chart& o) const { return coords == o.coords; }
    Rational base_value(const std::string& c) const;
    Chart without(const std::string& c) const;
};

struct VectorField {
    Chart chart;
    std::vector<Expr> coeffs; // one per coordinate

    // Directional derivative X(f) = sum_j X_j df/dx_j.
    Expr apply(const Expr& f) const;
};

VectorField lie_bracket(const VectorField& x, const VectorField& y);

struct Distribution {
    Chart chart;
    std::vector<VectorField> gens;

    int rank() const { return static_cast<int>(gens.size()); }
    int dim() const { return chart.dim(); }
};

// Validates pointwise independence of the generators at generic points.
Distribution make_distribution(Chart chart, std::vector<std::vector<Expr>> coeffs,
                               const SamplerConfig& cfg);
Distribution make_distribution(Chart chart, std::vector<VectorField> gens,
                               const SamplerConfig& cfg);

ExprMatrix stack_fields(const std::vector<VectorField>& fields);
int span_rank(const std::vector<VectorField>& fields, const SamplerConfig& cfg);
bool in_span(const std::vector<VectorField>& basis, int basis_rank, const VectorField& w,
             const SamplerConfig& cfg);

enum class FlagMode { weak, strong };

struct Flag {
    FlagMode mode = FlagMode::weak;
    std::vector<Distribution> steps;
    std::vector<int> growth;
    std::vector<int> reduced_growth; // successive differences
    bool stabilized = true;
};

// Iterated bracket tower: weak brackets against the original distribution,
// strong brackets the current step with itself. Throws MaxStepsExceeded when
// the tower is not yet stable after max_steps.
Flag derived_flag(const Distribution& d, FlagMode mode, int max_steps, const SamplerConfig& cfg);
// Same, but returns the (possibly unstable) prefix instead of throwing.
Flag derived_flag_prefix(const Distribution& d, FlagMode mode, int max_steps,
                         const SamplerConfig& cfg);

struct CauchyResult {
    std::vector<VectorField> fields;
    std::vector<std::vector<Expr>> in_generator_basis; // one coefficient vector per field
};

// Ch(D) = {X in D : [X, D] subset D}, solved as a pointwise linear system
// over the generator coefficients and re-certified by bracketing.
CauchyResult cauchy_characteristics_full(const Distribution& d, const SamplerConfig& cfg);
Distribution cauchy_characteristics(const Distribution& d, const SamplerConfig& cfg);

// Quotient model along xi realized as the slice coord = value; xi must lie in
// d and have a certified-nonzero coefficient at coord.
Distribution transversal_reduction(const Distribution& d, const VectorField& xi,
                                   const std::string& coord, const Rational& value,
                                   const SamplerConfig& cfg);

struct DeprolongStep {
    Distribution result;
    std::string sliced_coord;
    Rational slice_value;
    VectorField characteristic; // Ch of the derived distribution
};

// Inverse of Cartan prolongation: quotient of the derived distribution by
// its rank-1 Cauchy characteristic. Requires weak growth starting (2,3,4).
DeprolongStep deprolong_full(const Distribution& d, const SamplerConfig& cfg);
Distribution deprolong(const Distribution& d, const SamplerConfig& cfg);
bool deprolongable(const Distribution& d, const SamplerConfig& cfg);

// Cartan prolongation ⟨X + t*Y, ∂t⟩; the inverse construction of deprolong.
Distribution cartan_prolong(const Distribution& d, const std::string& new_coord,
                            const SamplerConfig& cfg);

enum class SymmetryMode { strict, generalized };

// strict: [V, D] subset D; generalized: [V,V] subset V and [V,D] subset V+D.
bool symmetry_check(const Distribution& d, const Distribution& v, SymmetryMode mode,
                    const SamplerConfig& cfg);

bool first_integral_check(const Distribution& d, const Expr& f, const SamplerConfig& cfg);

// Restriction of d to the level set {f = value} for a verified first
// integral f that occurs linearly with constant coefficient in some
// coordinate; nullopt when no such coordinate exists.
std::optional<Distribution> restrict_to_integral_level(const Distribution& d, const Expr& f,
                                                       const Rational& value,
                                                       const SamplerConfig& cfg);

// Pushforward along the diffeomorphism given componentwise; forward maps each
// target coordinate to an expression in source coordinates, inverse the other
// way round. Both compositions are certified to be the identity.
Distribution change_coordinates(const Distribution& d, const Chart& target,
                                const std::map<std::string, Expr>& forward,
                                const std::map<std::string, Expr>& inverse,
                                const SamplerConfig& cfg);

// Submersion criterion for coverings: the vertical space of the projection
// meets d trivially and d projects isomorphically onto base.
bool integrable_extension_check(const Distribution& total,
                                const std::vector<std::string>& projected_out,
                                const Distribution& base, const SamplerConfig& cfg);

struct SolvableReport {
    bool count_ok = false;            // |fields| == dim - rank
    bool is_symmetry_algebra = false; // strict symmetries closing within span(fields)
    bool closes_with_constants = false;
    bool solvable = false;
    int derived_length = 0;
    bool transversal = false;
};

SolvableReport solvable_transversal_check(const Distribution& d,
                                          const std::vector<VectorField>& fields,
                                          const SamplerConfig& cfg);

struct MongeInvariants {
    Expr theta0, theta1, theta2, theta3;
    bool nonzero0 = false, nonzero1 = false, nonzero2 = false, nonzero3 = false;
};

// Wedge invariants of a (2,5) distribution per the Monge normal form test.
MongeInvariants monge_invariants(const Distribution& d, const SamplerConfig& cfg);

struct GoursatVerdict {
    enum class Type { Goursat, GoursatFrobenius, NotLinearizable };
    Type type = Type::NotLinearizable;
    int d = 0;
    int m = 0;
    std::vector<int> growth; // offending growth vector for NotLinearizable
    std::string str() const;
};

GoursatVerdict goursat_verdict(const Distribution& d, const SamplerConfig& cfg,
                               int max_steps = 16, std::optional<int> pipeline_d = std::nullopt);
GoursatVerdict goursat_verdict_from_flags(const Flag& weak, const Flag& strong, int dim,
                                          std::optional<int> pipeline_d = std::nullopt);

struct CarnotAlgebra {
    std::vector<int> dims;           // graded dimensions
    std::vector<std::string> labels; // e1, e1', e2, ...
    std::vector<int> weight;         // layer of each basis element
    // Full table over pairs i<j; [e_j,e_i] = -[e_i,e_j] implicitly.
    std::map<std::pair<int, int>, std::vector<Rational>> brackets;

    int total_dim() const;
    std::vector<Rational> bracket(int i, int j) const; // any order
    void validate() const;                             // graded + Jacobi
    std::optional<Rational> constant(const std::string& lhs1, const std::string& lhs2,
                                     const std::string& rhs) const;
};

// Graded nilpotent algebra of the weak flag at a point. With leaf_ok the
// computation restricts to the closure leaf when the flag does not span the
// full tangent space; otherwise that case raises NotFullyNonholonomic.
CarnotAlgebra carnot_algebra(const Distribution& d, const Point& point, bool leaf_ok,
                             const SamplerConfig& cfg);

} // namespace distflag
