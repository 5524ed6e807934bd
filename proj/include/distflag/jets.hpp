#pragma once

#include <map>
#include <string>
#include <vector>

#include "distflag/geom.hpp"

namespace distflag {

// Multi-index (i, j) = (#x-derivatives, #y-derivatives) of the scalar
// dependent variable u; u00 is written "u", u21 = u_xxy. Single digits only,
// which caps jet orders at 9 (far above the corpus).
using MultiIndex = std::pair<int, int>;

std::string jet_coord_name(const MultiIndex& m);
int jet_order(const MultiIndex& m);
std::vector<MultiIndex> indices_of_order(int k); // (k,0), (k-1,1), ..., (0,k)

// Scalar PDE system in two independent variables, given in solved form:
// constrained jet coordinates expressed over the internal (unconstrained)
// ones. Prolongation extends `solved` level by level.
struct PdeSystem {
    std::string name;
    int order = 0;                      // current top order
    std::map<MultiIndex, Expr> solved;  // constrained coordinates, all levels
    std::map<MultiIndex, Expr> declared; // the originally declared equations
    std::vector<std::string> params;
    Point base_point;

    bool is_constrained(const MultiIndex& m) const { return solved.count(m) != 0; }
    std::vector<std::string> internal_coords() const; // x, y, then free u_ij by level
    std::vector<MultiIndex> free_top() const;         // unconstrained with |ij| == order
    std::vector<int> declared_orders() const;         // sorted equation orders
};

// Validates a newly declared system: pure order, solved form over internal
// coordinates and parameters.
PdeSystem make_system(std::string name, int order, std::map<MultiIndex, Expr> solved,
                      std::vector<std::string> params, Point base_point);

// Total derivative restricted to the equation: constrained coordinates are
// substituted by their defining expressions. Raises ExceedsJetOrder when f
// depends on a top coordinate whose derivative is not yet known.
Expr total_derivative(const PdeSystem& sys, const Expr& f, char direction,
                      const SamplerConfig& cfg);

// One prolongation step with compatibility certification; cross-conditions
// that determine a previously free coordinate are solved for (linear
// occurrence required).
PdeSystem prolong_system(const PdeSystem& sys, const SamplerConfig& cfg);

struct SymbolProfile {
    std::vector<int> g_dims; // dim g_i for i = 0..t
    int t = 0;               // stabilization order
    int kappa = 0;           // complexity
    int omega = 1;           // class
    std::string type_string; // e.g. "2E2", "E2+E3"
};

// Symbol dimensions from the declared orders under the genericity assumption,
// cross-checked against the actual free-coordinate counts of repeated
// prolongation; a mismatch is an error, not a warning.
SymbolProfile symbol_profile(const PdeSystem& sys, const SamplerConfig& cfg);

// Rank-3 induced Cartan distribution on the internal chart of a system
// prolonged to its stabilization order: D_x|_E, D_y|_E and the symbol
// direction.
Distribution cartan_distribution(const PdeSystem& sys, const SamplerConfig& cfg);

struct CharacteristicLine {
    bool vertical = false; // characteristic covector (0,1); Cauchy direction is D_x
    Expr slope;            // lambda_char with xi_y = lambda_char * xi_x, valid unless vertical
};

// Greatest common divisor of the equation symbols as binary forms in
// (xi_x, xi_y); class 1 requires total degree exactly one.
CharacteristicLine characteristic_line(const PdeSystem& sys, const SamplerConfig& cfg);

// Prolongation of a point vector field on (x, dep_1, ..., dep_k) to the
// product jet chart with per-dependent depths; chart order is
// (x, dep_1, dep_1 jets..., dep_2, ...).
VectorField prolong_point_field(const VectorField& x,
                                const std::vector<std::pair<std::string, int>>& deps,
                                const SamplerConfig& cfg);
std::vector<std::string> product_jet_coords(const std::vector<std::pair<std::string, int>>& deps);

// Prolongation of a point field on (x, y, u) to the full scalar jet chart of
// the given order.
VectorField prolong_point_field_2d(const VectorField& x, int order, const SamplerConfig& cfg);
std::vector<std::string> scalar_jet_coords(int order);

} // namespace distflag
