#pragma once

#include <map>
#include <optional>
#include <vector>

#include "distflag/expr.hpp"
#include "distflag/sampler.hpp"

namespace distflag {

struct ExprMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<Expr> entries; // row-major, rows*cols

    ExprMatrix() = default;
    ExprMatrix(int r, int c) : rows(r), cols(c), entries(static_cast<size_t>(r) * c) {}

    Expr& at(int i, int j) { return entries[static_cast<size_t>(i) * cols + j]; }
    const Expr& at(int i, int j) const { return entries[static_cast<size_t>(i) * cols + j]; }

    bool rational_class() const;
    std::vector<std::string> vars() const;
    std::size_t hash() const;
};

// Exact dense linear algebra over the rationals.
using RatRow = std::vector<Rational>;
int rat_rank(std::vector<RatRow> m);
// Particular solution of A x = b with free unknowns set to 0; nullopt when
// inconsistent.
std::optional<RatRow> rat_solve(std::vector<RatRow> a, RatRow b);
std::vector<RatRow> rat_nullspace(std::vector<RatRow> a);

// Dense linear algebra over high-precision reals with threshold pivoting.
using RealRow = std::vector<Real>;
int real_rank(std::vector<RealRow> m, double tol);
std::optional<RealRow> real_solve(std::vector<RealRow> a, RealRow b, double tol);

// Continued-fraction rational reconstruction; nullopt when x is not within
// tol of a rational with denominator <= max_den.
std::optional<Rational> rationalize(const Real& x, unsigned long max_den = 1000000000UL,
                                    double tol = 1e-30);

struct RankResult {
    int rank = 0;
    std::map<int, int> spectrum; // per-point rank -> count; disagreement flags a non-regular locus
    bool agreed() const { return spectrum.size() <= 1; }
};

// Rank at a generic point: the maximum over cfg.trials sampled points of the
// evaluated matrix rank (exact for the rational class, thresholded
// otherwise). The spectrum is reported so a rank drop on a subvariety is
// surfaced rather than silently absorbed.
RankResult generic_rank_full(const ExprMatrix& m, const SamplerConfig& cfg);
int generic_rank(const ExprMatrix& m, const SamplerConfig& cfg);

// Fraction-free Gauss-Jordan elimination with pivots certified by is_zero.
// Returns cols - generic_rank(m) vectors v, denominator-cleared, first
// certified-nonzero entry scaled to 1 when constant (sign-normalized
// otherwise), each certified entrywise against m.
std::vector<std::vector<Expr>> kernel_basis(const ExprMatrix& m, const SamplerConfig& cfg);

// Rational constants c with target = sum c_i * vectors_i as an identity of
// expressions (certified by is_zero entrywise); nullopt when no such
// constants exist.
std::optional<std::vector<Rational>> solve_constant_combination(
    const std::vector<std::vector<Expr>>& vectors, const std::vector<Expr>& target,
    const SamplerConfig& cfg);

} // namespace distflag
