#include <algorithm>

#include "distflag/errors.hpp"
#include "distflag/geom.hpp"

namespace distflag {

bool symmetry_check(const Distribution& d, const Distribution& v, SymmetryMode mode,
                    const SamplerConfig& cfg) {
    if (!d.chart.same_coords(v.chart))
        input_error("ChartMismatch", "symmetry candidates live on a different chart");
    const int rd = d.rank();
    if (mode == SymmetryMode::strict) {
        for (const auto& x : v.gens)
            for (const auto& g : d.gens)
                if (!in_span(d.gens, rd, lie_bracket(x, g), cfg)) return false;
        return true;
    }
    // generalized: [V,V] subset V and [V,D] subset V+D
    const int rv = v.rank();
    for (int i = 0; i < rv; ++i)
        for (int j = i + 1; j < rv; ++j)
            if (!in_span(v.gens, rv, lie_bracket(v.gens[i], v.gens[j]), cfg)) return false;
    std::vector<VectorField> joint = v.gens;
    joint.insert(joint.end(), d.gens.begin(), d.gens.end());
    int rj = span_rank(joint, cfg);
    for (const auto& x : v.gens)
        for (const auto& g : d.gens)
            if (!in_span(joint, rj, lie_bracket(x, g), cfg)) return false;
    return true;
}

bool first_integral_check(const Distribution& d, const Expr& f, const SamplerConfig& cfg) {
    for (const auto& g : d.gens)
        if (!is_zero(g.apply(f), cfg)) return false;
    return true;
}

std::optional<Distribution> restrict_to_integral_level(const Distribution& d, const Expr& f,
                                                       const Rational& value,
                                                       const SamplerConfig& cfg) {
    // Need a coordinate in which f = a*z + g(rest) with a rational constant.
    for (const auto& z : d.chart.coords) {
        if (!f.depends_on(z)) continue;
        Expr a = differentiate(f, z);
        if (!a.is_const() || a.const_value().is_zero()) continue;
        Expr rest = substitute(f, {{z, Expr::integer(0)}});
        Expr z_expr = Expr::mul({Expr::constant(Rational(1) / a.const_value()),
                                 Expr::constant(value) - rest});
        int idx = d.chart.index_of(z);
        Chart slice = d.chart.without(z);
        std::map<std::string, Expr> bind{{z, z_expr}};
        std::vector<std::vector<Expr>> coeffs;
        for (const auto& g : d.gens) {
            std::vector<Expr> row;
            for (int k = 0; k < d.dim(); ++k) {
                if (k == idx) continue;
                row.push_back(substitute(g.coeffs[k], bind));
            }
            coeffs.push_back(std::move(row));
        }
        return make_distribution(std::move(slice), std::move(coeffs), cfg);
    }
    return std::nullopt;
}

Distribution change_coordinates(const Distribution& d, const Chart& target,
                                const std::map<std::string, Expr>& forward,
                                const std::map<std::string, Expr>& inverse,
                                const SamplerConfig& cfg) {
    if (static_cast<int>(forward.size()) != target.dim())
        input_error("SchemaError", "forward map must bind every target coordinate");
    if (static_cast<int>(inverse.size()) != d.dim())
        input_error("SchemaError", "inverse map must bind every source coordinate");
    for (const auto& t : target.coords)
        if (!forward.count(t)) input_error("SchemaError", "forward map misses '" + t + "'");
    for (const auto& s : d.chart.coords)
        if (!inverse.count(s)) input_error("SchemaError", "inverse map misses '" + s + "'");

    // Certify both compositions to be the identity (sampled).
    for (const auto& t : target.coords)
        if (!is_zero(substitute(forward.at(t), inverse) - Expr::variable(t), cfg))
            math_error("NotInverse", "forward(inverse) != id at coordinate '" + t + "'");
    for (const auto& s : d.chart.coords)
        if (!is_zero(substitute(inverse.at(s), forward) - Expr::variable(s), cfg))
            math_error("NotInverse", "inverse(forward) != id at coordinate '" + s + "'");

    std::vector<std::vector<Expr>> pushed;
    for (const auto& g : d.gens) {
        std::vector<Expr> row;
        for (const auto& t : target.coords) {
            // (phi_* X)_t = sum_s dF_t/ds * X_s, expressed in target coords.
            std::vector<Expr> terms;
            for (int s = 0; s < d.dim(); ++s) {
                const std::string& sc = d.chart.coords[s];
                if (!forward.at(t).depends_on(sc) || g.coeffs[s].is_zero()) continue;
                terms.push_back(differentiate(forward.at(t), sc) * g.coeffs[s]);
            }
            row.push_back(substitute(Expr::add(std::move(terms)), inverse));
        }
        pushed.push_back(std::move(row));
    }

    Chart out = target;
    if (out.base_point.empty() && !d.chart.base_point.empty()) {
        Point full;
        for (const auto& s : d.chart.coords) full[s] = d.chart.base_value(s);
        try {
            for (const auto& t : target.coords) {
                Value v = evaluate(forward.at(t), full);
                if (!std::holds_alternative<Rational>(v)) { out.base_point.clear(); break; }
                out.base_point[t] = std::get<Rational>(v);
            }
        } catch (const DomainError&) {
            out.base_point.clear();
        }
    }
    return make_distribution(std::move(out), std::move(pushed), cfg);
}

bool integrable_extension_check(const Distribution& total,
                                const std::vector<std::string>& projected_out,
                                const Distribution& base, const SamplerConfig& cfg) {
    // Base chart must be the total chart minus the projected coordinates.
    std::vector<std::string> expect;
    for (const auto& c : total.chart.coords)
        if (std::find(projected_out.begin(), projected_out.end(), c) == projected_out.end())
            expect.push_back(c);
    if (expect != base.chart.coords)
        input_error("ChartMismatch", "base chart is not total chart minus projected coordinates");
    for (const auto& c : projected_out)
        if (total.chart.index_of(c) < 0)
            input_error("UnknownCoordinate", "projected coordinate '" + c + "' not in total chart");

    // (a) vertical space meets the distribution trivially
    std::vector<VectorField> stacked = total.gens;
    for (const auto& c : projected_out) {
        VectorField vert{total.chart, std::vector<Expr>(total.dim(), Expr::integer(0))};
        vert.coeffs[total.chart.index_of(c)] = Expr::integer(1);
        stacked.push_back(vert);
    }
    if (span_rank(stacked, cfg) != total.rank() + static_cast<int>(projected_out.size()))
        return false;

    // (b) base components independent of the fiber coordinates
    for (const auto& g : total.gens)
        for (const auto& bcoord : base.chart.coords) {
            const Expr& e = g.coeffs[total.chart.index_of(bcoord)];
            for (const auto& c : projected_out)
                if (!is_zero(differentiate(e, c), cfg)) return false;
        }

    // (c) the projections span the base distribution
    std::map<std::string, Expr> bind;
    for (const auto& c : projected_out)
        bind[c] = Expr::constant(total.chart.base_value(c));
    std::vector<VectorField> proj;
    for (const auto& g : total.gens) {
        VectorField p{base.chart, {}};
        for (const auto& bcoord : base.chart.coords)
            p.coeffs.push_back(substitute(g.coeffs[total.chart.index_of(bcoord)], bind));
        proj.push_back(std::move(p));
    }
    int rp = span_rank(proj, cfg);
    if (rp != base.rank()) return false;
    std::vector<VectorField> both = proj;
    both.insert(both.end(), base.gens.begin(), base.gens.end());
    return span_rank(both, cfg) == base.rank();
}

namespace {

// Derived series of the abstract algebra with structure constants c[i][j]
// (i<j) over Q; returns (solvable, derived_length).
std::pair<bool, int> derived_series(const std::map<std::pair<int, int>, std::vector<Rational>>& c,
                                    int n) {
    auto bracket_vec = [&](const RatRow& u, const RatRow& v) {
        RatRow out(n, Rational(0));
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                Rational s = u[i] * v[j] - u[j] * v[i];
                if (s.is_zero()) continue;
                const auto& cij = c.at({i, j});
                for (int k = 0; k < n; ++k) out[k] = out[k] + s * cij[k];
            }
        return out;
    };
    std::vector<RatRow> current;
    for (int i = 0; i < n; ++i) {
        RatRow e(n, Rational(0));
        e[i] = Rational(1);
        current.push_back(std::move(e));
    }
    int length = 0;
    while (true) {
        std::vector<RatRow> brackets;
        for (size_t a = 0; a < current.size(); ++a)
            for (size_t b = a + 1; b < current.size(); ++b)
                brackets.push_back(bracket_vec(current[a], current[b]));
        ++length;
        int r = rat_rank(brackets);
        if (r == 0) return {true, length};
        if (r >= static_cast<int>(current.size())) return {false, length};
        // Reduce to an independent basis of the derived subalgebra.
        std::vector<RatRow> basis;
        for (auto& row : brackets) {
            std::vector<RatRow> probe = basis;
            probe.push_back(row);
            if (rat_rank(probe) > static_cast<int>(basis.size())) basis.push_back(std::move(row));
        }
        current = std::move(basis);
    }
}

} // namespace

SolvableReport solvable_transversal_check(const Distribution& d,
                                          const std::vector<VectorField>& fields,
                                          const SamplerConfig& cfg) {
    SolvableReport rep;
    for (const auto& f : fields)
        if (!f.chart.same_coords(d.chart))
            input_error("ChartMismatch", "symmetry field lives on a different chart");
    const int m = static_cast<int>(fields.size());
    rep.count_ok = (m == d.dim() - d.rank());

    // Strict symmetries closing within their own span.
    rep.is_symmetry_algebra = true;
    for (const auto& f : fields)
        for (const auto& g : d.gens)
            if (!in_span(d.gens, d.rank(), lie_bracket(f, g), cfg)) {
                rep.is_symmetry_algebra = false;
                break;
            }
    int rf = m > 0 ? span_rank(fields, cfg) : 0;
    if (rep.is_symmetry_algebra)
        for (int i = 0; i < m && rep.is_symmetry_algebra; ++i)
            for (int j = i + 1; j < m; ++j)
                if (!in_span(fields, rf, lie_bracket(fields[i], fields[j]), cfg)) {
                    rep.is_symmetry_algebra = false;
                    break;
                }

    // Rational structure constants; any failure reports function-coefficient
    // closure rather than a genuine abstract algebra.
    std::vector<std::vector<Expr>> vectors;
    for (const auto& f : fields) vectors.push_back(f.coeffs);
    std::map<std::pair<int, int>, std::vector<Rational>> sc;
    rep.closes_with_constants = true;
    for (int i = 0; i < m && rep.closes_with_constants; ++i)
        for (int j = i + 1; j < m; ++j) {
            auto c = solve_constant_combination(vectors, lie_bracket(fields[i], fields[j]).coeffs,
                                                cfg);
            if (!c) {
                rep.closes_with_constants = false;
                break;
            }
            sc[{i, j}] = *c;
        }

    if (rep.closes_with_constants && m > 0) {
        auto [solvable, length] = derived_series(sc, m);
        rep.solvable = solvable;
        rep.derived_length = length;
    }

    std::vector<VectorField> stacked = fields;
    stacked.insert(stacked.end(), d.gens.begin(), d.gens.end());
    rep.transversal = span_rank(stacked, cfg) == m + d.rank();
    return rep;
}

namespace {

Expr det_expr(std::vector<std::vector<Expr>> m) {
    const size_t n = m.size();
    if (n == 0) return Expr::integer(1);
    if (n == 1) return m[0][0];
    // Laplace expansion along the column with the most structural zeros.
    size_t best_col = 0, best_zeros = 0;
    for (size_t c = 0; c < n; ++c) {
        size_t z = 0;
        for (size_t r = 0; r < n; ++r)
            if (m[r][c].is_zero()) ++z;
        if (z > best_zeros) { best_zeros = z; best_col = c; }
    }
    std::vector<Expr> terms;
    for (size_t r = 0; r < n; ++r) {
        if (m[r][best_col].is_zero()) continue;
        std::vector<std::vector<Expr>> minor;
        for (size_t i = 0; i < n; ++i) {
            if (i == r) continue;
            std::vector<Expr> row;
            for (size_t j = 0; j < n; ++j)
                if (j != best_col) row.push_back(m[i][j]);
            minor.push_back(std::move(row));
        }
        Expr term = m[r][best_col] * det_expr(std::move(minor));
        if ((r + best_col) % 2 == 1) term = -term;
        terms.push_back(term);
    }
    return Expr::add(std::move(terms));
}

Expr wedge5(const VectorField& a, const VectorField& b, const VectorField& c,
            const VectorField& d, const VectorField& e) {
    std::vector<std::vector<Expr>> m(5, std::vector<Expr>(5, Expr::integer(0)));
    const VectorField* fs[5] = {&a, &b, &c, &d, &e};
    for (int col = 0; col < 5; ++col)
        for (int row = 0; row < 5; ++row) m[row][col] = fs[col]->coeffs[row];
    return det_expr(std::move(m));
}

} // namespace

MongeInvariants monge_invariants(const Distribution& d, const SamplerConfig& cfg) {
    if (d.rank() != 2 || d.dim() != 5)
        input_error("WrongShape", "monge_invariants needs a rank-2 distribution on a 5-chart");
    const VectorField& zeta = d.gens[0];
    const VectorField& eta = d.gens[1];
    VectorField b1 = lie_bracket(zeta, eta);
    VectorField bz = lie_bracket(zeta, b1);
    VectorField be = lie_bracket(eta, b1);

    MongeInvariants inv;
    inv.theta0 = wedge5(zeta, eta, b1, bz, be);
    inv.theta1 = wedge5(zeta, eta, b1, bz, lie_bracket(zeta, bz));
    inv.theta2 = wedge5(zeta, eta, b1, bz, lie_bracket(zeta, be));
    inv.theta3 = wedge5(zeta, eta, b1, bz, lie_bracket(eta, be));
    inv.nonzero0 = !is_zero(inv.theta0, cfg);
    inv.nonzero1 = !is_zero(inv.theta1, cfg);
    inv.nonzero2 = !is_zero(inv.theta2, cfg);
    inv.nonzero3 = !is_zero(inv.theta3, cfg);
    return inv;
}

std::string GoursatVerdict::str() const {
    switch (type) {
        case Type::Goursat:
            return "Goursat(" + std::to_string(d) + ")";
        case Type::GoursatFrobenius:
            return "GoursatFrobenius(" + std::to_string(d) + ", " + std::to_string(m) + ")";
        case Type::NotLinearizable: {
            std::string s = "NotLinearizable((";
            for (size_t i = 0; i < growth.size(); ++i) s += (i ? "," : "") + std::to_string(growth[i]);
            return s + "))";
        }
    }
    return "?";
}

namespace {

bool grows_by_one(const std::vector<int>& g) {
    for (size_t i = 1; i < g.size(); ++i)
        if (g[i] != g[i - 1] + 1) return false;
    return true;
}

} // namespace

GoursatVerdict goursat_verdict(const Distribution& d, const SamplerConfig& cfg, int max_steps,
                               std::optional<int> pipeline_d) {
    if (d.rank() != 2) input_error("WrongShape", "goursat_verdict needs a rank-2 distribution");
    Flag weak = derived_flag(d, FlagMode::weak, max_steps, cfg);
    Flag strong = derived_flag(d, FlagMode::strong, max_steps, cfg);
    return goursat_verdict_from_flags(weak, strong, d.dim(), pipeline_d);
}

GoursatVerdict goursat_verdict_from_flags(const Flag& weak, const Flag& strong, int dim,
                                          std::optional<int> pipeline_d) {
    int closure = strong.growth.back();
    if (weak.growth.back() != closure)
        certify_error("CertificationFailed", "weak and strong closures disagree");
    GoursatVerdict v;
    v.m = dim - closure;
    v.d = pipeline_d ? *pipeline_d : closure - 2;
    // Goursat means the tower climbs by exactly one in each step; the strong
    // flag is the discriminating one (a weak +1 tower can still hide a
    // strong jump), the weak tower is required to match it.
    if (grows_by_one(strong.growth) && grows_by_one(weak.growth)) {
        v.type = v.m == 0 ? GoursatVerdict::Type::Goursat : GoursatVerdict::Type::GoursatFrobenius;
        v.growth = weak.growth;
        return v;
    }
    v.type = GoursatVerdict::Type::NotLinearizable;
    v.growth = grows_by_one(strong.growth) ? weak.growth : strong.growth;
    return v;
}

} // namespace distflag
