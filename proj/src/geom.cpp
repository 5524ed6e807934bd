#include "distflag/geom.hpp"

#include <algorithm>

#include "distflag/errors.hpp"

namespace distflag {

int Chart::index_of(const std::string& c) const {
    auto it = std::find(coords.begin(), coords.end(), c);
    return it == coords.end() ? -1 : static_cast<int>(it - coords.begin());
}

Rational Chart::base_value(const std::string& c) const {
    auto it = base_point.find(c);
    return it == base_point.end() ? Rational(0) : it->second;
}

Chart Chart::without(const std::string& c) const {
    Chart out;
    out.name = name.empty() ? "" : name + "/" + c;
    for (const auto& x : coords)
        if (x != c) out.coords.push_back(x);
    for (const auto& [k, v] : base_point)
        if (k != c) out.base_point[k] = v;
    return out;
}

Expr VectorField::apply(const Expr& f) const {
    std::vector<Expr> terms;
    for (size_t j = 0; j < coeffs.size(); ++j) {
        if (coeffs[j].is_zero()) continue;
        if (!f.depends_on(chart.coords[j])) continue;
        terms.push_back(coeffs[j] * differentiate(f, chart.coords[j]));
    }
    return Expr::add(std::move(terms));
}

VectorField lie_bracket(const VectorField& x, const VectorField& y) {
    if (!x.chart.same_coords(y.chart))
        input_error("ChartMismatch", "lie_bracket of fields on different charts");
    VectorField out{x.chart, {}};
    out.coeffs.reserve(x.coeffs.size());
    for (size_t i = 0; i < x.coeffs.size(); ++i)
        out.coeffs.push_back(x.apply(y.coeffs[i]) - y.apply(x.coeffs[i]));
    return out;
}

ExprMatrix stack_fields(const std::vector<VectorField>& fields) {
    if (fields.empty()) return ExprMatrix(0, 0);
    ExprMatrix m(static_cast<int>(fields.size()), static_cast<int>(fields[0].coeffs.size()));
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) m.at(i, j) = fields[i].coeffs[j];
    return m;
}

int span_rank(const std::vector<VectorField>& fields, const SamplerConfig& cfg) {
    return generic_rank(stack_fields(fields), cfg);
}

bool in_span(const std::vector<VectorField>& basis, int basis_rank, const VectorField& w,
             const SamplerConfig& cfg) {
    std::vector<VectorField> stacked = basis;
    stacked.push_back(w);
    return span_rank(stacked, cfg) == basis_rank;
}

Distribution make_distribution(Chart chart, std::vector<VectorField> gens,
                               const SamplerConfig& cfg) {
    for (const auto& g : gens) {
        if (!g.chart.same_coords(chart))
            input_error("ChartMismatch", "generator chart disagrees with distribution chart");
        if (static_cast<int>(g.coeffs.size()) != chart.dim())
            input_error("ShapeMismatch", "generator length disagrees with chart dimension");
    }
    if (!gens.empty()) {
        int r = span_rank(gens, cfg);
        if (r != static_cast<int>(gens.size()))
            input_error("DegenerateGenerators",
                        "generators have generic rank " + std::to_string(r) + ", expected " +
                            std::to_string(gens.size()));
    }
    return Distribution{std::move(chart), std::move(gens)};
}

Distribution make_distribution(Chart chart, std::vector<std::vector<Expr>> coeffs,
                               const SamplerConfig& cfg) {
    std::vector<VectorField> gens;
    gens.reserve(coeffs.size());
    for (auto& c : coeffs) gens.push_back(VectorField{chart, std::move(c)});
    return make_distribution(std::move(chart), std::move(gens), cfg);
}

namespace {

// Incremental independence testing for flag construction: a fixed set of
// sampled points, one echelon per point, rank = max over live points. A
// point that stops evaluating (new denominators vanishing there) is retired.
class NumericSpan {
public:
    NumericSpan(std::vector<Point> points, bool exact, double tol)
        : points_(std::move(points)), exact_(exact), tol_(tol) {
        rat_ech_.resize(points_.size());
        real_ech_.resize(points_.size());
        live_.assign(points_.size(), true);
    }

    int rank() const { return rank_; }

    // Accepts the field iff it raises the max-over-points rank; commits the
    // row into every live echelon on acceptance.
    bool try_add(const VectorField& f) {
        bool accepted = false;
        for (size_t p = 0; p < points_.size(); ++p) {
            if (!live_[p]) continue;
            int sz = exact_ ? static_cast<int>(rat_ech_[p].size())
                            : static_cast<int>(real_ech_[p].size());
            bool indep = exact_ ? probe_exact(p, f) : probe_real(p, f);
            if (indep && sz + 1 > rank_) accepted = true;
        }
        if (!accepted) return false;
        for (size_t p = 0; p < points_.size(); ++p) {
            if (!live_[p]) continue;
            if (exact_) commit_exact(p, f);
            else commit_real(p, f);
        }
        ++rank_;
        return true;
    }

    void require_live() const {
        for (bool l : live_)
            if (l) return;
        certify_error("SamplingExhausted", "all flag sample points became inadmissible");
    }

private:
    bool eval_row_exact(size_t p, const VectorField& f, RatRow& row) {
        try {
            row.clear();
            for (const Expr& e : f.coeffs) row.push_back(std::get<Rational>(evaluate(e, points_[p])));
            return true;
        } catch (const DomainError&) {
            live_[p] = false;
            return false;
        }
    }
    bool eval_row_real(size_t p, const VectorField& f, RealRow& row) {
        try {
            row.clear();
            for (const Expr& e : f.coeffs) row.push_back(value_to_real(evaluate(e, points_[p])));
            return true;
        } catch (const DomainError&) {
            live_[p] = false;
            return false;
        }
    }

    static bool reduce_rat(const std::vector<RatRow>& ech, RatRow& row) {
        for (const RatRow& e : ech) {
            size_t lead = 0;
            while (lead < e.size() && e[lead].is_zero()) ++lead;
            if (lead == e.size()) continue;
            if (!row[lead].is_zero()) {
                Rational f = row[lead] / e[lead];
                for (size_t j = 0; j < row.size(); ++j) row[j] = row[j] - f * e[j];
            }
        }
        for (const Rational& x : row)
            if (!x.is_zero()) return true;
        return false;
    }
    bool reduce_real(const std::vector<RealRow>& ech, RealRow& row) const {
        for (const RealRow& e : ech) {
            size_t lead = 0;
            Real threshold(tol_);
            while (lead < e.size() && !(e[lead].abs() > threshold)) ++lead;
            if (lead == e.size()) continue;
            Real f = row[lead] / e[lead];
            for (size_t j = 0; j < row.size(); ++j) row[j] = row[j] - f * e[j];
        }
        Real threshold(tol_);
        for (const Real& x : row)
            if (x.abs() > threshold) return true;
        return false;
    }

    bool probe_exact(size_t p, const VectorField& f) {
        RatRow row;
        if (!eval_row_exact(p, f, row)) return false;
        return reduce_rat(rat_ech_[p], row);
    }
    bool probe_real(size_t p, const VectorField& f) {
        RealRow row;
        if (!eval_row_real(p, f, row)) return false;
        return reduce_real(real_ech_[p], row);
    }
    void commit_exact(size_t p, const VectorField& f) {
        RatRow row;
        if (!eval_row_exact(p, f, row)) return;
        if (reduce_rat(rat_ech_[p], row)) rat_ech_[p].push_back(std::move(row));
    }
    void commit_real(size_t p, const VectorField& f) {
        RealRow row;
        if (!eval_row_real(p, f, row)) return;
        if (reduce_real(real_ech_[p], row)) real_ech_[p].push_back(std::move(row));
    }

    std::vector<Point> points_;
    bool exact_;
    double tol_;
    std::vector<std::vector<RatRow>> rat_ech_;
    std::vector<std::vector<RealRow>> real_ech_;
    std::vector<bool> live_;
    int rank_ = 0;
};

std::vector<std::string> field_vars(const std::vector<VectorField>& fields) {
    std::vector<std::string> out;
    for (const auto& f : fields)
        for (const Expr& e : f.coeffs)
            for (const auto& v : e.vars())
                if (!std::binary_search(out.begin(), out.end(), v))
                    out.insert(std::lower_bound(out.begin(), out.end(), v), v);
    return out;
}

bool fields_rational_class(const std::vector<VectorField>& fields) {
    for (const auto& f : fields)
        for (const Expr& e : f.coeffs)
            if (!e.rational_class()) return false;
    return true;
}

Flag flag_impl(const Distribution& d, FlagMode mode, int max_steps, const SamplerConfig& cfg,
               bool require_stable) {
    Flag flag;
    flag.mode = mode;
    if (d.rank() == 0) {
        flag.steps = {d};
        flag.growth = {0};
        flag.reduced_growth = {0};
        return flag;
    }

    // One deterministic point set drives the whole tower. The coefficient
    // field is closed under differentiation, so no new variables can appear.
    std::vector<std::string> vars = field_vars(d.gens);
    for (const auto& c : d.chart.coords)
        if (!std::binary_search(vars.begin(), vars.end(), c))
            vars.insert(std::lower_bound(vars.begin(), vars.end(), c), c);
    std::size_t h = stack_fields(d.gens).hash() ^ (static_cast<std::size_t>(mode) << 1);
    Rng rng(mix_seed(cfg.seed, salt_of("derived_flag"), h));
    // Points must at least evaluate the generators (positivity of radicands,
    // poles); candidates appearing later can still retire a point.
    std::vector<Point> points;
    for (int t = 0; t < cfg.trials; ++t) {
        bool found = false;
        for (int attempt = 0; attempt < cfg.max_retries && !found; ++attempt) {
            Point p = sample_point(vars, rng, cfg);
            try {
                for (const auto& g : d.gens)
                    for (const Expr& e : g.coeffs) (void)evaluate(e, p);
                points.push_back(std::move(p));
                found = true;
            } catch (const DomainError&) {
            }
        }
        if (!found)
            certify_error("SamplingExhausted", "no admissible sample points for the derived flag");
    }
    NumericSpan span(std::move(points), fields_rational_class(d.gens), cfg.float_tolerance);

    std::vector<VectorField> basis;
    for (const auto& g : d.gens) {
        if (!span.try_add(g))
            certify_error("SamplingExhausted", "distribution generators degenerate at all samples");
        basis.push_back(g);
    }
    span.require_live();

    flag.steps.push_back(d);
    flag.growth.push_back(span.rank());

    std::vector<VectorField> prev_new = d.gens;
    for (int round = 0;; ++round) {
        if (span.rank() == d.dim()) break; // full tangent space
        if (round >= max_steps) {
            flag.stabilized = false;
            if (require_stable)
                math_error("MaxStepsExceeded",
                           "derived flag not stable after " + std::to_string(max_steps) + " steps");
            break;
        }
        std::vector<VectorField> cand;
        if (mode == FlagMode::weak) {
            for (const auto& a : prev_new)
                for (const auto& g : d.gens) cand.push_back(lie_bracket(a, g));
        } else {
            // Pairs with at least one new member; older pairs were exhausted
            // at earlier steps.
            size_t first_new = basis.size() - prev_new.size();
            for (size_t ai = first_new; ai < basis.size(); ++ai)
                for (size_t bi = 0; bi < ai; ++bi)
                    cand.push_back(lie_bracket(basis[bi], basis[ai]));
        }
        std::vector<VectorField> accepted;
        for (auto& c : cand) {
            if (span.try_add(c)) {
                basis.push_back(c);
                accepted.push_back(c);
            }
        }
        span.require_live();
        if (accepted.empty()) break; // stabilized
        flag.steps.push_back(Distribution{d.chart, basis});
        flag.growth.push_back(span.rank());
        prev_new = std::move(accepted);
    }

    flag.reduced_growth.push_back(flag.growth[0]);
    for (size_t i = 1; i < flag.growth.size(); ++i)
        flag.reduced_growth.push_back(flag.growth[i] - flag.growth[i - 1]);
    return flag;
}

} // namespace

Flag derived_flag(const Distribution& d, FlagMode mode, int max_steps, const SamplerConfig& cfg) {
    return flag_impl(d, mode, max_steps, cfg, true);
}

Flag derived_flag_prefix(const Distribution& d, FlagMode mode, int max_steps,
                         const SamplerConfig& cfg) {
    return flag_impl(d, mode, max_steps, cfg, false);
}

namespace {

bool certified_nonzero_expr(const Expr& e, const SamplerConfig& cfg) {
    return !e.is_zero() && !is_zero(e, cfg);
}

} // namespace

// Reduction modulo the span of a generator set: picks pivot rows once, then
// solves the pivot subsystem per field and returns coefficients plus the
// unscaled residual (identically zero on pivot rows).
class SpanReducer {
public:
    SpanReducer(const std::vector<VectorField>& gens, const SamplerConfig& cfg)
        : gens_(gens), cfg_(cfg) {
        const int r = static_cast<int>(gens.size());
        const int n = gens.empty() ? 0 : static_cast<int>(gens[0].coeffs.size());
        // Forward elimination with certified pivots on the n x r coefficient
        // matrix (columns = generators).
        std::vector<std::vector<Expr>> w(n, std::vector<Expr>(r, Expr::integer(0)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < r; ++j) w[i][j] = gens[j].coeffs[i];
        std::vector<bool> used(n, false);
        for (int c = 0; c < r; ++c) {
            int piv = -1;
            for (int i = 0; i < n; ++i) {
                if (used[i] || w[i][c].is_zero()) continue;
                bool nz;
                try {
                    nz = !is_zero(w[i][c], cfg);
                } catch (const EngineError& err) {
                    if (err.kind() == "SamplingExhausted")
                        certify_error("PivotAmbiguity", "span reduction pivot uncertifiable");
                    throw;
                }
                if (nz) {
                    piv = i;
                    break;
                }
                w[i][c] = Expr::integer(0);
            }
            if (piv < 0)
                certify_error("PivotAmbiguity", "generators not independent in span reduction");
            used[piv] = true;
            pivot_rows_.push_back(piv);
            for (int i = 0; i < n; ++i) {
                if (used[i] || w[i][c].is_zero()) continue;
                Expr f = w[i][c] * Expr::pow(w[piv][c], Rational(-1));
                for (int j = 0; j < r; ++j) w[i][j] = normalize(w[i][j] - f * w[piv][j]);
                w[i][c] = Expr::integer(0);
            }
        }
        // Invert the r x r pivot submatrix by Gauss-Jordan with divisions.
        std::vector<std::vector<Expr>> a(r, std::vector<Expr>(2 * r, Expr::integer(0)));
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < r; ++j) a[i][j] = gens[j].coeffs[pivot_rows_[i]];
            a[i][r + i] = Expr::integer(1);
        }
        for (int c = 0; c < r; ++c) {
            int piv = -1;
            for (int i = c; i < r; ++i) {
                if (!a[i][c].is_zero() && certified_nonzero_expr(a[i][c], cfg)) {
                    piv = i;
                    break;
                }
            }
            if (piv < 0) certify_error("PivotAmbiguity", "pivot submatrix singular");
            std::swap(a[piv], a[c]);
            Expr inv = Expr::pow(a[c][c], Rational(-1));
            for (int j = 0; j < 2 * r; ++j) a[c][j] = normalize(a[c][j] * inv);
            for (int i = 0; i < r; ++i) {
                if (i == c || a[i][c].is_zero()) continue;
                Expr f = a[i][c];
                for (int j = 0; j < 2 * r; ++j) a[i][j] = normalize(a[i][j] - f * a[c][j]);
            }
        }
        inverse_.assign(r, std::vector<Expr>(r, Expr::integer(0)));
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) inverse_[i][j] = a[i][r + j];
    }

    const std::vector<int>& pivot_rows() const { return pivot_rows_; }

    std::pair<std::vector<Expr>, std::vector<Expr>> reduce(const VectorField& w) const {
        const int r = static_cast<int>(gens_.size());
        const int n = static_cast<int>(w.coeffs.size());
        std::vector<Expr> c(r, Expr::integer(0));
        for (int i = 0; i < r; ++i) {
            std::vector<Expr> terms;
            for (int j = 0; j < r; ++j)
                terms.push_back(inverse_[i][j] * w.coeffs[pivot_rows_[j]]);
            c[i] = Expr::add(std::move(terms));
        }
        std::vector<Expr> resid(n, Expr::integer(0));
        std::vector<bool> is_pivot(n, false);
        for (int p : pivot_rows_) is_pivot[p] = true;
        for (int k = 0; k < n; ++k) {
            if (is_pivot[k]) continue; // identically zero by construction
            std::vector<Expr> terms{w.coeffs[k]};
            for (int j = 0; j < r; ++j)
                terms.push_back(Expr::mul({Expr::integer(-1), c[j], gens_[j].coeffs[k]}));
            resid[k] = Expr::add(std::move(terms));
        }
        return {std::move(c), std::move(resid)};
    }

private:
    std::vector<VectorField> gens_;
    SamplerConfig cfg_;
    std::vector<int> pivot_rows_;
    std::vector<std::vector<Expr>> inverse_;
};

CauchyResult cauchy_characteristics_full(const Distribution& d, const SamplerConfig& cfg) {
    CauchyResult out;
    const int r = d.rank();
    const int n = d.dim();
    if (r == 0) return out;

    SpanReducer red(d.gens, cfg);
    std::vector<bool> is_pivot(n, false);
    for (int p : red.pivot_rows()) is_pivot[p] = true;

    // Residuals of [G_i, G_j] modulo the span, i < j; the (j,i) residual is
    // the negative.
    std::map<std::pair<int, int>, std::vector<Expr>> rho;
    for (int i = 0; i < r; ++i)
        for (int j = i + 1; j < r; ++j)
            rho[{i, j}] = red.reduce(lie_bracket(d.gens[i], d.gens[j])).second;

    auto rho_at = [&](int i, int j, int k) -> Expr {
        if (i == j) return Expr::integer(0);
        if (i < j) return rho[{i, j}][k];
        return -rho[{j, i}][k];
    };

    // Conditions: for X = sum a_i G_i, each [X, G_j] must reduce to zero
    // modulo the span; the a_i enter pointwise linearly.
    std::vector<std::vector<Expr>> rows;
    for (int j = 0; j < r; ++j) {
        for (int k = 0; k < n; ++k) {
            if (is_pivot[k]) continue;
            std::vector<Expr> row;
            bool all_zero = true;
            for (int i = 0; i < r; ++i) {
                Expr e = rho_at(i, j, k);
                if (!e.is_zero()) all_zero = false;
                row.push_back(e);
            }
            if (!all_zero) rows.push_back(std::move(row));
        }
    }

    std::vector<std::vector<Expr>> sols;
    if (rows.empty()) {
        for (int i = 0; i < r; ++i) {
            std::vector<Expr> v(r, Expr::integer(0));
            v[i] = Expr::integer(1);
            sols.push_back(std::move(v));
        }
    } else {
        ExprMatrix a(static_cast<int>(rows.size()), r);
        for (int i = 0; i < a.rows; ++i)
            for (int j = 0; j < r; ++j) a.at(i, j) = rows[i][j];
        sols = kernel_basis(a, cfg);
    }

    for (const auto& coeffs : sols) {
        VectorField x{d.chart, std::vector<Expr>(n, Expr::integer(0))};
        for (int k = 0; k < n; ++k) {
            std::vector<Expr> terms;
            for (int i = 0; i < r; ++i) terms.push_back(coeffs[i] * d.gens[i].coeffs[k]);
            x.coeffs[k] = Expr::add(std::move(terms));
        }
        // Re-certify by bracketing against every generator.
        for (int j = 0; j < r; ++j) {
            if (!in_span(d.gens, r, lie_bracket(x, d.gens[j]), cfg))
                certify_error("CertificationFailed",
                              "candidate Cauchy characteristic fails re-bracketing");
        }
        out.fields.push_back(std::move(x));
        out.in_generator_basis.push_back(coeffs);
    }
    return out;
}

Distribution cauchy_characteristics(const Distribution& d, const SamplerConfig& cfg) {
    CauchyResult res = cauchy_characteristics_full(d, cfg);
    if (res.fields.empty()) return Distribution{d.chart, {}};
    return make_distribution(d.chart, res.fields, cfg);
}

Distribution transversal_reduction(const Distribution& d, const VectorField& xi,
                                   const std::string& coord, const Rational& value,
                                   const SamplerConfig& cfg) {
    if (!xi.chart.same_coords(d.chart))
        input_error("ChartMismatch", "characteristic lives on a different chart");
    int idx = d.chart.index_of(coord);
    if (idx < 0) input_error("UnknownCoordinate", "no coordinate '" + coord + "'");
    const Expr& xc = xi.coeffs[idx];
    if (xc.is_zero() || is_zero(xc, cfg))
        math_error("ZeroTransversalCoefficient",
                   "characteristic has zero coefficient at '" + coord + "'");

    SpanReducer red(d.gens, cfg);
    auto [c, resid] = red.reduce(xi);
    for (const Expr& e : resid)
        if (!e.is_zero() && !is_zero(e, cfg))
            math_error("NotInDistribution", "field is not a section of the distribution");

    // Drop one generator carrying the xi-direction: prefer a constant
    // coefficient for reproducible quotient models.
    int drop = -1;
    for (int i = 0; i < d.rank(); ++i)
        if (c[i].is_const() && !c[i].const_value().is_zero()) {
            drop = i;
            break;
        }
    if (drop < 0)
        for (int i = 0; i < d.rank(); ++i)
            if (certified_nonzero_expr(c[i], cfg)) {
                drop = i;
                break;
            }
    if (drop < 0) math_error("NotInDistribution", "field vanishes in the generator basis");

    Chart slice = d.chart.without(coord);
    std::map<std::string, Expr> bind{{coord, Expr::constant(value)}};
    Expr inv_xc = Expr::pow(xc, Rational(-1));

    std::vector<std::vector<Expr>> new_coeffs;
    for (int i = 0; i < d.rank(); ++i) {
        if (i == drop) continue;
        const VectorField& g = d.gens[i];
        Expr factor = g.coeffs[idx] * inv_xc;
        std::vector<Expr> row;
        for (int k = 0; k < d.dim(); ++k) {
            if (k == idx) continue;
            Expr e = factor.is_zero() ? g.coeffs[k] : g.coeffs[k] - factor * xi.coeffs[k];
            row.push_back(substitute(e, bind));
        }
        new_coeffs.push_back(std::move(row));
    }
    return make_distribution(std::move(slice), std::move(new_coeffs), cfg);
}

bool deprolongable(const Distribution& d, const SamplerConfig& cfg) {
    if (d.rank() != 2) return false;
    Flag f = derived_flag_prefix(d, FlagMode::weak, 3, cfg);
    if (f.growth.size() < 3) return false;
    if (!(f.growth[0] == 2 && f.growth[1] == 3 && f.growth[2] == 4)) return false;
    return cauchy_characteristics_full(f.steps[1], cfg).fields.size() == 1;
}

DeprolongStep deprolong_full(const Distribution& d, const SamplerConfig& cfg) {
    if (d.rank() != 2) math_error("NotDeprolongable", "rank must be 2");
    Flag f = derived_flag_prefix(d, FlagMode::weak, 3, cfg);
    auto growth_str = [&]() {
        std::string s = "(";
        for (size_t i = 0; i < f.growth.size(); ++i)
            s += (i ? "," : "") + std::to_string(f.growth[i]);
        return s + (f.stabilized ? ")" : ",...)");
    };
    if (f.growth.size() < 3 || f.growth[1] != 3 || f.growth[2] != 4)
        math_error("NotDeprolongable", "weak growth begins " + growth_str() + ", need (2,3,4)");

    const Distribution derived = f.steps[1];
    CauchyResult ch = cauchy_characteristics_full(derived, cfg);
    if (ch.fields.size() != 1)
        math_error("NotDeprolongable", "derived distribution has Cauchy rank " +
                                           std::to_string(ch.fields.size()) + ", need 1");
    const VectorField& xi = ch.fields[0];

    // Slice coordinates in preference order: certified-nonzero constant
    // coefficients first, then certified-nonzero ones. A candidate whose
    // slice hits a pole or degenerates the generators is skipped.
    std::vector<int> candidates;
    for (int i = 0; i < d.dim(); ++i)
        if (xi.coeffs[i].is_const() && !xi.coeffs[i].const_value().is_zero())
            candidates.push_back(i);
    for (int i = 0; i < d.dim(); ++i)
        if (!xi.coeffs[i].is_const() && certified_nonzero_expr(xi.coeffs[i], cfg))
            candidates.push_back(i);
    if (candidates.empty()) math_error("NotDeprolongable", "characteristic vanishes identically");

    for (int idx : candidates) {
        std::string coord = d.chart.coords[idx];
        Rational value = d.chart.base_value(coord);
        try {
            return DeprolongStep{transversal_reduction(derived, xi, coord, value, cfg), coord,
                                 value, xi};
        } catch (const DomainError&) {
        } catch (const EngineError& e) {
            if (e.kind() != "DegenerateGenerators") throw;
        }
    }
    math_error("NotDeprolongable", "every transversal slice is singular at its base value");
}

Distribution deprolong(const Distribution& d, const SamplerConfig& cfg) {
    return deprolong_full(d, cfg).result;
}

Distribution cartan_prolong(const Distribution& d, const std::string& new_coord,
                            const SamplerConfig& cfg) {
    if (d.rank() != 2) input_error("WrongShape", "cartan_prolong needs a rank-2 distribution");
    if (d.chart.index_of(new_coord) >= 0)
        input_error("UnknownCoordinate", "prolongation coordinate already in chart");
    Chart up = d.chart;
    up.name = d.chart.name.empty() ? "" : d.chart.name + "^(1)";
    up.coords.push_back(new_coord);
    if (!up.base_point.empty()) up.base_point[new_coord] = Rational(0);
    Expr t = Expr::variable(new_coord);
    std::vector<Expr> lifted;
    for (int k = 0; k < d.dim(); ++k)
        lifted.push_back(d.gens[0].coeffs[k] + t * d.gens[1].coeffs[k]);
    lifted.push_back(Expr::integer(0));
    std::vector<Expr> vertical(up.dim(), Expr::integer(0));
    vertical.back() = Expr::integer(1);
    return make_distribution(up, {lifted, vertical}, cfg);
}

} // namespace distflag
