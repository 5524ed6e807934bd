#include "distflag/linalg.hpp"

#include <algorithm>

#include "distflag/errors.hpp"

namespace distflag {

bool ExprMatrix::rational_class() const {
    for (const Expr& e : entries)
        if (!e.rational_class()) return false;
    return true;
}

std::vector<std::string> ExprMatrix::vars() const {
    std::vector<std::string> out;
    for (const Expr& e : entries)
        for (const auto& v : e.vars())
            if (!std::binary_search(out.begin(), out.end(), v))
                out.insert(std::lower_bound(out.begin(), out.end(), v), v);
    return out;
}

std::size_t ExprMatrix::hash() const {
    std::size_t h = static_cast<std::size_t>(rows) * 1315423911u + cols;
    for (const Expr& e : entries) h ^= e.hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

int rat_rank(std::vector<RatRow> m) {
    if (m.empty()) return 0;
    size_t rows = m.size(), cols = m[0].size();
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t piv = r;
        while (piv < rows && m[piv][c].is_zero()) ++piv;
        if (piv == rows) continue;
        std::swap(m[piv], m[r]);
        for (size_t i = r + 1; i < rows; ++i) {
            if (m[i][c].is_zero()) continue;
            Rational f = m[i][c] / m[r][c];
            for (size_t j = c; j < cols; ++j) m[i][j] = m[i][j] - f * m[r][j];
        }
        ++r;
    }
    return static_cast<int>(r);
}

namespace {

// Row-reduce [a | b]; returns pivot column per row and rank.
struct RatEchelon {
    std::vector<RatRow> m;
    std::vector<size_t> pivot_cols;
};

RatEchelon rat_rref(std::vector<RatRow> m) {
    RatEchelon e;
    if (m.empty()) return e;
    size_t rows = m.size(), cols = m[0].size();
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t piv = r;
        while (piv < rows && m[piv][c].is_zero()) ++piv;
        if (piv == rows) continue;
        std::swap(m[piv], m[r]);
        Rational inv = Rational(1) / m[r][c];
        for (size_t j = c; j < cols; ++j) m[r][j] = m[r][j] * inv;
        for (size_t i = 0; i < rows; ++i) {
            if (i == r || m[i][c].is_zero()) continue;
            Rational f = m[i][c];
            for (size_t j = c; j < cols; ++j) m[i][j] = m[i][j] - f * m[r][j];
        }
        e.pivot_cols.push_back(c);
        ++r;
    }
    e.m = std::move(m);
    return e;
}

} // namespace

std::optional<RatRow> rat_solve(std::vector<RatRow> a, RatRow b) {
    size_t rows = a.size();
    size_t cols = rows ? a[0].size() : 0;
    for (size_t i = 0; i < rows; ++i) a[i].push_back(b[i]);
    RatEchelon e = rat_rref(std::move(a));
    RatRow x(cols, Rational(0));
    for (size_t r = 0; r < e.pivot_cols.size(); ++r) {
        size_t c = e.pivot_cols[r];
        if (c == cols) return std::nullopt; // pivot in the rhs column: inconsistent
        x[c] = e.m[r][cols];
    }
    return x;
}

std::vector<RatRow> rat_nullspace(std::vector<RatRow> a) {
    size_t cols = a.empty() ? 0 : a[0].size();
    RatEchelon e = rat_rref(std::move(a));
    std::vector<bool> is_pivot(cols, false);
    for (size_t c : e.pivot_cols) is_pivot[c] = true;
    std::vector<RatRow> basis;
    for (size_t f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        RatRow v(cols, Rational(0));
        v[f] = Rational(1);
        for (size_t r = 0; r < e.pivot_cols.size(); ++r)
            v[e.pivot_cols[r]] = -e.m[r][f];
        basis.push_back(std::move(v));
    }
    return basis;
}

int real_rank(std::vector<RealRow> m, double tol) {
    if (m.empty()) return 0;
    size_t rows = m.size(), cols = m[0].size();
    Real threshold(tol);
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t piv = rows;
        Real best(0L);
        for (size_t i = r; i < rows; ++i) {
            Real a = m[i][c].abs();
            if (a > best) { best = a; piv = i; }
        }
        if (piv == rows || !(best > threshold)) continue;
        std::swap(m[piv], m[r]);
        for (size_t i = r + 1; i < rows; ++i) {
            Real f = m[i][c] / m[r][c];
            for (size_t j = c; j < cols; ++j) m[i][j] = m[i][j] - f * m[r][j];
        }
        ++r;
    }
    return static_cast<int>(r);
}

std::optional<RealRow> real_solve(std::vector<RealRow> a, RealRow b, double tol) {
    size_t rows = a.size();
    size_t cols = rows ? a[0].size() : 0;
    for (size_t i = 0; i < rows; ++i) a[i].push_back(b[i]);
    Real threshold(tol);
    size_t r = 0;
    std::vector<size_t> pivot_cols;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t piv = rows;
        Real best(0L);
        for (size_t i = r; i < rows; ++i) {
            Real x = a[i][c].abs();
            if (x > best) { best = x; piv = i; }
        }
        if (piv == rows || !(best > threshold)) continue;
        std::swap(a[piv], a[r]);
        for (size_t i = 0; i < rows; ++i) {
            if (i == r) continue;
            Real f = a[i][c] / a[r][c];
            for (size_t j = c; j <= cols; ++j) a[i][j] = a[i][j] - f * a[r][j];
        }
        pivot_cols.push_back(c);
        ++r;
    }
    for (size_t i = r; i < rows; ++i)
        if (a[i][cols].abs() > threshold) return std::nullopt; // inconsistent
    RealRow x(cols, Real(0L));
    for (size_t k = 0; k < pivot_cols.size(); ++k)
        x[pivot_cols[k]] = a[k][cols] / a[k][pivot_cols[k]];
    return x;
}

std::optional<Rational> rationalize(const Real& x, unsigned long max_den, double tol) {
    mpz_class p0(0), q0(1), p1(1), q1(0);
    Real v = x;
    Real eps(tol);
    for (int it = 0; it < 64; ++it) {
        mpfr_t fl;
        mpfr_init2(fl, Real::kPrecision);
        mpfr_floor(fl, v.raw());
        mpz_class a;
        mpfr_get_z(a.get_mpz_t(), fl, MPFR_RNDN);
        mpfr_clear(fl);
        mpz_class p2 = a * p1 + p0;
        mpz_class q2 = a * q1 + q0;
        if (q2 > mpz_class(max_den)) return std::nullopt;
        if (q2 != 0) {
            Rational cand{mpq_class(p2, q2)};
            Real err = (x - Real(cand)).abs();
            if (!(err > eps)) return cand;
        }
        Real frac = v - Real(Rational(mpq_class(a)));
        if (!(frac.abs() > eps)) return std::nullopt;
        v = Real(1L) / frac;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    }
    return std::nullopt;
}

namespace {

// Evaluates every entry at a sampled point, retrying on DomainError.
template <typename Row, typename Eval>
std::vector<Row> eval_matrix_at_point(const ExprMatrix& m, const std::vector<std::string>& vars,
                                      Rng& rng, const SamplerConfig& cfg, Eval eval) {
    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
        Point p = sample_point(vars, rng, cfg);
        try {
            std::vector<Row> rows(m.rows);
            for (int i = 0; i < m.rows; ++i) {
                rows[i].reserve(m.cols);
                for (int j = 0; j < m.cols; ++j) rows[i].push_back(eval(m.at(i, j), p));
            }
            return rows;
        } catch (const DomainError&) {
            // resample
        }
    }
    certify_error("SamplingExhausted", "no admissible sample point for matrix evaluation");
}

} // namespace

RankResult generic_rank_full(const ExprMatrix& m, const SamplerConfig& cfg) {
    RankResult res;
    if (m.rows == 0 || m.cols == 0) {
        res.spectrum[0] = cfg.trials;
        return res;
    }
    Rng rng(mix_seed(cfg.seed, salt_of("generic_rank"), m.hash()));
    std::vector<std::string> vars = m.vars();
    bool exact = m.rational_class();
    for (int t = 0; t < cfg.trials; ++t) {
        int r;
        if (exact) {
            auto rows = eval_matrix_at_point<RatRow>(
                m, vars, rng, cfg,
                [](const Expr& e, const Point& p) { return std::get<Rational>(evaluate(e, p)); });
            r = rat_rank(std::move(rows));
        } else {
            auto rows = eval_matrix_at_point<RealRow>(
                m, vars, rng, cfg,
                [](const Expr& e, const Point& p) { return value_to_real(evaluate(e, p)); });
            r = real_rank(std::move(rows), cfg.float_tolerance);
        }
        res.spectrum[r]++;
        res.rank = std::max(res.rank, r);
    }
    return res;
}

int generic_rank(const ExprMatrix& m, const SamplerConfig& cfg) {
    return generic_rank_full(m, cfg).rank;
}

namespace {

bool certified_nonzero(const Expr& e, const SamplerConfig& cfg, const char* where) {
    try {
        return !is_zero(e, cfg);
    } catch (const EngineError& err) {
        if (err.kind() == "SamplingExhausted")
            certify_error("PivotAmbiguity",
                          std::string(where) + ": cannot certify '" + e.str() + "' zero or nonzero");
        throw;
    }
}

} // namespace

std::vector<std::vector<Expr>> kernel_basis(const ExprMatrix& m, const SamplerConfig& cfg) {
    const int rows = m.rows, cols = m.cols;
    std::vector<std::vector<Expr>> w(rows, std::vector<Expr>(cols, Expr::integer(0)));
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) w[i][j] = m.at(i, j);

    std::vector<bool> used(rows, false);
    std::vector<std::pair<int, int>> pivots; // (col, row)
    for (int c = 0; c < cols; ++c) {
        int piv = -1;
        for (int i = 0; i < rows; ++i) {
            if (used[i] || w[i][c].is_zero()) continue;
            if (certified_nonzero(w[i][c], cfg, "kernel_basis pivot")) {
                piv = i;
                break;
            }
            w[i][c] = Expr::integer(0); // certified zero: prune
        }
        if (piv < 0) continue;
        used[piv] = true;
        pivots.emplace_back(c, piv);
        // Fraction-free cross-multiplication against every other row.
        for (int i = 0; i < rows; ++i) {
            if (i == piv || w[i][c].is_zero()) continue;
            for (int j = 0; j < cols; ++j) {
                if (j == c) continue;
                w[i][j] = w[piv][c] * w[i][j] - w[i][c] * w[piv][j];
            }
            w[i][c] = Expr::integer(0);
        }
    }

    std::vector<bool> is_pivot_col(cols, false);
    for (auto& [c, r] : pivots) is_pivot_col[c] = true;

    std::vector<std::vector<Expr>> basis;
    for (int f = 0; f < cols; ++f) {
        if (is_pivot_col[f]) continue;
        std::vector<Expr> v(cols, Expr::integer(0));
        v[f] = Expr::integer(1);
        for (auto& [c, r] : pivots)
            v[c] = Expr::mul({Expr::integer(-1), w[r][f], Expr::pow(w[r][c], Rational(-1))});

        // Clear denominators across the vector.
        std::vector<std::pair<Expr, Rational>> common;
        for (const Expr& e : v) {
            for (const auto& [b, k] : fractionize(e).den) {
                bool found = false;
                for (auto& [cb, ck] : common)
                    if (struct_equal(cb, b)) {
                        if (ck < k) ck = k;
                        found = true;
                        break;
                    }
                if (!found) common.emplace_back(b, k);
            }
        }
        if (!common.empty()) {
            std::vector<Expr> fs;
            for (const auto& [b, k] : common) fs.push_back(Expr::pow(b, k));
            Expr mult = Expr::mul(std::move(fs));
            for (Expr& e : v) e = e * mult;
        }
        // Deterministic normalization: first certified-nonzero entry scaled
        // to 1 when constant, otherwise sign-normalized to a positive lead.
        for (Expr& e : v) e = normalize(e);
        for (int j = 0; j < cols; ++j) {
            if (v[j].is_zero()) continue;
            if (!certified_nonzero(v[j], cfg, "kernel_basis normalization")) {
                v[j] = Expr::integer(0);
                continue;
            }
            if (v[j].is_const()) {
                Expr inv = Expr::constant(Rational(1) / v[j].const_value());
                for (Expr& e : v) e = e * inv;
            } else if (v[j].kind() == Kind::Mul && v[j].args()[0].is_const() &&
                       v[j].args()[0].const_value().sign() < 0) {
                for (Expr& e : v) e = -e;
            }
            break;
        }
        basis.push_back(std::move(v));
    }

    int expected = cols - generic_rank(m, cfg);
    if (static_cast<int>(basis.size()) != expected)
        certify_error("PivotAmbiguity",
                      "kernel dimension " + std::to_string(basis.size()) +
                          " disagrees with cols - rank = " + std::to_string(expected));
    for (const auto& v : basis) {
        for (int i = 0; i < rows; ++i) {
            std::vector<Expr> dot;
            for (int j = 0; j < cols; ++j) dot.push_back(m.at(i, j) * v[j]);
            if (!is_zero(Expr::add(std::move(dot)), cfg))
                certify_error("CertificationFailed", "kernel vector fails M*v = 0");
        }
    }
    return basis;
}

std::optional<std::vector<Rational>> solve_constant_combination(
    const std::vector<std::vector<Expr>>& vectors, const std::vector<Expr>& target,
    const SamplerConfig& cfg) {
    const size_t m = vectors.size();
    const size_t n = target.size();
    for (const auto& v : vectors)
        if (v.size() != n) input_error("ShapeMismatch", "vector lengths disagree");

    std::size_t h = 0;
    std::vector<std::string> vars;
    bool exact = true;
    auto absorb = [&](const Expr& e) {
        h ^= e.hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        exact = exact && e.rational_class();
        for (const auto& v : e.vars())
            if (!std::binary_search(vars.begin(), vars.end(), v))
                vars.insert(std::lower_bound(vars.begin(), vars.end(), v), v);
    };
    for (const auto& v : vectors)
        for (const Expr& e : v) absorb(e);
    for (const Expr& e : target) absorb(e);

    Rng rng(mix_seed(cfg.seed, salt_of("solve_constant_combination"), h));

    std::vector<Rational> coeffs;
    if (m == 0) {
        coeffs.clear();
    } else if (exact) {
        std::vector<RatRow> a;
        RatRow b;
        for (int t = 0; t < cfg.trials; ++t) {
            for (int attempt = 0;; ++attempt) {
                if (attempt >= cfg.max_retries)
                    certify_error("SamplingExhausted", "constant combination sampling failed");
                Point p = sample_point(vars, rng, cfg);
                try {
                    for (size_t k = 0; k < n; ++k) {
                        RatRow row;
                        for (size_t i = 0; i < m; ++i)
                            row.push_back(std::get<Rational>(evaluate(vectors[i][k], p)));
                        a.push_back(std::move(row));
                        b.push_back(std::get<Rational>(evaluate(target[k], p)));
                    }
                    break;
                } catch (const DomainError&) {
                }
            }
        }
        auto sol = rat_solve(std::move(a), std::move(b));
        if (!sol) return std::nullopt;
        coeffs = *sol;
    } else {
        std::vector<RealRow> a;
        RealRow b;
        for (int t = 0; t < cfg.trials; ++t) {
            for (int attempt = 0;; ++attempt) {
                if (attempt >= cfg.max_retries)
                    certify_error("SamplingExhausted", "constant combination sampling failed");
                Point p = sample_point(vars, rng, cfg);
                try {
                    for (size_t k = 0; k < n; ++k) {
                        RealRow row;
                        for (size_t i = 0; i < m; ++i)
                            row.push_back(value_to_real(evaluate(vectors[i][k], p)));
                        a.push_back(std::move(row));
                        b.push_back(value_to_real(evaluate(target[k], p)));
                    }
                    break;
                } catch (const DomainError&) {
                }
            }
        }
        auto sol = real_solve(std::move(a), std::move(b), cfg.float_tolerance);
        if (!sol) return std::nullopt;
        for (const Real& x : *sol) {
            auto q = rationalize(x);
            if (!q) return std::nullopt;
            coeffs.push_back(*q);
        }
    }

    // Symbolic certification is the actual gate; the numeric solve only
    // proposes candidates.
    for (size_t k = 0; k < n; ++k) {
        std::vector<Expr> sum{target[k]};
        for (size_t i = 0; i < m; ++i)
            sum.push_back(Expr::mul({Expr::integer(-1), Expr::constant(coeffs[i]), vectors[i][k]}));
        if (!is_zero(Expr::add(std::move(sum)), cfg)) return std::nullopt;
    }
    return coeffs;
}

} // namespace distflag
