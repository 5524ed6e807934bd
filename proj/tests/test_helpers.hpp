#pragma once

#include <string>
#include <vector>

#include "distflag/document.hpp"
#include "distflag/errors.hpp"
#include "distflag/parser.hpp"

namespace distflag::testing {

inline Expr P(const std::string& text, const std::vector<std::string>& vars) {
    return parse_expr(text, vars);
}

inline Distribution dist(const std::string& name, std::vector<std::string> coords,
                         std::vector<std::vector<std::string>> rows,
                         const SamplerConfig& cfg = SamplerConfig{}) {
    Chart ch{name, coords, {}};
    std::vector<std::vector<Expr>> cs;
    for (auto& r : rows) {
        std::vector<Expr> row;
        for (auto& s : r) row.push_back(parse_expr(s, coords));
        cs.push_back(std::move(row));
    }
    return make_distribution(ch, cs, cfg);
}

inline Distribution heisenberg() { return dist("heis", {"x", "y", "z"}, {{"1", "0", "0"}, {"0", "1", "x"}}); }
inline Distribution contact3() { return dist("contact", {"x", "y", "y1"}, {{"1", "y1", "0"}, {"0", "0", "1"}}); }
inline Distribution engel() {
    return dist("engel", {"x", "y", "y1", "y2"}, {{"1", "y1", "y2", "0"}, {"0", "0", "0", "1"}});
}
inline Distribution j3cartan() {
    return dist("j3", {"x", "y", "y1", "y2", "y3"},
                {{"1", "y1", "y2", "y3", "0"}, {"0", "0", "0", "0", "1"}});
}
inline Distribution hilbert_cartan() {
    return dist("hc", {"x", "z", "z1", "z2", "w"},
                {{"1", "z1", "z2", "0", "z2^2"}, {"0", "0", "0", "1", "0"}});
}

inline PdeSystem system_of(const std::string& name, int order,
                           std::vector<std::pair<std::string, std::string>> eqs,
                           std::vector<std::string> params = {}, Point base = {}) {
    std::vector<std::string> vars = scalar_jet_coords(order);
    for (auto& p : params) vars.push_back(p);
    std::map<MultiIndex, Expr> solved;
    for (auto& [k, v] : eqs) solved[{k[0] - '0', k[1] - '0'}] = parse_expr(v, vars);
    return make_system(name, order, solved, params, base);
}

inline PdeSystem eceq_system() {
    return system_of("eceq", 2, {{"11", "(1/2)*u20^2"}, {"02", "(1/3)*u20^3"}});
}
inline PdeSystem e3_system() {
    return system_of("2e3", 3, {{"30", "(1/4)*u03^4"}, {"12", "(1/2)*u03^2"}}, {},
                     {{"u03", Rational(1)}});
}

inline std::string corpus(const std::string& file) { return std::string(CORPUS_DIR) + "/" + file; }

// Random normalized expressions for property tests. rational_only restricts
// to integer powers and no transcendental nodes.
inline Expr random_expr(Rng& rng, const std::vector<std::string>& vars, int depth,
                        bool rational_only) {
    if (depth <= 0 || rng.uniform(4) == 1) {
        if (rng.coin()) return Expr::variable(vars[static_cast<size_t>(rng.uniform(static_cast<long>(vars.size())) - 1)]);
        return Expr::constant(rng.rational(6));
    }
    switch (rng.uniform(rational_only ? 4 : 5)) {
        case 1: {
            std::vector<Expr> ts;
            int n = static_cast<int>(rng.uniform(3)) + 1;
            for (int i = 0; i < n; ++i) ts.push_back(random_expr(rng, vars, depth - 1, rational_only));
            return Expr::add(std::move(ts));
        }
        case 2: {
            std::vector<Expr> fs;
            int n = static_cast<int>(rng.uniform(3)) + 1;
            for (int i = 0; i < n; ++i) fs.push_back(random_expr(rng, vars, depth - 1, rational_only));
            return Expr::mul(std::move(fs));
        }
        case 3:
            return Expr::pow(random_expr(rng, vars, depth - 1, rational_only),
                             Rational(rng.uniform(3)));
        case 4:
            return random_expr(rng, vars, depth - 1, rational_only) +
                   random_expr(rng, vars, depth - 1, rational_only);
        default: {
            FuncKind fk = static_cast<FuncKind>(rng.uniform(4) - 1);
            return Expr::func(fk, random_expr(rng, vars, depth - 1, true));
        }
    }
}

// Random polynomial vector field with small integer-coefficient entries.
inline VectorField random_poly_field(Rng& rng, const Chart& chart) {
    VectorField f{chart, {}};
    for (int i = 0; i < chart.dim(); ++i) {
        std::vector<Expr> terms;
        int n = static_cast<int>(rng.uniform(2));
        for (int t = 0; t < n; ++t) {
            std::vector<Expr> fs{Expr::constant(rng.rational(3))};
            int deg = static_cast<int>(rng.uniform(2));
            for (int d = 0; d < deg; ++d)
                fs.push_back(Expr::variable(
                    chart.coords[static_cast<size_t>(rng.uniform(chart.dim()) - 1)]));
            terms.push_back(Expr::mul(std::move(fs)));
        }
        f.coeffs.push_back(Expr::add(std::move(terms)));
    }
    return f;
}

// Unipotent triangular polynomial diffeomorphism with exact inverse:
// x_i -> x_i + p_i(x_1, ..., x_{i-1}).
struct TriDiffeo {
    Chart target;
    std::map<std::string, Expr> forward;
    std::map<std::string, Expr> inverse;
};

inline TriDiffeo random_triangular_diffeo(Rng& rng, const Chart& chart) {
    TriDiffeo d;
    d.target = chart;
    d.target.name = chart.name + "_twisted";
    const auto& cs = chart.coords;
    // forward: t_i = s_i + p_i(s_1..s_{i-1})
    std::vector<Expr> shift(cs.size(), Expr::integer(0));
    for (size_t i = 1; i < cs.size(); ++i) {
        if (rng.coin()) continue;
        size_t j = static_cast<size_t>(rng.uniform(static_cast<long>(i))) - 1;
        Expr mono = Expr::variable(cs[j]);
        if (rng.coin()) mono = mono * Expr::variable(cs[static_cast<size_t>(rng.uniform(static_cast<long>(i))) - 1]);
        shift[i] = Expr::constant(rng.rational(3)) * mono;
    }
    for (size_t i = 0; i < cs.size(); ++i)
        d.forward[cs[i]] = Expr::variable(cs[i]) + shift[i];
    // inverse by back-substitution: s_i = t_i - p_i(s_1..s_{i-1})
    std::map<std::string, Expr> sol;
    for (size_t i = 0; i < cs.size(); ++i) {
        Expr p = substitute(shift[i], sol); // p_i in terms of t_1..t_{i-1}
        sol[cs[i]] = Expr::variable(cs[i]) - p;
    }
    d.inverse = sol;
    return d;
}

} // namespace distflag::testing
