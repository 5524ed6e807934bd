#include "distflag/jets.hpp"

#include <algorithm>

#include "distflag/errors.hpp"

namespace distflag {

std::string jet_coord_name(const MultiIndex& m) {
    if (m.first == 0 && m.second == 0) return "u";
    return "u" + std::to_string(m.first) + std::to_string(m.second);
}

int jet_order(const MultiIndex& m) { return m.first + m.second; }

std::vector<MultiIndex> indices_of_order(int k) {
    std::vector<MultiIndex> out;
    for (int i = k; i >= 0; --i) out.push_back({i, k - i});
    return out;
}

std::vector<std::string> PdeSystem::internal_coords() const {
    std::vector<std::string> out{"x", "y"};
    for (int k = 0; k <= order; ++k)
        for (const MultiIndex& m : indices_of_order(k))
            if (!is_constrained(m)) out.push_back(jet_coord_name(m));
    return out;
}

std::vector<MultiIndex> PdeSystem::free_top() const {
    std::vector<MultiIndex> out;
    for (const MultiIndex& m : indices_of_order(order))
        if (!is_constrained(m)) out.push_back(m);
    return out;
}

std::vector<int> PdeSystem::declared_orders() const {
    std::vector<int> out;
    for (const auto& [m, e] : declared) out.push_back(jet_order(m));
    std::sort(out.begin(), out.end());
    return out;
}

PdeSystem make_system(std::string name, int order, std::map<MultiIndex, Expr> solved,
                      std::vector<std::string> params, Point base_point) {
    if (order < 1 || order > 9) input_error("SchemaError", "system order must be in 1..9");
    if (solved.empty()) input_error("SchemaError", "system needs at least one equation");
    PdeSystem sys;
    sys.name = std::move(name);
    sys.order = order;
    for (const auto& [m, e] : solved) {
        if (jet_order(m) != order)
            input_error("SchemaError", "equation for " + jet_coord_name(m) +
                                           " is not of the declared (pure) order " +
                                           std::to_string(order));
    }
    sys.solved = solved;
    sys.declared = std::move(solved);
    sys.params = std::move(params);
    sys.base_point = std::move(base_point);

    std::vector<std::string> allowed = sys.internal_coords();
    allowed.insert(allowed.end(), sys.params.begin(), sys.params.end());
    for (const auto& [m, e] : sys.solved)
        for (const auto& v : e.vars())
            if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
                input_error("SchemaError", "equation for " + jet_coord_name(m) +
                                               " uses '" + v +
                                               "', which is not an internal coordinate");
    return sys;
}

namespace {

// Derivative coordinate u_{m + e_dir}; nullopt marks "beyond the known
// order".
std::optional<Expr> derivative_coordinate(const PdeSystem& sys, const MultiIndex& m, char dir) {
    MultiIndex t = dir == 'x' ? MultiIndex{m.first + 1, m.second}
                              : MultiIndex{m.first, m.second + 1};
    if (auto it = sys.solved.find(t); it != sys.solved.end()) return it->second;
    if (jet_order(t) <= sys.order) return Expr::variable(jet_coord_name(t));
    return std::nullopt;
}

std::optional<MultiIndex> parse_jet_name(const std::string& v) {
    if (v == "u") return MultiIndex{0, 0};
    if (v.size() == 3 && v[0] == 'u' && std::isdigit(static_cast<unsigned char>(v[1])) &&
        std::isdigit(static_cast<unsigned char>(v[2])))
        return MultiIndex{v[1] - '0', v[2] - '0'};
    return std::nullopt;
}

} // namespace

Expr total_derivative(const PdeSystem& sys, const Expr& f, char direction,
                      const SamplerConfig& cfg) {
    (void)cfg;
    // Constrained coordinates in f are replaced by their defining
    // expressions, so the derivative is taken on the equation.
    Expr g = f;
    std::map<std::string, Expr> bind;
    for (const auto& [m, e] : sys.solved)
        if (g.depends_on(jet_coord_name(m))) bind[jet_coord_name(m)] = e;
    if (!bind.empty()) g = substitute(g, bind);
    const Expr& h = bind.empty() ? f : g;
    std::vector<Expr> terms;
    std::string dir_name(1, direction);
    if (h.depends_on(dir_name)) terms.push_back(differentiate(h, dir_name));
    for (const auto& v : h.vars()) {
        auto m = parse_jet_name(v);
        if (!m) continue;
        auto dc = derivative_coordinate(sys, *m, direction);
        if (!dc)
            input_error("ExceedsJetOrder", "derivative of " + v +
                                               " is beyond order " + std::to_string(sys.order) +
                                               "; prolong first");
        terms.push_back(*dc * differentiate(h, v));
    }
    return Expr::add(std::move(terms));
}

namespace {

// Formal total derivative for prolongation: derivatives of the current top
// level become fresh symbols at level order+1.
Expr formal_total_derivative(const PdeSystem& sys, const Expr& f, char dir) {
    std::vector<Expr> terms;
    std::string dir_name(1, dir);
    if (f.depends_on(dir_name)) terms.push_back(differentiate(f, dir_name));
    for (const auto& v : f.vars()) {
        auto m = parse_jet_name(v);
        if (!m) continue;
        MultiIndex t = dir == 'x' ? MultiIndex{m->first + 1, m->second}
                                  : MultiIndex{m->first, m->second + 1};
        Expr dc = Expr::variable(jet_coord_name(t));
        if (auto it = sys.solved.find(t); it != sys.solved.end()) dc = it->second;
        terms.push_back(dc * differentiate(f, v));
    }
    return Expr::add(std::move(terms));
}

} // namespace

PdeSystem prolong_system(const PdeSystem& sys, const SamplerConfig& cfg) {
    if (sys.order >= 9) input_error("ExceedsJetOrder", "prolongation beyond order 9");
    const int top = sys.order + 1;

    // Candidates for every new-level coordinate, one per constrained parent.
    std::map<MultiIndex, std::vector<Expr>> candidates;
    for (const MultiIndex& m : indices_of_order(sys.order)) {
        auto it = sys.solved.find(m);
        if (it == sys.solved.end()) continue;
        candidates[{m.first + 1, m.second}].push_back(formal_total_derivative(sys, it->second, 'x'));
        candidates[{m.first, m.second + 1}].push_back(formal_total_derivative(sys, it->second, 'y'));
    }

    PdeSystem out = sys;
    out.order = top;

    // Free coordinates may later be determined by cross-conditions; this
    // loop re-runs after each such solve.
    std::map<MultiIndex, Expr> extra; // solved cross-condition coordinates
    for (int attempt = 0;; ++attempt) {
        if (attempt > top + 2)
            certify_error("CertificationFailed", "prolongation solving did not stabilize");

        // Resolve mutual references among the new determined coordinates.
        std::map<MultiIndex, Expr> det;
        for (const auto& [t, cands] : candidates) det[t] = cands.front();
        for (const auto& [t, e] : extra) det[t] = e;

        auto unresolved = [&](const Expr& e) {
            for (const auto& v : e.vars()) {
                auto m = parse_jet_name(v);
                if (m && jet_order(*m) == top && det.count(*m)) return true;
            }
            return false;
        };
        for (int pass = 0; pass <= static_cast<int>(det.size()) + 1; ++pass) {
            bool any = false;
            std::map<std::string, Expr> bind;
            for (const auto& [t, e] : det) bind[jet_coord_name(t)] = e;
            for (auto& [t, e] : det) {
                if (!unresolved(e)) continue;
                std::map<std::string, Expr> bind_wo = bind;
                bind_wo.erase(jet_coord_name(t));
                Expr ne = substitute(e, bind_wo);
                if (ne.depends_on(jet_coord_name(t)))
                    certify_error("CertificationFailed",
                                  "cyclic prolongation dependency at " + jet_coord_name(t));
                e = ne;
                any = true;
            }
            if (!any) break;
            if (pass == static_cast<int>(det.size()) + 1)
                certify_error("CertificationFailed", "prolongation resolution diverged");
        }

        // Compatibility: all candidates for the same coordinate must agree;
        // a nonzero difference may instead determine a free coordinate
        // (solved for below, linear occurrence required).
        std::map<std::string, Expr> bind;
        for (const auto& [t, e] : det) bind[jet_coord_name(t)] = e;
        bool resolved_new = false;
        for (const auto& [t, cands] : candidates) {
            for (size_t k = 1; k < cands.size() && !resolved_new; ++k) {
                Expr diff = substitute(cands[k], bind) - det[t];
                if (is_zero(diff, cfg)) continue;
                // Look for a free new-level coordinate occurring linearly.
                bool solved_one = false, saw_free = false;
                for (const MultiIndex& fm : indices_of_order(top)) {
                    if (det.count(fm)) continue;
                    std::string fv = jet_coord_name(fm);
                    if (!diff.depends_on(fv)) continue;
                    saw_free = true;
                    Expr a = differentiate(diff, fv);
                    if (a.is_zero() || is_zero(a, cfg)) continue;
                    if (!is_zero(differentiate(a, fv), cfg))
                        math_error("NonlinearClosure",
                                   "cross-condition is not linear in " + fv);
                    Expr b = substitute(diff, {{fv, Expr::integer(0)}});
                    extra[fm] = Expr::mul({Expr::integer(-1), b, Expr::pow(a, Rational(-1))});
                    solved_one = true;
                    resolved_new = true;
                    break;
                }
                if (!solved_one) {
                    if (saw_free)
                        math_error("NonlinearClosure",
                                   "cross-condition cannot be solved linearly for a free "
                                   "coordinate");
                    math_error("IncompatibleSystem",
                               "cross-derivatives disagree at " + jet_coord_name(t) + " by " +
                                   diff.str());
                }
            }
            if (resolved_new) break;
        }
        if (!resolved_new) {
            for (auto& [t, e] : det) out.solved[t] = e;
            break;
        }
    }
    return out;
}

SymbolProfile symbol_profile(const PdeSystem& sys, const SamplerConfig& cfg) {
    SymbolProfile prof;
    std::vector<int> orders = sys.declared_orders();
    const int kmax = orders.back();

    auto g_formula = [&](int i) {
        int dim = i + 1;
        for (int k : orders) dim -= std::max(0, i - k + 1);
        return std::max(1, dim);
    };

    // Iterate the formula until it stabilizes.
    std::vector<int> g;
    int i = 0;
    for (;; ++i) {
        g.push_back(g_formula(i));
        if (i > kmax && g[i] == g[i - 1]) break;
        if (i > 64) certify_error("CertificationFailed", "symbol dimensions did not stabilize");
    }
    int omega = g.back();
    if (omega > 1)
        math_error("NotClassOne",
                   "symbol dimensions stabilize at " + std::to_string(omega) + " (class > 1)");
    prof.omega = 1;
    // Stabilization order: symbols are 1-dimensional from t on; the equation
    // manifold cannot live below the top declared order.
    int t = 0;
    for (size_t k = 0; k < g.size(); ++k)
        if (g[k] > 1) t = static_cast<int>(k) + 1;
    t = std::max(t, kmax);
    prof.t = t;
    prof.g_dims.assign(g.begin(), g.begin() + t + 1);
    prof.kappa = 0;
    for (int k = 0; k <= t; ++k) prof.kappa += prof.g_dims[k] - 1;

    // Type string from multiplicities.
    std::map<int, int> mult;
    for (int k : orders) mult[k]++;
    std::string ts;
    for (const auto& [k, m] : mult) {
        if (!ts.empty()) ts += "+";
        if (m > 1) ts += std::to_string(m);
        ts += "E" + std::to_string(k);
    }
    prof.type_string = ts;

    // Cross-check the genericity formula against actual prolongation.
    PdeSystem cur = sys;
    for (int level = sys.order; level <= t; ++level) {
        int actual = static_cast<int>(cur.free_top().size());
        if (actual != prof.g_dims[level])
            math_error("InconsistentWithProlongation",
                       "actual dim g_" + std::to_string(level) + " = " + std::to_string(actual) +
                           " differs from the generic value " +
                           std::to_string(prof.g_dims[level]));
        if (level < t) cur = prolong_system(cur, cfg);
    }
    return prof;
}

Distribution cartan_distribution(const PdeSystem& sys, const SamplerConfig& cfg) {
    std::vector<MultiIndex> top = sys.free_top();
    if (top.size() != 1)
        math_error("NotStabilized", "system has " + std::to_string(top.size()) +
                                        " free top coordinates; prolong to its stabilization "
                                        "order first");
    const MultiIndex sym = top[0];
    std::vector<std::string> coords = sys.internal_coords();
    Chart chart{sys.name.empty() ? "E" : sys.name, coords, sys.base_point};

    auto total_field = [&](char dir) {
        std::vector<Expr> c;
        for (const auto& name : coords) {
            if (name == "x") {
                c.push_back(Expr::integer(dir == 'x' ? 1 : 0));
            } else if (name == "y") {
                c.push_back(Expr::integer(dir == 'y' ? 1 : 0));
            } else {
                MultiIndex m = *parse_jet_name(name);
                if (m == sym) {
                    c.push_back(Expr::integer(0)); // defined mod the symbol direction
                    continue;
                }
                auto dc = derivative_coordinate(sys, m, dir);
                if (!dc)
                    math_error("NotStabilized", "total derivative of " + name + " unknown");
                c.push_back(*dc);
            }
        }
        return c;
    };

    std::vector<Expr> vertical(coords.size(), Expr::integer(0));
    vertical[std::find(coords.begin(), coords.end(), jet_coord_name(sym)) - coords.begin()] =
        Expr::integer(1);
    return make_distribution(chart, {total_field('x'), total_field('y'), vertical}, cfg);
}

namespace {

// Dense polynomial in mu with Expr coefficients; index = power.
using MuPoly = std::vector<Expr>;

int mu_degree(MuPoly& p, const SamplerConfig& cfg) {
    while (!p.empty()) {
        Expr& lead = p.back();
        if (!lead.is_zero() && !is_zero(lead, cfg)) return static_cast<int>(p.size()) - 1;
        p.pop_back();
    }
    return -1; // zero polynomial
}

MuPoly mu_mod(MuPoly a, MuPoly b, const SamplerConfig& cfg) {
    int db = mu_degree(b, cfg);
    for (;;) {
        int da = mu_degree(a, cfg);
        if (da < db) return a;
        Expr f = a[da] * Expr::pow(b[db], Rational(-1));
        int shift = da - db;
        for (int i = 0; i <= db; ++i)
            a[i + shift] = normalize(a[i + shift] - f * b[i]);
        a[da] = Expr::integer(0);
    }
}

} // namespace

CharacteristicLine characteristic_line(const PdeSystem& sys, const SamplerConfig& cfg) {
    if (sys.declared.empty()) input_error("SchemaError", "system has no equations");

    // Symbols as binary forms; mu-polynomial plus the power of xi_x divided
    // out (a root at infinity).
    int common_xi_x = 1 << 20;
    std::vector<MuPoly> polys;
    for (const auto& [m, rhs] : sys.declared) {
        int k = jet_order(m);
        MuPoly p(static_cast<size_t>(k) + 1, Expr::integer(0));
        p[m.second] = Expr::integer(1);
        for (const auto& v : rhs.vars()) {
            auto t = parse_jet_name(v);
            if (!t || jet_order(*t) != k) continue;
            p[t->second] = p[t->second] - differentiate(rhs, v);
        }
        int deg = mu_degree(p, cfg);
        if (deg < 0) certify_error("CertificationFailed", "identically zero symbol");
        common_xi_x = std::min(common_xi_x, k - deg);
        polys.push_back(std::move(p));
    }

    // Euclidean algorithm over the expression field.
    MuPoly g = polys[0];
    for (size_t i = 1; i < polys.size(); ++i) {
        MuPoly b = polys[i];
        while (mu_degree(b, cfg) >= 0) {
            MuPoly r = mu_mod(g, b, cfg);
            g = std::move(b);
            b = std::move(r);
        }
    }
    int dg = mu_degree(g, cfg);
    int total = dg + common_xi_x;
    if (total == 0) math_error("FiniteType", "symbols share no characteristic (class 0)");
    if (total > 1)
        math_error("NotClassOne", "common characteristic divisor has degree " +
                                      std::to_string(total));
    CharacteristicLine line;
    if (dg == 1) {
        line.vertical = false;
        line.slope = normalize(Expr::mul({Expr::integer(-1), g[0], Expr::pow(g[1], Rational(-1))}));
    } else {
        line.vertical = true; // common factor xi_x: covector (0,1)
        line.slope = Expr::integer(0);
    }
    return line;
}

std::vector<std::string> product_jet_coords(const std::vector<std::pair<std::string, int>>& deps) {
    std::vector<std::string> coords{"x"};
    for (const auto& [d, depth] : deps) {
        coords.push_back(d);
        for (int j = 1; j <= depth; ++j) coords.push_back(d + std::to_string(j));
    }
    return coords;
}

VectorField prolong_point_field(const VectorField& x,
                                const std::vector<std::pair<std::string, int>>& deps,
                                const SamplerConfig& cfg) {
    (void)cfg;
    std::vector<std::string> coords = product_jet_coords(deps);
    Chart chart{"J", coords, {}};

    // Truncated total derivative on the product jet chart.
    auto dx = [&](const Expr& f) {
        std::vector<Expr> terms;
        if (f.depends_on("x")) terms.push_back(differentiate(f, "x"));
        for (const auto& [d, depth] : deps) {
            for (int j = 0; j < depth; ++j) {
                std::string cur = j == 0 ? d : d + std::to_string(j);
                std::string next = d + std::to_string(j + 1);
                if (f.depends_on(cur))
                    terms.push_back(Expr::variable(next) * differentiate(f, cur));
            }
        }
        return Expr::add(std::move(terms));
    };

    if (x.coeffs.size() != deps.size() + 1)
        input_error("ShapeMismatch", "point field must have one coefficient per (x, dependents)");
    const Expr& xi = x.coeffs[0];
    Expr dxi = dx(xi);

    VectorField out{chart, {}};
    out.coeffs.push_back(xi);
    for (size_t di = 0; di < deps.size(); ++di) {
        const auto& [d, depth] = deps[di];
        Expr phi = x.coeffs[di + 1];
        out.coeffs.push_back(phi);
        for (int j = 1; j <= depth; ++j) {
            // phi_{j} = D_x(phi_{j-1}) - u_j * D_x(xi)
            Expr uj = Expr::variable(d + std::to_string(j));
            phi = dx(phi) - uj * dxi;
            out.coeffs.push_back(phi);
        }
    }
    return out;
}

std::vector<std::string> scalar_jet_coords(int order) {
    std::vector<std::string> coords{"x", "y"};
    for (int k = 0; k <= order; ++k)
        for (const MultiIndex& m : indices_of_order(k)) coords.push_back(jet_coord_name(m));
    return coords;
}

VectorField prolong_point_field_2d(const VectorField& x, int order, const SamplerConfig& cfg) {
    (void)cfg;
    if (x.coeffs.size() != 3)
        input_error("ShapeMismatch", "point field must have coefficients for (x, y, u)");
    std::vector<std::string> coords = scalar_jet_coords(order);
    Chart chart{"J" + std::to_string(order), coords, {}};

    auto total = [&](const Expr& f, char dir) {
        std::vector<Expr> terms;
        std::string dn(1, dir);
        if (f.depends_on(dn)) terms.push_back(differentiate(f, dn));
        for (int k = 0; k < order; ++k)
            for (const MultiIndex& m : indices_of_order(k)) {
                std::string cur = jet_coord_name(m);
                if (!f.depends_on(cur)) continue;
                MultiIndex t = dir == 'x' ? MultiIndex{m.first + 1, m.second}
                                          : MultiIndex{m.first, m.second + 1};
                terms.push_back(Expr::variable(jet_coord_name(t)) * differentiate(f, cur));
            }
        return Expr::add(std::move(terms));
    };

    const Expr& xi = x.coeffs[0];
    const Expr& eta = x.coeffs[1];
    std::map<MultiIndex, Expr> phi;
    phi[{0, 0}] = x.coeffs[2];
    for (int k = 1; k <= order; ++k)
        for (const MultiIndex& m : indices_of_order(k)) {
            // Canonical path: derive in x first, then in y.
            MultiIndex prev = m.first > 0 ? MultiIndex{m.first - 1, m.second}
                                          : MultiIndex{m.first, m.second - 1};
            char dir = m.first > 0 ? 'x' : 'y';
            MultiIndex px{prev.first + 1, prev.second};
            MultiIndex py{prev.first, prev.second + 1};
            phi[m] = total(phi[prev], dir) -
                     Expr::variable(jet_coord_name(px)) * total(xi, dir) -
                     Expr::variable(jet_coord_name(py)) * total(eta, dir);
        }

    VectorField out{chart, {}};
    out.coeffs.push_back(xi);
    out.coeffs.push_back(eta);
    for (int k = 0; k <= order; ++k)
        for (const MultiIndex& m : indices_of_order(k)) out.coeffs.push_back(phi[m]);
    return out;
}

} // namespace distflag
