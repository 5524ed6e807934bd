#include <algorithm>

#include "distflag/errors.hpp"
#include "distflag/geom.hpp"

namespace distflag {

int CarnotAlgebra::total_dim() const {
    int s = 0;
    for (int d : dims) s += d;
    return s;
}

std::vector<Rational> CarnotAlgebra::bracket(int i, int j) const {
    int n = total_dim();
    std::vector<Rational> out(n, Rational(0));
    if (i == j) return out;
    bool flip = i > j;
    if (flip) std::swap(i, j);
    auto it = brackets.find({i, j});
    if (it == brackets.end()) return out;
    out = it->second;
    if (flip)
        for (auto& x : out) x = -x;
    return out;
}

std::optional<Rational> CarnotAlgebra::constant(const std::string& lhs1, const std::string& lhs2,
                                                const std::string& rhs) const {
    auto idx = [&](const std::string& l) -> int {
        auto it = std::find(labels.begin(), labels.end(), l);
        return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
    };
    int i = idx(lhs1), j = idx(lhs2), k = idx(rhs);
    if (i < 0 || j < 0 || k < 0) return std::nullopt;
    return bracket(i, j)[k];
}

void CarnotAlgebra::validate() const {
    const int n = total_dim();
    // Graded: [g_a, g_b] has components only in layer a+b.
    for (const auto& [ij, v] : brackets) {
        int w = weight[ij.first] + weight[ij.second];
        for (int k = 0; k < n; ++k)
            if (!v[k].is_zero() && weight[k] != w)
                certify_error("CertificationFailed", "Carnot table is not graded");
    }
    // Jacobi on all basis triples.
    auto ad = [&](int i, const std::vector<Rational>& v) {
        std::vector<Rational> out(n, Rational(0));
        for (int l = 0; l < n; ++l) {
            if (v[l].is_zero()) continue;
            std::vector<Rational> b = bracket(i, l);
            for (int k = 0; k < n; ++k) out[k] = out[k] + v[l] * b[k];
        }
        return out;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                std::vector<Rational> t1 = ad(i, bracket(j, k));
                std::vector<Rational> t2 = ad(j, bracket(k, i));
                std::vector<Rational> t3 = ad(k, bracket(i, j));
                for (int l = 0; l < n; ++l) {
                    Rational sum = t1[l] + t2[l] + t3[l];
                    if (!sum.is_zero())
                        certify_error("CertificationFailed", "Carnot table violates Jacobi");
                }
            }
}

namespace {

std::string layer_label(int weight, int index_in_layer) {
    std::string s = "e" + std::to_string(weight);
    for (int i = 0; i < index_in_layer; ++i) s += "'";
    return s;
}

struct PointEval {
    Point point;
    bool exact;
    double tol;

    bool row(const VectorField& f, RatRow& out_q, RealRow& out_r) const {
        try {
            if (exact) {
                out_q.clear();
                for (const Expr& e : f.coeffs) out_q.push_back(std::get<Rational>(evaluate(e, point)));
            } else {
                out_r.clear();
                for (const Expr& e : f.coeffs) out_r.push_back(value_to_real(evaluate(e, point)));
            }
            return true;
        } catch (const DomainError&) {
            return false;
        }
    }
};

} // namespace

CarnotAlgebra carnot_algebra(const Distribution& d, const Point& point, bool leaf_ok,
                             const SamplerConfig& cfg) {
    // Assemble the full evaluation point: zeros, overlaid by the chart base
    // point, overlaid by the explicit argument. Parameters must be pinned.
    Point p;
    for (const auto& c : d.chart.coords) p[c] = Rational(0);
    for (const auto& [k, v] : d.chart.base_point) p[k] = v;
    for (const auto& [k, v] : point) p[k] = v;
    bool exact = true;
    for (const auto& g : d.gens)
        for (const Expr& e : g.coeffs) {
            exact = exact && e.rational_class();
            for (const auto& v : e.vars())
                if (!p.count(v))
                    input_error("UnboundParameter",
                                "parameter '" + v + "' needs a value (--param or base_point)");
        }

    Flag flag = derived_flag(d, FlagMode::weak, 16, cfg);
    const int closure = flag.growth.back();
    if (closure < d.dim() && !leaf_ok)
        math_error("NotFullyNonholonomic",
                   "weak flag stabilizes at rank " + std::to_string(closure) + " < " +
                       std::to_string(d.dim()) +
                       "; the closure-leaf restriction is available via leaf mode");

    PointEval ev{p, exact, cfg.float_tolerance};

    CarnotAlgebra alg;
    std::vector<VectorField> frame;
    std::vector<std::vector<VectorField>> layers;

    // Pointwise echelon for independence at the base point.
    std::vector<RatRow> ech_q;
    std::vector<RealRow> ech_r;
    Real threshold(cfg.float_tolerance);
    auto try_accept = [&](const VectorField& f) -> bool {
        RatRow rq;
        RealRow rr;
        if (!ev.row(f, rq, rr))
            math_error("NotRegularPoint", "frame field undefined at the base point");
        if (exact) {
            for (const RatRow& e : ech_q) {
                size_t lead = 0;
                while (lead < e.size() && e[lead].is_zero()) ++lead;
                if (lead < e.size() && !rq[lead].is_zero()) {
                    Rational fac = rq[lead] / e[lead];
                    for (size_t j = 0; j < rq.size(); ++j) rq[j] = rq[j] - fac * e[j];
                }
            }
            for (const Rational& x : rq)
                if (!x.is_zero()) {
                    ech_q.push_back(rq);
                    return true;
                }
            return false;
        }
        for (const RealRow& e : ech_r) {
            size_t lead = 0;
            while (lead < e.size() && !(e[lead].abs() > threshold)) ++lead;
            if (lead == e.size()) continue;
            Real fac = rr[lead] / e[lead];
            for (size_t j = 0; j < rr.size(); ++j) rr[j] = rr[j] - fac * e[j];
        }
        for (const Real& x : rr)
            if (x.abs() > threshold) {
                ech_r.push_back(rr);
                return true;
            }
        return false;
    };

    // Layer 1: the generators themselves.
    layers.push_back({});
    for (int i = 0; i < d.rank(); ++i) {
        if (!try_accept(d.gens[i]))
            math_error("NotRegularPoint", "generators degenerate at the base point");
        frame.push_back(d.gens[i]);
        layers[0].push_back(d.gens[i]);
        alg.labels.push_back(layer_label(1, i));
        alg.weight.push_back(1);
    }
    alg.dims.push_back(d.rank());

    const int depth = static_cast<int>(flag.growth.size());
    for (int w = 2; w <= depth; ++w) {
        layers.push_back({});
        std::vector<VectorField> cands;
        if (w == 2) {
            for (size_t a = 0; a < layers[0].size(); ++a)
                for (size_t b = a + 1; b < layers[0].size(); ++b)
                    cands.push_back(lie_bracket(layers[0][a], layers[0][b]));
        } else {
            for (const auto& a : layers[0])
                for (const auto& b : layers[w - 2]) cands.push_back(lie_bracket(a, b));
        }
        for (auto& c : cands) {
            if (try_accept(c)) {
                frame.push_back(c);
                layers[w - 1].push_back(c);
                alg.labels.push_back(layer_label(w, static_cast<int>(layers[w - 1].size()) - 1));
                alg.weight.push_back(w);
            }
        }
        int expect = flag.reduced_growth[w - 1];
        if (static_cast<int>(layers[w - 1].size()) != expect)
            math_error("NotRegularPoint",
                       "layer " + std::to_string(w) + " has dimension " +
                           std::to_string(layers[w - 1].size()) + " at the base point, expected " +
                           std::to_string(expect));
        alg.dims.push_back(expect);
    }

    const int n = static_cast<int>(frame.size());

    // Frame value matrix columns for solving bracket expansions.
    std::vector<RatRow> fq;
    std::vector<RealRow> fr;
    for (const auto& f : frame) {
        RatRow rq;
        RealRow rr;
        if (!ev.row(f, rq, rr)) math_error("NotRegularPoint", "frame undefined at base point");
        if (exact) fq.push_back(std::move(rq));
        else fr.push_back(std::move(rr));
    }

    auto expand = [&](const VectorField& b) -> std::vector<Rational> {
        RatRow vq;
        RealRow vr;
        if (!ev.row(b, vq, vr)) math_error("NotRegularPoint", "bracket undefined at base point");
        if (exact) {
            // Solve sum_k c_k * frame_k(p) = v as columns.
            std::vector<RatRow> a(d.dim(), RatRow(n, Rational(0)));
            for (int k = 0; k < n; ++k)
                for (int row = 0; row < d.dim(); ++row) a[row][k] = fq[k][row];
            auto c = rat_solve(std::move(a), vq);
            if (!c) math_error("NotRegularPoint", "bracket leaves the closure span at base point");
            return *c;
        }
        std::vector<RealRow> a(d.dim(), RealRow(n, Real(0L)));
        for (int k = 0; k < n; ++k)
            for (int row = 0; row < d.dim(); ++row) a[row][k] = fr[k][row];
        auto c = real_solve(std::move(a), vr, cfg.float_tolerance);
        if (!c) math_error("NotRegularPoint", "bracket leaves the closure span at base point");
        std::vector<Rational> out;
        for (const Real& x : *c) {
            auto q = rationalize(x);
            if (!q)
                math_error("NonRationalStructureConstants",
                           "structure constant is not recognizably rational");
            out.push_back(*q);
        }
        return out;
    };

    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            int w = alg.weight[i] + alg.weight[j];
            std::vector<Rational> cvec(n, Rational(0));
            if (w <= depth) {
                std::vector<Rational> c = expand(lie_bracket(frame[i], frame[j]));
                for (int k = 0; k < n; ++k) {
                    if (alg.weight[k] == w) cvec[k] = c[k];
                    else if (alg.weight[k] > w && !c[k].is_zero())
                        certify_error("CertificationFailed",
                                      "bracket exceeds its flag weight at the base point");
                }
            }
            alg.brackets[{i, j}] = std::move(cvec);
        }
    }
    return alg;
}

} // namespace distflag
