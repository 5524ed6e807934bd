#include "distflag/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "distflag/errors.hpp"

namespace distflag {

namespace {

std::string growth_str(const std::vector<int>& g) {
    std::string s = "(";
    for (size_t i = 0; i < g.size(); ++i) s += (i ? "," : "") + std::to_string(g[i]);
    return s + ")";
}

} // namespace

ReductionReport reduce_system(const PdeSystem& sys, const SamplerConfig& cfg) {
    ReductionReport rep;
    rep.has_system = true;
    rep.system_name = sys.name;
    rep.profile = symbol_profile(sys, cfg);

    PdeSystem cur = sys;
    while (static_cast<int>(cur.free_top().size()) != 1) cur = prolong_system(cur, cfg);
    rep.dim_equation = static_cast<int>(cur.internal_coords().size());
    rep.mu = rep.dim_equation - 1;
    rep.dimensions_consistent = rep.dim_equation == rep.profile.kappa + rep.profile.t + 3;

    Distribution ce = cartan_distribution(cur, cfg);
    rep.cartan_weak_growth = derived_flag(ce, FlagMode::weak, 24, cfg).growth;
    rep.characteristic = characteristic_line(sys, cfg);

    CauchyResult ch = cauchy_characteristics_full(ce, cfg);
    if (ch.fields.size() != 1)
        certify_error("CauchyRankUnexpected",
                      "Cartan distribution has Cauchy rank " + std::to_string(ch.fields.size()) +
                          ", class 1 requires exactly 1");

    // Canonical scaling: unit D_y coefficient for a finite characteristic
    // slope, unit D_x coefficient for a vertical characteristic covector.
    std::vector<Expr> a = ch.in_generator_basis[0];
    int unit = rep.characteristic->vertical ? 0 : 1;
    if (a[unit].is_zero() || is_zero(a[unit], cfg))
        certify_error("CauchyRankUnexpected",
                      "Cauchy direction is singular against the characteristic orientation");
    Expr inv = Expr::pow(a[unit], Rational(-1));
    for (Expr& e : a) e = normalize(e * inv);
    rep.cauchy_generator_basis = a;

    VectorField xi{ce.chart, std::vector<Expr>(ce.dim(), Expr::integer(0))};
    for (int k = 0; k < ce.dim(); ++k) {
        std::vector<Expr> terms;
        for (int i = 0; i < 3; ++i) terms.push_back(Expr::mul({a[i], ce.gens[i].coeffs[k]}));
        xi.coeffs[k] = Expr::add(std::move(terms));
    }
    rep.cauchy_field = xi.coeffs;

    // The Cauchy direction is collinear with D_y - slope*D_x
    // (resp. D_x when the covector is vertical) modulo the symbol direction.
    {
        VectorField v{ce.chart, std::vector<Expr>(ce.dim(), Expr::integer(0))};
        for (int k = 0; k < ce.dim(); ++k) {
            if (rep.characteristic->vertical) {
                v.coeffs[k] = ce.gens[0].coeffs[k];
            } else {
                v.coeffs[k] = ce.gens[1].coeffs[k] -
                              rep.characteristic->slope * ce.gens[0].coeffs[k];
            }
        }
        const VectorField& sym = ce.gens[2];
        rep.cauchy_collinear_ok =
            span_rank({v, sym}, cfg) == 2 && span_rank({xi, v, sym}, cfg) == 2;
    }

    // Slice candidates: certified-nonzero constant coefficients first, then
    // certified-nonzero ones; skip slices that are singular at their base
    // value.
    std::vector<int> candidates;
    for (int i = 0; i < ce.dim(); ++i)
        if (xi.coeffs[i].is_const() && !xi.coeffs[i].const_value().is_zero())
            candidates.push_back(i);
    for (int i = 0; i < ce.dim(); ++i)
        if (!xi.coeffs[i].is_const() && !xi.coeffs[i].is_zero() && !is_zero(xi.coeffs[i], cfg))
            candidates.push_back(i);
    if (candidates.empty())
        certify_error("CauchyRankUnexpected", "Cauchy field vanishes identically");

    std::optional<Distribution> red;
    for (int idx : candidates) {
        std::string coord = ce.chart.coords[idx];
        Rational value = ce.chart.base_value(coord);
        try {
            red = transversal_reduction(ce, xi, coord, value, cfg);
            rep.slice_coord = coord;
            rep.slice_value = value;
            break;
        } catch (const DomainError&) {
        } catch (const EngineError& e) {
            if (e.kind() != "DegenerateGenerators") throw;
        }
    }
    if (!red)
        certify_error("CauchyRankUnexpected",
                      "every transversal slice is singular at its base value");
    if (red->dim() != rep.mu)
        certify_error("CertificationFailed", "reduced chart dimension disagrees with mu");
    rep.reduced = std::move(red);
    return rep;
}

namespace {

ChainStep make_step(const std::string& kind, const std::string& detail, const Distribution& d,
                    int max_steps, const SamplerConfig& cfg) {
    ChainStep st;
    st.kind = kind;
    st.detail = detail;
    st.chart_dim = d.dim();
    Flag w = derived_flag(d, FlagMode::weak, max_steps, cfg);
    Flag s = derived_flag(d, FlagMode::strong, max_steps, cfg);
    st.weak_growth = w.growth;
    st.strong_growth = s.growth;
    st.weak_reduced = w.reduced_growth;
    st.strong_reduced = s.reduced_growth;
    return st;
}

} // namespace

ReductionReport analyze_distribution(const Distribution& d, const PipelineOptions& opts,
                                     const SamplerConfig& cfg, ReductionReport rep) {
    if (d.rank() != 2) input_error("WrongShape", "analyze needs a rank-2 distribution");
    rep.has_analysis = true;
    if (!rep.reduced) rep.reduced = d;
    rep.weak = derived_flag(d, FlagMode::weak, opts.max_steps, cfg);
    rep.strong = derived_flag(d, FlagMode::strong, opts.max_steps, cfg);
    rep.first_integral_count = d.dim() - rep.strong.growth.back();
    std::optional<int> pd;
    if (rep.has_system) pd = rep.profile.kappa + rep.profile.t;
    rep.verdict = goursat_verdict_from_flags(rep.weak, rep.strong, d.dim(), pd);

    bool dep = deprolongable(d, cfg);
    rep.case_label = rep.first_integral_count > 0 ? "II" : (dep ? "I" : "III");

    // Verified candidate integrals, carried through the chain by
    // substitution of each slice.
    std::vector<Expr> integrals;
    for (const Expr& f : opts.candidate_integrals) {
        bool ok = first_integral_check(d, f, cfg);
        rep.integral_checks.push_back({f.str(), ok});
        if (ok) integrals.push_back(f);
    }

    Distribution cur = d;
    auto run_deprolong = [&](bool& progress) {
        while (deprolongable(cur, cfg)) {
            DeprolongStep st = deprolong_full(cur, cfg);
            std::map<std::string, Expr> bind{
                {st.sliced_coord, Expr::constant(st.slice_value)}};
            for (Expr& f : integrals) f = substitute(f, bind);
            cur = st.result;
            rep.chain.push_back(make_step("deprolong", st.sliced_coord, cur, opts.max_steps, cfg));
            progress = true;
        }
    };
    auto run_restrict = [&](bool& progress) {
        for (;;) {
            Flag s = derived_flag(cur, FlagMode::strong, opts.max_steps, cfg);
            int m_cur = cur.dim() - s.growth.back();
            if (m_cur <= 0) return;
            bool restricted = false;
            for (size_t i = 0; i < integrals.size(); ++i) {
                if (!first_integral_check(cur, integrals[i], cfg)) continue;
                Rational value(0);
                try {
                    Point p;
                    for (const auto& c : cur.chart.coords) p[c] = cur.chart.base_value(c);
                    Value v = evaluate(integrals[i], p);
                    if (std::holds_alternative<Rational>(v)) value = std::get<Rational>(v);
                } catch (const DomainError&) {
                }
                auto res = restrict_to_integral_level(cur, integrals[i], value, cfg);
                if (!res) continue;
                std::string used = integrals[i].str();
                integrals.erase(integrals.begin() + static_cast<long>(i));
                cur = *res;
                rep.chain.push_back(make_step("restrict", used, cur, opts.max_steps, cfg));
                progress = true;
                restricted = true;
                break;
            }
            if (!restricted) {
                // Closure-leaf view: flags and the Carnot data are those of
                // the current distribution inside its closure leaf; only the
                // chart dimension changes. Finding the integrals themselves
                // would require quadrature, which is out of scope.
                ChainStep st = make_step("restrict", "leaf", cur, opts.max_steps, cfg);
                st.chart_dim = s.growth.back();
                rep.chain.push_back(std::move(st));
                return;
            }
        }
    };

    for (;;) {
        bool progress = false;
        if (opts.route == PipelineOptions::Route::restrict_first) {
            run_restrict(progress);
            run_deprolong(progress);
        } else {
            run_deprolong(progress);
            run_restrict(progress);
        }
        if (!progress) break;
        // A leaf step ends the chain: it is a reporting device, not a chart.
        if (!rep.chain.empty() && rep.chain.back().detail == "leaf") break;
    }

    try {
        rep.carnot = carnot_algebra(cur, cur.chart.base_point, true, cfg);
    } catch (const EngineError& e) {
        rep.carnot_note = e.what();
    }
    return rep;
}

ReductionReport analyze_system(const PdeSystem& sys, const PipelineOptions& opts,
                               const SamplerConfig& cfg) {
    ReductionReport rep = reduce_system(sys, cfg);
    Distribution red = *rep.reduced;
    return analyze_distribution(red, opts, cfg, std::move(rep));
}

namespace {

nlohmann::ordered_json exprs_to_json(const std::vector<Expr>& es) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const Expr& e : es) a.push_back(e.str());
    return a;
}

nlohmann::ordered_json dist_to_json(const Distribution& d) {
    nlohmann::ordered_json j;
    j["chart"] = d.chart.coords;
    if (!d.chart.base_point.empty()) {
        nlohmann::ordered_json bp;
        for (const auto& c : d.chart.coords) {
            auto it = d.chart.base_point.find(c);
            if (it != d.chart.base_point.end()) bp[c] = it->second.str();
        }
        j["base_point"] = bp;
    }
    nlohmann::ordered_json gens = nlohmann::ordered_json::array();
    for (const auto& g : d.gens) gens.push_back(exprs_to_json(g.coeffs));
    j["generators"] = gens;
    return j;
}

} // namespace

nlohmann::ordered_json flag_to_json(const Flag& f) {
    nlohmann::ordered_json j;
    j["growth"] = f.growth;
    j["reduced_growth"] = f.reduced_growth;
    return j;
}

nlohmann::ordered_json carnot_to_json(const CarnotAlgebra& alg) {
    nlohmann::ordered_json j;
    j["dims"] = alg.dims;
    j["labels"] = alg.labels;
    nlohmann::ordered_json br;
    for (const auto& [ij, v] : alg.brackets) {
        bool all_zero = true;
        for (const auto& x : v)
            if (!x.is_zero()) all_zero = false;
        if (all_zero) continue;
        std::string key = "[" + alg.labels[ij.first] + "," + alg.labels[ij.second] + "]";
        nlohmann::ordered_json entry;
        for (size_t k = 0; k < v.size(); ++k)
            if (!v[k].is_zero()) entry[alg.labels[k]] = v[k].str();
        br[key] = entry;
    }
    j["brackets"] = br;
    return j;
}

nlohmann::ordered_json report_to_json(const ReductionReport& rep) {
    nlohmann::ordered_json j;
    if (rep.has_system) {
        j["system"] = {{"name", rep.system_name}, {"type", rep.profile.type_string}};
        j["symbol_profile"] = {{"g_dims", rep.profile.g_dims},
                               {"t", rep.profile.t},
                               {"kappa", rep.profile.kappa},
                               {"omega", rep.profile.omega}};
        j["dimensions"] = {{"equation", rep.dim_equation},
                       {"mu", rep.mu},
                       {"consistent", rep.dimensions_consistent}};
        nlohmann::ordered_json chr;
        chr["vertical"] = rep.characteristic->vertical;
        chr["slope"] = rep.characteristic->vertical ? "infinity" : rep.characteristic->slope.str();
        j["characteristic"] = chr;
        j["cauchy"] = {{"generator_basis", exprs_to_json(rep.cauchy_generator_basis)},
                       {"field", exprs_to_json(rep.cauchy_field)},
                       {"collinear_with_characteristic", rep.cauchy_collinear_ok}};
        j["slice"] = {{"coordinate", rep.slice_coord}, {"value", rep.slice_value.str()}};
        j["cartan_flag"] = {{"weak_growth", rep.cartan_weak_growth}};
    }
    if (rep.reduced) j["reduced"] = dist_to_json(*rep.reduced);
    if (rep.has_analysis) {
        j["flags"] = {{"weak", flag_to_json(rep.weak)}, {"strong", flag_to_json(rep.strong)}};
        j["first_integral_count"] = rep.first_integral_count;
        nlohmann::ordered_json g;
        switch (rep.verdict.type) {
            case GoursatVerdict::Type::Goursat:
                g["verdict"] = "Goursat";
                g["d"] = rep.verdict.d;
                break;
            case GoursatVerdict::Type::GoursatFrobenius:
                g["verdict"] = "GoursatFrobenius";
                g["d"] = rep.verdict.d;
                g["m"] = rep.verdict.m;
                break;
            case GoursatVerdict::Type::NotLinearizable:
                g["verdict"] = "NotLinearizable";
                g["growth"] = rep.verdict.growth;
                break;
        }
        j["goursat"] = g;
        j["case"] = rep.case_label;
        nlohmann::ordered_json chain = nlohmann::ordered_json::array();
        for (const auto& st : rep.chain) {
            chain.push_back({{"kind", st.kind},
                             {"detail", st.detail},
                             {"chart_dim", st.chart_dim},
                             {"weak_growth", st.weak_growth},
                             {"strong_growth", st.strong_growth},
                             {"weak_reduced", st.weak_reduced},
                             {"strong_reduced", st.strong_reduced}});
        }
        j["chain"] = chain;
        if (rep.carnot) j["carnot"] = carnot_to_json(*rep.carnot);
        else if (!rep.carnot_note.empty()) j["carnot_note"] = rep.carnot_note;
        if (!rep.integral_checks.empty()) {
            nlohmann::ordered_json ics = nlohmann::ordered_json::array();
            for (const auto& ic : rep.integral_checks)
                ics.push_back({{"expr", ic.expr}, {"verified", ic.verified}});
            j["integral_checks"] = ics;
        }
    }
    return j;
}

std::string report_to_text(const ReductionReport& rep) {
    std::ostringstream os;
    if (rep.has_system) {
        os << "system " << rep.system_name << "  type " << rep.profile.type_string << "\n";
        os << "  symbol: g = " << growth_str(rep.profile.g_dims) << ", t = " << rep.profile.t
           << ", kappa = " << rep.profile.kappa << ", omega = " << rep.profile.omega << "\n";
        os << "  dimensions: dim E^ = " << rep.dim_equation << ", mu = " << rep.mu << " ("
           << (rep.dimensions_consistent ? "holds" : "FAILS") << ")\n";
        if (rep.characteristic->vertical)
            os << "  characteristic covector: dy (vertical slope); Cauchy direction D_x\n";
        else
            os << "  characteristic slope: " << rep.characteristic->slope.str() << "\n";
        os << "  Cauchy over (D_x, D_y, symbol): [";
        for (size_t i = 0; i < rep.cauchy_generator_basis.size(); ++i)
            os << (i ? ", " : "") << rep.cauchy_generator_basis[i].str();
        os << "]  collinearity " << (rep.cauchy_collinear_ok ? "ok" : "FAILS") << "\n";
        os << "  slice: " << rep.slice_coord << " = " << rep.slice_value.str() << "\n";
        os << "  C_E weak growth: " << growth_str(rep.cartan_weak_growth) << "\n";
    }
    if (rep.reduced) {
        os << "reduced distribution on " << rep.reduced->dim() << "-chart (";
        for (size_t i = 0; i < rep.reduced->chart.coords.size(); ++i)
            os << (i ? "," : "") << rep.reduced->chart.coords[i];
        os << ")\n";
        for (const auto& g : rep.reduced->gens) {
            os << "  [";
            for (size_t i = 0; i < g.coeffs.size(); ++i) os << (i ? ", " : "") << g.coeffs[i].str();
            os << "]\n";
        }
    }
    if (rep.has_analysis) {
        os << "flags: weak " << growth_str(rep.weak.growth) << " reduced "
           << growth_str(rep.weak.reduced_growth) << "\n";
        os << "       strong " << growth_str(rep.strong.growth) << " reduced "
           << growth_str(rep.strong.reduced_growth) << "\n";
        os << "first integrals: " << rep.first_integral_count << "\n";
        os << "goursat: " << rep.verdict.str() << "\n";
        os << "case " << rep.case_label << "\n";
        for (const auto& st : rep.chain)
            os << "  " << st.kind << " [" << st.detail << "] -> dim " << st.chart_dim << ", weak "
               << growth_str(st.weak_growth) << ", strong " << growth_str(st.strong_growth)
               << "\n";
        if (rep.carnot) {
            os << "carnot dims " << growth_str(rep.carnot->dims) << "; nonzero brackets:\n";
            for (const auto& [ij, v] : rep.carnot->brackets) {
                bool all_zero = true;
                for (const auto& xq : v)
                    if (!xq.is_zero()) all_zero = false;
                if (all_zero) continue;
                os << "  [" << rep.carnot->labels[ij.first] << ","
                   << rep.carnot->labels[ij.second] << "] =";
                for (size_t k = 0; k < v.size(); ++k) {
                    if (v[k].is_zero()) continue;
                    os << " ";
                    if (!v[k].is_one()) os << v[k].str() << "*";
                    os << rep.carnot->labels[k];
                }
                os << "\n";
            }
        } else if (!rep.carnot_note.empty()) {
            os << "carnot: unavailable (" << rep.carnot_note << ")\n";
        }
        for (const auto& ic : rep.integral_checks)
            os << "integral candidate '" << ic.expr << "': "
               << (ic.verified ? "verified" : "NOT an integral") << "\n";
    }
    return os.str();
}

} // namespace distflag
