#include <doctest.h>

#include "test_helpers.hpp"

using namespace distflag;
using namespace distflag::testing;

namespace {
const SamplerConfig cfg;
}

TEST_CASE("jet chart bookkeeping") {
    CHECK(jet_coord_name({0, 0}) == "u");
    CHECK(jet_coord_name({2, 1}) == "u21");
    CHECK(scalar_jet_coords(2).size() == 2 + 6); // 2 + (k+1)(k+2)/2
    CHECK(scalar_jet_coords(4).size() == 2 + 15);
    PdeSystem e = eceq_system();
    CHECK(e.internal_coords() == std::vector<std::string>{"x", "y", "u", "u10", "u01", "u20"});
    CHECK(e.free_top() == std::vector<MultiIndex>{{2, 0}});
}

TEST_CASE("make_system validation") {
    CHECK_THROWS_WITH_AS(system_of("bad", 2, {{"10", "0"}}), doctest::Contains("SchemaError"),
                         EngineError);
    // RHS referencing a constrained coordinate of the same system.
    CHECK_THROWS_WITH_AS(system_of("bad2", 2, {{"20", "u11"}, {"11", "0"}}),
                         doctest::Contains("SchemaError"), EngineError);
}

TEST_CASE("total_derivative") {
    PdeSystem e = eceq_system();
    std::vector<std::string> vars = e.internal_coords();
    CHECK(is_zero(total_derivative(e, P("x*u", vars), 'x', cfg) - P("u + x*u10", vars), cfg));
    // Derivative landing on a constrained coordinate substitutes its solved
    // form.
    CHECK(is_zero(total_derivative(e, P("u01", vars), 'x', cfg) - P("(1/2)*u20^2", vars), cfg));
    // Top coordinate derivatives are unknown before prolongation.
    CHECK_THROWS_WITH_AS(total_derivative(e, P("u20", vars), 'x', cfg),
                         doctest::Contains("ExceedsJetOrder"), EngineError);
    // Constrained coordinates may appear directly; their defining relation
    // is used.
    PdeSystem s = system_of("s", 2, {{"20", "y"}, {"11", "0"}});
    CHECK(is_zero(total_derivative(s, P("u20", scalar_jet_coords(2)), 'y', cfg) -
                      Expr::integer(1),
                  cfg));
}

TEST_CASE("prolong_system") {
    // The eceq prolongation frees u30 and determines the mixed derivatives.
    PdeSystem e1 = prolong_system(eceq_system(), cfg);
    std::vector<std::string> vars = e1.internal_coords();
    CHECK(e1.free_top() == std::vector<MultiIndex>{{3, 0}});
    CHECK(is_zero(e1.solved.at({2, 1}) - P("u20*u30", vars), cfg));
    CHECK(is_zero(e1.solved.at({1, 2}) - P("u20^2*u30", vars), cfg));
    CHECK(is_zero(e1.solved.at({0, 3}) - P("u20^3*u30", vars), cfg));

    // Incompatible cross-derivatives are detected.
    CHECK_THROWS_WITH_AS(prolong_system(system_of("bad", 2, {{"20", "y"}, {"11", "0"}}), cfg),
                         doctest::Contains("IncompatibleSystem"), EngineError);

    // A cross-condition can determine a previously free coordinate (linear
    // occurrence).
    PdeSystem cross = prolong_system(system_of("cross", 3, {{"30", "u03^2"}, {"21", "x"}}), cfg);
    CHECK(cross.is_constrained({0, 4}));
    std::vector<std::string> cv = cross.internal_coords();
    CHECK(is_zero(cross.solved.at({0, 4}) - P("(1/2)*u03^-1", cv), cfg));
}

TEST_CASE("total derivatives commute on a compatible prolonged system") {
    PdeSystem e3 = prolong_system(e3_system(), cfg);
    std::vector<std::string> vars = e3.internal_coords();
    Rng rng(77);
    for (int it = 0; it < 6; ++it) {
        // f over coordinates of level <= 2 keeps both derivatives within the
        // known levels.
        Expr f = random_expr(rng, {"x", "y", "u", "u10", "u01", "u20", "u11", "u02"}, 3, true);
        Expr xy = total_derivative(e3, total_derivative(e3, f, 'x', cfg), 'y', cfg);
        Expr yx = total_derivative(e3, total_derivative(e3, f, 'y', cfg), 'x', cfg);
        CHECK(is_zero(xy - yx, cfg));
    }
}

TEST_CASE("symbol_profile") {
    SymbolProfile p = symbol_profile(eceq_system(), cfg);
    CHECK(p.g_dims == std::vector<int>{1, 2, 1});
    CHECK(p.t == 2);
    CHECK(p.kappa == 1);
    CHECK(p.type_string == "2E2");
    // Dimension oracle: internal coordinate count of the stabilized system.
    CHECK(static_cast<int>(eceq_system().internal_coords().size()) == p.kappa + p.t + 3);

    SymbolProfile p3 = symbol_profile(e3_system(), cfg);
    CHECK(p3.g_dims == std::vector<int>{1, 2, 3, 2, 1});
    CHECK(p3.t == 4);
    CHECK(p3.kappa == 4);
    CHECK(p3.type_string == "2E3");
    PdeSystem hat = prolong_system(e3_system(), cfg);
    CHECK(static_cast<int>(hat.internal_coords().size()) == p3.kappa + p3.t + 3);

    CHECK_THROWS_WITH_AS(symbol_profile(system_of("single", 2, {{"20", "0"}}), cfg),
                         doctest::Contains("NotClassOne"), EngineError);
    CHECK_THROWS_WITH_AS(
        symbol_profile(system_of("syzygy", 2, {{"20", "0"}, {"11", "0"}, {"02", "0"}}), cfg),
        doctest::Contains("InconsistentWithProlongation"), EngineError);
}

TEST_CASE("cartan_distribution") {
    PdeSystem e = eceq_system();
    Distribution ce = cartan_distribution(e, cfg);
    CHECK(ce.rank() == 3);
    CHECK(ce.dim() == 6);
    std::vector<std::string> v = ce.chart.coords;
    CHECK(v == std::vector<std::string>{"x", "y", "u", "u10", "u01", "u20"});
    // D_x|_E = dx + u10 du + u20 du10 + (1/2)u20^2 du01
    CHECK(is_zero(ce.gens[0].coeffs[3] - P("u20", v), cfg));
    CHECK(is_zero(ce.gens[0].coeffs[4] - P("(1/2)*u20^2", v), cfg));
    CHECK(is_zero(ce.gens[1].coeffs[4] - P("(1/3)*u20^3", v), cfg));
    CHECK(ce.gens[2].coeffs[5].is_one()); // the symbol direction

    PdeSystem gas = system_of("gas", 1, {{"01", "u*u10"}});
    Distribution cg = cartan_distribution(gas, cfg);
    CHECK(cg.rank() == 3);
    CHECK(cg.dim() == 4);

    CHECK_THROWS_WITH_AS(cartan_distribution(e3_system(), cfg),
                         doctest::Contains("NotStabilized"), EngineError);
}

TEST_CASE("characteristic_line") {
    // Euclidean GCD of (xi_x xi_y - l xi_x^2, xi_y^2 - l^2 xi_x^2) has the
    // root mu = l.
    CharacteristicLine l = characteristic_line(eceq_system(), cfg);
    CHECK(!l.vertical);
    CHECK(struct_equal(l.slope, Expr::variable("u20")));

    PdeSystem ct = system_of("ctsm1", 2, {{"11", "u20^m"}, {"02", "(m^2/(2*m-1))*u20^(2*m-1)"}},
                             {"m"});
    CharacteristicLine lc = characteristic_line(ct, cfg);
    std::vector<std::string> vars = scalar_jet_coords(2);
    vars.push_back("m");
    CHECK(is_zero(lc.slope - P("m*u20^(m-1)", vars), cfg));

    CharacteristicLine lg = characteristic_line(system_of("gas", 1, {{"01", "u*u10"}}), cfg);
    CHECK(struct_equal(lg.slope, Expr::variable("u")));

    CharacteristicLine ls = characteristic_line(
        system_of("sqrt2", 2, {{"20", "-2*u10/(x+y)"}, {"11", "2*sqrt(u10*u01)/(x+y)"}}), cfg);
    CHECK(ls.vertical);

    CHECK_THROWS_WITH_AS(
        characteristic_line(system_of("ft", 2, {{"20", "0"}, {"02", "0"}}), cfg),
        doctest::Contains("FiniteType"), EngineError);
    // Symbols xi_x(xi_x^2 - xi_y^2) and xi_y(xi_x^2 - xi_y^2) share a
    // quadratic factor.
    CHECK_THROWS_WITH_AS(
        characteristic_line(system_of("w2", 3, {{"30", "u12"}, {"21", "u03"}}), cfg),
        doctest::Contains("NotClassOne"), EngineError);
}

TEST_CASE("prolong_vector_field, one independent variable") {
    Chart base{"J0", {"x", "y", "z"}, {}};
    std::vector<std::pair<std::string, int>> deps{{"y", 2}, {"z", 0}};

    VectorField dx{base, {Expr::integer(1), Expr::integer(0), Expr::integer(0)}};
    VectorField pdx = prolong_point_field(dx, deps, cfg);
    for (size_t i = 1; i < pdx.coeffs.size(); ++i) CHECK(pdx.coeffs[i].is_zero());

    VectorField cosy{base, {Expr::integer(0), P("cos(x)", {"x"}), Expr::integer(0)}};
    VectorField pc = prolong_point_field(cosy, deps, cfg);
    std::vector<std::string> v = pc.chart.coords;
    CHECK(v == std::vector<std::string>{"x", "y", "y1", "y2", "z"});
    CHECK(is_zero(pc.coeffs[1] - P("cos(x)", v), cfg));
    CHECK(is_zero(pc.coeffs[2] + P("sin(x)", v), cfg));
    CHECK(is_zero(pc.coeffs[3] + P("cos(x)", v), cfg));
    CHECK(pc.coeffs[4].is_zero());
}

TEST_CASE("prolong_vector_field, two independent variables") {
    Chart base{"J0", {"x", "y", "u"}, {}};
    VectorField uu{base, {Expr::integer(0), Expr::integer(0), P("u", {"u"})}};
    VectorField p1 = prolong_point_field_2d(uu, 1, cfg);
    std::vector<std::string> v = p1.chart.coords;
    CHECK(is_zero(p1.coeffs[2] - P("u", v), cfg));
    CHECK(is_zero(p1.coeffs[3] - P("u10", v), cfg));
    CHECK(is_zero(p1.coeffs[4] - P("u01", v), cfg));
}

TEST_CASE("prolongation commutes with brackets") {
    // Full product jets (all dependents carried to the same depth).
    Chart base{"J0", {"x", "y", "z"}, {}};
    std::vector<std::pair<std::string, int>> deps{{"y", 2}, {"z", 2}};
    Rng rng(55);
    for (int it = 0; it < 8; ++it) {
        VectorField a = random_poly_field(rng, base);
        VectorField b = random_poly_field(rng, base);
        VectorField lhs = prolong_point_field(lie_bracket(a, b), deps, cfg);
        VectorField rhs = lie_bracket(prolong_point_field(a, deps, cfg),
                                      prolong_point_field(b, deps, cfg));
        for (size_t i = 0; i < lhs.coeffs.size(); ++i)
            CHECK(is_zero(lhs.coeffs[i] - rhs.coeffs[i], cfg));
    }
    // Scalar two-independent-variable case.
    Chart base2{"J0", {"x", "y", "u"}, {}};
    for (int it = 0; it < 5; ++it) {
        VectorField a = random_poly_field(rng, base2);
        VectorField b = random_poly_field(rng, base2);
        VectorField lhs = prolong_point_field_2d(lie_bracket(a, b), 2, cfg);
        VectorField rhs = lie_bracket(prolong_point_field_2d(a, 2, cfg),
                                      prolong_point_field_2d(b, 2, cfg));
        for (size_t i = 0; i < lhs.coeffs.size(); ++i)
            CHECK(is_zero(lhs.coeffs[i] - rhs.coeffs[i], cfg));
    }
}

TEST_CASE("prolonged rotation fields close with rational constants") {
    Chart base{"J0", {"x", "y", "z"}, {}};
    std::vector<std::pair<std::string, int>> deps{{"y", 2}, {"z", 0}};
    VectorField dx{base, {Expr::integer(1), Expr::integer(0), Expr::integer(0)}};
    VectorField cosf{base, {Expr::integer(0), P("cos(x)", {"x"}), Expr::integer(0)}};
    VectorField sinf{base, {Expr::integer(0), P("sin(x)", {"x"}), Expr::integer(0)}};
    VectorField pdx = prolong_point_field(dx, deps, cfg);
    VectorField pc = prolong_point_field(cosf, deps, cfg);
    VectorField ps = prolong_point_field(sinf, deps, cfg);
    // [d/dx, prol(cos x d/dy)] = -prol(sin x d/dy)
    auto c = solve_constant_combination({pdx.coeffs, pc.coeffs, ps.coeffs},
                                        lie_bracket(pdx, pc).coeffs, cfg);
    REQUIRE(c.has_value());
    CHECK((*c)[0] == Rational(0));
    CHECK((*c)[1] == Rational(0));
    CHECK((*c)[2] == Rational(-1));
}

TEST_CASE("cartan distributions have a rank-1 Cauchy space on the corpus") {
    for (const char* name : {"eceq.json", "gas.json", "kek3.json"}) {
        Document doc = load_document(corpus(name));
        PdeSystem sys = build_system(doc, cfg, {});
        while (sys.free_top().size() != 1) sys = prolong_system(sys, cfg);
        Distribution ce = cartan_distribution(sys, cfg);
        CHECK(cauchy_characteristics_full(ce, cfg).fields.size() == 1);
    }
}
