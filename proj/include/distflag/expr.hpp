#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "distflag/rational.hpp"

namespace distflag {

enum class Kind : unsigned char { Const, Var, Add, Mul, Pow, Func };
enum class FuncKind : unsigned char { Sin, Cos, Exp, Log };

const char* func_name(FuncKind k);

// Immutable symbolic expression over the computable subfield fixed by the
// engine: rationals, chart variables and declared parameters, closed under
// +, *, rational powers and {sin, cos, exp, log}. Every Expr is normalized
// on construction:
//   - Add/Mul flattened, canonically sorted, like terms/factors combined,
//     at most one rational constant per node;
//   - Pow exponents never 0 or 1, constant bases with integer exponents
//     folded, perfect rational roots extracted (positive branch);
//   - exp(c*log(X) + r) -> X^c * exp(r) for rational constants c,
//     log(X^e) -> e*log(X), log(X*Y) -> log(X) + log(Y).
// Symbolic powers a^b with non-constant b are represented as exp(b*log(a)).
class Expr {
public:
    Expr(); // Const 0

    static Expr constant(Rational r);
    static Expr integer(long n) { return constant(Rational(n)); }
    static Expr variable(std::string name);
    static Expr add(std::vector<Expr> terms);
    static Expr mul(std::vector<Expr> factors);
    static Expr pow(const Expr& base, const Rational& e);
    static Expr func(FuncKind f, const Expr& arg);
    static Expr pow_general(const Expr& base, const Expr& exponent);

    Kind kind() const;
    const Rational& const_value() const;   // Const
    const std::string& var_name() const;   // Var
    const std::vector<Expr>& args() const; // Add/Mul terms, {base} for Pow, {arg} for Func
    const Expr& base() const;              // Pow
    const Rational& exponent() const;      // Pow
    FuncKind func_kind() const;            // Func

    bool is_const() const { return kind() == Kind::Const; }
    bool is_zero() const;
    bool is_one() const;

    // True when the expression is free of Func nodes and every Pow exponent
    // is an integer; evaluation is then exact over the rationals.
    bool rational_class() const;

    const std::vector<std::string>& vars() const; // sorted, unique
    bool depends_on(const std::string& v) const;

    std::size_t hash() const;

    std::string str() const; // parses back to a structurally equal Expr

    Expr operator+(const Expr& o) const { return add({*this, o}); }
    Expr operator-(const Expr& o) const;
    Expr operator*(const Expr& o) const { return mul({*this, o}); }
    Expr operator-() const;

    struct Node;
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    const Node* node() const { return node_.get(); }

private:
    std::shared_ptr<const Node> node_;
};

bool struct_equal(const Expr& a, const Expr& b);
int struct_cmp(const Expr& a, const Expr& b);

struct StructLess {
    bool operator()(const Expr& a, const Expr& b) const { return struct_cmp(a, b) < 0; }
};

Expr differentiate(const Expr& e, const std::string& v);
Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings);

// Bottom-up rebuild through the normalizing constructors.
Expr normalize(const Expr& e);

// Split e as num / prod(den[i].first ^ den[i].second) with positive rational
// exponents in den. Top-level structural split only; Func arguments and Pow
// bases are treated as atoms.
struct Fraction {
    Expr num;
    std::vector<std::pair<Expr, Rational>> den;
    Expr den_expr() const;
};
Fraction fractionize(const Expr& e);

} // namespace distflag
