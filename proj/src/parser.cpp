#include "distflag/parser.hpp"

#include <cctype>
#include <optional>
#include <set>

#include "distflag/errors.hpp"

namespace distflag {

namespace {

struct Parser {
    const std::string& text;
    size_t pos = 0;
    std::set<std::string> vars;

    [[noreturn]] void fail(const std::string& msg, size_t at) const {
        input_error("SyntaxError", msg + " at position " + std::to_string(at) +
                                       " in '" + text + "'");
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    bool accept(char c) {
        if (peek() == c) {
            ++pos;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'", pos);
    }

    std::optional<std::string> try_integer() {
        skip_ws();
        size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == start) return std::nullopt;
        return text.substr(start, pos - start);
    }

    std::optional<std::string> try_ident() {
        skip_ws();
        size_t start = pos;
        if (pos < text.size() &&
            (std::isalpha(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) {
            ++pos;
            while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                                         text[pos] == '_'))
                ++pos;
            return text.substr(start, pos - start);
        }
        return std::nullopt;
    }

    // number := integer ('/' positive-integer)? -- the '/' is only consumed
    // when a digit follows, otherwise it is left for the term level.
    Rational number(const std::string& int_part) {
        size_t save = pos;
        skip_ws();
        if (pos < text.size() && text[pos] == '/') {
            ++pos;
            if (auto den = try_integer()) {
                Rational r = Rational::from_string(int_part + "/" + *den);
                return r;
            }
            pos = save;
        }
        return Rational::from_string(int_part);
    }

    std::optional<FuncKind> func_kind(const std::string& name) {
        if (name == "sin") return FuncKind::Sin;
        if (name == "cos") return FuncKind::Cos;
        if (name == "exp") return FuncKind::Exp;
        if (name == "log") return FuncKind::Log;
        return std::nullopt;
    }

    Expr base() {
        size_t at = pos;
        if (accept('(')) {
            Expr e = expr();
            expect(')');
            return e;
        }
        if (auto digits = try_integer()) return Expr::constant(number(*digits));
        if (auto name = try_ident()) {
            if (peek() == '(') {
                if (*name == "sqrt") {
                    expect('(');
                    Expr a = expr();
                    expect(')');
                    return Expr::pow(a, Rational(1, 2));
                }
                if (auto fk = func_kind(*name)) {
                    expect('(');
                    Expr a = expr();
                    expect(')');
                    return Expr::func(*fk, a);
                }
                fail("unknown function '" + *name + "'", at);
            }
            if (!vars.count(*name))
                input_error("UnknownIdentifier",
                            "'" + *name + "' at position " + std::to_string(at) + " in '" +
                                text + "'");
            return Expr::variable(*name);
        }
        fail("expected a number, identifier or '('", pos);
    }

    // exponent := ['-'] rational | ident | '(' expr ')'
    Expr exponent() {
        skip_ws();
        if (accept('(')) {
            Expr e = expr();
            expect(')');
            return e;
        }
        bool neg = false;
        size_t save = pos;
        if (accept('-')) neg = true;
        if (auto digits = try_integer()) {
            Rational r = number(*digits);
            return Expr::constant(neg ? -r : r);
        }
        if (neg) pos = save;
        if (auto name = try_ident()) {
            if (!vars.count(*name))
                input_error("UnknownIdentifier", "'" + *name + "' in exponent in '" + text + "'");
            return Expr::variable(*name);
        }
        fail("expected an exponent", pos);
    }

    Expr factor() {
        Expr b = base();
        if (accept('^')) {
            Expr e = exponent();
            return Expr::pow_general(b, e);
        }
        return b;
    }

    Expr term() {
        Expr acc = factor();
        for (;;) {
            if (accept('*')) {
                acc = acc * factor();
            } else if (peek() == '/') {
                ++pos;
                acc = acc * Expr::pow(factor(), Rational(-1));
            } else {
                return acc;
            }
        }
    }

    Expr expr() {
        bool neg = accept('-');
        Expr acc = term();
        if (neg) acc = -acc;
        for (;;) {
            if (accept('+')) acc = acc + term();
            else if (accept('-')) acc = acc - term();
            else return acc;
        }
    }

    Expr run() {
        Expr e = expr();
        skip_ws();
        if (pos != text.size()) fail("unexpected trailing input", pos);
        return e;
    }
};

} // namespace

Expr parse_expr(const std::string& text, const std::vector<std::string>& vars) {
    Parser p{text, 0, std::set<std::string>(vars.begin(), vars.end())};
    try {
        return p.run();
    } catch (const DomainError& e) {
        input_error("SyntaxError", std::string(e.what()) + " in '" + text + "'");
    }
}

} // namespace distflag
