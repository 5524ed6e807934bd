#include "distflag/expr.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "distflag/errors.hpp"

namespace distflag {

const char* func_name(FuncKind k) {
    switch (k) {
        case FuncKind::Sin: return "sin";
        case FuncKind::Cos: return "cos";
        case FuncKind::Exp: return "exp";
        case FuncKind::Log: return "log";
    }
    return "?";
}

struct Expr::Node {
    Kind kind = Kind::Const;
    Rational value;              // Const value or Pow exponent
    std::string name;            // Var
    FuncKind fk = FuncKind::Sin; // Func
    std::vector<Expr> args;      // Add/Mul children, {base} for Pow, {arg} for Func
    std::size_t hash = 0;
    bool rational_class = true;
    std::vector<std::string> vars; // sorted unique
};

namespace {

using Node = Expr::Node;

std::size_t mix(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

void merge_vars(std::vector<std::string>& into, const std::vector<std::string>& from) {
    std::vector<std::string> out;
    out.reserve(into.size() + from.size());
    std::set_union(into.begin(), into.end(), from.begin(), from.end(), std::back_inserter(out));
    into = std::move(out);
}

Expr finish(std::shared_ptr<Node> n) {
    std::size_t h = mix(0x517cc1b7, static_cast<std::size_t>(n->kind));
    switch (n->kind) {
        case Kind::Const:
            h = mix(h, n->value.hash());
            break;
        case Kind::Var:
            h = mix(h, std::hash<std::string>{}(n->name));
            n->vars = {n->name};
            break;
        case Kind::Pow:
            h = mix(h, n->value.hash());
            [[fallthrough]];
        case Kind::Add:
        case Kind::Mul:
        case Kind::Func:
            if (n->kind == Kind::Func) h = mix(h, static_cast<std::size_t>(n->fk));
            for (const Expr& a : n->args) {
                h = mix(h, a.hash());
                n->rational_class = n->rational_class && a.rational_class();
                merge_vars(n->vars, a.vars());
            }
            if (n->kind == Kind::Func) n->rational_class = false;
            if (n->kind == Kind::Pow && !n->value.is_integer()) n->rational_class = false;
            break;
    }
    n->hash = h;
    return Expr(std::shared_ptr<const Node>(std::move(n)));
}

int kind_rank(Kind k) {
    switch (k) {
        case Kind::Const: return 0;
        case Kind::Var: return 1;
        case Kind::Func: return 2;
        case Kind::Pow: return 3;
        case Kind::Mul: return 4;
        case Kind::Add: return 5;
    }
    return 6;
}

} // namespace

Expr::Expr() { *this = constant(Rational(0)); }

Kind Expr::kind() const { return node_->kind; }
const Rational& Expr::const_value() const { return node_->value; }
const std::string& Expr::var_name() const { return node_->name; }
const std::vector<Expr>& Expr::args() const { return node_->args; }
const Expr& Expr::base() const { return node_->args[0]; }
const Rational& Expr::exponent() const { return node_->value; }
FuncKind Expr::func_kind() const { return node_->fk; }
bool Expr::rational_class() const { return node_->rational_class; }
const std::vector<std::string>& Expr::vars() const { return node_->vars; }
std::size_t Expr::hash() const { return node_->hash; }

bool Expr::is_zero() const { return node_->kind == Kind::Const && node_->value.is_zero(); }
bool Expr::is_one() const { return node_->kind == Kind::Const && node_->value.is_one(); }

bool Expr::depends_on(const std::string& v) const {
    const auto& vs = node_->vars;
    return std::binary_search(vs.begin(), vs.end(), v);
}

bool struct_equal(const Expr& a, const Expr& b) {
    if (a.node() == b.node()) return true;
    if (a.hash() != b.hash()) return false;
    return struct_cmp(a, b) == 0;
}

int struct_cmp(const Expr& a, const Expr& b) {
    if (a.node() == b.node()) return 0;
    int ra = kind_rank(a.kind()), rb = kind_rank(b.kind());
    if (ra != rb) return ra < rb ? -1 : 1;
    switch (a.kind()) {
        case Kind::Const:
            return a.const_value().cmp(b.const_value());
        case Kind::Var:
            return a.var_name().compare(b.var_name());
        case Kind::Func: {
            if (a.func_kind() != b.func_kind())
                return static_cast<int>(a.func_kind()) < static_cast<int>(b.func_kind()) ? -1 : 1;
            return struct_cmp(a.args()[0], b.args()[0]);
        }
        case Kind::Pow: {
            int c = struct_cmp(a.base(), b.base());
            if (c != 0) return c;
            return a.exponent().cmp(b.exponent());
        }
        case Kind::Add:
        case Kind::Mul: {
            size_t n = std::min(a.args().size(), b.args().size());
            for (size_t i = 0; i < n; ++i) {
                int c = struct_cmp(a.args()[i], b.args()[i]);
                if (c != 0) return c;
            }
            if (a.args().size() != b.args().size())
                return a.args().size() < b.args().size() ? -1 : 1;
            return 0;
        }
    }
    return 0;
}

Expr Expr::constant(Rational r) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Const;
    n->value = std::move(r);
    return finish(std::move(n));
}

Expr Expr::variable(std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Var;
    n->name = std::move(name);
    return finish(std::move(n));
}

namespace {

Expr raw_node(Kind k, std::vector<Expr> args, Rational value = Rational(0),
              FuncKind fk = FuncKind::Sin) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->args = std::move(args);
    n->value = std::move(value);
    n->fk = fk;
    return finish(std::move(n));
}

} // namespace

Expr Expr::pow(const Expr& b, const Rational& e) {
    if (e.is_zero()) return integer(1); // convention: base nonzero at generic points
    if (e.is_one()) return b;
    switch (b.kind()) {
        case Kind::Const: {
            const Rational& c = b.const_value();
            if (e.is_integer()) return constant(c.pow_int(e));
            if (c.sign() > 0 && e.den().fits_ulong_p()) {
                if (auto root = c.exact_root(e.den().get_ui()))
                    return constant(root->pow_int(Rational(e.num())));
            }
            // Not exactly representable (or negative base): keep symbolic.
            return raw_node(Kind::Pow, {b}, e);
        }
        case Kind::Pow:
            // Positive-branch convention: (b^p)^q = b^(p*q).
            return pow(b.base(), b.exponent() * e);
        case Kind::Mul: {
            if (e.is_integer()) {
                std::vector<Expr> fs;
                fs.reserve(b.args().size());
                for (const Expr& f : b.args()) fs.push_back(pow(f, e));
                return mul(std::move(fs));
            }
            // Fractional exponent over a product: extract factors that leave
            // the radical exactly (integral resulting exponent or exact
            // constant roots); the rest stays under a single Pow.
            std::vector<Expr> outside, inside;
            for (const Expr& f : b.args()) {
                Expr fb = f.kind() == Kind::Pow ? f.base() : f;
                Rational fe = f.kind() == Kind::Pow ? f.exponent() * e : e;
                if (fe.is_integer()) {
                    outside.push_back(pow(fb, fe));
                } else if (fb.is_const()) {
                    Expr folded = pow(fb, fe);
                    if (folded.is_const()) outside.push_back(folded);
                    else inside.push_back(f);
                } else {
                    inside.push_back(f);
                }
            }
            if (outside.empty()) return raw_node(Kind::Pow, {b}, e);
            if (!inside.empty()) {
                Expr rest = mul(std::move(inside));
                outside.push_back(rest.kind() == Kind::Pow || rest.kind() == Kind::Mul
                                      ? raw_node(Kind::Pow, {rest}, e)
                                      : pow(rest, e));
            }
            return mul(std::move(outside));
        }
        default:
            return raw_node(Kind::Pow, {b}, e);
    }
}

Expr Expr::mul(std::vector<Expr> factors) {
    for (int round = 0; round < 32; ++round) {
        Rational acc(1);
        std::map<Expr, Rational, StructLess> expo;
        std::deque<Expr> q(factors.begin(), factors.end());
        while (!q.empty()) {
            Expr f = q.front();
            q.pop_front();
            switch (f.kind()) {
                case Kind::Const:
                    acc *= f.const_value();
                    if (acc.is_zero()) return integer(0);
                    break;
                case Kind::Mul:
                    for (const Expr& a : f.args()) q.push_back(a);
                    break;
                case Kind::Pow:
                    expo[f.base()] += f.exponent();
                    break;
                default:
                    expo[f] += Rational(1);
                    break;
            }
        }
        std::vector<Expr> out;
        bool reexpand = false;
        for (const auto& [b, e] : expo) {
            if (e.is_zero()) continue;
            Expr pw = pow(b, e);
            if (pw.is_const()) {
                acc *= pw.const_value();
                if (acc.is_zero()) return integer(0);
            } else {
                if (pw.kind() == Kind::Mul) reexpand = true;
                out.push_back(pw);
            }
        }
        if (reexpand) {
            if (!acc.is_one()) out.push_back(constant(acc));
            factors = std::move(out);
            continue;
        }
        if (out.empty()) return constant(acc);
        if (out.size() == 1 && out[0].kind() == Kind::Add && !acc.is_one()) {
            // Scalars distribute over sums; keeps e - e structurally zero.
            std::vector<Expr> ts;
            Expr c = constant(acc);
            for (const Expr& t : out[0].args()) ts.push_back(mul({c, t}));
            return add(std::move(ts));
        }
        if (!acc.is_one()) out.push_back(constant(acc));
        if (out.size() == 1) return out[0];
        std::sort(out.begin(), out.end(), StructLess{});
        return raw_node(Kind::Mul, std::move(out));
    }
    certify_error("NormalizationDiverged", "product normalization did not stabilize");
}

Expr Expr::add(std::vector<Expr> terms) {
    Rational acc(0);
    std::map<Expr, Rational, StructLess> coeff; // core -> rational coefficient
    std::deque<Expr> q(terms.begin(), terms.end());
    while (!q.empty()) {
        Expr t = q.front();
        q.pop_front();
        switch (t.kind()) {
            case Kind::Const:
                acc += t.const_value();
                break;
            case Kind::Add:
                for (const Expr& a : t.args()) q.push_back(a);
                break;
            case Kind::Mul: {
                const auto& fs = t.args();
                if (fs[0].is_const()) {
                    std::vector<Expr> rest(fs.begin() + 1, fs.end());
                    Expr core = rest.size() == 1 ? rest[0] : raw_node(Kind::Mul, std::move(rest));
                    coeff[core] += fs[0].const_value();
                } else {
                    coeff[t] += Rational(1);
                }
                break;
            }
            default:
                coeff[t] += Rational(1);
                break;
        }
    }
    std::vector<Expr> out;
    for (const auto& [core, c] : coeff) {
        if (c.is_zero()) continue;
        if (c.is_one()) out.push_back(core);
        else out.push_back(mul({constant(c), core}));
    }
    if (!acc.is_zero()) out.push_back(constant(acc));
    if (out.empty()) return integer(0);
    if (out.size() == 1) return out[0];
    std::sort(out.begin(), out.end(), StructLess{});
    return raw_node(Kind::Add, std::move(out));
}

namespace {

// Matches c*log(X) with rational constant c (including c = 1); used by the
// exp() normalization to peel powers out of the exponent.
bool match_const_log(const Expr& t, Rational& c, Expr& x) {
    if (t.kind() == Kind::Func && t.func_kind() == FuncKind::Log) {
        c = Rational(1);
        x = t.args()[0];
        return true;
    }
    if (t.kind() == Kind::Mul && t.args().size() == 2 && t.args()[0].is_const()) {
        const Expr& f = t.args()[1];
        if (f.kind() == Kind::Func && f.func_kind() == FuncKind::Log) {
            c = t.args()[0].const_value();
            x = f.args()[0];
            return true;
        }
    }
    return false;
}

} // namespace

Expr Expr::func(FuncKind f, const Expr& a) {
    switch (f) {
        case FuncKind::Sin: {
            if (a.is_zero()) return integer(0);
            if (a.kind() == Kind::Mul && a.args()[0].is_const() && a.args()[0].const_value().sign() < 0)
                return mul({integer(-1), func(FuncKind::Sin, -a)});
            break;
        }
        case FuncKind::Cos: {
            if (a.is_zero()) return integer(1);
            if (a.kind() == Kind::Mul && a.args()[0].is_const() && a.args()[0].const_value().sign() < 0)
                return func(FuncKind::Cos, -a);
            break;
        }
        case FuncKind::Exp: {
            if (a.is_zero()) return integer(1);
            std::vector<Expr> ts = a.kind() == Kind::Add ? a.args() : std::vector<Expr>{a};
            std::vector<Expr> pulled, kept;
            for (const Expr& t : ts) {
                Rational c;
                Expr x;
                if (match_const_log(t, c, x)) pulled.push_back(pow(x, c));
                else kept.push_back(t);
            }
            if (!pulled.empty()) {
                if (!kept.empty()) pulled.push_back(raw_node(Kind::Func, {add(std::move(kept))},
                                                             Rational(0), FuncKind::Exp));
                return mul(std::move(pulled));
            }
            break;
        }
        case FuncKind::Log: {
            if (a.is_one()) return integer(0);
            if (a.kind() == Kind::Pow)
                return mul({constant(a.exponent()), func(FuncKind::Log, a.base())});
            if (a.kind() == Kind::Mul) {
                std::vector<Expr> ts;
                for (const Expr& g : a.args()) ts.push_back(func(FuncKind::Log, g));
                return add(std::move(ts));
            }
            break;
        }
    }
    return raw_node(Kind::Func, {a}, Rational(0), f);
}

Expr Expr::pow_general(const Expr& b, const Expr& e) {
    if (e.is_const()) return pow(b, e.const_value());
    // Symbolic exponent: positive-branch desugaring through exp/log.
    return func(FuncKind::Exp, mul({e, func(FuncKind::Log, b)}));
}

Expr Expr::operator-() const { return mul({integer(-1), *this}); }
Expr Expr::operator-(const Expr& o) const { return add({*this, -o}); }

Expr differentiate(const Expr& e, const std::string& v) {
    if (!e.depends_on(v)) return Expr::integer(0);
    switch (e.kind()) {
        case Kind::Const:
            return Expr::integer(0);
        case Kind::Var:
            return e.var_name() == v ? Expr::integer(1) : Expr::integer(0);
        case Kind::Add: {
            std::vector<Expr> ts;
            for (const Expr& t : e.args()) ts.push_back(differentiate(t, v));
            return Expr::add(std::move(ts));
        }
        case Kind::Mul: {
            std::vector<Expr> sum;
            const auto& fs = e.args();
            for (size_t i = 0; i < fs.size(); ++i) {
                if (!fs[i].depends_on(v)) continue;
                std::vector<Expr> prod;
                prod.reserve(fs.size());
                for (size_t j = 0; j < fs.size(); ++j)
                    prod.push_back(i == j ? differentiate(fs[j], v) : fs[j]);
                sum.push_back(Expr::mul(std::move(prod)));
            }
            return Expr::add(std::move(sum));
        }
        case Kind::Pow: {
            // d(b^e) = e * b^(e-1) * db
            return Expr::mul({Expr::constant(e.exponent()),
                              Expr::pow(e.base(), e.exponent() - Rational(1)),
                              differentiate(e.base(), v)});
        }
        case Kind::Func: {
            const Expr& a = e.args()[0];
            Expr da = differentiate(a, v);
            switch (e.func_kind()) {
                case FuncKind::Sin: return Expr::mul({Expr::func(FuncKind::Cos, a), da});
                case FuncKind::Cos:
                    return Expr::mul({Expr::integer(-1), Expr::func(FuncKind::Sin, a), da});
                case FuncKind::Exp: return Expr::mul({e, da});
                case FuncKind::Log: return Expr::mul({Expr::pow(a, Rational(-1)), da});
            }
            break;
        }
    }
    return Expr::integer(0);
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings) {
    bool touched = false;
    for (const auto& [k, v] : bindings) {
        (void)v;
        if (e.depends_on(k)) { touched = true; break; }
    }
    if (!touched) return e;
    switch (e.kind()) {
        case Kind::Const:
            return e;
        case Kind::Var: {
            auto it = bindings.find(e.var_name());
            return it != bindings.end() ? it->second : e;
        }
        case Kind::Add: {
            std::vector<Expr> ts;
            for (const Expr& t : e.args()) ts.push_back(substitute(t, bindings));
            return Expr::add(std::move(ts));
        }
        case Kind::Mul: {
            std::vector<Expr> fs;
            for (const Expr& f : e.args()) fs.push_back(substitute(f, bindings));
            return Expr::mul(std::move(fs));
        }
        case Kind::Pow:
            return Expr::pow(substitute(e.base(), bindings), e.exponent());
        case Kind::Func:
            return Expr::func(e.func_kind(), substitute(e.args()[0], bindings));
    }
    return e;
}

Expr normalize(const Expr& e) {
    switch (e.kind()) {
        case Kind::Const:
        case Kind::Var:
            return e;
        case Kind::Add: {
            std::vector<Expr> ts;
            for (const Expr& t : e.args()) ts.push_back(normalize(t));
            return Expr::add(std::move(ts));
        }
        case Kind::Mul: {
            std::vector<Expr> fs;
            for (const Expr& f : e.args()) fs.push_back(normalize(f));
            return Expr::mul(std::move(fs));
        }
        case Kind::Pow:
            return Expr::pow(normalize(e.base()), e.exponent());
        case Kind::Func:
            return Expr::func(e.func_kind(), normalize(e.args()[0]));
    }
    return e;
}

namespace {

// Printing precedence levels.
constexpr int kPrecAdd = 1;
constexpr int kPrecMul = 2;
constexpr int kPrecPow = 3;

bool leading_negative(const Expr& e) {
    if (e.is_const()) return e.const_value().sign() < 0;
    if (e.kind() == Kind::Mul && e.args()[0].is_const())
        return e.args()[0].const_value().sign() < 0;
    return false;
}

void print(std::ostream& os, const Expr& e, int parent_prec);

void print_pow_base(std::ostream& os, const Expr& b) {
    bool parens = true;
    switch (b.kind()) {
        case Kind::Var:
        case Kind::Func:
            parens = false;
            break;
        case Kind::Const:
            parens = b.const_value().sign() < 0 || !b.const_value().is_integer();
            break;
        default:
            break;
    }
    if (parens) {
        os << '(';
        print(os, b, kPrecAdd);
        os << ')';
    } else {
        print(os, b, kPrecPow + 1);
    }
}

void print(std::ostream& os, const Expr& e, int parent_prec) {
    switch (e.kind()) {
        case Kind::Const:
            os << e.const_value().str();
            return;
        case Kind::Var:
            os << e.var_name();
            return;
        case Kind::Func:
            os << func_name(e.func_kind()) << '(';
            print(os, e.args()[0], kPrecAdd);
            os << ')';
            return;
        case Kind::Pow: {
            if (e.exponent() == Rational(1, 2)) {
                os << "sqrt(";
                print(os, e.base(), kPrecAdd);
                os << ')';
                return;
            }
            print_pow_base(os, e.base());
            os << '^' << e.exponent().str();
            return;
        }
        case Kind::Mul: {
            bool parens = parent_prec > kPrecMul;
            if (parens) os << '(';
            const auto& fs = e.args();
            size_t start = 0;
            if (fs[0].is_const() && fs[0].const_value() == Rational(-1) && fs.size() > 1) {
                os << '-';
                start = 1;
            }
            for (size_t i = start; i < fs.size(); ++i) {
                if (i > start) os << '*';
                print(os, fs[i], kPrecMul + 1);
            }
            if (parens) os << ')';
            return;
        }
        case Kind::Add: {
            bool parens = parent_prec > kPrecAdd;
            if (parens) os << '(';
            const auto& ts = e.args();
            for (size_t i = 0; i < ts.size(); ++i) {
                if (i == 0) {
                    print(os, ts[i], kPrecAdd);
                } else if (leading_negative(ts[i])) {
                    os << " - ";
                    print(os, -ts[i], kPrecMul);
                } else {
                    os << " + ";
                    print(os, ts[i], kPrecMul);
                }
            }
            if (parens) os << ')';
            return;
        }
    }
}

} // namespace

std::string Expr::str() const {
    std::ostringstream os;
    print(os, *this, 0);
    return os.str();
}

Fraction fractionize(const Expr& e) {
    switch (e.kind()) {
        case Kind::Pow: {
            if (e.exponent().sign() < 0)
                return Fraction{Expr::integer(1), {{e.base(), -e.exponent()}}};
            return Fraction{e, {}};
        }
        case Kind::Mul: {
            std::vector<Expr> nums;
            std::vector<std::pair<Expr, Rational>> den;
            for (const Expr& f : e.args()) {
                Fraction ff = fractionize(f);
                nums.push_back(ff.num);
                for (auto& d : ff.den) den.push_back(std::move(d));
            }
            return Fraction{Expr::mul(std::move(nums)), std::move(den)};
        }
        case Kind::Add: {
            std::vector<Fraction> parts;
            std::vector<std::pair<Expr, Rational>> common;
            for (const Expr& t : e.args()) {
                parts.push_back(fractionize(t));
                for (const auto& [b, k] : parts.back().den) {
                    bool found = false;
                    for (auto& [cb, ck] : common) {
                        if (struct_equal(cb, b)) {
                            if (ck < k) ck = k;
                            found = true;
                            break;
                        }
                    }
                    if (!found) common.emplace_back(b, k);
                }
            }
            if (common.empty()) return Fraction{e, {}};
            std::vector<Expr> terms;
            for (const Fraction& p : parts) {
                std::vector<Expr> fs{p.num};
                for (const auto& [cb, ck] : common) {
                    Rational have(0);
                    for (const auto& [b, k] : p.den)
                        if (struct_equal(b, cb)) { have = k; break; }
                    Rational need = ck - have;
                    if (!need.is_zero()) fs.push_back(Expr::pow(cb, need));
                }
                terms.push_back(Expr::mul(std::move(fs)));
            }
            return Fraction{Expr::add(std::move(terms)), std::move(common)};
        }
        default:
            return Fraction{e, {}};
    }
}

Expr Fraction::den_expr() const {
    std::vector<Expr> fs;
    for (const auto& [b, k] : den) fs.push_back(Expr::pow(b, k));
    return fs.empty() ? Expr::integer(1) : Expr::mul(std::move(fs));
}

} // namespace distflag
