#include "distflag/sampler.hpp"

#include "distflag/errors.hpp"

namespace distflag {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& s : s_) s = splitmix64(sm);
}

std::uint64_t Rng::next() {
    std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

long Rng::uniform(long n) { return static_cast<long>(next() % static_cast<std::uint64_t>(n)) + 1; }

bool Rng::coin() { return (next() & 1) != 0; }

Rational Rng::rational(int range) {
    long num = uniform(range);
    long den = uniform(range);
    if (coin()) num = -num;
    return Rational(num, static_cast<unsigned long>(den));
}

std::uint64_t salt_of(const std::string& tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt, std::size_t payload) {
    std::uint64_t x = seed ^ rotl(salt, 31) ^ (static_cast<std::uint64_t>(payload) * 0x9e3779b97f4a7c15ULL);
    return splitmix64(x);
}

bool value_is_zero(const Value& v, double tol) {
    if (std::holds_alternative<Rational>(v)) return std::get<Rational>(v).is_zero();
    const Real& r = std::get<Real>(v);
    if (r.is_nan()) throw DomainError("evaluation produced NaN");
    return !(r.abs() > Real(tol));
}

Real value_to_real(const Value& v) {
    if (std::holds_alternative<Rational>(v)) return Real(std::get<Rational>(v));
    return std::get<Real>(v);
}

namespace {

Rational eval_exact(const Expr& e, const Point& point) {
    switch (e.kind()) {
        case Kind::Const:
            return e.const_value();
        case Kind::Var: {
            auto it = point.find(e.var_name());
            if (it == point.end())
                input_error("UnboundVariable", "no value for '" + e.var_name() + "'");
            return it->second;
        }
        case Kind::Add: {
            Rational acc(0);
            for (const Expr& t : e.args()) acc += eval_exact(t, point);
            return acc;
        }
        case Kind::Mul: {
            Rational acc(1);
            for (const Expr& f : e.args()) acc *= eval_exact(f, point);
            return acc;
        }
        case Kind::Pow:
            return eval_exact(e.base(), point).pow_int(e.exponent());
        case Kind::Func:
            throw DomainError("transcendental node in exact evaluation");
    }
    return Rational(0);
}

Real eval_real(const Expr& e, const Point& point) {
    switch (e.kind()) {
        case Kind::Const:
            return Real(e.const_value());
        case Kind::Var: {
            auto it = point.find(e.var_name());
            if (it == point.end())
                input_error("UnboundVariable", "no value for '" + e.var_name() + "'");
            return Real(it->second);
        }
        case Kind::Add: {
            Real acc(0L);
            for (const Expr& t : e.args()) acc = acc + eval_real(t, point);
            return acc;
        }
        case Kind::Mul: {
            Real acc(1L);
            for (const Expr& f : e.args()) acc = acc * eval_real(f, point);
            return acc;
        }
        case Kind::Pow:
            return eval_real(e.base(), point).pow(e.exponent());
        case Kind::Func: {
            Real a = eval_real(e.args()[0], point);
            switch (e.func_kind()) {
                case FuncKind::Sin: return Real::sin(a);
                case FuncKind::Cos: return Real::cos(a);
                case FuncKind::Exp: return Real::exp(a);
                case FuncKind::Log: return Real::log(a);
            }
            break;
        }
    }
    return Real(0L);
}

} // namespace

Value evaluate(const Expr& e, const Point& point) {
    if (e.rational_class()) return eval_exact(e, point);
    return eval_real(e, point);
}

Point sample_point(const std::vector<std::string>& vars, Rng& rng, const SamplerConfig& cfg) {
    Point p;
    for (const auto& v : vars) p[v] = rng.rational(cfg.coordinate_range);
    return p;
}

bool is_zero(const Expr& e, const SamplerConfig& cfg) {
    if (e.is_const()) return e.const_value().is_zero();
    Rng rng(mix_seed(cfg.seed, salt_of("is_zero"), e.hash()));
    const auto& vars = e.vars();
    if (vars.empty()) {
        // Constant expression outside the rational class, e.g. sin(3).
        try {
            return value_is_zero(Value(eval_real(e, {})), cfg.float_tolerance);
        } catch (const DomainError& de) {
            certify_error("SamplingExhausted",
                          std::string("constant expression undefined: ") + de.what());
        }
    }
    for (int t = 0; t < cfg.trials; ++t) {
        bool done = false;
        for (int attempt = 0; attempt < cfg.max_retries && !done; ++attempt) {
            Point p = sample_point(vars, rng, cfg);
            try {
                Value v = evaluate(e, p);
                if (!value_is_zero(v, cfg.float_tolerance)) return false;
                done = true;
            } catch (const DomainError&) {
                // Resample: the positivity convention for fractional powers
                // and the pole caveat are both realized here.
            }
        }
        if (!done)
            certify_error("SamplingExhausted",
                          "no admissible sample point after " + std::to_string(cfg.max_retries) +
                              " retries for '" + e.str() + "'");
    }
    return true;
}

} // namespace distflag
