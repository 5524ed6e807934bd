#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>

namespace distflag {

// Exact rational scalar. Thin wrapper over GMP's mpq_class that pins the
// invariants we rely on (canonical form, positive denominator) and adds the
// few operations gmpxx lacks: structural hashing, integer powers, exact n-th
// roots and string round-trips.
class Rational {
public:
    Rational() : q_(0) {}
    Rational(long n) : q_(n) {}
    Rational(long n, unsigned long d) : q_(n, d) { q_.canonicalize(); }
    explicit Rational(const mpq_class& q) : q_(q) { q_.canonicalize(); }

    static Rational from_string(const std::string& s); // "n" or "n/d"

    const mpq_class& raw() const { return q_; }
    mpz_class num() const { return q_.get_num(); }
    mpz_class den() const { return q_.get_den(); }

    bool is_zero() const { return sgn(q_) == 0; }
    bool is_one() const { return q_ == 1; }
    bool is_integer() const { return q_.get_den() == 1; }
    int sign() const { return sgn(q_); }

    Rational operator-() const { return Rational(mpq_class(-q_)); }
    Rational operator+(const Rational& o) const { return Rational(mpq_class(q_ + o.q_)); }
    Rational operator-(const Rational& o) const { return Rational(mpq_class(q_ - o.q_)); }
    Rational operator*(const Rational& o) const { return Rational(mpq_class(q_ * o.q_)); }
    Rational operator/(const Rational& o) const; // throws DomainError on /0
    Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
    Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }

    bool operator==(const Rational& o) const { return q_ == o.q_; }
    bool operator!=(const Rational& o) const { return q_ != o.q_; }
    bool operator<(const Rational& o) const { return q_ < o.q_; }

    int cmp(const Rational& o) const { return ::cmp(q_, o.q_); }

    // this^e for integer e (e.den == 1); throws DomainError on 0^negative.
    Rational pow_int(const Rational& e) const;

    // Exact n-th root if this is a perfect n-th power of a rational (n >= 1).
    std::optional<Rational> exact_root(unsigned long n) const;

    Rational abs() const { return Rational(mpq_class(::abs(q_))); }

    double to_double() const { return q_.get_d(); }
    std::string str() const;
    std::size_t hash() const;

private:
    mpq_class q_;
};

} // namespace distflag
