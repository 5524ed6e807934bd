#pragma once

#include <mpfr.h>

#include <string>

#include "distflag/rational.hpp"

namespace distflag {

// Arbitrary-precision real used whenever an expression leaves the rational
// class (transcendental functions or fractional powers). 256 bits gives
// ~77 decimal digits, comfortably above the 64 the sampler tolerances assume.
class Real {
public:
    static constexpr mpfr_prec_t kPrecision = 256;

    Real() { mpfr_init2(v_, kPrecision); mpfr_set_zero(v_, 1); }
    Real(const Real& o) { mpfr_init2(v_, kPrecision); mpfr_set(v_, o.v_, MPFR_RNDN); }
    Real(Real&& o) noexcept { mpfr_init2(v_, kPrecision); mpfr_swap(v_, o.v_); }
    explicit Real(long n) { mpfr_init2(v_, kPrecision); mpfr_set_si(v_, n, MPFR_RNDN); }
    explicit Real(double d) { mpfr_init2(v_, kPrecision); mpfr_set_d(v_, d, MPFR_RNDN); }
    explicit Real(const Rational& q) {
        mpfr_init2(v_, kPrecision);
        mpfr_set_q(v_, q.raw().get_mpq_t(), MPFR_RNDN);
    }
    ~Real() { mpfr_clear(v_); }

    Real& operator=(const Real& o) {
        if (this != &o) mpfr_set(v_, o.v_, MPFR_RNDN);
        return *this;
    }
    Real& operator=(Real&& o) noexcept { mpfr_swap(v_, o.v_); return *this; }

    Real operator+(const Real& o) const { Real r; mpfr_add(r.v_, v_, o.v_, MPFR_RNDN); return r; }
    Real operator-(const Real& o) const { Real r; mpfr_sub(r.v_, v_, o.v_, MPFR_RNDN); return r; }
    Real operator*(const Real& o) const { Real r; mpfr_mul(r.v_, v_, o.v_, MPFR_RNDN); return r; }
    Real operator/(const Real& o) const; // throws DomainError on /0
    Real operator-() const { Real r; mpfr_neg(r.v_, v_, MPFR_RNDN); return r; }

    bool is_zero() const { return mpfr_zero_p(v_); }
    bool is_nan() const { return mpfr_nan_p(v_); }
    int sign() const { return mpfr_sgn(v_); }
    bool operator<(const Real& o) const { return mpfr_less_p(v_, o.v_); }
    bool operator>(const Real& o) const { return mpfr_greater_p(v_, o.v_); }

    Real abs() const { Real r; mpfr_abs(r.v_, v_, MPFR_RNDN); return r; }

    // this^e; integer e works for any base, otherwise base must be > 0.
    Real pow(const Rational& e) const;

    static Real sin(const Real& a) { Real r; mpfr_sin(r.v_, a.v_, MPFR_RNDN); return r; }
    static Real cos(const Real& a) { Real r; mpfr_cos(r.v_, a.v_, MPFR_RNDN); return r; }
    static Real exp(const Real& a) { Real r; mpfr_exp(r.v_, a.v_, MPFR_RNDN); return r; }
    static Real log(const Real& a); // throws DomainError for a <= 0

    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    std::string str(int digits = 20) const;

    const mpfr_t& raw() const { return v_; }

private:
    mpfr_t v_;
};

} // namespace distflag
