#include "distflag/real.hpp"

#include <vector>

#include "distflag/errors.hpp"

namespace distflag {

Real Real::operator/(const Real& o) const {
    if (o.is_zero()) throw DomainError("division by zero");
    Real r;
    mpfr_div(r.v_, v_, o.v_, MPFR_RNDN);
    return r;
}

Real Real::log(const Real& a) {
    if (a.sign() <= 0) throw DomainError("log of non-positive value");
    Real r;
    mpfr_log(r.v_, a.v_, MPFR_RNDN);
    return r;
}

Real Real::pow(const Rational& e) const {
    Real r;
    if (e.is_integer() && e.num().fits_slong_p()) {
        long k = e.num().get_si();
        if (is_zero() && k < 0) throw DomainError("0 raised to a negative power");
        mpfr_pow_si(r.v_, v_, k, MPFR_RNDN);
        return r;
    }
    // Fractional exponent: positive-branch convention, base must be > 0.
    if (sign() <= 0) throw DomainError("fractional power of non-positive base");
    Real ex(e);
    mpfr_pow(r.v_, v_, ex.v_, MPFR_RNDN);
    return r;
}

std::string Real::str(int digits) const {
    std::vector<char> buf(static_cast<size_t>(digits) + 32);
    mpfr_snprintf(buf.data(), buf.size(), "%.*Rg", digits, v_);
    return std::string(buf.data());
}

} // namespace distflag
