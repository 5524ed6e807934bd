#include "distflag/rational.hpp"

#include "distflag/errors.hpp"

namespace distflag {

Rational Rational::from_string(const std::string& s) {
    mpq_class q;
    if (q.set_str(s, 10) != 0)
        input_error("SyntaxError", "not a rational literal: '" + s + "'");
    q.canonicalize();
    if (q.get_den() == 0)
        throw DomainError("zero denominator in literal '" + s + "'");
    return Rational(q);
}

Rational Rational::operator/(const Rational& o) const {
    if (o.is_zero()) throw DomainError("division by zero");
    return Rational(mpq_class(q_ / o.q_));
}

Rational Rational::pow_int(const Rational& e) const {
    if (!e.is_integer())
        throw DomainError("pow_int with non-integer exponent " + e.str());
    mpz_class n = e.num();
    if (!n.fits_slong_p())
        throw DomainError("exponent too large: " + e.str());
    long k = n.get_si();
    if (k == 0) return Rational(1);
    bool invert = k < 0;
    unsigned long a = invert ? static_cast<unsigned long>(-k) : static_cast<unsigned long>(k);
    mpz_class pn, pd;
    mpz_pow_ui(pn.get_mpz_t(), q_.get_num().get_mpz_t(), a);
    mpz_pow_ui(pd.get_mpz_t(), q_.get_den().get_mpz_t(), a);
    if (invert) {
        if (pn == 0) throw DomainError("0 raised to a negative power");
        std::swap(pn, pd);
    }
    mpq_class r(pn, pd);
    r.canonicalize();
    return Rational(r);
}

std::optional<Rational> Rational::exact_root(unsigned long n) const {
    if (n == 0) return std::nullopt;
    if (n == 1) return *this;
    if (sign() < 0) return std::nullopt; // positive-branch convention
    mpz_class rn, rd;
    int exact_n = mpz_root(rn.get_mpz_t(), q_.get_num().get_mpz_t(), n);
    if (!exact_n) return std::nullopt;
    int exact_d = mpz_root(rd.get_mpz_t(), q_.get_den().get_mpz_t(), n);
    if (!exact_d) return std::nullopt;
    mpq_class r(rn, rd);
    r.canonicalize();
    return Rational(r);
}

std::string Rational::str() const {
    return q_.get_str();
}

std::size_t Rational::hash() const {
    // Limb-free stable hash: residues mod two large primes.
    constexpr unsigned long p1 = 0xffffffffffc5ULL; // < 2^48
    constexpr unsigned long p2 = 0x1fffffffffffffULL;
    unsigned long hn = mpz_fdiv_ui(q_.get_num().get_mpz_t(), p1);
    unsigned long hd = mpz_fdiv_ui(q_.get_den().get_mpz_t(), p2);
    std::size_t h = hn * 0x9e3779b97f4a7c15ULL;
    h ^= hd + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

} // namespace distflag
