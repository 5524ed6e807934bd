#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "distflag/expr.hpp"
#include "distflag/real.hpp"

namespace distflag {

struct SamplerConfig {
    std::uint64_t seed = 0;
    int trials = 5;              // >= 3 keeps the Schwartz-Zippel bound meaningful
    int coordinate_range = 64;   // numerators/denominators drawn from [1, range]
    double float_tolerance = 1e-9;
    int max_retries = 40;        // resamples per trial on domain errors
};

// Deterministic xoshiro256**; seeding never touches global state, so results
// are independent of thread scheduling and platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    std::uint64_t next();
    // Uniform in [1, n] (n >= 1).
    long uniform(long n);
    bool coin();
    Rational rational(int range); // +-num/den, num,den in [1, range]

private:
    std::uint64_t s_[4];
};

std::uint64_t salt_of(const std::string& tag);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt, std::size_t payload);

using Value = std::variant<Rational, Real>;

bool value_is_zero(const Value& v, double tol);
Real value_to_real(const Value& v);

// Exact Rational when e is in the rational class, high-precision Real
// otherwise. Throws DomainError for division by zero, log of a non-positive
// value, or a fractional power of a non-positive base.
Value evaluate(const Expr& e, const std::map<std::string, Rational>& point);

using Point = std::map<std::string, Rational>;

// Samples a point for `vars`, retrying on DomainError of `probe` up to
// cfg.max_retries times. Throws SamplingExhausted when no valid point is
// found.
Point sample_point(const std::vector<std::string>& vars, Rng& rng, const SamplerConfig& cfg);

// Probabilistic zero test: true iff e vanishes at cfg.trials independent
// random points (exactly for the rational class, within float_tolerance
// otherwise). Structural zero short-circuits without sampling. The false
// positive probability for the rational class is bounded by Schwartz-Zippel
// and shrinks geometrically with trials.
bool is_zero(const Expr& e, const SamplerConfig& cfg);

} // namespace distflag
