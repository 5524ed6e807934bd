#pragma once

#include <string>
#include <vector>

#include "distflag/expr.hpp"

namespace distflag {

// Parses the expression grammar:
//   expr   := ['-'] term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' exponent)?
//   base   := number | ident | '(' expr ')' | func '(' expr ')'
//   func   in {sin, cos, exp, log, sqrt};  sqrt(e) desugars to e^(1/2)
//   number := integer ('/' positive-integer)?
//   exponent := rational | ident | '(' expr ')'
// Whitespace is insignificant. Every identifier must appear in `vars`
// (chart coordinates plus declared parameters). Non-constant exponents
// desugar to exp(e*log(base)).
Expr parse_expr(const std::string& text, const std::vector<std::string>& vars);

} // namespace distflag
