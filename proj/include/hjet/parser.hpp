#ifndef HJET_PARSER_HPP
#define HJET_PARSER_HPP

#include <string>

#include "hjet/expr.hpp"
#include "hjet/symbol.hpp"

namespace hjet {

/// Parses the shared infix grammar:
///   operators + - * / ^, unary minus, f(e) for f in
///   {sin, cos, exp, log, sqrt}, parentheses;
///   ^ binds tightest and is right-associative;
///   identifiers [a-zA-Z][a-zA-Z0-9_]* resolved against `context`.
/// Exponents must normalize to an integer or rational constant.
/// Integer literals stay exact rationals; literals with '.' or an
/// exponent part are floats.
///
/// Momentum names such as "P1_.2" carry a ".digits" suffix; the lexer
/// accepts the suffixed name when the context declares it, so printed
/// systems re-parse.
///
/// Throws ParseError with the byte offset of the failure.
Expr parse_expr(const std::string& text, const SymbolTable& context);

}  // namespace hjet

#endif  // HJET_PARSER_HPP
