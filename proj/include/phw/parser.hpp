#pragma once

#include <string>
#include <vector>

#include "phw/expression.hpp"
#include "phw/space.hpp"

namespace phw {

/// Lexical token.  Names keep derivative suffixes attached ("w_XX" is
/// one token); punctuation is one character per token except that the
/// kind distinguishes nothing further.
struct Token {
  enum class Kind : std::uint8_t { Name, Number, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 1;
  int col = 1;
};

/// Splits text into tokens.  '#' starts a comment running to the end of
/// the text.  `line` seeds the reported positions so callers parsing an
/// embedded line of a larger file get file-accurate errors.
std::vector<Token> tokenize(const std::string& text, int line = 1);

/// Parses one expression over the space's symbols.
///
/// Grammar, loosest binding first:
///   expr    :=  term (('+' | '-') term)*
///   term    :=  factor (('*' | '/') factor)*
///   factor  :=  '-' factor | power
///   power   :=  primary ['^' ['-'] INTEGER]
///   primary :=  NUMBER | '(' expr ')' | FUNC '(' expr ')'
///            |  'D' '[' symbol (',' coordinate)+ ']' | symbol
///   symbol  :=  NAME ("'")*
///
/// Names resolve against the space: independent coordinates, fields,
/// derivative-suffixed fields (w_X, w_XX), parameters, and "pi".  The
/// functions are sin, cos, exp, sqrt, and reciprocal(e) = e^-1.  Primes
/// make parameter derivative symbols (single independent coordinate
/// only); D[s,c] differentiates a parameter symbol by any coordinate or
/// a field by independent coordinates.  Exact decimals become exact
/// rationals.  Errors carry 1-based line:col positions.
Expr parse_expression(const std::string& text, const ModelSpace& space,
                      int line = 1);

/// Same, over an existing token stream starting at `pos`; consumes up
/// to the first token that cannot extend the expression.
Expr parse_expression(const std::vector<Token>& tokens, size_t& pos,
                      const ModelSpace& space);

}  // namespace phw
