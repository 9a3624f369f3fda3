#include "phw/parser.hpp"

#include <cctype>

#include "phw/errors.hpp"

namespace phw {

namespace {

bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)); }

}  // namespace

std::vector<Token> tokenize(const std::string& text, int line) {
  std::vector<Token> out;
  int col = 1;
  size_t i = 0;
  auto push = [&](Token::Kind k, std::string s, int l, int c) {
    out.push_back(Token{k, std::move(s), l, c});
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++col;
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    int start_col = col;
    if (name_start(c)) {
      size_t j = i + 1;
      while (j < text.size() && name_char(text[j])) ++j;
      // One derivative suffix: underscore followed by letters.
      if (j < text.size() && text[j] == '_' && j + 1 < text.size() &&
          std::isalpha(static_cast<unsigned char>(text[j + 1]))) {
        ++j;
        while (j < text.size() &&
               std::isalpha(static_cast<unsigned char>(text[j])))
          ++j;
      }
      push(Token::Kind::Name, text.substr(i, j - i), line, start_col);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])))
        ++j;
      if (j < text.size() && text[j] == '.' && j + 1 < text.size() &&
          std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
        ++j;
        while (j < text.size() &&
               std::isdigit(static_cast<unsigned char>(text[j])))
          ++j;
      }
      push(Token::Kind::Number, text.substr(i, j - i), line, start_col);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    static const std::string punct = "+-*/^()[],.'=:";
    if (punct.find(c) != std::string::npos) {
      push(Token::Kind::Punct, std::string(1, c), line, start_col);
      ++col;
      ++i;
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line,
                     start_col);
  }
  push(Token::Kind::End, "", line, col);
  return out;
}

namespace {

class ExprParser {
 public:
  ExprParser(const std::vector<Token>& toks, size_t& pos,
             const ModelSpace& space)
      : t_(toks), pos_(pos), sp_(space) {}

  Expr parse() { return expr(); }

 private:
  const std::vector<Token>& t_;
  size_t& pos_;
  const ModelSpace& sp_;

  const Token& peek() const { return t_[std::min(pos_, t_.size() - 1)]; }
  const Token& advance() { return t_[std::min(pos_++, t_.size() - 1)]; }
  bool at_punct(const char* s) const {
    return peek().kind == Token::Kind::Punct && peek().text == s;
  }
  bool eat_punct(const char* s) {
    if (!at_punct(s)) return false;
    ++pos_;
    return true;
  }
  void expect_punct(const char* s) {
    if (!eat_punct(s))
      fail(std::string("expected '") + s + "'", peek());
  }
  [[noreturn]] static void fail(const std::string& msg, const Token& tok) {
    throw ParseError(msg, tok.line, tok.col);
  }

  Expr expr() {
    Expr acc = term();
    for (;;) {
      if (eat_punct("+"))
        acc = acc + term();
      else if (eat_punct("-"))
        acc = acc - term();
      else
        return acc;
    }
  }

  Expr term() {
    Expr acc = factor();
    for (;;) {
      if (eat_punct("*"))
        acc = acc * factor();
      else if (eat_punct("/"))
        acc = acc / factor();
      else
        return acc;
    }
  }

  Expr factor() {
    if (eat_punct("-")) return -factor();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (!eat_punct("^")) return base;
    int sign = eat_punct("-") ? -1 : 1;
    const Token& tok = peek();
    if (tok.kind != Token::Kind::Number ||
        tok.text.find('.') != std::string::npos)
      fail("exponent must be an integer", tok);
    advance();
    try {
      return Expr::pow(base, sign * std::stoi(tok.text));
    } catch (const std::out_of_range&) {
      fail("exponent out of range", tok);
    }
  }

  Expr primary() {
    const Token& tok = peek();
    if (tok.kind == Token::Kind::Number) {
      advance();
      return Expr::number(number_value(tok));
    }
    if (eat_punct("(")) {
      Expr e = expr();
      expect_punct(")");
      return e;
    }
    if (tok.kind != Token::Kind::Name) fail("expected an expression", tok);
    advance();
    const std::string& name = tok.text;
    if (name == "pi") return Expr::pi();
    if (at_punct("(")) {
      if (name == "sin" || name == "cos" || name == "exp" || name == "sqrt" ||
          name == "reciprocal") {
        advance();
        Expr arg = expr();
        expect_punct(")");
        if (name == "sin") return Expr::func(FuncKind::Sin, arg);
        if (name == "cos") return Expr::func(FuncKind::Cos, arg);
        if (name == "exp") return Expr::func(FuncKind::Exp, arg);
        if (name == "sqrt") return Expr::func(FuncKind::Sqrt, arg);
        return Expr::pow(arg, -1);
      }
      fail("unknown function: " + name, tok);
    }
    if (name == "D" && at_punct("[")) return d_form(tok);
    return symbol(tok);
  }

  Rational number_value(const Token& tok) {
    try {
      size_t dot = tok.text.find('.');
      if (dot == std::string::npos) return Rational(std::stoll(tok.text));
      Rational whole(std::stoll(tok.text.substr(0, dot)));
      std::string frac = tok.text.substr(dot + 1);
      Rational scale = Rational(10).pow(static_cast<int>(frac.size()));
      return whole + Rational(std::stoll(frac)) / scale;
    } catch (const std::out_of_range&) {
      fail("number out of range", tok);
    } catch (const OverflowError&) {
      fail("number out of range", tok);
    }
  }

  /// A coordinate name: independent, field, or derivative-suffixed field.
  Coordinate coordinate_token(const Token& tok) {
    const std::string& s = tok.text;
    size_t u = s.find('_');
    if (u == std::string::npos) {
      if (auto a = sp_.find_independent(s)) return Coordinate::independent(*a);
      if (auto f = sp_.find_field(s)) return Coordinate::dependent(*f);
      fail("unknown coordinate: " + s, tok);
    }
    std::string base = s.substr(0, u);
    auto f = sp_.find_field(base);
    if (!f) fail("unknown field: " + base, tok);
    std::vector<int> multi;
    for (size_t k = u + 1; k < s.size(); ++k) {
      auto a = sp_.find_independent(std::string(1, s[k]));
      if (!a)
        fail(std::string("unknown independent coordinate: ") + s[k], tok);
      multi.push_back(*a);
    }
    if (static_cast<int>(multi.size()) > sp_.max_jet_order())
      fail("derivative order exceeds the jet order bound", tok);
    return Coordinate::derivative(*f, std::move(multi));
  }

  /// D[symbol, c1, c2, ...]: formal derivative of a parameter by any
  /// coordinates, or of a field by independent coordinates.
  Expr d_form(const Token& dtok) {
    expect_punct("[");
    const Token& inner = peek();
    Expr base;
    if (inner.kind == Token::Kind::Name && inner.text == "D") {
      advance();
      base = d_form(inner);
    } else if (inner.kind == Token::Kind::Name) {
      advance();
      base = symbol(inner);
    } else {
      fail("expected a symbol inside D[...]", inner);
    }
    if (!at_punct(","))
      fail("D[...] needs at least one coordinate", peek());
    while (eat_punct(",")) {
      const Token& ct = peek();
      if (ct.kind != Token::Kind::Name) fail("expected a coordinate", ct);
      advance();
      Coordinate c = coordinate_token(ct);
      if (base.kind() == NodeKind::Param) {
        ParamSym s = base.node().param;
        s.derivs.push_back(c);
        base = Expr::param(s);
      } else if (base.kind() == NodeKind::Coord) {
        if (c.kind != Coordinate::Kind::Independent)
          fail("fields can only be differentiated by independent coordinates",
               ct);
        Coordinate promoted = base.node().coord.promoted(c.index);
        if (promoted.order() > sp_.max_jet_order())
          fail("derivative order exceeds the jet order bound", ct);
        base = Expr::coord(promoted);
      } else {
        fail("D[...] applies to parameters and fields", dtok);
      }
    }
    expect_punct("]");
    return base;
  }

  /// A plain name, plus any prime marks (parameter derivatives).
  Expr symbol(const Token& tok) {
    const std::string& s = tok.text;
    if (s.find('_') != std::string::npos ||
        sp_.find_independent(s) || sp_.find_field(s)) {
      Coordinate c = coordinate_token(tok);
      if (at_punct("'"))
        fail("prime notation applies to parameters, not coordinates", peek());
      return Expr::coord(c);
    }
    if (sp_.find_param(s)) {
      int primes = 0;
      while (eat_punct("'")) ++primes;
      if (primes == 0) return Expr::param(ParamSym{s, {}});
      if (sp_.dim() != 1)
        fail("prime notation needs exactly one independent coordinate", tok);
      std::vector<Coordinate> derivs(primes, Coordinate::independent(0));
      return Expr::param(ParamSym{s, std::move(derivs)});
    }
    fail("unknown symbol: " + s, tok);
  }
};

}  // namespace

Expr parse_expression(const std::vector<Token>& tokens, size_t& pos,
                      const ModelSpace& space) {
  return ExprParser(tokens, pos, space).parse();
}

Expr parse_expression(const std::string& text, const ModelSpace& space,
                      int line) {
  std::vector<Token> tokens = tokenize(text, line);
  size_t pos = 0;
  Expr e = parse_expression(tokens, pos, space);
  if (tokens[pos].kind != Token::Kind::End)
    throw ParseError("unexpected trailing input", tokens[pos].line,
                     tokens[pos].col);
  return e;
}

}  // namespace phw
