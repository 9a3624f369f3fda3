#include "phw/modelfile.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "phw/calculus.hpp"
#include "phw/parser.hpp"
#include "phw/printer.hpp"

namespace phw {

namespace {

using Kind = Token::Kind;

bool is_punct(const Token& t, char c) {
  return t.kind == Kind::Punct && t.text.size() == 1 && t.text[0] == c;
}

/// Parses tokens [b, e) as one expression, requiring full consumption.
Expr parse_span(const std::vector<Token>& toks, size_t b, size_t e,
                const ModelSpace& sp) {
  std::vector<Token> sub(toks.begin() + static_cast<std::ptrdiff_t>(b),
                         toks.begin() + static_cast<std::ptrdiff_t>(e));
  Token end;
  end.kind = Kind::End;
  const Token& last = toks[e - 1];
  end.line = last.line;
  end.col = last.col + static_cast<int>(last.text.size());
  sub.push_back(end);
  size_t p = 0;
  Expr ex = parse_expression(sub, p, sp);
  if (sub[p].kind != Kind::End)
    throw ParseError("unexpected '" + sub[p].text + "'", sub[p].line,
                     sub[p].col);
  return ex;
}

/// True when toks[i] opens an operator factor: a name 'D<letter>'
/// directly followed by '('.  The letter is checked against the
/// declared coordinates later so the error can name it.
bool is_marker(const std::vector<Token>& toks, size_t i) {
  const Token& t = toks[i];
  return t.kind == Kind::Name && t.text.size() == 2 && t.text[0] == 'D' &&
         std::isalpha(static_cast<unsigned char>(t.text[1])) &&
         is_punct(toks[i + 1], '(');
}

/// Index of the ')' matching the '(' at `open` (brackets of both kinds
/// are tracked so D[...] forms nest transparently).
size_t match_paren(const std::vector<Token>& toks, size_t open) {
  int depth = 0;
  for (size_t i = open;; ++i) {
    const Token& t = toks[i];
    if (t.kind == Kind::End) throw ParseError("missing ')'", t.line, t.col);
    if (t.kind != Kind::Punct) continue;
    if (t.text == "(" || t.text == "[") {
      ++depth;
    } else if (t.text == ")" || t.text == "]") {
      --depth;
      if (depth == 0) {
        if (t.text != ")")
          throw ParseError("mismatched bracket", t.line, t.col);
        return i;
      }
      if (depth < 0) throw ParseError("unbalanced ')'", t.line, t.col);
    }
  }
}

/// One additive chunk [cb, ce) whose first depth-0 operator marker sits
/// at m: either `coeff * DA(.)` or `DA(coeff * DB(.))`.
OpTerm parse_op_chunk(const std::vector<Token>& toks, size_t cb, size_t ce,
                      size_t m, int sign, const ModelSpace& sp) {
  auto dir_of = [&sp](const Token& t) {
    const auto a = sp.find_independent(std::string(1, t.text[1]));
    if (!a)
      throw ParseError(
          std::string("unknown derivative direction '") + t.text[1] + "'",
          t.line, t.col);
    return *a;
  };
  const int a = dir_of(toks[m]);
  Expr coeff = Expr::integer(1);
  bool outer_coeff = false;
  if (m != cb) {
    const Token& star = toks[m - 1];
    if (!is_punct(star, '*'))
      throw ParseError("an operator factor must be joined with '*'",
                       star.line, star.col);
    if (m - 1 == cb)
      throw ParseError("missing coefficient before '*'", star.line, star.col);
    coeff = parse_span(toks, cb, m - 1, sp);
    outer_coeff = true;
  }
  const size_t open = m + 1;
  const size_t close = match_paren(toks, open);
  if (close + 1 != ce)
    throw ParseError("unexpected '" + toks[close + 1].text +
                         "' after the operator term",
                     toks[close + 1].line, toks[close + 1].col);
  size_t b0 = open + 1;
  if (b0 == close)
    throw ParseError("empty operator argument", toks[close].line,
                     toks[close].col);
  if (close == b0 + 1 && is_punct(toks[b0], '.')) {
    if (sign < 0) coeff = -coeff;
    return OpTerm::d1(std::move(coeff), a);
  }
  // Second-order form: the coefficient lives inside the outer derivative.
  if (outer_coeff)
    throw ParseError(
        "a second-order term carries its coefficient inside the outer "
        "derivative: DA(coeff * DB(.))",
        toks[cb].line, toks[cb].col);
  int isign = 1;
  if (is_punct(toks[b0], '-') || is_punct(toks[b0], '+')) {
    if (toks[b0].text == "-") isign = -1;
    ++b0;
  }
  size_t m2 = SIZE_MAX;
  int depth = 0;
  for (size_t i = b0; i < close; ++i) {
    const Token& t = toks[i];
    if (t.kind == Kind::Punct) {
      if (t.text == "(" || t.text == "[") ++depth;
      else if (t.text == ")" || t.text == "]") --depth;
    }
    if (depth == 0 && is_marker(toks, i)) {
      m2 = i;
      break;
    }
  }
  if (m2 == SIZE_MAX)
    throw ParseError(
        "the derivative argument must be '.' or a nested first-order term",
        toks[b0].line, toks[b0].col);
  const int bdir = dir_of(toks[m2]);
  Expr icoeff = Expr::integer(1);
  if (m2 != b0) {
    const Token& star = toks[m2 - 1];
    if (!is_punct(star, '*'))
      throw ParseError("an operator factor must be joined with '*'",
                       star.line, star.col);
    if (m2 - 1 == b0)
      throw ParseError("missing coefficient before '*'", star.line, star.col);
    icoeff = parse_span(toks, b0, m2 - 1, sp);
  }
  const size_t open2 = m2 + 1;
  const size_t close2 = match_paren(toks, open2);
  if (!(close2 == open2 + 2 && is_punct(toks[open2 + 1], '.')))
    throw ParseError("the inner derivative must act on '.'",
                     toks[open2].line, toks[open2].col);
  if (close2 + 1 != close)
    throw ParseError("unexpected '" + toks[close2 + 1].text +
                         "' inside the outer derivative",
                     toks[close2 + 1].line, toks[close2 + 1].col);
  if (isign < 0) icoeff = -icoeff;
  if (sign < 0) icoeff = -icoeff;
  return OpTerm::d2(std::move(icoeff), a, bdir);
}

/// Parses one matrix entry from tokens [b, e): a sum of multiplicative
/// expressions and operator terms.  Order-zero pieces accumulate into a
/// single term at the position of the first one; a zero sum is dropped.
OpEntry parse_entry_span(const std::vector<Token>& toks, size_t b, size_t e,
                         const ModelSpace& sp) {
  OpEntry terms;
  std::optional<Expr> k0_sum;
  size_t k0_index = SIZE_MAX;
  size_t cb = b;
  int csign = 1;
  int depth = 0;

  auto flush = [&](size_t ce) {
    if (cb == ce)
      throw ParseError("expected a term", toks[cb].line, toks[cb].col);
    size_t m = SIZE_MAX;
    int d = 0;
    for (size_t i = cb; i < ce; ++i) {
      const Token& t = toks[i];
      if (d == 0 && is_marker(toks, i)) {
        m = i;
        break;
      }
      if (t.kind == Kind::Punct) {
        if (t.text == "(" || t.text == "[") ++d;
        else if (t.text == ")" || t.text == "]") --d;
      }
    }
    if (m == SIZE_MAX) {
      Expr ex = parse_span(toks, cb, ce, sp);
      if (csign < 0) ex = -ex;
      if (!k0_sum) {
        k0_sum = std::move(ex);
        k0_index = terms.size();
        terms.push_back(OpTerm::k0(Expr::integer(0)));
      } else {
        k0_sum = *k0_sum + ex;
      }
    } else {
      terms.push_back(parse_op_chunk(toks, cb, ce, m, csign, sp));
    }
  };

  for (size_t i = b; i < e; ++i) {
    const Token& t = toks[i];
    if (t.kind != Kind::Punct) continue;
    if (t.text == "(" || t.text == "[") {
      ++depth;
      continue;
    }
    if (t.text == ")" || t.text == "]") {
      --depth;
      continue;
    }
    if (depth != 0 || (t.text != "+" && t.text != "-")) continue;
    if (i == cb) {  // leading sign of the chunk
      if (t.text == "-") csign = -csign;
      cb = i + 1;
      continue;
    }
    const Token& prev = toks[i - 1];
    const bool operand_end =
        prev.kind == Kind::Name || prev.kind == Kind::Number ||
        (prev.kind == Kind::Punct &&
         (prev.text == ")" || prev.text == "]" || prev.text == "'"));
    if (!operand_end) continue;  // unary sign inside an expression
    flush(i);
    csign = t.text == "-" ? -1 : 1;
    cb = i + 1;
  }
  flush(e);
  if (k0_index != SIZE_MAX) {
    if (*k0_sum == Expr::integer(0))
      terms.erase(terms.begin() + static_cast<std::ptrdiff_t>(k0_index));
    else
      terms[k0_index] = OpTerm::k0(std::move(*k0_sum));
  }
  return terms;
}

OpMatrix parse_matrix(const std::vector<Token>& toks, size_t& pos,
                      const ModelSpace& sp, const std::string& label) {
  auto expect = [&](char c) {
    const Token& t = toks[pos];
    if (!is_punct(t, c))
      throw ParseError(std::string("expected '") + c + "' in the " + label +
                           " matrix",
                       t.line, t.col);
    ++pos;
  };
  expect('[');
  std::vector<std::vector<OpEntry>> rows;
  for (;;) {
    const Token& row_tok = toks[pos];
    expect('[');
    std::vector<OpEntry> row;
    for (;;) {
      size_t e = pos;
      int depth = 0;
      for (;; ++e) {
        const Token& t = toks[e];
        if (t.kind == Kind::End)
          throw ParseError("unterminated matrix", t.line, t.col);
        if (t.kind != Kind::Punct) continue;
        if (t.text == "(" || t.text == "[") {
          ++depth;
          continue;
        }
        if (t.text == ")") {
          if (--depth < 0) throw ParseError("unbalanced ')'", t.line, t.col);
          continue;
        }
        if (t.text == "]") {
          if (depth == 0) break;
          --depth;
          continue;
        }
        if (t.text == "," && depth == 0) break;
      }
      if (e == pos)
        throw ParseError("empty matrix entry", toks[pos].line, toks[pos].col);
      row.push_back(parse_entry_span(toks, pos, e, sp));
      pos = e;
      if (is_punct(toks[pos], ',')) {
        ++pos;
        continue;
      }
      ++pos;  // the scan stops only at ',' or ']'
      break;
    }
    if (!rows.empty() && rows.front().size() != row.size())
      throw ParseError("rows of the " + label + " matrix have different "
                       "lengths",
                       row_tok.line, row_tok.col);
    rows.push_back(std::move(row));
    if (is_punct(toks[pos], ',')) {
      ++pos;
      continue;
    }
    if (is_punct(toks[pos], ']')) {
      ++pos;
      break;
    }
    throw ParseError("expected ',' or ']' in the " + label + " matrix",
                     toks[pos].line, toks[pos].col);
  }
  OpMatrix m(static_cast<int>(rows.size()),
             static_cast<int>(rows.front().size()));
  m.entries = std::move(rows);
  return m;
}

// ---------------------------------------------------------------- emit

std::string num_text(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[512];
  const auto res =
      std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  return std::string(buf, res.ptr);
}

/// Parenthesizes a rendered expression when it is a depth-0 sum, so it
/// can stand as a factor in front of an operator term.
std::string wrap_sum(std::string s) {
  int depth = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '(' || c == '[') ++depth;
    else if (c == ')' || c == ']') --depth;
    else if ((c == '+' || c == '-') && depth == 0 && i > 0)
      return "(" + std::move(s) + ")";
  }
  return s;
}

std::string term_text(const OpTerm& t, const ModelSpace& sp) {
  const Expr one = Expr::integer(1);
  const Expr minus_one = Expr::integer(-1);
  switch (t.form) {
    case OpTerm::Form::K0:
      return render(t.coeff, sp);
    case OpTerm::Form::FirstOrder: {
      const std::string d = "D" + sp.independent_name(t.a) + "(.)";
      if (t.coeff == one) return d;
      if (t.coeff == minus_one) return "-" + d;
      return wrap_sum(render(t.coeff, sp)) + "*" + d;
    }
    case OpTerm::Form::SecondOrder: {
      const std::string dB = "D" + sp.independent_name(t.b) + "(.)";
      Expr c = t.coeff;
      std::string cs = render(c, sp);
      std::string sign;
      if (!cs.empty() && cs[0] == '-') {  // hoist the sign outside
        Expr nc = minus_one * c;
        std::string ns = render(nc, sp);
        if (!ns.empty() && ns[0] != '-') {
          sign = "-";
          c = std::move(nc);
          cs = std::move(ns);
        }
      }
      std::string inner;
      if (c == one) inner = dB;
      else if (c == minus_one) inner = "-" + dB;
      else inner = wrap_sum(std::move(cs)) + "*" + dB;
      return sign + "D" + sp.independent_name(t.a) + "(" + inner + ")";
    }
  }
  return {};
}

std::string entry_text(const OpEntry& terms, const ModelSpace& sp) {
  if (terms.empty()) return "0";
  std::string out;
  for (size_t i = 0; i < terms.size(); ++i) {
    std::string piece = term_text(terms[i], sp);
    if (i == 0)
      out = std::move(piece);
    else if (!piece.empty() && piece[0] == '-')
      out += " - " + piece.substr(1);
    else
      out += " + " + piece;
  }
  return out;
}

std::string matrix_text(const OpMatrix& m, const ModelSpace& sp) {
  std::string out = "[";
  for (int r = 0; r < m.rows; ++r) {
    if (r) out += ", ";
    out += "[";
    for (int c = 0; c < m.cols; ++c) {
      if (c) out += ", ";
      out += entry_text(m.entries[static_cast<size_t>(r)][static_cast<size_t>(c)], sp);
    }
    out += "]";
  }
  return out + "]";
}

}  // namespace

ModelFile parse_model(const std::string& text) {
  const std::vector<Token> toks = tokenize(text, 1);
  size_t pos = 0;

  PHSystem sys;
  ModelSpace& sp = sys.space;

  enum Rank {
    kModel = 0,
    kDim,
    kIndependent,
    kFields,
    kInputs,
    kParam,
    kHamiltonian,
    kJ,
    kR,
    kG,
    kBoundary
  };
  auto rank_of = [](const std::string& kw) -> int {
    if (kw == "model") return kModel;
    if (kw == "dim") return kDim;
    if (kw == "independent") return kIndependent;
    if (kw == "fields") return kFields;
    if (kw == "inputs") return kInputs;
    if (kw == "param") return kParam;
    if (kw == "hamiltonian") return kHamiltonian;
    if (kw == "J") return kJ;
    if (kw == "R") return kR;
    if (kw == "G") return kG;
    if (kw == "boundary") return kBoundary;
    return -1;
  };

  int declared_dim = 0;
  std::vector<std::string> indep_names;
  bool saw_interval = false;
  bool saw_ham = false;
  bool saw_j = false;
  int last_rank = -1;
  std::string last_kw;

  auto cur = [&]() -> const Token& { return toks[pos]; };
  auto eat_p = [&](char c) {
    if (!is_punct(toks[pos], c)) return false;
    ++pos;
    return true;
  };
  auto expect_p = [&](char c, const char* ctx) {
    if (!eat_p(c))
      throw ParseError(std::string("expected '") + c + "' " + ctx,
                       cur().line, cur().col);
  };
  auto expect_name = [&](const char* what) -> const Token& {
    const Token& t = toks[pos];
    if (t.kind != Kind::Name)
      throw ParseError(std::string("expected ") + what, t.line, t.col);
    ++pos;
    return t;
  };
  auto check_plain_name = [](const Token& t) {
    if (t.text.find('_') != std::string::npos)
      throw ParseError("declared names may not contain '_'", t.line, t.col);
  };
  auto parse_num = [&](const char* what) -> double {
    double sign = 1.0;
    if (eat_p('-')) sign = -1.0;
    else (void)eat_p('+');
    const Token& t = toks[pos];
    if (t.kind == Kind::Name && t.text == "inf") {
      ++pos;
      return sign * std::numeric_limits<double>::infinity();
    }
    if (t.kind != Kind::Number)
      throw ParseError(std::string("expected a number ") + what, t.line,
                       t.col);
    ++pos;
    return sign * std::strtod(t.text.c_str(), nullptr);
  };
  auto line_end = [&](int ln) {
    size_t e = pos;
    while (toks[e].kind != Kind::End && toks[e].line == ln) ++e;
    return e;
  };

  while (toks[pos].kind != Kind::End) {
    const Token kw = toks[pos];
    if (kw.kind != Kind::Name)
      throw ParseError("expected a directive", kw.line, kw.col);
    const int r = rank_of(kw.text);
    if (r < 0)
      throw ParseError("unknown directive '" + kw.text + "'", kw.line,
                       kw.col);
    if (last_rank < 0 && r != kModel)
      throw ParseError("a model file starts with the 'model' directive",
                       kw.line, kw.col);
    const bool repeatable =
        r == kIndependent || r == kParam || r == kBoundary;
    if (last_rank >= 0 && (r < last_rank || (r == last_rank && !repeatable)))
      throw ParseError("directive '" + kw.text + "' cannot appear after '" +
                           last_kw + "'",
                       kw.line, kw.col);
    if (r > kIndependent &&
        static_cast<int>(indep_names.size()) != declared_dim)
      throw ParseError(declared_dim == 0
                           ? std::string("missing 'dim' directive")
                           : "expected " + std::to_string(declared_dim) +
                                 " 'independent' lines",
                       kw.line, kw.col);
    ++pos;

    switch (r) {
      case kModel: {
        sys.name = expect_name("a model name").text;
        break;
      }
      case kDim: {
        const Token& t = toks[pos];
        if (t.kind != Kind::Number || t.text.find('.') != std::string::npos)
          throw ParseError("expected an integer dimension", t.line, t.col);
        ++pos;
        try {
          declared_dim = std::stoi(t.text);
        } catch (const std::out_of_range&) {
          throw ParseError("dimension out of range", t.line, t.col);
        }
        if (declared_dim < 1)
          throw ParseError("dimension must be at least 1", t.line, t.col);
        break;
      }
      case kIndependent: {
        if (static_cast<int>(indep_names.size()) == declared_dim)
          throw ParseError(declared_dim == 0
                               ? std::string("missing 'dim' directive")
                               : std::string("more 'independent' lines than "
                                             "the declared dimension"),
                           kw.line, kw.col);
        const Token& nt = expect_name("a coordinate name");
        if (nt.text.size() != 1 ||
            !std::isalpha(static_cast<unsigned char>(nt.text[0])))
          throw ParseError(
              "independent coordinate names must be single letters", nt.line,
              nt.col);
        for (const std::string& n : indep_names)
          if (n == nt.text)
            throw ParseError("duplicate independent coordinate: " + nt.text,
                             nt.line, nt.col);
        const Token& in_kw = expect_name("'in'");
        if (in_kw.text != "in")
          throw ParseError("expected 'in'", in_kw.line, in_kw.col);
        expect_p('[', "before the interval");
        const Token lo_tok = cur();
        const double lo = parse_num("for the interval");
        expect_p(',', "in the interval");
        const double hi = parse_num("for the interval");
        expect_p(']', "after the interval");
        if (!saw_interval) {
          if (!(lo < hi))
            throw ParseError("interval endpoints must be increasing",
                             lo_tok.line, lo_tok.col);
          sys.domain_lo = lo;
          sys.domain_hi = hi;
          saw_interval = true;
        } else if (lo != sys.domain_lo || hi != sys.domain_hi) {
          throw ParseError("independent coordinate intervals must all agree",
                           lo_tok.line, lo_tok.col);
        }
        indep_names.push_back(nt.text);
        if (static_cast<int>(indep_names.size()) == declared_dim)
          sp.set_independent(indep_names);
        break;
      }
      case kFields:
      case kInputs: {
        if (cur().kind != Kind::Name || cur().line != kw.line)
          throw ParseError("'" + kw.text + "' needs at least one name",
                           cur().line, cur().col);
        while (cur().kind == Kind::Name && cur().line == kw.line) {
          const Token& ft = toks[pos++];
          check_plain_name(ft);
          try {
            if (r == kFields) sp.add_field(ft.text);
            else sp.add_input(ft.text);
          } catch (const ShapeError& se) {
            throw ParseError(se.what(), ft.line, ft.col);
          }
        }
        break;
      }
      case kParam: {
        const Token& nt = expect_name("a parameter name");
        check_plain_name(nt);
        ParamSpec spec;
        spec.name = nt.text;
        if (eat_p('=')) spec.value = parse_num("for the parameter value");
        if (cur().kind == Kind::Name && cur().text == "range" &&
            cur().line == kw.line) {
          ++pos;
          if (eat_p('(')) spec.range.lo_open = true;
          else if (eat_p('[')) spec.range.lo_open = false;
          else
            throw ParseError("expected '(' or '[' after 'range'", cur().line,
                             cur().col);
          spec.range.lo = parse_num("for the range");
          expect_p(',', "in the range");
          spec.range.hi = parse_num("for the range");
          if (eat_p(')')) spec.range.hi_open = true;
          else if (eat_p(']')) spec.range.hi_open = false;
          else
            throw ParseError("expected ')' or ']' after the range",
                             cur().line, cur().col);
        }
        if (cur().kind == Kind::Name && cur().text == "depends" &&
            cur().line == kw.line) {
          ++pos;
          if (cur().kind != Kind::Name || cur().line != kw.line)
            throw ParseError("'depends' needs at least one coordinate",
                             cur().line, cur().col);
          while (cur().kind == Kind::Name && cur().line == kw.line) {
            const Token& dt = toks[pos];
            const Expr ex = parse_span(toks, pos, pos + 1, sp);
            const auto cs = ex.coordinates();
            if (cs.size() != 1 || !(ex == Expr::coord(*cs.begin())))
              throw ParseError("'depends' entries must be coordinates",
                               dt.line, dt.col);
            spec.deps.push_back(*cs.begin());
            ++pos;
          }
        }
        try {
          sp.add_param(std::move(spec));
        } catch (const ShapeError& se) {
          throw ParseError(se.what(), nt.line, nt.col);
        }
        break;
      }
      case kHamiltonian: {
        const size_t le = line_end(kw.line);
        if (le == pos)
          throw ParseError("'hamiltonian' needs an expression", kw.line,
                           kw.col + static_cast<int>(kw.text.size()));
        sys.hamiltonian = parse_span(toks, pos, le, sp);
        pos = le;
        saw_ham = true;
        break;
      }
      case kJ:
        sys.J = parse_matrix(toks, pos, sp, "J");
        saw_j = true;
        break;
      case kR:
        sys.R = parse_matrix(toks, pos, sp, "R");
        break;
      case kG:
        sys.G = parse_matrix(toks, pos, sp, "G");
        break;
      case kBoundary: {
        const Token& ct = expect_name("a coordinate name");
        const auto ai = sp.find_independent(ct.text);
        if (!ai)
          throw ParseError("unknown independent coordinate: " + ct.text,
                           ct.line, ct.col);
        if (*ai != 0)
          throw ParseError(
              "boundary conditions attach to the first independent "
              "coordinate",
              ct.line, ct.col);
        expect_p('=', "after the coordinate");
        const Token vt = cur();
        const double v = parse_num("for the boundary position");
        BoundaryCondition bc;
        if (v == sys.domain_lo) bc.face = 0;
        else if (v == sys.domain_hi) bc.face = 1;
        else
          throw ParseError("boundary position must be a domain endpoint",
                           vt.line, vt.col);
        expect_p(':', "before the boundary kind");
        const Token& kt = expect_name("'free' or 'rate'");
        if (kt.text == "free") {
          bc.kind = BoundaryCondition::Kind::Free;
          bc.rate = Expr::integer(0);
        } else if (kt.text == "rate") {
          bc.kind = BoundaryCondition::Kind::Rate;
          const Token& ft = expect_name("a field name");
          const auto fi = sp.find_field(ft.text);
          if (!fi || !sp.is_state(*fi))
            throw ParseError("boundary rates prescribe a state field",
                             ft.line, ft.col);
          bc.field = *fi;
          expect_p('=', "before the rate expression");
          const size_t le = line_end(kw.line);
          if (le == pos)
            throw ParseError("'rate' needs an expression", cur().line,
                             cur().col);
          ModelSpace tsp = sp;  // the rate may reference the time t
          if (!tsp.find_param("t")) tsp.add_param(ParamSpec{"t", {}, {}, {}});
          bc.rate = parse_span(toks, pos, le, tsp);
          pos = le;
        } else {
          throw ParseError("expected 'free' or 'rate'", kt.line, kt.col);
        }
        sys.bcs.push_back(std::move(bc));
        break;
      }
      default:
        throw ParseError("unknown directive '" + kw.text + "'", kw.line,
                         kw.col);
    }

    last_rank = r;
    last_kw = kw.text;
    if (toks[pos].kind != Kind::End && toks[pos].line == toks[pos - 1].line)
      throw ParseError("unexpected '" + toks[pos].text + "'", toks[pos].line,
                       toks[pos].col);
  }

  const Token& endt = toks.back();
  if (last_rank < 0) throw ParseError("empty model file", endt.line, 1);
  if (declared_dim == 0)
    throw ParseError("missing 'dim' directive", endt.line, endt.col);
  if (static_cast<int>(indep_names.size()) != declared_dim)
    throw ParseError("expected " + std::to_string(declared_dim) +
                         " 'independent' lines",
                     endt.line, endt.col);
  if (sp.state_count() == 0)
    throw ParseError("missing 'fields' directive", endt.line, endt.col);
  if (!saw_ham)
    throw ParseError("missing 'hamiltonian' directive", endt.line, endt.col);
  if (!saw_j) throw ParseError("missing 'J' directive", endt.line, endt.col);

  validate(sys);
  StructureReport structure = check_structure(sys);
  return ModelFile{std::move(sys), std::move(structure)};
}

std::string emit_model(const PHSystem& sys) {
  const ModelSpace& sp = sys.space;
  std::string out;
  out += "model " + sys.name + "\n";
  out += "dim " + std::to_string(sp.dim()) + "\n";
  for (int a = 0; a < sp.dim(); ++a)
    out += "independent " + sp.independent_name(a) + " in [" +
           num_text(sys.domain_lo) + ", " + num_text(sys.domain_hi) + "]\n";
  out += "fields";
  for (int i = 0; i < sp.field_count(); ++i)
    if (sp.is_state(i)) out += " " + sp.field_name(i);
  out += "\n";
  if (sp.input_count() > 0) {
    out += "inputs";
    for (int i : sp.input_indices()) out += " " + sp.field_name(i);
    out += "\n";
  }
  const Range full;
  for (const ParamSpec& p : sp.params()) {
    out += "param " + p.name;
    if (p.value) out += " = " + num_text(*p.value);
    if (p.range.lo != full.lo || p.range.hi != full.hi ||
        p.range.lo_open != full.lo_open || p.range.hi_open != full.hi_open) {
      out += " range ";
      out += p.range.lo_open ? '(' : '[';
      out += num_text(p.range.lo) + ", " + num_text(p.range.hi);
      out += p.range.hi_open ? ')' : ']';
    }
    bool all_indep = static_cast<int>(p.deps.size()) == sp.dim();
    for (int a = 0; all_indep && a < sp.dim(); ++a)
      all_indep = p.deps[static_cast<size_t>(a)] == Coordinate::independent(a);
    if (!all_indep) {
      out += " depends";
      for (const Coordinate& c : p.deps) out += " " + coordinate_name(c, sp);
    }
    out += "\n";
  }
  out += "hamiltonian " + render(sys.hamiltonian, sp) + "\n";
  out += "J " + matrix_text(sys.J, sp) + "\n";
  if (sys.has_R()) out += "R " + matrix_text(sys.R, sp) + "\n";
  if (sys.has_G()) out += "G " + matrix_text(sys.G, sp) + "\n";
  for (const BoundaryCondition& bc : sys.bcs) {
    out += "boundary " + sp.independent_name(0) + "=" +
           num_text(bc.face == 0 ? sys.domain_lo : sys.domain_hi) + " : ";
    if (bc.kind == BoundaryCondition::Kind::Free) {
      out += "free\n";
    } else {
      out += "rate " + sp.field_name(bc.field) + " = " +
             render(bc.rate, sp) + "\n";
    }
  }
  return out;
}

}  // namespace phw
