#include "phw/expression.hpp"

#include <algorithm>
#include <map>

#include "phw/errors.hpp"

namespace phw {

struct ExprBuilder {
  static Expr make(std::shared_ptr<const ExprNode> n) { return Expr(std::move(n)); }
};

namespace {

int rank(NodeKind k) { return static_cast<int>(k); }

Expr make(ExprNode n) {
  return ExprBuilder::make(std::make_shared<const ExprNode>(std::move(n)));
}

Expr make_number(const Rational& r) {
  ExprNode n;
  n.kind = NodeKind::Number;
  n.number = r;
  return make(std::move(n));
}

const Expr& zero_expr() {
  static const Expr z = make_number(Rational(0));
  return z;
}
const Expr& one_expr() {
  static const Expr o = make_number(Rational(1));
  return o;
}

bool is_atom(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Constant:
    case NodeKind::Param:
    case NodeKind::Coord:
    case NodeKind::Func:
      return true;
    default:
      return false;
  }
}

/// Splits a canonical non-Sum term into rational coefficient and
/// monomial part, the key used for like-term merging.  Numbers split
/// as value times the monomial 1.
std::pair<Rational, Expr> split_term(const Expr& e) {
  if (e.kind() == NodeKind::Number) return {e.node().number, one_expr()};
  if (e.kind() == NodeKind::Prod) {
    const ExprNode& n = e.node();
    if (n.args.size() == 1) return {n.number, n.args[0]};
    ExprNode key;
    key.kind = NodeKind::Prod;
    key.number = Rational(1);
    key.args = n.args;
    return {n.number, make(std::move(key))};
  }
  return {Rational(1), e};
}

/// Rebuilds coefficient * monomial from the pieces split_term produces.
Expr scale_term(const Expr& key, const Rational& c) {
  if (c.is_zero()) return zero_expr();
  if (key.is_one()) return make_number(c);
  if (c.is_one()) return key;
  ExprNode n;
  n.kind = NodeKind::Prod;
  n.number = c;
  if (key.kind() == NodeKind::Prod)
    n.args = key.node().args;
  else
    n.args = {key};
  return make(std::move(n));
}

/// Splits a canonical factor into (base, exponent).
std::pair<Expr, int> split_factor(const Expr& e) {
  if (e.kind() == NodeKind::Pow) return {e.node().args[0], e.node().exponent};
  return {e, 1};
}

}  // namespace

Expr::Expr() : node_(zero_expr().node_) {}

NodeKind Expr::kind() const { return node_->kind; }

bool Expr::is_zero() const {
  return kind() == NodeKind::Number && node_->number.is_zero();
}
bool Expr::is_one() const {
  return kind() == NodeKind::Number && node_->number.is_one();
}
const Rational& Expr::number_value() const {
  if (kind() != NodeKind::Number) throw Error("expression is not a number");
  return node_->number;
}

Expr Expr::number(const Rational& r) { return make_number(r); }

Expr Expr::constant(const std::string& name) {
  ExprNode n;
  n.kind = NodeKind::Constant;
  n.constant = name;
  return make(std::move(n));
}

Expr Expr::coord(const Coordinate& c) {
  ExprNode n;
  n.kind = NodeKind::Coord;
  n.coord = c;
  return make(std::move(n));
}

Expr Expr::param(ParamSym p) {
  std::sort(p.derivs.begin(), p.derivs.end());
  ExprNode n;
  n.kind = NodeKind::Param;
  n.param = std::move(p);
  return make(std::move(n));
}

Expr Expr::func(FuncKind f, const Expr& arg) {
  // Fold the handful of exact values; anything else stays structural.
  if (arg.is_zero()) {
    switch (f) {
      case FuncKind::Sin:
        return zero_expr();
      case FuncKind::Cos:
      case FuncKind::Exp:
        return one_expr();
      case FuncKind::Sqrt:
        return zero_expr();
    }
  }
  if (arg.is_one() && f == FuncKind::Sqrt) return one_expr();
  ExprNode n;
  n.kind = NodeKind::Func;
  n.func = f;
  n.args = {arg};
  return make(std::move(n));
}

int Expr::compare(const Expr& o) const {
  if (node_ == o.node_) return 0;
  const ExprNode& a = *node_;
  const ExprNode& b = *o.node_;
  if (a.kind != b.kind) return rank(a.kind) < rank(b.kind) ? -1 : 1;
  switch (a.kind) {
    case NodeKind::Number:
      return a.number.compare(b.number);
    case NodeKind::Constant:
      return a.constant.compare(b.constant) < 0   ? -1
             : a.constant.compare(b.constant) > 0 ? 1
                                                  : 0;
    case NodeKind::Param:
      return a.param.compare(b.param);
    case NodeKind::Coord:
      return a.coord.compare(b.coord);
    case NodeKind::Func: {
      if (a.func != b.func) return a.func < b.func ? -1 : 1;
      return a.args[0].compare(b.args[0]);
    }
    case NodeKind::Pow: {
      if (int c = a.args[0].compare(b.args[0])) return c;
      return a.exponent < b.exponent ? -1 : a.exponent > b.exponent ? 1 : 0;
    }
    case NodeKind::Prod: {
      size_t m = std::min(a.args.size(), b.args.size());
      for (size_t i = 0; i < m; ++i)
        if (int c = a.args[i].compare(b.args[i])) return c;
      if (a.args.size() != b.args.size())
        return a.args.size() < b.args.size() ? -1 : 1;
      return a.number.compare(b.number);
    }
    case NodeKind::Sum: {
      size_t m = std::min(a.args.size(), b.args.size());
      for (size_t i = 0; i < m; ++i)
        if (int c = a.args[i].compare(b.args[i])) return c;
      if (a.args.size() != b.args.size())
        return a.args.size() < b.args.size() ? -1 : 1;
      return 0;
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Addition: flatten, merge like terms by monomial key, rebuild ordered.

Expr Expr::add(std::span<const Expr> args) {
  Rational cst(0);
  std::map<Expr, Rational> terms;

  auto visit = [&](const Expr& e, auto&& self) -> void {
    switch (e.kind()) {
      case NodeKind::Number:
        cst += e.node().number;
        return;
      case NodeKind::Sum:
        for (const Expr& t : e.node().args) self(t, self);
        return;
      default: {
        auto [c, key] = split_term(e);
        terms[key] += c;
        return;
      }
    }
  };
  for (const Expr& a : args) visit(a, visit);

  std::vector<Expr> out;
  out.reserve(terms.size() + 1);
  if (!cst.is_zero()) out.push_back(make_number(cst));
  for (const auto& [key, c] : terms)
    if (!c.is_zero()) out.push_back(scale_term(key, c));

  if (out.empty()) return zero_expr();
  if (out.size() == 1) return out[0];
  std::sort(out.begin(), out.end());
  ExprNode n;
  n.kind = NodeKind::Sum;
  n.args = std::move(out);
  return make(std::move(n));
}

Expr Expr::add(const Expr& a, const Expr& b) {
  const Expr two[] = {a, b};
  return add(two);
}
Expr Expr::neg(const Expr& a) { return mul(make_number(Rational(-1)), a); }
Expr Expr::sub(const Expr& a, const Expr& b) { return add(a, neg(b)); }

// ---------------------------------------------------------------------------
// Multiplication: flatten, distribute over sums, merge powers of equal
// bases, rebuild ordered.

namespace {

/// Builds the canonical product of a coefficient and (base, exponent)
/// pairs.  Power simplification may hand back composite pieces (e.g.
/// sqrt collapses); those are routed through Expr::mul again.
Expr rebuild_product(Rational coeff, std::vector<std::pair<Expr, int>> bases) {
  std::sort(bases.begin(), bases.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  // Merge equal bases by adding exponents.
  std::vector<std::pair<Expr, int>> merged;
  for (auto& be : bases) {
    if (!merged.empty() && merged.back().first == be.first)
      merged.back().second += be.second;
    else
      merged.push_back(std::move(be));
  }

  std::vector<Expr> factors;
  std::vector<Expr> reprocess;
  for (const auto& [base, e] : merged) {
    if (e == 0) continue;
    Expr f = Expr::pow(base, e);
    if (f.is_zero()) return Expr();
    if (f.kind() == NodeKind::Number)
      coeff *= f.node().number;
    else if (is_atom(f) || f.kind() == NodeKind::Pow)
      factors.push_back(f);
    else
      reprocess.push_back(f);
  }
  if (!reprocess.empty()) {
    reprocess.push_back(make_number(coeff));
    for (Expr& f : factors) reprocess.push_back(std::move(f));
    return Expr::mul(reprocess);
  }
  if (coeff.is_zero() || factors.empty()) return make_number(coeff);
  if (coeff.is_one() && factors.size() == 1) return factors[0];
  std::sort(factors.begin(), factors.end(), [](const Expr& x, const Expr& y) {
    return split_factor(x).first < split_factor(y).first;
  });
  // Power simplification can change a factor's base (sqrt(x)^2 -> x);
  // if that introduced a base collision, merge through mul again.
  for (size_t i = 0; i + 1 < factors.size(); ++i) {
    if (split_factor(factors[i]).first == split_factor(factors[i + 1]).first) {
      factors.push_back(make_number(coeff));
      return Expr::mul(factors);
    }
  }
  ExprNode n;
  n.kind = NodeKind::Prod;
  n.number = coeff;
  n.args = std::move(factors);
  return make(std::move(n));
}

}  // namespace

Expr Expr::mul(std::span<const Expr> args) {
  Rational coeff(1);
  std::vector<std::pair<Expr, int>> bases;
  std::vector<Expr> sums;

  for (const Expr& a : args) {
    switch (a.kind()) {
      case NodeKind::Number:
        coeff *= a.node().number;
        if (coeff.is_zero()) return zero_expr();
        break;
      case NodeKind::Prod:
        coeff *= a.node().number;
        for (const Expr& f : a.node().args) bases.push_back(split_factor(f));
        break;
      case NodeKind::Pow:
        bases.push_back(split_factor(a));
        break;
      case NodeKind::Sum:
        sums.push_back(a);
        break;
      default:
        bases.push_back({a, 1});
        break;
    }
  }

  if (!sums.empty()) {
    // Distribute the sum factors over the (sum-free) core product.
    std::vector<Expr> terms = {rebuild_product(coeff, std::move(bases))};
    for (const Expr& s : sums) {
      std::vector<Expr> next;
      next.reserve(terms.size() * s.node().args.size());
      for (const Expr& t : terms)
        for (const Expr& st : s.node().args) next.push_back(mul(t, st));
      terms = std::move(next);
    }
    return add(terms);
  }
  return rebuild_product(coeff, std::move(bases));
}

Expr Expr::mul(const Expr& a, const Expr& b) {
  const Expr two[] = {a, b};
  return mul(two);
}
Expr Expr::mul(const Expr& a, const Expr& b, const Expr& c) {
  const Expr three[] = {a, b, c};
  return mul(three);
}
Expr Expr::div(const Expr& a, const Expr& b) { return mul(a, pow(b, -1)); }

// ---------------------------------------------------------------------------
// Integer powers.

Expr Expr::pow(const Expr& base, int exponent) {
  if (exponent == 0) return one_expr();
  if (exponent == 1) return base;
  switch (base.kind()) {
    case NodeKind::Number: {
      if (base.is_zero() && exponent < 0)
        throw Error("zero raised to a negative power");
      return make_number(base.node().number.pow(exponent));
    }
    case NodeKind::Pow:
      return pow(base.node().args[0], base.node().exponent * exponent);
    case NodeKind::Prod: {
      std::vector<Expr> parts;
      parts.push_back(make_number(base.node().number.pow(exponent)));
      for (const Expr& f : base.node().args) parts.push_back(pow(f, exponent));
      return mul(parts);
    }
    case NodeKind::Sum: {
      if (exponent > 0) {
        Expr acc = base;
        for (int i = 1; i < exponent; ++i) acc = mul(acc, base);
        return acc;
      }
      // Negative power of a sum stays a Pow node, after pulling out the
      // common rational content so equal sums share one spelling.
      Rational content(0);
      for (const Expr& t : base.node().args)
        content = Rational::gcd(content, split_term(t).first);
      if (split_term(base.node().args[0]).first.is_negative())
        content = -content;
      Expr core = base;
      if (!content.is_one()) {
        std::vector<Expr> scaled;
        for (const Expr& t : base.node().args) {
          auto [c, key] = split_term(t);
          scaled.push_back(scale_term(key, c / content));
        }
        core = add(scaled);
      }
      ExprNode n;
      n.kind = NodeKind::Pow;
      n.exponent = exponent;
      n.args = {core};
      Expr p = make(std::move(n));
      if (content.is_one()) return p;
      return mul(make_number(content.pow(exponent)), p);
    }
    case NodeKind::Func: {
      if (base.node().func == FuncKind::Sqrt) {
        // sqrt(x)^e = x^q * sqrt(x)^r with e = 2q + r, r in {0,1}.
        int r = ((exponent % 2) + 2) % 2;
        int q = (exponent - r) / 2;
        Expr whole = pow(base.node().args[0], q);
        return r == 0 ? whole : mul(whole, base);
      }
      break;
    }
    default:
      break;
  }
  ExprNode n;
  n.kind = NodeKind::Pow;
  n.exponent = exponent;
  n.args = {base};
  return make(std::move(n));
}

// ---------------------------------------------------------------------------

Expr Expr::canonicalized() const {
  const ExprNode& n = node();
  switch (n.kind) {
    case NodeKind::Number:
    case NodeKind::Constant:
    case NodeKind::Param:
    case NodeKind::Coord:
      return *this;
    case NodeKind::Func:
      return func(n.func, n.args[0].canonicalized());
    case NodeKind::Pow:
      return pow(n.args[0].canonicalized(), n.exponent);
    case NodeKind::Prod: {
      std::vector<Expr> parts;
      parts.push_back(make_number(n.number));
      for (const Expr& f : n.args) parts.push_back(f.canonicalized());
      return mul(parts);
    }
    case NodeKind::Sum: {
      std::vector<Expr> parts;
      for (const Expr& t : n.args) parts.push_back(t.canonicalized());
      return add(parts);
    }
  }
  return *this;
}

namespace {

template <typename F>
void walk(const Expr& e, F&& visit) {
  visit(e);
  for (const Expr& a : e.node().args) walk(a, visit);
}

}  // namespace

std::set<Coordinate> Expr::coordinates() const {
  std::set<Coordinate> out;
  walk(*this, [&](const Expr& e) {
    if (e.kind() == NodeKind::Coord) out.insert(e.node().coord);
  });
  return out;
}

std::set<ParamSym> Expr::param_syms() const {
  std::set<ParamSym> out;
  walk(*this, [&](const Expr& e) {
    if (e.kind() == NodeKind::Param) out.insert(e.node().param);
  });
  return out;
}

int Expr::jet_order() const {
  int order = 0;
  walk(*this, [&](const Expr& e) {
    if (e.kind() == NodeKind::Coord && e.node().coord.is_jet())
      order = std::max(order, e.node().coord.order());
  });
  return order;
}

bool Expr::depends_on(const Coordinate& c) const {
  bool found = false;
  walk(*this, [&](const Expr& e) {
    if (e.kind() == NodeKind::Coord && e.node().coord == c) found = true;
  });
  return found;
}

bool Expr::is_jet_free() const {
  bool jet = false;
  walk(*this, [&](const Expr& e) {
    if (e.kind() == NodeKind::Coord && e.node().coord.is_jet()) jet = true;
  });
  return !jet;
}

}  // namespace phw
