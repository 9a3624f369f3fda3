#include "phw/calculus.hpp"

#include <cmath>

#include "phw/errors.hpp"

namespace phw {

namespace {

/// Derivative of the outer function evaluated at arg.
Expr func_derivative(FuncKind f, const Expr& arg) {
  switch (f) {
    case FuncKind::Sin:
      return Expr::func(FuncKind::Cos, arg);
    case FuncKind::Cos:
      return -Expr::func(FuncKind::Sin, arg);
    case FuncKind::Exp:
      return Expr::func(FuncKind::Exp, arg);
    case FuncKind::Sqrt:
      return Expr::number(Rational(1, 2)) *
             Expr::pow(Expr::func(FuncKind::Sqrt, arg), -1);
  }
  return Expr();
}

/// Shared product-rule walk: rebuilds the derivative of a node given a
/// callable producing derivatives of subtrees.
template <typename Rec>
Expr derive_node(const Expr& e, Rec&& rec) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case NodeKind::Func:
      return func_derivative(n.func, n.args[0]) * rec(n.args[0]);
    case NodeKind::Pow:
      return Expr::integer(n.exponent) * Expr::pow(n.args[0], n.exponent - 1) *
             rec(n.args[0]);
    case NodeKind::Prod: {
      std::vector<Expr> terms;
      for (size_t i = 0; i < n.args.size(); ++i) {
        std::vector<Expr> fs;
        fs.push_back(Expr::number(n.number));
        for (size_t j = 0; j < n.args.size(); ++j)
          fs.push_back(i == j ? rec(n.args[j]) : n.args[j]);
        terms.push_back(Expr::mul(fs));
      }
      return Expr::add(terms);
    }
    case NodeKind::Sum: {
      std::vector<Expr> terms;
      for (const Expr& t : n.args) terms.push_back(rec(t));
      return Expr::add(terms);
    }
    default:
      return Expr();
  }
}

Expr total_impl(const Expr& e, int a, const ModelSpace& space, int bound) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case NodeKind::Number:
    case NodeKind::Constant:
      return Expr();
    case NodeKind::Coord: {
      const Coordinate& c = n.coord;
      if (c.kind == Coordinate::Kind::Independent)
        return c.index == a ? Expr::integer(1) : Expr();
      if (bound >= 0 && c.order() + 1 > bound)
        throw JetOrderError("total derivative of " +
                            coordinate_name(c, space) +
                            " exceeds the jet order bound " +
                            std::to_string(bound));
      return Expr::coord(c.promoted(a));
    }
    case NodeKind::Param: {
      const ParamSpec* spec = space.find_param(n.param.name);
      if (!spec)
        throw ShapeError("parameter not declared in model space: " +
                         n.param.name);
      std::vector<Expr> terms;
      for (const Coordinate& d : spec->deps) {
        ParamSym s = n.param;
        s.derivs.push_back(d);
        if (d.kind == Coordinate::Kind::Independent) {
          if (d.index == a) terms.push_back(Expr::param(s));
        } else {
          if (bound >= 0 && d.order() + 1 > bound)
            throw JetOrderError("total derivative through parameter " +
                                n.param.name +
                                " exceeds the jet order bound " +
                                std::to_string(bound));
          terms.push_back(Expr::param(s) * Expr::coord(d.promoted(a)));
        }
      }
      return Expr::add(terms);
    }
    default:
      return derive_node(
          e, [&](const Expr& sub) { return total_impl(sub, a, space, bound); });
  }
}

Expr substitute_rec(const Expr& e, const Substitution& s) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case NodeKind::Number:
    case NodeKind::Constant:
    case NodeKind::Param:
      return e;
    case NodeKind::Coord: {
      auto it = s.map.find(n.coord);
      return it == s.map.end() ? e : it->second;
    }
    case NodeKind::Func:
      return Expr::func(n.func, substitute_rec(n.args[0], s));
    case NodeKind::Pow:
      return Expr::pow(substitute_rec(n.args[0], s), n.exponent);
    case NodeKind::Prod: {
      std::vector<Expr> fs;
      fs.push_back(Expr::number(n.number));
      for (const Expr& f : n.args) fs.push_back(substitute_rec(f, s));
      return Expr::mul(fs);
    }
    case NodeKind::Sum: {
      std::vector<Expr> ts;
      for (const Expr& t : n.args) ts.push_back(substitute_rec(t, s));
      return Expr::add(ts);
    }
  }
  return e;
}

/// Enumerates sorted multi-indices over dimensions 0..dim-1 with length
/// 1..order.
void all_multis(int dim, int order, std::vector<int>& cur,
                std::vector<std::vector<int>>& out) {
  if (!cur.empty()) out.push_back(cur);
  if (static_cast<int>(cur.size()) == order) return;
  int start = cur.empty() ? 0 : cur.back();
  for (int a = start; a < dim; ++a) {
    cur.push_back(a);
    all_multis(dim, order, cur, out);
    cur.pop_back();
  }
}

}  // namespace

Expr partial(const Expr& e, const Coordinate& c) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case NodeKind::Number:
    case NodeKind::Constant:
    case NodeKind::Param:
      return Expr();
    case NodeKind::Coord:
      return n.coord == c ? Expr::integer(1) : Expr();
    default:
      return derive_node(e, [&](const Expr& sub) { return partial(sub, c); });
  }
}

Expr partial_dependent(const Expr& e, const Coordinate& c,
                       const ModelSpace& space) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case NodeKind::Number:
    case NodeKind::Constant:
      return Expr();
    case NodeKind::Param: {
      const ParamSpec* spec = space.find_param(n.param.name);
      if (!spec)
        throw ShapeError("parameter not declared in model space: " +
                         n.param.name);
      for (const Coordinate& d : spec->deps) {
        if (d == c) {
          ParamSym s = n.param;
          s.derivs.push_back(c);
          return Expr::param(s);
        }
      }
      return Expr();
    }
    case NodeKind::Coord:
      return n.coord == c ? Expr::integer(1) : Expr();
    default:
      return derive_node(e, [&](const Expr& sub) {
        return partial_dependent(sub, c, space);
      });
  }
}

int dependent_jet_order(const Expr& e, const ModelSpace& space) {
  int order = e.jet_order();
  for (const ParamSym& p : e.param_syms()) {
    const ParamSpec* spec = space.find_param(p.name);
    if (!spec) continue;
    for (const Coordinate& d : spec->deps)
      if (d.is_jet()) order = std::max(order, d.order());
  }
  return order;
}

Expr total_derivative(const Expr& e, int a, const ModelSpace& space) {
  return total_impl(e, a, space, space.max_jet_order());
}

Expr total_derivative_unchecked(const Expr& e, int a,
                                const ModelSpace& space) {
  return total_impl(e, a, space, -1);
}

Expr substitute(const Expr& e, const Substitution& s) {
  for (const Coordinate& c : e.coordinates()) {
    if (c.kind == Coordinate::Kind::Derivative && !s.map.count(c) &&
        s.map.count(c.base()))
      throw ShapeError(
          "substitution binds a field value but not its derivative "
          "coordinate; bind derivatives too (induce_derivatives)");
  }
  return substitute_rec(e, s);
}

Substitution induce_derivatives(const Substitution& s,
                                const ModelSpace& space, int order) {
  Substitution out = s;
  std::vector<std::vector<int>> multis;
  std::vector<int> cur;
  all_multis(space.dim(), order, cur, multis);
  for (const auto& [c, expr] : s.map) {
    if (c.kind != Coordinate::Kind::Dependent) continue;
    for (const auto& m : multis) {
      Coordinate target = Coordinate::derivative(c.index, m);
      if (out.map.count(target)) continue;
      Expr d = expr;
      for (int a : m) d = total_derivative_unchecked(d, a, space);
      out.map[target] = d;
    }
  }
  return out;
}

double eval_numeric(const Expr& e, const EvalPoint& pt) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case NodeKind::Number:
      return n.number.to_double();
    case NodeKind::Constant: {
      auto it = pt.constants.find(n.constant);
      if (it == pt.constants.end())
        throw EvalError("unbound constant: " + n.constant);
      return it->second;
    }
    case NodeKind::Param: {
      if (n.param.derivs.empty()) {
        auto it = pt.params.find(n.param.name);
        if (it == pt.params.end())
          throw EvalError("parameter has no value: " + n.param.name);
        return it->second;
      }
      auto it = pt.param_derivs.find(n.param);
      if (it != pt.param_derivs.end()) return it->second;
      // Unlisted derivative symbols belong to constant parameters.
      if (!pt.params.count(n.param.name))
        throw EvalError("parameter has no value: " + n.param.name);
      return 0.0;
    }
    case NodeKind::Coord: {
      auto it = pt.coords.find(n.coord);
      if (it == pt.coords.end()) {
        const char* kind = n.coord.kind == Coordinate::Kind::Independent
                               ? "independent"
                               : "field";
        throw EvalError("unbound " + std::string(kind) + " coordinate #" +
                        std::to_string(n.coord.index) + " (order " +
                        std::to_string(n.coord.order()) + ")");
      }
      return it->second;
    }
    case NodeKind::Func: {
      double v = eval_numeric(n.args[0], pt);
      switch (n.func) {
        case FuncKind::Sin:
          return std::sin(v);
        case FuncKind::Cos:
          return std::cos(v);
        case FuncKind::Exp:
          return std::exp(v);
        case FuncKind::Sqrt:
          if (v < 0.0) throw EvalError("square root of a negative value");
          return std::sqrt(v);
      }
      return 0.0;
    }
    case NodeKind::Pow: {
      double v = eval_numeric(n.args[0], pt);
      if (v == 0.0 && n.exponent < 0)
        throw EvalError("zero raised to a negative power");
      return std::pow(v, n.exponent);
    }
    case NodeKind::Prod: {
      double acc = n.number.to_double();
      for (const Expr& f : n.args) acc *= eval_numeric(f, pt);
      return acc;
    }
    case NodeKind::Sum: {
      double acc = 0.0;
      for (const Expr& t : n.args) acc += eval_numeric(t, pt);
      return acc;
    }
  }
  return 0.0;
}

bool is_affine_in(const Expr& e, const std::set<Coordinate>& cs) {
  for (const Coordinate& c : cs) {
    if (!e.depends_on(c)) continue;
    Expr d = partial(e, c);
    for (const Coordinate& c2 : cs)
      if (d.depends_on(c2)) return false;
  }
  return true;
}

std::string coordinate_name(const Coordinate& c, const ModelSpace& space) {
  switch (c.kind) {
    case Coordinate::Kind::Independent:
      return space.independent_name(c.index);
    case Coordinate::Kind::Dependent:
      return space.field_name(c.index);
    case Coordinate::Kind::Derivative: {
      std::string out = space.field_name(c.index) + "_";
      for (int a : c.multi) out += space.independent_name(a);
      return out;
    }
  }
  return "?";
}

}  // namespace phw
