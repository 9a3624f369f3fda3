#pragma once

#include <map>
#include <numbers>
#include <set>
#include <string>

#include "phw/expression.hpp"
#include "phw/space.hpp"

namespace phw {

/// Partial derivative with respect to one coordinate slot.  Parameter
/// symbols are opaque here: their coordinate dependence enters only
/// through total derivatives.
Expr partial(const Expr& e, const Coordinate& c);

/// Partial derivative where parameter symbols do differentiate through
/// their declared dependencies: for P depending on c this contributes a
/// formal D[P,c] symbol.  This is the derivative the variational
/// operators need, since a parameter like a stored-energy function is a
/// genuine function of the coordinates it declares.
Expr partial_dependent(const Expr& e, const Coordinate& c,
                       const ModelSpace& space);

/// Jet order of e counting parameter dependencies: a parameter whose
/// declared dependencies include jet coordinates makes the expression
/// depend on those jets even though they do not appear as Coord nodes.
int dependent_jet_order(const Expr& e, const ModelSpace& space);

/// Total derivative along independent direction `a`.  Jet coordinates
/// are promoted one order; parameter symbols pick up formal derivative
/// symbols via the chain rule through their declared dependencies.
/// Throws JetOrderError when a promotion would exceed the space's jet
/// order bound (the _unchecked variant never does).
Expr total_derivative(const Expr& e, int a, const ModelSpace& space);
Expr total_derivative_unchecked(const Expr& e, int a, const ModelSpace& space);

/// Coordinate-for-expression substitution.
struct Substitution {
  std::map<Coordinate, Expr> map;
};

/// Replaces bound coordinates and rebuilds canonically.  Refuses to
/// substitute when a derivative coordinate is unbound while its base
/// field is bound: that substitution would be inconsistent with the jet
/// structure.  Bind the derivatives too (see induce_derivatives).
Expr substitute(const Expr& e, const Substitution& s);

/// Extends field-value bindings to every derivative coordinate of the
/// bound fields up to `order`, by totally differentiating the bound
/// expressions.  Bindings already present are kept as given.
Substitution induce_derivatives(const Substitution& s, const ModelSpace& space,
                                int order);

/// Point for numeric evaluation.  Base parameter symbols must be given
/// a value; formal parameter-derivative symbols default to zero unless
/// listed (constant parameters need nothing extra).  "pi" is prebound.
struct EvalPoint {
  std::map<Coordinate, double> coords;
  std::map<std::string, double> params;
  std::map<ParamSym, double> param_derivs;
  std::map<std::string, double> constants = {{"pi", std::numbers::pi}};
};

double eval_numeric(const Expr& e, const EvalPoint& pt);

/// True when e has joint polynomial degree at most one in the given
/// coordinates (every first partial is free of all of them).
bool is_affine_in(const Expr& e, const std::set<Coordinate>& cs);

/// Human-readable coordinate name within a model space ("X", "w",
/// "w_XX", ...), matching the input grammar.
std::string coordinate_name(const Coordinate& c, const ModelSpace& space);

}  // namespace phw
