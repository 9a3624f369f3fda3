#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "phw/coordinate.hpp"
#include "phw/rational.hpp"

namespace phw {

enum class NodeKind : std::uint8_t {
  Number,    // exact rational constant
  Constant,  // opaque irrational constant ("pi")
  Param,     // named parameter symbol, possibly a formal partial derivative
  Coord,     // jet-bundle coordinate
  Func,      // unary function
  Pow,       // integer power of an atom or of a sum
  Prod,      // rational coefficient times distinct powered factors
  Sum        // merged, ordered terms
};

enum class FuncKind : std::uint8_t { Sin, Cos, Exp, Sqrt };

/// A parameter occurrence: the base symbol plus the coordinates it has
/// been formally differentiated by (kept sorted, repetition allowed).
/// P with derivs = {X} is the derivative symbol P'.
struct ParamSym {
  std::string name;
  std::vector<Coordinate> derivs;

  int compare(const ParamSym& o) const {
    if (int c = name.compare(o.name)) return c < 0 ? -1 : 1;
    if (derivs.size() != o.derivs.size())
      return derivs.size() < o.derivs.size() ? -1 : 1;
    for (size_t i = 0; i < derivs.size(); ++i)
      if (int c = derivs[i].compare(o.derivs[i])) return c;
    return 0;
  }
  friend bool operator==(const ParamSym& a, const ParamSym& b) {
    return a.compare(b) == 0;
  }
  friend bool operator<(const ParamSym& a, const ParamSym& b) {
    return a.compare(b) < 0;
  }
};

class Expr;
struct ExprNode;

/// Immutable symbolic expression, always held in canonical form.
///
/// Canonical invariants (maintained by the smart constructors, so any
/// Expr you can get your hands on satisfies them):
///  - Sum: >= 2 args, none a Sum, at most one a Number, args sorted,
///    no two args with the same monomial part.
///  - Prod: nonzero rational coefficient and >= 1 sorted factors with
///    pairwise distinct bases; factors are atoms or Pows; never a
///    Number, Prod, or Sum (products of sums are expanded).
///  - Pow: exponent not in {0, 1}; base is an atom, or a Sum with a
///    negative exponent (positive powers of sums are expanded); sums
///    used as bases carry no common rational content.
///
/// Structural equality of canonical forms is the library's definition
/// of symbolic equality.  Nodes are shared and never mutated, so
/// expressions can be used freely across threads.
class Expr {
 public:
  /// Zero.
  Expr();

  static Expr number(const Rational& r);
  static Expr integer(long long v) { return number(Rational(v)); }
  static Expr constant(const std::string& name);
  static Expr pi() { return constant("pi"); }
  static Expr coord(const Coordinate& c);
  static Expr param(ParamSym p);
  static Expr param(const std::string& name) { return param(ParamSym{name, {}}); }
  static Expr func(FuncKind f, const Expr& arg);

  static Expr add(std::span<const Expr> args);
  static Expr add(const Expr& a, const Expr& b);
  static Expr sub(const Expr& a, const Expr& b);
  static Expr neg(const Expr& a);
  static Expr mul(std::span<const Expr> args);
  static Expr mul(const Expr& a, const Expr& b);
  static Expr mul(const Expr& a, const Expr& b, const Expr& c);
  static Expr div(const Expr& a, const Expr& b);
  static Expr pow(const Expr& base, int exponent);

  const ExprNode& node() const { return *node_; }
  NodeKind kind() const;

  bool is_zero() const;
  bool is_one() const;
  bool is_number() const { return kind() == NodeKind::Number; }
  /// The rational value; valid only for Number nodes.
  const Rational& number_value() const;

  /// Total order over canonical forms (used for factor/term sorting).
  int compare(const Expr& o) const;
  friend bool operator==(const Expr& a, const Expr& b) { return a.compare(b) == 0; }
  friend bool operator!=(const Expr& a, const Expr& b) { return a.compare(b) != 0; }
  friend bool operator<(const Expr& a, const Expr& b) { return a.compare(b) < 0; }

  /// Rebuilds the tree bottom-up through the smart constructors.  The
  /// result equals the input for every well-formed expression; exposed
  /// so idempotence is testable and foreign trees can be normalized.
  Expr canonicalized() const;

  /// All coordinates appearing in the tree.
  std::set<Coordinate> coordinates() const;
  /// All parameter symbols appearing in the tree.
  std::set<ParamSym> param_syms() const;
  /// Highest derivative order among field coordinates (0 if none).
  int jet_order() const;
  bool depends_on(const Coordinate& c) const;
  /// True if no field value or derivative coordinate appears.
  bool is_jet_free() const;

 private:
  explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}

  std::shared_ptr<const ExprNode> node_;

  friend struct ExprBuilder;
};

/// One node of the canonical tree.  Which members are meaningful depends
/// on `kind`; see the class comment on Expr for the invariants.
struct ExprNode {
  NodeKind kind = NodeKind::Number;
  Rational number;       // Number: value.  Prod: leading coefficient.
  std::string constant;  // Constant
  ParamSym param;        // Param
  Coordinate coord;      // Coord
  FuncKind func = FuncKind::Sin;  // Func
  int exponent = 0;      // Pow
  std::vector<Expr> args;  // Func: 1 arg; Pow: base; Prod: factors; Sum: terms
};

inline Expr operator+(const Expr& a, const Expr& b) { return Expr::add(a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return Expr::sub(a, b); }
inline Expr operator-(const Expr& a) { return Expr::neg(a); }
inline Expr operator*(const Expr& a, const Expr& b) { return Expr::mul(a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return Expr::div(a, b); }

}  // namespace phw
