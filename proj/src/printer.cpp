#include "phw/printer.hpp"

#include "phw/calculus.hpp"

namespace phw {

namespace {

// Binding strength of a rendered form: what it looks like from outside.
constexpr int kSum = 0;   // contains top-level + or -, or leads with -
constexpr int kProd = 1;  // contains top-level * or /
constexpr int kAtom = 2;  // self-delimiting

class Renderer {
 public:
  explicit Renderer(const ModelSpace& space) : sp_(space) {}

  std::string top(const Expr& e) { return rec(e, kSum); }

 private:
  const ModelSpace& sp_;

  static bool negative_term(const Expr& e) {
    if (e.kind() == NodeKind::Number) return e.node().number.is_negative();
    if (e.kind() == NodeKind::Prod) return e.node().number.is_negative();
    return false;
  }

  std::string rec(const Expr& e, int minprec) {
    auto [s, prec] = render_node(e);
    if (prec < minprec) return "(" + s + ")";
    return s;
  }

  std::pair<std::string, int> render_node(const Expr& e) {
    const ExprNode& n = e.node();
    switch (n.kind) {
      case NodeKind::Number: {
        std::string s = n.number.str();
        int prec = n.number.is_negative() ? kSum
                   : n.number.is_integer() ? kAtom
                                           : kProd;
        return {s, prec};
      }
      case NodeKind::Constant:
        return {n.constant, kAtom};
      case NodeKind::Coord:
        return {coordinate_name(n.coord, sp_), kAtom};
      case NodeKind::Param:
        return {param_name(n.param), kAtom};
      case NodeKind::Func: {
        const char* f = n.func == FuncKind::Sin   ? "sin"
                        : n.func == FuncKind::Cos ? "cos"
                        : n.func == FuncKind::Exp ? "exp"
                                                  : "sqrt";
        return {std::string(f) + "(" + rec(n.args[0], kSum) + ")", kAtom};
      }
      case NodeKind::Pow: {
        if (n.exponent > 0)
          return {pow_piece(n.args[0], n.exponent), kAtom};
        // Sums keep an explicit negative exponent: "1/(a + b)^2" would
        // re-parse through (a + b)^2, which expands, while (a + b)^-2
        // reproduces this node exactly.
        if (n.args[0].kind() == NodeKind::Sum)
          return {rec(n.args[0], kAtom) + "^" + std::to_string(n.exponent),
                  kAtom};
        return {"1/" + pow_piece(n.args[0], -n.exponent), kProd};
      }
      case NodeKind::Prod:
        return product(n.number, n.args);
      case NodeKind::Sum: {
        std::string out;
        bool first = true;
        for (const Expr& t : n.args) {
          if (first) {
            out = negative_term(t) ? "-" + rec(-t, kProd) : rec(t, kProd);
            first = false;
          } else if (negative_term(t)) {
            out += " - " + rec(-t, kProd);
          } else {
            out += " + " + rec(t, kProd);
          }
        }
        return {out, kSum};
      }
    }
    return {"?", kAtom};
  }

  /// base^k for k > 0, parenthesizing composite bases.
  std::string pow_piece(const Expr& base, int k) {
    std::string s = rec(base, kAtom);
    if (k == 1) return s;
    return s + "^" + std::to_string(k);
  }

  std::pair<std::string, int> product(const Rational& coeff,
                                      const std::vector<Expr>& factors) {
    bool neg = coeff.is_negative();
    Rational c = neg ? -coeff : coeff;
    std::vector<std::string> num, den;
    if (c.num() != 1) num.push_back(std::to_string(c.num()));
    if (c.den() != 1) den.push_back(std::to_string(c.den()));
    for (const Expr& f : factors) {
      if (f.kind() == NodeKind::Pow && f.node().exponent < 0) {
        // A sum-based reciprocal inside a "/(...)"  group would re-parse
        // as one expanded denominator; keep it as a ^-k factor instead.
        if (f.node().args[0].kind() == NodeKind::Sum)
          num.push_back(rec(f.node().args[0], kAtom) + "^" +
                        std::to_string(f.node().exponent));
        else
          den.push_back(pow_piece(f.node().args[0], -f.node().exponent));
      } else {
        num.push_back(rec(f, kAtom));
      }
    }
    if (num.empty()) num.push_back("1");

    std::string out = num[0];
    for (size_t i = 1; i < num.size(); ++i) out += "*" + num[i];
    if (!den.empty()) {
      if (den.size() == 1)
        out += "/" + den[0];
      else {
        out += "/(" + den[0];
        for (size_t i = 1; i < den.size(); ++i) out += "*" + den[i];
        out += ")";
      }
    }
    int prec = (num.size() + den.size() > 1) ? kProd : kAtom;
    if (neg) return {"-" + out, kSum};
    return {out, prec};
  }

  std::string param_name(const ParamSym& p) {
    if (p.derivs.empty()) return p.name;
    bool all_indep = true;
    for (const Coordinate& d : p.derivs)
      if (d.kind != Coordinate::Kind::Independent) all_indep = false;
    if (all_indep && sp_.dim() == 1)
      return p.name + std::string(p.derivs.size(), '\'');
    std::string out = "D[" + p.name;
    for (const Coordinate& d : p.derivs) out += "," + coordinate_name(d, sp_);
    return out + "]";
  }
};

}  // namespace

std::string render(const Expr& e, const ModelSpace& space) {
  return Renderer(space).top(e);
}

}  // namespace phw
