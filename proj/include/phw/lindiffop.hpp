#pragma once

#include <map>
#include <vector>

#include "phw/expression.hpp"
#include "phw/space.hpp"

namespace phw {

/// One structural summand of a matrix-operator entry, the shapes the
/// model format can express:
///   K0:          coeff * (.)
///   FirstOrder:  coeff * d_a(.)
///   SecondOrder: d_a(coeff * d_b(.))
/// Minus signs live in coeff (d is linear, so -d_a(r d_b(.)) is
/// represented with coeff = -r).
struct OpTerm {
  enum class Form : std::uint8_t { K0, FirstOrder, SecondOrder };
  Form form = Form::K0;
  Expr coeff;
  int a = 0;
  int b = 0;

  static OpTerm k0(Expr c) { return OpTerm{Form::K0, std::move(c), 0, 0}; }
  static OpTerm d1(Expr c, int a) {
    return OpTerm{Form::FirstOrder, std::move(c), a, 0};
  }
  static OpTerm d2(Expr c, int a, int b) {
    return OpTerm{Form::SecondOrder, std::move(c), a, b};
  }
};

/// One matrix entry: a sum of structural terms.
using OpEntry = std::vector<OpTerm>;

/// A square-or-rectangular matrix of structural operator entries, the
/// declared form of an interconnection, dissipation, or input matrix.
/// This is what models store, what prints back out, and what the
/// discretization mirrors; checks compile it to a LinDiffOp first.
struct OpMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::vector<OpEntry>> entries;

  OpMatrix() = default;
  OpMatrix(int r, int c)
      : rows(r), cols(c), entries(r, std::vector<OpEntry>(c)) {}

  /// Order-zero matrix from expression entries.
  static OpMatrix k0(const std::vector<std::vector<Expr>>& m);

  OpEntry& at(int r, int c) { return entries.at(r).at(c); }
  const OpEntry& at(int r, int c) const { return entries.at(r).at(c); }

  /// True when every entry is a K0 term (or empty).
  bool is_k0() const;
  /// Highest derivative order any entry applies (0 for k0 matrices).
  int order() const;
};

/// Key of one expanded monomial term: output row, input column, and
/// the sorted derivative multi-index applied to the input.
struct OpKey {
  int out = 0;
  int in = 0;
  std::vector<int> multi;

  friend bool operator<(const OpKey& x, const OpKey& y) {
    if (x.out != y.out) return x.out < y.out;
    if (x.in != y.in) return x.in < y.in;
    if (x.multi.size() != y.multi.size())
      return x.multi.size() < y.multi.size();
    return x.multi < y.multi;
  }
  friend bool operator==(const OpKey& x, const OpKey& y) {
    return x.out == y.out && x.in == y.in && x.multi == y.multi;
  }
};

/// A linear matrix differential operator in expanded form:
///   (D w)^out = sum over terms  coeff * d_multi(w_in).
/// Coefficients are expressions over the model space; zero coefficients
/// are never stored, so structural equality of term maps is equality of
/// operators in this representation.
class LinDiffOp {
 public:
  LinDiffOp(int rows, int cols) : rows_(rows), cols_(cols) {}

  /// Expands an OpMatrix: second-order terms d_a(c d_b(.)) become
  /// c d_ab(.) + (d_a c) d_b(.).
  static LinDiffOp compile(const OpMatrix& m, const ModelSpace& space);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  void add_term(int out, int in, std::vector<int> multi, const Expr& coeff);
  const std::map<OpKey, Expr>& terms() const { return terms_; }

  /// Applies the operator to a component tuple (cols() expressions).
  std::vector<Expr> apply(const std::vector<Expr>& comp,
                          const ModelSpace& space) const;

  /// Highest |multi| among stored terms.
  int order() const;
  bool is_zero() const { return terms_.empty(); }
  LinDiffOp negated() const;

  friend bool operator==(const LinDiffOp& x, const LinDiffOp& y) {
    return x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.terms_ == y.terms_;
  }
  friend bool operator!=(const LinDiffOp& x, const LinDiffOp& y) {
    return !(x == y);
  }

 private:
  int rows_;
  int cols_;
  std::map<OpKey, Expr> terms_;
};

/// Formal adjoint D* together with the boundary remainder that makes
/// the pairing identity exact:
///   sum_a pi_a (D w)^a  =  sum_b (D* pi)^b w_b  +  sum_A d_A(remainder^A)
/// as expressions over `ext`, which extends the model space with two
/// generic auxiliary field tuples standing for w and pi.
struct AdjointResult {
  LinDiffOp star;
  std::vector<Expr> remainder;  // one component per independent direction
  ModelSpace ext;
  std::vector<int> omega_fields;  // aux indices standing for the input w
  std::vector<int> pi_fields;     // aux indices standing for the pairing pi
};

AdjointResult adjoint_with_remainder(const LinDiffOp& op,
                                     const ModelSpace& space);

/// Just D* (over the original space's symbols).
LinDiffOp adjoint(const LinDiffOp& op, const ModelSpace& space);

/// The pairing identity's residual
///   pi . D(w) - D*(pi) . w - sum_A d_A(remainder^A)
/// over adj.ext; identically zero iff (star, remainder) is the adjoint
/// pair of `op`.  Exposed so a deliberately corrupted candidate can be
/// shown to fail.
Expr adjoint_identity_residual(const LinDiffOp& op, const AdjointResult& adj);

}  // namespace phw
