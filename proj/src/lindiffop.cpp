#include "phw/lindiffop.hpp"

#include <algorithm>

#include "phw/calculus.hpp"
#include "phw/errors.hpp"

namespace phw {

OpMatrix OpMatrix::k0(const std::vector<std::vector<Expr>>& m) {
  OpMatrix out(static_cast<int>(m.size()),
               m.empty() ? 0 : static_cast<int>(m[0].size()));
  for (int r = 0; r < out.rows; ++r) {
    if (static_cast<int>(m[r].size()) != out.cols)
      throw ShapeError("ragged matrix");
    for (int c = 0; c < out.cols; ++c)
      if (!m[r][c].is_zero()) out.entries[r][c].push_back(OpTerm::k0(m[r][c]));
  }
  return out;
}

bool OpMatrix::is_k0() const {
  for (const auto& row : entries)
    for (const OpEntry& e : row)
      for (const OpTerm& t : e)
        if (t.form != OpTerm::Form::K0) return false;
  return true;
}

int OpMatrix::order() const {
  int o = 0;
  for (const auto& row : entries)
    for (const OpEntry& e : row)
      for (const OpTerm& t : e) {
        if (t.form == OpTerm::Form::FirstOrder) o = std::max(o, 1);
        if (t.form == OpTerm::Form::SecondOrder) o = std::max(o, 2);
      }
  return o;
}

void LinDiffOp::add_term(int out, int in, std::vector<int> multi,
                         const Expr& coeff) {
  if (out < 0 || out >= rows_ || in < 0 || in >= cols_)
    throw ShapeError("operator term outside the matrix shape");
  std::sort(multi.begin(), multi.end());
  OpKey key{out, in, std::move(multi)};
  auto it = terms_.find(key);
  Expr sum = it == terms_.end() ? coeff : it->second + coeff;
  if (sum.is_zero())
    terms_.erase(key);
  else
    terms_[key] = sum;
}

LinDiffOp LinDiffOp::compile(const OpMatrix& m, const ModelSpace& space) {
  LinDiffOp op(m.rows, m.cols);
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      for (const OpTerm& t : m.at(r, c)) {
        switch (t.form) {
          case OpTerm::Form::K0:
            op.add_term(r, c, {}, t.coeff);
            break;
          case OpTerm::Form::FirstOrder:
            op.add_term(r, c, {t.a}, t.coeff);
            break;
          case OpTerm::Form::SecondOrder:
            // d_a(coeff d_b(.)) = coeff d_ab(.) + (d_a coeff) d_b(.)
            op.add_term(r, c, {t.a, t.b}, t.coeff);
            op.add_term(r, c, {t.b},
                        total_derivative_unchecked(t.coeff, t.a, space));
            break;
        }
      }
    }
  }
  return op;
}

std::vector<Expr> LinDiffOp::apply(const std::vector<Expr>& comp,
                                   const ModelSpace& space) const {
  if (static_cast<int>(comp.size()) != cols_)
    throw ShapeError("operator applied to a tuple of the wrong size");
  std::vector<std::vector<Expr>> rows(rows_);
  for (const auto& [key, coeff] : terms_) {
    Expr d = comp[key.in];
    for (int a : key.multi) d = total_derivative_unchecked(d, a, space);
    rows[key.out].push_back(coeff * d);
  }
  std::vector<Expr> out;
  out.reserve(rows_);
  for (auto& r : rows) out.push_back(Expr::add(r));
  return out;
}

int LinDiffOp::order() const {
  int o = 0;
  for (const auto& [key, coeff] : terms_)
    o = std::max(o, static_cast<int>(key.multi.size()));
  return o;
}

LinDiffOp LinDiffOp::negated() const {
  LinDiffOp out(rows_, cols_);
  for (const auto& [key, coeff] : terms_) out.terms_[key] = -coeff;
  return out;
}

AdjointResult adjoint_with_remainder(const LinDiffOp& op,
                                     const ModelSpace& space) {
  AdjointResult res{LinDiffOp(op.cols(), op.rows()), {}, space, {}, {}};
  ModelSpace& ext = res.ext;
  auto fresh = [&ext](std::string name) {
    while (ext.find_field(name)) name += "x";
    return ext.add_aux_field(name);
  };
  for (int i = 0; i < op.cols(); ++i)
    res.omega_fields.push_back(fresh("@w" + std::to_string(i)));
  for (int i = 0; i < op.rows(); ++i)
    res.pi_fields.push_back(fresh("@pi" + std::to_string(i)));
  res.remainder.assign(ext.dim(), Expr());

  // Integration by parts, one derivative at a time: with M = c pi and
  // K the remaining multi-index,
  //   M d_aK'(w) = d_a(M d_K'(w)) + (-d_a M) d_K'(w),
  // so each peel moves one factor into the boundary remainder and flips
  // the running coefficient.  What is left when K is empty is the
  // adjoint integrand M w, linear in the jets of pi.
  for (const auto& [key, coeff] : op.terms()) {
    Expr m = coeff * Expr::coord(Coordinate::dependent(res.pi_fields[key.out]));
    std::vector<int> rest = key.multi;
    while (!rest.empty()) {
      int a = rest.front();
      rest.erase(rest.begin());
      Expr dw = Expr::coord(
          Coordinate::derivative(res.omega_fields[key.in], rest));
      res.remainder[a] = res.remainder[a] + m * dw;
      m = -total_derivative_unchecked(m, a, ext);
    }
    // m = (-1)^{|K|} d_K(coeff pi_out); collect the coefficient of each
    // pi jet into an adjoint term.
    for (const Coordinate& c : m.coordinates()) {
      if (c.index != res.pi_fields[key.out] || !c.is_jet()) continue;
      res.star.add_term(key.in, key.out, c.multi, partial(m, c));
    }
  }
  return res;
}

LinDiffOp adjoint(const LinDiffOp& op, const ModelSpace& space) {
  return adjoint_with_remainder(op, space).star;
}

Expr adjoint_identity_residual(const LinDiffOp& op, const AdjointResult& adj) {
  const ModelSpace& ext = adj.ext;
  std::vector<Expr> w, pi;
  for (int i : adj.omega_fields) w.push_back(Expr::coord(Coordinate::dependent(i)));
  for (int i : adj.pi_fields) pi.push_back(Expr::coord(Coordinate::dependent(i)));

  std::vector<Expr> dw = op.apply(w, ext);
  std::vector<Expr> dpi = adj.star.apply(pi, ext);
  Expr lhs, rhs;
  for (int i = 0; i < op.rows(); ++i) lhs = lhs + pi[i] * dw[i];
  for (int i = 0; i < op.cols(); ++i) rhs = rhs + dpi[i] * w[i];
  for (int a = 0; a < ext.dim(); ++a)
    rhs = rhs + total_derivative_unchecked(adj.remainder[a], a, ext);
  return lhs - rhs;
}

}  // namespace phw
