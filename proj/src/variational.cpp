#include "phw/variational.hpp"

#include "phw/errors.hpp"

namespace phw {

namespace {

/// Sorted multi-indices over dim directions with length 0..order.
std::vector<std::vector<int>> sorted_multis(int dim, int order) {
  std::vector<std::vector<int>> out = {{}};
  for (size_t i = 0; i < out.size(); ++i) {
    if (static_cast<int>(out[i].size()) == order) continue;
    int start = out[i].empty() ? 0 : out[i].back();
    for (int a = start; a < dim; ++a) {
      std::vector<int> next = out[i];
      next.push_back(a);
      out.push_back(std::move(next));
    }
  }
  return out;
}

}  // namespace

Expr variational_derivative(const Expr& F, int alpha,
                            const ModelSpace& space) {
  int order = dependent_jet_order(F, space);
  std::vector<Expr> terms;
  for (const auto& multi : sorted_multis(space.dim(), order)) {
    Expr piece =
        partial_dependent(F, Coordinate::derivative(alpha, multi), space);
    if (piece.is_zero()) continue;
    for (int a : multi)
      piece = total_derivative_unchecked(piece, a, space);
    if (multi.size() % 2 == 1) piece = -piece;
    terms.push_back(piece);
  }
  return Expr::add(terms);
}

CovectorDensity variational_derivative(const Expr& F,
                                       const ModelSpace& space) {
  CovectorDensity out;
  for (int alpha = 0; alpha < space.field_count(); ++alpha)
    out.comp.push_back(variational_derivative(F, alpha, space));
  return out;
}

BoundaryCovector boundary_operator(const Expr& F, const ModelSpace& space) {
  if (dependent_jet_order(F, space) > 1)
    throw ShapeError(
        "boundary operator requires a density of jet order at most 1");
  BoundaryCovector out;
  out.comp.resize(space.field_count());
  for (int alpha = 0; alpha < space.field_count(); ++alpha) {
    for (int a = 0; a < space.dim(); ++a)
      out.comp[alpha].push_back(partial_dependent(
          F, Coordinate::derivative(alpha, {a}), space));
  }
  return out;
}

LieDecomposition lie_decompose(const VerticalField& v, const Expr& F,
                               const ModelSpace& space) {
  if (static_cast<int>(v.comp.size()) != space.field_count())
    throw ShapeError("vertical field has the wrong number of components");
  if (dependent_jet_order(F, space) > 1)
    throw ShapeError(
        "the first-order decomposition requires a density of jet order at "
        "most 1");
  LieDecomposition out;
  BoundaryCovector b = boundary_operator(F, space);
  std::vector<Expr> total_terms, domain_terms;
  out.boundary.assign(space.dim(), Expr());
  for (int alpha = 0; alpha < space.field_count(); ++alpha) {
    const Expr& va = v.comp[alpha];
    total_terms.push_back(
        va * partial_dependent(F, Coordinate::dependent(alpha), space));
    domain_terms.push_back(va * variational_derivative(F, alpha, space));
    for (int a = 0; a < space.dim(); ++a) {
      total_terms.push_back(total_derivative_unchecked(va, a, space) *
                            b.comp[alpha][a]);
      out.boundary[a] = out.boundary[a] + va * b.comp[alpha][a];
    }
  }
  out.total = Expr::add(total_terms);
  out.domain = Expr::add(domain_terms);
  return out;
}

}  // namespace phw
