#pragma once

#include "phw/calculus.hpp"
#include "phw/densities.hpp"
#include "phw/expression.hpp"
#include "phw/space.hpp"

namespace phw {

/// Euler operator applied to a density F: component alpha is
///   delta_alpha F = sum over sorted multi-indices K of
///                   (-1)^{|K|} d_K (dF / dx^alpha_K),
/// one summand per distinct K (symmetrized jet coordinates carry the
/// full coefficient, so no multiplicity factors appear).  Parameter
/// dependencies on coordinates count as genuine dependence.
CovectorDensity variational_derivative(const Expr& F, const ModelSpace& space);

/// Returns delta_alpha(F) for one field index.
Expr variational_derivative(const Expr& F, int alpha, const ModelSpace& space);

/// Boundary operator of a first-order density: comp[alpha][A] is
/// dF / dx^alpha_A.  Densities of jet order 2 or higher are rejected:
/// their boundary term is not a pointwise expression in this form.
BoundaryCovector boundary_operator(const Expr& F, const ModelSpace& space);

/// The three pieces of the prolonged action of a vertical field v on a
/// first-order density F, satisfying exactly
///   total = domain + sum_A d_A(boundary[A])
///   total = sum_alpha [ v^alpha dF/dx^alpha
///                       + d_A(v^alpha) dF/dx^alpha_A ].
struct LieDecomposition {
  Expr total;
  Expr domain;                  // sum_alpha v^alpha delta_alpha F
  std::vector<Expr> boundary;   // per A: sum_alpha v^alpha dF/dx^alpha_A
};

LieDecomposition lie_decompose(const VerticalField& v, const Expr& F,
                               const ModelSpace& space);

}  // namespace phw
