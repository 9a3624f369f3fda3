#pragma once

#include <vector>

#include "phw/expression.hpp"

namespace phw {

/// Component tuple of a vertical vector field: one expression v^alpha
/// per field of the space, the alpha-component of an evolution x' = v.
struct VerticalField {
  std::vector<Expr> comp;
};

/// Component tuple of a covector-valued density: one expression
/// omega_alpha per field (a variational derivative, an effort, ...).
/// Pairs with a VerticalField to a scalar density sum_alpha v^alpha
/// omega_alpha.
struct CovectorDensity {
  std::vector<Expr> comp;
};

/// Coefficients of a boundary density: one expression per independent
/// direction A, the A-component of a horizontal flux whose divergence
/// sum_A d_A(comp[A]) enters a balance identity.
struct BoundaryDensity {
  std::vector<Expr> comp;
};

/// Boundary covector: comp[alpha][A] pairs a field direction with an
/// independent direction (the output of the boundary operator).
struct BoundaryCovector {
  std::vector<std::vector<Expr>> comp;
};

}  // namespace phw
