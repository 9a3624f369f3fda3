#pragma once

#include <string>
#include <vector>

#include "phw/phs.hpp"

namespace phw {

/// Names of the models shipped with the workbench.
std::vector<std::string> builtin_names();

/// Constructs a shipped model by name:
///  - "string":        transverse waves on an elastic string, clamped
///                     at both ends (fields w, p; parameters rho, P);
///  - "string_damped": the same with distributed structural damping
///                     through a second-order dissipation operator;
///  - "casimir3":      three interacting scalar fields whose rotation
///                     structure conserves the third field pointwise;
///  - "mhd":           make_mhd(3), symbolic analysis only.
/// Throws ShapeError for unknown names.
PHSystem make_builtin(const std::string& name);

/// Inductionless magnetohydrodynamics over dim (2 or 3) spatial
/// coordinates: positions q^a and momenta p_a, Hamiltonian density
/// |p - mu*A(q)|^2/(2 rho) + rho*Est(grad q), canonical pairing J, and
/// an input map feeding the scalar potential A0 to the momenta through
/// first-order derivatives weighted by the inverse deformation
/// gradient (computed exactly via the adjugate over the determinant).
/// The model is for symbolic analysis; the grid simulation layer only
/// covers one-dimensional domains.
PHSystem make_mhd(int dim = 3);

}  // namespace phw
