#pragma once

#include <optional>
#include <string>
#include <vector>

#include "phw/densities.hpp"
#include "phw/expression.hpp"
#include "phw/lindiffop.hpp"
#include "phw/space.hpp"

namespace phw {

/// Boundary condition at one face of a 1-D domain.
struct BoundaryCondition {
  enum class Kind : std::uint8_t { Free, Rate };
  int face = 0;  // 0: left endpoint, 1: right endpoint
  Kind kind = Kind::Free;
  int field = -1;  // Rate: state whose evolution rate is prescribed
  Expr rate;       // Rate: prescribed value; may use the parameter t
};

/// A distributed-parameter system in port-Hamiltonian form:
///   x'    = (J - R)(dH) + G(u)
///   y     = G*(dH)
/// with dH the variational derivative of the Hamiltonian density H,
/// J formally skew-adjoint, R formally self-adjoint and non-negative,
/// and G the input map.  J and R are square over the state fields; G
/// has one column per input field.  R and G may be empty (absent).
struct PHSystem {
  std::string name;
  ModelSpace space;
  double domain_lo = 0.0;
  double domain_hi = 1.0;
  Expr hamiltonian;
  OpMatrix J;
  OpMatrix R;  // rows == 0 when absent
  OpMatrix G;  // rows == 0 when absent
  std::vector<BoundaryCondition> bcs;

  bool has_R() const { return R.rows > 0; }
  bool has_G() const { return G.rows > 0; }
};

/// Shape and well-formedness checks; throws ShapeError on violation.
void validate(const PHSystem& sys);

/// Variational derivative of the Hamiltonian, one component per state.
std::vector<Expr> efforts(const PHSystem& sys);

/// State components of (J - R)(dH) + G(u); inputs and auxiliary fields
/// contribute zero components so the result is a full vertical field.
VerticalField assemble_rhs(const PHSystem& sys);

/// Collocated outputs y = G*(dH), one per input field.
std::vector<Expr> outputs(const PHSystem& sys);

enum class Verdict : std::uint8_t { Pass, Fail, Indeterminate };

struct CheckReport {
  Verdict verdict = Verdict::Indeterminate;
  std::string detail;
};

/// Formal skew-adjointness J* = -J; symbolic, hence conclusive.
CheckReport check_skew(const OpMatrix& J, const ModelSpace& space);

/// Formal self-adjointness R* = R (symbolic) plus non-negativity.
/// Non-negativity is certified by sampling the coefficient matrix -- the
/// entries for an order-zero R, the tensor of d_a(c d_b(.)) terms for a
/// pure second-order R -- at quasi-random points of the declared
/// parameter ranges; mixed-order structures come back Indeterminate.
/// `domain` bounds the independent coordinates during sampling.
CheckReport check_nonneg_self_adjoint(const OpMatrix& R,
                                      const ModelSpace& space, double lo,
                                      double hi);

/// Both structural checks of a system, in report order.
struct StructureReport {
  CheckReport skew;
  CheckReport dissipation;  // Pass with detail "absent" when R is absent
};
StructureReport check_structure(const PHSystem& sys);

/// The exact split of the energy rate: as densities over the model
/// space,
///   d/dt H = -dissipation + domain_port + sum_A d_A(boundary[A])
/// where dissipation is the non-negative density the dissipation
/// operator extracts, domain_port pairs inputs with collocated outputs,
/// and boundary[A] collects every flux term (transport, interconnection
/// remainder, dissipation remainder, input remainder).  `residual` is
/// the symbolic difference of the two sides; it is zero whenever J is
/// skew and R self-adjoint of the supported structure.
struct PowerBalance {
  std::vector<Expr> effort;
  VerticalField rhs;
  std::vector<Expr> output;
  Expr dissipation;
  Expr domain_port;
  std::vector<Expr> boundary;
  Expr residual;
};

PowerBalance power_balance(const PHSystem& sys);

enum class Tri : std::uint8_t { Yes, No, Indeterminate };

/// Whether the density C generates a conserved functional of the
/// isolated dynamics regardless of the Hamiltonian: (J - R)(dC) must
/// vanish and the input map must not reach dC.  Operators of order
/// one or higher, and flux terms that depend on boundary data, make the
/// answer Indeterminate rather than guessed.
struct CasimirReport {
  Tri verdict = Tri::Indeterminate;
  std::vector<Expr> residual;        // (J - R)(dC), one per state
  std::vector<Expr> input_residual;  // G*(dC), one per input
  std::string detail;
};

CasimirReport casimir_check(const PHSystem& sys, const Expr& C);

}  // namespace phw
