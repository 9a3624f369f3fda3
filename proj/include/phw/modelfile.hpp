#pragma once

#include <string>

#include "phw/phs.hpp"

namespace phw {

/// A parsed model file: the assembled system together with the
/// structural verdicts (skew interconnection, non-negative self-adjoint
/// dissipation), which are evaluated eagerly so every consumer of a
/// parsed model sees the same report.
struct ModelFile {
  PHSystem system;
  StructureReport structure;
};

/// Parses the line-oriented model format.  Directives appear in this
/// order, one per line ('#' starts a comment, blank lines are ignored):
///
///   model NAME
///   dim N
///   independent C in [a, b]      # one line per coordinate, equal intervals
///   fields NAME...               # state fields
///   inputs NAME...               # optional
///   param NAME [= VALUE] [range (a, b)] [depends C...]   # repeatable
///   hamiltonian EXPR
///   J [[ENTRY, ...], ...]
///   R [[ENTRY, ...], ...]        # optional
///   G [[ENTRY, ...], ...]        # optional
///   boundary C=a : free          # repeatable
///   boundary C=a : rate FIELD = EXPR   # EXPR may use the parameter t
///
/// Matrices may span lines until their brackets balance.  An ENTRY is a
/// sum of terms: a plain expression (multiplication operator), a
/// first-order term `[COEFF *] DC(.)`, or a second-order term
/// `DC([COEFF *] DC2(.))`, where C names an independent coordinate and
/// `.` marks the operand slot.  Parameter ranges default to the whole
/// line and dependencies to all independent coordinates.
///
/// Throws ParseError (with line/column) for malformed text or unknown
/// symbols and ShapeError for an assembled system that fails shape
/// validation.  Structural check failures do not throw; they land in
/// the returned report.
ModelFile parse_model(const std::string& text);

/// Renders a system in the model format; parse_model(emit_model(sys))
/// reconstructs it exactly (expressions are stored canonically).
std::string emit_model(const PHSystem& sys);

}  // namespace phw
