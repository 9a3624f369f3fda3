#pragma once

#include <string>

#include "phw/expression.hpp"
#include "phw/space.hpp"

namespace phw {

/// Renders an expression using the space's symbol names.  The output is
/// deterministic (canonical forms render one way) and re-parses, via
/// parse_expression over the same space, to an equal expression.
std::string render(const Expr& e, const ModelSpace& space);

}  // namespace phw
