#include "phw/phs.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "phw/calculus.hpp"
#include "phw/errors.hpp"
#include "phw/variational.hpp"

namespace phw {

namespace {

std::vector<int> state_indices(const ModelSpace& space) {
  std::vector<int> out;
  for (int i = 0; i < space.field_count(); ++i)
    if (space.is_state(i)) out.push_back(i);
  return out;
}

Expr divergence(const std::vector<Expr>& comps, const ModelSpace& space) {
  Expr s = Expr::integer(0);
  for (int a = 0; a < space.dim(); ++a)
    s = s + total_derivative_unchecked(comps.at(a), a, space);
  return s;
}

/// Substitutes the generic auxiliary tuples of an adjoint remainder by
/// concrete expressions, extending the bindings to every jet the
/// remainder mentions.
std::vector<Expr> bind_remainder(const std::vector<Expr>& remainder,
                                 const ModelSpace& ext,
                                 const std::vector<int>& omega_fields,
                                 const std::vector<Expr>& omega_vals,
                                 const std::vector<int>& pi_fields,
                                 const std::vector<Expr>& pi_vals) {
  Substitution s;
  for (std::size_t i = 0; i < omega_fields.size(); ++i)
    s.map[Coordinate::dependent(omega_fields[i])] = omega_vals.at(i);
  for (std::size_t i = 0; i < pi_fields.size(); ++i)
    s.map[Coordinate::dependent(pi_fields[i])] = pi_vals.at(i);
  int ord = 0;
  for (const Expr& e : remainder) ord = std::max(ord, e.jet_order());
  const Substitution full = induce_derivatives(s, ext, ord);
  std::vector<Expr> out;
  out.reserve(remainder.size());
  for (const Expr& e : remainder) out.push_back(substitute(e, full));
  return out;
}

void require_square(const OpMatrix& m, int n, const char* label) {
  if (m.rows != n || m.cols != n) {
    std::ostringstream os;
    os << label << " must be " << n << "x" << n << " over the state fields, got "
       << m.rows << "x" << m.cols;
    throw ShapeError(os.str());
  }
}

}  // namespace

void validate(const PHSystem& sys) {
  const ModelSpace& sp = sys.space;
  const int ns = sp.state_count();
  if (ns == 0) throw ShapeError("a system needs at least one state field");
  require_square(sys.J, ns, "the interconnection matrix");
  if (sys.has_R()) require_square(sys.R, ns, "the dissipation matrix");
  if (sys.has_G()) {
    if (sys.G.rows != ns || sys.G.cols != sp.input_count()) {
      std::ostringstream os;
      os << "the input matrix must be " << ns << "x" << sp.input_count()
         << ", got " << sys.G.rows << "x" << sys.G.cols;
      throw ShapeError(os.str());
    }
    if (sp.input_count() == 0)
      throw ShapeError("an input matrix needs declared input fields");
  }
  if (!(sys.domain_lo < sys.domain_hi))
    throw ShapeError("the domain interval is empty");
  for (const Coordinate& c : sys.hamiltonian.coordinates()) {
    if (c.kind == Coordinate::Kind::Independent) continue;
    const int alpha = c.base().index;
    if (sp.is_input(alpha) || sp.is_aux(alpha))
      throw ShapeError("the Hamiltonian density must depend on states only");
  }
  bool seen_face[2] = {false, false};
  for (const BoundaryCondition& bc : sys.bcs) {
    if (sp.dim() != 1)
      throw ShapeError("boundary conditions are limited to one dimension");
    if (bc.face != 0 && bc.face != 1)
      throw ShapeError("boundary face must be 0 or 1");
    if (seen_face[bc.face])
      throw ShapeError("duplicate boundary condition on one face");
    seen_face[bc.face] = true;
    if (bc.kind == BoundaryCondition::Kind::Rate) {
      if (bc.field < 0 || bc.field >= sp.field_count() ||
          !sp.is_state(bc.field))
        throw ShapeError("rate boundary conditions pin a state field");
      if (!bc.rate.coordinates().empty())
        throw ShapeError(
            "boundary rates may depend on parameters (including t) only");
    }
  }
}

std::vector<Expr> efforts(const PHSystem& sys) {
  std::vector<Expr> out;
  for (int alpha : state_indices(sys.space))
    out.push_back(variational_derivative(sys.hamiltonian, alpha, sys.space));
  return out;
}

VerticalField assemble_rhs(const PHSystem& sys) {
  validate(sys);
  const ModelSpace& sp = sys.space;
  const std::vector<Expr> e = efforts(sys);
  const LinDiffOp Jop = LinDiffOp::compile(sys.J, sp);
  std::vector<Expr> rate = Jop.apply(e, sp);
  if (sys.has_R()) {
    const std::vector<Expr> damp = LinDiffOp::compile(sys.R, sp).apply(e, sp);
    for (std::size_t i = 0; i < rate.size(); ++i)
      rate[i] = rate[i] - damp[i];
  }
  if (sys.has_G()) {
    std::vector<Expr> u;
    for (int j : sp.input_indices())
      u.push_back(Expr::coord(Coordinate::dependent(j)));
    const std::vector<Expr> inj = LinDiffOp::compile(sys.G, sp).apply(u, sp);
    for (std::size_t i = 0; i < rate.size(); ++i)
      rate[i] = rate[i] + inj[i];
  }
  VerticalField v;
  v.comp.assign(sp.field_count(), Expr::integer(0));
  const std::vector<int> states = state_indices(sp);
  for (std::size_t s = 0; s < states.size(); ++s) v.comp[states[s]] = rate[s];
  return v;
}

std::vector<Expr> outputs(const PHSystem& sys) {
  validate(sys);
  if (!sys.has_G()) return {};
  const LinDiffOp Gop = LinDiffOp::compile(sys.G, sys.space);
  return adjoint(Gop, sys.space).apply(efforts(sys), sys.space);
}

CheckReport check_skew(const OpMatrix& J, const ModelSpace& space) {
  if (J.rows != J.cols)
    throw ShapeError("the interconnection matrix must be square");
  const LinDiffOp op = LinDiffOp::compile(J, space);
  if (adjoint(op, space) == op.negated())
    return {Verdict::Pass, "formal adjoint equals the negation"};
  return {Verdict::Fail, "formal adjoint differs from the negation"};
}

namespace {

double halton(int i, int base) {
  double f = 1.0;
  double r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

int nth_prime(int n) {
  static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,
                               37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79};
  if (n < static_cast<int>(sizeof(primes) / sizeof(primes[0])))
    return primes[n];
  int candidate = primes[sizeof(primes) / sizeof(primes[0]) - 1];
  int count = static_cast<int>(sizeof(primes) / sizeof(primes[0])) - 1;
  while (count < n) {
    ++candidate;
    bool is_prime = true;
    for (int d = 2; d * d <= candidate; ++d)
      if (candidate % d == 0) {
        is_prime = false;
        break;
      }
    if (is_prime) ++count;
  }
  return candidate;
}

/// Maps a quasi-random u in (0,1) into a declared range; half-open and
/// unbounded ranges use rational stretches so every interior point is
/// reachable.
double map_range(const Range& rg, double u) {
  const bool lo_finite = std::isfinite(rg.lo);
  const bool hi_finite = std::isfinite(rg.hi);
  if (lo_finite && hi_finite) return rg.lo + u * (rg.hi - rg.lo);
  if (lo_finite) return rg.lo + u / (1.0 - u);
  if (hi_finite) return rg.hi - (1.0 - u) / u;
  return (2.0 * u - 1.0) / (u * (1.0 - u));
}

struct SampleVars {
  std::vector<Coordinate> coords;
  std::vector<Range> coord_ranges;
  std::vector<ParamSym> syms;
  std::vector<Range> sym_ranges;
};

SampleVars collect_vars(const std::vector<std::vector<Expr>>& M,
                        const ModelSpace& space, double lo, double hi) {
  std::set<Coordinate> coords;
  std::set<ParamSym> syms;
  for (const auto& row : M)
    for (const Expr& e : row) {
      const auto cs = e.coordinates();
      coords.insert(cs.begin(), cs.end());
      const auto ps = e.param_syms();
      syms.insert(ps.begin(), ps.end());
    }
  SampleVars out;
  for (const Coordinate& c : coords) {
    out.coords.push_back(c);
    if (c.kind == Coordinate::Kind::Independent)
      out.coord_ranges.push_back(Range{lo, hi, false, false});
    else
      out.coord_ranges.push_back(Range{-1.0, 1.0, false, false});
  }
  for (const ParamSym& s : syms) {
    out.syms.push_back(s);
    if (s.derivs.empty())
      out.sym_ranges.push_back(space.param(s.name).range);
    else
      out.sym_ranges.push_back(Range{-1.0, 1.0, false, false});
  }
  return out;
}

}  // namespace

CheckReport check_nonneg_self_adjoint(const OpMatrix& R,
                                      const ModelSpace& space, double lo,
                                      double hi) {
  if (R.rows != R.cols)
    throw ShapeError("the dissipation matrix must be square");
  const LinDiffOp op = LinDiffOp::compile(R, space);
  if (adjoint(op, space) != op)
    return {Verdict::Fail, "not formally self-adjoint"};
  if (op.is_zero()) return {Verdict::Pass, "identically zero"};

  bool any_k0 = false, any_d1 = false, any_d2 = false;
  for (const auto& row : R.entries)
    for (const OpEntry& entry : row)
      for (const OpTerm& t : entry) {
        switch (t.form) {
          case OpTerm::Form::K0:
            if (!t.coeff.is_zero()) any_k0 = true;
            break;
          case OpTerm::Form::FirstOrder:
            any_d1 = true;
            break;
          case OpTerm::Form::SecondOrder:
            any_d2 = true;
            break;
        }
      }
  if (any_d1 || (any_k0 && any_d2))
    return {Verdict::Indeterminate,
            "no pointwise non-negativity certificate for this operator "
            "structure (supported: order-zero, or pure d_a(c d_b(.)))"};

  // Coefficient matrix whose pointwise non-negativity certifies the
  // operator: the entries themselves for order zero, the negated tensor
  // of d_a(c d_b(.)) terms (indexed by field x direction) otherwise.
  const int dim = space.dim();
  const int n = any_d2 ? R.rows * dim : R.rows;
  std::vector<std::vector<Expr>> M(n, std::vector<Expr>(n, Expr::integer(0)));
  for (int r = 0; r < R.rows; ++r)
    for (int c = 0; c < R.cols; ++c)
      for (const OpTerm& t : R.at(r, c)) {
        if (t.form == OpTerm::Form::K0 && !any_d2)
          M[r][c] = M[r][c] + t.coeff;
        else if (t.form == OpTerm::Form::SecondOrder)
          M[r * dim + t.a][c * dim + t.b] =
              M[r * dim + t.a][c * dim + t.b] - t.coeff;
      }

  const SampleVars vars = collect_vars(M, space, lo, hi);
  constexpr int kSamples = 16;
  constexpr double kEigTol = 1e-12;
  double worst = std::numeric_limits<double>::infinity();
  int worst_sample = -1;
  for (int s = 1; s <= kSamples; ++s) {
    EvalPoint pt;
    int d = 0;
    for (std::size_t i = 0; i < vars.coords.size(); ++i, ++d)
      pt.coords[vars.coords[i]] =
          map_range(vars.coord_ranges[i], halton(s, nth_prime(d)));
    for (std::size_t i = 0; i < vars.syms.size(); ++i, ++d) {
      const double v = map_range(vars.sym_ranges[i], halton(s, nth_prime(d)));
      if (vars.syms[i].derivs.empty())
        pt.params[vars.syms[i].name] = v;
      else
        pt.param_derivs[vars.syms[i]] = v;
    }
    // Base values for parameters that appear only differentiated.
    for (const ParamSym& sym : vars.syms)
      if (!sym.derivs.empty() && !pt.params.count(sym.name))
        pt.params[sym.name] =
            map_range(space.param(sym.name).range, halton(s, nth_prime(d++)));

    Eigen::MatrixXd num(n, n);
    try {
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) num(r, c) = eval_numeric(M[r][c], pt);
    } catch (const EvalError& err) {
      return {Verdict::Indeterminate,
              std::string("coefficients not evaluable on the sampled "
                          "range: ") +
                  err.what()};
    }
    const Eigen::MatrixXd sym = 0.5 * (num + num.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    const double mineig = eig.eigenvalues().minCoeff();
    if (mineig < worst) {
      worst = mineig;
      worst_sample = s;
    }
  }
  std::ostringstream os;
  if (worst < -kEigTol) {
    os << "coefficient matrix has eigenvalue " << worst << " at sample "
       << worst_sample << " of " << kSamples;
    return {Verdict::Fail, os.str()};
  }
  os << (any_d2 ? "second-order coefficient tensor" : "coefficient matrix")
     << " non-negative at " << kSamples
     << " quasi-random points (smallest eigenvalue " << worst << ")";
  return {Verdict::Pass, os.str()};
}

StructureReport check_structure(const PHSystem& sys) {
  validate(sys);
  StructureReport rep;
  rep.skew = check_skew(sys.J, sys.space);
  if (sys.has_R())
    rep.dissipation = check_nonneg_self_adjoint(sys.R, sys.space,
                                                sys.domain_lo, sys.domain_hi);
  else
    rep.dissipation = {Verdict::Pass, "absent"};
  return rep;
}

PowerBalance power_balance(const PHSystem& sys) {
  validate(sys);
  const ModelSpace& sp = sys.space;
  if (dependent_jet_order(sys.hamiltonian, sp) > 1)
    throw ShapeError(
        "the power balance needs a Hamiltonian density of jet order <= 1");

  PowerBalance pb;
  pb.effort = efforts(sys);
  pb.rhs = assemble_rhs(sys);
  pb.output = outputs(sys);
  pb.dissipation = Expr::integer(0);
  pb.domain_port = Expr::integer(0);
  pb.boundary.assign(sp.dim(), Expr::integer(0));

  // Transport part of the energy rate along the evolution field.
  const LieDecomposition lie = lie_decompose(pb.rhs, sys.hamiltonian, sp);
  for (int a = 0; a < sp.dim(); ++a) pb.boundary[a] = lie.boundary.at(a);

  // Interconnection flux: pairing the effort against J(effort) moves
  // half the adjoint remainder to the boundary when J is skew.
  {
    const LinDiffOp Jop = LinDiffOp::compile(sys.J, sp);
    const AdjointResult adj = adjoint_with_remainder(Jop, sp);
    const std::vector<Expr> rem = bind_remainder(
        adj.remainder, adj.ext, adj.omega_fields, pb.effort, adj.pi_fields,
        pb.effort);
    const Expr half = Expr::integer(1) / Expr::integer(2);
    for (int a = 0; a < sp.dim(); ++a)
      pb.boundary[a] = pb.boundary[a] + half * rem.at(a);
  }

  // Dissipation: each structural term splits by the product rule into a
  // sign-definite density plus an exact flux.
  if (sys.has_R()) {
    for (int r = 0; r < sys.R.rows; ++r)
      for (int c = 0; c < sys.R.cols; ++c)
        for (const OpTerm& t : sys.R.at(r, c)) {
          const Expr& eo = pb.effort.at(r);
          const Expr& ei = pb.effort.at(c);
          switch (t.form) {
            case OpTerm::Form::K0:
              pb.dissipation = pb.dissipation + eo * t.coeff * ei;
              break;
            case OpTerm::Form::SecondOrder: {
              const Expr dei = total_derivative_unchecked(ei, t.b, sp);
              pb.dissipation =
                  pb.dissipation -
                  total_derivative_unchecked(eo, t.a, sp) * t.coeff * dei;
              pb.boundary[t.a] = pb.boundary[t.a] - eo * t.coeff * dei;
              break;
            }
            case OpTerm::Form::FirstOrder:
              throw ShapeError(
                  "first-order dissipation terms have no power-balance "
                  "split");
          }
        }
  }

  // Input flux and the collocated domain port.
  if (sys.has_G()) {
    std::vector<Expr> u;
    for (int j : sp.input_indices())
      u.push_back(Expr::coord(Coordinate::dependent(j)));
    const LinDiffOp Gop = LinDiffOp::compile(sys.G, sp);
    const AdjointResult adj = adjoint_with_remainder(Gop, sp);
    const std::vector<Expr> rem = bind_remainder(
        adj.remainder, adj.ext, adj.omega_fields, u, adj.pi_fields, pb.effort);
    for (int a = 0; a < sp.dim(); ++a)
      pb.boundary[a] = pb.boundary[a] + rem.at(a);
    for (std::size_t j = 0; j < u.size(); ++j)
      pb.domain_port = pb.domain_port + u[j] * pb.output.at(j);
  }

  pb.residual = lie.total + pb.dissipation - pb.domain_port -
                divergence(pb.boundary, sp);
  return pb;
}

CasimirReport casimir_check(const PHSystem& sys, const Expr& C) {
  validate(sys);
  const ModelSpace& sp = sys.space;
  for (const Coordinate& c : C.coordinates()) {
    if (c.kind == Coordinate::Kind::Independent) continue;
    const int alpha = c.base().index;
    if (!sp.is_state(alpha))
      throw ShapeError("a candidate density must depend on states only");
  }

  std::vector<Expr> dC;
  for (int alpha : state_indices(sp))
    dC.push_back(variational_derivative(C, alpha, sp));

  const LinDiffOp Jop = LinDiffOp::compile(sys.J, sp);
  CasimirReport rep;
  rep.residual = Jop.apply(dC, sp);
  int max_order = Jop.order();
  if (sys.has_R()) {
    const LinDiffOp Rop = LinDiffOp::compile(sys.R, sp);
    const std::vector<Expr> damp = Rop.apply(dC, sp);
    for (std::size_t i = 0; i < rep.residual.size(); ++i)
      rep.residual[i] = rep.residual[i] - damp[i];
    max_order = std::max(max_order, Rop.order());
  }
  if (sys.has_G()) {
    const LinDiffOp Gop = LinDiffOp::compile(sys.G, sp);
    rep.input_residual = adjoint(Gop, sp).apply(dC, sp);
    max_order = std::max(max_order, Gop.order());
  }

  if (max_order >= 1) {
    rep.verdict = Tri::Indeterminate;
    rep.detail =
        "structure operators of differential order >= 1: the pointwise "
        "test is inconclusive";
    return rep;
  }
  const bool res_zero = std::all_of(rep.residual.begin(), rep.residual.end(),
                                    [](const Expr& e) { return e.is_zero(); });
  if (!res_zero) {
    rep.verdict = Tri::No;
    rep.detail = "the structure operators move the gradient";
    return rep;
  }
  const bool in_zero =
      std::all_of(rep.input_residual.begin(), rep.input_residual.end(),
                  [](const Expr& e) { return e.is_zero(); });
  if (!in_zero) {
    rep.verdict = Tri::No;
    rep.detail = "the input map reaches the gradient";
    return rep;
  }
  const int cord = dependent_jet_order(C, sp);
  if (cord == 0) {
    rep.verdict = Tri::Yes;
    rep.detail = "conserved for every Hamiltonian";
    return rep;
  }
  if (cord == 1) {
    const BoundaryCovector bc = boundary_operator(C, sp);
    bool flux_free = true;
    for (const auto& per_field : bc.comp)
      for (const Expr& e : per_field)
        if (!e.is_zero()) flux_free = false;
    if (flux_free) {
      rep.verdict = Tri::Yes;
      rep.detail = "conserved for every Hamiltonian";
      return rep;
    }
  }
  rep.verdict = Tri::Indeterminate;
  rep.detail = "the density carries its own boundary flux; conservation "
               "depends on the boundary data";
  return rep;
}

}  // namespace phw
