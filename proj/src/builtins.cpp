#include "phw/builtins.hpp"

#include <vector>

#include "phw/parser.hpp"

namespace phw {

namespace {

Expr num(long long v) { return Expr::integer(v); }

PHSystem make_string(bool damped) {
  PHSystem sys;
  sys.name = damped ? "string_damped" : "string";
  ModelSpace sp;
  sp.set_independent({"X"});
  sp.add_field("w");
  sp.add_field("p");
  sp.add_param(ParamSpec{"rho", {}, 1.0, Range::positive()});
  sp.add_param(ParamSpec{"P", {}, 1.0, Range::positive()});
  if (damped) sp.add_param(ParamSpec{"r", {}, 0.1, Range::nonnegative()});
  sys.space = std::move(sp);
  sys.hamiltonian = parse_expression("p^2/(2*rho) + P*w_X^2/2", sys.space);
  sys.J = OpMatrix::k0({{num(0), num(1)}, {num(-1), num(0)}});
  if (damped) {
    sys.R = OpMatrix(2, 2);
    sys.R.at(1, 1).push_back(OpTerm::d2(num(0) - Expr::param("r"), 0, 0));
  }
  for (int face = 0; face < 2; ++face) {
    BoundaryCondition bc;
    bc.face = face;
    bc.kind = BoundaryCondition::Kind::Rate;
    bc.field = 0;
    bc.rate = num(0);
    sys.bcs.push_back(bc);
  }
  return sys;
}

PHSystem make_casimir3() {
  PHSystem sys;
  sys.name = "casimir3";
  ModelSpace sp;
  sp.set_independent({"X"});
  sp.add_field("x1");
  sp.add_field("x2");
  sp.add_field("x3");
  sys.space = std::move(sp);
  sys.hamiltonian =
      parse_expression("x1^2/2 + x2^2/2 + x3^2/2", sys.space);
  sys.J = OpMatrix::k0({{num(0), num(1), num(0)},
                        {num(-1), num(0), num(0)},
                        {num(0), num(0), num(0)}});
  return sys;
}

/// Entries of the inverse deformation gradient: fhat[B][a] with
/// sum_a fhat[B][a] * q^a_A = delta^B_A, via adjugate / determinant.
std::vector<std::vector<Expr>> deformation_inverse(int dim) {
  auto F = [](int alpha, int a) {
    return Expr::coord(Coordinate::derivative(alpha, {a}));
  };
  std::vector<std::vector<Expr>> fhat(
      static_cast<size_t>(dim), std::vector<Expr>(static_cast<size_t>(dim)));
  if (dim == 2) {
    const Expr det = F(0, 0) * F(1, 1) - F(0, 1) * F(1, 0);
    fhat[0][0] = F(1, 1) / det;
    fhat[0][1] = num(0) - F(0, 1) / det;
    fhat[1][0] = num(0) - F(1, 0) / det;
    fhat[1][1] = F(0, 0) / det;
    return fhat;
  }
  auto minor_det = [&](int r, int c) {
    int rr[2];
    int cc[2];
    for (int i = 0, k = 0; i < 3; ++i)
      if (i != r) rr[k++] = i;
    for (int j = 0, k = 0; j < 3; ++j)
      if (j != c) cc[k++] = j;
    return F(rr[0], cc[0]) * F(rr[1], cc[1]) -
           F(rr[0], cc[1]) * F(rr[1], cc[0]);
  };
  Expr det = num(0);
  for (int j = 0; j < 3; ++j) {
    const Expr term = F(0, j) * minor_det(0, j);
    det = (j % 2 == 0) ? det + term : det - term;
  }
  for (int B = 0; B < 3; ++B)
    for (int alpha = 0; alpha < 3; ++alpha) {
      Expr cof = minor_det(alpha, B);
      if ((alpha + B) % 2 != 0) cof = num(0) - cof;
      fhat[static_cast<size_t>(B)][static_cast<size_t>(alpha)] = cof / det;
    }
  return fhat;
}

}  // namespace

PHSystem make_mhd(int dim) {
  if (dim != 2 && dim != 3)
    throw ShapeError("the mhd model supports dimension 2 or 3");
  PHSystem sys;
  sys.name = "mhd";
  ModelSpace sp;
  if (dim == 3) sp.set_independent({"X", "Y", "Z"});
  else sp.set_independent({"X", "Y"});
  for (int a = 1; a <= dim; ++a) sp.add_field("q" + std::to_string(a));
  for (int a = 1; a <= dim; ++a) sp.add_field("p" + std::to_string(a));
  sp.add_input("A0");
  sp.add_param(ParamSpec{"rho", {}, {}, Range::positive()});
  sp.add_param(ParamSpec{"mu", {}, {}, Range{}});
  std::vector<Coordinate> qdeps;
  for (int a = 0; a < dim; ++a) qdeps.push_back(Coordinate::dependent(a));
  for (int a = 1; a <= dim; ++a)
    sp.add_param(ParamSpec{"A" + std::to_string(a), qdeps, {}, Range{}});
  std::vector<Coordinate> jet_deps;
  for (int alpha = 0; alpha < dim; ++alpha)
    for (int a = 0; a < dim; ++a)
      jet_deps.push_back(Coordinate::derivative(alpha, {a}));
  sp.add_param(ParamSpec{"Est", jet_deps, {}, Range{}});
  sys.space = std::move(sp);

  const Expr rho = Expr::param("rho");
  const Expr mu = Expr::param("mu");
  Expr H = rho * Expr::param("Est");
  for (int alpha = 0; alpha < dim; ++alpha) {
    const Expr pa = Expr::coord(Coordinate::dependent(dim + alpha));
    const Expr Aa = Expr::param("A" + std::to_string(alpha + 1));
    const Expr diff = pa - mu * Aa;
    H = H + diff * diff / (num(2) * rho);
  }
  sys.hamiltonian = H;

  OpMatrix J(2 * dim, 2 * dim);
  for (int alpha = 0; alpha < dim; ++alpha) {
    J.at(alpha, dim + alpha).push_back(OpTerm::k0(num(1)));
    J.at(dim + alpha, alpha).push_back(OpTerm::k0(num(-1)));
  }
  sys.J = std::move(J);

  OpMatrix G(2 * dim, 1);
  const auto fhat = deformation_inverse(dim);
  for (int alpha = 0; alpha < dim; ++alpha)
    for (int B = 0; B < dim; ++B)
      G.at(dim + alpha, 0)
          .push_back(OpTerm::d1(
              mu * fhat[static_cast<size_t>(B)][static_cast<size_t>(alpha)],
              B));
  sys.G = std::move(G);
  return sys;
}

std::vector<std::string> builtin_names() {
  return {"string", "string_damped", "casimir3", "mhd"};
}

PHSystem make_builtin(const std::string& name) {
  if (name == "string") return make_string(false);
  if (name == "string_damped") return make_string(true);
  if (name == "casimir3") return make_casimir3();
  if (name == "mhd") return make_mhd(3);
  throw ShapeError("unknown built-in model: " + name);
}

}  // namespace phw
