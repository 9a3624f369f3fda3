#include "phw/grid1d.hpp"

#include <cmath>
#include <vector>

#include "phw/errors.hpp"

namespace phw {

Grid1D Grid1D::make(int n, double lo, double hi) {
  if (n < 3) throw ShapeError("a grid needs at least three nodes");
  if (!(lo < hi)) throw ShapeError("the grid interval is empty");
  Grid1D g;
  g.n = n;
  g.lo = lo;
  g.hi = hi;
  g.h = (hi - lo) / (n - 1);
  g.node.resize(n);
  for (int i = 0; i < n; ++i) g.node[i] = lo + i * g.h;
  g.node[n - 1] = hi;

  g.quad = Eigen::VectorXd::Constant(n, g.h);
  g.quad(0) = g.h / 2.0;
  g.quad(n - 1) = g.h / 2.0;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * n);
  const double inv_h = 1.0 / g.h;
  const double inv_2h = 0.5 / g.h;
  trip.emplace_back(0, 0, -inv_h);
  trip.emplace_back(0, 1, inv_h);
  for (int i = 1; i + 1 < n; ++i) {
    trip.emplace_back(i, i - 1, -inv_2h);
    trip.emplace_back(i, i + 1, inv_2h);
  }
  trip.emplace_back(n - 1, n - 2, -inv_h);
  trip.emplace_back(n - 1, n - 1, inv_h);
  g.D.resize(n, n);
  g.D.setFromTriplets(trip.begin(), trip.end());

  Eigen::SparseMatrix<double> W(n, n);
  std::vector<Eigen::Triplet<double>> wt;
  wt.reserve(n);
  for (int i = 0; i < n; ++i) wt.emplace_back(i, i, g.quad(i));
  W.setFromTriplets(wt.begin(), wt.end());
  g.DtW = Eigen::SparseMatrix<double>(g.D.transpose()) * W;
  return g;
}

Eigen::VectorXd Grid1D::adjoint_apply(const Eigen::VectorXd& f) const {
  Eigen::VectorXd out = DtW * f;
  out.array() /= quad.array();
  return out;
}

double stokes_defect(const Grid1D& g, const Eigen::VectorXd& f) {
  const double lhs = g.integrate(g.D * f);
  return std::abs(lhs - (f(g.n - 1) - f(0)));
}

}  // namespace phw
