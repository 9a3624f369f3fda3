#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <vector>

namespace phw {

/// One-dimensional summation-by-parts discretization on uniform nodes:
/// second-order central differences inside, first-order one-sided rows
/// at the two closures, trapezoid quadrature weights.  The pair (W, D)
/// satisfies  W D + D^T W = B  exactly, with B carrying -1 and +1 in
/// its corner entries, so discrete integration by parts mirrors the
/// continuous identity including the boundary evaluations.
struct Grid1D {
  int n = 0;
  double lo = 0.0;
  double hi = 1.0;
  double h = 0.0;
  std::vector<double> node;        // n points, lo..hi inclusive
  Eigen::VectorXd quad;            // diagonal of the norm W
  Eigen::SparseMatrix<double> D;   // first-derivative operator
  Eigen::SparseMatrix<double> DtW; // cached D^T W

  static Grid1D make(int n, double lo, double hi);

  double integrate(const Eigen::VectorXd& f) const { return quad.dot(f); }

  /// The W-adjoint W^{-1} D^T W applied to f; equals -D f away from the
  /// closures, with the boundary corrections that make the discrete
  /// pairing identity exact.
  Eigen::VectorXd adjoint_apply(const Eigen::VectorXd& f) const;
};

/// Defect of the discrete divergence theorem
///   sum_i w_i (D f)_i  =  f[n-1] - f[0],
/// which the summation-by-parts identity makes exact up to roundoff.
double stokes_defect(const Grid1D& g, const Eigen::VectorXd& f);

}  // namespace phw
