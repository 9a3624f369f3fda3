#pragma once

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

#include "phw/expression.hpp"
#include "phw/grid1d.hpp"
#include "phw/phs.hpp"

namespace phw {

/// Time-stepping request.  Input signals are expressions over the
/// spatial coordinate and the reserved parameter t, one per input
/// field; absent means zero.
struct SimOptions {
  double t0 = 0.0;
  double dt = 1e-3;
  int steps = 1000;
  int stride = 1;
  std::vector<Expr> input;
  /// Keep the full state vector of every emitted row (memory scales
  /// with rows * size); off by default.
  bool record_states = false;
};

/// One emitted accounting row.  Mid-step quantities (dissipation and
/// the two ports) are evaluated at the midpoint state of the step that
/// ends at this row; dHdt differences the energy since the previously
/// emitted row; residual = dHdt - (-dissipation + domain_port +
/// boundary_port).  boundary_port is the end-node value of the
/// boundary density: realized face rates paired with the jet
/// gradients, plus the face fluxes of second-order dissipation terms.
/// With clamped or free faces the ledger closes to solver roundoff at
/// stride 1 (quadratic energies); an actively driven face makes
/// residual report, honestly, the O(h) gap between that physical
/// flux and the power the rate constraint injects into the weakly
/// coupled scheme.  The first row carries the initial energy and
/// zeros.
struct LedgerRow {
  double t = 0.0;
  double H = 0.0;
  double dHdt = 0.0;
  double dissipation = 0.0;
  double domain_port = 0.0;
  double boundary_port = 0.0;
  double residual = 0.0;
};

struct SimResult {
  std::vector<LedgerRow> rows;
  Eigen::VectorXd final_state;
  bool used_affine = false;
  int max_newton_iters = 0;
  /// Per-row state snapshots, present only when requested; states[i]
  /// is the full nodal state at rows[i].t.
  std::vector<Eigen::VectorXd> states;
};

/// Structure-mirroring discretization of a one-dimensional system on a
/// summation-by-parts grid.  States live blockwise (state slot s, node
/// i at index s*n + i).  The discrete effort is the exact gradient of
/// the discrete energy against the quadrature norm, so the semidiscrete
/// energy identity repeats the continuous one; prescribed boundary
/// rates enter as midpoint algebraic constraints replacing the unique
/// pivot row that couples to them at the face node.
class DiscreteModel {
 public:
  DiscreteModel(PHSystem sys, int nodes);

  const Grid1D& grid() const { return grid_; }
  const PHSystem& system() const { return sys_; }
  int state_count() const { return ns_; }
  int size() const { return ns_ * grid_.n; }

  /// Samples one expression of the spatial coordinate per state; an
  /// empty list means the zero state.
  Eigen::VectorXd nodal_state(const std::vector<Expr>& ic) const;

  /// Quadrature of the energy density on the jets of y.
  double hamiltonian(const Eigen::VectorXd& y) const;

  /// Discrete efforts: density gradient plus the W-adjoint transfer of
  /// the jet slot, blockwise per state.
  Eigen::VectorXd efforts(const Eigen::VectorXd& y) const;

  /// Natural rates (J - R) e + G u(t) with no boundary rows replaced.
  Eigen::VectorXd natural_rate(const Eigen::VectorXd& y, double t,
                               const std::vector<Expr>& input = {}) const;

  /// Implicit midpoint run with the boundary constraints in force.
  SimResult run(const Eigen::VectorXd& y0, const SimOptions& opt) const;

 private:
  struct TermOp {
    int out = 0;  // state slot the contribution lands in
    int in = 0;   // state slot (or input slot for the input map)
    OpTerm::Form form = OpTerm::Form::K0;
    double sign = 1.0;
    Eigen::VectorXd c;  // nodal coefficient values
  };
  struct Constraint {
    int rate_row = 0;   // row whose natural rate is prescribed
    int pivot_row = 0;  // row replaced by the algebraic constraint
    int node = 0;
    Expr rate;
  };

  std::vector<Eigen::VectorXd> split(const Eigen::VectorXd& y) const;
  double eval_nodal(const Expr& e, int i,
                    const std::vector<Eigen::VectorXd>& f,
                    const std::vector<Eigen::VectorXd>& df, double t) const;
  Eigen::VectorXd input_nodal(const std::vector<Expr>& input, int j,
                              double t) const;
  double rate_value(const Constraint& c, double t) const;
  Eigen::VectorXd scheme_residual(const Eigen::VectorXd& z,
                                  const Eigen::VectorXd& y, double t_mid,
                                  double dt,
                                  const std::vector<Expr>& input) const;
  void check_inputs(const std::vector<Expr>& input) const;

  friend std::string trajectory_csv(const DiscreteModel&, const SimResult&);

  PHSystem sys_;
  Grid1D grid_;
  int ns_ = 0;
  std::vector<int> state_field_;         // slot -> field index
  std::map<int, int> field_slot_;        // field index -> slot
  std::vector<Expr> dH_dx_, dH_djet_;    // per slot
  std::vector<TermOp> jterms_, rterms_, gterms_;
  std::vector<Constraint> constraints_;
  std::map<std::string, double> params_;
  bool symbolically_affine_ = false;
};

/// Renders accounting rows as CSV.  Header
/// `t,H,dHdt,dissipation,domain_port,boundary_port,residual`, one line
/// per row, every value printed to 17 significant digits, so repeated
/// identical runs produce byte-identical text; no rows gives the
/// header alone.
std::string ledger_csv(const std::vector<LedgerRow>& rows);

/// Renders recorded snapshots as CSV: a `t` column followed by one
/// `field[node]` column per node, blockwise per state field.  Needs a
/// result produced with record_states set; same deterministic
/// 17-digit formatting as ledger_csv.
std::string trajectory_csv(const DiscreteModel& model, const SimResult& res);

}  // namespace phw
