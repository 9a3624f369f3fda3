#include "phw/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include "phw/calculus.hpp"
#include "phw/errors.hpp"

namespace phw {

namespace {
constexpr double kNewtonTol = 1e-12;
constexpr int kNewtonMax = 50;

std::string at_time(double t) {
  std::ostringstream os;
  os << " at t=" << t;
  return os.str();
}
}  // namespace

DiscreteModel::DiscreteModel(PHSystem sys, int nodes)
    : sys_(std::move(sys)),
      grid_(Grid1D::make(nodes, sys_.domain_lo, sys_.domain_hi)) {
  validate(sys_);
  const ModelSpace& sp = sys_.space;
  if (sp.dim() != 1)
    throw SimError("the discretization covers one spatial dimension");
  for (int i = 0; i < sp.field_count(); ++i)
    if (sp.is_aux(i))
      throw SimError("auxiliary fields are not simulatable");
  if (sys_.hamiltonian.jet_order() > 1)
    throw SimError(
        "the discretization needs an energy density of jet order <= 1");
  if (sp.find_param("t"))
    throw SimError("the parameter name t is reserved for time");
  for (const ParamSpec& ps : sp.params()) {
    if (!ps.value)
      throw SimError("parameter " + ps.name +
                     " needs a numeric value to simulate");
    params_[ps.name] = *ps.value;
  }

  ns_ = sp.state_count();
  for (int i = 0; i < sp.field_count(); ++i)
    if (sp.is_state(i)) {
      field_slot_[i] = static_cast<int>(state_field_.size());
      state_field_.push_back(i);
    }

  std::set<Coordinate> jets;
  for (int s = 0; s < ns_; ++s) {
    const int alpha = state_field_[s];
    dH_dx_.push_back(partial(sys_.hamiltonian, Coordinate::dependent(alpha)));
    dH_djet_.push_back(
        partial(sys_.hamiltonian, Coordinate::derivative(alpha, {0})));
    jets.insert(Coordinate::dependent(alpha));
    jets.insert(Coordinate::derivative(alpha, {0}));
  }
  symbolically_affine_ = true;
  for (int s = 0; s < ns_; ++s)
    if (!is_affine_in(dH_dx_[s], jets) || !is_affine_in(dH_djet_[s], jets))
      symbolically_affine_ = false;

  const auto compile_terms = [&](const OpMatrix& m, double sign,
                                 bool allow_second, const char* label) {
    std::vector<TermOp> out;
    for (int r = 0; r < m.rows; ++r)
      for (int c = 0; c < m.cols; ++c)
        for (const OpTerm& t : m.at(r, c)) {
          if (t.coeff.is_zero()) continue;
          if (t.form == OpTerm::Form::FirstOrder ||
              (t.form == OpTerm::Form::SecondOrder && !allow_second))
            throw SimError(std::string(label) +
                           " entries of this differential order are not "
                           "discretizable here");
          for (const Coordinate& cc : t.coeff.coordinates())
            if (cc.kind != Coordinate::Kind::Independent)
              throw SimError(std::string(label) +
                             " coefficients may depend on the spatial "
                             "coordinate and parameters only");
          TermOp op;
          op.out = r;
          op.in = c;
          op.form = t.form;
          op.sign = sign;
          op.c.resize(grid_.n);
          EvalPoint pt;
          pt.params = params_;
          for (int i = 0; i < grid_.n; ++i) {
            pt.coords[Coordinate::independent(0)] = grid_.node[i];
            op.c(i) = eval_numeric(t.coeff, pt);
          }
          out.push_back(std::move(op));
        }
    return out;
  };
  jterms_ = compile_terms(sys_.J, +1.0, false, "interconnection");
  if (sys_.has_R())
    rterms_ = compile_terms(sys_.R, -1.0, true, "dissipation");
  if (sys_.has_G()) gterms_ = compile_terms(sys_.G, +1.0, false, "input");

  // Boundary constraints: find each one's pivot, the unique state whose
  // same-node value the prescribed natural rate responds to.
  std::mt19937 gen(20260819);
  std::uniform_real_distribution<double> dist(0.4, 1.3);
  std::set<int> used_pivots;
  for (const BoundaryCondition& bc : sys_.bcs) {
    if (bc.kind != BoundaryCondition::Kind::Rate) continue;
    for (const ParamSym& psym : bc.rate.param_syms())
      if (psym.name != "t" && !sp.find_param(psym.name))
        throw SimError("unknown parameter in boundary rate: " + psym.name);
    Constraint con;
    con.node = bc.face == 0 ? 0 : grid_.n - 1;
    con.rate_row = field_slot_.at(bc.field) * grid_.n + con.node;
    con.rate = bc.rate;

    std::vector<double> response(ns_, 0.0);
    for (int probe = 0; probe < 2; ++probe) {
      Eigen::VectorXd y(size());
      for (int k = 0; k < size(); ++k) y(k) = dist(gen);
      for (int s = 0; s < ns_; ++s) {
        const int j = s * grid_.n + con.node;
        const double delta = 1e-6 * (1.0 + std::abs(y(j)));
        Eigen::VectorXd yp = y, ym = y;
        yp(j) += delta;
        ym(j) -= delta;
        const double dv = (natural_rate(yp, 0.0)(con.rate_row) -
                           natural_rate(ym, 0.0)(con.rate_row)) /
                          (2.0 * delta);
        response[s] = std::max(response[s], std::abs(dv));
      }
    }
    const double top =
        *std::max_element(response.begin(), response.end());
    int pivot = -1, hits = 0;
    for (int s = 0; s < ns_; ++s)
      if (response[s] > 1e-9 && response[s] > 1e-6 * top) {
        pivot = s;
        ++hits;
      }
    if (hits == 0)
      throw SimError(
          "no state couples to the prescribed rate at the boundary node");
    if (hits > 1)
      throw SimError("ambiguous boundary pivot: several states couple to "
                     "the prescribed rate at the boundary node");
    con.pivot_row = pivot * grid_.n + con.node;
    if (!used_pivots.insert(con.pivot_row).second)
      throw SimError("boundary conditions compete for the same pivot row");
    constraints_.push_back(con);
  }
}

std::vector<Eigen::VectorXd> DiscreteModel::split(
    const Eigen::VectorXd& y) const {
  std::vector<Eigen::VectorXd> f;
  f.reserve(ns_);
  for (int s = 0; s < ns_; ++s)
    f.push_back(y.segment(s * grid_.n, grid_.n));
  return f;
}

double DiscreteModel::eval_nodal(const Expr& e, int i,
                                 const std::vector<Eigen::VectorXd>& f,
                                 const std::vector<Eigen::VectorXd>& df,
                                 double t) const {
  EvalPoint pt;
  pt.params = params_;
  pt.params["t"] = t;
  pt.coords[Coordinate::independent(0)] = grid_.node[i];
  for (int s = 0; s < ns_; ++s) {
    pt.coords[Coordinate::dependent(state_field_[s])] = f[s](i);
    pt.coords[Coordinate::derivative(state_field_[s], {0})] = df[s](i);
  }
  return eval_numeric(e, pt);
}

Eigen::VectorXd DiscreteModel::nodal_state(
    const std::vector<Expr>& ic) const {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(size());
  if (ic.empty()) return y;
  if (static_cast<int>(ic.size()) != ns_)
    throw SimError("expected one initial expression per state");
  for (int s = 0; s < ns_; ++s) {
    for (const Coordinate& c : ic[s].coordinates())
      if (c.kind != Coordinate::Kind::Independent)
        throw SimError("initial data depend on the spatial coordinate only");
    for (const ParamSym& ps : ic[s].param_syms())
      if (!sys_.space.find_param(ps.name))
        throw SimError("unknown parameter in initial data: " + ps.name);
    EvalPoint pt;
    pt.params = params_;
    for (int i = 0; i < grid_.n; ++i) {
      pt.coords[Coordinate::independent(0)] = grid_.node[i];
      y(s * grid_.n + i) = eval_numeric(ic[s], pt);
    }
  }
  return y;
}

double DiscreteModel::hamiltonian(const Eigen::VectorXd& y) const {
  const auto f = split(y);
  std::vector<Eigen::VectorXd> df;
  df.reserve(ns_);
  for (int s = 0; s < ns_; ++s) df.push_back(grid_.D * f[s]);
  double H = 0.0;
  for (int i = 0; i < grid_.n; ++i)
    H += grid_.quad(i) * eval_nodal(sys_.hamiltonian, i, f, df, 0.0);
  return H;
}

Eigen::VectorXd DiscreteModel::efforts(const Eigen::VectorXd& y) const {
  const auto f = split(y);
  std::vector<Eigen::VectorXd> df;
  df.reserve(ns_);
  for (int s = 0; s < ns_; ++s) df.push_back(grid_.D * f[s]);
  Eigen::VectorXd e(size());
  Eigen::VectorXd gx(grid_.n), gj(grid_.n);
  for (int s = 0; s < ns_; ++s) {
    for (int i = 0; i < grid_.n; ++i) {
      gx(i) = eval_nodal(dH_dx_[s], i, f, df, 0.0);
      gj(i) = eval_nodal(dH_djet_[s], i, f, df, 0.0);
    }
    e.segment(s * grid_.n, grid_.n) = gx + grid_.adjoint_apply(gj);
  }
  return e;
}

Eigen::VectorXd DiscreteModel::input_nodal(const std::vector<Expr>& input,
                                           int j, double t) const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(grid_.n);
  if (input.empty()) return u;
  EvalPoint pt;
  pt.params = params_;
  pt.params["t"] = t;
  for (int i = 0; i < grid_.n; ++i) {
    pt.coords[Coordinate::independent(0)] = grid_.node[i];
    u(i) = eval_numeric(input.at(j), pt);
  }
  return u;
}

Eigen::VectorXd DiscreteModel::natural_rate(
    const Eigen::VectorXd& y, double t,
    const std::vector<Expr>& input) const {
  const Eigen::VectorXd e = efforts(y);
  const int n = grid_.n;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(size());
  const auto apply = [&](const TermOp& op, const Eigen::VectorXd& src) {
    Eigen::VectorXd contrib;
    switch (op.form) {
      case OpTerm::Form::K0:
        contrib = op.c.cwiseProduct(src);
        break;
      case OpTerm::Form::FirstOrder:
        contrib = op.c.cwiseProduct(grid_.D * src);
        break;
      case OpTerm::Form::SecondOrder:
        contrib = -grid_.adjoint_apply(op.c.cwiseProduct(grid_.D * src));
        break;
    }
    v.segment(op.out * n, n) += op.sign * contrib;
  };
  for (const TermOp& op : jterms_) apply(op, e.segment(op.in * n, n));
  for (const TermOp& op : rterms_) apply(op, e.segment(op.in * n, n));
  if (!gterms_.empty()) {
    std::vector<Eigen::VectorXd> u;
    for (int j = 0; j < sys_.space.input_count(); ++j)
      u.push_back(input_nodal(input, j, t));
    for (const TermOp& op : gterms_) apply(op, u.at(op.in));
  }
  return v;
}

double DiscreteModel::rate_value(const Constraint& c, double t) const {
  EvalPoint pt;
  pt.params = params_;
  pt.params["t"] = t;
  return eval_numeric(c.rate, pt);
}

Eigen::VectorXd DiscreteModel::scheme_residual(
    const Eigen::VectorXd& z, const Eigen::VectorXd& y, double t_mid,
    double dt, const std::vector<Expr>& input) const {
  const Eigen::VectorXd F = natural_rate(z, t_mid, input);
  Eigen::VectorXd r = 2.0 * (z - y) - dt * F;
  for (const Constraint& c : constraints_)
    r(c.pivot_row) = F(c.rate_row) - rate_value(c, t_mid);
  return r;
}

void DiscreteModel::check_inputs(const std::vector<Expr>& input) const {
  if (input.empty()) return;
  if (static_cast<int>(input.size()) != sys_.space.input_count())
    throw SimError("expected one input signal per input field");
  for (const Expr& e : input) {
    for (const Coordinate& c : e.coordinates())
      if (c.kind != Coordinate::Kind::Independent)
        throw SimError(
            "input signals depend on the spatial coordinate and t only");
    for (const ParamSym& s : e.param_syms())
      if (s.name != "t" && !sys_.space.find_param(s.name))
        throw SimError("unknown parameter in input signal: " + s.name);
  }
}

SimResult DiscreteModel::run(const Eigen::VectorXd& y0,
                             const SimOptions& opt) const {
  if (y0.size() != size())
    throw SimError("initial state has the wrong length");
  if (!(opt.dt > 0.0)) throw SimError("dt must be positive");
  if (opt.steps < 1) throw SimError("need at least one step");
  if (opt.stride < 1) throw SimError("stride must be positive");
  check_inputs(opt.input);
  const int n = grid_.n;
  const int m = size();

  // Affine fast path: probe the scheme residual columnwise, then verify
  // the linear model at fresh states and a second time before trusting
  // a single factorization for the whole run.
  bool affine = symbolically_affine_;
  Eigen::MatrixXd M;
  Eigen::FullPivLU<Eigen::MatrixXd> lu;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m);
  if (affine) {
    const double t1 = opt.t0 + 0.5 * opt.dt;
    const Eigen::VectorXd base =
        scheme_residual(zero, zero, t1, opt.dt, opt.input);
    M.resize(m, m);
    Eigen::VectorXd ej = zero;
    for (int j = 0; j < m; ++j) {
      ej(j) = 1.0;
      M.col(j) = scheme_residual(ej, zero, t1, opt.dt, opt.input) - base;
      ej(j) = 0.0;
    }
    std::mt19937 gen(4242);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 2 && affine; ++trial) {
      Eigen::VectorXd z(m), y(m);
      for (int k = 0; k < m; ++k) {
        z(k) = dist(gen);
        y(k) = dist(gen);
      }
      const double t = opt.t0 + (trial + 0.3) * 1.7 * opt.dt;
      const Eigen::VectorXd lhs =
          scheme_residual(z, y, t, opt.dt, opt.input);
      const Eigen::VectorXd rhs =
          M * z + scheme_residual(zero, y, t, opt.dt, opt.input);
      if ((lhs - rhs).lpNorm<Eigen::Infinity>() >
          1e-8 * (1.0 + lhs.lpNorm<Eigen::Infinity>()))
        affine = false;
    }
    if (affine) {
      lu.compute(M);
      if (!lu.isInvertible())
        throw SimError(
            "singular midpoint system; check the boundary pivots");
    }
  }

  SimResult res;
  res.used_affine = affine;
  Eigen::VectorXd y = y0;
  double H_prev = hamiltonian(y);
  double t_prev = opt.t0;
  LedgerRow first;
  first.t = opt.t0;
  first.H = H_prev;
  res.rows.push_back(first);
  if (opt.record_states) res.states.push_back(y);

  std::map<int, Eigen::VectorXd> de_cache;
  for (int k = 1; k <= opt.steps; ++k) {
    const double t_mid = opt.t0 + (k - 0.5) * opt.dt;
    Eigen::VectorXd z;
    if (affine) {
      z = lu.solve(-scheme_residual(zero, y, t_mid, opt.dt, opt.input));
    } else {
      z = y;
      bool converged = false;
      double last_norm = 0.0;
      int it = 0;
      for (; it < kNewtonMax; ++it) {
        const Eigen::VectorXd r =
            scheme_residual(z, y, t_mid, opt.dt, opt.input);
        last_norm = r.lpNorm<Eigen::Infinity>();
        if (last_norm <=
            kNewtonTol * std::max(1.0, y.lpNorm<Eigen::Infinity>())) {
          converged = true;
          break;
        }
        Eigen::MatrixXd Jm(m, m);
        Eigen::VectorXd zp = z;
        for (int j = 0; j < m; ++j) {
          const double delta = 1e-7 * (1.0 + std::abs(z(j)));
          zp(j) = z(j) + delta;
          Jm.col(j) =
              (scheme_residual(zp, y, t_mid, opt.dt, opt.input) - r) / delta;
          zp(j) = z(j);
        }
        z -= Jm.partialPivLu().solve(r);
      }
      if (!converged) {
        std::ostringstream os;
        os << "the midpoint solve did not converge" << at_time(t_mid)
           << " (residual " << last_norm << ")";
        throw SimError(os.str());
      }
      res.max_newton_iters = std::max(res.max_newton_iters, it);
    }
    const Eigen::VectorXd ynext = 2.0 * z - y;
    if (!ynext.allFinite())
      throw SimError("non-finite state" + at_time(opt.t0 + k * opt.dt));

    if (k % opt.stride == 0 || k == opt.steps) {
      const double t_k = opt.t0 + k * opt.dt;
      LedgerRow row;
      row.t = t_k;
      row.H = hamiltonian(ynext);
      row.dHdt = (row.H - H_prev) / (t_k - t_prev);

      const Eigen::VectorXd e = efforts(z);
      de_cache.clear();
      const auto de = [&](int s) -> const Eigen::VectorXd& {
        auto it2 = de_cache.find(s);
        if (it2 == de_cache.end())
          it2 = de_cache
                    .emplace(s, Eigen::VectorXd(grid_.D *
                                                e.segment(s * n, n)))
                    .first;
        return it2->second;
      };

      double Q = 0.0;
      for (const TermOp& op : rterms_) {
        if (op.form == OpTerm::Form::K0)
          Q += (e.segment(op.out * n, n).array() * grid_.quad.array() *
                op.c.array() * e.segment(op.in * n, n).array())
                   .sum();
        else
          Q -= (de(op.out).array() * grid_.quad.array() * op.c.array() *
                de(op.in).array())
                   .sum();
      }

      double dport = 0.0;
      if (!gterms_.empty()) {
        std::vector<Eigen::VectorXd> u, yout;
        for (int j = 0; j < sys_.space.input_count(); ++j) {
          u.push_back(input_nodal(opt.input, j, t_mid));
          yout.push_back(Eigen::VectorXd::Zero(n));
        }
        for (const TermOp& op : gterms_)
          yout.at(op.in) += op.c.cwiseProduct(e.segment(op.out * n, n));
        for (std::size_t j = 0; j < u.size(); ++j)
          dport +=
              (grid_.quad.array() * u[j].array() * yout[j].array()).sum();
      }

      // The boundary column reports the end-node value of the boundary
      // density: realized rates paired with the jet gradients, plus
      // the face flux of each second-order dissipation term.
      const Eigen::VectorXd rate = (ynext - y) / opt.dt;
      const auto fz = split(z);
      std::vector<Eigen::VectorXd> dfz;
      dfz.reserve(ns_);
      for (int s = 0; s < ns_; ++s) dfz.push_back(grid_.D * fz[s]);
      double bp = 0.0;
      for (int s = 0; s < ns_; ++s) {
        const double gl = eval_nodal(dH_djet_[s], 0, fz, dfz, t_mid);
        const double gr = eval_nodal(dH_djet_[s], n - 1, fz, dfz, t_mid);
        bp += rate(s * n + n - 1) * gr - rate(s * n) * gl;
      }
      for (const TermOp& op : rterms_)
        if (op.form == OpTerm::Form::SecondOrder) {
          const Eigen::VectorXd& dei = de(op.in);
          bp -= e(op.out * n + n - 1) * op.c(n - 1) * dei(n - 1);
          bp += e(op.out * n) * op.c(0) * dei(0);
        }

      row.dissipation = Q;
      row.domain_port = dport;
      row.boundary_port = bp;
      row.residual = row.dHdt - (-Q + dport + bp);
      res.rows.push_back(row);
      if (opt.record_states) res.states.push_back(ynext);
      H_prev = row.H;
      t_prev = t_k;
    }
    y = ynext;
  }
  res.final_state = y;
  return res;
}

namespace {
void append_g17(std::string& out, double v) {
  if (v == 0.0) v = 0.0;  // fold negative zero into "0"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}
}  // namespace

std::string ledger_csv(const std::vector<LedgerRow>& rows) {
  std::string out = "t,H,dHdt,dissipation,domain_port,boundary_port,residual\n";
  for (const LedgerRow& r : rows) {
    append_g17(out, r.t);
    out += ',';
    append_g17(out, r.H);
    out += ',';
    append_g17(out, r.dHdt);
    out += ',';
    append_g17(out, r.dissipation);
    out += ',';
    append_g17(out, r.domain_port);
    out += ',';
    append_g17(out, r.boundary_port);
    out += ',';
    append_g17(out, r.residual);
    out += '\n';
  }
  return out;
}

std::string trajectory_csv(const DiscreteModel& model, const SimResult& res) {
  if (res.states.size() != res.rows.size())
    throw SimError("trajectory output needs a run made with record_states");
  const int n = model.grid().n;
  std::string out = "t";
  for (int s = 0; s < model.state_count(); ++s) {
    const std::string& name = model.sys_.space.field_name(model.state_field_[s]);
    for (int i = 0; i < n; ++i) {
      out += ',';
      out += name;
      out += '[';
      out += std::to_string(i);
      out += ']';
    }
  }
  out += '\n';
  for (std::size_t k = 0; k < res.rows.size(); ++k) {
    append_g17(out, res.rows[k].t);
    const Eigen::VectorXd& y = res.states[k];
    for (Eigen::Index j = 0; j < y.size(); ++j) {
      out += ',';
      append_g17(out, y(j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace phw
