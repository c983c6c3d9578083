#include "mefkit/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace mefkit::lp {

int LinearProgram::add_variable(double cost, double lower, double upper, std::string name) {
  cost_.push_back(cost);
  lower_.push_back(lower);
  upper_.push_back(upper);
  var_names_.push_back(std::move(name));
  return static_cast<int>(cost_.size()) - 1;
}

int LinearProgram::add_row(std::vector<Term> terms, Sense sense, double rhs, std::string name) {
  rows_.push_back(Row{std::move(terms), sense, rhs, std::move(name)});
  return static_cast<int>(rows_.size()) - 1;
}

void LinearProgram::set_bounds(int var, double lower, double upper) {
  lower_.at(var) = lower;
  upper_.at(var) = upper;
}

void LinearProgram::validate() const {
  const int n = num_variables();
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(cost_[j])) throw std::invalid_argument("non-finite cost on variable " + std::to_string(j));
    if (std::isnan(lower_[j]) || std::isnan(upper_[j]) || lower_[j] > upper_[j] || lower_[j] == kInf ||
        upper_[j] == -kInf) {
      throw std::invalid_argument("invalid bounds on variable " + std::to_string(j));
    }
  }
  for (int i = 0; i < num_rows(); ++i) {
    const Row& r = rows_[i];
    if (!std::isfinite(r.rhs)) throw std::invalid_argument("non-finite rhs on row " + std::to_string(i));
    for (const Term& t : r.terms) {
      if (t.var < 0 || t.var >= n) {
        throw std::invalid_argument("row " + std::to_string(i) + " references undeclared variable " +
                                    std::to_string(t.var));
      }
      if (!std::isfinite(t.coef)) throw std::invalid_argument("non-finite coefficient on row " + std::to_string(i));
    }
  }
}

std::vector<double> LinearProgram::row_activity(const std::vector<double>& x) const {
  std::vector<double> act(rows_.size(), 0.0);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (const Term& t : rows_[i].terms) act[i] += t.coef * x[t.var];
  }
  return act;
}

namespace {

std::string num(double v) {
  if (v == kInf) return "+inf";
  if (v == -kInf) return "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string LinearProgram::dump() const {
  auto vname = [this](int j) { return var_names_[j].empty() ? "x" + std::to_string(j) : var_names_[j]; };
  auto linear = [&](const std::vector<Term>& terms) {
    std::string s;
    for (const Term& t : terms) {
      s += t.coef < 0 ? " - " : " + ";
      s += num(std::abs(t.coef)) + " " + vname(t.var);
    }
    return s.empty() ? std::string(" 0") : s;
  };
  std::ostringstream out;
  out << "\\ vars " << num_variables() << " rows " << num_rows() << "\n";
  out << "MINIMIZE\n obj:";
  std::vector<Term> obj;
  for (int j = 0; j < num_variables(); ++j) {
    if (cost_[j] != 0.0) obj.push_back({j, cost_[j]});
  }
  out << linear(obj) << "\nSUBJECT TO\n";
  for (int i = 0; i < num_rows(); ++i) {
    const Row& r = rows_[i];
    const char* op = r.sense == Sense::LessEqual ? "<=" : r.sense == Sense::Equal ? "=" : ">=";
    out << ' ' << (r.name.empty() ? "r" + std::to_string(i) : r.name) << ':' << linear(r.terms) << ' ' << op << ' '
        << num(r.rhs) << "\n";
  }
  out << "BOUNDS\n";
  for (int j = 0; j < num_variables(); ++j) {
    if (lower_[j] == -kInf && upper_[j] == kInf) {
      out << ' ' << vname(j) << " free\n";
    } else {
      out << ' ' << num(lower_[j]) << " <= " << vname(j) << " <= " << num(upper_[j]) << "\n";
    }
  }
  out << "END\n";
  return out.str();
}

const char* to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

SimplexSolver::SimplexSolver(LinearProgram lp, SolverOptions options) : lp_(std::move(lp)), opt_(options) {
  lp_.validate();
  n_ = lp_.num_variables();
  m_ = lp_.num_rows();

  // Column-wise copy of A, merging duplicate entries within a row.
  std::vector<std::map<int, double>> cols(n_);
  for (int i = 0; i < m_; ++i) {
    for (const Term& t : lp_.row(i).terms) cols[t.var][i] += t.coef;
  }
  col_start_.assign(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) {
    for (const auto& [row, v] : cols[j]) {
      if (v != 0.0) {
        col_row_.push_back(row);
        col_val_.push_back(v);
      }
    }
    col_start_[j + 1] = static_cast<int>(col_row_.size());
  }

  const int total = n_ + m_;
  cost_.assign(total, 0.0);
  lower_.assign(total, 0.0);
  upper_.assign(total, 0.0);
  x_.assign(total, 0.0);
  state_.assign(total, VarState::AtLower);
  for (int j = 0; j < n_; ++j) {
    cost_[j] = lp_.cost(j);
    lower_[j] = lp_.lower(j);
    upper_[j] = lp_.upper(j);
  }
  for (int i = 0; i < m_; ++i) set_logical_bounds(i);
  slack_basis();
}

void SimplexSolver::set_logical_bounds(int row) {
  const Row& r = lp_.row(row);
  const int j = n_ + row;
  switch (r.sense) {
    case Sense::LessEqual:
      lower_[j] = -kInf;
      upper_[j] = r.rhs;
      break;
    case Sense::Equal:
      lower_[j] = r.rhs;
      upper_[j] = r.rhs;
      break;
    case Sense::GreaterEqual:
      lower_[j] = r.rhs;
      upper_[j] = kInf;
      break;
  }
}

void SimplexSolver::place_nonbasic(int j) {
  if (lower_[j] > -kInf) {
    state_[j] = VarState::AtLower;
    x_[j] = lower_[j];
  } else if (upper_[j] < kInf) {
    state_[j] = VarState::AtUpper;
    x_[j] = upper_[j];
  } else {
    state_[j] = VarState::AtZero;
    x_[j] = 0.0;
  }
}

void SimplexSolver::slack_basis() {
  head_.assign(m_, 0);
  position_.assign(n_ + m_, -1);
  for (int j = 0; j < n_; ++j) place_nonbasic(j);
  for (int i = 0; i < m_; ++i) {
    head_[i] = n_ + i;
    position_[n_ + i] = i;
    state_[n_ + i] = VarState::Basic;
  }
  factored_ = false;
}

void SimplexSolver::set_rhs(int row, double rhs) {
  if (!std::isfinite(rhs)) throw std::invalid_argument("non-finite rhs");
  lp_.set_rhs(row, rhs);
  set_logical_bounds(row);
  const int j = n_ + row;
  if (state_[j] == VarState::AtLower) {
    x_[j] = lower_[j];
  } else if (state_[j] == VarState::AtUpper) {
    x_[j] = upper_[j];
  }
}

bool SimplexSolver::refactor() {
  etas_.clear();
  if (m_ == 0) {
    factored_ = true;
    return true;
  }
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(m_, m_);
  for (int k = 0; k < m_; ++k) {
    const int j = head_[k];
    if (j < n_) {
      for (int e = col_start_[j]; e < col_start_[j + 1]; ++e) basis(col_row_[e], k) = col_val_[e];
    } else {
      basis(j - n_, k) = -1.0;
    }
  }
  lu_.compute(basis);
  const auto diag = lu_.matrixLU().diagonal().cwiseAbs();
  const double biggest = std::max(1.0, diag.maxCoeff());
  factored_ = diag.minCoeff() > 1e-11 * biggest;
  return factored_;
}

Eigen::VectorXd SimplexSolver::ftran(Eigen::VectorXd v) const {
  if (m_ == 0) return v;
  v = lu_.solve(v);
  for (const Eta& eta : etas_) {
    const double vr = v[eta.row] / eta.column[eta.row];
    if (vr != 0.0) v.noalias() -= vr * eta.column;
    v[eta.row] = vr;
  }
  return v;
}

Eigen::VectorXd SimplexSolver::btran(Eigen::VectorXd v) const {
  if (m_ == 0) return v;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    const int r = it->row;
    const double dot = v.dot(it->column) - v[r] * it->column[r];
    v[r] = (v[r] - dot) / it->column[r];
  }
  return lu_.transpose().solve(v);
}

Eigen::VectorXd SimplexSolver::ftran_column(int j) const {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(m_);
  if (j < n_) {
    for (int e = col_start_[j]; e < col_start_[j + 1]; ++e) a[col_row_[e]] = col_val_[e];
  } else {
    a[j - n_] = -1.0;
  }
  return ftran(std::move(a));
}

double SimplexSolver::column_dot(int j, const Eigen::VectorXd& y) const {
  if (j >= n_) return -y[j - n_];
  double s = 0.0;
  for (int e = col_start_[j]; e < col_start_[j + 1]; ++e) s += col_val_[e] * y[col_row_[e]];
  return s;
}

void SimplexSolver::recompute_basics() {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
  for (int j = 0; j < n_ + m_; ++j) {
    if (state_[j] == VarState::Basic || x_[j] == 0.0) continue;
    if (j < n_) {
      for (int e = col_start_[j]; e < col_start_[j + 1]; ++e) rhs[col_row_[e]] -= col_val_[e] * x_[j];
    } else {
      rhs[j - n_] += x_[j];
    }
  }
  const Eigen::VectorXd xb = ftran(std::move(rhs));
  for (int k = 0; k < m_; ++k) x_[head_[k]] = xb[k];
}

double SimplexSolver::infeasibility(int j) const {
  const double x = x_[j];
  if (x < lower_[j] - opt_.feasibility_tol * (1.0 + std::abs(lower_[j]))) return lower_[j] - x;
  if (x > upper_[j] + opt_.feasibility_tol * (1.0 + std::abs(upper_[j]))) return x - upper_[j];
  return 0.0;
}

double SimplexSolver::max_primal_infeasibility() const {
  double worst = 0.0;
  for (int k = 0; k < m_; ++k) worst = std::max(worst, infeasibility(head_[k]));
  return worst;
}

Eigen::VectorXd SimplexSolver::basic_costs(bool phase1) const {
  Eigen::VectorXd c(m_);
  for (int k = 0; k < m_; ++k) {
    const int j = head_[k];
    if (!phase1) {
      c[k] = cost_[j];
    } else if (infeasibility(j) == 0.0) {
      c[k] = 0.0;
    } else {
      c[k] = x_[j] < lower_[j] ? -1.0 : 1.0;
    }
  }
  return c;
}

bool SimplexSolver::dual_feasible(const Eigen::VectorXd& y) const {
  const double tol = opt_.optimality_tol;
  for (int j = 0; j < n_ + m_; ++j) {
    if (state_[j] == VarState::Basic || lower_[j] == upper_[j]) continue;
    const double d = cost_[j] - column_dot(j, y);
    if (state_[j] == VarState::AtLower && d < -tol) return false;
    if (state_[j] == VarState::AtUpper && d > tol) return false;
    if (state_[j] == VarState::AtZero && std::abs(d) > tol) return false;
  }
  return true;
}

void SimplexSolver::pivot(int r, int q, const Eigen::VectorXd& alpha) {
  const int p = head_[r];
  position_[p] = -1;
  head_[r] = q;
  position_[q] = r;
  state_[q] = VarState::Basic;
  etas_.push_back(Eta{r, alpha});
  ++iterations_;
}

SimplexSolver::Outcome SimplexSolver::run_primal() {
  int degenerate_run = 0;
  bool bland = false;
  while (true) {
    if (iterations_ >= opt_.max_iterations) throw LpError("iteration limit reached", iterations_);
    if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) {
      if (!refactor()) throw LpError("basis became singular", iterations_);
      recompute_basics();
    }
    const bool phase1 = max_primal_infeasibility() > 0.0;
    const Eigen::VectorXd y = btran(basic_costs(phase1));

    // Pricing: Dantzig (largest |d_j|, lowest index on ties) or Bland.
    int q = -1;
    int dir = 0;
    double best = 0.0;
    for (int j = 0; j < n_ + m_; ++j) {
      if (state_[j] == VarState::Basic || lower_[j] == upper_[j]) continue;
      const double d = (phase1 ? 0.0 : cost_[j]) - column_dot(j, y);
      int want = 0;
      if (state_[j] == VarState::AtLower && d < -opt_.optimality_tol) want = 1;
      else if (state_[j] == VarState::AtUpper && d > opt_.optimality_tol) want = -1;
      else if (state_[j] == VarState::AtZero && std::abs(d) > opt_.optimality_tol) want = d < 0 ? 1 : -1;
      if (want == 0) continue;
      if (bland) {
        q = j;
        dir = want;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        q = j;
        dir = want;
      }
    }
    if (q < 0) return phase1 ? Outcome::Infeasible : Outcome::Optimal;

    const Eigen::VectorXd alpha = ftran_column(q);
    const double tol = opt_.feasibility_tol;

    // Ratio test (Harris two-pass unless in Bland mode).
    struct Candidate {
      int pos;
      double exact;
      bool to_upper;
    };
    std::vector<Candidate> cands;
    double theta_max = kInf;
    for (int k = 0; k < m_; ++k) {
      if (std::abs(alpha[k]) <= opt_.pivot_tol) continue;
      const int j = head_[k];
      const double rate = -dir * alpha[k];
      const double xj = x_[j];
      const double tl = tol * (1.0 + std::abs(lower_[j]));
      const double tu = tol * (1.0 + std::abs(upper_[j]));
      double bound;
      bool to_upper;
      double slack_tol;
      if (rate < 0.0) {
        if (phase1 && xj > upper_[j] + tu) {
          bound = upper_[j];
          to_upper = true;
          slack_tol = tu;
        } else if (lower_[j] > -kInf && xj >= lower_[j] - tl) {
          bound = lower_[j];
          to_upper = false;
          slack_tol = tl;
        } else {
          continue;
        }
        const double exact = (xj - bound) / -rate;
        cands.push_back({k, std::max(exact, 0.0), to_upper});
        theta_max = std::min(theta_max, (xj - bound + slack_tol) / -rate);
      } else {
        if (phase1 && xj < lower_[j] - tl) {
          bound = lower_[j];
          to_upper = false;
          slack_tol = tl;
        } else if (upper_[j] < kInf && xj <= upper_[j] + tu) {
          bound = upper_[j];
          to_upper = true;
          slack_tol = tu;
        } else {
          continue;
        }
        const double exact = (bound - xj) / rate;
        cands.push_back({k, std::max(exact, 0.0), to_upper});
        theta_max = std::min(theta_max, (bound - xj + slack_tol) / rate);
      }
    }

    int leave = -1;
    bool leave_upper = false;
    double theta = kInf;
    if (bland) {
      for (const auto& c : cands) {
        if (c.exact < theta - 1e-12 || (c.exact <= theta + 1e-12 && leave >= 0 && head_[c.pos] < head_[leave])) {
          theta = std::min(theta, c.exact);
          leave = c.pos;
          leave_upper = c.to_upper;
        }
      }
    } else {
      double best_alpha = 0.0;
      for (const auto& c : cands) {
        if (c.exact > theta_max) continue;
        const double a = std::abs(alpha[c.pos]);
        if (a > best_alpha || (a == best_alpha && leave >= 0 && head_[c.pos] < head_[leave])) {
          best_alpha = a;
          leave = c.pos;
          leave_upper = c.to_upper;
          theta = c.exact;
        }
      }
    }

    const double span = upper_[q] - lower_[q];
    const bool flip = span < kInf && (leave < 0 || span <= theta);
    if (flip) theta = span;
    if (!flip && leave < 0) {
      if (phase1) throw LpError("phase 1 ratio test found no blocking variable", iterations_);
      return Outcome::Unbounded;
    }

    if (theta != 0.0) {
      x_[q] += dir * theta;
      for (int k = 0; k < m_; ++k) {
        if (alpha[k] != 0.0) x_[head_[k]] -= dir * theta * alpha[k];
      }
    }
    if (theta <= 1e-12) {
      if (++degenerate_run > opt_.bland_after) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }

    if (flip) {
      state_[q] = dir > 0 ? VarState::AtUpper : VarState::AtLower;
      x_[q] = dir > 0 ? upper_[q] : lower_[q];
      ++iterations_;
      continue;
    }
    const int p = head_[leave];
    const bool fixed = lower_[p] == upper_[p];
    x_[p] = leave_upper ? upper_[p] : lower_[p];
    state_[p] = (leave_upper && !fixed) ? VarState::AtUpper : VarState::AtLower;
    pivot(leave, q, alpha);
  }
}

SimplexSolver::Outcome SimplexSolver::run_dual() {
  const long limit = iterations_ + 20L * (n_ + m_) + 1000;
  while (true) {
    if (iterations_ >= opt_.max_iterations || iterations_ >= limit) return Outcome::Stalled;
    if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) {
      if (!refactor()) throw LpError("basis became singular", iterations_);
      recompute_basics();
    }
    const Eigen::VectorXd y = btran(basic_costs(false));
    if (!dual_feasible(y)) return Outcome::Stalled;

    int r = -1;
    double worst = 0.0;
    for (int k = 0; k < m_; ++k) {
      const double v = infeasibility(head_[k]);
      if (v > worst) {
        worst = v;
        r = k;
      }
    }
    if (r < 0) return Outcome::Optimal;

    const int p = head_[r];
    const bool below = x_[p] < lower_[p];
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(m_);
    unit[r] = 1.0;
    const Eigen::VectorXd rho = btran(std::move(unit));

    struct Candidate {
      int var;
      double ratio;
      double alpha;
    };
    std::vector<Candidate> cands;
    double theta_max = kInf;
    for (int j = 0; j < n_ + m_; ++j) {
      if (state_[j] == VarState::Basic || lower_[j] == upper_[j]) continue;
      const double a = column_dot(j, rho);
      if (std::abs(a) <= opt_.pivot_tol) continue;
      const double d = cost_[j] - column_dot(j, y);
      double slack;
      if (state_[j] == VarState::AtLower) {
        if (below ? !(a < 0.0) : !(a > 0.0)) continue;
        slack = std::max(d, 0.0);
      } else if (state_[j] == VarState::AtUpper) {
        if (below ? !(a > 0.0) : !(a < 0.0)) continue;
        slack = std::max(-d, 0.0);
      } else {
        slack = 0.0;
      }
      cands.push_back({j, slack / std::abs(a), a});
      theta_max = std::min(theta_max, (slack + opt_.optimality_tol) / std::abs(a));
    }
    if (cands.empty()) return Outcome::Infeasible;

    int q = -1;
    double best_alpha = 0.0;
    for (const auto& c : cands) {
      if (c.ratio > theta_max) continue;
      if (std::abs(c.alpha) > best_alpha) {
        best_alpha = std::abs(c.alpha);
        q = c.var;
      }
    }
    const Eigen::VectorXd alpha = ftran_column(q);
    if (std::abs(alpha[r]) <= opt_.pivot_tol) {
      if (etas_.empty()) throw LpError("dual pivot element vanished", iterations_);
      if (!refactor()) throw LpError("basis became singular", iterations_);
      recompute_basics();
      continue;
    }
    const double bound = below ? lower_[p] : upper_[p];
    const double theta = (x_[p] - bound) / alpha[r];
    x_[q] += theta;
    for (int k = 0; k < m_; ++k) {
      if (alpha[k] != 0.0) x_[head_[k]] -= theta * alpha[k];
    }
    x_[p] = bound;
    state_[p] = (below || lower_[p] == upper_[p]) ? VarState::AtLower : VarState::AtUpper;
    pivot(r, q, alpha);
  }
}

LpSolution SimplexSolver::extract(Status status) {
  LpSolution sol;
  sol.status = status;
  if (status != Status::Optimal) return sol;
  sol.x.assign(x_.begin(), x_.begin() + n_);
  const Eigen::VectorXd y = btran(basic_costs(false));
  sol.duals.assign(y.data(), y.data() + m_);
  sol.reduced_costs.resize(n_);
  double obj = 0.0;
  for (int j = 0; j < n_; ++j) {
    obj += cost_[j] * x_[j];
    sol.reduced_costs[j] = state_[j] == VarState::Basic ? 0.0 : cost_[j] - column_dot(j, y);
  }
  sol.objective_value = obj;
  return sol;
}

LpSolution SimplexSolver::solve() {
  const long start_iterations = iterations_;
  if (!factored_ && !refactor()) {
    slack_basis();
    if (!refactor()) throw LpError("slack basis could not be factorized", iterations_);
  }
  recompute_basics();

  for (int attempt = 0; attempt < 4; ++attempt) {
    if (max_primal_infeasibility() > 0.0 && dual_feasible(btran(basic_costs(false)))) {
      if (run_dual() == Outcome::Infeasible) {
        // Confirm with phase 1 before reporting; dual rays are tolerance-sensitive.
        if (run_primal() == Outcome::Infeasible) {
          LpSolution sol = extract(Status::Infeasible);
          sol.iterations = iterations_ - start_iterations;
          return sol;
        }
      }
    }
    const Outcome out = run_primal();
    if (out == Outcome::Infeasible || out == Outcome::Unbounded) {
      LpSolution sol = extract(out == Outcome::Infeasible ? Status::Infeasible : Status::Unbounded);
      sol.iterations = iterations_ - start_iterations;
      return sol;
    }
    if (!refactor()) throw LpError("optimal basis is singular", iterations_);
    recompute_basics();
    if (max_primal_infeasibility() == 0.0 && dual_feasible(btran(basic_costs(false)))) {
      LpSolution sol = extract(Status::Optimal);
      sol.iterations = iterations_ - start_iterations;
      return sol;
    }
  }
  throw LpError("no numerically clean optimum", iterations_);
}

LpSolution solve(const LinearProgram& lp, const SolverOptions& options) {
  SimplexSolver solver(lp, options);
  return solver.solve();
}

}  // namespace mefkit::lp
