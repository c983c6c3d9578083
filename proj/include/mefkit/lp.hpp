#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace mefkit::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, Equal, GreaterEqual };

struct Term {
  int var;
  double coef;
};

struct Row {
  std::vector<Term> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
  std::string name;
};

/// minimize c'x  s.t.  rows  (a'x {<=,=,>=} b),  lower <= x <= upper.
///
/// Variables default to [0, +inf).
class LinearProgram {
 public:
  int add_variable(double cost, double lower = 0.0, double upper = kInf, std::string name = {});
  int add_row(std::vector<Term> terms, Sense sense, double rhs, std::string name = {});

  void set_cost(int var, double cost) { cost_.at(var) = cost; }
  void set_bounds(int var, double lower, double upper);
  void set_rhs(int row, double rhs) { rows_.at(row).rhs = rhs; }

  int num_variables() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  double cost(int var) const { return cost_[var]; }
  double lower(int var) const { return lower_[var]; }
  double upper(int var) const { return upper_[var]; }
  const std::string& variable_name(int var) const { return var_names_[var]; }
  const Row& row(int r) const { return rows_[r]; }
  const std::vector<Row>& rows() const { return rows_; }

  /// Throws std::invalid_argument on dangling references, non-finite rhs or
  /// crossed bounds.
  void validate() const;

  /// Plain-text dump: objective, one line per row, one line per bound.
  /// Format is documented in docs/lp_dump_format.md.
  std::string dump() const;

  /// Row activity a'x for every row.
  std::vector<double> row_activity(const std::vector<double>& x) const;

 private:
  std::vector<double> cost_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<std::string> var_names_;
  std::vector<Row> rows_;
};

enum class Status { Optimal, Infeasible, Unbounded };

const char* to_string(Status status);

/// Dual sign convention: duals[i] = d(objective)/d(rhs_i). Under
/// minimization this makes duals of binding >= rows non-negative and of
/// binding <= rows non-positive. reduced_costs[j] = c_j - a_j' duals.
struct LpSolution {
  Status status = Status::Infeasible;
  std::vector<double> x;
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  double objective_value = 0.0;
  long iterations = 0;
};

/// Raised on numerical breakdown; never a silent wrong answer.
class LpError : public std::runtime_error {
 public:
  LpError(const std::string& what, long pivots)
      : std::runtime_error(what + " after " + std::to_string(pivots) + " pivots"), pivots_(pivots) {}
  long pivots() const { return pivots_; }

 private:
  long pivots_;
};

struct SolverOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  long max_iterations = 200000;
  int refactor_interval = 64;
  // Consecutive non-improving pivots before switching to Bland's rule.
  int bland_after = 50;
};

/// Bounded-variable revised simplex (primal with composite phase 1, and dual
/// simplex for dual-feasible starts) on a dense LU of the basis with
/// product-form updates.
///
/// The solver is a value type: copying it copies the current basis and its
/// factorization, so a solved model can be cloned, edited with set_rhs() and
/// re-solved from the optimal basis.
class SimplexSolver {
 public:
  explicit SimplexSolver(LinearProgram lp, SolverOptions options = {});

  LpSolution solve();

  /// Changes a row's right-hand side and keeps the current basis.
  void set_rhs(int row, double rhs);

  const LinearProgram& problem() const { return lp_; }

 private:
  enum class VarState : unsigned char { Basic, AtLower, AtUpper, AtZero };

  struct Eta {
    int row;
    Eigen::VectorXd column;
  };

  int n_ = 0;  // structurals
  int m_ = 0;  // rows (one logical each)
  LinearProgram lp_;
  SolverOptions opt_;

  // Structural columns, compressed by column.
  std::vector<int> col_start_;
  std::vector<int> col_row_;
  std::vector<double> col_val_;

  std::vector<double> cost_;   // n + m, logicals cost 0
  std::vector<double> lower_;  // n + m
  std::vector<double> upper_;  // n + m
  std::vector<double> x_;      // n + m
  std::vector<VarState> state_;
  std::vector<int> head_;      // basis position -> variable
  std::vector<int> position_;  // variable -> basis position or -1

  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  std::vector<Eta> etas_;
  bool factored_ = false;
  long iterations_ = 0;

  void set_logical_bounds(int row);
  void slack_basis();
  void place_nonbasic(int j);
  bool refactor();
  void recompute_basics();
  Eigen::VectorXd ftran_column(int j) const;
  Eigen::VectorXd ftran(Eigen::VectorXd v) const;
  Eigen::VectorXd btran(Eigen::VectorXd v) const;
  double column_dot(int j, const Eigen::VectorXd& y) const;
  double infeasibility(int j) const;
  double max_primal_infeasibility() const;
  bool dual_feasible(const Eigen::VectorXd& y) const;
  Eigen::VectorXd basic_costs(bool phase1) const;
  void pivot(int r, int q, const Eigen::VectorXd& alpha);

  enum class Outcome { Optimal, Infeasible, Unbounded, Stalled };
  Outcome run_primal();
  Outcome run_dual();
  LpSolution extract(Status status);
};

/// One-shot convenience wrapper.
LpSolution solve(const LinearProgram& lp, const SolverOptions& options = {});

}  // namespace mefkit::lp
