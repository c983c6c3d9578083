#pragma once

#include "mefkit/lp.hpp"
#include "mefkit/scenario.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

namespace mefkit {

/// Inter-window state: mid-term storage levels (MWh, indexed like
/// Scenario::storages; long-term entries are 0) and online capacity
/// (MW, indexed like Scenario::clusters).
struct CarriedState {
  std::vector<double> storage_level;
  std::vector<double> online;

  friend bool operator==(const CarriedState&, const CarriedState&) = default;
};

/// Storages at 50 % of energy capacity unless initial_level is set; P^ON at 0.
CarriedState initial_state(const Scenario& scenario);

/// Largest absolute difference between two states of the same scenario.
double state_distance(const CarriedState& a, const CarriedState& b);

/// Rolling window for day `day` (0-based). The nominal window spans days
/// day-1..day+1; the lead day is already fixed by the carried state, so the
/// optimized hours start at the middle day and run through the lookahead day
/// (truncated at the end of the horizon).
struct DispatchWindow {
  std::size_t day = 0;
  std::size_t first_hour = 0;  // first optimized hour (start of middle day)
  std::size_t keep_end = 0;    // one past the last kept hour
  std::size_t end_hour = 0;    // one past the last optimized hour
  CarriedState carried;

  std::size_t hours() const { return end_hour - first_hour; }
};

DispatchWindow make_window(const Scenario& scenario, std::size_t day, CarriedState carried);

/// Extra demand on one (node, hour) balance row.
struct Perturbation {
  std::size_t hour = 0;  // global hour index
  double delta = 1.0;    // MWh
  int node = -1;         // -1: scenario target node
};

/// LP of one window plus the variable/row maps needed to read it back.
struct WindowModel {
  lp::LinearProgram lp;
  std::size_t first_hour = 0;
  std::size_t hours = 0;
  // [unit][t] variable indices; -1 where the variable is not modelled.
  std::vector<std::vector<int>> gen, online, started;
  std::vector<std::vector<int>> storage_gen, storage_charge, storage_level;
  std::vector<std::vector<int>> shed, flow;
  std::vector<std::vector<int>> balance_row;  // [node][t]
  // Constant part of the objective (curtailment cost of all available
  // renewable feed-in; the LP carries the avoided part on GEN).
  double cost_offset = 0.0;
};

class DispatchError : public std::runtime_error {
 public:
  DispatchError(std::size_t day, const std::string& what)
      : std::runtime_error("day " + std::to_string(day) + ": " + what), day_(day) {}
  std::size_t day() const { return day_; }

 private:
  std::size_t day_;
};

WindowModel build_window_model(const Scenario& scenario, const DispatchWindow& window,
                               const std::optional<Perturbation>& perturbation = std::nullopt);

lp::LinearProgram build_window_lp(const Scenario& scenario, const DispatchWindow& window,
                                  const std::optional<Perturbation>& perturbation = std::nullopt);

/// Hourly year results. Matrices are [unit][hour].
struct DispatchSolution {
  Timestamp start{};
  std::size_t hours = 0;
  std::vector<std::vector<double>> gen, online, started, curtailed;
  std::vector<std::vector<double>> storage_gen, storage_charge, storage_level;
  std::vector<std::vector<double>> shed, flow;
  std::vector<std::vector<double>> price;  // [node][hour], balance-row duals in EUR/MWh
  std::vector<double> emissions;           // t CO2 per hour, all nodes
  std::vector<double> cost;                // EUR per hour incl. penalties
  std::vector<CarriedState> day_state;     // state at the start of each day, plus the end state
};

/// Solved window restricted to its kept hours.
struct WindowResult {
  DispatchWindow window;
  lp::LpSolution lp;
  double kept_emissions = 0.0;
  CarriedState end_state;  // at keep_end
};

/// Solves one window and copies its kept hours into `out` when non-null.
WindowResult solve_window(const Scenario& scenario, const DispatchWindow& window, const WindowModel& model,
                          lp::SimplexSolver& solver, DispatchSolution* out = nullptr);

/// Sizes a solution for the scenario horizon with all values zero.
DispatchSolution empty_solution(const Scenario& scenario);

DispatchSolution run_year(const Scenario& scenario, const std::optional<Perturbation>& perturbation = std::nullopt);

TimeSeries emissions_series(const DispatchSolution& solution);
/// Shadow price at the given node (default: target node).
TimeSeries shadow_price_series(const Scenario& scenario, const DispatchSolution& solution, int node = -1);
/// Generation of dispatchable (conventional) clusters, all nodes.
TimeSeries conventional_generation(const Scenario& scenario, const DispatchSolution& solution);

/// |supply - demand| per hour at every node, maximum over nodes.
std::vector<double> balance_residual(const Scenario& scenario, const DispatchSolution& solution);

/// Writes generation.csv, storage.csv, system.csv (shed, prices, flows,
/// emissions, cost), emissions.csv, shadow_price.csv,
/// conventional_generation.csv and states.csv into `dir`.
void write_dispatch(const Scenario& scenario, const DispatchSolution& solution, const std::filesystem::path& dir);
/// Inverse of write_dispatch (requires the scenario for unit order).
DispatchSolution read_dispatch(const Scenario& scenario, const std::filesystem::path& dir);

}  // namespace mefkit
