#pragma once

#include "mefkit/lp.hpp"
#include "mefkit/scenario.hpp"

#include <filesystem>
#include <vector>

namespace mefkit {

/// Representative load block of one year: duration-weighted average of the
/// hours it groups.
struct LoadBlock {
  double weight = 0.0;                 // hours per year represented
  std::vector<double> demand;          // [node] MW
  std::vector<double> existing_avail;  // [cluster] MW available
};

struct InvestYear {
  int year = 0;
  double discount_factor = 1.0;
  std::vector<LoadBlock> blocks;
};

struct InvestProblem {
  std::vector<std::string> nodes;
  std::vector<CandidateTech> candidates;
  std::vector<PlantCluster> existing;  // exogenous capacity (RES included)
  std::vector<Interconnector> interconnectors;
  std::vector<InvestYear> years;
  double interest_rate = 0.05;
  double load_shed_cost = 3000.0;  // negative disables shedding
  double res_curtail_cost = 20.0;
  double grid_loss = 0.0;

  void validate() const;
};

/// Equal annual payment on cinv over the candidate lifetime.
double annuity(double cinv, double rate, int lifetime);

/// Splits the horizon into `blocks` groups of the sorted system residual load
/// (demand minus renewable feed-in). The first block is the single peak hour
/// so the planned capacity covers every hour. Weights are scaled to 8760 h.
std::vector<LoadBlock> load_blocks(const Scenario& scenario, int blocks, double demand_scale = 1.0);

/// Builds the problem from the scenario's [invest] settings; df_y = (1+r)^-(y-y0).
InvestProblem make_invest_problem(const Scenario& scenario);

struct CapacityEntry {
  std::string candidate;
  std::string node;
  std::string tech;
  int year = 0;
  double added = 0.0;      // MW
  double installed = 0.0;  // MW
};

struct InvestYearCost {
  int year = 0;
  double generation = 0.0;  // undiscounted EUR
  double fixed = 0.0;
  double investment = 0.0;
  double shed = 0.0;  // MWh per year
};

struct CapacityPlan {
  std::vector<CapacityEntry> entries;  // candidate-major, then year
  std::vector<InvestYearCost> costs;
  double objective = 0.0;  // discounted total

  double installed(const std::string& candidate, int year) const;
  double added(const std::string& candidate, int year) const;
};

/// Installed capacity in year y counts every addition y' with y' <= y <= y' + lifetime.
bool in_service(int added_year, int year, int lifetime);

lp::LinearProgram build_invest_lp(const InvestProblem& problem);
CapacityPlan solve_invest(const InvestProblem& problem);

/// Adds the plan's installed capacity for `year` as dispatchable clusters and
/// applies the year's demand scale.
Scenario apply_plan(const Scenario& scenario, const CapacityPlan& plan, int year);

/// `candidate,node,tech,year,added_mw,installed_mw`.
void write_capacities_csv(const CapacityPlan& plan, const std::filesystem::path& path);

}  // namespace mefkit
