#pragma once

#include "mefkit/timeseries.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mefkit {

/// A capacity cluster of plants sharing technology and techno-economic data.
struct PlantCluster {
  std::string id;
  std::string node;
  std::string tech;
  double installed_cap = 0.0;   // MW
  double efficiency = 1.0;      // MWh_el per MWh_th
  double min_load = 0.0;        // fraction of online capacity
  double carbon_content = 0.0;  // t CO2 per MWh_th
  double cvar_full = 0.0;       // EUR/MWh at full load
  double cvar_min = 0.0;        // EUR/MWh at minimum load
  double cramp = 0.0;           // EUR per MW started
  TimeSeries availability;      // [0,1]
  TimeSeries outages;           // MW unavailable
  bool is_dispatchable = true;  // false: must-take renewable feed-in with curtailment
  // Exogenous control-power reservations (MW).
  double reserve_pcr = 0.0;
  double reserve_scr_pos = 0.0;
  double reserve_scr_neg = 0.0;

  /// t CO2 per MWh electric.
  double emission_rate() const { return carbon_content / efficiency; }
  /// MW available for commitment in hour h.
  double available_capacity(std::size_t h) const {
    return installed_cap * availability[h] - outages[h];
  }
};

enum class StorageKind { MidTerm, LongTerm };

struct StorageUnit {
  std::string id;
  std::string node;
  StorageKind kind = StorageKind::MidTerm;
  double turbine_cap = 0.0;            // MW
  double pump_limit_factor = 1.1;      // turbine + factor * pump <= turbine_cap
  double cycle_efficiency = 1.0;       // applied on charging
  double energy_power_factor = 9.0;    // hours
  double water_value = 0.0;            // EUR/MWh, long-term only
  double initial_level = 0.0;          // MWh

  double energy_capacity() const { return turbine_cap * energy_power_factor; }
  double pump_cap_ratio() const { return 1.0 / pump_limit_factor; }
};

struct Interconnector {
  std::string from;
  std::string to;
  double capacity = 0.0;  // MW, directed from -> to
};

struct Node {
  std::string id;
  TimeSeries demand;  // MWh/h
};

/// Candidate technology for capacity expansion.
struct CandidateTech {
  std::string id;
  std::string node;
  std::string tech;
  double cinv = 0.0;      // EUR/MW overnight
  double cfix = 0.0;      // EUR/MW-a
  int lifetime = 1;       // years
  double cvar = 0.0;      // EUR/MWh
  double efficiency = 1.0;
  double carbon_content = 0.0;
  double availability = 1.0;
};

struct InvestSettings {
  std::vector<int> years{2025, 2030, 2040};
  double discount_rate = 0.05;
  double interest_rate = 0.05;  // annuity rate for cinv
  int blocks = 6;
  std::map<int, double> demand_scale;  // year -> factor applied to demand
  std::vector<CandidateTech> candidates;
};

struct Scenario {
  std::string name;
  std::vector<std::string> years;
  std::vector<Node> nodes;
  std::vector<PlantCluster> clusters;
  std::vector<StorageUnit> storages;
  std::vector<Interconnector> interconnectors;
  std::map<std::string, double> fuel_prices;  // EUR/MWh_th per tech
  double co2_price = 0.0;                     // EUR/t
  double load_shed_cost = 3000.0;             // EUR/MWh
  double res_curtail_cost = 20.0;             // EUR/MWh
  double grid_loss = 0.0;                     // fraction
  std::string target_node;                    // node receiving MEF perturbations
  std::optional<InvestSettings> invest;

  std::size_t hours() const { return nodes.empty() ? 0 : nodes.front().demand.size(); }
  std::size_t days() const { return hours() / 24; }
  Timestamp start() const { return nodes.front().demand.start(); }
  int node_index(const std::string& id) const;
  double total_installed_capacity() const;

  /// Checks every invariant; throws ValidationError naming entity and hour.
  void validate() const;
};

/// Loads `<dir>/scenario.cfg` (or a direct path to a .cfg file) and the CSV
/// files it references. The grammar is documented in docs/scenario_format.md.
Scenario load_scenario(const std::filesystem::path& path);

/// Writes a scenario back as `scenario.cfg` plus one CSV per time series.
void write_scenario(const Scenario& scenario, const std::filesystem::path& dir);

}  // namespace mefkit
