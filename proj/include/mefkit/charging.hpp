#pragma once

#include "mefkit/timeseries.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mefkit {

struct ChargingOptions {
  int night_start = 20;    // local hour the charging window opens
  int window = 10;         // hours in the window
  int charge_hours = 4;
  double energy_kwh = 11.0;  // energy drawn per charging hour, for the mass view
};

/// One night window. Hour h of the window is bit h of `mask`.
struct NightPlan {
  Timestamp start{};
  unsigned mask = 0;
  std::vector<int> selected;  // ascending window offsets
  double e1 = 0.0;  // MEF sum over the first charge_hours hours
  double e2 = 0.0;  // MEF sum over the selected hours
};

struct ChargingPlan {
  std::string year;
  ChargingOptions options;
  std::vector<NightPlan> nights;
  double e1_total = 0.0;  // sum of MEF values (t/MWh = kg/kWh), as tabulated
  double e2_total = 0.0;
  double saving = 0.0;  // e1_total - e2_total
  double e1_mass_kg = 0.0;  // e1_total * energy_kwh
  double e2_mass_kg = 0.0;
  std::size_t dropped_hours = 0;  // trailing hours of an incomplete night
  std::vector<std::string> warnings;
};

/// Chooses the charge_hours lowest-MEF hours of every complete night (ties go
/// to the earlier hour). Nights open at the first night_start hour of the series.
ChargingPlan plan_charging(const MefSeries& mef, const ChargingOptions& options = {});

/// Bit string with character h set when window hour h is selected.
std::string mask_string(unsigned mask, int window);

/// `date,bitmask,e1,e2` per night.
void write_charging_csv(const ChargingPlan& plan, const std::filesystem::path& path);

struct YearSavings {
  std::string year;
  double e1 = 0.0;
  double e2 = 0.0;
  double saving = 0.0;
  double percent = 0.0;  // 100 * saving / e1
};

struct SavingsSummary {
  std::vector<YearSavings> years;
  double mean_e1 = 0.0, mean_e2 = 0.0, mean_saving = 0.0;
  double mean_percent = 0.0;    // unweighted mean of yearly percentages
  double pooled_percent = 0.0;  // 100 * sum(saving) / sum(e1)
};

SavingsSummary savings_summary(const std::vector<ChargingPlan>& plans);
/// Same arithmetic from tabulated yearly totals; each saving is taken as given.
SavingsSummary savings_summary(std::vector<YearSavings> totals);

/// `year,e1,e2,saving,percent` rows followed by `mean` and `pooled` rows.
std::string format_savings(const SavingsSummary& summary);

}  // namespace mefkit
