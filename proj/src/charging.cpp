#include "mefkit/charging.hpp"

#include "mefkit/csv.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace mefkit {

ChargingPlan plan_charging(const MefSeries& mef, const ChargingOptions& opt) {
  if (opt.window <= 0 || opt.window > 24 || opt.charge_hours <= 0) {
    throw std::invalid_argument("charging window and hours must be positive and the window at most 24 h");
  }
  if (opt.window < opt.charge_hours) {
    throw std::invalid_argument("charging window of " + std::to_string(opt.window) + " h is shorter than " +
                                std::to_string(opt.charge_hours) + " charging hours");
  }
  if (opt.night_start < 0 || opt.night_start > 23) throw std::invalid_argument("night_start must be an hour 0-23");
  ChargingPlan plan;
  plan.year = mef.year;
  plan.options = opt;
  const TimeSeries& s = mef.series;
  const auto start = s.start();
  const auto hour_of_day = (start - std::chrono::floor<std::chrono::days>(start)) / std::chrono::hours(1);
  std::size_t first = static_cast<std::size_t>((opt.night_start - hour_of_day + 24) % 24);

  std::vector<int> order(opt.window);
  std::size_t b = first;
  for (; b + static_cast<std::size_t>(opt.window) <= s.size(); b += 24) {
    NightPlan n;
    n.start = s.time_at(b);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int c) { return s[b + a] < s[b + c]; });
    for (int h = 0; h < opt.charge_hours; ++h) {
      n.e1 += s[b + h];
      n.mask |= 1u << order[h];
    }
    for (int h = 0; h < opt.window; ++h) {
      if (n.mask & (1u << h)) {
        n.selected.push_back(h);
        n.e2 += s[b + h];
      }
    }
    plan.e1_total += n.e1;
    plan.e2_total += n.e2;
    plan.nights.push_back(std::move(n));
  }
  if (b < s.size()) {
    plan.dropped_hours = s.size() - b;
    plan.warnings.push_back("dropped incomplete night starting " + format_timestamp(s.time_at(b)) + " (" +
                            std::to_string(plan.dropped_hours) + " of " + std::to_string(opt.window) + " hours)");
  }
  plan.saving = plan.e1_total - plan.e2_total;
  plan.e1_mass_kg = plan.e1_total * opt.energy_kwh;
  plan.e2_mass_kg = plan.e2_total * opt.energy_kwh;
  return plan;
}

std::string mask_string(unsigned mask, int window) {
  std::string out(static_cast<std::size_t>(window), '0');
  for (int h = 0; h < window; ++h) {
    if (mask & (1u << h)) out[static_cast<std::size_t>(h)] = '1';
  }
  return out;
}

void write_charging_csv(const ChargingPlan& plan, const std::filesystem::path& path) {
  CsvTable t;
  t.header = {"date", "bitmask", "e1", "e2"};
  for (const NightPlan& n : plan.nights) {
    t.rows.push_back({format_timestamp(n.start).substr(0, 10), mask_string(n.mask, plan.options.window),
                      format_double(n.e1), format_double(n.e2)});
  }
  write_csv(t, path);
}

SavingsSummary savings_summary(std::vector<YearSavings> totals) {
  if (totals.empty()) throw std::invalid_argument("savings summary needs at least one year");
  SavingsSummary s;
  double sum_e1 = 0.0, sum_saving = 0.0, sum_pct = 0.0;
  for (YearSavings& y : totals) {
    y.percent = y.e1 != 0.0 ? 100.0 * y.saving / y.e1 : 0.0;
    sum_e1 += y.e1;
    sum_saving += y.saving;
    sum_pct += y.percent;
    s.mean_e2 += y.e2;
  }
  const double n = static_cast<double>(totals.size());
  s.mean_e1 = sum_e1 / n;
  s.mean_e2 /= n;
  s.mean_saving = sum_saving / n;
  s.mean_percent = sum_pct / n;
  s.pooled_percent = sum_e1 != 0.0 ? 100.0 * sum_saving / sum_e1 : 0.0;
  s.years = std::move(totals);
  return s;
}

SavingsSummary savings_summary(const std::vector<ChargingPlan>& plans) {
  std::vector<YearSavings> totals;
  for (const ChargingPlan& p : plans) totals.push_back({p.year, p.e1_total, p.e2_total, p.saving, 0.0});
  return savings_summary(std::move(totals));
}

std::string format_savings(const SavingsSummary& s) {
  auto row = [](const std::string& label, double e1, double e2, double saving, double pct) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%.2f,%.2f,%.2f,%.2f\n", label.c_str(), e1, e2, saving, pct);
    return std::string(buf);
  };
  std::string out = "year,e1,e2,saving,percent\n";
  for (const YearSavings& y : s.years) out += row(y.year, y.e1, y.e2, y.saving, y.percent);
  out += row("mean", s.mean_e1, s.mean_e2, s.mean_saving, s.mean_percent);
  out += row("pooled", s.mean_e1, s.mean_e2, s.mean_saving, s.pooled_percent);
  return out;
}

}  // namespace mefkit
