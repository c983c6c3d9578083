#include "mefkit/evalkit.hpp"

#include "mefkit/csv.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

namespace mefkit {
namespace {

std::string year_of(Timestamp ts) {
  const std::chrono::year_month_day ymd(std::chrono::floor<std::chrono::days>(ts));
  return std::to_string(static_cast<int>(ymd.year()));
}

double metric(const MetricReport& r, const std::string& name) {
  if (name == "MAE") return r.mae;
  if (name == "MSE") return r.mse;
  if (name == "RMSE") return r.rmse;
  throw std::invalid_argument("unknown metric '" + name + "'");
}

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

MetricReport compare(std::span<const double> actual, std::span<const double> estimate) {
  if (actual.size() != estimate.size()) throw std::invalid_argument("compared series differ in length");
  if (actual.empty()) throw std::invalid_argument("no common hours to compare");
  MetricReport r;
  r.n = actual.size();
  double abs_sum = 0.0, sq_sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - estimate[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
  }
  const double n = static_cast<double>(r.n);
  r.mae = abs_sum / n;
  r.mse = sq_sum / n;
  r.rmse = std::sqrt(r.mse);
  return r;
}

MetricReport compare(const TimeSeries& actual, const TimeSeries& estimate, std::string actual_label,
                     std::string estimate_label) {
  using std::chrono::hours;
  const auto a0 = actual.start(), b0 = estimate.start();
  const auto a1 = actual.time_at(actual.size()), b1 = estimate.time_at(estimate.size());
  const auto lo = std::max(a0, b0), hi = std::min(a1, b1);
  if (!(lo < hi)) {
    throw std::invalid_argument("series '" + actual_label + "' and '" + estimate_label + "' share no hours");
  }
  const auto n = static_cast<std::size_t>((hi - lo) / hours(1));
  const auto ai = static_cast<std::size_t>((lo - a0) / hours(1));
  const auto bi = static_cast<std::size_t>((lo - b0) / hours(1));
  MetricReport r = compare(actual.values().subspan(ai, n), estimate.values().subspan(bi, n));
  r.actual = std::move(actual_label);
  r.estimate = std::move(estimate_label);
  r.year = year_of(lo);
  r.dropped = actual.size() + estimate.size() - 2 * n;
  return r;
}

MetricReport validate_prices(const TimeSeries& shadow, const TimeSeries& reference) {
  return compare(reference, shadow, "reference_price", "shadow_price");
}

std::string format_metric_grid(const std::vector<MetricReport>& reports, const std::vector<std::string>& metrics) {
  std::vector<std::string> years;
  for (const auto& r : reports) {
    if (std::find(years.begin(), years.end(), r.year) == years.end()) years.push_back(r.year);
  }
  std::string out = "metric";
  for (const auto& y : years) out += "," + y;
  out += ",Average\n";
  for (const auto& m : metrics) {
    out += m;
    double sum = 0.0;
    for (const auto& y : years) {
      const auto it = std::find_if(reports.begin(), reports.end(), [&](const MetricReport& r) { return r.year == y; });
      const double v = metric(*it, m);
      sum += v;
      out += "," + fixed3(v);
    }
    out += "," + fixed3(years.empty() ? 0.0 : sum / static_cast<double>(years.size())) + "\n";
  }
  return out;
}

void emit_report(const std::filesystem::path& dir, const std::vector<MetricReport>& reports,
                 const std::vector<PlotSeries>& plot) {
  std::filesystem::create_directories(dir);
  CsvTable m;
  m.header = {"actual", "estimate", "year", "n", "dropped", "mae", "mse", "rmse"};
  std::map<std::string, std::vector<MetricReport>> by_estimate;
  for (const auto& r : reports) {
    m.rows.push_back({r.actual, r.estimate, r.year, std::to_string(r.n), std::to_string(r.dropped),
                      format_double(r.mae), format_double(r.mse), format_double(r.rmse)});
    by_estimate[r.estimate].push_back(r);
  }
  write_csv(m, dir / "metrics.csv");
  for (const auto& [name, rs] : by_estimate) {
    std::ofstream f(dir / ("grid_" + name + ".csv"), std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / ("grid_" + name + ".csv")).string());
    f << format_metric_grid(rs, {"MSE", "MAE", "RMSE"});
  }
  CsvTable p;
  p.header = {"hour", "series", "value"};
  for (const auto& s : plot) {
    for (std::size_t h = 0; h < s.series.size(); ++h) {
      p.rows.push_back({format_timestamp(s.series.time_at(h)), s.name, format_double(s.series[h])});
    }
  }
  write_csv(p, dir / "plot_data.csv");
}

std::vector<PlotSeries> read_plot_data(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const int ch = t.column("hour"), cs = t.column("series"), cv = t.column("value");
  if (ch < 0 || cs < 0 || cv < 0) throw std::invalid_argument(path.string() + ": expected hour,series,value");
  std::vector<std::string> order;
  std::map<std::string, std::pair<Timestamp, std::vector<double>>> acc;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const Timestamp ts = parse_timestamp(row[ch]);
    auto [it, inserted] = acc.try_emplace(row[cs], ts, std::vector<double>{});
    if (inserted) order.push_back(row[cs]);
    auto& [start, values] = it->second;
    if (ts != start + std::chrono::hours(values.size())) {
      throw ValidationError(row[cs], static_cast<long>(values.size()), "plot data hours are not consecutive");
    }
    values.push_back(parse_double(row[cv]));
  }
  std::vector<PlotSeries> out;
  for (const auto& name : order) {
    auto& [start, values] = acc[name];
    out.push_back({name, TimeSeries(start, std::move(values))});
  }
  return out;
}

}  // namespace mefkit
