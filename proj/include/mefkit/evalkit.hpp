#pragma once

#include "mefkit/timeseries.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mefkit {

struct MetricReport {
  std::string actual;    // label of the reference series
  std::string estimate;  // label of the compared series
  std::string year;
  double mae = 0.0;
  double mse = 0.0;
  double rmse = 0.0;     // sqrt(mse)
  std::size_t n = 0;     // common hours
  std::size_t dropped = 0;  // hours present in only one series
};

/// Metrics over equal-length paired values.
MetricReport compare(std::span<const double> actual, std::span<const double> estimate);
/// Metrics over the timestamps both series cover. Throws on an empty overlap.
MetricReport compare(const TimeSeries& actual, const TimeSeries& estimate, std::string actual_label = "actual",
                     std::string estimate_label = "estimate");
/// compare() with price labels; the year is the overlap's first calendar year.
MetricReport validate_prices(const TimeSeries& shadow, const TimeSeries& reference);

/// Rows `metrics` (e.g. MSE, MAE, RMSE) by columns year..., Average. The
/// average is the unweighted mean of the yearly values.
std::string format_metric_grid(const std::vector<MetricReport>& reports, const std::vector<std::string>& metrics);

struct PlotSeries {
  std::string name;
  TimeSeries series;
};

/// Writes `metrics.csv` (one row per report), `grid_<estimate>.csv` per
/// compared series and `plot_data.csv` in long format `hour,series,value`.
void emit_report(const std::filesystem::path& dir, const std::vector<MetricReport>& reports,
                 const std::vector<PlotSeries>& plot);

std::vector<PlotSeries> read_plot_data(const std::filesystem::path& path);

}  // namespace mefkit
