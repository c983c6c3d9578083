#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mefkit {

using Timestamp = std::chrono::sys_seconds;

/// Parses `YYYY-MM-DDTHH:MM[:SS][Z]`. Throws std::invalid_argument.
Timestamp parse_timestamp(std::string_view text);
/// Formats as `YYYY-MM-DDTHH:MM:SS`.
std::string format_timestamp(Timestamp ts);

/// Error raised by loaders and validators. Carries the offending entity and
/// hour index when known (hour < 0 means "not hour-specific").
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string entity, long hour, const std::string& message);

  const std::string& entity() const { return entity_; }
  long hour() const { return hour_; }

 private:
  std::string entity_;
  long hour_;
};

/// Hourly series with a fixed calendar start. Length is fixed at construction.
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(Timestamp start, std::vector<double> values);

  Timestamp start() const { return start_; }
  Timestamp time_at(std::size_t hour) const { return start_ + std::chrono::hours(hour); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t hour) const { return values_[hour]; }
  std::span<const double> values() const { return values_; }

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  Timestamp start_{};
  std::vector<double> values_;
};

enum class MefSource { Incremental, Msdr, Dlr };

std::string_view to_string(MefSource source);
MefSource parse_mef_source(std::string_view text);

/// Hourly marginal emission factors in t CO2 per MWh (equivalently kg/kWh).
struct MefSeries {
  TimeSeries series;
  MefSource source = MefSource::Incremental;
  std::string year;

  friend bool operator==(const MefSeries&, const MefSeries&) = default;
};

/// Writes `timestamp,value` rows. Values use 17 significant digits so a read
/// returns the identical doubles.
void write_series_csv(const TimeSeries& series, const std::filesystem::path& path);
/// Writes `timestamp,value,source` rows.
void write_series_csv(const MefSeries& mef, const std::filesystem::path& path);

/// Reads a `timestamp,value[,source]` CSV. Timestamps must be consecutive hours.
TimeSeries read_series_csv(const std::filesystem::path& path);
/// Reads a CSV written by the MefSeries overload. Missing source column is
/// rejected; the year label is taken from the first timestamp.
MefSeries read_mef_csv(const std::filesystem::path& path);

/// Formats a double with 17 significant digits, matching the CSV writers.
std::string format_double(double value);
/// Strict double parser (whole token must be consumed).
double parse_double(std::string_view text);

}  // namespace mefkit
