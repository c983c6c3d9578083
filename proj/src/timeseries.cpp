#include "mefkit/timeseries.hpp"

#include "mefkit/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mefkit {
namespace {

int parse_fixed_int(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) {
    throw std::invalid_argument("timestamp too short: " + std::string(text));
  }
  int value = 0;
  const char* first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc{} || ptr != first + len) {
    throw std::invalid_argument("bad timestamp field in: " + std::string(text));
  }
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw std::invalid_argument("bad timestamp separator in: " + std::string(text));
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  text = trim(text);
  if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
  const int y = parse_fixed_int(text, 0, 4);
  expect_char(text, 4, '-');
  const int mo = parse_fixed_int(text, 5, 2);
  expect_char(text, 7, '-');
  const int d = parse_fixed_int(text, 8, 2);
  if (text.size() < 11 || (text[10] != 'T' && text[10] != ' ')) {
    throw std::invalid_argument("timestamp needs a time part: " + std::string(text));
  }
  const int hh = parse_fixed_int(text, 11, 2);
  expect_char(text, 13, ':');
  const int mm = parse_fixed_int(text, 14, 2);
  int ss = 0;
  if (text.size() > 16) {
    expect_char(text, 16, ':');
    ss = parse_fixed_int(text, 17, 2);
    if (text.size() != 19) {
      throw std::invalid_argument("trailing characters in timestamp: " + std::string(text));
    }
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) {
    throw std::invalid_argument("invalid calendar timestamp: " + std::string(text));
  }
  return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  const auto day_point = floor<days>(ts);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{ts - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

ValidationError::ValidationError(std::string entity, long hour, const std::string& message)
    : std::runtime_error(entity.empty() ? message : entity + ": " + message),
      entity_(std::move(entity)),
      hour_(hour) {}

TimeSeries::TimeSeries(Timestamp start, std::vector<double> values)
    : start_(start), values_(std::move(values)) {
  for (std::size_t h = 0; h < values_.size(); ++h) {
    if (std::isnan(values_[h])) {
      throw ValidationError("", static_cast<long>(h), "NaN at hour " + std::to_string(h));
    }
  }
}

std::string_view to_string(MefSource source) {
  switch (source) {
    case MefSource::Incremental: return "incremental";
    case MefSource::Msdr: return "msdr";
    case MefSource::Dlr: return "dlr";
  }
  return "unknown";
}

MefSource parse_mef_source(std::string_view text) {
  if (text == "incremental") return MefSource::Incremental;
  if (text == "msdr") return MefSource::Msdr;
  if (text == "dlr") return MefSource::Dlr;
  throw std::invalid_argument("unknown MEF source: " + std::string(text));
}

std::string format_double(double value) {
  if (value == 0.0) return "0";  // also folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_double(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string> split_fields(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    out.emplace_back(trim(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string(), -1, "cannot open file");
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ValidationError(path.string(), static_cast<long>(table.rows.size()),
                            "row has " + std::to_string(fields.size()) + " fields, header has " +
                                std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw ValidationError(path.string(), -1, "empty CSV file");
  return table;
}

void write_csv(const CsvTable& table, const std::filesystem::path& path) {
  std::ostringstream out;
  auto emit = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out << ',';
      out << fields[i];
    }
    out << '\n';
  };
  emit(table.header);
  for (const auto& row : table.rows) emit(row);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  file << out.str();
  if (!file) throw std::runtime_error("write failed for " + path.string());
}

namespace {

CsvTable series_table(const TimeSeries& series, const std::string* source) {
  if (series.empty()) throw std::invalid_argument("refusing to write an empty series");
  CsvTable table;
  table.header = {"timestamp", "value"};
  if (source) table.header.push_back("source");
  table.rows.reserve(series.size());
  for (std::size_t h = 0; h < series.size(); ++h) {
    std::vector<std::string> row{format_timestamp(series.time_at(h)), format_double(series[h])};
    if (source) row.push_back(*source);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace

void write_series_csv(const TimeSeries& series, const std::filesystem::path& path) {
  write_csv(series_table(series, nullptr), path);
}

void write_series_csv(const MefSeries& mef, const std::filesystem::path& path) {
  const std::string source(to_string(mef.source));
  write_csv(series_table(mef.series, &source), path);
}

namespace {

TimeSeries series_from_table(const CsvTable& table, const std::filesystem::path& path) {
  const int ts_col = table.column("timestamp");
  const int value_col = table.column("value");
  if (ts_col < 0 || value_col < 0) {
    throw ValidationError(path.string(), -1, "expected header timestamp,value[,source]");
  }
  if (table.rows.empty()) throw ValidationError(path.string(), -1, "series has no rows");
  std::vector<double> values;
  values.reserve(table.rows.size());
  Timestamp start{};
  for (std::size_t h = 0; h < table.rows.size(); ++h) {
    const auto& row = table.rows[h];
    Timestamp ts;
    double v;
    try {
      ts = parse_timestamp(row[ts_col]);
      v = parse_double(row[value_col]);
    } catch (const std::invalid_argument& e) {
      throw ValidationError(path.string(), static_cast<long>(h), e.what());
    }
    if (h == 0) {
      start = ts;
    } else if (ts != start + std::chrono::hours(h)) {
      throw ValidationError(path.string(), static_cast<long>(h), "timestamps are not consecutive hours");
    }
    if (std::isnan(v)) throw ValidationError(path.string(), static_cast<long>(h), "NaN value");
    values.push_back(v);
  }
  return TimeSeries(start, std::move(values));
}

}  // namespace

TimeSeries read_series_csv(const std::filesystem::path& path) {
  return series_from_table(read_csv(path), path);
}

MefSeries read_mef_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  MefSeries mef;
  mef.series = series_from_table(table, path);
  const int src_col = table.column("source");
  if (src_col < 0) throw ValidationError(path.string(), -1, "MEF CSV needs a source column");
  mef.source = parse_mef_source(table.rows.front()[src_col]);
  const auto ymd = std::chrono::year_month_day{std::chrono::floor<std::chrono::days>(mef.series.start())};
  mef.year = std::to_string(static_cast<int>(ymd.year()));
  return mef;
}

}  // namespace mefkit
