#pragma once

#include "mefkit/charging.hpp"
#include "mefkit/estimators.hpp"
#include "mefkit/evalkit.hpp"
#include "mefkit/mef.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mefkit {

inline constexpr const char* kVersion = "0.3.0";
inline constexpr unsigned kDefaultSeed = 20240601;

/// Ordered, timestamp-free run log.
class RunLog {
 public:
  void info(std::string line);
  void append(const std::vector<std::string>& lines);
  const std::vector<std::string>& lines() const { return lines_; }
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> lines_;
};

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Regular files that make up a scenario: the config plus every file next to it.
std::vector<std::filesystem::path> scenario_inputs(const std::filesystem::path& scenario);

/// Every regular file under `dir` except manifests, sorted.
std::vector<std::filesystem::path> files_under(const std::filesystem::path& dir);

/// Writes a JSON manifest with the version, command, configuration and the
/// SHA-256 of every input and output. Output names are relative to `base`.
void write_manifest(const std::filesystem::path& manifest, const std::string& command,
                    const std::map<std::string, std::string>& config, const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::filesystem::path>& outputs, const std::filesystem::path& base);

/// Fails unless `out` is absent or empty, then creates it.
void prepare_output_dir(const std::filesystem::path& out);

struct EstimateOutput {
  RollingResult result;
  std::size_t window = 0;  // after clamping to the series length
};

/// Rolling estimation on level series. A window longer than the available
/// differences is shortened to fit, with a log line.
EstimateOutput estimate_mef(const TimeSeries& emissions, const TimeSeries& generation, EstimatorModel model,
                            std::size_t window, bool destandardize, unsigned seed, RunLog& log);

/// Structured per-window parameter report (JSON).
std::string fit_report(const EstimateOutput& out, EstimatorModel model);

struct PipelineOptions {
  unsigned seed = kDefaultSeed;
  int jobs = 1;
  bool strict = false;
  std::size_t window = 168;
  bool destandardize = true;
  double delta = 1.0;
  int year = 0;  // invest year to dispatch; 0 picks the scenario's own year
  ChargingOptions charging;
};

/// End-to-end run on one scenario: optional capacity expansion, baseline
/// dispatch, incremental MEFs, MSDR and DLR estimates, diagnostics,
/// evaluation against the incremental benchmark and charging plans.
void run_pipeline(const std::filesystem::path& scenario, const std::filesystem::path& out,
                  const PipelineOptions& options, RunLog& log);

/// Writes one charging plan per MEF series plus `savings.csv`.
void run_charging(const std::vector<MefSeries>& mefs, const std::filesystem::path& dir, const ChargingOptions& options,
                  RunLog& log);

/// Compares each candidate against the benchmark and writes the report files.
std::vector<MetricReport> run_evaluation(const MefSeries& benchmark, const std::vector<MefSeries>& candidates,
                                         const std::filesystem::path& dir);

}  // namespace mefkit
