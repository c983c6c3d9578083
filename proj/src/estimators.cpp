#include "mefkit/estimators.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mefkit {
namespace {

Standardization standardization(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  Standardization s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double a : v) ss += (a - s.mean) * (a - s.mean);
  s.std = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return s;
}

std::vector<double> differences(const TimeSeries& s, const char* name) {
  std::vector<double> d(s.size() - 1);
  for (std::size_t t = 0; t + 1 < s.size(); ++t) {
    if (!std::isfinite(s[t]) || !std::isfinite(s[t + 1])) {
      throw ValidationError(name, static_cast<long>(std::isfinite(s[t]) ? t + 1 : t), "non-finite value");
    }
    d[t] = s[t + 1] - s[t];
  }
  return d;
}

}  // namespace

DiffPair prepare_series(const TimeSeries& emissions, const TimeSeries& generation) {
  if (emissions.size() != generation.size()) {
    throw std::invalid_argument("emissions and generation lengths differ (" + std::to_string(emissions.size()) +
                                " vs " + std::to_string(generation.size()) + ")");
  }
  if (emissions.size() < 2) throw std::invalid_argument("series need at least 2 hours");
  DiffPair p;
  p.start = emissions.start();
  p.raw_de = differences(emissions, "emissions");
  p.raw_dg = differences(generation, "generation");
  p.e = standardization(p.raw_de);
  p.g = standardization(p.raw_dg);
  if (!(p.g.std > 0.0)) throw std::invalid_argument("zero-variance series");
  p.de.resize(p.raw_de.size());
  p.dg.resize(p.raw_dg.size());
  for (std::size_t t = 0; t < p.de.size(); ++t) {
    // Constant emissions (carbon-free system) keep std 0 so every MEF scales to 0.
    p.de[t] = p.e.std > 0.0 ? (p.raw_de[t] - p.e.mean) / p.e.std : 0.0;
    p.dg[t] = (p.raw_dg[t] - p.g.mean) / p.g.std;
  }
  return p;
}

EstimatorModel parse_estimator(const std::string& text) {
  if (text == "msdr") return EstimatorModel::Msdr;
  if (text == "dlr") return EstimatorModel::Dlr;
  throw std::invalid_argument("unknown model '" + text + "' (expected msdr or dlr)");
}

std::vector<IndexRange> rolling_windows(std::size_t n, std::size_t len, std::size_t step, std::size_t min_len) {
  if (len == 0 || step == 0) throw std::invalid_argument("window length and step must be positive");
  if (n < len) {
    throw std::invalid_argument("series of " + std::to_string(n) + " differences is shorter than the window of " +
                                std::to_string(len));
  }
  std::vector<IndexRange> out;
  std::size_t b = 0;
  for (; b + len <= n; b += step) out.push_back({b, b + len});
  const std::size_t covered = out.back().end;
  if (covered < n) {
    if (n - covered >= min_len) {
      out.push_back({covered, n});
    } else {
      out.back().end = n;
    }
  }
  return out;
}

RollingResult rolling_estimate(const DiffPair& pair, EstimatorModel model, std::size_t window_len, std::size_t step,
                               bool destandardize, const MsdrOptions& msdr, const DlrOptions& dlr) {
  if (step > window_len) throw std::invalid_argument("step longer than the window leaves hours without an estimate");
  const std::size_t min_len = model == EstimatorModel::Msdr ? 30 : 20;
  RollingResult res;
  res.windows = rolling_windows(pair.size(), window_len, step, min_len);
  std::vector<double> diff_mef(pair.size(), 0.0);
  for (const IndexRange& w : pair.e.std > 0.0 ? res.windows : std::vector<IndexRange>{}) {
    std::vector<double> seg;
    if (model == EstimatorModel::Msdr) {
      RegimeFit fit = fit_best_msdr(std::span(pair.de).subspan(w.begin, w.size()),
                                    std::span(pair.dg).subspan(w.begin, w.size()), msdr);
      fit.window = w;
      seg = msdr_mef(fit, destandardize, pair);
      res.msdr.push_back(std::move(fit));
    } else {
      DlrFit fit = fit_dlr(pair, w, dlr);
      seg = dlr_mef(fit, destandardize, pair);
      res.dlr.push_back(std::move(fit));
    }
    // Overlapping tiles: the later window owns the shared hours.
    std::copy(seg.begin(), seg.end(), diff_mef.begin() + static_cast<std::ptrdiff_t>(w.begin));
  }
  std::vector<double> level(pair.size() + 1);
  level[0] = diff_mef.front();
  std::copy(diff_mef.begin(), diff_mef.end(), level.begin() + 1);
  res.mef.series = TimeSeries(pair.start, std::move(level));
  res.mef.source = model == EstimatorModel::Msdr ? MefSource::Msdr : MefSource::Dlr;
  const auto ymd = std::chrono::year_month_day(std::chrono::floor<std::chrono::days>(pair.start));
  res.mef.year = std::to_string(static_cast<int>(ymd.year()));
  return res;
}

}  // namespace mefkit
