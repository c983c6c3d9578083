#include "mefkit/estimators.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mefkit {
namespace {

constexpr std::size_t kMinLength = 30;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

void require_length(std::span<const double> s, const char* what) {
  if (s.size() < kMinLength) {
    throw std::invalid_argument(std::string(what) + " needs at least " + std::to_string(kMinLength) +
                                " observations, got " + std::to_string(s.size()));
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i])) throw ValidationError(what, static_cast<long>(i), "non-finite value");
  }
}

struct Ols {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  double ssr = 0.0;
  std::size_t nobs = 0;
};

Ols ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Ols r;
  r.nobs = static_cast<std::size_t>(X.rows());
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  r.beta = qr.solve(y);
  r.ssr = (y - X * r.beta).squaredNorm();
  const double dof = static_cast<double>(X.rows() - X.cols());
  const double s2 = dof > 0 ? r.ssr / dof : std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd xtx_inv = (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(X.cols(), X.cols()));
  r.se = (s2 * xtx_inv.diagonal().array()).sqrt();
  return r;
}

// Regression of dy_t on [1, y_{t-1}, dy_{t-1}, ..., dy_{t-p}] for t in [first, n-1),
// where dy_t = y_{t+1} - y_t indexes differences.
Ols adf_regression(std::span<const double> y, int p, std::size_t first) {
  const std::size_t nd = y.size() - 1;
  const std::size_t rows = nd - first;
  Eigen::MatrixXd X(rows, 2 + p);
  Eigen::VectorXd dy(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = first + r;
    dy(r) = y[t + 1] - y[t];
    X(r, 0) = 1.0;
    X(r, 1) = y[t];
    for (int j = 1; j <= p; ++j) X(r, 1 + j) = y[t + 1 - j] - y[t - j];
  }
  return ols(X, dy);
}

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double mackinnon_pvalue(double stat) {
  constexpr double tau_max = 2.74, tau_min = -18.83, tau_star = -1.61;
  if (stat > tau_max) return 1.0;
  if (stat < tau_min) return 0.0;
  if (stat <= tau_star) return normal_cdf(2.1659 + 1.4412 * stat + 0.038269 * stat * stat);
  return normal_cdf(1.7339 + 0.93202 * stat - 0.12745 * stat * stat - 0.010368 * stat * stat * stat);
}

AdfResult adf_test(std::span<const double> y) {
  require_length(y, "ADF test");
  const double T = static_cast<double>(y.size());
  const std::size_t nd = y.size() - 1;
  // Keep at least 10 residual degrees of freedom in the longest regression.
  int maxlag = static_cast<int>(std::floor(12.0 * std::pow(T / 100.0, 0.25)));
  maxlag = std::min(maxlag, static_cast<int>(nd) / 2 - 7);
  maxlag = std::max(maxlag, 0);

  int best_p = 0;
  double best_aic = std::numeric_limits<double>::infinity();
  for (int p = 0; p <= maxlag; ++p) {
    const Ols r = adf_regression(y, p, static_cast<std::size_t>(maxlag));
    const double n = static_cast<double>(r.nobs);
    const double aic = n * std::log(std::max(r.ssr, 1e-300) / n) + 2.0 * (2 + p);
    if (aic < best_aic - 1e-12) {
      best_aic = aic;
      best_p = p;
    }
  }
  const Ols r = adf_regression(y, best_p, static_cast<std::size_t>(best_p));
  AdfResult res;
  res.lags = best_p;
  res.nobs = r.nobs;
  res.statistic = r.se(1) > 0.0 ? r.beta(1) / r.se(1) : -std::numeric_limits<double>::infinity();
  res.pvalue = mackinnon_pvalue(res.statistic);
  const double n = static_cast<double>(r.nobs);
  res.crit_1 = -3.43035 - 6.5393 / n - 16.786 / (n * n) - 79.433 / (n * n * n);
  res.crit_5 = -2.86154 - 2.8903 / n - 4.234 / (n * n) - 40.04 / (n * n * n);
  res.crit_10 = -2.56677 - 1.5384 / n - 2.809 / (n * n);
  return res;
}

JarqueBera jarque_bera(std::span<const double> s) {
  require_length(s, "Jarque-Bera test");
  const double n = static_cast<double>(s.size());
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : s) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0.0)) throw std::invalid_argument("Jarque-Bera test on a constant series");
  JarqueBera jb;
  jb.skewness = m3 / std::pow(m2, 1.5);
  jb.kurtosis = m4 / (m2 * m2);
  jb.statistic = n / 6.0 * (jb.skewness * jb.skewness + 0.25 * (jb.kurtosis - 3.0) * (jb.kurtosis - 3.0));
  jb.pvalue = std::exp(-0.5 * jb.statistic);  // chi-square with 2 degrees of freedom
  return jb;
}

Descriptive describe(std::span<const double> s) {
  if (s.empty()) throw std::invalid_argument("describe on an empty series");
  Descriptive d;
  d.count = s.size();
  const double n = static_cast<double>(s.size());
  d.mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : s) ss += (v - d.mean) * (v - d.mean);
  d.std = s.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  std::vector<double> sorted(s.begin(), s.end());
  std::sort(sorted.begin(), sorted.end());
  d.min = sorted.front();
  d.max = sorted.back();
  d.q25 = quantile(sorted, 0.25);
  d.q50 = quantile(sorted, 0.50);
  d.q75 = quantile(sorted, 0.75);
  return d;
}

DiagnosticsReport diagnostics(std::span<const double> s) {
  require_length(s, "diagnostics");
  return {describe(s), adf_test(s), jarque_bera(s)};
}

std::string format_diagnostics(const std::vector<std::pair<std::string, DiagnosticsReport>>& reports) {
  auto cell = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return std::string(buf);
  };
  using Getter = double (*)(const DiagnosticsReport&);
  static const std::pair<const char*, Getter> rows[] = {
      {"count", [](const DiagnosticsReport& r) { return static_cast<double>(r.stats.count); }},
      {"mean", [](const DiagnosticsReport& r) { return r.stats.mean; }},
      {"std", [](const DiagnosticsReport& r) { return r.stats.std; }},
      {"min", [](const DiagnosticsReport& r) { return r.stats.min; }},
      {"25%", [](const DiagnosticsReport& r) { return r.stats.q25; }},
      {"50%", [](const DiagnosticsReport& r) { return r.stats.q50; }},
      {"75%", [](const DiagnosticsReport& r) { return r.stats.q75; }},
      {"max", [](const DiagnosticsReport& r) { return r.stats.max; }},
      {"ADF", [](const DiagnosticsReport& r) { return r.adf.statistic; }},
      {"ADF p", [](const DiagnosticsReport& r) { return r.adf.pvalue; }},
      {"JB", [](const DiagnosticsReport& r) { return r.jb.statistic; }},
      {"JB p", [](const DiagnosticsReport& r) { return r.jb.pvalue; }},
  };
  std::string out = "statistic";
  for (const auto& [name, _] : reports) out += "," + name;
  out += "\n";
  for (const auto& [label, get] : rows) {
    out += label;
    for (const auto& [_, rep] : reports) {
      out += ",";
      out += label == std::string_view("count") ? std::to_string(rep.stats.count) : cell(get(rep));
    }
    out += "\n";
  }
  return out;
}

}  // namespace mefkit
