#pragma once

#include "mefkit/timeseries.hpp"

#include <span>
#include <string>
#include <vector>

namespace mefkit {

struct Standardization {
  double mean = 0.0;
  double std = 1.0;  // sample standard deviation (ddof = 1)
};

/// First differences of emissions and conventional generation, standardized
/// over the full series. Index t holds X[t+1] - X[t].
struct DiffPair {
  Timestamp start{};  // timestamp of the first level observation
  std::vector<double> de, dg;          // standardized
  std::vector<double> raw_de, raw_dg;  // t CO2, MWh
  Standardization e, g;

  std::size_t size() const { return de.size(); }
  /// Multiplier turning a standardized slope into t CO2 per MWh.
  double slope_scale() const { return e.std / g.std; }
};

/// Throws "zero-variance series" when generation never changes. Constant
/// emissions are allowed and give e.std == 0 (every MEF is zero).
DiffPair prepare_series(const TimeSeries& emissions, const TimeSeries& generation);

/// Half-open index range into a DiffPair.
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

// --- Markov switching dynamic regression ------------------------------------

struct MsdrOptions {
  int em_iterations = 500;
  double em_tol = 1e-8;  // on the log-likelihood
  int starts = 5;
  unsigned seed = 20240601;
  bool polish = true;  // quasi-Newton on the exact likelihood after EM
};

/// ΔE_t = β0_k + β1_k ΔG_t + e_t, e_t ~ N(0, σ²_k), S_t a k-state Markov chain
/// with the stationary distribution as its initial law. Regimes are sorted by
/// ascending β1.
struct RegimeFit {
  int k = 0;
  std::vector<double> beta0, beta1, sigma2;
  std::vector<std::vector<double>> P;         // P[i][j] = Pr(S_t = j | S_{t-1} = i)
  std::vector<std::vector<double>> filtered;  // [t][k] Pr(S_t | y_1..t)
  std::vector<std::vector<double>> smoothed;  // [t][k] Pr(S_t | y_1..T)
  double loglik = 0.0;
  std::vector<double> loglik_trace;  // accepted EM and quasi-Newton iterates
  double aic = 0.0;
  double bic = 0.0;
  bool converged = false;
  int iterations = 0;
  int requested_k = 0;  // differs from k after a degenerate-regime refit
  IndexRange window;

  int parameters() const { return 3 * k + k * (k - 1); }
};

RegimeFit fit_msdr(std::span<const double> y, std::span<const double> x, int k, const MsdrOptions& options = {});
RegimeFit fit_msdr(const DiffPair& pair, IndexRange window, int k, const MsdrOptions& options = {});

/// Hamilton filter for fixed parameters; fills filtered/smoothed and loglik.
void filter_msdr(RegimeFit& fit, std::span<const double> y, std::span<const double> x);

/// Fits k = 2 and k = 3 and returns the one with the lower BIC (ties: 2).
int select_k(std::span<const double> y, std::span<const double> x, const MsdrOptions& options = {});
int select_k(const DiffPair& pair, IndexRange window, const MsdrOptions& options = {});
/// Shared by select_k and the rolling estimator.
RegimeFit fit_best_msdr(std::span<const double> y, std::span<const double> x, const MsdrOptions& options = {});

/// Σ_k β1_k Pr(S_t = k | y_1..t), times slope_scale() when destandardizing.
std::vector<double> msdr_mef(const RegimeFit& fit, bool destandardize, const DiffPair& pair);

// --- Dynamic linear regression ----------------------------------------------

struct DlrOptions {
  double diffuse_variance = 1e6;
  int restarts = 3;
};

/// ΔE_t = α0_t + α1_t ΔG_t + v_t with random-walk coefficients.
struct DlrFit {
  std::vector<double> alpha0, alpha1;  // filtered means a_{t|t}
  double q0 = 0.0, q1 = 0.0;           // state noise variances
  double r = 0.0;                      // observation variance
  double loglik = 0.0;
  IndexRange window;
};

DlrFit fit_dlr(std::span<const double> y, std::span<const double> x, const DlrOptions& options = {});
DlrFit fit_dlr(const DiffPair& pair, IndexRange window, const DlrOptions& options = {});
/// Kalman filter for fixed variances.
DlrFit filter_dlr(std::span<const double> y, std::span<const double> x, double q0, double q1, double r,
                  double diffuse_variance = 1e6);
std::vector<double> dlr_mef(const DlrFit& fit, bool destandardize, const DiffPair& pair);

// --- Rolling estimation -----------------------------------------------------

enum class EstimatorModel { Msdr, Dlr };

EstimatorModel parse_estimator(const std::string& text);

/// Week tiles of `window_len` differences; a final remainder shorter than
/// the model's minimum window is merged into the previous tile.
std::vector<IndexRange> rolling_windows(std::size_t n, std::size_t window_len, std::size_t step, std::size_t min_len);

struct RollingResult {
  MefSeries mef;  // one value per level hour; hour 0 repeats hour 1
  std::vector<IndexRange> windows;
  std::vector<RegimeFit> msdr;
  std::vector<DlrFit> dlr;
};

RollingResult rolling_estimate(const DiffPair& pair, EstimatorModel model, std::size_t window_len = 168,
                               std::size_t step = 168, bool destandardize = true, const MsdrOptions& msdr = {},
                               const DlrOptions& dlr = {});

// --- Diagnostics ------------------------------------------------------------

struct AdfResult {
  double statistic = 0.0;
  double pvalue = 1.0;
  int lags = 0;
  std::size_t nobs = 0;
  double crit_1 = 0.0, crit_5 = 0.0, crit_10 = 0.0;
};

/// ADF regression with constant; lag by AIC up to floor(12 (T/100)^(1/4)).
AdfResult adf_test(std::span<const double> series);
/// MacKinnon (1994) approximate p-value, constant-only case.
double mackinnon_pvalue(double statistic);

struct JarqueBera {
  double statistic = 0.0;
  double pvalue = 1.0;
  double skewness = 0.0;
  double kurtosis = 0.0;  // not excess
};

JarqueBera jarque_bera(std::span<const double> series);

struct Descriptive {
  std::size_t count = 0;
  double mean = 0.0, std = 0.0, min = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, max = 0.0;
};

Descriptive describe(std::span<const double> series);

struct DiagnosticsReport {
  Descriptive stats;
  AdfResult adf;
  JarqueBera jb;
};

DiagnosticsReport diagnostics(std::span<const double> series);

/// Rows `count, mean, std, min, 25%, 50%, 75%, max, ADF, ADF p, JB, JB p`,
/// one column per named series.
std::string format_diagnostics(const std::vector<std::pair<std::string, DiagnosticsReport>>& reports);

}  // namespace mefkit
