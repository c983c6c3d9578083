#include "mefkit/estimators.hpp"

#include "solver_log.hpp"

#include <ceres/autodiff_first_order_function.h>
#include <ceres/ceres.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace mefkit {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

using Matrix = std::vector<std::vector<double>>;

struct Params {
  int k = 0;
  std::vector<double> b0, b1, s2;
  Matrix P;
};

// Solves pi = pi P, sum(pi) = 1 by Gaussian elimination on (I - P') with the
// last equation replaced by the normalization.
template <typename T, int K>
void stationary(const T (&P)[K][K], T (&pi)[K]) {
  using std::abs;
  T A[K][K + 1];
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j) A[i][j] = (i == j ? T(1.0) : T(0.0)) - P[j][i];
    A[i][K] = T(0.0);
  }
  for (int j = 0; j < K; ++j) A[K - 1][j] = T(1.0);
  A[K - 1][K] = T(1.0);
  for (int c = 0; c < K; ++c) {
    int piv = c;
    for (int r = c + 1; r < K; ++r) {
      if (abs(A[r][c]) > abs(A[piv][c])) piv = r;
    }
    if (piv != c) {
      for (int j = 0; j <= K; ++j) std::swap(A[c][j], A[piv][j]);
    }
    for (int r = 0; r < K; ++r) {
      if (r == c) continue;
      const T f = A[r][c] / A[c][c];
      for (int j = c; j <= K; ++j) A[r][j] -= f * A[c][j];
    }
  }
  for (int i = 0; i < K; ++i) pi[i] = A[i][K] / A[i][i];
}

std::vector<double> stationary(const Matrix& P) {
  const int k = static_cast<int>(P.size());
  std::vector<double> pi(k, 1.0 / k);
  auto copy = [&](auto kk) {
    constexpr int K = decltype(kk)::value;
    double M[K][K];
    double out[K];
    for (int i = 0; i < K; ++i) {
      for (int j = 0; j < K; ++j) M[i][j] = P[i][j];
    }
    stationary<double, K>(M, out);
    for (int i = 0; i < K; ++i) pi[i] = out[i];
  };
  switch (k) {
    case 1: return {1.0};
    case 2: copy(std::integral_constant<int, 2>{}); break;
    case 3: copy(std::integral_constant<int, 3>{}); break;
    default: throw std::invalid_argument("only 1 to 3 regimes are supported");
  }
  for (double& p : pi) p = std::clamp(p, 0.0, 1.0);
  const double s = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (double& p : pi) p /= s;
  return pi;
}

struct FilterOutput {
  std::vector<std::vector<double>> predicted, filtered;
  double loglik = 0.0;
};

FilterOutput hamilton(const Params& p, std::span<const double> y, std::span<const double> x) {
  const std::size_t n = y.size();
  const int k = p.k;
  FilterOutput out;
  out.predicted.assign(n, std::vector<double>(k));
  out.filtered.assign(n, std::vector<double>(k));
  std::vector<double> pred = stationary(p.P);
  std::vector<double> logf(k), w(k);
  for (std::size_t t = 0; t < n; ++t) {
    out.predicted[t] = pred;
    double mx = -INFINITY;
    for (int j = 0; j < k; ++j) {
      const double r = y[t] - p.b0[j] - p.b1[j] * x[t];
      logf[j] = -0.5 * (kLog2Pi + std::log(p.s2[j]) + r * r / p.s2[j]);
      mx = std::max(mx, logf[j]);
    }
    double lik = 0.0;
    for (int j = 0; j < k; ++j) {
      w[j] = pred[j] * std::exp(logf[j] - mx);
      lik += w[j];
    }
    out.loglik += std::log(lik) + mx;
    for (int j = 0; j < k; ++j) out.filtered[t][j] = w[j] / lik;
    for (int j = 0; j < k; ++j) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += out.filtered[t][i] * p.P[i][j];
      pred[j] = s;
    }
  }
  return out;
}

std::vector<std::vector<double>> kim_smoother(const Params& p, const FilterOutput& f) {
  const std::size_t n = f.filtered.size();
  const int k = p.k;
  std::vector<std::vector<double>> sm(n, std::vector<double>(k));
  if (n == 0) return sm;
  sm[n - 1] = f.filtered[n - 1];
  for (std::size_t t = n - 1; t-- > 0;) {
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
      double s = 0.0;
      for (int j = 0; j < k; ++j) {
        if (f.predicted[t + 1][j] > 0.0) s += p.P[i][j] * sm[t + 1][j] / f.predicted[t + 1][j];
      }
      sm[t][i] = f.filtered[t][i] * s;
      total += sm[t][i];
    }
    for (int i = 0; i < k; ++i) sm[t][i] /= total;
  }
  return sm;
}

double variance(std::span<const double> v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double a : v) s += (a - m) * (a - m);
  return s / static_cast<double>(v.size());
}

// One EM step: smoothed regime weights give weighted least squares for the
// regressions and expected transition counts for P.
Params em_step(const Params& p, const FilterOutput& f, std::span<const double> y, std::span<const double> x,
               double s2_floor) {
  const int k = p.k;
  const std::size_t n = y.size();
  const auto sm = kim_smoother(p, f);
  Params q = p;
  Matrix counts(k, std::vector<double>(k, 0.0));
  for (std::size_t t = 0; t + 1 < n; ++t) {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        if (f.predicted[t + 1][j] <= 0.0) continue;
        counts[i][j] += f.filtered[t][i] * p.P[i][j] * sm[t + 1][j] / f.predicted[t + 1][j];
      }
    }
  }
  for (int i = 0; i < k; ++i) {
    const double row = std::accumulate(counts[i].begin(), counts[i].end(), 0.0);
    if (row <= 1e-12) continue;
    double norm = 0.0;
    for (int j = 0; j < k; ++j) {
      q.P[i][j] = std::max(counts[i][j] / row, 1e-8);
      norm += q.P[i][j];
    }
    for (int j = 0; j < k; ++j) q.P[i][j] /= norm;
  }
  for (int j = 0; j < k; ++j) {
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const double g = sm[t][j];
      sw += g;
      sx += g * x[t];
      sy += g * y[t];
      sxx += g * x[t] * x[t];
      sxy += g * x[t] * y[t];
    }
    if (sw < 1e-10) continue;
    const double det = sw * sxx - sx * sx;
    if (std::abs(det) > 1e-12 * sw * sw) {
      q.b1[j] = (sw * sxy - sx * sy) / det;
      q.b0[j] = (sy - q.b1[j] * sx) / sw;
    } else {
      q.b1[j] = 0.0;
      q.b0[j] = sy / sw;
    }
    double ss = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double r = y[t] - q.b0[j] - q.b1[j] * x[t];
      ss += sm[t][j] * r * r;
    }
    q.s2[j] = std::max(ss / sw, s2_floor);
  }
  return q;
}

template <int K>
struct NegLogLik {
  std::span<const double> y, x;

  template <typename T>
  bool operator()(const T* th, T* cost) const {
    using std::exp;
    using std::log;
    T b0[K], b1[K], s2[K], P[K][K], pi[K];
    for (int j = 0; j < K; ++j) {
      b0[j] = th[j];
      b1[j] = th[K + j];
      s2[j] = exp(th[2 * K + j]);
    }
    int idx = 3 * K;
    for (int i = 0; i < K; ++i) {
      T z[K];
      T mx(0.0);
      for (int j = 0; j + 1 < K; ++j) {
        z[j] = th[idx++];
        if (z[j] > mx) mx = z[j];
      }
      z[K - 1] = T(0.0);
      T s(0.0);
      for (int j = 0; j < K; ++j) {
        z[j] = exp(z[j] - mx);
        s += z[j];
      }
      for (int j = 0; j < K; ++j) P[i][j] = z[j] / s;
    }
    if constexpr (K == 1) {
      pi[0] = T(1.0);
    } else {
      stationary<T, K>(P, pi);
    }
    T ll(0.0);
    T pred[K], logf[K], w[K];
    for (int j = 0; j < K; ++j) pred[j] = pi[j];
    for (std::size_t t = 0; t < y.size(); ++t) {
      T mx = T(-1e300);
      for (int j = 0; j < K; ++j) {
        const T r = y[t] - b0[j] - b1[j] * x[t];
        logf[j] = -0.5 * (kLog2Pi + log(s2[j]) + r * r / s2[j]);
        if (logf[j] > mx) mx = logf[j];
      }
      T lik(0.0);
      for (int j = 0; j < K; ++j) {
        w[j] = pred[j] * exp(logf[j] - mx);
        lik += w[j];
      }
      ll += log(lik) + mx;
      for (int j = 0; j < K; ++j) {
        T s(0.0);
        for (int i = 0; i < K; ++i) s += w[i] / lik * P[i][j];
        pred[j] = s;
      }
    }
    cost[0] = -ll;
    return true;
  }
};

std::vector<double> pack(const Params& p) {
  const int k = p.k;
  std::vector<double> th;
  for (int j = 0; j < k; ++j) th.push_back(p.b0[j]);
  for (int j = 0; j < k; ++j) th.push_back(p.b1[j]);
  for (int j = 0; j < k; ++j) th.push_back(std::log(p.s2[j]));
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j + 1 < k; ++j) th.push_back(std::log(p.P[i][j] / p.P[i][k - 1]));
  }
  return th;
}

Params unpack(const std::vector<double>& th, int k) {
  Params p;
  p.k = k;
  p.b0.assign(th.begin(), th.begin() + k);
  p.b1.assign(th.begin() + k, th.begin() + 2 * k);
  for (int j = 0; j < k; ++j) p.s2.push_back(std::exp(th[2 * k + j]));
  p.P.assign(k, std::vector<double>(k));
  int idx = 3 * k;
  for (int i = 0; i < k; ++i) {
    std::vector<double> z(k, 0.0);
    for (int j = 0; j + 1 < k; ++j) z[j] = th[idx++];
    const double mx = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double& v : z) {
      v = std::exp(v - mx);
      s += v;
    }
    for (int j = 0; j < k; ++j) p.P[i][j] = z[j] / s;
  }
  return p;
}

template <int K>
bool polish_impl(Params& p, std::span<const double> y, std::span<const double> x, std::vector<double>& trace) {
  std::vector<double> th = pack(p);
  if (static_cast<int>(th.size()) != 3 * K + K * (K - 1)) return false;
  ceres::GradientProblem problem(
      new ceres::AutoDiffFirstOrderFunction<NegLogLik<K>, 3 * K + K * (K - 1)>(new NegLogLik<K>{y, x}));
  ceres::GradientProblemSolver::Options opt;
  opt.line_search_direction_type = ceres::BFGS;
  opt.max_num_iterations = 200;
  opt.function_tolerance = 1e-12;
  opt.gradient_tolerance = 1e-9;
  opt.parameter_tolerance = 1e-12;
  opt.logging_type = ceres::SILENT;
  detail::quiet_solver_logs();
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(opt, problem, th.data(), &summary);
  for (const auto& it : summary.iterations) {
    if (it.step_is_valid && it.iteration > 0) trace.push_back(-it.cost);
  }
  p = unpack(th, K);
  return summary.IsSolutionUsable();
}

bool polish(Params& p, std::span<const double> y, std::span<const double> x, std::vector<double>& trace) {
  switch (p.k) {
    case 1: return polish_impl<1>(p, y, x, trace);
    case 2: return polish_impl<2>(p, y, x, trace);
    case 3: return polish_impl<3>(p, y, x, trace);
    default: return false;
  }
}

// Deterministic uniform in [-0.5, 0.5) from the raw engine output.
double jitter(std::mt19937& rng) { return static_cast<double>(rng()) / 4294967296.0 - 0.5; }

Params initial_params(int k, int start, std::span<const double> y, std::span<const double> x, unsigned seed) {
  const std::size_t n = y.size();
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t t = 0; t < n; ++t) {
    sxx += (x[t] - mx) * (x[t] - mx);
    sxy += (x[t] - mx) * (y[t] - my);
  }
  const double b1 = sxx > 0 ? sxy / sxx : 0.0;
  const double b0 = my - b1 * mx;
  double ss = 0.0;
  for (std::size_t t = 0; t < n; ++t) ss += std::pow(y[t] - b0 - b1 * x[t], 2);
  const double s2 = std::max(ss / n, 1e-12);
  const double slope_sd = std::sqrt(std::max(variance(y), 1e-12) / std::max(sxx / n, 1e-12));

  static constexpr double kSpread[] = {0.8, 0.4, 1.6, 0.2, 1.2, 0.6, 2.0};
  std::mt19937 rng(seed + 7919u * static_cast<unsigned>(start));
  Params p;
  p.k = k;
  for (int j = 0; j < k; ++j) {
    const double pos = k == 1 ? 0.0 : (static_cast<double>(j) / (k - 1) - 0.5);
    const double spread = kSpread[start % 7] * slope_sd;
    p.b1.push_back(b1 + spread * pos + (start == 0 ? 0.0 : 0.1 * slope_sd * jitter(rng)));
    p.b0.push_back(b0 + (start == 0 ? 0.0 : 0.2 * std::sqrt(s2) * jitter(rng)));
    p.s2.push_back(s2 * (start == 0 ? 0.5 : 0.3 + 0.4 * (jitter(rng) + 0.5)));
  }
  const double stay = k == 1 ? 1.0 : 0.9;
  p.P.assign(k, std::vector<double>(k, k == 1 ? 1.0 : (1.0 - stay) / (k - 1)));
  for (int i = 0; i < k; ++i) p.P[i][i] = stay;
  return p;
}

RegimeFit to_fit(const Params& p, std::span<const double> y, std::span<const double> x) {
  RegimeFit fit;
  fit.k = p.k;
  fit.beta0 = p.b0;
  fit.beta1 = p.b1;
  fit.sigma2 = p.s2;
  fit.P = p.P;
  filter_msdr(fit, y, x);
  return fit;
}

void canonicalize(RegimeFit& fit) {
  const int k = fit.k;
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (fit.beta1[a] != fit.beta1[b]) return fit.beta1[a] < fit.beta1[b];
    if (fit.beta0[a] != fit.beta0[b]) return fit.beta0[a] < fit.beta0[b];
    return fit.sigma2[a] < fit.sigma2[b];
  });
  auto permute = [&](std::vector<double>& v) {
    std::vector<double> w(k);
    for (int j = 0; j < k; ++j) w[j] = v[order[j]];
    v = std::move(w);
  };
  permute(fit.beta0);
  permute(fit.beta1);
  permute(fit.sigma2);
  Matrix P(k, std::vector<double>(k));
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) P[i][j] = fit.P[order[i]][order[j]];
  }
  fit.P = std::move(P);
  for (auto& row : fit.filtered) permute(row);
  for (auto& row : fit.smoothed) permute(row);
}

RegimeFit fit_fixed_k(std::span<const double> y, std::span<const double> x, int k, const MsdrOptions& opt) {
  const double s2_floor = std::max(1e-10 * variance(y), 1e-300);
  Params best;
  double best_ll = -INFINITY;
  std::vector<double> best_trace;
  bool best_converged = false;
  int best_iterations = 0;
  const int starts = k == 1 ? 1 : std::max(1, opt.starts);
  for (int s = 0; s < starts; ++s) {
    Params p = initial_params(k, s, y, x, opt.seed);
    FilterOutput f = hamilton(p, y, x);
    std::vector<double> trace{f.loglik};
    bool converged = false;
    int it = 0;
    for (; it < opt.em_iterations; ++it) {
      Params q = em_step(p, f, y, x, s2_floor);
      FilterOutput g = hamilton(q, y, x);
      if (!std::isfinite(g.loglik) || g.loglik < f.loglik - 1e-12) {
        converged = true;  // EM no longer improves the exact likelihood
        break;
      }
      const double gain = g.loglik - f.loglik;
      p = std::move(q);
      f = std::move(g);
      trace.push_back(f.loglik);
      if (gain < opt.em_tol * (1.0 + std::abs(f.loglik))) {
        converged = true;
        break;
      }
    }
    if (opt.polish) {
      Params q = p;
      std::vector<double> polish_trace;
      polish(q, y, x, polish_trace);
      const bool floor_ok = std::all_of(q.s2.begin(), q.s2.end(), [&](double v) { return v >= s2_floor; });
      const FilterOutput g = hamilton(q, y, x);
      if (floor_ok && std::isfinite(g.loglik) && g.loglik >= f.loglik) {
        p = std::move(q);
        f = g;
        for (double v : polish_trace) {
          if (v >= trace.back()) trace.push_back(v);
        }
        if (trace.back() < f.loglik) trace.push_back(f.loglik);
      }
    }
    if (f.loglik > best_ll) {
      best_ll = f.loglik;
      best = p;
      best_trace = std::move(trace);
      best_converged = converged;
      best_iterations = it;
    }
  }
  RegimeFit fit = to_fit(best, y, x);
  fit.loglik_trace = std::move(best_trace);
  fit.converged = best_converged;
  fit.iterations = best_iterations;
  canonicalize(fit);
  return fit;
}

}  // namespace

void filter_msdr(RegimeFit& fit, std::span<const double> y, std::span<const double> x) {
  Params p{fit.k, fit.beta0, fit.beta1, fit.sigma2, fit.P};
  const FilterOutput f = hamilton(p, y, x);
  fit.filtered = f.filtered;
  fit.smoothed = kim_smoother(p, f);
  fit.loglik = f.loglik;
  const double n = static_cast<double>(y.size());
  fit.aic = 2.0 * fit.parameters() - 2.0 * fit.loglik;
  fit.bic = std::log(n) * fit.parameters() - 2.0 * fit.loglik;
}

RegimeFit fit_msdr(std::span<const double> y, std::span<const double> x, int k, const MsdrOptions& opt) {
  if (y.size() != x.size()) throw std::invalid_argument("MSDR: series lengths differ");
  if (k < 1 || k > 3) throw std::invalid_argument("MSDR: k must be 1, 2 or 3");
  if (y.size() < static_cast<std::size_t>(10 * k)) {
    throw std::invalid_argument("MSDR: window of " + std::to_string(y.size()) + " is shorter than 10*k");
  }
  for (int kk = k; kk >= 1; --kk) {
    RegimeFit fit = fit_fixed_k(y, x, kk, opt);
    fit.requested_k = k;
    bool degenerate = false;
    for (int j = 0; j < kk; ++j) {
      double occ = 0.0;
      for (const auto& row : fit.smoothed) occ += row[j];
      if (occ < 2.0) degenerate = true;
    }
    if (!degenerate || kk == 1) return fit;
  }
  throw std::logic_error("unreachable");
}

RegimeFit fit_msdr(const DiffPair& pair, IndexRange w, int k, const MsdrOptions& opt) {
  if (w.end > pair.size() || w.begin >= w.end) throw std::invalid_argument("MSDR: window out of range");
  RegimeFit fit = fit_msdr(std::span(pair.de).subspan(w.begin, w.size()), std::span(pair.dg).subspan(w.begin, w.size()), k, opt);
  fit.window = w;
  return fit;
}

RegimeFit fit_best_msdr(std::span<const double> y, std::span<const double> x, const MsdrOptions& opt) {
  RegimeFit two = fit_msdr(y, x, 2, opt);
  if (y.size() < 30) return two;
  RegimeFit three = fit_msdr(y, x, 3, opt);
  return three.bic < two.bic ? three : two;
}

int select_k(std::span<const double> y, std::span<const double> x, const MsdrOptions& opt) {
  const RegimeFit best = fit_best_msdr(y, x, opt);
  return best.requested_k == 3 && best.k == 3 ? 3 : 2;
}

int select_k(const DiffPair& pair, IndexRange w, const MsdrOptions& opt) {
  return select_k(std::span(pair.de).subspan(w.begin, w.size()), std::span(pair.dg).subspan(w.begin, w.size()), opt);
}

std::vector<double> msdr_mef(const RegimeFit& fit, bool destandardize, const DiffPair& pair) {
  const double scale = destandardize ? pair.slope_scale() : 1.0;
  std::vector<double> out(fit.filtered.size(), 0.0);
  for (std::size_t t = 0; t < out.size(); ++t) {
    double s = 0.0;
    for (int j = 0; j < fit.k; ++j) s += fit.beta1[j] * fit.filtered[t][j];
    out[t] = s * scale;
  }
  return out;
}

}  // namespace mefkit
