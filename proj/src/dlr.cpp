#include "mefkit/estimators.hpp"

#include "solver_log.hpp"

#include <ceres/autodiff_first_order_function.h>
#include <ceres/ceres.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mefkit {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
// Observations absorbed by the diffuse prior before the likelihood counts.
constexpr std::size_t kDiffuse = 2;

template <typename T>
struct KalmanState {
  T a0, a1;
  T p00, p01, p11;
};

// One predict/update cycle of the random-walk coefficient filter; returns the
// log-density of the observation. Covariance update uses the Joseph form.
template <typename T>
T kalman_step(KalmanState<T>& s, double y, double x, const T& q0, const T& q1, const T& r) {
  using std::log;
  s.p00 += q0;
  s.p11 += q1;
  const T pz0 = s.p00 + s.p01 * x;  // P z'
  const T pz1 = s.p01 + s.p11 * x;
  const T F = pz0 + pz1 * x + r;
  const T v = y - s.a0 - s.a1 * x;
  const T k0 = pz0 / F;
  const T k1 = pz1 / F;
  s.a0 += k0 * v;
  s.a1 += k1 * v;
  // (I - K z) P (I - K z)' + K r K'
  const T m00 = 1.0 - k0, m01 = -k0 * x, m10 = -k1, m11 = 1.0 - k1 * x;
  const T t00 = m00 * s.p00 + m01 * s.p01, t01 = m00 * s.p01 + m01 * s.p11;
  const T t10 = m10 * s.p00 + m11 * s.p01, t11 = m10 * s.p01 + m11 * s.p11;
  const T n00 = t00 * m00 + t01 * m01 + k0 * k0 * r;
  const T n01 = t00 * m10 + t01 * m11 + k0 * k1 * r;
  const T n11 = t10 * m10 + t11 * m11 + k1 * k1 * r;
  s.p00 = n00;
  s.p01 = n01;
  s.p11 = n11;
  return -0.5 * (kLog2Pi + log(F) + v * v / F);
}

struct Bounds {
  double lo, hi;
  template <typename T>
  T map(const T& u) const {
    using std::exp;
    return exp(lo + (hi - lo) / (1.0 + exp(-u)));
  }
  double unmap(double v) const {
    const double z = std::clamp((std::log(v) - lo) / (hi - lo), 1e-9, 1.0 - 1e-9);
    return std::log(z / (1.0 - z));
  }
};

struct DlrNll {
  std::span<const double> y, x;
  Bounds q0b, q1b, rb;
  double kappa;

  template <typename T>
  bool operator()(const T* u, T* cost) const {
    const T q0 = q0b.map(u[0]);
    const T q1 = q1b.map(u[1]);
    const T r = rb.map(u[2]);
    KalmanState<T> s{T(0.0), T(0.0), T(kappa), T(0.0), T(kappa)};
    T ll(0.0);
    for (std::size_t t = 0; t < y.size(); ++t) {
      const T l = kalman_step(s, y[t], x[t], q0, q1, r);
      if (t >= kDiffuse) ll += l;
    }
    cost[0] = -ll;
    return true;
  }
};

double variance(std::span<const double> v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double a : v) s += (a - m) * (a - m);
  return s / static_cast<double>(v.size());
}

}  // namespace

DlrFit filter_dlr(std::span<const double> y, std::span<const double> x, double q0, double q1, double r, double kappa) {
  if (y.size() != x.size()) throw std::invalid_argument("DLR: series lengths differ");
  DlrFit fit;
  fit.q0 = q0;
  fit.q1 = q1;
  fit.r = r;
  KalmanState<double> s{0.0, 0.0, kappa, 0.0, kappa};
  for (std::size_t t = 0; t < y.size(); ++t) {
    // Rounding tolerance relative to the predicted covariance.
    const double scale = (s.p00 + q0) * (s.p11 + q1);
    const double l = kalman_step(s, y[t], x[t], q0, q1, r);
    const double det = s.p00 * s.p11 - s.p01 * s.p01;
    const double tol = 1e-12 * (1.0 + std::sqrt(scale));
    if (!std::isfinite(l) || !std::isfinite(s.a1) || s.p00 < -tol || s.p11 < -tol || det < -1e-12 * (1.0 + scale)) {
      throw std::runtime_error("DLR filter diverged at step " + std::to_string(t));
    }
    if (t >= kDiffuse) fit.loglik += l;
    fit.alpha0.push_back(s.a0);
    fit.alpha1.push_back(s.a1);
  }
  return fit;
}

DlrFit fit_dlr(std::span<const double> y, std::span<const double> x, const DlrOptions& opt) {
  if (y.size() != x.size()) throw std::invalid_argument("DLR: series lengths differ");
  if (y.size() < 20) throw std::invalid_argument("DLR: window of " + std::to_string(y.size()) + " is shorter than 20");
  const double vx = variance(x);
  if (!(vx > 0.0)) throw std::invalid_argument("regressor has zero variance");
  const double vy = std::max(variance(y), 1e-12);
  const double slope_var = vy / vx;
  const Bounds q0b{std::log(1e-10 * vy), std::log(10.0 * vy)};
  const Bounds q1b{std::log(1e-10 * slope_var), std::log(10.0 * slope_var)};
  // Below ~1e-8 vy the diffuse start loses the covariance to rounding.
  const Bounds rb{std::log(1e-8 * vy), std::log(10.0 * vy)};

  static constexpr double kStarts[][3] = {{1e-3, 1e-3, 0.5}, {1e-2, 1e-2, 0.1}, {1e-4, 1e-1, 0.3}, {1e-1, 1e-4, 0.8}};
  double best_cost = INFINITY;
  double best[3] = {0, 0, 0};
  const int restarts = std::clamp(opt.restarts, 1, 4);
  for (int s = 0; s < restarts; ++s) {
    double u[3] = {q0b.unmap(kStarts[s][0] * vy), q1b.unmap(kStarts[s][1] * slope_var), rb.unmap(kStarts[s][2] * vy)};
    ceres::GradientProblem problem(
        new ceres::AutoDiffFirstOrderFunction<DlrNll, 3>(new DlrNll{y, x, q0b, q1b, rb, opt.diffuse_variance}));
    ceres::GradientProblemSolver::Options o;
    o.line_search_direction_type = ceres::BFGS;
    o.max_num_iterations = 200;
    o.function_tolerance = 1e-12;
    o.gradient_tolerance = 1e-10;
    o.logging_type = ceres::SILENT;
    detail::quiet_solver_logs();
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(o, problem, u, &summary);
    if (std::isfinite(summary.final_cost) && summary.final_cost < best_cost) {
      best_cost = summary.final_cost;
      std::copy(u, u + 3, best);
    }
  }
  if (!std::isfinite(best_cost)) throw std::runtime_error("DLR likelihood is not finite at any start");
  return filter_dlr(y, x, q0b.map(best[0]), q1b.map(best[1]), rb.map(best[2]), opt.diffuse_variance);
}

DlrFit fit_dlr(const DiffPair& pair, IndexRange w, const DlrOptions& opt) {
  if (w.end > pair.size() || w.begin >= w.end) throw std::invalid_argument("DLR: window out of range");
  DlrFit fit = fit_dlr(std::span(pair.de).subspan(w.begin, w.size()), std::span(pair.dg).subspan(w.begin, w.size()), opt);
  fit.window = w;
  return fit;
}

std::vector<double> dlr_mef(const DlrFit& fit, bool destandardize, const DiffPair& pair) {
  const double scale = destandardize ? pair.slope_scale() : 1.0;
  std::vector<double> out(fit.alpha1.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = fit.alpha1[t] * scale;
  return out;
}

}  // namespace mefkit
