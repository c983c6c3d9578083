// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "support.hpp"

#include "mefkit/charging.hpp"
#include "mefkit/estimators.hpp"
#include "mefkit/evalkit.hpp"
#include "mefkit/mef.hpp"
#include "mefkit/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>

using namespace mefkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Scenario fixture() { return load_scenario(fs::path(MEFKIT_DATA_DIR) / "toy_de_3tech"); }

double lp_dual_objective(const lp::LinearProgram& p, const lp::LpSolution& s) {
  double d = 0.0;
  for (int i = 0; i < p.num_rows(); ++i) d += p.row(i).rhs * s.duals[i];
  for (int j = 0; j < p.num_variables(); ++j) {
    const double r = s.reduced_costs[j];
    if (r > 0.0) d += r * p.lower(j);
    if (r < 0.0) d += r * p.upper(j);
  }
  return d;
}

Outcome lp_oracle() {
  const auto t0 = Clock::now();
  std::mt19937 rng(4242);
  double worst_obj = 0.0, worst_gap = 0.0;
  int optimal = 0;
  for (int k = 0; k < 50; ++k) {
    const testkit::DenseLp d = testkit::random_lp(rng);
    const double oracle = testkit::vertex_enumeration(d);
    const lp::LinearProgram p = testkit::to_program(d);
    const lp::LpSolution s = lp::solve(p);
    if (s.status != lp::Status::Optimal) continue;
    ++optimal;
    worst_obj = std::max(worst_obj, std::abs(s.objective_value - oracle) / (1.0 + std::abs(oracle)));
    worst_gap = std::max(worst_gap, std::abs(s.objective_value - lp_dual_objective(p, s)));
  }
  const double t = seconds_since(t0);
  return {optimal == 50 && worst_obj < 1e-8 && worst_gap < 1e-7 && t < 5.0,
          fmt("%.0f/50 optimal, max rel objective error %.2e, max duality gap %.2e, %.2f s", optimal, worst_obj,
              worst_gap, t)};
}

Outcome dispatch_merit() {
  const Scenario sc = fixture();
  const DispatchSolution s = run_year(sc);
  const auto residual = balance_residual(sc, s);
  double gen_err = 0.0, res = 0.0, price_err = 0.0;
  for (std::size_t h = 0; h < sc.hours(); ++h) {
    const auto m = testkit::merit_order(sc, h);
    for (std::size_t i = 0; i < sc.clusters.size(); ++i) gen_err = std::max(gen_err, std::abs(s.gen[i][h] - m.gen[i]));
    res = std::max(res, residual[h]);
    if (m.marginal >= 0 && m.margin > 0.0) {
      price_err = std::max(price_err, std::abs(s.price[0][h] - sc.clusters[m.marginal].cvar_full));
    }
  }
  const auto t0 = Clock::now();
  const DispatchSolution month = run_year(testkit::toy_year(30));
  const double t = seconds_since(t0);
  const bool ok = gen_err < 1e-9 && res < 1e-6 && price_err < 1e-9 && t < 10.0 && month.gen[0].size() == 720;
  return {ok, fmt("max |gen - merit| %.2e MWh, max residual %.2e MWh, max price error %.2e, 30-day run %.2f s", gen_err,
                  res, price_err, t)};
}

struct ToyYear {
  Scenario scenario;
  DispatchSolution baseline;
  MefRun mef;
  double seconds = 0.0;
};

const ToyYear& toy_year_run() {
  static const ToyYear run = [] {
    ToyYear r;
    r.scenario = testkit::toy_year(365);
    const auto t0 = Clock::now();
    r.baseline = run_year(r.scenario);
    r.mef = incremental_mef(r.scenario, r.baseline);
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

Outcome incremental_correctness() {
  const Scenario sc = fixture();
  const MefRun fx = incremental_mef(sc, run_year(sc));
  double rate_err = 0.0, min_mef = 0.0;
  std::size_t checked = 0;
  for (std::size_t h = 0; h < sc.hours(); ++h) {
    const auto m = testkit::merit_order(sc, h);
    min_mef = std::min(min_mef, fx.mef.series[h]);
    if (m.marginal < 0 || m.margin < 1.0) continue;
    rate_err = std::max(rate_err, std::abs(fx.mef.series[h] - sc.clusters[m.marginal].emission_rate()));
    ++checked;
  }

  // Wind covers demand with room to spare in the first eight hours of each day.
  std::vector<double> wind(48);
  for (std::size_t h = 0; h < 48; ++h) wind[h] = (h % 24) < 8 ? 1.0 : 0.2;
  Scenario cur = testkit::single_node("curtail", std::vector<double>(48, 40.0));
  cur.clusters.push_back(testkit::renewable("wind", "onshore", 60, wind));
  cur.clusters.push_back(testkit::thermal("gas", "gas", 50, 0.5, 0.2, 40, 48));
  const DispatchSolution cb = run_year(cur);
  const MefRun cm = incremental_mef(cur, cb);
  double curtail_mef = 0.0;
  std::size_t curtail_hours = 0;
  for (std::size_t h = 0; h < 48; ++h) {
    if (cb.curtailed[0][h] > 1.0) {
      curtail_mef = std::max(curtail_mef, std::abs(cm.mef.series[h]));
      ++curtail_hours;
    }
    min_mef = std::min(min_mef, cm.mef.series[h]);
  }

  const ToyYear& year = toy_year_run();
  for (double v : year.mef.mef.series.values()) min_mef = std::min(min_mef, v);
  const bool ok = checked == sc.hours() && rate_err < 1e-6 && curtail_hours == 16 && curtail_mef < 1e-6 &&
                  min_mef >= -1e-6 && year.mef.mef.series.size() == 8760 && year.mef.solves == 8760 + 365 &&
                  year.seconds < 600.0;
  return {ok, fmt("fixture max rate error %.2e over %.0f hours, curtailment |MEF| %.2e, min MEF %.2e", rate_err,
                  static_cast<double>(checked), curtail_mef, min_mef) +
                  fmt(", toy year %.0f solves in %.1f s", static_cast<double>(year.mef.solves), year.seconds)};
}

Outcome msdr_recovery() {
  const auto t0 = Clock::now();
  const std::vector<std::vector<double>> P = {{0.95, 0.05}, {0.05, 0.95}};
  int good = 0;
  double worst_b = 0.0, worst_p = 0.0;
  for (unsigned rep = 0; rep < 20; ++rep) {
    const auto d = testkit::simulate_regimes(2000, {0.0, 0.0}, {0.1, 0.9}, {0.04, 0.04}, P, 1000 + rep);
    const RegimeFit f = fit_msdr(d.y, d.x, 2);
    if (f.k != 2) continue;
    const double eb = std::max(std::abs(f.beta1[0] - 0.1), std::abs(f.beta1[1] - 0.9));
    const double ep = std::max(std::abs(f.P[0][0] - 0.95), std::abs(f.P[1][1] - 0.95));
    worst_b = std::max(worst_b, eb);
    worst_p = std::max(worst_p, ep);
    if (eb < 0.05 && ep < 0.05) ++good;
  }
  const double t = seconds_since(t0);
  return {good >= 19 && t < 60.0, fmt("%.0f/20 replications recovered, worst |b1 error| %.3f, worst |p_ii error| %.3f, %.1f s",
                                     good, worst_b, worst_p, t)};
}

Outcome estimator_ordering() {
  const ToyYear& year = toy_year_run();
  RunLog log;
  const TimeSeries e = emissions_series(year.baseline);
  const TimeSeries g = conventional_generation(year.scenario, year.baseline);
  const auto msdr = estimate_mef(e, g, EstimatorModel::Msdr, 168, true, kDefaultSeed, log);
  const auto dlr = estimate_mef(e, g, EstimatorModel::Dlr, 168, true, kDefaultSeed, log);
  const MetricReport m = compare(year.mef.mef.series, msdr.result.mef.series, "incremental", "msdr");
  const MetricReport d = compare(year.mef.mef.series, dlr.result.mef.series, "incremental", "dlr");
  return {m.mae <= d.mae && m.rmse <= d.rmse,
          fmt("MSDR MAE %.4f RMSE %.4f vs DLR MAE %.4f RMSE %.4f", m.mae, m.rmse, d.mae, d.rmse)};
}

Outcome dlr_exact() {
  std::mt19937 rng(6);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> x(168), y(168);
  for (std::size_t t = 0; t < x.size(); ++t) {
    x[t] = n01(rng);
    y[t] = 0.4 * x[t];
  }
  const DlrFit f = fit_dlr(y, x);
  double worst = 0.0;
  for (std::size_t t = 50; t < f.alpha1.size(); ++t) worst = std::max(worst, std::abs(f.alpha1[t] - 0.4));
  return {worst < 1e-3, fmt("max |alpha1 - 0.4| after 50 steps %.2e", worst)};
}

Outcome charging_optimality() {
  std::mt19937 rng(365);
  std::uniform_real_distribution<double> u(0.0, 1.2);
  std::vector<double> v(24 * 366);
  for (auto& x : v) x = u(rng);
  const MefSeries mef{TimeSeries(testkit::jan1(2020), v), MefSource::Incremental, "2020"};
  const ChargingPlan p = plan_charging(mef);
  std::size_t exact = 0;
  for (const auto& n : p.nights) {
    const auto b = static_cast<std::size_t>((n.start - mef.series.start()).count() / 3600);
    const std::vector<double> w(v.begin() + b, v.begin() + b + 10);
    if (n.e2 == testkit::subset_minimum(w)) ++exact;
  }

  std::vector<double> shifted = v;
  for (auto& x : shifted) x += 0.5;
  const ChargingPlan q = plan_charging({TimeSeries(testkit::jan1(2020), shifted), MefSource::Incremental, "2020"});
  bool invariant = q.nights.size() == p.nights.size();
  for (std::size_t d = 0; invariant && d < p.nights.size(); ++d) {
    invariant = q.nights[d].mask == p.nights[d].mask && std::abs(q.nights[d].e2 - p.nights[d].e2 - 2.0) < 1e-9;
  }

  const ChargingPlan flat = plan_charging({testkit::constant(24 * 30, 0.4), MefSource::Incremental, "2019"});

  const SavingsSummary reference = savings_summary(std::vector<YearSavings>{{"2019", 868.96, 561.02, 307.93},
                                                                        {"2020", 757.49, 577.44, 180.06},
                                                                        {"2030", 650.13, 466.58, 183.55},
                                                                        {"2040", 338.94, 212.51, 126.43},
                                                                        {"2050", 327.36, 207.23, 120.13}});
  const bool ok = p.nights.size() == 365 && exact == 365 && invariant && flat.saving == 0.0 &&
                  std::abs(reference.pooled_percent - 31.0) < 1.0;
  return {ok, fmt("%.0f/365 nights exact, shift invariant %.0f, constant saving %.1f, reference totals %.2f%%",
                  static_cast<double>(exact), invariant ? 1.0 : 0.0, flat.saving, reference.pooled_percent)};
}

Outcome metric_identities() {
  std::mt19937 rng(8);
  std::normal_distribution<double> n01(0.0, 1.0);
  int good = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 2 + rng() % 100;
    std::vector<double> a(n), e(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = n01(rng);
      e[i] = n01(rng);
    }
    const MetricReport r = compare(a, e);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<double> pa(n), pe(n), sa(n), se(n);
    const double c = 0.1 + 5.0 * std::abs(n01(rng));
    for (std::size_t i = 0; i < n; ++i) {
      pa[i] = a[idx[i]];
      pe[i] = e[idx[i]];
      sa[i] = -c * a[i];
      se[i] = -c * e[i];
    }
    const MetricReport p = compare(pa, pe);
    const MetricReport s = compare(sa, se);
    auto close = [](double x, double y) { return std::abs(x - y) <= 1e-12 * (1.0 + std::abs(y)); };
    if (close(r.rmse, std::sqrt(r.mse)) && r.mae <= r.rmse + 1e-15 && close(p.mae, r.mae) && close(p.mse, r.mse) &&
        close(s.mae, c * r.mae) && close(s.rmse, c * r.rmse) && close(s.mse, c * c * r.mse)) {
      ++good;
    }
  }
  return {good == 1000, fmt("%.0f/1000 pairs satisfy all identities", good)};
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = testkit::read_file(e.path());
  }
  return files;
}

Outcome determinism() {
  const fs::path root = testkit::scratch_dir("acceptance_determinism");
  const fs::path scenario = fs::path(MEFKIT_DATA_DIR) / "toy_de_3tech";
  PipelineOptions a;
  a.jobs = 2;
  PipelineOptions b;
  b.jobs = 1;
  RunLog la, lb;
  run_pipeline(scenario, root / "run1", a, la);
  run_pipeline(scenario, root / "run2", b, lb);
  const auto ta = tree(root / "run1");
  const auto tb = tree(root / "run2");
  return {!ta.empty() && ta == tb, fmt("%.0f files, trees identical %.0f", static_cast<double>(ta.size()),
                                       ta == tb ? 1.0 : 0.0)};
}

Outcome diagnostics_sanity() {
  int noise_ok = 0, walk_ok = 0;
  for (unsigned rep = 0; rep < 100; ++rep) {
    std::mt19937 rng(700 + rep);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<double> noise(500), walk(500);
    double level = 0.0;
    for (std::size_t t = 0; t < noise.size(); ++t) {
      noise[t] = n01(rng);
      level += n01(rng);
      walk[t] = level;
    }
    if (adf_test(noise).pvalue < 0.05) ++noise_ok;
    if (adf_test(walk).pvalue >= 0.05) ++walk_ok;
  }
  return {noise_ok >= 90 && walk_ok >= 90,
          fmt("i.i.d. noise rejected %.0f/100, random walk not rejected %.0f/100", noise_ok, walk_ok)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"LP oracle equivalence", lp_oracle},
      {"dispatch merit order", dispatch_merit},
      {"incremental MEF correctness", incremental_correctness},
      {"MSDR recovery", msdr_recovery},
      {"estimator ordering", estimator_ordering},
      {"DLR exact fit", dlr_exact},
      {"charging optimality", charging_optimality},
      {"metric identities", metric_identities},
      {"determinism", determinism},
      {"diagnostics sanity", diagnostics_sanity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
