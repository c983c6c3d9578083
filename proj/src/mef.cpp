#include "mefkit/mef.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

namespace mefkit {

std::vector<PerturbationJob> perturbation_plan(std::size_t hours) {
  if (hours == 0) throw std::invalid_argument("perturbation plan needs at least one hour");
  std::vector<PerturbationJob> jobs;
  jobs.reserve(hours);
  for (std::size_t h = 0; h < hours; ++h) jobs.push_back({h / 24, h});
  return jobs;
}

HourRange parse_hour_range(const std::string& text, std::size_t hours) {
  if (text == "all") return {0, hours};
  const auto dash = text.find('-');
  if (dash == std::string::npos) throw std::invalid_argument("hour range must be 'all' or 'a-b': " + text);
  const double a = parse_double(text.substr(0, dash));
  const double b = parse_double(text.substr(dash + 1));
  if (a < 0 || b < a || b >= static_cast<double>(hours) || a != std::floor(a) || b != std::floor(b)) {
    throw std::invalid_argument("hour range out of bounds: " + text);
  }
  return {static_cast<std::size_t>(a), static_cast<std::size_t>(b) + 1};
}

namespace {

struct WindowOutput {
  std::vector<std::pair<std::size_t, double>> values;
  std::size_t solves = 0;
  std::size_t rechained = 0;
  std::size_t drifting = 0;
  std::vector<std::string> log;
};

double day_emissions(const DispatchSolution& sol, std::size_t day) {
  double sum = 0.0;
  for (std::size_t h = 24 * day; h < 24 * (day + 1); ++h) sum += sol.emissions[h];
  return sum;
}

// Emission change in later days when the perturbed end state is carried
// forward until it rejoins the baseline.
double rechain(const Scenario& sc, const DispatchSolution& baseline, std::size_t next_day, CarriedState state,
               const MefOptions& opt, WindowOutput& out) {
  double diff = 0.0;
  for (std::size_t d = next_day; d < sc.days(); ++d) {
    if (state_distance(state, baseline.day_state[d]) <= opt.drift_tol) break;
    const DispatchWindow w = make_window(sc, d, std::move(state));
    const WindowModel m = build_window_model(sc, w);
    lp::SimplexSolver solver(m.lp);
    WindowResult r = solve_window(sc, w, m, solver);
    ++out.solves;
    ++out.rechained;
    diff += r.kept_emissions - day_emissions(baseline, d);
    state = std::move(r.end_state);
  }
  return diff;
}

WindowOutput run_window(const Scenario& sc, const DispatchSolution& baseline, std::size_t day, std::size_t h_begin,
                        std::size_t h_end, int node, const MefOptions& opt) {
  WindowOutput out;
  const DispatchWindow w = make_window(sc, day, baseline.day_state[day]);
  const WindowModel model = build_window_model(sc, w);
  lp::SimplexSolver base_solver(model.lp);
  const WindowResult base = solve_window(sc, w, model, base_solver);
  ++out.solves;

  const double recorded = day_emissions(baseline, day);
  if (std::abs(base.kept_emissions - recorded) > 1e-6 * (1.0 + std::abs(recorded))) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "day %zu: re-solved baseline emissions %.9g differ from recorded %.9g", day,
                  base.kept_emissions, recorded);
    out.log.emplace_back(buf);
  }

  for (std::size_t h = h_begin; h < h_end; ++h) {
    lp::SimplexSolver solver = base_solver;
    const std::size_t t = h - w.first_hour;
    solver.set_rhs(model.balance_row[node][t], sc.nodes[node].demand[h] + opt.delta);
    const WindowResult r = solve_window(sc, w, model, solver);
    ++out.solves;
    double diff = r.kept_emissions - base.kept_emissions;
    if (state_distance(r.end_state, base.end_state) > opt.drift_tol) {
      ++out.drifting;
      if (opt.strict) diff += rechain(sc, baseline, day + 1, r.end_state, opt, out);
    }
    out.values.emplace_back(h, diff / opt.delta);
  }
  return out;
}

}  // namespace

MefRun incremental_mef(const Scenario& sc, const DispatchSolution& baseline, HourRange range, const MefOptions& opt) {
  const std::size_t H = sc.hours();
  if (baseline.hours != H || baseline.day_state.size() != sc.days() + 1) {
    throw std::invalid_argument("baseline does not match the scenario horizon");
  }
  if (range.end == 0) range.end = H;
  if (range.begin >= range.end || range.end > H) throw std::invalid_argument("empty or out-of-range hour selection");
  if (!(opt.delta > 0.0)) throw std::invalid_argument("perturbation size must be positive");
  const int node = sc.node_index(sc.target_node);

  std::vector<std::size_t> days;
  for (const auto& job : perturbation_plan(H)) {
    if (job.hour >= range.begin && job.hour < range.end && (days.empty() || days.back() != job.window)) {
      days.push_back(job.window);
    }
  }

  std::vector<WindowOutput> outputs(days.size());
  std::vector<std::string> errors(days.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < days.size(); i = next++) {
      const std::size_t d = days[i];
      try {
        outputs[i] = run_window(sc, baseline, d, std::max(range.begin, 24 * d), std::min(range.end, 24 * (d + 1)), node, opt);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(opt.jobs, static_cast<int>(days.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < days.size(); ++i) {
    if (!errors[i].empty()) throw DispatchError(days[i], "incremental MEF failed: " + errors[i]);
  }

  MefRun run;
  std::vector<double> values(range.end - range.begin, 0.0);
  for (auto& o : outputs) {
    for (const auto& [h, v] : o.values) {
      double mef = v;
      if (mef < 0.0 && mef >= opt.clamp_floor) {
        mef = 0.0;
        ++run.clamped;
      } else if (mef < opt.clamp_floor) {
        ++run.below_floor;
        char buf[96];
        std::snprintf(buf, sizeof buf, "hour %zu: MEF %.9g below floor", h, mef);
        run.log.emplace_back(buf);
      }
      values[h - range.begin] = mef;
    }
    run.solves += o.solves;
    run.rechained_windows += o.rechained;
    run.drifting_hours += o.drifting;
    for (auto& line : o.log) run.log.push_back(std::move(line));
  }
  run.mef.series = TimeSeries(sc.start() + std::chrono::hours(range.begin), std::move(values));
  run.mef.source = MefSource::Incremental;
  const auto ymd = std::chrono::year_month_day{std::chrono::floor<std::chrono::days>(run.mef.series.start())};
  run.mef.year = std::to_string(static_cast<int>(ymd.year()));
  return run;
}

}  // namespace mefkit
