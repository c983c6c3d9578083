#include "mefkit/charging.hpp"
#include "mefkit/dispatch.hpp"
#include "mefkit/estimators.hpp"
#include "mefkit/evalkit.hpp"
#include "mefkit/invest.hpp"
#include "mefkit/mef.hpp"
#include "mefkit/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace mefkit;

namespace {

fs::path resolve_scenario(const std::string& arg) {
  fs::path p(arg);
  if (fs::exists(p) || p.is_absolute()) return p;
  if (const char* root = std::getenv("MEFKIT_SCENARIO_ROOT")) {
    const fs::path q = fs::path(root) / p;
    if (fs::exists(q)) return q;
  }
  return p;
}

int default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

fs::path file_manifest(const fs::path& out) { return fs::path(out).concat(".manifest.json"); }

std::string flag(bool b) { return b ? "true" : "false"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mefkit: hourly marginal emission factors from dispatch models and regressions"};
  app.require_subcommand(1);
  std::function<void()> action;

  std::string scenario, out;
  unsigned seed = kDefaultSeed;
  int jobs = default_jobs();
  bool strict = false;
  std::size_t window = 168;
  bool raw_units = false;
  int year = 0;
  double delta = 1.0;
  std::string hours = "all";
  std::string baseline_dir;
  int dump_day = -1;

  auto* invest = app.add_subcommand("invest", "capacity expansion; writes capacities.csv");
  invest->add_option("--scenario", scenario, "scenario directory or .cfg file")->required();
  invest->add_option("--out", out, "output directory")->required();
  invest->callback([&] {
    action = [&] {
      const fs::path sp = resolve_scenario(scenario);
      prepare_output_dir(out);
      const Scenario sc = load_scenario(sp);
      if (!sc.invest) throw std::invalid_argument("scenario has no [invest] section");
      const CapacityPlan plan = solve_invest(make_invest_problem(sc));
      write_capacities_csv(plan, fs::path(out) / "capacities.csv");
      write_manifest(fs::path(out) / "manifest.json", "invest", {{"scenario", sp.filename().string()}},
                     scenario_inputs(sp), files_under(out), out);
    };
  });

  auto* dispatch = app.add_subcommand("dispatch", "rolling-horizon dispatch of one year");
  dispatch->add_option("--scenario", scenario, "scenario directory or .cfg file")->required();
  dispatch->add_option("--out", out, "output directory")->required();
  dispatch->add_option("--year", year, "invest year whose plan is dispatched (scenarios with [invest])");
  dispatch->add_option("--dump-lp", dump_day, "also write the window LP of this 0-based day as window_<day>.lp")
      ->check(CLI::NonNegativeNumber);
  dispatch->callback([&] {
    action = [&] {
      const fs::path sp = resolve_scenario(scenario);
      prepare_output_dir(out);
      Scenario sc = load_scenario(sp);
      if (sc.invest) {
        const CapacityPlan plan = solve_invest(make_invest_problem(sc));
        sc = apply_plan(sc, plan, year != 0 ? year : sc.invest->years.front());
      }
      const DispatchSolution sol = run_year(sc);
      write_dispatch(sc, sol, out);
      if (dump_day >= 0) {
        const auto d = static_cast<std::size_t>(dump_day);
        if (d >= sol.day_state.size() - 1) throw std::invalid_argument("--dump-lp day is past the horizon");
        const DispatchWindow w = make_window(sc, d, sol.day_state[d]);
        write_text(fs::path(out) / ("window_" + std::to_string(d) + ".lp"), build_window_lp(sc, w).dump());
      }
      write_manifest(fs::path(out) / "manifest.json", "dispatch",
                     {{"scenario", sp.filename().string()}, {"year", std::to_string(year)}}, scenario_inputs(sp),
                     files_under(out), out);
    };
  });

  auto* mef = app.add_subcommand("mef", "marginal emission factors from the dispatch model");
  mef->require_subcommand(1);
  auto* incremental = mef->add_subcommand("incremental", "re-solve each hour with +delta MWh demand");
  incremental->add_option("--scenario", scenario, "scenario directory or .cfg file")->required();
  incremental->add_option("--out", out, "output directory")->required();
  incremental->add_option("--baseline", baseline_dir, "reuse a dispatch output directory as the baseline");
  incremental->add_option("--hours", hours, "'all' or an inclusive range a-b of 0-based hours");
  incremental->add_option("--delta", delta, "demand perturbation in MWh")->check(CLI::PositiveNumber);
  incremental->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  incremental->add_flag("--strict", strict, "re-chain downstream windows when the carried state drifts");
  incremental->callback([&] {
    action = [&] {
      const fs::path sp = resolve_scenario(scenario);
      prepare_output_dir(out);
      const Scenario sc = load_scenario(sp);
      const DispatchSolution base = baseline_dir.empty() ? run_year(sc) : read_dispatch(sc, baseline_dir);
      MefOptions mo;
      mo.delta = delta;
      mo.strict = strict;
      mo.jobs = jobs;
      const MefRun run = incremental_mef(sc, base, parse_hour_range(hours, sc.hours()), mo);
      write_series_csv(run.mef, fs::path(out) / "mef_incremental.csv");
      RunLog log;
      log.append(run.log);
      log.info("solves " + std::to_string(run.solves) + ", clamped " + std::to_string(run.clamped) +
               ", below floor " + std::to_string(run.below_floor));
      log.write(fs::path(out) / "run.log");
      write_manifest(fs::path(out) / "manifest.json", "mef incremental",
                     {{"scenario", sp.filename().string()},
                      {"hours", hours},
                      {"delta", format_double(delta)},
                      {"strict", flag(strict)},
                      {"jobs", std::to_string(jobs)}},
                     scenario_inputs(sp), files_under(out), out);
    };
  });

  std::string model = "msdr", emissions_csv, generation_csv, report;
  auto* estimate = app.add_subcommand("estimate", "rolling MSDR or DLR estimate from emissions and generation");
  estimate->add_option("--model", model, "msdr or dlr")->check(CLI::IsMember({"msdr", "dlr"}));
  estimate->add_option("--emissions", emissions_csv, "hourly emissions CSV (t CO2)")->required();
  estimate->add_option("--generation", generation_csv, "hourly conventional generation CSV (MWh)")->required();
  estimate->add_option("--window", window, "window length in hours")->check(CLI::PositiveNumber);
  estimate->add_option("--seed", seed, "multi-start seed");
  estimate->add_flag("--raw-units", raw_units, "report standardized slopes instead of t CO2/MWh");
  estimate->add_option("--out", out, "MEF CSV")->required();
  estimate->add_option("--report", report, "per-window fit report (JSON)");
  estimate->callback([&] {
    action = [&] {
      const EstimatorModel m = parse_estimator(model);
      RunLog log;
      const EstimateOutput est = estimate_mef(read_series_csv(emissions_csv), read_series_csv(generation_csv), m,
                                              window, !raw_units, seed, log);
      write_series_csv(est.result.mef, out);
      std::vector<fs::path> outputs{out};
      if (!report.empty()) {
        write_text(report, fit_report(est, m));
        outputs.push_back(report);
      }
      for (const auto& l : log.lines()) std::cerr << l << '\n';
      write_manifest(file_manifest(out), "estimate",
                     {{"model", model},
                      {"window", std::to_string(window)},
                      {"seed", std::to_string(seed)},
                      {"destandardize", flag(!raw_units)}},
                     {emissions_csv, generation_csv}, outputs, fs::path(out).parent_path());
    };
  });

  std::string mef_csv;
  ChargingOptions charging;
  auto* charge = app.add_subcommand("charge", "emission-minimized overnight charging plan");
  charge->add_option("--mef", mef_csv, "MEF CSV with a source column")->required();
  charge->add_option("--out", out, "plan CSV")->required();
  charge->add_option("--night-start", charging.night_start, "hour the window opens")->check(CLI::Range(0, 23));
  charge->add_option("--window", charging.window, "window length in hours")->check(CLI::Range(1, 24));
  charge->add_option("--charge-hours", charging.charge_hours, "hours of charging per night")->check(CLI::PositiveNumber);
  charge->add_option("--energy-kwh", charging.energy_kwh, "energy drawn per charging hour");
  charge->callback([&] {
    action = [&] {
      const MefSeries m = read_mef_csv(mef_csv);
      const ChargingPlan plan = plan_charging(m, charging);
      for (const auto& w : plan.warnings) std::cerr << "warning: " << w << '\n';
      write_charging_csv(plan, out);
      std::cout << format_savings(savings_summary(std::vector<ChargingPlan>{plan}));
      std::printf("mass,%.6f kg,%.6f kg\n", plan.e1_mass_kg, plan.e2_mass_kg);
      write_manifest(file_manifest(out), "charge",
                     {{"night_start", std::to_string(charging.night_start)},
                      {"window", std::to_string(charging.window)},
                      {"charge_hours", std::to_string(charging.charge_hours)},
                      {"energy_kwh", format_double(charging.energy_kwh)}},
                     {mef_csv}, {out}, fs::path(out).parent_path());
    };
  });

  std::string benchmark;
  std::vector<std::string> candidates;
  auto* evaluate = app.add_subcommand("evaluate", "MAE/MSE/RMSE of candidate MEFs against a benchmark");
  evaluate->add_option("--benchmark", benchmark, "benchmark MEF CSV")->required();
  evaluate->add_option("--candidate", candidates, "candidate MEF CSV (repeatable)")->required();
  evaluate->add_option("--out", out, "report directory")->required();
  evaluate->callback([&] {
    action = [&] {
      prepare_output_dir(out);
      const MefSeries bench = read_mef_csv(benchmark);
      std::vector<MefSeries> cands;
      for (const auto& c : candidates) cands.push_back(read_mef_csv(c));
      for (const auto& r : run_evaluation(bench, cands, out)) {
        std::printf("%s,%s,MAE %.6f,MSE %.6f,RMSE %.6f,n %zu,dropped %zu\n", r.estimate.c_str(), r.year.c_str(), r.mae,
                    r.mse, r.rmse, r.n, r.dropped);
      }
      std::vector<fs::path> inputs{benchmark};
      inputs.insert(inputs.end(), candidates.begin(), candidates.end());
      write_manifest(fs::path(out) / "manifest.json", "evaluate", {}, inputs, files_under(out), out);
    };
  });

  auto* pipeline = app.add_subcommand("pipeline", "end-to-end run on one scenario");
  pipeline->add_option("--scenario", scenario, "scenario directory or .cfg file")->required();
  pipeline->add_option("--out", out, "output directory (absent or empty)")->required();
  pipeline->add_option("--seed", seed, "multi-start seed");
  pipeline->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  pipeline->add_flag("--strict", strict, "strict incremental MEF mode");
  pipeline->add_option("--window", window, "estimator window length in hours")->check(CLI::PositiveNumber);
  pipeline->add_flag("--raw-units", raw_units, "keep estimator slopes standardized");
  pipeline->add_option("--year", year, "invest year to dispatch");
  pipeline->callback([&] {
    action = [&] {
      const fs::path sp = resolve_scenario(scenario);
      PipelineOptions po;
      po.seed = seed;
      po.jobs = jobs;
      po.strict = strict;
      po.window = window;
      po.destandardize = !raw_units;
      po.year = year;
      RunLog log;
      run_pipeline(sp, out, po, log);
      write_manifest(fs::path(out) / "manifest.json", "pipeline",
                     {{"scenario", sp.filename().string()},
                      {"seed", std::to_string(seed)},
                      {"strict", flag(strict)},
                      {"window", std::to_string(window)},
                      {"destandardize", flag(!raw_units)},
                      {"year", std::to_string(year)}},
                     scenario_inputs(sp), files_under(out), out);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n\n" << app.help();
    return 2;
  }
  try {
    action();
  } catch (const ValidationError& e) {
    std::cerr << "error: validation: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: input: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: runtime: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
