#include "mefkit/pipeline.hpp"

#include "mefkit/csv.hpp"
#include "mefkit/invest.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mefkit {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

void RunLog::info(std::string line) { lines_.push_back(std::move(line)); }

void RunLog::append(const std::vector<std::string>& lines) {
  lines_.insert(lines_.end(), lines.begin(), lines.end());
}

void RunLog::write(const fs::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  for (const auto& l : lines_) f << l << '\n';
}

std::string sha256_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (f) {
    f.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(f.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char b[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(b, sizeof b, "%02x", md[i]);
    hex += b;
  }
  return hex;
}

std::vector<fs::path> scenario_inputs(const fs::path& scenario) {
  const fs::path dir = fs::is_directory(scenario) ? scenario : scenario.parent_path();
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<fs::path> files_under(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && !name.ends_with("manifest.json")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_manifest(const fs::path& manifest, const std::string& command, const std::map<std::string, std::string>& config,
                    const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs, const fs::path& base) {
  ordered_json m;
  m["tool"] = "mefkit";
  m["version"] = kVersion;
  m["command"] = command;
  m["config"] = ordered_json::object();
  for (const auto& [k, v] : config) m["config"][k] = v;
  m["inputs"] = ordered_json::array();
  for (const auto& p : inputs) {
    m["inputs"].push_back({{"file", p.filename().string()}, {"sha256", sha256_file(p)}});
  }
  m["outputs"] = ordered_json::array();
  for (const auto& p : outputs) {
    m["outputs"].push_back({{"file", fs::relative(p, base).generic_string()}, {"sha256", sha256_file(p)}});
  }
  std::ofstream f(manifest, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + manifest.string());
  f << m.dump(2) << '\n';
}

void prepare_output_dir(const fs::path& out) {
  if (fs::exists(out)) {
    if (!fs::is_directory(out)) throw std::invalid_argument("output path " + out.string() + " is not a directory");
    if (!fs::is_empty(out)) throw std::invalid_argument("output directory " + out.string() + " is not empty");
  }
  fs::create_directories(out);
}

EstimateOutput estimate_mef(const TimeSeries& emissions, const TimeSeries& generation, EstimatorModel model,
                            std::size_t window, bool destandardize, unsigned seed, RunLog& log) {
  const DiffPair pair = prepare_series(emissions, generation);
  EstimateOutput out;
  out.window = window;
  if (window > pair.size()) {
    out.window = pair.size();
    log.info("estimate: window " + std::to_string(window) + " exceeds " + std::to_string(pair.size()) +
             " differences; using " + std::to_string(out.window));
  }
  if (!(pair.e.std > 0.0)) log.info("estimate: emissions never change; MEF is zero everywhere");
  MsdrOptions mo;
  mo.seed = seed;
  out.result = rolling_estimate(pair, model, out.window, out.window, destandardize, mo, {});
  log.info(std::string("estimate: ") + std::string(to_string(out.result.mef.source)) + " over " +
           std::to_string(out.result.windows.size()) + " windows");
  return out;
}

std::string fit_report(const EstimateOutput& out, EstimatorModel model) {
  ordered_json j;
  j["model"] = model == EstimatorModel::Msdr ? "msdr" : "dlr";
  j["window"] = out.window;
  j["windows"] = ordered_json::array();
  if (model == EstimatorModel::Msdr) {
    for (const RegimeFit& f : out.result.msdr) {
      j["windows"].push_back({{"begin", f.window.begin},
                              {"end", f.window.end},
                              {"k", f.k},
                              {"requested_k", f.requested_k},
                              {"beta0", f.beta0},
                              {"beta1", f.beta1},
                              {"sigma2", f.sigma2},
                              {"P", f.P},
                              {"loglik", f.loglik},
                              {"aic", f.aic},
                              {"bic", f.bic},
                              {"converged", f.converged},
                              {"iterations", f.iterations}});
    }
  } else {
    for (const DlrFit& f : out.result.dlr) {
      j["windows"].push_back({{"begin", f.window.begin},
                              {"end", f.window.end},
                              {"q0", f.q0},
                              {"q1", f.q1},
                              {"r", f.r},
                              {"loglik", f.loglik}});
    }
  }
  return j.dump(2) + "\n";
}

void run_charging(const std::vector<MefSeries>& mefs, const fs::path& dir, const ChargingOptions& opt, RunLog& log) {
  fs::create_directories(dir);
  std::vector<YearSavings> rows;
  for (const MefSeries& m : mefs) {
    ChargingPlan p = plan_charging(m, opt);
    const std::string name(to_string(m.source));
    for (const auto& w : p.warnings) log.info("charge " + name + ": " + w);
    write_charging_csv(p, dir / ("plan_" + name + ".csv"));
    rows.push_back({name + " " + p.year, p.e1_total, p.e2_total, p.saving, 0.0});
  }
  std::ofstream f(dir / "savings.csv", std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (dir / "savings.csv").string());
  f << format_savings(savings_summary(std::move(rows)));
}

std::vector<MetricReport> run_evaluation(const MefSeries& benchmark, const std::vector<MefSeries>& candidates,
                                         const fs::path& dir) {
  std::vector<MetricReport> reports;
  std::vector<PlotSeries> plot{{std::string(to_string(benchmark.source)), benchmark.series}};
  for (const MefSeries& c : candidates) {
    reports.push_back(compare(benchmark.series, c.series, std::string(to_string(benchmark.source)),
                              std::string(to_string(c.source))));
    plot.push_back({std::string(to_string(c.source)), c.series});
  }
  emit_report(dir, reports, plot);
  return reports;
}

namespace {

int dispatch_year(const Scenario& sc, int requested) {
  if (requested != 0) return requested;
  const auto& years = sc.invest->years;
  if (!sc.years.empty()) {
    const int own = std::stoi(sc.years.front());
    if (std::find(years.begin(), years.end(), own) != years.end()) return own;
  }
  return years.front();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

}  // namespace

void run_pipeline(const fs::path& scenario_path, const fs::path& out, const PipelineOptions& opt, RunLog& log) {
  prepare_output_dir(out);
  Scenario sc = load_scenario(scenario_path);
  log.info("scenario " + sc.name + ": " + std::to_string(sc.hours()) + " hours, " + std::to_string(sc.clusters.size()) +
           " clusters, " + std::to_string(sc.storages.size()) + " storage units");

  if (sc.invest) {
    const CapacityPlan plan = solve_invest(make_invest_problem(sc));
    write_capacities_csv(plan, out / "capacities.csv");
    const int year = dispatch_year(sc, opt.year);
    sc = apply_plan(sc, plan, year);
    char buf[128];
    std::snprintf(buf, sizeof buf, "invest: objective %.6g EUR, dispatching %d", plan.objective, year);
    log.info(buf);
  }

  const DispatchSolution base = run_year(sc);
  write_dispatch(sc, base, out / "baseline");
  log.info("dispatch: " + std::to_string(sc.days()) + " windows solved");

  MefOptions mo;
  mo.delta = opt.delta;
  mo.strict = opt.strict;
  mo.jobs = opt.jobs;
  const MefRun inc = incremental_mef(sc, base, {}, mo);
  log.append(inc.log);
  log.info("mef: " + std::to_string(inc.solves) + " solves, " + std::to_string(inc.clamped) + " clamped");
  write_series_csv(inc.mef, out / "mef_incremental.csv");

  const TimeSeries emissions = emissions_series(base);
  const TimeSeries generation = conventional_generation(sc, base);
  std::vector<MefSeries> estimates;
  for (EstimatorModel model : {EstimatorModel::Msdr, EstimatorModel::Dlr}) {
    const EstimateOutput est = estimate_mef(emissions, generation, model, opt.window, opt.destandardize, opt.seed, log);
    const std::string name(to_string(est.result.mef.source));
    write_series_csv(est.result.mef, out / ("mef_" + name + ".csv"));
    write_text(out / ("fit_" + name + ".json"), fit_report(est, model));
    estimates.push_back(est.result.mef);
  }

  const DiffPair pair = prepare_series(emissions, generation);
  std::vector<std::pair<std::string, DiagnosticsReport>> diag;
  diag.emplace_back("emissions", diagnostics(emissions.values()));
  diag.emplace_back("generation", diagnostics(generation.values()));
  diag.emplace_back("d_emissions", diagnostics(pair.raw_de));
  diag.emplace_back("d_generation", diagnostics(pair.raw_dg));
  write_text(out / "diagnostics.csv", format_diagnostics(diag));

  for (const MetricReport& r : run_evaluation(inc.mef, estimates, out / "evaluation")) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "evaluate %s: MAE %.6f MSE %.6f RMSE %.6f over %zu hours", r.estimate.c_str(),
                  r.mae, r.mse, r.rmse, r.n);
    log.info(buf);
  }

  std::vector<MefSeries> all{inc.mef};
  all.insert(all.end(), estimates.begin(), estimates.end());
  run_charging(all, out / "charging", opt.charging, log);
  log.write(out / "run.log");
}

}  // namespace mefkit
