#include "mefkit/dispatch.hpp"

#include "mefkit/csv.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

namespace mefkit {
namespace {

using lp::Sense;
using lp::Term;

enum class ClusterModel { Renewable, Simple, Committed };

ClusterModel model_of(const PlantCluster& c) {
  if (!c.is_dispatchable) return ClusterModel::Renewable;
  const bool reserves = c.reserve_pcr > 0.0 || c.reserve_scr_pos > 0.0 || c.reserve_scr_neg > 0.0;
  if (c.cramp == 0.0 && c.min_load == 0.0 && !reserves) return ClusterModel::Simple;
  return ClusterModel::Committed;
}

double available(const PlantCluster& c, std::size_t h) { return std::max(0.0, c.available_capacity(h)); }

// Cost on (P^ON - GEN): running capacity held below full load pays the
// part-load surcharge implied by cvar_min.
double part_load_cost(const PlantCluster& c) {
  if (c.min_load == 0.0) return 0.0;
  return (c.cvar_min - c.cvar_full) * c.min_load / (1.0 - c.min_load);
}

std::vector<std::vector<int>> grid(std::size_t units, std::size_t hours) {
  return std::vector<std::vector<int>>(units, std::vector<int>(hours, -1));
}

std::vector<std::vector<double>> zeros(std::size_t units, std::size_t hours) {
  return std::vector<std::vector<double>>(units, std::vector<double>(hours, 0.0));
}

}  // namespace

CarriedState initial_state(const Scenario& sc) {
  CarriedState s;
  s.storage_level.assign(sc.storages.size(), 0.0);
  for (std::size_t k = 0; k < sc.storages.size(); ++k) {
    if (sc.storages[k].kind == StorageKind::MidTerm) s.storage_level[k] = sc.storages[k].initial_level;
  }
  s.online.assign(sc.clusters.size(), 0.0);
  return s;
}

double state_distance(const CarriedState& a, const CarriedState& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.storage_level.size(); ++k) d = std::max(d, std::abs(a.storage_level[k] - b.storage_level[k]));
  for (std::size_t k = 0; k < a.online.size(); ++k) d = std::max(d, std::abs(a.online[k] - b.online[k]));
  return d;
}

DispatchWindow make_window(const Scenario& sc, std::size_t day, CarriedState carried) {
  const std::size_t H = sc.hours();
  if (24 * (day + 1) > H) throw std::out_of_range("day " + std::to_string(day) + " is outside the horizon");
  DispatchWindow w;
  w.day = day;
  w.first_hour = 24 * day;
  w.keep_end = 24 * (day + 1);
  w.end_hour = std::min(H, 24 * (day + 2));
  w.carried = std::move(carried);
  return w;
}

WindowModel build_window_model(const Scenario& sc, const DispatchWindow& w, const std::optional<Perturbation>& pert) {
  const std::size_t T = w.hours();
  const std::size_t h0 = w.first_hour;
  if (pert && (pert->hour < h0 || pert->hour >= w.keep_end)) {
    throw std::invalid_argument("perturbation hour " + std::to_string(pert->hour) + " is not in the middle day of window " +
                                std::to_string(w.day));
  }
  WindowModel m;
  m.first_hour = h0;
  m.hours = T;
  auto& lp = m.lp;
  const std::size_t C = sc.clusters.size();
  const std::size_t S = sc.storages.size();
  const std::size_t N = sc.nodes.size();
  const std::size_t L = sc.interconnectors.size();
  m.gen = grid(C, T);
  m.online = grid(C, T);
  m.started = grid(C, T);
  m.storage_gen = grid(S, T);
  m.storage_charge = grid(S, T);
  m.storage_level = grid(S, T);
  m.shed = grid(N, T);
  m.flow = grid(L, T);
  m.balance_row = grid(N, T);

  std::vector<std::vector<std::vector<Term>>> balance(N, std::vector<std::vector<Term>>(T));
  auto tag = [h0](const char* what, const std::string& id, std::size_t t) {
    return std::string(what) + "_" + id + "_" + std::to_string(h0 + t);
  };

  for (std::size_t c = 0; c < C; ++c) {
    const PlantCluster& pc = sc.clusters[c];
    const int n = sc.node_index(pc.node);
    const ClusterModel kind = model_of(pc);
    const double surcharge = part_load_cost(pc);
    for (std::size_t t = 0; t < T; ++t) {
      const double avail = available(pc, h0 + t);
      if (kind == ClusterModel::Renewable) {
        m.gen[c][t] = lp.add_variable(pc.cvar_full - sc.res_curtail_cost, 0.0, avail, tag("gen", pc.id, t));
        m.cost_offset += sc.res_curtail_cost * avail;
      } else if (kind == ClusterModel::Simple) {
        m.gen[c][t] = lp.add_variable(pc.cvar_full, 0.0, avail, tag("gen", pc.id, t));
      } else {
        m.gen[c][t] = lp.add_variable(pc.cvar_full - surcharge, 0.0, lp::kInf, tag("gen", pc.id, t));
        m.online[c][t] = lp.add_variable(surcharge, 0.0, avail, tag("pon", pc.id, t));
        m.started[c][t] = lp.add_variable(pc.cramp, 0.0, lp::kInf, tag("su", pc.id, t));
      }
      balance[n][t].push_back({m.gen[c][t], 1.0});
    }
    if (kind != ClusterModel::Committed) continue;
    const double up_reserve = pc.reserve_pcr + pc.reserve_scr_pos;
    const double down_reserve = pc.reserve_pcr + pc.reserve_scr_neg;
    for (std::size_t t = 0; t < T; ++t) {
      const int g = m.gen[c][t];
      const int on = m.online[c][t];
      lp.add_row({{g, 1.0}, {on, -1.0}}, Sense::LessEqual, -up_reserve, tag("cap", pc.id, t));
      if (pc.min_load > 0.0 || down_reserve > 0.0) {
        lp.add_row({{g, 1.0}, {on, -pc.min_load}}, Sense::GreaterEqual, down_reserve, tag("minload", pc.id, t));
      }
      if (t == 0) {
        lp.add_row({{on, 1.0}, {m.started[c][t], -1.0}}, Sense::LessEqual, w.carried.online[c], tag("startup", pc.id, t));
      } else {
        lp.add_row({{on, 1.0}, {m.online[c][t - 1], -1.0}, {m.started[c][t], -1.0}}, Sense::LessEqual, 0.0, tag("startup", pc.id, t));
      }
    }
  }

  for (std::size_t s = 0; s < S; ++s) {
    const StorageUnit& st = sc.storages[s];
    const int n = sc.node_index(st.node);
    if (st.kind == StorageKind::LongTerm) {
      for (std::size_t t = 0; t < T; ++t) {
        const int g = lp.add_variable(st.water_value, 0.0, st.turbine_cap, tag("gen", st.id, t));
        const int cl = lp.add_variable(-st.water_value, 0.0, st.turbine_cap, tag("charge", st.id, t));
        m.storage_gen[s][t] = g;
        m.storage_charge[s][t] = cl;
        lp.add_row({{g, 1.0}, {cl, 1.0}}, Sense::LessEqual, st.turbine_cap, tag("turbine", st.id, t));
        balance[n][t].push_back({g, 1.0});
        balance[n][t].push_back({cl, -1.0});
      }
      continue;
    }
    const double energy = st.energy_capacity();
    const double terminal = std::min(st.initial_level, energy);
    for (std::size_t t = 0; t < T; ++t) {
      const int g = lp.add_variable(0.0, 0.0, st.turbine_cap, tag("gen", st.id, t));
      const int cm = lp.add_variable(0.0, 0.0, st.turbine_cap / st.pump_limit_factor, tag("charge", st.id, t));
      const int sl = lp.add_variable(0.0, t + 1 == T ? terminal : 0.0, energy, tag("level", st.id, t));
      m.storage_gen[s][t] = g;
      m.storage_charge[s][t] = cm;
      m.storage_level[s][t] = sl;
      if (t == 0) {
        lp.add_row({{sl, 1.0}, {g, 1.0}, {cm, -st.cycle_efficiency}}, Sense::Equal, w.carried.storage_level[s],
                   tag("level", st.id, t));
      } else {
        lp.add_row({{sl, 1.0}, {m.storage_level[s][t - 1], -1.0}, {g, 1.0}, {cm, -st.cycle_efficiency}}, Sense::Equal,
                   0.0, tag("level", st.id, t));
      }
      lp.add_row({{g, 1.0}, {cm, st.pump_limit_factor}}, Sense::LessEqual, st.turbine_cap, tag("turbine", st.id, t));
      balance[n][t].push_back({g, 1.0});
      balance[n][t].push_back({cm, -1.0});
    }
  }

  for (std::size_t l = 0; l < L; ++l) {
    const Interconnector& ic = sc.interconnectors[l];
    const int from = sc.node_index(ic.from);
    const int to = sc.node_index(ic.to);
    for (std::size_t t = 0; t < T; ++t) {
      const int f = lp.add_variable(0.0, 0.0, ic.capacity, tag("flow", ic.from + "_" + ic.to, t));
      m.flow[l][t] = f;
      balance[to][t].push_back({f, 1.0 - sc.grid_loss / 2.0});
      balance[from][t].push_back({f, -(1.0 + sc.grid_loss / 2.0)});
    }
  }

  const int pert_node = pert ? (pert->node >= 0 ? pert->node : sc.node_index(sc.target_node)) : -1;
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t t = 0; t < T; ++t) {
      m.shed[n][t] = lp.add_variable(sc.load_shed_cost, 0.0, lp::kInf, tag("shed", sc.nodes[n].id, t));
      balance[n][t].push_back({m.shed[n][t], 1.0});
      double demand = sc.nodes[n].demand[h0 + t];
      if (pert && static_cast<int>(n) == pert_node && h0 + t == pert->hour) demand += pert->delta;
      m.balance_row[n][t] = lp.add_row(std::move(balance[n][t]), Sense::Equal, demand, tag("balance", sc.nodes[n].id, t));
    }
  }
  return m;
}

lp::LinearProgram build_window_lp(const Scenario& sc, const DispatchWindow& w, const std::optional<Perturbation>& pert) {
  return build_window_model(sc, w, pert).lp;
}

DispatchSolution empty_solution(const Scenario& sc) {
  const std::size_t H = sc.hours();
  DispatchSolution s;
  s.start = sc.start();
  s.hours = H;
  const std::size_t C = sc.clusters.size();
  s.gen = zeros(C, H);
  s.online = zeros(C, H);
  s.started = zeros(C, H);
  s.curtailed = zeros(C, H);
  s.storage_gen = zeros(sc.storages.size(), H);
  s.storage_charge = zeros(sc.storages.size(), H);
  s.storage_level = zeros(sc.storages.size(), H);
  s.shed = zeros(sc.nodes.size(), H);
  s.flow = zeros(sc.interconnectors.size(), H);
  s.price = zeros(sc.nodes.size(), H);
  s.emissions.assign(H, 0.0);
  s.cost.assign(H, 0.0);
  s.day_state.assign(sc.days() + 1, initial_state(sc));
  return s;
}

WindowResult solve_window(const Scenario& sc, const DispatchWindow& w, const WindowModel& m, lp::SimplexSolver& solver,
                          DispatchSolution* out) {
  WindowResult r;
  r.window = w;
  try {
    r.lp = solver.solve();
  } catch (const lp::LpError& e) {
    throw DispatchError(w.day, e.what());
  }
  if (r.lp.status != lp::Status::Optimal) {
    throw DispatchError(w.day, std::string("window LP is ") + lp::to_string(r.lp.status));
  }
  const auto& x = r.lp.x;
  auto val = [&x](int var) { return var < 0 ? 0.0 : x[var]; };
  const std::size_t keep = w.keep_end - w.first_hour;

  for (std::size_t t = 0; t < keep; ++t) {
    const std::size_t h = w.first_hour + t;
    double emissions = 0.0;
    double cost = 0.0;
    for (std::size_t c = 0; c < sc.clusters.size(); ++c) {
      const PlantCluster& pc = sc.clusters[c];
      const double g = val(m.gen[c][t]);
      emissions += g * pc.emission_rate();
      cost += pc.cvar_full * g;
      const ClusterModel kind = model_of(pc);
      double on = g;
      double su = 0.0;
      double curt = 0.0;
      if (kind == ClusterModel::Renewable) {
        on = 0.0;
        curt = std::max(0.0, available(pc, h) - g);
        cost += sc.res_curtail_cost * curt;
      } else if (kind == ClusterModel::Committed) {
        on = val(m.online[c][t]);
        su = val(m.started[c][t]);
        cost += pc.cramp * su + part_load_cost(pc) * (on - g);
      }
      if (out) {
        out->gen[c][h] = g;
        out->online[c][h] = on;
        out->started[c][h] = su;
        out->curtailed[c][h] = curt;
      }
    }
    for (std::size_t s = 0; s < sc.storages.size(); ++s) {
      const double g = val(m.storage_gen[s][t]);
      const double ch = val(m.storage_charge[s][t]);
      if (sc.storages[s].kind == StorageKind::LongTerm) cost += sc.storages[s].water_value * (g - ch);
      if (out) {
        out->storage_gen[s][h] = g;
        out->storage_charge[s][h] = ch;
        out->storage_level[s][h] = val(m.storage_level[s][t]);
      }
    }
    for (std::size_t n = 0; n < sc.nodes.size(); ++n) {
      const double shed = val(m.shed[n][t]);
      cost += sc.load_shed_cost * shed;
      if (out) {
        out->shed[n][h] = shed;
        out->price[n][h] = r.lp.duals[m.balance_row[n][t]];
      }
    }
    if (out) {
      for (std::size_t l = 0; l < sc.interconnectors.size(); ++l) out->flow[l][h] = val(m.flow[l][t]);
      out->emissions[h] = emissions;
      out->cost[h] = cost;
    }
    r.kept_emissions += emissions;
  }

  const std::size_t last = keep - 1;
  r.end_state = initial_state(sc);
  for (std::size_t s = 0; s < sc.storages.size(); ++s) {
    if (sc.storages[s].kind == StorageKind::MidTerm) r.end_state.storage_level[s] = val(m.storage_level[s][last]);
  }
  for (std::size_t c = 0; c < sc.clusters.size(); ++c) {
    const ClusterModel kind = model_of(sc.clusters[c]);
    if (kind == ClusterModel::Committed) {
      r.end_state.online[c] = val(m.online[c][last]);
    } else if (kind == ClusterModel::Simple) {
      r.end_state.online[c] = val(m.gen[c][last]);
    }
  }
  return r;
}

DispatchSolution run_year(const Scenario& sc, const std::optional<Perturbation>& pert) {
  DispatchSolution sol = empty_solution(sc);
  CarriedState state = initial_state(sc);
  for (std::size_t d = 0; d < sc.days(); ++d) {
    DispatchWindow w = make_window(sc, d, state);
    std::optional<Perturbation> here;
    if (pert && pert->hour >= w.first_hour && pert->hour < w.keep_end) here = pert;
    WindowModel m = build_window_model(sc, w, here);
    lp::SimplexSolver solver(m.lp);
    WindowResult r = solve_window(sc, w, m, solver, &sol);
    sol.day_state[d] = std::move(state);
    state = std::move(r.end_state);
  }
  sol.day_state[sc.days()] = std::move(state);
  return sol;
}

TimeSeries emissions_series(const DispatchSolution& sol) { return TimeSeries(sol.start, sol.emissions); }

TimeSeries shadow_price_series(const Scenario& sc, const DispatchSolution& sol, int node) {
  if (node < 0) node = sc.node_index(sc.target_node);
  return TimeSeries(sol.start, sol.price.at(node));
}

TimeSeries conventional_generation(const Scenario& sc, const DispatchSolution& sol) {
  std::vector<double> g(sol.hours, 0.0);
  for (std::size_t c = 0; c < sc.clusters.size(); ++c) {
    if (!sc.clusters[c].is_dispatchable) continue;
    for (std::size_t h = 0; h < sol.hours; ++h) g[h] += sol.gen[c][h];
  }
  return TimeSeries(sol.start, std::move(g));
}

std::vector<double> balance_residual(const Scenario& sc, const DispatchSolution& sol) {
  const std::size_t N = sc.nodes.size();
  std::vector<double> worst(sol.hours, 0.0);
  for (std::size_t h = 0; h < sol.hours; ++h) {
    std::vector<double> net(N, 0.0);
    for (std::size_t n = 0; n < N; ++n) net[n] = sol.shed[n][h] - sc.nodes[n].demand[h];
    for (std::size_t c = 0; c < sc.clusters.size(); ++c) net[sc.node_index(sc.clusters[c].node)] += sol.gen[c][h];
    for (std::size_t s = 0; s < sc.storages.size(); ++s) {
      net[sc.node_index(sc.storages[s].node)] += sol.storage_gen[s][h] - sol.storage_charge[s][h];
    }
    for (std::size_t l = 0; l < sc.interconnectors.size(); ++l) {
      const auto& ic = sc.interconnectors[l];
      net[sc.node_index(ic.to)] += (1.0 - sc.grid_loss / 2.0) * sol.flow[l][h];
      net[sc.node_index(ic.from)] -= (1.0 + sc.grid_loss / 2.0) * sol.flow[l][h];
    }
    for (double v : net) worst[h] = std::max(worst[h], std::abs(v));
  }
  return worst;
}

// --- CSV output -------------------------------------------------------------

namespace {

template <class Values>
struct Column {
  std::string name;
  Values* values;
};
using WideColumn = Column<std::vector<double>>;
using ConstColumn = Column<const std::vector<double>>;

template <class Sol>
using ColumnsOf = std::vector<Column<std::conditional_t<std::is_const_v<Sol>, const std::vector<double>, std::vector<double>>>>;

void write_wide(const DispatchSolution& sol, const std::vector<ConstColumn>& cols, const std::filesystem::path& path) {
  CsvTable t;
  t.header.push_back("timestamp");
  for (const auto& c : cols) t.header.push_back(c.name);
  for (std::size_t h = 0; h < sol.hours; ++h) {
    std::vector<std::string> row{format_timestamp(sol.start + std::chrono::hours(h))};
    for (const auto& c : cols) row.push_back(format_double((*c.values)[h]));
    t.rows.push_back(std::move(row));
  }
  write_csv(t, path);
}

void read_wide(const std::filesystem::path& path, std::size_t hours, const std::vector<WideColumn>& cols) {
  const CsvTable t = read_csv(path);
  if (t.rows.size() != hours) {
    throw ValidationError(path.string(), -1, "expected " + std::to_string(hours) + " rows, got " + std::to_string(t.rows.size()));
  }
  for (const auto& c : cols) {
    const int idx = t.column(c.name);
    if (idx < 0) throw ValidationError(path.string(), -1, "missing column " + c.name);
    c.values->resize(hours);
    for (std::size_t h = 0; h < hours; ++h) (*c.values)[h] = parse_double(t.rows[h][idx]);
  }
}

std::string flow_name(const Interconnector& ic) { return ic.from + "->" + ic.to; }

template <class Sol>
ColumnsOf<Sol> generation_columns(const Scenario& sc, Sol& s) {
  ColumnsOf<Sol> cols;
  for (std::size_t c = 0; c < sc.clusters.size(); ++c) {
    const std::string& id = sc.clusters[c].id;
    cols.push_back({id + ".gen", &s.gen[c]});
    cols.push_back({id + ".online", &s.online[c]});
    cols.push_back({id + ".started", &s.started[c]});
    cols.push_back({id + ".curtailed", &s.curtailed[c]});
  }
  return cols;
}

template <class Sol>
ColumnsOf<Sol> storage_columns(const Scenario& sc, Sol& s) {
  ColumnsOf<Sol> cols;
  for (std::size_t k = 0; k < sc.storages.size(); ++k) {
    const std::string& id = sc.storages[k].id;
    cols.push_back({id + ".gen", &s.storage_gen[k]});
    cols.push_back({id + ".charge", &s.storage_charge[k]});
    cols.push_back({id + ".level", &s.storage_level[k]});
  }
  return cols;
}

template <class Sol>
ColumnsOf<Sol> node_columns(const Scenario& sc, Sol& s) {
  ColumnsOf<Sol> cols;
  for (std::size_t n = 0; n < sc.nodes.size(); ++n) {
    cols.push_back({sc.nodes[n].id + ".shed", &s.shed[n]});
    cols.push_back({sc.nodes[n].id + ".price", &s.price[n]});
  }
  for (std::size_t l = 0; l < sc.interconnectors.size(); ++l) cols.push_back({flow_name(sc.interconnectors[l]), &s.flow[l]});
  cols.push_back({"emissions", &s.emissions});
  cols.push_back({"cost", &s.cost});
  return cols;
}

}  // namespace

void write_dispatch(const Scenario& sc, const DispatchSolution& solution, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const DispatchSolution& sol = solution;
  write_wide(sol, generation_columns(sc, sol), dir / "generation.csv");
  if (!sc.storages.empty()) write_wide(sol, storage_columns(sc, sol), dir / "storage.csv");
  write_wide(sol, node_columns(sc, sol), dir / "system.csv");
  write_series_csv(emissions_series(sol), dir / "emissions.csv");
  write_series_csv(shadow_price_series(sc, sol), dir / "shadow_price.csv");
  write_series_csv(conventional_generation(sc, sol), dir / "conventional_generation.csv");

  CsvTable states;
  states.header.push_back("day");
  for (const auto& st : sc.storages) states.header.push_back("level." + st.id);
  for (const auto& c : sc.clusters) states.header.push_back("online." + c.id);
  for (std::size_t d = 0; d < sol.day_state.size(); ++d) {
    std::vector<std::string> row{std::to_string(d)};
    for (double v : sol.day_state[d].storage_level) row.push_back(format_double(v));
    for (double v : sol.day_state[d].online) row.push_back(format_double(v));
    states.rows.push_back(std::move(row));
  }
  write_csv(states, dir / "states.csv");
}

DispatchSolution read_dispatch(const Scenario& sc, const std::filesystem::path& dir) {
  DispatchSolution sol = empty_solution(sc);
  read_wide(dir / "generation.csv", sol.hours, generation_columns(sc, sol));
  if (!sc.storages.empty()) read_wide(dir / "storage.csv", sol.hours, storage_columns(sc, sol));
  read_wide(dir / "system.csv", sol.hours, node_columns(sc, sol));

  const CsvTable states = read_csv(dir / "states.csv");
  if (states.rows.size() != sol.day_state.size()) {
    throw ValidationError((dir / "states.csv").string(), -1, "state rows do not match the scenario horizon");
  }
  for (std::size_t d = 0; d < states.rows.size(); ++d) {
    auto& st = sol.day_state[d];
    for (std::size_t k = 0; k < sc.storages.size(); ++k) {
      st.storage_level[k] = parse_double(states.rows[d].at(states.column("level." + sc.storages[k].id)));
    }
    for (std::size_t c = 0; c < sc.clusters.size(); ++c) {
      st.online[c] = parse_double(states.rows[d].at(states.column("online." + sc.clusters[c].id)));
    }
  }
  return sol;
}

}  // namespace mefkit
