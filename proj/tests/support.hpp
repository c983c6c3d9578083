// Scenario builders and brute-force oracles shared by the unit and acceptance
// tests. Oracles here never call the code under test.
#pragma once

#include "mefkit/lp.hpp"
#include "mefkit/scenario.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace testkit {

using namespace mefkit;

inline Timestamp jan1(int year = 2019) {
  return std::chrono::sys_days(std::chrono::year(year) / std::chrono::January / 1);
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("mefkit_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline TimeSeries constant(std::size_t hours, double v, Timestamp start = jan1()) {
  return TimeSeries(start, std::vector<double>(hours, v));
}

inline PlantCluster thermal(std::string id, std::string tech, double cap, double eff, double carb, double cvar,
                            std::size_t hours) {
  PlantCluster c;
  c.id = std::move(id);
  c.node = "DE";
  c.tech = std::move(tech);
  c.installed_cap = cap;
  c.efficiency = eff;
  c.carbon_content = carb;
  c.cvar_full = cvar;
  c.cvar_min = cvar;
  c.availability = constant(hours, 1.0);
  c.outages = constant(hours, 0.0);
  return c;
}

inline PlantCluster renewable(std::string id, std::string tech, double cap, std::vector<double> avail) {
  PlantCluster c;
  c.id = std::move(id);
  c.node = "DE";
  c.tech = std::move(tech);
  c.installed_cap = cap;
  c.is_dispatchable = false;
  const std::size_t h = avail.size();
  c.availability = TimeSeries(jan1(), std::move(avail));
  c.outages = constant(h, 0.0);
  return c;
}

inline StorageUnit pumped_hydro(std::string id, double turbine, double eff, double epf, double initial) {
  StorageUnit s;
  s.id = std::move(id);
  s.node = "DE";
  s.turbine_cap = turbine;
  s.cycle_efficiency = eff;
  s.energy_power_factor = epf;
  s.initial_level = initial;
  return s;
}

inline Scenario single_node(std::string name, std::vector<double> demand) {
  Scenario sc;
  sc.name = std::move(name);
  sc.years = {"2019"};
  sc.target_node = "DE";
  sc.nodes.push_back({"DE", TimeSeries(jan1(), std::move(demand))});
  return sc;
}

/// Demand shape of the bundled fixture, extended to `days` days.
inline std::vector<double> toy_demand(std::size_t days) {
  std::vector<double> d(days * 24);
  for (std::size_t h = 0; h < d.size(); ++h) {
    d[h] = 84.0 + 36.0 * std::sin(2.0 * M_PI * (static_cast<double>(h % 24) - 7.0) / 24.0);
  }
  return d;
}

/// Nuclear 40 / coal 40 / gas 50 in strict merit order.
inline void add_three_tech(Scenario& sc) {
  const std::size_t h = sc.hours();
  sc.clusters.push_back(thermal("nuclear", "nuclear", 40, 0.33, 0.0, 5, h));
  sc.clusters.push_back(thermal("coal", "coal", 40, 0.40, 0.34, 25, h));
  sc.clusters.push_back(thermal("gas", "gas", 50, 0.50, 0.20, 40, h));
}

/// A year on the fixture's system with wind, solar and a pumped-hydro unit
/// efficient enough to arbitrage nuclear against coal. Seeded, deterministic.
inline Scenario toy_year(std::size_t days = 365, unsigned seed = 7) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> demand(days * 24), wind(days * 24), solar(days * 24);
  double w = 0.3;
  for (std::size_t h = 0; h < demand.size(); ++h) {
    const double hod = static_cast<double>(h % 24);
    const double doy = static_cast<double>(h / 24);
    const bool weekend = (h / 24) % 7 >= 5;
    demand[h] = 78.0 + 30.0 * std::sin(2.0 * M_PI * (hod - 7.0) / 24.0) + 8.0 * std::cos(2.0 * M_PI * doy / 365.0) -
                (weekend ? 10.0 : 0.0);
    w = std::clamp(0.92 * w + 0.08 * 0.3 + 0.07 * n01(rng), 0.0, 1.0);
    wind[h] = w;
    solar[h] = std::max(0.0, std::sin(M_PI * (hod - 6.0) / 12.0)) * (0.5 - 0.3 * std::cos(2.0 * M_PI * doy / 365.0));
  }
  Scenario sc = single_node("toy_year", std::move(demand));
  add_three_tech(sc);
  sc.clusters.push_back(renewable("wind", "onshore", 60, std::move(wind)));
  sc.clusters.push_back(renewable("solar", "solar", 30, std::move(solar)));
  sc.storages.push_back(pumped_hydro("phs", 10, 0.75, 6, 30));
  return sc;
}

// --- LP vertex enumeration --------------------------------------------------

struct DenseLp {
  int n = 0;
  std::vector<double> c, lo, hi;
  std::vector<std::vector<double>> A;
  std::vector<lp::Sense> sense;
  std::vector<double> b;
};

/// Random LP with a finite box, feasible by construction around an interior point.
inline DenseLp random_lp(std::mt19937& rng) {
  std::uniform_int_distribution<int> size(1, 8);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  DenseLp p;
  p.n = size(rng);
  const int m = size(rng);
  std::vector<double> x0(p.n);
  for (int j = 0; j < p.n; ++j) {
    p.lo.push_back(std::floor(std::uniform_real_distribution<double>(-4.0, 0.5)(rng)));
    p.hi.push_back(p.lo.back() + 1.0 + std::floor(std::uniform_real_distribution<double>(0.0, 6.0)(rng)));
    x0[j] = std::uniform_real_distribution<double>(p.lo[j], p.hi[j])(rng);
    p.c.push_back(std::round(u(rng) * 4.0) / 4.0);
  }
  int equalities = 0;
  for (int i = 0; i < m; ++i) {
    std::vector<double> row(p.n, 0.0);
    double ax = 0.0;
    for (int j = 0; j < p.n; ++j) {
      if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.7) row[j] = std::round(u(rng) * 2.0) / 2.0;
      ax += row[j] * x0[j];
    }
    int s = std::uniform_int_distribution<int>(0, 2)(rng);
    if (s == 1 && 2 * (equalities + 1) > p.n) s = 0;
    const double slack = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    if (s == 0) {
      p.sense.push_back(lp::Sense::LessEqual);
      p.b.push_back(ax + slack);
    } else if (s == 1) {
      ++equalities;
      p.sense.push_back(lp::Sense::Equal);
      p.b.push_back(ax);
    } else {
      p.sense.push_back(lp::Sense::GreaterEqual);
      p.b.push_back(ax - slack);
    }
    p.A.push_back(std::move(row));
  }
  return p;
}

inline lp::LinearProgram to_program(const DenseLp& p) {
  lp::LinearProgram prog;
  for (int j = 0; j < p.n; ++j) prog.add_variable(p.c[j], p.lo[j], p.hi[j]);
  for (std::size_t i = 0; i < p.A.size(); ++i) {
    std::vector<lp::Term> terms;
    for (int j = 0; j < p.n; ++j) {
      if (p.A[i][j] != 0.0) terms.push_back({j, p.A[i][j]});
    }
    prog.add_row(terms, p.sense[i], p.b[i]);
  }
  return prog;
}

/// Minimum of c'x over all vertices: every variable is at a bound or free,
/// and as many rows as free variables are held active.
inline double vertex_enumeration(const DenseLp& p) {
  const int n = p.n;
  const int m = static_cast<int>(p.A.size());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> status(n, 0);  // 0 lower, 1 upper, 2 free
  auto feasible = [&](const std::vector<double>& x) {
    for (int j = 0; j < n; ++j) {
      if (x[j] < p.lo[j] - 1e-9 || x[j] > p.hi[j] + 1e-9) return false;
    }
    for (int i = 0; i < m; ++i) {
      double ax = 0.0;
      for (int j = 0; j < n; ++j) ax += p.A[i][j] * x[j];
      const double tol = 1e-9 * (1.0 + std::abs(p.b[i]));
      if (p.sense[i] == lp::Sense::LessEqual && ax > p.b[i] + tol) return false;
      if (p.sense[i] == lp::Sense::GreaterEqual && ax < p.b[i] - tol) return false;
      if (p.sense[i] == lp::Sense::Equal && std::abs(ax - p.b[i]) > tol) return false;
    }
    return true;
  };
  long combos = 1;
  for (int j = 0; j < n; ++j) combos *= 3;
  for (long code = 0; code < combos; ++code) {
    long c = code;
    std::vector<int> free_vars;
    for (int j = 0; j < n; ++j) {
      status[j] = static_cast<int>(c % 3);
      c /= 3;
      if (status[j] == 2) free_vars.push_back(j);
    }
    const int k = static_cast<int>(free_vars.size());
    if (k > m) continue;
    std::vector<double> x(n);
    for (int j = 0; j < n; ++j) x[j] = status[j] == 0 ? p.lo[j] : p.hi[j];
    // Choose k active rows by bitmask.
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
      if (std::popcount(mask) != k) continue;
      bool has_all_eq = true;
      for (int i = 0; i < m; ++i) {
        if (p.sense[i] == lp::Sense::Equal && !(mask & (1u << i))) has_all_eq = false;
      }
      if (!has_all_eq) continue;
      if (k > 0) {
        Eigen::MatrixXd M(k, k);
        Eigen::VectorXd r(k);
        int row = 0;
        for (int i = 0; i < m; ++i) {
          if (!(mask & (1u << i))) continue;
          double rhs = p.b[i];
          for (int j = 0; j < n; ++j) {
            if (status[j] != 2) rhs -= p.A[i][j] * x[j];
          }
          for (int q = 0; q < k; ++q) M(row, q) = p.A[i][free_vars[q]];
          r(row) = rhs;
          ++row;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
        if (lu.rank() < k) continue;
        const Eigen::VectorXd z = lu.solve(r);
        for (int q = 0; q < k; ++q) x[free_vars[q]] = z(q);
      }
      if (!feasible(x)) continue;
      double obj = 0.0;
      for (int j = 0; j < n; ++j) obj += p.c[j] * x[j];
      best = std::min(best, obj);
    }
  }
  return best;
}

// --- Dispatch merit order ---------------------------------------------------

struct MeritHour {
  std::vector<double> gen;  // per cluster, in scenario order
  int marginal = -1;        // cluster index setting the price, -1 if none
  double margin = 0.0;      // distance of the residual load to the nearest block edge
  bool curtailed = false;
};

/// Stacks dispatchable clusters by cvar_full after taking all renewable feed-in.
inline MeritHour merit_order(const Scenario& sc, std::size_t h) {
  MeritHour r;
  r.gen.assign(sc.clusters.size(), 0.0);
  double residual = sc.nodes.front().demand[h];
  for (std::size_t i = 0; i < sc.clusters.size(); ++i) {
    const auto& c = sc.clusters[i];
    if (c.is_dispatchable) continue;
    const double take = std::min(c.available_capacity(h), std::max(residual, 0.0));
    if (take < c.available_capacity(h)) r.curtailed = true;
    r.gen[i] = take;
    residual -= take;
  }
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < sc.clusters.size(); ++i) {
    if (sc.clusters[i].is_dispatchable) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sc.clusters[a].cvar_full < sc.clusters[b].cvar_full; });
  r.margin = std::abs(residual);
  for (std::size_t i : order) {
    const double cap = sc.clusters[i].available_capacity(h);
    const double take = std::clamp(residual, 0.0, cap);
    r.gen[i] = take;
    if (residual > 0.0) {
      r.marginal = static_cast<int>(i);
      r.margin = std::min(residual, cap - residual);
    }
    residual -= take;
    if (residual <= 0.0) break;
  }
  return r;
}

// --- Charging subsets -------------------------------------------------------

/// Minimum sum over every 4-of-10 subset (all 210 of them).
inline double subset_minimum(const std::vector<double>& night, int pick = 4) {
  const int w = static_cast<int>(night.size());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << w); ++mask) {
    if (std::popcount(mask) != pick) continue;
    double s = 0.0;
    for (int h = 0; h < w; ++h) {
      if (mask & (1u << h)) s += night[h];
    }
    best = std::min(best, s);
  }
  return best;
}

// --- Synthetic regime data ---------------------------------------------------

struct RegimeData {
  std::vector<double> y, x, true_beta1;
  std::vector<int> state;
};

/// y_t = b0[s] + b1[s] x_t + N(0, s2[s]) with x ~ N(0,1) and a Markov chain s.
inline RegimeData simulate_regimes(std::size_t n, const std::vector<double>& b0, const std::vector<double>& b1,
                                   const std::vector<double>& s2, const std::vector<std::vector<double>>& P,
                                   unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  RegimeData d;
  int s = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) {
      const double r = u01(rng);
      double acc = 0.0;
      int next = static_cast<int>(P[s].size()) - 1;
      for (std::size_t j = 0; j < P[s].size(); ++j) {
        acc += P[s][j];
        if (r < acc) {
          next = static_cast<int>(j);
          break;
        }
      }
      s = next;
    }
    const double x = n01(rng);
    d.x.push_back(x);
    d.y.push_back(b0[s] + b1[s] * x + std::sqrt(s2[s]) * n01(rng));
    d.true_beta1.push_back(b1[s]);
    d.state.push_back(s);
  }
  return d;
}

inline double mean_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace testkit
