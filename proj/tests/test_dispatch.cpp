#include "support.hpp"

#include "mefkit/dispatch.hpp"

#include <doctest.h>

using namespace mefkit;
namespace fs = std::filesystem;

namespace {

Scenario one_plant(double demand, std::size_t hours = 72) {
  Scenario sc = testkit::single_node("one_plant", std::vector<double>(hours, demand));
  sc.clusters.push_back(testkit::thermal("base", "coal", 100, 0.4, 0.34, 10, hours));
  return sc;
}

double total_cost(const DispatchSolution& s) {
  double c = 0.0;
  for (double v : s.cost) c += v;
  return c;
}

}  // namespace

TEST_CASE("single plant covers flat demand") {
  const Scenario sc = one_plant(50.0);
  const DispatchWindow w = make_window(sc, 1, initial_state(sc));
  const lp::LpSolution s = lp::solve(build_window_lp(sc, w));
  REQUIRE(s.status == lp::Status::Optimal);
  const DispatchSolution year = run_year(sc);
  for (std::size_t h = 0; h < sc.hours(); ++h) {
    CHECK(year.gen[0][h] == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(year.price[0][h] == doctest::Approx(10.0));
    CHECK(year.shed[0][h] == doctest::Approx(0.0));
  }
}

TEST_CASE("demand above capacity is shed at the shedding cost") {
  const Scenario sc = one_plant(150.0);
  const DispatchSolution year = run_year(sc);
  for (std::size_t h = 0; h < sc.hours(); ++h) {
    CHECK(year.gen[0][h] == doctest::Approx(100.0));
    CHECK(year.shed[0][h] == doctest::Approx(50.0));
    CHECK(year.price[0][h] == doctest::Approx(3000.0));
  }
}

TEST_CASE("perturbation raises exactly one demand rhs by delta") {
  const Scenario sc = one_plant(50.0);
  const DispatchWindow w = make_window(sc, 1, initial_state(sc));
  const WindowModel base = build_window_model(sc, w);
  const WindowModel pert = build_window_model(sc, w, Perturbation{30, 1.0});
  REQUIRE(base.lp.num_rows() == pert.lp.num_rows());
  int changed = 0;
  for (int r = 0; r < base.lp.num_rows(); ++r) {
    const double d = pert.lp.row(r).rhs - base.lp.row(r).rhs;
    if (d != 0.0) {
      ++changed;
      CHECK(d == 1.0);
      CHECK(r == base.balance_row[0][30 - w.first_hour]);
    }
  }
  CHECK(changed == 1);
}

TEST_CASE("windows tile the year and chain their state") {
  const Scenario sc = testkit::toy_year(5);
  const DispatchSolution s = run_year(sc);
  REQUIRE(s.day_state.size() == 6);
  for (std::size_t d = 0; d < 5; ++d) {
    const DispatchWindow w = make_window(sc, d, s.day_state[d]);
    CHECK(w.first_hour == 24 * d);
    CHECK(w.keep_end == 24 * (d + 1));
    CHECK(w.end_hour == std::min<std::size_t>(24 * (d + 2), sc.hours()));
    // Carried level equals the end-of-day level of the previous day.
    if (d > 0) CHECK(s.day_state[d].storage_level[0] == doctest::Approx(s.storage_level[0][24 * d - 1]));
  }
}

TEST_CASE("fixture follows the merit order hour by hour") {
  const Scenario sc = load_scenario(fs::path(MEFKIT_DATA_DIR) / "toy_de_3tech");
  const DispatchSolution s = run_year(sc);
  const auto residual = balance_residual(sc, s);
  for (std::size_t h = 0; h < sc.hours(); ++h) {
    const testkit::MeritHour m = testkit::merit_order(sc, h);
    CAPTURE(h);
    for (std::size_t i = 0; i < sc.clusters.size(); ++i) CHECK(std::abs(s.gen[i][h] - m.gen[i]) < 1e-9);
    CHECK(residual[h] < 1e-6);
    REQUIRE(m.marginal >= 0);
    CHECK(s.price[0][h] == doctest::Approx(sc.clusters[m.marginal].cvar_full).epsilon(1e-9));
    CHECK(s.storage_gen[0][h] == doctest::Approx(0.0));
  }
}

TEST_CASE("zero demand year produces nothing") {
  Scenario sc = testkit::single_node("zero", std::vector<double>(48, 0.0));
  testkit::add_three_tech(sc);
  const DispatchSolution s = run_year(sc);
  for (std::size_t h = 0; h < sc.hours(); ++h) {
    for (std::size_t i = 0; i < sc.clusters.size(); ++i) CHECK(s.gen[i][h] == 0.0);
    CHECK(s.emissions[h] == 0.0);
  }
}

TEST_CASE("emissions follow carbon content over efficiency") {
  Scenario sc = testkit::single_node("gas", std::vector<double>(24, 10.0));
  sc.clusters.push_back(testkit::thermal("gas", "gas", 50, 0.5, 0.2, 40, 24));
  const TimeSeries e = emissions_series(run_year(sc));
  for (std::size_t h = 0; h < 24; ++h) CHECK(e[h] == doctest::Approx(4.0));

  Scenario res = testkit::single_node("res", std::vector<double>(24, 10.0));
  res.clusters.push_back(testkit::renewable("wind", "onshore", 50, std::vector<double>(24, 0.5)));
  res.clusters.push_back(testkit::thermal("gas", "gas", 50, 0.5, 0.2, 40, 24));
  const DispatchSolution rs = run_year(res);
  for (std::size_t h = 0; h < 24; ++h) {
    CHECK(rs.emissions[h] == 0.0);
    CHECK(rs.curtailed[0][h] == doctest::Approx(15.0));
    CHECK(rs.gen[0][h] + rs.curtailed[0][h] == doctest::Approx(25.0));
  }
}

TEST_CASE("storage arbitrage matches a two-level brute force") {
  // Cheap base plant, expensive peaker; one full pumping hour fills the
  // reservoir exactly, so the optimum only visits empty and full levels.
  std::vector<double> demand(24, 70.0);
  for (int h : {0, 1, 2, 3, 4, 5, 12, 13, 14}) demand[h] = 50.0;
  Scenario sc = testkit::single_node("valley", demand);
  sc.clusters.push_back(testkit::thermal("base", "coal", 60, 0.4, 0.34, 10, 24));
  sc.clusters.push_back(testkit::thermal("peak", "gas", 100, 0.5, 0.2, 50, 24));
  const double turbine = 10.0, eta = 0.9;
  const double pump = turbine / 1.1;
  const double full = eta * pump;
  sc.storages.push_back(testkit::pumped_hydro("phs", turbine, eta, full / turbine, 0.0));

  const DispatchSolution s = run_year(sc);
  double lp_cost = 0.0;
  for (std::size_t h = 0; h < 24; ++h) lp_cost += s.gen[0][h] * 10.0 + s.gen[1][h] * 50.0;

  // Enumerate the level (empty/full) after every hour.
  auto hour_cost = [&](int h, double net) {
    const double load = demand[h] + net;  // net > 0 charges
    const double base = std::min(load, 60.0);
    return base * 10.0 + (load - base) * 50.0;
  };
  double best = INFINITY;
  for (unsigned mask = 0; mask < (1u << 24); ++mask) {
    if (mask & (1u << 23)) continue;  // must end no lower than it started
    double cost = 0.0;
    int prev = 0;
    for (int h = 0; h < 24 && cost < best; ++h) {
      const int level = (mask >> h) & 1;
      const double net = level > prev ? pump : level < prev ? -full : 0.0;
      cost += hour_cost(h, net);
      prev = level;
    }
    best = std::min(best, cost);
  }
  CHECK(lp_cost == doctest::Approx(best).epsilon(1e-9));

  double level = 0.0;
  for (std::size_t h = 0; h < 24; ++h) {
    level += eta * s.storage_charge[0][h] - s.storage_gen[0][h];
    CHECK(s.storage_level[0][h] == doctest::Approx(level).epsilon(1e-9));
    CHECK(s.storage_level[0][h] >= -1e-9);
    CHECK(s.storage_level[0][h] <= full + 1e-9);
    if (s.storage_charge[0][h] > 1e-9) CHECK(demand[h] == 50.0);
    if (s.storage_gen[0][h] > 1e-9) CHECK(demand[h] == 70.0);
  }
}

TEST_CASE("dispatch invariants on a committed system") {
  Scenario sc = testkit::toy_year(4);
  auto& gas = sc.clusters[2];
  gas.min_load = 0.4;
  gas.cramp = 30.0;
  gas.cvar_min = 46.0;
  gas.reserve_scr_pos = 2.0;
  sc.clusters[1].reserve_pcr = 1.0;
  const DispatchSolution s = run_year(sc);
  const auto residual = balance_residual(sc, s);
  for (std::size_t h = 0; h < sc.hours(); ++h) {
    CAPTURE(h);
    CHECK(residual[h] < 1e-6);
    const double on = s.online[2][h];
    CHECK(s.gen[2][h] >= 0.4 * on - 1e-7);
    CHECK(s.gen[2][h] <= on - 2.0 + 1e-7);
    CHECK(on <= gas.available_capacity(h) + 1e-7);
    const double prev = h == 0 ? 0.0 : s.online[2][h - 1];
    CHECK(s.started[2][h] >= on - prev - 1e-7);
    CHECK(s.started[2][h] == doctest::Approx(std::max(0.0, on - prev)).epsilon(1e-6));
    CHECK(s.storage_level[0][h] >= -1e-9);
    CHECK(s.storage_level[0][h] <= sc.storages[0].energy_capacity() + 1e-9);
    for (std::size_t i = 3; i < 5; ++i) {
      CHECK(s.gen[i][h] + s.curtailed[i][h] == doctest::Approx(sc.clusters[i].available_capacity(h)));
    }
    for (std::size_t i = 0; i < sc.clusters.size(); ++i) CHECK(s.gen[i][h] >= -1e-9);
  }
}

TEST_CASE("raising demand never lowers system cost") {
  const Scenario sc = testkit::toy_year(3);
  const double base = total_cost(run_year(sc));
  for (std::size_t h : {5u, 30u, 50u, 70u}) {
    CHECK(total_cost(run_year(sc, Perturbation{h, 1.0})) >= base - 1e-6);
  }
}

TEST_CASE("two nodes trade across a lossy interconnector") {
  Scenario sc = testkit::single_node("two", std::vector<double>(24, 60.0));
  sc.nodes.push_back({"FR", testkit::constant(24, 0.0)});
  sc.clusters.push_back(testkit::thermal("gas", "gas", 100, 0.5, 0.2, 40, 24));
  PlantCluster fr = testkit::thermal("nuc", "nuclear", 100, 0.33, 0.0, 5, 24);
  fr.node = "FR";
  sc.clusters.push_back(fr);
  sc.interconnectors.push_back({"FR", "DE", 30});
  sc.interconnectors.push_back({"DE", "FR", 30});
  sc.grid_loss = 0.02;
  const DispatchSolution s = run_year(sc);
  const auto residual = balance_residual(sc, s);
  for (std::size_t h = 0; h < 24; ++h) {
    CHECK(residual[h] < 1e-6);
    CHECK(s.flow[0][h] == doctest::Approx(30.0));
    CHECK(s.gen[0][h] == doctest::Approx(60.0 - 30.0 * (1.0 - 0.01)));
    CHECK(s.gen[1][h] == doctest::Approx(30.0 * (1.0 + 0.01)));
  }
}

TEST_CASE("dispatch output round trips") {
  const Scenario sc = testkit::toy_year(3);
  const DispatchSolution s = run_year(sc);
  const fs::path dir = testkit::scratch_dir("dispatch_rt");
  write_dispatch(sc, s, dir);
  const DispatchSolution back = read_dispatch(sc, dir);
  CHECK(back.gen == s.gen);
  CHECK(back.storage_level == s.storage_level);
  CHECK(back.price == s.price);
  CHECK(back.emissions == s.emissions);
  CHECK(back.day_state == s.day_state);
  CHECK(fs::exists(dir / "shadow_price.csv"));
  CHECK(fs::exists(dir / "conventional_generation.csv"));
}
