#include "support.hpp"

#include "mefkit/charging.hpp"
#include "mefkit/csv.hpp"

#include <doctest.h>

using namespace mefkit;

namespace {

MefSeries mef_of(std::vector<double> v, Timestamp start = testkit::jan1()) {
  return {TimeSeries(start, std::move(v)), MefSource::Incremental, "2019"};
}

std::vector<double> window_values(const MefSeries& m, const NightPlan& n) {
  const auto first = static_cast<std::size_t>((n.start - m.series.start()).count() / 3600);
  return {m.series.values().begin() + first, m.series.values().begin() + first + 10};
}

}  // namespace

TEST_CASE("constant MEF saves nothing") {
  const ChargingPlan p = plan_charging(mef_of(std::vector<double>(24 * 3, 1.0)));
  REQUIRE(p.nights.size() == 2);
  for (const auto& n : p.nights) {
    CHECK(n.e1 == 4.0);
    CHECK(n.e2 == 4.0);
    CHECK(n.selected == std::vector<int>{0, 1, 2, 3});
  }
  CHECK(p.saving == 0.0);
  CHECK(p.dropped_hours == 4);
  CHECK_FALSE(p.warnings.empty());
  const SavingsSummary s = savings_summary(std::vector<ChargingPlan>{p});
  CHECK(s.years[0].percent == 0.0);
}

TEST_CASE("descending night picks its last four hours") {
  std::vector<double> v(30, 0.0);
  for (int h = 0; h < 10; ++h) v[20 + h] = 10.0 - h;
  const ChargingPlan p = plan_charging(mef_of(v));
  REQUIRE(p.nights.size() == 1);
  const NightPlan& n = p.nights[0];
  CHECK(n.e1 == 34.0);
  CHECK(n.e2 == 10.0);
  CHECK(n.e2 == testkit::subset_minimum(window_values(mef_of(v), n)));
  CHECK(p.saving == 24.0);
  CHECK(n.selected == std::vector<int>{6, 7, 8, 9});
  CHECK(mask_string(n.mask, 10) == "0000001111");
  CHECK(p.e1_mass_kg == doctest::Approx(34.0 * 11.0));
  CHECK(p.e2_mass_kg == doctest::Approx(10.0 * 11.0));
}

TEST_CASE("random nights match the exhaustive subset minimum") {
  std::mt19937 rng(365);
  std::uniform_real_distribution<double> u(0.0, 1.2);
  std::vector<double> v(24 * 366);
  for (auto& x : v) x = u(rng);
  const MefSeries m = mef_of(v, testkit::jan1(2020));
  const ChargingPlan p = plan_charging(m);
  REQUIRE(p.nights.size() == 365);
  double e2 = 0.0;
  for (const auto& n : p.nights) {
    const auto w = window_values(m, n);
    CHECK(n.e2 == testkit::subset_minimum(w));
    CHECK(n.e1 == w[0] + w[1] + w[2] + w[3]);
    CHECK(std::popcount(n.mask) == 4);
    e2 += n.e2;
  }
  CHECK(p.e2_total == doctest::Approx(e2));

  // Shifting every MEF by a constant keeps the selection.
  std::vector<double> shifted = v;
  for (auto& x : shifted) x += 0.75;
  const ChargingPlan q = plan_charging(mef_of(shifted, testkit::jan1(2020)));
  REQUIRE(q.nights.size() == p.nights.size());
  for (std::size_t d = 0; d < p.nights.size(); ++d) {
    CHECK(q.nights[d].mask == p.nights[d].mask);
    CHECK(q.nights[d].e1 == doctest::Approx(p.nights[d].e1 + 3.0));
    CHECK(q.nights[d].e2 == doctest::Approx(p.nights[d].e2 + 3.0));
  }
}

TEST_CASE("sinusoidal year saves exactly the oracle amount") {
  std::vector<double> v(24 * 365);
  for (std::size_t h = 0; h < v.size(); ++h) {
    v[h] = 0.5 + 0.3 * std::sin(2.0 * M_PI * static_cast<double>(h) / 24.0 + 0.001 * static_cast<double>(h));
  }
  const MefSeries m = mef_of(v);
  const ChargingPlan p = plan_charging(m);
  CHECK(p.nights.size() == 364);
  double oracle = 0.0, e1 = 0.0;
  for (const auto& n : p.nights) {
    const auto w = window_values(m, n);
    oracle += testkit::subset_minimum(w);
    e1 += n.e1;
  }
  CHECK(p.e2_total == oracle);
  CHECK(p.saving == e1 - oracle);
}

TEST_CASE("ties go to the earlier hour") {
  std::vector<double> v(30, 0.0);
  for (int h = 0; h < 10; ++h) v[20 + h] = (h % 2) ? 1.0 : 2.0;
  const ChargingPlan p = plan_charging(mef_of(v));
  CHECK(p.nights[0].selected == std::vector<int>{1, 3, 5, 7});
}

TEST_CASE("options are validated") {
  ChargingOptions o;
  o.charge_hours = 11;
  CHECK_THROWS(plan_charging(mef_of(std::vector<double>(48, 1.0)), o));
  o = {};
  o.night_start = 24;
  CHECK_THROWS(plan_charging(mef_of(std::vector<double>(48, 1.0)), o));
}

TEST_CASE("reference yearly totals give a 31 percent average saving") {
  const SavingsSummary s = savings_summary(std::vector<YearSavings>{{"2019", 868.96, 561.02, 307.93},
                                                                    {"2020", 757.49, 577.44, 180.06},
                                                                    {"2030", 650.13, 466.58, 183.55},
                                                                    {"2040", 338.94, 212.51, 126.43},
                                                                    {"2050", 327.36, 207.23, 120.13}});
  CHECK(s.mean_e1 == doctest::Approx(588.576));
  CHECK(s.mean_saving == doctest::Approx(183.62));
  CHECK(std::abs(s.pooled_percent - 31.0) < 1.0);
  CHECK(s.years[0].percent == doctest::Approx(100.0 * 307.93 / 868.96));
  const std::string text = format_savings(s);
  CHECK(text.rfind("year,e1,e2,saving,percent\n", 0) == 0);
  CHECK(text.find("\npooled,") != std::string::npos);
}

TEST_CASE("plan CSV has one row per night") {
  const ChargingPlan p = plan_charging(mef_of(std::vector<double>(24 * 4, 0.3)));
  const auto dir = testkit::scratch_dir("charging_csv");
  write_charging_csv(p, dir / "plan.csv");
  const CsvTable t = read_csv(dir / "plan.csv");
  CHECK(t.header == std::vector<std::string>{"date", "bitmask", "e1", "e2"});
  REQUIRE(t.rows.size() == p.nights.size());
  CHECK(t.rows[0][0] == "2019-01-01");
  CHECK(t.rows[0][1] == "1111000000");
}
