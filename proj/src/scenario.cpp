#include "mefkit/scenario.hpp"

#include "mefkit/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mefkit {
namespace {

struct Entry {
  std::string value;
  int line = 0;
};

struct Section {
  std::string type;
  std::string name;
  int line = 0;
  std::map<std::string, Entry> entries;
};

std::string trim_copy(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> tokens(const std::string& value) {
  std::istringstream in(value);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

std::vector<Section> parse_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError(file.string(), -1, "missing scenario file");
  std::vector<Section> sections;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim_copy(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = file.filename().string() + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError(where, -1, "unterminated section header");
      const auto parts = tokens(line.substr(1, line.size() - 2));
      if (parts.empty() || parts.size() > 2) throw ValidationError(where, -1, "section header needs 'type [name]'");
      sections.push_back(Section{parts[0], parts.size() == 2 ? parts[1] : std::string{}, line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError(where, -1, "expected 'key = value'");
    if (sections.empty()) throw ValidationError(where, -1, "key outside of any section");
    const std::string key = trim_copy(std::string_view(line).substr(0, eq));
    const std::string value = trim_copy(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ValidationError(where, -1, "empty key");
    auto [it, inserted] = sections.back().entries.emplace(key, Entry{value, line_no});
    if (!inserted) throw ValidationError(where, -1, "duplicate key '" + key + "'");
  }
  return sections;
}

/// Consumes keys from a Section; whatever is left over is an unknown key.
class Reader {
 public:
  Reader(Section section, std::filesystem::path dir) : s_(std::move(section)), dir_(std::move(dir)) {}

  std::string entity() const { return s_.name.empty() ? s_.type : s_.type + " " + s_.name; }

  bool has(const std::string& key) const { return s_.entries.count(key) > 0; }

  std::optional<std::string> take_raw(const std::string& key) {
    auto it = s_.entries.find(key);
    if (it == s_.entries.end()) return std::nullopt;
    std::string v = it->second.value;
    s_.entries.erase(it);
    return v;
  }

  std::string str(const std::string& key) {
    auto v = take_raw(key);
    if (!v) throw ValidationError(entity(), -1, "missing required key '" + key + "'");
    if (tokens(*v).size() != 1) throw ValidationError(entity(), -1, "key '" + key + "' expects one value");
    return *v;
  }

  std::string str_or(const std::string& key, std::string fallback) {
    return has(key) ? str(key) : std::move(fallback);
  }

  double num(const std::string& key) {
    const std::string v = str(key);
    try {
      return parse_double(v);
    } catch (const std::invalid_argument&) {
      throw ValidationError(entity(), -1, "key '" + key + "' is not a number: " + v);
    }
  }

  double num_or(const std::string& key, double fallback) { return has(key) ? num(key) : fallback; }

  bool flag_or(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string v = str(key);
    if (v == "yes" || v == "true" || v == "1") return true;
    if (v == "no" || v == "false" || v == "0") return false;
    throw ValidationError(entity(), -1, "key '" + key + "' expects yes/no, got " + v);
  }

  std::vector<std::string> list(const std::string& key) {
    auto v = take_raw(key);
    if (!v) return {};
    auto t = tokens(*v);
    if (t.empty()) throw ValidationError(entity(), -1, "key '" + key + "' expects at least one value");
    return t;
  }

  /// Either a constant ("0.9") or a CSV file relative to the scenario dir.
  struct SeriesSpec {
    std::optional<double> constant;
    std::optional<TimeSeries> series;
  };

  SeriesSpec series_or(const std::string& key, double fallback) {
    if (!has(key)) return SeriesSpec{fallback, std::nullopt};
    const std::string v = str(key);
    if (v.size() > 4 && v.substr(v.size() - 4) == ".csv") {
      try {
        return SeriesSpec{std::nullopt, read_series_csv(dir_ / v)};
      } catch (const ValidationError& e) {
        throw ValidationError(entity(), e.hour(), std::string("in ") + v + ": " + e.what());
      }
    }
    try {
      return SeriesSpec{parse_double(v), std::nullopt};
    } catch (const std::invalid_argument&) {
      throw ValidationError(entity(), -1, "key '" + key + "' must be a number or a .csv file");
    }
  }

  std::map<std::string, std::string> take_prefixed(const std::string& prefix) {
    std::map<std::string, std::string> out;
    for (auto it = s_.entries.begin(); it != s_.entries.end();) {
      if (it->first.rfind(prefix, 0) == 0) {
        out.emplace(it->first.substr(prefix.size()), it->second.value);
        it = s_.entries.erase(it);
      } else {
        ++it;
      }
    }
    return out;
  }

  void finish() const {
    if (!s_.entries.empty()) {
      const auto& [key, entry] = *s_.entries.begin();
      throw ValidationError(entity(), -1, "unknown key '" + key + "' (line " + std::to_string(entry.line) + ")");
    }
  }

 private:
  Section s_;
  std::filesystem::path dir_;
};

TimeSeries expand(const Reader::SeriesSpec& spec, Timestamp start, std::size_t hours) {
  if (spec.series) return *spec.series;
  return TimeSeries(start, std::vector<double>(hours, *spec.constant));
}

void check_series(const std::string& entity, const std::string& what, const TimeSeries& s, std::size_t hours,
                  Timestamp start, double lo, double hi) {
  if (s.size() != hours) {
    throw ValidationError(entity, -1, what + " has " + std::to_string(s.size()) + " hours, expected " +
                                          std::to_string(hours));
  }
  if (s.start() != start) throw ValidationError(entity, -1, what + " is not aligned to the scenario calendar");
  for (std::size_t h = 0; h < s.size(); ++h) {
    if (!(s[h] >= lo && s[h] <= hi)) {
      const std::string range = hi == INFINITY
                                    ? "must be >= " + format_double(lo)
                                    : "out of [" + format_double(lo) + "," + format_double(hi) + "]";
      throw ValidationError(entity, static_cast<long>(h),
                            what + " " + range + " at hour " + std::to_string(h));
    }
  }
}

}  // namespace

int Scenario::node_index(const std::string& id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

double Scenario::total_installed_capacity() const {
  double sum = 0.0;
  for (const auto& c : clusters) sum += c.installed_cap;
  return sum;
}

void Scenario::validate() const {
  if (nodes.empty()) throw ValidationError("scenario", -1, "at least one node is required");
  const std::size_t H = hours();
  if (H == 0 || H % 24 != 0) {
    throw ValidationError("scenario", -1, "horizon must be a positive multiple of 24 hours, got " + std::to_string(H));
  }
  const Timestamp t0 = start();
  std::set<std::string> ids;
  for (const auto& n : nodes) {
    if (!ids.insert(n.id).second) throw ValidationError("node " + n.id, -1, "duplicate node");
    check_series("node " + n.id, "demand", n.demand, H, t0, 0.0, INFINITY);
  }
  if (node_index(target_node) < 0) throw ValidationError("scenario", -1, "target_node '" + target_node + "' is not a declared node");
  if (!(grid_loss >= 0.0 && grid_loss < 1.0)) throw ValidationError("scenario", -1, "grid_loss must lie in [0,1)");
  if (!(load_shed_cost >= 0.0)) throw ValidationError("scenario", -1, "load_shed_cost must be >= 0");
  if (!(res_curtail_cost >= 0.0)) throw ValidationError("scenario", -1, "res_curtail_cost must be >= 0");

  std::set<std::string> unit_ids;
  for (const auto& c : clusters) {
    const std::string e = "cluster " + c.id;
    if (!unit_ids.insert(c.id).second) throw ValidationError(e, -1, "duplicate unit id");
    if (node_index(c.node) < 0) throw ValidationError(e, -1, "unknown node '" + c.node + "'");
    if (!(c.installed_cap >= 0.0)) throw ValidationError(e, -1, "installed_cap must be >= 0");
    if (!(c.efficiency > 0.0 && c.efficiency <= 1.0)) throw ValidationError(e, -1, "efficiency must lie in (0,1]");
    if (!(c.min_load >= 0.0 && c.min_load < 1.0)) throw ValidationError(e, -1, "min_load must lie in [0,1)");
    if (!(c.carbon_content >= 0.0)) throw ValidationError(e, -1, "carbon_content must be >= 0");
    if (!(c.cvar_full >= 0.0 && c.cvar_min >= 0.0 && c.cramp >= 0.0)) throw ValidationError(e, -1, "costs must be >= 0");
    if (!(c.reserve_pcr >= 0.0 && c.reserve_scr_pos >= 0.0 && c.reserve_scr_neg >= 0.0)) {
      throw ValidationError(e, -1, "reserves must be >= 0");
    }
    check_series(e, "availability", c.availability, H, t0, 0.0, 1.0);
    check_series(e, "outages", c.outages, H, t0, 0.0, INFINITY);
    const double reserve_band = 2.0 * c.reserve_pcr + c.reserve_scr_pos + c.reserve_scr_neg;
    for (std::size_t h = 0; h < H; ++h) {
      const double avail = c.available_capacity(h);
      if (avail < -1e-9) {
        throw ValidationError(e, static_cast<long>(h), "outages exceed available capacity at hour " + std::to_string(h));
      }
      if (reserve_band > 0.0 && std::max(avail, 0.0) * (1.0 - c.min_load) + 1e-9 < reserve_band) {
        throw ValidationError(e, static_cast<long>(h), "reserves cannot be provided at hour " + std::to_string(h));
      }
    }
  }
  for (const auto& s : storages) {
    const std::string e = "storage " + s.id;
    if (!unit_ids.insert(s.id).second) throw ValidationError(e, -1, "duplicate unit id");
    if (node_index(s.node) < 0) throw ValidationError(e, -1, "unknown node '" + s.node + "'");
    if (!(s.turbine_cap >= 0.0)) throw ValidationError(e, -1, "turbine_cap must be >= 0");
    if (!(s.cycle_efficiency > 0.0 && s.cycle_efficiency <= 1.0)) throw ValidationError(e, -1, "efficiency must lie in (0,1]");
    if (!(s.energy_power_factor > 0.0)) throw ValidationError(e, -1, "energy_power_factor must be > 0");
    if (!(s.pump_limit_factor > 0.0)) throw ValidationError(e, -1, "pump_limit must be > 0");
    if (!(s.water_value >= 0.0)) throw ValidationError(e, -1, "water_value must be >= 0");
    if (!(s.initial_level >= 0.0 && s.initial_level <= s.energy_capacity() + 1e-9)) {
      throw ValidationError(e, -1, "initial_level must lie within [0, energy capacity]");
    }
  }
  for (const auto& ic : interconnectors) {
    const std::string e = "interconnector " + ic.from + "->" + ic.to;
    if (node_index(ic.from) < 0 || node_index(ic.to) < 0) throw ValidationError(e, -1, "endpoint is not a declared node");
    if (ic.from == ic.to) throw ValidationError(e, -1, "endpoints must differ");
    if (!(ic.capacity >= 0.0)) throw ValidationError(e, -1, "capacity must be >= 0");
  }
  if (invest) {
    for (const auto& c : invest->candidates) {
      const std::string e = "candidate " + c.id;
      if (node_index(c.node) < 0) throw ValidationError(e, -1, "unknown node '" + c.node + "'");
      if (c.lifetime < 1) throw ValidationError(e, -1, "lifetime must be >= 1 year");
      if (!(c.cinv >= 0.0 && c.cfix >= 0.0 && c.cvar >= 0.0)) throw ValidationError(e, -1, "costs must be >= 0");
      if (!(c.efficiency > 0.0 && c.efficiency <= 1.0)) throw ValidationError(e, -1, "efficiency must lie in (0,1]");
      if (!(c.availability > 0.0 && c.availability <= 1.0)) throw ValidationError(e, -1, "availability must lie in (0,1]");
    }
    if (invest->years.empty()) throw ValidationError("invest", -1, "years must not be empty");
    if (!std::is_sorted(invest->years.begin(), invest->years.end())) throw ValidationError("invest", -1, "years must be ascending");
    if (invest->blocks < 1) throw ValidationError("invest", -1, "blocks must be >= 1");
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::filesystem::path file = path;
  if (std::filesystem::is_directory(path)) file = path / "scenario.cfg";
  const std::filesystem::path dir = file.parent_path();
  auto sections = parse_config(file);

  Scenario sc;
  std::optional<Timestamp> declared_start;
  std::optional<std::size_t> declared_hours;
  int scenario_sections = 0;

  // Pass 1: [scenario] and [prices] fix the calendar and cost context.
  for (const auto& s : sections) {
    if (s.type == "scenario") {
      if (++scenario_sections > 1) throw ValidationError("scenario", -1, "duplicate [scenario] section");
      Reader r(s, dir);
      sc.name = r.str_or("name", file.parent_path().filename().string());
      if (r.has("start")) {
        const std::string v = r.str("start");
        try {
          declared_start = parse_timestamp(v);
        } catch (const std::invalid_argument& e) {
          throw ValidationError("scenario", -1, e.what());
        }
      }
      if (r.has("hours")) {
        const double h = r.num("hours");
        if (h < 1 || h != std::floor(h)) throw ValidationError("scenario", -1, "hours must be a positive integer");
        declared_hours = static_cast<std::size_t>(h);
      }
      sc.years = r.list("years");
      sc.load_shed_cost = r.num_or("load_shed_cost", 3000.0);
      sc.res_curtail_cost = r.num_or("res_curtail_cost", 20.0);
      sc.grid_loss = r.num_or("grid_loss", 0.0);
      sc.target_node = r.str_or("target_node", "");
      r.finish();
    } else if (s.type == "prices") {
      Reader r(s, dir);
      sc.co2_price = r.num_or("co2", 0.0);
      for (const auto& [tech, v] : r.take_prefixed("fuel.")) {
        try {
          sc.fuel_prices[tech] = parse_double(v);
        } catch (const std::invalid_argument&) {
          throw ValidationError("prices", -1, "fuel." + tech + " is not a number");
        }
      }
      r.finish();
    }
  }
  if (scenario_sections == 0) throw ValidationError(file.string(), -1, "missing [scenario] section");

  // Pass 2: nodes define the horizon.
  for (const auto& s : sections) {
    if (s.type != "node") continue;
    if (s.name.empty()) throw ValidationError("node", -1, "node section needs a name");
    Reader r(s, dir);
    auto spec = r.series_or("demand", 0.0);
    if (!spec.series && !(declared_start && declared_hours)) {
      throw ValidationError(r.entity(), -1, "constant demand needs start and hours in [scenario]");
    }
    Node n{s.name, spec.series ? *spec.series : TimeSeries(*declared_start, std::vector<double>(*declared_hours, *spec.constant))};
    r.finish();
    sc.nodes.push_back(std::move(n));
  }
  if (sc.nodes.empty()) throw ValidationError(file.string(), -1, "at least one [node] section is required");
  const Timestamp t0 = sc.nodes.front().demand.start();
  const std::size_t H = sc.nodes.front().demand.size();
  if (declared_start && *declared_start != t0) throw ValidationError("scenario", -1, "start does not match demand series");
  if (declared_hours && *declared_hours != H) throw ValidationError("scenario", -1, "hours does not match demand series");
  if (sc.target_node.empty()) sc.target_node = sc.nodes.front().id;

  for (const auto& s : sections) {
    if (s.type == "scenario" || s.type == "prices" || s.type == "node") continue;
    Reader r(s, dir);
    if ((s.type == "cluster" || s.type == "storage" || s.type == "candidate") && s.name.empty()) {
      throw ValidationError(s.type, -1, "section needs a name");
    }
    if (s.type == "cluster") {
      PlantCluster c;
      c.id = s.name;
      c.node = r.str("node");
      c.tech = r.str("tech");
      c.installed_cap = r.num("capacity");
      c.efficiency = r.num_or("efficiency", 1.0);
      c.min_load = r.num_or("min_load", 0.0);
      c.carbon_content = r.num_or("carbon_content", 0.0);
      const double vom = r.num_or("vom", 0.0);
      if (r.has("cvar_full")) {
        c.cvar_full = r.num("cvar_full");
      } else {
        auto fuel = sc.fuel_prices.find(c.tech);
        const double fp = fuel == sc.fuel_prices.end() ? 0.0 : fuel->second;
        c.cvar_full = (fp + sc.co2_price * c.carbon_content) / c.efficiency + vom;
      }
      c.cvar_min = r.num_or("cvar_min", c.cvar_full);
      c.cramp = r.num_or("cramp", 0.0);
      c.is_dispatchable = r.flag_or("dispatchable", true);
      c.availability = expand(r.series_or("availability", 1.0), t0, H);
      c.outages = expand(r.series_or("outages", 0.0), t0, H);
      c.reserve_pcr = r.num_or("reserve_pcr", 0.0);
      c.reserve_scr_pos = r.num_or("reserve_scr_pos", 0.0);
      c.reserve_scr_neg = r.num_or("reserve_scr_neg", 0.0);
      r.finish();
      sc.clusters.push_back(std::move(c));
    } else if (s.type == "storage") {
      StorageUnit st;
      st.id = s.name;
      st.node = r.str("node");
      const std::string kind = r.str_or("kind", "mid_term");
      if (kind == "mid_term") {
        st.kind = StorageKind::MidTerm;
      } else if (kind == "long_term") {
        st.kind = StorageKind::LongTerm;
      } else {
        throw ValidationError(r.entity(), -1, "kind must be mid_term or long_term");
      }
      st.turbine_cap = r.num("turbine_cap");
      st.pump_limit_factor = r.num_or("pump_limit", 1.1);
      st.cycle_efficiency = r.num_or("efficiency", 1.0);
      st.energy_power_factor = r.num_or("energy_power_factor", 9.0);
      st.water_value = r.num_or("water_value", 0.0);
      st.initial_level = r.num_or("initial_level", 0.5 * st.energy_capacity());
      r.finish();
      sc.storages.push_back(std::move(st));
    } else if (s.type == "interconnector") {
      Interconnector ic;
      ic.from = r.str("from");
      ic.to = r.str("to");
      ic.capacity = r.num("capacity");
      r.finish();
      sc.interconnectors.push_back(std::move(ic));
    } else if (s.type == "invest") {
      InvestSettings inv = sc.invest.value_or(InvestSettings{});
      if (r.has("years")) {
        inv.years.clear();
        for (const auto& y : r.list("years")) {
          try {
            inv.years.push_back(static_cast<int>(parse_double(y)));
          } catch (const std::invalid_argument&) {
            throw ValidationError("invest", -1, "bad year '" + y + "'");
          }
        }
      }
      inv.discount_rate = r.num_or("discount_rate", inv.discount_rate);
      inv.interest_rate = r.num_or("interest_rate", inv.interest_rate);
      inv.blocks = static_cast<int>(r.num_or("blocks", inv.blocks));
      for (const auto& [year, v] : r.take_prefixed("demand_scale.")) {
        try {
          inv.demand_scale[static_cast<int>(parse_double(year))] = parse_double(v);
        } catch (const std::invalid_argument&) {
          throw ValidationError("invest", -1, "bad demand_scale entry for '" + year + "'");
        }
      }
      r.finish();
      sc.invest = std::move(inv);
    } else if (s.type == "candidate") {
      CandidateTech c;
      c.id = s.name;
      c.node = r.str("node");
      c.tech = r.str("tech");
      c.cinv = r.num("cinv");
      c.cfix = r.num_or("cfix", 0.0);
      const double life = r.num("lifetime");
      if (life != std::floor(life)) throw ValidationError(r.entity(), -1, "lifetime must be an integer");
      c.lifetime = static_cast<int>(life);
      c.efficiency = r.num_or("efficiency", 1.0);
      c.carbon_content = r.num_or("carbon_content", 0.0);
      c.availability = r.num_or("availability", 1.0);
      if (r.has("cvar")) {
        c.cvar = r.num("cvar");
      } else {
        auto fuel = sc.fuel_prices.find(c.tech);
        const double fp = fuel == sc.fuel_prices.end() ? 0.0 : fuel->second;
        c.cvar = (fp + sc.co2_price * c.carbon_content) / c.efficiency;
      }
      r.finish();
      if (!sc.invest) sc.invest = InvestSettings{};
      sc.invest->candidates.push_back(std::move(c));
    } else {
      throw ValidationError(s.type, -1, "unknown section type '" + s.type + "' (line " + std::to_string(s.line) + ")");
    }
  }
  sc.validate();
  return sc;
}

namespace {

bool is_constant(const TimeSeries& s) {
  return std::all_of(s.values().begin(), s.values().end(), [&](double v) { return v == s[0]; });
}

std::string series_value(const TimeSeries& s, const std::string& file, const std::filesystem::path& dir) {
  if (is_constant(s)) return format_double(s[0]);
  write_series_csv(s, dir / file);
  return file;
}

}  // namespace

void write_scenario(const Scenario& sc, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream out;
  out << "[scenario]\n";
  out << "name = " << sc.name << "\n";
  out << "start = " << format_timestamp(sc.start()) << "\n";
  out << "hours = " << sc.hours() << "\n";
  if (!sc.years.empty()) {
    out << "years =";
    for (const auto& y : sc.years) out << ' ' << y;
    out << "\n";
  }
  out << "load_shed_cost = " << format_double(sc.load_shed_cost) << "\n";
  out << "res_curtail_cost = " << format_double(sc.res_curtail_cost) << "\n";
  out << "grid_loss = " << format_double(sc.grid_loss) << "\n";
  out << "target_node = " << sc.target_node << "\n";
  if (sc.co2_price != 0.0 || !sc.fuel_prices.empty()) {
    out << "\n[prices]\nco2 = " << format_double(sc.co2_price) << "\n";
    for (const auto& [tech, p] : sc.fuel_prices) out << "fuel." << tech << " = " << format_double(p) << "\n";
  }
  for (const auto& n : sc.nodes) {
    write_series_csv(n.demand, dir / ("demand_" + n.id + ".csv"));
    out << "\n[node " << n.id << "]\ndemand = demand_" << n.id << ".csv\n";
  }
  for (const auto& c : sc.clusters) {
    out << "\n[cluster " << c.id << "]\n";
    out << "node = " << c.node << "\ntech = " << c.tech << "\n";
    out << "capacity = " << format_double(c.installed_cap) << "\n";
    out << "efficiency = " << format_double(c.efficiency) << "\n";
    out << "min_load = " << format_double(c.min_load) << "\n";
    out << "carbon_content = " << format_double(c.carbon_content) << "\n";
    out << "cvar_full = " << format_double(c.cvar_full) << "\n";
    out << "cvar_min = " << format_double(c.cvar_min) << "\n";
    out << "cramp = " << format_double(c.cramp) << "\n";
    out << "dispatchable = " << (c.is_dispatchable ? "yes" : "no") << "\n";
    out << "availability = " << series_value(c.availability, "af_" + c.id + ".csv", dir) << "\n";
    out << "outages = " << series_value(c.outages, "out_" + c.id + ".csv", dir) << "\n";
    out << "reserve_pcr = " << format_double(c.reserve_pcr) << "\n";
    out << "reserve_scr_pos = " << format_double(c.reserve_scr_pos) << "\n";
    out << "reserve_scr_neg = " << format_double(c.reserve_scr_neg) << "\n";
  }
  for (const auto& s : sc.storages) {
    out << "\n[storage " << s.id << "]\n";
    out << "node = " << s.node << "\n";
    out << "kind = " << (s.kind == StorageKind::MidTerm ? "mid_term" : "long_term") << "\n";
    out << "turbine_cap = " << format_double(s.turbine_cap) << "\n";
    out << "pump_limit = " << format_double(s.pump_limit_factor) << "\n";
    out << "efficiency = " << format_double(s.cycle_efficiency) << "\n";
    out << "energy_power_factor = " << format_double(s.energy_power_factor) << "\n";
    out << "water_value = " << format_double(s.water_value) << "\n";
    out << "initial_level = " << format_double(s.initial_level) << "\n";
  }
  for (std::size_t i = 0; i < sc.interconnectors.size(); ++i) {
    const auto& ic = sc.interconnectors[i];
    out << "\n[interconnector " << ic.from << "_" << ic.to << "]\n";
    out << "from = " << ic.from << "\nto = " << ic.to << "\ncapacity = " << format_double(ic.capacity) << "\n";
  }
  if (sc.invest) {
    const auto& inv = *sc.invest;
    out << "\n[invest]\nyears =";
    for (int y : inv.years) out << ' ' << y;
    out << "\ndiscount_rate = " << format_double(inv.discount_rate) << "\n";
    out << "interest_rate = " << format_double(inv.interest_rate) << "\n";
    out << "blocks = " << inv.blocks << "\n";
    for (const auto& [y, f] : inv.demand_scale) out << "demand_scale." << y << " = " << format_double(f) << "\n";
    for (const auto& c : inv.candidates) {
      out << "\n[candidate " << c.id << "]\n";
      out << "node = " << c.node << "\ntech = " << c.tech << "\n";
      out << "cinv = " << format_double(c.cinv) << "\ncfix = " << format_double(c.cfix) << "\n";
      out << "lifetime = " << c.lifetime << "\ncvar = " << format_double(c.cvar) << "\n";
      out << "efficiency = " << format_double(c.efficiency) << "\n";
      out << "carbon_content = " << format_double(c.carbon_content) << "\n";
      out << "availability = " << format_double(c.availability) << "\n";
    }
  }
  std::ofstream file(dir / "scenario.cfg", std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot write " + (dir / "scenario.cfg").string());
  file << out.str();
}

}  // namespace mefkit
