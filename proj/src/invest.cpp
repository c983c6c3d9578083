#include "mefkit/invest.hpp"

#include "mefkit/csv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mefkit {

using lp::Sense;
using lp::Term;

double annuity(double cinv, double rate, int lifetime) {
  if (lifetime < 1) throw std::invalid_argument("lifetime must be >= 1");
  if (rate == 0.0) return cinv / lifetime;
  return cinv * rate / (1.0 - std::pow(1.0 + rate, -lifetime));
}

bool in_service(int added_year, int year, int lifetime) { return added_year <= year && year <= added_year + lifetime; }

void InvestProblem::validate() const {
  if (years.empty()) throw std::invalid_argument("invest problem needs at least one year");
  for (const auto& c : candidates) {
    if (c.lifetime < 1) throw std::invalid_argument("candidate " + c.id + ": lifetime must be >= 1");
    if (std::find(nodes.begin(), nodes.end(), c.node) == nodes.end()) {
      throw std::invalid_argument("candidate " + c.id + ": unknown node " + c.node);
    }
  }
  for (const auto& y : years) {
    if (!(y.discount_factor > 0.0 && y.discount_factor <= 1.0)) {
      throw std::invalid_argument("discount factor of " + std::to_string(y.year) + " must lie in (0,1]");
    }
    for (const auto& b : y.blocks) {
      if (b.demand.size() != nodes.size() || b.existing_avail.size() != existing.size()) {
        throw std::invalid_argument("load block dimensions do not match the problem");
      }
    }
  }
}

std::vector<LoadBlock> load_blocks(const Scenario& sc, int blocks, double scale) {
  const std::size_t H = sc.hours();
  if (blocks < 1) throw std::invalid_argument("at least one load block is required");
  std::vector<double> residual(H, 0.0);
  for (std::size_t h = 0; h < H; ++h) {
    for (const auto& n : sc.nodes) residual[h] += scale * n.demand[h];
    for (const auto& c : sc.clusters) {
      if (!c.is_dispatchable) residual[h] -= std::max(0.0, c.available_capacity(h));
    }
  }
  std::vector<std::size_t> order(H);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return residual[a] > residual[b]; });

  const double hour_weight = 8760.0 / static_cast<double>(H);
  auto make_block = [&](std::size_t from, std::size_t to, double weight) {
    LoadBlock b;
    b.weight = weight;
    b.demand.assign(sc.nodes.size(), 0.0);
    b.existing_avail.assign(sc.clusters.size(), 0.0);
    const double count = static_cast<double>(to - from);
    for (std::size_t k = from; k < to; ++k) {
      const std::size_t h = order[k];
      for (std::size_t n = 0; n < sc.nodes.size(); ++n) b.demand[n] += scale * sc.nodes[n].demand[h] / count;
      for (std::size_t c = 0; c < sc.clusters.size(); ++c) {
        b.existing_avail[c] += std::max(0.0, sc.clusters[c].available_capacity(h)) / count;
      }
    }
    return b;
  };

  std::vector<LoadBlock> out;
  // A single block is the peak hour standing in for the whole year.
  if (blocks == 1 || H == 1) {
    out.push_back(make_block(0, 1, 8760.0));
    return out;
  }
  out.push_back(make_block(0, 1, hour_weight));
  const std::size_t rest = H - 1;
  const std::size_t groups = std::min<std::size_t>(static_cast<std::size_t>(blocks - 1), rest);
  std::size_t pos = 1;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t size = rest / groups + (g < rest % groups ? 1 : 0);
    out.push_back(make_block(pos, pos + size, hour_weight * static_cast<double>(size)));
    pos += size;
  }
  return out;
}

InvestProblem make_invest_problem(const Scenario& sc) {
  const InvestSettings settings = sc.invest.value_or(InvestSettings{});
  InvestProblem p;
  for (const auto& n : sc.nodes) p.nodes.push_back(n.id);
  p.candidates = settings.candidates;
  p.existing = sc.clusters;
  p.interconnectors = sc.interconnectors;
  p.interest_rate = settings.interest_rate;
  p.load_shed_cost = sc.load_shed_cost;
  p.res_curtail_cost = sc.res_curtail_cost;
  p.grid_loss = sc.grid_loss;
  const int y0 = settings.years.front();
  for (int y : settings.years) {
    InvestYear iy;
    iy.year = y;
    iy.discount_factor = std::pow(1.0 + settings.discount_rate, -(y - y0));
    const auto scale = settings.demand_scale.find(y);
    iy.blocks = load_blocks(sc, settings.blocks, scale == settings.demand_scale.end() ? 1.0 : scale->second);
    p.years.push_back(std::move(iy));
  }
  p.validate();
  return p;
}

namespace {

struct InvestIndex {
  std::vector<std::vector<int>> add;                           // [cand][year]
  std::vector<std::vector<std::vector<int>>> cand_gen;         // [cand][year][block]
  std::vector<std::vector<std::vector<int>>> exist_gen;        // [cluster][year][block]
  std::vector<std::vector<std::vector<int>>> shed;             // [node][year][block]
  std::vector<std::vector<std::vector<int>>> flow;             // [line][year][block]
  double offset = 0.0;
};

int node_of(const InvestProblem& p, const std::string& id) {
  return static_cast<int>(std::find(p.nodes.begin(), p.nodes.end(), id) - p.nodes.begin());
}

InvestIndex build(const InvestProblem& p, lp::LinearProgram& lp) {
  p.validate();
  const std::size_t Y = p.years.size();
  InvestIndex ix;
  auto cube = [&](std::size_t units) {
    std::vector<std::vector<std::vector<int>>> v(units, std::vector<std::vector<int>>(Y));
    for (auto& per_unit : v) {
      for (std::size_t y = 0; y < Y; ++y) per_unit[y].assign(p.years[y].blocks.size(), -1);
    }
    return v;
  };
  ix.cand_gen = cube(p.candidates.size());
  ix.exist_gen = cube(p.existing.size());
  ix.shed = cube(p.nodes.size());
  ix.flow = cube(p.interconnectors.size());
  ix.add.assign(p.candidates.size(), std::vector<int>(Y, -1));

  for (std::size_t c = 0; c < p.candidates.size(); ++c) {
    const CandidateTech& ct = p.candidates[c];
    const double yearly = annuity(ct.cinv, p.interest_rate, ct.lifetime) + ct.cfix;
    for (std::size_t ya = 0; ya < Y; ++ya) {
      double cost = 0.0;
      for (std::size_t y = 0; y < Y; ++y) {
        if (in_service(p.years[ya].year, p.years[y].year, ct.lifetime)) cost += p.years[y].discount_factor * yearly;
      }
      ix.add[c][ya] = lp.add_variable(cost, 0.0, lp::kInf, ct.id + ".add." + std::to_string(p.years[ya].year));
    }
  }

  for (std::size_t y = 0; y < Y; ++y) {
    const InvestYear& iy = p.years[y];
    for (std::size_t b = 0; b < iy.blocks.size(); ++b) {
      const LoadBlock& blk = iy.blocks[b];
      const double w = iy.discount_factor * blk.weight;
      std::vector<std::vector<Term>> balance(p.nodes.size());
      for (std::size_t c = 0; c < p.candidates.size(); ++c) {
        const CandidateTech& ct = p.candidates[c];
        const int g = lp.add_variable(w * ct.cvar);
        ix.cand_gen[c][y][b] = g;
        std::vector<Term> cap{{g, 1.0}};
        for (std::size_t ya = 0; ya < Y; ++ya) {
          if (in_service(p.years[ya].year, iy.year, ct.lifetime)) cap.push_back({ix.add[c][ya], -ct.availability});
        }
        lp.add_row(std::move(cap), Sense::LessEqual, 0.0);
        balance[node_of(p, ct.node)].push_back({g, 1.0});
      }
      for (std::size_t e = 0; e < p.existing.size(); ++e) {
        const PlantCluster& pc = p.existing[e];
        const double avail = blk.existing_avail[e];
        double cost = w * pc.cvar_full;
        if (!pc.is_dispatchable) {
          cost -= w * p.res_curtail_cost;
          ix.offset += w * p.res_curtail_cost * avail;
        }
        const int g = lp.add_variable(cost, 0.0, avail);
        ix.exist_gen[e][y][b] = g;
        balance[node_of(p, pc.node)].push_back({g, 1.0});
      }
      for (std::size_t l = 0; l < p.interconnectors.size(); ++l) {
        const auto& ic = p.interconnectors[l];
        const int f = lp.add_variable(0.0, 0.0, ic.capacity);
        ix.flow[l][y][b] = f;
        balance[node_of(p, ic.to)].push_back({f, 1.0 - p.grid_loss / 2.0});
        balance[node_of(p, ic.from)].push_back({f, -(1.0 + p.grid_loss / 2.0)});
      }
      for (std::size_t n = 0; n < p.nodes.size(); ++n) {
        if (p.load_shed_cost >= 0.0) {
          ix.shed[n][y][b] = lp.add_variable(w * p.load_shed_cost);
          balance[n].push_back({ix.shed[n][y][b], 1.0});
        }
        lp.add_row(std::move(balance[n]), Sense::Equal, blk.demand[n],
                   p.nodes[n] + ".balance." + std::to_string(iy.year) + "." + std::to_string(b));
      }
    }
  }
  return ix;
}

}  // namespace

lp::LinearProgram build_invest_lp(const InvestProblem& problem) {
  lp::LinearProgram lp;
  build(problem, lp);
  return lp;
}

double CapacityPlan::installed(const std::string& candidate, int year) const {
  for (const auto& e : entries) {
    if (e.candidate == candidate && e.year == year) return e.installed;
  }
  throw std::out_of_range("no plan entry for " + candidate + " in " + std::to_string(year));
}

double CapacityPlan::added(const std::string& candidate, int year) const {
  for (const auto& e : entries) {
    if (e.candidate == candidate && e.year == year) return e.added;
  }
  throw std::out_of_range("no plan entry for " + candidate + " in " + std::to_string(year));
}

CapacityPlan solve_invest(const InvestProblem& p) {
  lp::LinearProgram lp;
  const InvestIndex ix = build(p, lp);
  const lp::LpSolution sol = lp::solve(lp);
  if (sol.status != lp::Status::Optimal) {
    throw std::runtime_error(std::string("invest LP is ") + lp::to_string(sol.status));
  }
  const auto& x = sol.x;
  const std::size_t Y = p.years.size();
  CapacityPlan plan;
  for (std::size_t c = 0; c < p.candidates.size(); ++c) {
    const CandidateTech& ct = p.candidates[c];
    for (std::size_t y = 0; y < Y; ++y) {
      CapacityEntry e{ct.id, ct.node, ct.tech, p.years[y].year, x[ix.add[c][y]], 0.0};
      for (std::size_t ya = 0; ya < Y; ++ya) {
        if (in_service(p.years[ya].year, p.years[y].year, ct.lifetime)) e.installed += x[ix.add[c][ya]];
      }
      plan.entries.push_back(e);
    }
  }
  for (std::size_t y = 0; y < Y; ++y) {
    const InvestYear& iy = p.years[y];
    InvestYearCost yc;
    yc.year = iy.year;
    for (std::size_t c = 0; c < p.candidates.size(); ++c) {
      const CandidateTech& ct = p.candidates[c];
      const double inst = plan.entries[c * Y + y].installed;
      yc.fixed += ct.cfix * inst;
      yc.investment += annuity(ct.cinv, p.interest_rate, ct.lifetime) * inst;
    }
    for (std::size_t b = 0; b < iy.blocks.size(); ++b) {
      const LoadBlock& blk = iy.blocks[b];
      for (std::size_t c = 0; c < p.candidates.size(); ++c) yc.generation += blk.weight * p.candidates[c].cvar * x[ix.cand_gen[c][y][b]];
      for (std::size_t e = 0; e < p.existing.size(); ++e) {
        const double g = x[ix.exist_gen[e][y][b]];
        yc.generation += blk.weight * p.existing[e].cvar_full * g;
        if (!p.existing[e].is_dispatchable) yc.generation += blk.weight * p.res_curtail_cost * (blk.existing_avail[e] - g);
      }
      for (std::size_t n = 0; n < p.nodes.size(); ++n) {
        if (ix.shed[n][y][b] < 0) continue;
        const double s = x[ix.shed[n][y][b]];
        yc.generation += blk.weight * p.load_shed_cost * s;
        yc.shed += blk.weight * s;
      }
    }
    plan.objective += iy.discount_factor * (yc.generation + yc.fixed + yc.investment);
    plan.costs.push_back(yc);
  }
  return plan;
}

Scenario apply_plan(const Scenario& sc, const CapacityPlan& plan, int year) {
  Scenario out = sc;
  if (sc.invest) {
    const auto scale = sc.invest->demand_scale.find(year);
    if (scale != sc.invest->demand_scale.end()) {
      for (auto& n : out.nodes) {
        std::vector<double> v(n.demand.values().begin(), n.demand.values().end());
        for (double& d : v) d *= scale->second;
        n.demand = TimeSeries(n.demand.start(), std::move(v));
      }
    }
  }
  const std::size_t H = sc.hours();
  bool found = false;
  for (const auto& e : plan.entries) {
    if (e.year != year) continue;
    found = true;
    if (e.installed <= 1e-9) continue;
    const auto cand = std::find_if(sc.invest->candidates.begin(), sc.invest->candidates.end(),
                                   [&](const CandidateTech& c) { return c.id == e.candidate; });
    if (cand == sc.invest->candidates.end()) throw std::invalid_argument("plan references unknown candidate " + e.candidate);
    PlantCluster c;
    c.id = cand->id;
    c.node = cand->node;
    c.tech = cand->tech;
    c.installed_cap = e.installed;
    c.efficiency = cand->efficiency;
    c.carbon_content = cand->carbon_content;
    c.cvar_full = cand->cvar;
    c.cvar_min = cand->cvar;
    c.availability = TimeSeries(sc.start(), std::vector<double>(H, cand->availability));
    c.outages = TimeSeries(sc.start(), std::vector<double>(H, 0.0));
    out.clusters.push_back(std::move(c));
  }
  if (!found && !plan.entries.empty()) throw std::invalid_argument("plan has no entries for year " + std::to_string(year));
  out.validate();
  return out;
}

void write_capacities_csv(const CapacityPlan& plan, const std::filesystem::path& path) {
  CsvTable t;
  t.header = {"candidate", "node", "tech", "year", "added_mw", "installed_mw"};
  for (const auto& e : plan.entries) {
    t.rows.push_back({e.candidate, e.node, e.tech, std::to_string(e.year), format_double(e.added), format_double(e.installed)});
  }
  write_csv(t, path);
}

}  // namespace mefkit
