#pragma once

#include "mefkit/dispatch.hpp"

#include <string>
#include <vector>

namespace mefkit {

struct PerturbationJob {
  std::size_t window;  // 0-based day whose window is re-solved
  std::size_t hour;    // global hour index
};

/// One job per hour, assigned to the window whose middle day contains it.
std::vector<PerturbationJob> perturbation_plan(std::size_t hours);

struct MefOptions {
  double delta = 1.0;  // MWh added to the target-node demand
  // Re-run downstream windows while the carried state differs from the
  // baseline by more than drift_tol.
  bool strict = false;
  double drift_tol = 1e-3;
  int jobs = 1;  // worker threads; windows are the unit of work
  double clamp_floor = -1e-6;
};

struct HourRange {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive; 0 means "to the end"
};

/// Parses `all` or `a-b` (0-based, inclusive bounds).
HourRange parse_hour_range(const std::string& text, std::size_t hours);

struct MefRun {
  MefSeries mef;
  std::size_t solves = 0;              // window LPs solved, baselines included
  std::size_t clamped = 0;             // values in [clamp_floor, 0) set to 0
  std::size_t below_floor = 0;         // values left below clamp_floor
  std::size_t rechained_windows = 0;   // strict mode only
  std::size_t drifting_hours = 0;      // perturbations whose end state moved
  std::vector<std::string> log;
};

/// Incremental MEF in t CO2/MWh for every hour of `range`: each job re-solves
/// its window, warm-started from the window's baseline basis, with demand
/// raised by `delta` in that hour, and differences the kept-day emissions.
MefRun incremental_mef(const Scenario& scenario, const DispatchSolution& baseline, HourRange range = {},
                       const MefOptions& options = {});

}  // namespace mefkit
