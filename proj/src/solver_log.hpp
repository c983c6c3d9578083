#pragma once

#include <glog/logging.h>

#include <mutex>

namespace mefkit::detail {

// Drops line-search warnings that flat likelihood surfaces trigger.
inline void quiet_solver_logs() {
  static std::once_flag once;
  std::call_once(once, [] { FLAGS_minloglevel = google::GLOG_ERROR; });
}

}  // namespace mefkit::detail
