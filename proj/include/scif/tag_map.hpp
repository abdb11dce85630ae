#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "scif/geometry.hpp"

namespace scif {

struct MapSource {
  std::string session_id;
  int iterations = 0;
  bool converged = true;
  double final_cost = 0.0;
  double rms_residual = 0.0;
  std::int64_t observation_count = 0;
};

/// Registry of globally registered tag poses on the ground plane.
struct TagMap {
  std::map<int, Pose2> entries;
  MapSource source;

  bool contains(int id) const { return entries.count(id) != 0; }
  /// Throws Error(kUnknownTag).
  const Pose2& at(int id) const;
};

}  // namespace scif
