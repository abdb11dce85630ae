#include "scif/tag_map.hpp"

#include <string>

#include "scif/error.hpp"

namespace scif {

const Pose2& TagMap::at(int id) const {
  const auto it = entries.find(id);
  if (it == entries.end()) {
    throw Error(ErrorCode::kUnknownTag, "tag " + std::to_string(id) + " not in map");
  }
  return it->second;
}

}  // namespace scif
