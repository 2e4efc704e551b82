#pragma once

#include <stdexcept>
#include <string>

namespace voxsc {

/// Invalid user input: bad config values, malformed flags, dimension
/// mismatches surfaced at the interface level.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Unreadable/unwritable or malformed files.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace voxsc
