#pragma once

#include <stdexcept>
#include <string>

namespace tfconv {

// Extents that do not line up (mode sizes, channel counts, kernel larger
// than the padded input, ...).
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// Arguments that are well-formed but violate an operation's precondition
// (rank mismatch, zero rank, skip factor on a shape-changing layer, ...).
class PreconditionError : public std::invalid_argument {
 public:
  explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed files: tensor containers and plan manifests.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tfconv
