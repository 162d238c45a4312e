#pragma once

#include <stdexcept>
#include <string>

namespace lmc {

// Malformed input text: CSV rows, config files, numeric fields.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Shapes that cannot be reconciled (dataset vs. model, config vs. data).
class DimensionMismatch : public std::invalid_argument {
 public:
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

// A series too short or too degenerate for the requested diagnostic.
class DegenerateSeries : public std::invalid_argument {
 public:
  explicit DegenerateSeries(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace lmc
