#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stdadi {

/// Malformed skeleton input. Carries the 1-based line number where parsing stopped.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// The declared frame count disagrees with the number of frame blocks present.
class FrameCountMismatch : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Trajectory rejected before fitting (too short, non-finite samples, bad dt).
class TrajectoryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A rational invariant spec that is not homogeneous or has repeated/out-of-range orders.
class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ShapeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace stdadi
