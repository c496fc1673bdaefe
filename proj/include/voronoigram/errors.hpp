#pragma once

#include <stdexcept>
#include <string>

namespace voronoigram {

/// Base class of every error thrown by the library. `kind()` is a stable
/// machine-readable tag used by the CLI's JSON error reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct DegenerateInput : Error {
  explicit DegenerateInput(const std::string& what) : Error("DegenerateInput", what) {}
};

struct ShapeMismatch : Error {
  explicit ShapeMismatch(const std::string& what) : Error("ShapeMismatch", what) {}
};

struct NonConvergence : Error {
  explicit NonConvergence(const std::string& what) : Error("NonConvergence", what) {}
};

struct DivergentIntegral : Error {
  explicit DivergentIntegral(const std::string& what) : Error("DivergentIntegral", what) {}
};

struct UnsupportedDescriptor : Error {
  explicit UnsupportedDescriptor(const std::string& what)
      : Error("UnsupportedDescriptor", what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error("IoError", what) {}
};

struct BadConfig : Error {
  explicit BadConfig(const std::string& what) : Error("BadConfig", what) {}
};

}  // namespace voronoigram
