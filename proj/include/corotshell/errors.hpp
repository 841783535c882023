#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace corotshell {

enum class ErrorKind {
  NonManifoldEdge,
  InconsistentOrientation,
  DegenerateTriangle,
  ZeroAreaTriangle,
  DegenerateDihedral,
  DegenerateElement,
  DegenerateStencil,
  OutOfRangeParameter,
  AllPinned,
  LineSearchFailure,
  LinearSolveFailure,
  ParseError,
  NonTriangleFace,
  ConfigError,
  IoError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonManifoldEdge: return "NonManifoldEdge";
    case ErrorKind::InconsistentOrientation: return "InconsistentOrientation";
    case ErrorKind::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorKind::ZeroAreaTriangle: return "ZeroAreaTriangle";
    case ErrorKind::DegenerateDihedral: return "DegenerateDihedral";
    case ErrorKind::DegenerateElement: return "DegenerateElement";
    case ErrorKind::DegenerateStencil: return "DegenerateStencil";
    case ErrorKind::OutOfRangeParameter: return "OutOfRangeParameter";
    case ErrorKind::AllPinned: return "AllPinned";
    case ErrorKind::LineSearchFailure: return "LineSearchFailure";
    case ErrorKind::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NonTriangleFace: return "NonTriangleFace";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Base exception for everything the library throws. `index()` carries the
/// offending element, triangle, line number or step when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(what), kind_(kind), index_(index) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> index_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what,
                              std::optional<std::size_t> index = std::nullopt) {
  throw Error(kind, std::string(to_string(kind)) + ": " + what, index);
}

}  // namespace corotshell
