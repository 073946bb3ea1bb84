#pragma once

#include <stdexcept>
#include <string>

namespace loam {

using Real = double;

enum class ErrorKind {
  IndexOutOfRange,
  ArityMismatch,
  SourceMismatch,
  AsymmetricAdjacency,
  IllegalAccess,
  MapSourceMismatch,
  ShapeMismatch,
  UnboundIdentifier,
  NonDividingFactor,
  OutsideSparsity,
  EmptyPartials,
  DimensionMismatch,
  InvalidSubdivision,
  ParseError,
  NonManifold,
  CellMismatch,
  UnsupportedForm,
  MissingDiagonal,
  SpaceMismatch,
  IndefiniteBreakdown,
  InstabilityDetected,
  InvalidArgument,
};

/// Library-wide exception carrying a machine-checkable error kind.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

} // namespace loam
