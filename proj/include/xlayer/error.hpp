#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xlayer {

enum class ErrorKind {
  InvalidArgument,
  MissingGain,
  CapacityDomain,
  RoutingCycle,
  ScopeTooLarge,
  UnboundedCurvature,
  EmptyAllowedSet,
  DegenerateBound,
  EmptyFreeSet,
  CapacityModelMismatch,
  InitialInfeasible,
  DescentGuardExhausted,
  ConnectivityFailure,
  NoPath,
  InternalAssertion,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised when a session's active routing graph contains a directed cycle.
class RoutingCycleError : public Error {
 public:
  RoutingCycleError(int session, std::vector<int> cycle);

  int session() const noexcept { return session_; }
  const std::vector<int>& cycle() const noexcept { return cycle_; }

 private:
  int session_;
  std::vector<int> cycle_;
};

}  // namespace xlayer
