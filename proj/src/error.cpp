#include "xlayer/error.hpp"

#include <sstream>

namespace xlayer {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::MissingGain: return "MissingGain";
    case ErrorKind::CapacityDomain: return "CapacityDomain";
    case ErrorKind::RoutingCycle: return "RoutingCycle";
    case ErrorKind::ScopeTooLarge: return "ScopeTooLarge";
    case ErrorKind::UnboundedCurvature: return "UnboundedCurvature";
    case ErrorKind::EmptyAllowedSet: return "EmptyAllowedSet";
    case ErrorKind::DegenerateBound: return "DegenerateBound";
    case ErrorKind::EmptyFreeSet: return "EmptyFreeSet";
    case ErrorKind::CapacityModelMismatch: return "CapacityModelMismatch";
    case ErrorKind::InitialInfeasible: return "InitialInfeasible";
    case ErrorKind::DescentGuardExhausted: return "DescentGuardExhausted";
    case ErrorKind::ConnectivityFailure: return "ConnectivityFailure";
    case ErrorKind::NoPath: return "NoPath";
    case ErrorKind::InternalAssertion: return "InternalAssertion";
  }
  return "Unknown";
}

namespace {
std::string describe_cycle(int session, const std::vector<int>& cycle) {
  std::ostringstream os;
  os << "session " << session << " cycle";
  for (int n : cycle) os << ' ' << n;
  return os.str();
}
}  // namespace

RoutingCycleError::RoutingCycleError(int session, std::vector<int> cycle)
    : Error(ErrorKind::RoutingCycle, describe_cycle(session, cycle)),
      session_(session),
      cycle_(std::move(cycle)) {}

}  // namespace xlayer
