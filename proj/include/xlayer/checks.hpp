#pragma once

#include <cstdint>
#include <random>

#include "xlayer/scaling.hpp"

namespace xlayer {

// Random state strictly inside every simplex: each node splits over all links that go
// down a random order compatible with min-hop distance along `base`, powers are spread
// over every out-link and gamma is drawn from [gamma_low, 1). Redraws until finite.
NetworkState interior_state(const Network& net, const NetworkState& base, std::mt19937_64& rng,
                            double gamma_low = 0.6);

struct InstanceCheck {
  int gradient_checks = 0;
  double worst_gradient_error = 0;  // |fd - analytic| / max(|analytic|, 1e-3)
  double identity_residual = 0;     // potentials against their recursive definition
  int hessian_blocks = 0;
  int hessian_trials = 0;
  int hessian_violations = 0;
  double worst_hessian_gap = 0;  // relative to the largest bound entry

  bool passed(double gradient_tol = 1e-5, double identity_tol = 1e-9) const {
    return worst_gradient_error <= gradient_tol && identity_residual <= identity_tol && hessian_violations == 0;
  }
};

// Finite-difference checks of the marginals and of the curvature bounds at `state`.
InstanceCheck check_instance(const Network& net, const NetworkState& state, int trials, std::uint64_t seed);

}  // namespace xlayer
