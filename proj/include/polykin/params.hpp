#pragma once

#include <cmath>
#include <string>

#include "polykin/error.hpp"

namespace polykin {

/// Relaxation parameters of the ellipsoidal polyatomic model.
/// Admissible range: -1/2 < nu < 1, 0 <= theta <= 1, delta > 0.
struct Params {
  double nu = 0.0;
  double theta = 0.0;
  double delta = 2.0;

  void validate() const {
    if (!(std::isfinite(nu) && nu > -0.5 && nu < 1.0))
      throw parameter_error("nu must lie in (-1/2, 1), got " + std::to_string(nu));
    if (!(std::isfinite(theta) && theta >= 0.0 && theta <= 1.0))
      throw parameter_error("theta must lie in [0, 1], got " + std::to_string(theta));
    if (!(std::isfinite(delta) && delta > 0.0))
      throw parameter_error("delta must be positive, got " + std::to_string(delta));
  }

  /// The positivity result for the remainder covers 0 <= nu < 1 only.
  bool theorem_regime() const { return nu >= 0.0 && nu < 1.0 && theta >= 0.0 && theta <= 1.0; }
};

}  // namespace polykin
