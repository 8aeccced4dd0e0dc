#pragma once

#include "specnet/pencil.hpp"

namespace specnet {

/// Ball radius, Lipschitz constant and the admissible stepsize bound of the
/// cyclic block iteration.
///
/// The constants are stated for the unscaled iteration
///   Z <- Z + 4 alpha (Wbar Z - D Z Z^T D Z)
/// on the ball max_i ||D_i^{1/2} Z_i|| < R. The solver iterates Y = n Z with
/// the n-scaled gradient, so its equivalent stepsize and radius are
/// n * alpha_max and n * R (see solver_alpha / solver_radius).
struct StepConstants {
  double m1 = 0.0;
  double m2 = 0.0;
  double m_of_r = 0.0;
  double lipschitz = 0.0;
  double radius = 0.0;
  double alpha_max = 0.0;
  double n = 0.0;

  double solver_alpha() const { return n * alpha_max; }
  double solver_radius() const { return n * radius; }
};

/// `r_opt` <= 0 selects R = 2 sqrt(M1). Off-diagonal sums and max |W_ij|
/// use the deflated operator when the pencil is deflated.
StepConstants step_constants(const Pencil& p, Index k, Index max_batch_size,
                             double r_opt = 0.0);

}  // namespace specnet
