#pragma once

/** \file gradient.hpp
 *  \brief Supply-side penalty per group and the demand-side multiplier per user.
 */

#include <span>
#include <vector>

#include "manifoldrank/core.hpp"

namespace manifoldrank {

/// Penalty per unit score for each group.
struct SupplyGradient {
  std::vector<double> eta;
};

struct DemandGradient {
  double zeta = 0.0;
};

/** \brief eta_g = c_g * r(v_g) * gamma_g.
 *
 * gamma_g = beta * (1/v_g + (alpha-1) * v_g^(beta-1) / G) is the log-derivative
 * of r(v_g) (G depends on v_g), so eta_g = c_g * dr(v_g)/dv_g, where c_g is the
 * convexity direction. Throws NonFiniteGradient on overflow.
 */
SupplyGradient supply_gradient(const UtilityState& state, const TaxationParams& params);

/// Smoothing added to every score before normalizing to probabilities.
inline constexpr double kEntropyEpsilon = 1e-12;

/// Shannon entropy (nats) of p_i = (s_i + eps) / sum_j (s_j + eps).
/// With `uniform_fallback` false an all-zero vector throws AllZeroScores.
double score_entropy(std::span<const double> s, bool uniform_fallback = true);

/// Population skewness m3 / m2^(3/2); 0 when m2 < 1e-12.
double score_skewness(std::span<const double> s);

/// zeta = a_e * entropy(s) - a_s * skewness(s).
DemandGradient demand_gradient(std::span<const double> s, const TaxationParams& params);

}  // namespace manifoldrank
