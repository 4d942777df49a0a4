#pragma once

/** \file fairness.hpp
 *  \brief Taxation cost on group utilities and the fairness presets it generalizes.
 *
 * The per-group cost is r(v_g) = sign(alpha*beta) * v_g^beta * G^(alpha-1) with
 * G = sum_j v_j^beta, so the total cost is sign(alpha*beta) * G^alpha. All
 * functions expect utilities >= 1 (the engine initializes them to 1).
 */

#include <span>
#include <string>

#include "manifoldrank/core.hpp"

namespace manifoldrank {

/// sign(x) with sign(0) = 0.
int sign_of(double x) noexcept;

/// G = sum_g v_g^beta.
double power_sum(std::span<const double> v, double beta);

/// Per-group cost r(v_g) given a precomputed G. Throws NonFiniteResult on overflow.
double taxation_cost(double v_g, double power_sum_g, const TaxationParams& params);

/// sign(alpha*beta) * (sum_g v_g^beta)^alpha.
double total_cost(std::span<const double> v, const TaxationParams& params);

/// d total_cost / d v_g = |alpha*beta| * G^(alpha-1) * v_g^(beta-1); never negative.
double marginal_tax(std::span<const double> v, GroupIndex g, const TaxationParams& params);

/// Sign of the second derivative of total_cost in v_g:
/// sign((alpha-1)*beta*v_g^beta + (beta-1)*G).
int convexity_direction(std::span<const double> v, GroupIndex g, const TaxationParams& params);

/// Named fairness functions expressible through (alpha, beta).
struct FairnessPreset {
  enum class Kind { MaxMin, PNorm, Elastic, AlphaFair, Proportional };

  Kind kind = Kind::PNorm;
  double parameter = 2.0;  // p, t or the alpha-fairness exponent; unused otherwise

  static FairnessPreset max_min() { return {Kind::MaxMin, 0.0}; }
  static FairnessPreset p_norm(double p) { return {Kind::PNorm, p}; }
  static FairnessPreset elastic(double t) { return {Kind::Elastic, t}; }
  static FairnessPreset alpha_fair(double a) { return {Kind::AlphaFair, a}; }
  static FairnessPreset proportional() { return {Kind::Proportional, 0.0}; }

  /// Parses "p_norm:2", "elastic:2", "alpha_fair:0.5", "proportional", "max_min".
  static FairnessPreset parse(const std::string& text);
};

struct RatePair {
  double alpha = 1.0;
  double beta = 1.0;
};

/// Beta used for the proportional preset, which only exists as the beta -> 0 limit.
inline constexpr double kProportionalBeta = 1e-3;

/** \brief Maps a preset to its (alpha, beta).
 *
 * p_norm(p) -> (1/p, p), elastic(t) -> (1/t, 1-t), alpha_fair(a) -> (1, 1-a),
 * proportional -> (1, 1e-3). max_min needs infinite rates and throws
 * UnsupportedPreset.
 */
RatePair resolve_preset(const FairnessPreset& preset);

}  // namespace manifoldrank
