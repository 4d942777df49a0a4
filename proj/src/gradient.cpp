#include "manifoldrank/gradient.hpp"

#include <cmath>

#include "manifoldrank/error.hpp"
#include "manifoldrank/fairness.hpp"

namespace manifoldrank {

SupplyGradient supply_gradient(const UtilityState& state, const TaxationParams& params) {
  const auto v = state.values();
  SupplyGradient out;
  out.eta.resize(v.size());
  try {
    const double g_sum = power_sum(v, params.beta);
    for (GroupIndex g = 0; g < v.size(); ++g) {
      const int direction = convexity_direction(v, g, params);
      if (direction == 0) {
        out.eta[g] = 0.0;
        continue;
      }
      const double cost = taxation_cost(v[g], g_sum, params);
      const double curvature =
          params.beta * (1.0 / v[g] + (params.alpha - 1.0) * std::pow(v[g], params.beta - 1.0) / g_sum);
      out.eta[g] = direction * cost * curvature;
      if (!std::isfinite(out.eta[g])) {
        throw Error(ErrorCode::NonFiniteGradient, "supply gradient overflowed");
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NonFiniteResult) throw Error(ErrorCode::NonFiniteGradient, e.what());
    throw;
  }
  return out;
}

double score_entropy(std::span<const double> s, bool uniform_fallback) {
  if (s.empty()) throw Error(ErrorCode::InvalidSpec, "entropy of an empty score vector");
  double raw = 0.0;
  double total = 0.0;
  for (double x : s) {
    raw += x;
    total += x + kEntropyEpsilon;
  }
  if (raw == 0.0 && !uniform_fallback) {
    throw Error(ErrorCode::AllZeroScores, "all scores are zero");
  }
  double h = 0.0;
  for (double x : s) {
    const double p = (x + kEntropyEpsilon) / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double score_skewness(std::span<const double> s) {
  if (s.empty()) throw Error(ErrorCode::InvalidSpec, "skewness of an empty score vector");
  const double n = static_cast<double>(s.size());
  double mean = 0.0;
  for (double x : s) mean += x;
  mean /= n;
  double m2 = 0.0;
  double m3 = 0.0;
  for (double x : s) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  if (m2 < 1e-12) return 0.0;
  return m3 / std::pow(m2, 1.5);
}

DemandGradient demand_gradient(std::span<const double> s, const TaxationParams& params) {
  return {params.a_e * score_entropy(s) - params.a_s * score_skewness(s)};
}

}  // namespace manifoldrank
