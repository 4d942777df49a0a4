#include "manifoldrank/fairness.hpp"

#include <cmath>
#include <cstdlib>

#include "manifoldrank/error.hpp"

namespace manifoldrank {

namespace {

bool use_log_space(double v_g, const TaxationParams& params) {
  return v_g > 1e3 && std::abs(params.alpha * params.beta) > 20.0;
}

// v^p * G^q, evaluated in log space where naive pow could overflow mid-way.
double power_product(double v, double p, double g_sum, double q, bool log_space) {
  if (log_space) return std::exp(p * std::log(v) + q * std::log(g_sum));
  return std::pow(v, p) * std::pow(g_sum, q);
}

double checked(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::NonFiniteResult,
                std::string(what) + " is not finite; parameters or utilities out of range");
  }
  return x;
}

void require_at_least_one(std::span<const double> v) {
  for (double x : v) {
    if (!(x >= 1.0)) throw Error(ErrorCode::InvalidUtility, "group utilities must be >= 1");
  }
}

}  // namespace

int sign_of(double x) noexcept { return (x > 0.0) - (x < 0.0); }

double power_sum(std::span<const double> v, double beta) {
  double total = 0.0;
  for (double x : v) total += std::pow(x, beta);
  return checked(total, "power sum");
}

double taxation_cost(double v_g, double power_sum_g, const TaxationParams& params) {
  const int s = sign_of(params.alpha * params.beta);
  if (s == 0) return 0.0;
  const double mag = power_product(v_g, params.beta, power_sum_g, params.alpha - 1.0,
                                   use_log_space(v_g, params));
  return checked(s * mag, "taxation cost");
}

double total_cost(std::span<const double> v, const TaxationParams& params) {
  require_at_least_one(v);
  const int s = sign_of(params.alpha * params.beta);
  if (s == 0) return 0.0;
  const double g_sum = power_sum(v, params.beta);
  return checked(s * std::pow(g_sum, params.alpha), "total cost");
}

double marginal_tax(std::span<const double> v, GroupIndex g, const TaxationParams& params) {
  require_at_least_one(v);
  const double ab = params.alpha * params.beta;
  if (sign_of(ab) == 0) return 0.0;
  const double g_sum = power_sum(v, params.beta);
  const double mag = power_product(v[g], params.beta - 1.0, g_sum, params.alpha - 1.0,
                                   use_log_space(v[g], params));
  return checked(std::abs(ab) * mag, "marginal tax");
}

int convexity_direction(std::span<const double> v, GroupIndex g, const TaxationParams& params) {
  const double g_sum = power_sum(v, params.beta);
  const double local = (params.alpha - 1.0) * params.beta * std::pow(v[g], params.beta);
  const double global = (params.beta - 1.0) * g_sum;
  return sign_of(local + global);
}

FairnessPreset FairnessPreset::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  double value = 0.0;
  if (colon != std::string::npos) {
    const std::string arg = text.substr(colon + 1);
    char* end = nullptr;
    value = std::strtod(arg.c_str(), &end);
    if (arg.empty() || *end != '\0') {
      throw Error(ErrorCode::InvalidConfig, "bad preset parameter in '" + text + "'");
    }
  }
  const bool has_arg = colon != std::string::npos;
  if (name == "max_min" && !has_arg) return max_min();
  if (name == "proportional" && !has_arg) return proportional();
  if (name == "p_norm" && has_arg) return p_norm(value);
  if (name == "elastic" && has_arg) return elastic(value);
  if (name == "alpha_fair" && has_arg) return alpha_fair(value);
  throw Error(ErrorCode::InvalidConfig, "unknown fairness preset '" + text + "'");
}

RatePair resolve_preset(const FairnessPreset& preset) {
  using Kind = FairnessPreset::Kind;
  switch (preset.kind) {
    case Kind::MaxMin:
      throw Error(ErrorCode::UnsupportedPreset,
                  "max-min fairness needs alpha = inf, beta = -inf; use the MMF metric instead");
    case Kind::PNorm:
      if (preset.parameter == 0.0) throw Error(ErrorCode::InvalidParams, "p-norm needs p != 0");
      return {1.0 / preset.parameter, preset.parameter};
    case Kind::Elastic:
      if (preset.parameter == 0.0 || preset.parameter == 1.0) {
        throw Error(ErrorCode::InvalidParams, "elastic fairness needs t not in {0, 1}");
      }
      return {1.0 / preset.parameter, 1.0 - preset.parameter};
    case Kind::AlphaFair:
      if (preset.parameter == 1.0) {
        throw Error(ErrorCode::InvalidParams, "alpha-fairness with a = 1 gives beta = 0");
      }
      return {1.0, 1.0 - preset.parameter};
    case Kind::Proportional:
      return {1.0, kProportionalBeta};
  }
  throw Error(ErrorCode::UnsupportedPreset, "unknown preset");
}

}  // namespace manifoldrank
