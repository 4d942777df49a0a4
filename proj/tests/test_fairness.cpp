#include <gtest/gtest.h>

#include <cmath>

#include "manifoldrank/error.hpp"
#include "manifoldrank/fairness.hpp"
#include "manifoldrank/random.hpp"

using namespace manifoldrank;

namespace {

TaxationParams rates(double alpha, double beta) { return {alpha, beta, 1.0, 1.0, 1}; }

// Independent long-double evaluation of sign(ab) * (sum_j v_j^b)^a.
long double reference_total(const std::vector<double>& v, double alpha, double beta) {
  long double g = 0;
  for (double x : v) g += std::pow(static_cast<long double>(x), static_cast<long double>(beta));
  const int s = (alpha * beta > 0) - (alpha * beta < 0);
  return s * std::pow(g, static_cast<long double>(alpha));
}

}  // namespace

TEST(TaxationCost, LinearCostCollapsesToUtility) {
  const std::vector<double> v{2, 3};
  EXPECT_DOUBLE_EQ(taxation_cost(2.0, power_sum(v, 1.0), rates(1, 1)), 2.0);
}

TEST(TaxationCost, EuclideanNormSplitsIntoGroupTerms) {
  const std::vector<double> v{3, 4};
  const double g = power_sum(v, 2.0);
  EXPECT_NEAR(taxation_cost(3, g, rates(0.5, 2)) + taxation_cost(4, g, rates(0.5, 2)), 5.0, 1e-12);
}

TEST(TaxationCost, NegativeSignForNegativeRateProduct) {
  const std::vector<double> v{1, 1};
  EXPECT_DOUBLE_EQ(taxation_cost(1.0, power_sum(v, -1.0), rates(2, -1)), -2.0);
}

TEST(TotalCost, ClosedFormCases) {
  EXPECT_DOUBLE_EQ(total_cost(std::vector<double>{2, 3}, rates(1, 1)), 5.0);
  EXPECT_NEAR(total_cost(std::vector<double>{3, 4}, rates(0.5, 2)), 5.0, 1e-12);
  const std::vector<double> flat(6, 2.5);
  EXPECT_NEAR(total_cost(flat, rates(-1.5, 0.7)), -std::pow(6 * std::pow(2.5, 0.7), -1.5), 1e-12);
}

TEST(TotalCost, ZeroAlphaMeansNoFairness) {
  EXPECT_EQ(total_cost(std::vector<double>{2, 7}, rates(0, 2)), 0.0);
}

TEST(TotalCost, RejectsUtilitiesBelowOne) {
  try {
    total_cost(std::vector<double>{0.5, 2}, rates(1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidUtility);
  }
}

TEST(TotalCost, LogSpaceAvoidsIntermediateOverflow) {
  // v^beta alone overflows (|alpha*beta| > 20), but the product is finite.
  const std::vector<double> v{1e4, 1.0};
  const TaxationParams p = rates(-10, 2.5);
  const double g = power_sum(v, p.beta);
  const double expected = -std::exp(2.5 * std::log(1e4) - 11.0 * std::log(g));
  EXPECT_NEAR(taxation_cost(1e4, g, p) / expected, 1.0, 1e-12);
}

TEST(TotalCost, OverflowIsReported) {
  try {
    total_cost(std::vector<double>{1e200, 1e200}, rates(3, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteResult);
  }
}

TEST(TotalCost, EqualsSumOfGroupTerms) {
  Rng rng(1);
  for (int n = 0; n < 500; ++n) {
    const double alpha = -3 + 6 * rng.uniform();
    const double beta = -3 + 6 * rng.uniform();
    std::vector<double> v(2 + rng.below(7));
    for (double& x : v) x = 1 + 9 * rng.uniform();
    const double g = power_sum(v, beta);
    double parts = 0;
    for (double x : v) parts += taxation_cost(x, g, rates(alpha, beta));
    const double total = total_cost(v, rates(alpha, beta));
    EXPECT_NEAR(total, parts, 1e-10 * std::abs(total));
  }
}

TEST(MarginalTax, LinearCostIsOne) {
  EXPECT_DOUBLE_EQ(marginal_tax(std::vector<double>{2, 9, 4}, 1, rates(1, 1)), 1.0);
}

TEST(MarginalTax, QuadraticCase) {
  EXPECT_DOUBLE_EQ(marginal_tax(std::vector<double>{1, 1}, 0, rates(2, 1)), 4.0);
  // Cross-check with a central difference in extended precision.
  const std::vector<double> v{1, 1};
  const double h = 1e-6;
  const long double fd =
      (reference_total({1 + h, 1}, 2, 1) - reference_total({1 - h, 1}, 2, 1)) / (2.0L * h);
  EXPECT_NEAR(static_cast<double>(fd), 4.0, 4e-5);
}

TEST(MarginalTax, NonnegativeAndMatchesDerivativeOnRandomDraws) {
  Rng rng(2);
  for (int n = 0; n < 1000; ++n) {
    const double alpha = -3 + 6 * rng.uniform();
    double beta = -3 + 6 * rng.uniform();
    if (std::abs(beta) < 1e-6) beta = 1e-6;
    std::vector<double> v(2 + rng.below(7));
    for (double& x : v) x = 1 + 9 * rng.uniform();
    const std::size_t g = rng.below(v.size());
    const double tax = marginal_tax(v, g, rates(alpha, beta));
    EXPECT_GE(tax, -1e-12);
    std::vector<double> up = v, down = v;
    // Larger step than the property suite: long double (not 50-digit) here.
    const double h = 1e-4 * v[g];
    up[g] += h;
    down[g] -= h;
    const long double fd = (reference_total(up, alpha, beta) - reference_total(down, alpha, beta)) / (2.0L * h);
    EXPECT_NEAR(tax, static_cast<double>(fd), 1e-4 * std::abs(static_cast<double>(fd)) + 1e-15)
        << "alpha=" << alpha << " beta=" << beta;
  }
}

TEST(ConvexityDirection, ClosedFormCases) {
  EXPECT_EQ(convexity_direction(std::vector<double>{1, 1}, 0, rates(2, 1)), 1);
  EXPECT_EQ(convexity_direction(std::vector<double>{3, 5}, 1, rates(1, 1)), 0);
  EXPECT_EQ(convexity_direction(std::vector<double>{4, 4}, 0, rates(1, 0.5)), -1);
}

TEST(ConvexityDirection, AgreesWithSecondDifference) {
  Rng rng(4);
  int compared = 0;
  for (int n = 0; n < 500; ++n) {
    const double alpha = -3 + 6 * rng.uniform();
    const double beta = -3 + 6 * rng.uniform();
    std::vector<double> v(2 + rng.below(4));
    for (double& x : v) x = 1 + 4 * rng.uniform();
    const std::size_t g = rng.below(v.size());
    const int c = convexity_direction(v, g, rates(alpha, beta));
    const double h = 1e-3 * v[g];
    std::vector<double> up = v, down = v;
    up[g] += h;
    down[g] -= h;
    const long double f0 = reference_total(v, alpha, beta);
    const long double d2 = (reference_total(up, alpha, beta) - 2 * f0 + reference_total(down, alpha, beta)) / (h * h);
    // Only compare where the curvature clearly dominates the difference noise.
    if (std::abs(static_cast<double>(d2)) < 1e-6 * (1 + std::abs(static_cast<double>(f0)))) continue;
    ++compared;
    EXPECT_EQ(c, (d2 > 0) - (d2 < 0)) << "alpha=" << alpha << " beta=" << beta;
  }
  EXPECT_GT(compared, 400);
}

TEST(FairnessPreset, MapsToRatePairs) {
  const RatePair p2 = resolve_preset(FairnessPreset::p_norm(2));
  EXPECT_EQ(p2.alpha, 0.5);
  EXPECT_EQ(p2.beta, 2.0);
  const RatePair e2 = resolve_preset(FairnessPreset::elastic(2));
  EXPECT_EQ(e2.alpha, 0.5);
  EXPECT_EQ(e2.beta, -1.0);
  const RatePair a = resolve_preset(FairnessPreset::alpha_fair(0.5));
  EXPECT_EQ(a.alpha, 1.0);
  EXPECT_EQ(a.beta, 0.5);
  const RatePair prop = resolve_preset(FairnessPreset::proportional());
  EXPECT_EQ(prop.alpha, 1.0);
  EXPECT_EQ(prop.beta, kProportionalBeta);
}

TEST(FairnessPreset, PNormReproducesNorm) {
  Rng rng(9);
  for (double p : {1.0, 2.0, 3.0}) {
    for (int n = 0; n < 50; ++n) {
      std::vector<double> v(2 + rng.below(7));
      for (double& x : v) x = 1 + 9 * rng.uniform();
      const RatePair r = resolve_preset(FairnessPreset::p_norm(p));
      long double norm = 0;
      for (double x : v) norm += std::pow(static_cast<long double>(x), static_cast<long double>(p));
      norm = std::pow(norm, 1.0L / p);
      EXPECT_NEAR(total_cost(v, rates(r.alpha, r.beta)), static_cast<double>(norm), 1e-12 * static_cast<double>(norm));
    }
  }
}

TEST(FairnessPreset, ParsesNames) {
  EXPECT_EQ(FairnessPreset::parse("p_norm:3").kind, FairnessPreset::Kind::PNorm);
  EXPECT_EQ(FairnessPreset::parse("p_norm:3").parameter, 3.0);
  EXPECT_EQ(FairnessPreset::parse("elastic:2").kind, FairnessPreset::Kind::Elastic);
  EXPECT_EQ(FairnessPreset::parse("alpha_fair:0.5").kind, FairnessPreset::Kind::AlphaFair);
  EXPECT_EQ(FairnessPreset::parse("proportional").kind, FairnessPreset::Kind::Proportional);
  EXPECT_THROW(FairnessPreset::parse("bogus"), Error);
}

TEST(FairnessPreset, MaxMinIsUnsupported) {
  try {
    resolve_preset(FairnessPreset::max_min());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedPreset);
  }
}
