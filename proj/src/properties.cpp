#include "manifoldrank/properties.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "manifoldrank/error.hpp"
#include "manifoldrank/fairness.hpp"
#include "manifoldrank/gradient.hpp"
#include "manifoldrank/rerank.hpp"

namespace manifoldrank {

namespace {

using Wide = boost::multiprecision::cpp_bin_float_50;

struct Draw {
  TaxationParams params;
  std::vector<double> v;
};

Draw random_draw(Rng& rng) {
  Draw d;
  d.params.alpha = -3.0 + 6.0 * rng.uniform();
  do {
    d.params.beta = -3.0 + 6.0 * rng.uniform();
  } while (std::abs(d.params.beta) < kMinAbsBeta);
  const std::size_t groups = 2 + rng.below(7);
  d.v.resize(groups);
  for (double& x : d.v) x = 1.0 + 9.0 * rng.uniform();
  return d;
}

int sign(double x) { return (x > 0) - (x < 0); }

/// sign(ab) * (sum v^b)^a with v_g replaced by x.
Wide wide_total_cost(const Draw& d, std::size_t g, const Wide& x) {
  Wide sum = 0;
  const Wide b = d.params.beta;
  for (std::size_t j = 0; j < d.v.size(); ++j) {
    sum += boost::multiprecision::pow(j == g ? x : Wide(d.v[j]), b);
  }
  return sign(d.params.alpha * d.params.beta) * boost::multiprecision::pow(sum, Wide(d.params.alpha));
}

/// sign(ab) * x^b * G(x)^(a-1) with v_g replaced by x.
Wide wide_taxation_cost(const Draw& d, std::size_t g, const Wide& x) {
  Wide sum = 0;
  const Wide b = d.params.beta;
  for (std::size_t j = 0; j < d.v.size(); ++j) {
    sum += boost::multiprecision::pow(j == g ? x : Wide(d.v[j]), b);
  }
  return sign(d.params.alpha * d.params.beta) * boost::multiprecision::pow(x, b) *
         boost::multiprecision::pow(sum, Wide(d.params.alpha - 1.0));
}

Wide central_difference(const std::function<Wide(const Wide&)>& f, double x, double h) {
  const Wide wx = x, wh = h;
  return (f(wx + wh) - f(wx - wh)) / (2 * wh);
}

Wide second_difference(const std::function<Wide(const Wide&)>& f, double x, double h) {
  const Wide wx = x, wh = h;
  return (f(wx + wh) - 2 * f(wx) + f(wx - wh)) / (wh * wh);
}

std::string describe(const Draw& d, std::size_t g) {
  std::ostringstream out;
  out.precision(17);
  out << "alpha=" << d.params.alpha << " beta=" << d.params.beta << " g=" << g << " v=[";
  for (std::size_t j = 0; j < d.v.size(); ++j) out << (j ? "," : "") << d.v[j];
  out << "]";
  return out.str();
}

class Recorder {
 public:
  Recorder(std::string suite, std::string name) {
    result_.suite = std::move(suite);
    result_.name = std::move(name);
  }

  void check(bool ok, const std::function<std::string()>& detail) {
    ++result_.checked;
    if (ok) return;
    ++result_.failures;
    if (result_.passed) result_.detail = detail();
    result_.passed = false;
  }

  void fail(const std::string& detail) {
    check(false, [&] { return detail; });
  }

  PropertyResult done() && { return std::move(result_); }

 private:
  PropertyResult result_;
};

std::string error_text(const Error& e) { return std::string(to_string(e.code())) + ": " + e.what(); }

}  // namespace

ScoreDataset random_tiny_dataset(Rng& rng, std::size_t max_users, std::size_t max_items,
                                 std::size_t max_groups, std::size_t k, double sigma) {
  ScoreDataset ds;
  const std::size_t users = 1 + rng.below(max_users);
  const std::size_t min_items = std::max<std::size_t>(k, 2);
  const std::size_t items = min_items + rng.below(max_items - min_items + 1);
  const std::size_t groups = 2 + rng.below(std::min(max_groups, items) - 1);
  for (std::size_t u = 0; u < users; ++u) ds.users.push_back("u" + std::to_string(u));
  for (std::size_t i = 0; i < items; ++i) ds.items.push_back("i" + std::to_string(i));
  for (std::size_t g = 0; g < groups; ++g) ds.groups.push_back("g" + std::to_string(g));
  for (std::size_t i = 0; i < items; ++i) ds.group_of.push_back(i < groups ? i : rng.below(groups));
  ds.scores.assign(users, std::vector<double>(items));
  for (auto& row : ds.scores) {
    for (double& s : row) s = std::exp(sigma * rng.normal());
  }
  return validate_dataset(std::move(ds), k);
}

std::vector<PropertyResult> fairness_properties(std::uint64_t seed) {
  const std::string suite = "fairness";
  std::vector<PropertyResult> out;
  Rng rng(seed);
  std::vector<Draw> draws;
  for (int n = 0; n < 1000; ++n) draws.push_back(random_draw(rng));

  Recorder nonneg(suite, "marginal_tax_nonnegative");
  Recorder derivative(suite, "marginal_tax_matches_finite_difference");
  Recorder additive(suite, "total_cost_is_additive");
  Recorder convex(suite, "convexity_direction_matches_curvature");
  for (const Draw& d : draws) {
    try {
      const double total = total_cost(d.v, d.params);
      const double G = power_sum(d.v, d.params.beta);
      double parts = 0.0;
      for (std::size_t g = 0; g < d.v.size(); ++g) parts += taxation_cost(d.v[g], G, d.params);
      additive.check(std::abs(total - parts) <= 1e-10 * std::max(std::abs(total), 1e-300),
                     [&] { return describe(d, 0); });

      for (std::size_t g = 0; g < d.v.size(); ++g) {
        const double tax = marginal_tax(d.v, g, d.params);
        nonneg.check(tax >= -1e-12, [&] { return describe(d, g) + " tax=" + std::to_string(tax); });

        auto f = [&](const Wide& x) { return wide_total_cost(d, g, x); };
        const double fd = static_cast<double>(central_difference(f, d.v[g], 1e-6 * d.v[g]));
        derivative.check(std::abs(tax - fd) <= 1e-4 * std::max(std::abs(fd), 1e-300),
                         [&] { return describe(d, g) + " tax=" + std::to_string(tax) + " fd=" + std::to_string(fd); });

        const int c = convexity_direction(d.v, g, d.params);
        const double curvature = static_cast<double>(second_difference(f, d.v[g], 1e-10 * d.v[g]));
        convex.check(c * curvature >= -1e-8, [&] {
          return describe(d, g) + " c=" + std::to_string(c) + " d2=" + std::to_string(curvature);
        });
      }
    } catch (const Error& e) {
      nonneg.fail(describe(d, 0) + " " + error_text(e));
    }
  }
  out.push_back(std::move(nonneg).done());
  out.push_back(std::move(derivative).done());
  out.push_back(std::move(additive).done());
  out.push_back(std::move(convex).done());

  Recorder presets(suite, "presets_reproduce_closed_forms");
  for (double p : {1.0, 2.0, 3.0}) {
    for (int n = 0; n < 20; ++n) {
      std::vector<double> v(2 + rng.below(7));
      for (double& x : v) x = 1.0 + 9.0 * rng.uniform();
      const RatePair rates = resolve_preset(FairnessPreset::p_norm(p));
      const double cost = total_cost(v, {rates.alpha, rates.beta, 1.0, 1.0, 1});
      double norm = 0.0;
      for (double x : v) norm += std::pow(x, p);
      norm = std::pow(norm, 1.0 / p);
      presets.check(std::abs(cost - norm) <= 1e-12 * norm,
                    [&] { return "p=" + std::to_string(p) + " cost=" + std::to_string(cost); });
    }
  }
  for (double t : {0.5, 2.0, 3.0}) {
    const RatePair rates = resolve_preset(FairnessPreset::elastic(t));
    presets.check(rates.alpha == 1.0 / t && rates.beta == 1.0 - t,
                  [&] { return "elastic t=" + std::to_string(t); });
  }
  for (double a : {0.5, 2.0}) {
    const RatePair rates = resolve_preset(FairnessPreset::alpha_fair(a));
    presets.check(rates.alpha == 1.0 && rates.beta == 1.0 - a,
                  [&] { return "alpha_fair a=" + std::to_string(a); });
  }
  out.push_back(std::move(presets).done());
  return out;
}

std::vector<PropertyResult> gradient_properties(std::uint64_t seed) {
  const std::string suite = "gradient";
  std::vector<PropertyResult> out;
  Rng rng(seed + 1);

  Recorder supply(suite, "supply_gradient_matches_finite_difference");
  for (int n = 0; n < 500; ++n) {
    const Draw d = random_draw(rng);
    UtilityState state(d.v.size());
    for (std::size_t g = 0; g < d.v.size(); ++g) state.add(g, d.v[g] - 1.0);
    try {
      const SupplyGradient eta = supply_gradient(state, d.params);
      const double G = power_sum(state.values(), d.params.beta);
      for (std::size_t g = 0; g < d.v.size(); ++g) {
        const double vg = state[g];
        Draw at = d;
        at.v.assign(state.values().begin(), state.values().end());
        auto r = [&](const Wide& x) { return wide_taxation_cost(at, g, x); };
        const int c = convexity_direction(state.values(), g, d.params);
        const double expected = c * static_cast<double>(central_difference(r, vg, 1e-6 * vg));
        // Magnitude of the two summands of d r / d v_g; a near-cancelling sum
        // is compared against that scale instead of its own tiny value.
        const double rv = std::abs(taxation_cost(vg, G, d.params));
        const double scale =
            rv * std::abs(d.params.beta) *
            (1.0 / vg + std::abs(d.params.alpha - 1.0) * std::pow(vg, d.params.beta - 1.0) / G);
        const double denom = std::max({std::abs(expected), std::abs(eta.eta[g]), 1e-9 * scale, 1e-300});
        supply.check(std::abs(eta.eta[g] - expected) <= 1e-4 * denom, [&] {
          return describe(at, g) + " eta=" + std::to_string(eta.eta[g]) + " fd=" + std::to_string(expected);
        });
      }
    } catch (const Error& e) {
      supply.fail(describe(d, 0) + " " + error_text(e));
    }
  }
  out.push_back(std::move(supply).done());

  auto random_scores = [&](std::size_t n) {
    std::vector<double> s(n);
    for (double& x : s) x = std::exp(rng.normal());
    return s;
  };

  Recorder entropy(suite, "entropy_permutation_invariant_and_maximal_at_constant");
  for (int n = 0; n < 200; ++n) {
    const std::size_t len = 2 + rng.below(30);
    std::vector<double> s = random_scores(len);
    const double h = score_entropy(s);
    std::vector<double> shuffled(len);
    const auto perm = seeded_permutation(len, rng.below(1u << 30));
    for (std::size_t i = 0; i < len; ++i) shuffled[i] = s[perm[i]];
    entropy.check(std::abs(score_entropy(shuffled) - h) <= 1e-12, [&] { return "permutation"; });
    const std::vector<double> flat(len, 0.5 + rng.uniform());
    entropy.check(score_entropy(flat) >= h - 1e-12, [&] { return "constant is not maximal"; });
  }
  out.push_back(std::move(entropy).done());

  Recorder skew(suite, "skewness_translation_scale_negation");
  for (int n = 0; n < 200; ++n) {
    const std::vector<double> s = random_scores(3 + rng.below(30));
    const double base = score_skewness(s);
    const double shift = 10.0 * rng.uniform();
    const double scale = 0.1 + 10.0 * rng.uniform();
    std::vector<double> moved(s), scaled(s), negated(s);
    for (double& x : moved) x += shift;
    for (double& x : scaled) x *= scale;
    for (double& x : negated) x = -x;
    const double tol = 1e-9 * std::max(1.0, std::abs(base));
    skew.check(std::abs(score_skewness(moved) - base) <= tol, [&] { return "translation"; });
    skew.check(std::abs(score_skewness(scaled) - base) <= tol, [&] { return "scale"; });
    skew.check(std::abs(score_skewness(negated) + base) <= tol, [&] { return "negation"; });
  }
  out.push_back(std::move(skew).done());

  Recorder demand(suite, "demand_gradient_monotone_in_weights");
  int tested = 0;
  while (tested < 200) {
    const std::vector<double> s = random_scores(3 + rng.below(30));
    if (!(score_entropy(s) > 0.0 && score_skewness(s) > 0.0)) continue;
    ++tested;
    TaxationParams p{1.0, 1.0, 0.1 + 0.8 * rng.uniform(), 0.1 + 0.8 * rng.uniform(), 1};
    const double base = demand_gradient(s, p).zeta;
    TaxationParams more_e = p, more_s = p;
    more_e.a_e += 0.1;
    more_s.a_s += 0.1;
    demand.check(demand_gradient(s, more_e).zeta > base, [&] { return "a_e"; });
    demand.check(demand_gradient(s, more_s).zeta < base, [&] { return "a_s"; });
  }
  out.push_back(std::move(demand).done());
  return out;
}

std::vector<PropertyResult> rerank_properties(std::uint64_t seed) {
  const std::string suite = "rerank";
  std::vector<PropertyResult> out;
  Rng rng(seed + 2);

  Recorder law(suite, "law_of_demand");
  for (int n = 0; n < 100; ++n) {
    const std::size_t k = 1 + rng.below(3);
    const ScoreDataset ds = random_tiny_dataset(rng, 10, 12, 4, k);
    double top = 0.0;
    for (const auto& row : ds.scores) top = std::max(top, *std::max_element(row.begin(), row.end()));
    std::vector<double> prices(ds.num_groups());
    for (double& p : prices) p = top * rng.uniform();
    for (GroupIndex g = 0; g < ds.num_groups(); ++g) {
      std::vector<double> grid = prices;
      std::size_t previous = static_cast<std::size_t>(-1);
      for (int step = 0; step <= 10; ++step) {
        grid[g] = -top + 0.3 * top * step;
        const std::size_t count = demand_response(ds, grid, k)[g];
        law.check(count <= previous, [&] { return "instance " + std::to_string(n) + " group " + std::to_string(g); });
        previous = count;
      }
    }
  }
  out.push_back(std::move(law).done());

  Recorder supply(suite, "penalty_increase_reduces_group_share");
  for (int n = 0; n < 100; ++n) {
    const std::size_t k = 1 + rng.below(3);
    const ScoreDataset ds = random_tiny_dataset(rng, 6, 12, 4, k);
    TaxationParams p{0.5 + 2.0 * rng.uniform(), -1.0 + 4.0 * rng.uniform(), 1.0, 0.1, k};
    if (std::abs(p.beta) < 0.01) p.beta = 0.5;
    RerankSession session(ds, p, ManifoldRankPolicy{});
    while (!session.done()) {
      const UserIndex user = session.arrival_order()[session.cursor()];
      const std::vector<double> base = session.group_penalty(user);
      for (GroupIndex g = 0; g < ds.num_groups(); ++g) {
        std::size_t previous = static_cast<std::size_t>(-1);
        for (int step = 0; step <= 10; ++step) {
          std::vector<double> penalty = base;
          penalty[g] += 0.5 * step;
          const auto items = select_top_k(ds.scores[user], ds.candidates[user], ds.group_of, penalty, k);
          const auto count = static_cast<std::size_t>(
              std::count_if(items.begin(), items.end(), [&](ItemIndex i) { return ds.group_of[i] == g; }));
          supply.check(count <= previous, [&] { return "instance " + std::to_string(n); });
          previous = count;
        }
      }
      session.step();
    }
  }
  out.push_back(std::move(supply).done());

  Recorder zero(suite, "zero_gradient_equals_top_k");
  Recorder conserve(suite, "utility_conservation");
  Recorder determinism(suite, "determinism");
  for (int n = 0; n < 50; ++n) {
    const std::size_t k = 1 + rng.below(3);
    const ScoreDataset ds = random_tiny_dataset(rng, 10, 12, 4, k);
    RerankSession manifold(ds, {1.0, 1.0, 1.0, 1.0, k}, ManifoldRankPolicy{});
    RerankSession plain(ds, {1.0, 1.0, 1.0, 1.0, k}, TopKPolicy{});
    zero.check(run_session(manifold) == run_session(plain), [&] { return "instance " + std::to_string(n); });

    TaxationParams p{0.5 + 2.0 * rng.uniform(), 0.5 + 2.0 * rng.uniform(), 1.0, 0.1, k};
    SessionOptions options;
    options.shuffle_arrivals = true;
    options.seed = rng.below(1u << 30);
    RerankSession first(ds, p, ManifoldRankPolicy{}, options);
    RerankSession second(ds, p, ManifoldRankPolicy{}, options);
    const auto lists = run_session(first);
    determinism.check(lists == run_session(second) && first.state().accumulated() == second.state().accumulated(),
                      [&] { return "instance " + std::to_string(n); });

    std::vector<double> v(ds.num_groups(), 1.0);
    for (const auto& list : lists) {
      for (ItemIndex i : list.items) v[ds.group_of[i]] += ds.scores[list.user][i];
    }
    for (double& x : v) x -= 1.0;
    conserve.check(v == first.state().accumulated(), [&] { return "instance " + std::to_string(n); });
  }
  out.push_back(std::move(zero).done());
  out.push_back(std::move(conserve).done());
  out.push_back(std::move(determinism).done());

  Recorder dominance(suite, "oracle_dominates_policies");
  for (int n = 0; n < 50; ++n) {
    const std::size_t k = 1 + rng.below(2);
    const ScoreDataset ds = random_tiny_dataset(rng, 5, 6, 3, k);
    const TaxationParams p{0.5, 2.0, 1.0, 0.1, k};
    try {
      const WelfareOptimum best = welfare_oracle(ds, p);
      for (const Policy& policy : {Policy{ManifoldRankPolicy{}}, Policy{TopKPolicy{}},
                                   Policy{MinRegularizerPolicy{0.1}}}) {
        RerankSession session(ds, p, policy);
        const double w = welfare_objective(ds, run_session(session), p);
        dominance.check(best.welfare >= w - 1e-9 * std::max(1.0, std::abs(w)), [&] {
          return "instance " + std::to_string(n) + " " + policy_name(policy);
        });
      }
    } catch (const Error& e) {
      dominance.fail(error_text(e));
    }
  }
  out.push_back(std::move(dominance).done());
  return out;
}

std::vector<PropertyResult> all_properties(std::uint64_t seed) {
  std::vector<PropertyResult> out = fairness_properties(seed);
  for (auto& r : gradient_properties(seed)) out.push_back(std::move(r));
  for (auto& r : rerank_properties(seed)) out.push_back(std::move(r));
  return out;
}

}  // namespace manifoldrank
