#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "matchrank/market.hpp"
#include "matchrank/matrix.hpp"
#include "matchrank/policy.hpp"

namespace matchrank {

// Per-employer candidate priority: order[j] lists candidates by descending
// psi(j, .), ties by ascending index; rank[j][c] is c's 0-based position in
// order[j]. The priority set of (j, c) is the prefix of order[j] before c.
struct PriorityIndex {
  std::vector<std::vector<std::size_t>> order;
  std::vector<std::vector<std::size_t>> rank;
};

PriorityIndex build_priority_index(const Market& market);

// C x J matrix of application probabilities phi(c,j) * (M_c v)_j.
using ApplyMatrix = Matrix;

ApplyMatrix apply_probabilities(const Market& market, const Policy& policy);

// PMF of the number of successes among independent non-identical Bernoulli
// trials, by the O(n^2) convolution recurrence. pmf[k] = P(K = k).
std::vector<double> poisson_binomial_pmf(std::span<const double> probs);

// Law of a candidate's rank among the applicants of one employer:
// rank = 1 + (number of higher-priority candidates who applied).
struct RankDistribution {
  std::vector<double> pmf;  // pmf[i] = P(rank = i + 1)
  double mean() const;
};

RankDistribution rank_distribution(const Market& market, const ApplyMatrix& apply,
                                   const PriorityIndex& priority, std::size_t j,
                                   std::size_t c);

// psi(j,c) * E[v_employer(rank)] under the given rank law.
double reply_probability(const Market& market, const RankDistribution& rank_dist,
                         std::size_t j, std::size_t c);

// Expected matches per (c, j) pair: apply(c,j) * reply(j,c), computed with the
// exact Poisson-Binomial rank law. O(|J| * |C|^2).
Matrix match_probabilities(const Market& market, const Policy& policy);

double candidate_utility(const Market& market, const Policy& policy, std::size_t c);
double employer_utility(const Market& market, const Policy& policy, std::size_t j);

// Exact expected number of matches in the market.
double social_welfare_exact(const Market& market, const Policy& policy);

// Jensen lower bound on the social welfare: the employer-side examination is
// evaluated at the expected rank instead of in expectation. Requires convex
// examination models on both sides.
double social_welfare_lower_bound(const Market& market, const Policy& policy);

// Analytic gradient of the lower bound with respect to each candidate's
// matrix. Entry (j, k) of candidate c's gradient carries the direct value of
// showing j at rank k+1 plus the crowding terms through every candidate that
// ranks below c in j's priority list.
std::vector<Matrix> lower_bound_gradient(const Market& market, const Policy& policy);

struct EvaluationReport {
  double sw_exact = 0.0;
  std::optional<double> sw_lower_bound;  // absent for non-analytic exam models
  std::vector<double> candidate_utilities;
  std::vector<double> employer_utilities;
};

EvaluationReport evaluate_policy(const Market& market, const Policy& policy);
std::string evaluation_report_to_json_string(const EvaluationReport& report);

}  // namespace matchrank
