#pragma once

#include <string>
#include <vector>

#include "matchrank/market.hpp"
#include "matchrank/matrix.hpp"

namespace matchrank {

// Tolerance for the doubly stochastic check (row/column sums and entry range).
inline constexpr double kDoublyStochasticTol = 1e-6;

bool is_doubly_stochastic(const Matrix& m, double tol = kDoublyStochasticTol);

// A full ranking: employer_at[k] is the employer shown at position k (0-based),
// position_of is its inverse.
struct DeterministicRanking {
  std::vector<std::size_t> employer_at;
  std::vector<std::size_t> position_of;

  static DeterministicRanking from_order(std::vector<std::size_t> employer_at);
  std::size_t size() const { return employer_at.size(); }

  bool operator==(const DeterministicRanking&) const = default;
};

// Stochastic ranking policy: one doubly stochastic |J| x |J| matrix per
// candidate, entry (j, k) = P(employer j shown at rank k+1). Matrices are
// validated at construction; entries within tolerance outside [0,1] are
// clamped. Immutable afterwards.
class Policy {
 public:
  explicit Policy(std::vector<Matrix> matrices);

  static Policy from_rankings(const std::vector<std::vector<std::size_t>>& rankings);

  std::size_t num_candidates() const { return matrices_.size(); }
  std::size_t num_employers() const { return matrices_.front().rows(); }
  const Matrix& matrix(std::size_t c) const { return matrices_[c]; }
  const std::vector<Matrix>& matrices() const { return matrices_; }

 private:
  std::vector<Matrix> matrices_;
};

// Uniform policy 11^T / |J| for every candidate (the optimizer start point).
Policy uniform_policy(std::size_t num_candidates, std::size_t num_employers);

// Deterministic sort of 0..n-1 by descending score, ties by ascending index.
std::vector<std::size_t> order_by_score_desc(const std::vector<double>& scores);

// Ranks each candidate's employers by descending phi(c, .).
Policy naive_policy(const Market& market);

// Ranks by the product phi(c, j) * psi(j, c).
Policy reciprocal_policy(const Market& market);

Policy load_policy(const std::string& path);
void save_policy(const Policy& policy, const std::string& path);
std::string policy_to_json_string(const Policy& policy);
Policy policy_from_json_string(const std::string& text);

}  // namespace matchrank
