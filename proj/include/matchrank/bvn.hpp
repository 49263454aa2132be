#pragma once

#include <vector>

#include "matchrank/matrix.hpp"
#include "matchrank/policy.hpp"
#include "matchrank/rng.hpp"

namespace matchrank {

struct BvnTerm {
  double weight;  // in (0, 1]
  DeterministicRanking ranking;
};

// Convex combination of permutations realizing a doubly stochastic matrix.
struct BvnDecomposition {
  std::size_t size = 0;  // matrix dimension
  std::vector<BvnTerm> terms;

  double total_weight() const;
  Matrix reconstruct() const;
};

// Greedy Birkhoff decomposition: repeatedly find a perfect matching on the
// positive support, peel off the minimum matched entry, stop once the residual
// mass per row drops below 1e-9. Yields at most (n-1)^2 + 1 terms. Inputs are
// accepted within the doubly stochastic tolerance and renormalized by one
// Sinkhorn sweep first; throws NumericalError if the support has no perfect
// matching while residual mass remains (i.e. the input was not doubly
// stochastic).
BvnDecomposition bvn_decompose(const Matrix& matrix);

// Decomposes every candidate matrix once so repeated sampling is cheap.
class RankingSampler {
 public:
  explicit RankingSampler(const Policy& policy);

  const DeterministicRanking& sample(std::size_t candidate, RngStream& rng) const;
  const BvnDecomposition& decomposition(std::size_t candidate) const {
    return decompositions_[candidate];
  }

 private:
  std::vector<BvnDecomposition> decompositions_;
  std::vector<std::vector<double>> cumulative_;
};

// Convenience wrapper that decomposes the candidate's matrix per call; use
// RankingSampler when sampling more than once.
DeterministicRanking sample_ranking(const Policy& policy, std::size_t candidate,
                                    RngStream& rng);

}  // namespace matchrank
