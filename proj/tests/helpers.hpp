#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "matchrank/market.hpp"
#include "matchrank/matrix.hpp"
#include "matchrank/optimize.hpp"
#include "matchrank/policy.hpp"
#include "matchrank/rng.hpp"

namespace testutil {

using namespace matchrank;

inline Market random_market(RngStream& rng, std::size_t num_candidates,
                            std::size_t num_employers,
                            ExaminationModel exam_c = ExaminationModel::inverse_rank(),
                            ExaminationModel exam_e = ExaminationModel::inverse_rank()) {
  Matrix phi(num_candidates, num_employers);
  for (double& x : phi.data()) x = rng.next_double();
  Matrix psi(num_employers, num_candidates);
  for (double& x : psi.data()) x = rng.next_double();
  return Market(std::move(phi), std::move(psi), std::move(exam_c), std::move(exam_e));
}

// Random doubly stochastic matrices via Sinkhorn on positive uniforms.
inline Matrix random_ds_matrix(RngStream& rng, std::size_t n) {
  Matrix m(n, n);
  for (double& x : m.data()) x = 0.1 + rng.next_double();
  SinkhornResult r = sinkhorn_project(m, 1e-10, 20000);
  return r.matrix;
}

inline Policy random_ds_policy(RngStream& rng, std::size_t num_candidates,
                               std::size_t num_employers) {
  std::vector<Matrix> ms;
  ms.reserve(num_candidates);
  for (std::size_t c = 0; c < num_candidates; ++c)
    ms.push_back(random_ds_matrix(rng, num_employers));
  return Policy(std::move(ms));
}

// Straight-line re-implementation of the welfare lower bound on raw matrices
// (no policy validation), kept independent of the library evaluation path; the
// gradient finite-difference oracle differentiates this.
inline double lb_reference(const Market& market, const std::vector<Matrix>& ms) {
  const std::size_t C = market.num_candidates();
  const std::size_t J = market.num_employers();
  const std::vector<double> v = exam_vector(market.exam_candidate(), J);
  double total = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t j = 0; j < J; ++j) {
      double crowd = 0.0;
      for (std::size_t o = 0; o < C; ++o) {
        const bool higher = market.psi()(j, o) > market.psi()(j, c) ||
                            (market.psi()(j, o) == market.psi()(j, c) && o < c);
        if (o == c || !higher) continue;
        double exposure = 0.0;
        for (std::size_t k = 0; k < J; ++k) exposure += ms[o](j, k) * v[k];
        crowd += market.phi()(o, j) * exposure;
      }
      double own = 0.0;
      for (std::size_t k = 0; k < J; ++k) own += ms[c](j, k) * v[k];
      total += market.phi()(c, j) * market.psi()(j, c) *
               market.exam_employer().at_real(1.0 + crowd) * own;
    }
  }
  return total;
}

// Exhaustive subset enumeration of the Poisson-Binomial PMF, usable up to
// ~20 parameters.
inline std::vector<double> pb_pmf_bruteforce(const std::vector<double>& probs) {
  const std::size_t n = probs.size();
  std::vector<double> pmf(n + 1, 0.0);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double p = 1.0;
    std::size_t successes = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) {
        p *= probs[i];
        ++successes;
      } else {
        p *= 1.0 - probs[i];
      }
    }
    pmf[successes] += p;
  }
  return pmf;
}

inline std::vector<std::vector<std::size_t>> all_permutations(std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<std::size_t>> out;
  do {
    out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

}  // namespace testutil
