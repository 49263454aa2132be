#include "matchrank/bvn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "matchrank/errors.hpp"

namespace matchrank {

namespace {

constexpr double kSupportEps = 1e-12;   // entries below this count as zero
constexpr double kResidualEps = 1e-9;   // stop once each row holds less mass

// Kuhn's augmenting-path bipartite matching on the support of m.
// match_col[k] = row matched to column k, or npos. Deterministic: rows and
// columns are scanned in ascending order.
class SupportMatcher {
 public:
  explicit SupportMatcher(const Matrix& m) : m_(m), n_(m.rows()) {}

  bool find_perfect_matching(std::vector<std::size_t>& match_col) {
    constexpr auto npos = std::numeric_limits<std::size_t>::max();
    match_col.assign(n_, npos);
    for (std::size_t row = 0; row < n_; ++row) {
      seen_.assign(n_, false);
      if (!augment(row, match_col)) return false;
    }
    return true;
  }

 private:
  bool augment(std::size_t row, std::vector<std::size_t>& match_col) {
    constexpr auto npos = std::numeric_limits<std::size_t>::max();
    for (std::size_t col = 0; col < n_; ++col) {
      if (seen_[col] || m_(row, col) <= kSupportEps) continue;
      seen_[col] = true;
      if (match_col[col] == npos || augment(match_col[col], match_col)) {
        match_col[col] = row;
        return true;
      }
    }
    return false;
  }

  const Matrix& m_;
  std::size_t n_;
  std::vector<char> seen_;
};

double max_row_mass(const Matrix& m) {
  double mass = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) mass = std::max(mass, m.row_sum(r));
  return mass;
}

}  // namespace

double BvnDecomposition::total_weight() const {
  double s = 0.0;
  for (const BvnTerm& t : terms) s += t.weight;
  return s;
}

Matrix BvnDecomposition::reconstruct() const {
  Matrix m(size, size);
  for (const BvnTerm& t : terms)
    for (std::size_t k = 0; k < size; ++k) m(t.ranking.employer_at[k], k) += t.weight;
  return m;
}

BvnDecomposition bvn_decompose(const Matrix& matrix) {
  if (!is_doubly_stochastic(matrix))
    throw std::invalid_argument("bvn_decompose: input is not doubly stochastic within tolerance");
  const std::size_t n = matrix.rows();

  // Sinkhorn sweeps repair float drift carried in by optimizer outputs. The
  // extraction below drains every row uniformly, so any leftover row-sum
  // spread survives to the end and has to sit below the residual threshold;
  // scale until sums are tight, not just once.
  constexpr double kRepairEps = 1e-10;
  Matrix residual = matrix;
  for (std::size_t sweep = 0; sweep < 500; ++sweep) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(residual.row_sum(i) - 1.0));
      worst = std::max(worst, std::abs(residual.col_sum(i) - 1.0));
    }
    if (worst <= kRepairEps) break;
    for (std::size_t r = 0; r < n; ++r) {
      const double s = residual.row_sum(r);
      for (std::size_t c = 0; c < n; ++c) residual(r, c) /= s;
    }
    for (std::size_t c = 0; c < n; ++c) {
      const double s = residual.col_sum(c);
      for (std::size_t r = 0; r < n; ++r) residual(r, c) /= s;
    }
  }

  BvnDecomposition result;
  result.size = n;
  SupportMatcher matcher(residual);
  std::vector<std::size_t> match_col;

  while (max_row_mass(residual) > kResidualEps) {
    if (!matcher.find_perfect_matching(match_col))
      throw NumericalError(
          "bvn_decompose: no perfect matching on the positive support; "
          "input is not doubly stochastic");

    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t col = 0; col < n; ++col)
      theta = std::min(theta, residual(match_col[col], col));

    std::vector<std::size_t> employer_at(n);
    for (std::size_t col = 0; col < n; ++col) employer_at[col] = match_col[col];
    result.terms.push_back({theta, DeterministicRanking::from_order(std::move(employer_at))});

    for (std::size_t col = 0; col < n; ++col) {
      double& e = residual(match_col[col], col);
      e -= theta;
      if (e <= kSupportEps) e = 0.0;  // guarantees support shrinks every round
    }
  }
  return result;
}

RankingSampler::RankingSampler(const Policy& policy) {
  decompositions_.reserve(policy.num_candidates());
  cumulative_.reserve(policy.num_candidates());
  for (std::size_t c = 0; c < policy.num_candidates(); ++c) {
    decompositions_.push_back(bvn_decompose(policy.matrix(c)));
    const auto& terms = decompositions_.back().terms;
    std::vector<double> cum(terms.size());
    double total = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      total += terms[i].weight;
      cum[i] = total;
    }
    for (double& x : cum) x /= total;
    cumulative_.push_back(std::move(cum));
  }
}

const DeterministicRanking& RankingSampler::sample(std::size_t candidate,
                                                   RngStream& rng) const {
  const auto& cum = cumulative_[candidate];
  const double u = rng.next_double();
  const auto it = std::lower_bound(cum.begin(), cum.end(), u);
  const std::size_t idx = std::min<std::size_t>(it - cum.begin(), cum.size() - 1);
  return decompositions_[candidate].terms[idx].ranking;
}

DeterministicRanking sample_ranking(const Policy& policy, std::size_t candidate,
                                    RngStream& rng) {
  const BvnDecomposition d = bvn_decompose(policy.matrix(candidate));
  std::vector<double> cum(d.terms.size());
  double total = 0.0;
  for (std::size_t i = 0; i < d.terms.size(); ++i) {
    total += d.terms[i].weight;
    cum[i] = total;
  }
  const double u = rng.next_double() * total;
  const auto it = std::lower_bound(cum.begin(), cum.end(), u);
  const std::size_t idx = std::min<std::size_t>(it - cum.begin(), cum.size() - 1);
  return d.terms[idx].ranking;
}

}  // namespace matchrank
