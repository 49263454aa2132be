#include "matchrank/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "matchrank/errors.hpp"

namespace matchrank {

bool is_doubly_stochastic(const Matrix& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  for (double x : m.data())
    if (!std::isfinite(x) || x < -tol || x > 1.0 + tol) return false;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (std::abs(m.row_sum(i) - 1.0) > tol) return false;
    if (std::abs(m.col_sum(i) - 1.0) > tol) return false;
  }
  return true;
}

DeterministicRanking DeterministicRanking::from_order(std::vector<std::size_t> employer_at) {
  const std::size_t n = employer_at.size();
  std::vector<std::size_t> position_of(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = employer_at[k];
    if (j >= n || position_of[j] != n)
      throw std::invalid_argument("ranking is not a permutation of the employers");
    position_of[j] = k;
  }
  return DeterministicRanking{std::move(employer_at), std::move(position_of)};
}

Policy::Policy(std::vector<Matrix> matrices) : matrices_(std::move(matrices)) {
  if (matrices_.empty()) throw std::invalid_argument("policy: no candidate matrices");
  const std::size_t n = matrices_.front().rows();
  for (Matrix& m : matrices_) {
    if (m.rows() != n || m.cols() != n)
      throw std::invalid_argument("policy: matrices must share one square shape");
    if (!is_doubly_stochastic(m))
      throw std::invalid_argument("policy: matrix is not doubly stochastic within tolerance");
    for (double& x : m.data()) x = std::min(1.0, std::max(0.0, x));
  }
}

Policy Policy::from_rankings(const std::vector<std::vector<std::size_t>>& rankings) {
  std::vector<Matrix> ms;
  ms.reserve(rankings.size());
  for (const auto& order : rankings) {
    const auto ranking = DeterministicRanking::from_order(order);
    Matrix m(order.size(), order.size());
    for (std::size_t j = 0; j < order.size(); ++j) m(j, ranking.position_of[j]) = 1.0;
    ms.push_back(std::move(m));
  }
  return Policy(std::move(ms));
}

Policy uniform_policy(std::size_t num_candidates, std::size_t num_employers) {
  if (num_candidates == 0 || num_employers == 0)
    throw std::invalid_argument("uniform_policy: empty market");
  const Matrix m(num_employers, num_employers, 1.0 / static_cast<double>(num_employers));
  return Policy(std::vector<Matrix>(num_candidates, m));
}

std::vector<std::size_t> order_by_score_desc(const std::vector<double>& scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return idx;
}

Policy naive_policy(const Market& market) {
  const std::size_t C = market.num_candidates();
  const std::size_t J = market.num_employers();
  std::vector<std::vector<std::size_t>> rankings(C);
  for (std::size_t c = 0; c < C; ++c) {
    std::vector<double> scores(J);
    for (std::size_t j = 0; j < J; ++j) scores[j] = market.phi()(c, j);
    rankings[c] = order_by_score_desc(scores);
  }
  return Policy::from_rankings(rankings);
}

Policy reciprocal_policy(const Market& market) {
  const std::size_t C = market.num_candidates();
  const std::size_t J = market.num_employers();
  std::vector<std::vector<std::size_t>> rankings(C);
  for (std::size_t c = 0; c < C; ++c) {
    std::vector<double> scores(J);
    for (std::size_t j = 0; j < J; ++j) scores[j] = market.phi()(c, j) * market.psi()(j, c);
    rankings[c] = order_by_score_desc(scores);
  }
  return Policy::from_rankings(rankings);
}

std::string policy_to_json_string(const Policy& policy) {
  using nlohmann::json;
  json matrices = json::array();
  for (const Matrix& m : policy.matrices()) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(std::move(row));
    }
    matrices.push_back(std::move(rows));
  }
  return json{{"matrices", matrices}}.dump(2) + "\n";
}

Policy policy_from_json_string(const std::string& text) {
  using nlohmann::json;
  const json j = json::parse(text);
  const json& ms = j.at("matrices");
  if (!ms.is_array() || ms.empty())
    throw std::invalid_argument("policy json: expected a non-empty matrices array");
  std::vector<Matrix> matrices;
  matrices.reserve(ms.size());
  for (const json& jm : ms) {
    const std::size_t n = jm.size();
    Matrix m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
      const json& row = jm.at(r);
      if (row.size() != n) throw std::invalid_argument("policy json: matrix is not square");
      for (std::size_t c = 0; c < n; ++c) m(r, c) = row.at(c).get<double>();
    }
    matrices.push_back(std::move(m));
  }
  return Policy(std::move(matrices));
}

Policy load_policy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open policy file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return policy_from_json_string(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed policy file " + path + ": " + e.what());
  }
}

void save_policy(const Policy& policy, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write policy file: " + path);
  out << policy_to_json_string(policy);
  if (!out) throw IoError("failed writing policy file: " + path);
}

}  // namespace matchrank
