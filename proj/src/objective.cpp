#include "matchrank/objective.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace matchrank {

namespace {

void check_dimensions(const Market& market, const Policy& policy) {
  if (policy.num_candidates() != market.num_candidates() ||
      policy.num_employers() != market.num_employers())
    throw std::invalid_argument("market and policy dimensions do not match");
}

void require_convex(const Market& market, const char* op) {
  if (!market.exam_candidate().is_convex() || !market.exam_employer().is_convex())
    throw std::invalid_argument(std::string(op) + ": requires convex examination models");
}

// (M_c v)_j for every candidate and employer: the examination mass policy pi
// puts on employer j for candidate c.
Matrix exposure_matrix(const Market& market, const Policy& policy) {
  const std::size_t C = market.num_candidates();
  const std::size_t J = market.num_employers();
  const std::vector<double> v = exam_vector(market.exam_candidate(), J);
  Matrix t(C, J);
  for (std::size_t c = 0; c < C; ++c) {
    const Matrix& m = policy.matrix(c);
    for (std::size_t j = 0; j < J; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < J; ++k) s += m(j, k) * v[k];
      t(c, j) = s;
    }
  }
  return t;
}

}  // namespace

PriorityIndex build_priority_index(const Market& market) {
  const std::size_t C = market.num_candidates();
  const std::size_t J = market.num_employers();
  PriorityIndex index;
  index.order.resize(J);
  index.rank.assign(J, std::vector<std::size_t>(C));
  for (std::size_t j = 0; j < J; ++j) {
    std::vector<double> scores(C);
    for (std::size_t c = 0; c < C; ++c) scores[c] = market.psi()(j, c);
    index.order[j] = order_by_score_desc(scores);
    for (std::size_t pos = 0; pos < C; ++pos) index.rank[j][index.order[j][pos]] = pos;
  }
  return index;
}

ApplyMatrix apply_probabilities(const Market& market, const Policy& policy) {
  check_dimensions(market, policy);
  Matrix apply = exposure_matrix(market, policy);
  for (std::size_t c = 0; c < market.num_candidates(); ++c)
    for (std::size_t j = 0; j < market.num_employers(); ++j)
      apply(c, j) *= market.phi()(c, j);
  return apply;
}

std::vector<double> poisson_binomial_pmf(std::span<const double> probs) {
  std::vector<double> pmf{1.0};
  pmf.reserve(probs.size() + 1);
  for (const double p : probs) {
    pmf.push_back(0.0);
    for (std::size_t k = pmf.size() - 1; k > 0; --k)
      pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p;
    pmf[0] *= 1.0 - p;
  }
  return pmf;
}

double RankDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) m += static_cast<double>(i + 1) * pmf[i];
  return m;
}

RankDistribution rank_distribution(const Market& market, const ApplyMatrix& apply,
                                   const PriorityIndex& priority, std::size_t j,
                                   std::size_t c) {
  if (apply.rows() != market.num_candidates() || apply.cols() != market.num_employers())
    throw std::invalid_argument("rank_distribution: apply matrix shape mismatch");
  const std::size_t pos = priority.rank[j][c];
  std::vector<double> params;
  params.reserve(pos);
  for (std::size_t s = 0; s < pos; ++s) params.push_back(apply(priority.order[j][s], j));
  return RankDistribution{poisson_binomial_pmf(params)};
}

double reply_probability(const Market& market, const RankDistribution& rank_dist,
                         std::size_t j, std::size_t c) {
  double expected_exam = 0.0;
  for (std::size_t i = 0; i < rank_dist.pmf.size(); ++i)
    expected_exam += rank_dist.pmf[i] * market.exam_employer().at_rank(i + 1);
  return market.psi()(j, c) * expected_exam;
}

Matrix match_probabilities(const Market& market, const Policy& policy) {
  check_dimensions(market, policy);
  const std::size_t C = market.num_candidates();
  const std::size_t J = market.num_employers();
  const ApplyMatrix apply = apply_probabilities(market, policy);
  const PriorityIndex priority = build_priority_index(market);
  const std::vector<double> ve = exam_vector(market.exam_employer(), C);

  Matrix match(C, J);
  std::vector<double> pmf;
  for (std::size_t j = 0; j < J; ++j) {
    // Walk j's priority list extending the applicant-count law one candidate
    // at a time; the law seen by candidate t covers exactly its priority set.
    pmf.assign(1, 1.0);
    for (std::size_t t = 0; t < C; ++t) {
      const std::size_t c = priority.order[j][t];
      double expected_exam = 0.0;
      for (std::size_t x = 0; x < pmf.size(); ++x) expected_exam += pmf[x] * ve[x];
      match(c, j) = apply(c, j) * market.psi()(j, c) * expected_exam;

      const double p = apply(c, j);
      pmf.push_back(0.0);
      for (std::size_t k = pmf.size() - 1; k > 0; --k)
        pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p;
      pmf[0] *= 1.0 - p;
    }
  }
  return match;
}

double candidate_utility(const Market& market, const Policy& policy, std::size_t c) {
  const Matrix match = match_probabilities(market, policy);
  return match.row_sum(c);
}

double employer_utility(const Market& market, const Policy& policy, std::size_t j) {
  const Matrix match = match_probabilities(market, policy);
  return match.col_sum(j);
}

double social_welfare_exact(const Market& market, const Policy& policy) {
  const Matrix match = match_probabilities(market, policy);
  double sw = 0.0;
  for (double x : match.data()) sw += x;
  return sw;
}

double social_welfare_lower_bound(const Market& market, const Policy& policy) {
  check_dimensions(market, policy);
  require_convex(market, "social_welfare_lower_bound");
  const std::size_t C = market.num_candidates();
  const std::size_t J = market.num_employers();
  const Matrix t = exposure_matrix(market, policy);
  const PriorityIndex priority = build_priority_index(market);

  double lower = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    double expected_above = 0.0;  // expected applicants ranked above the current candidate
    for (std::size_t pos = 0; pos < C; ++pos) {
      const std::size_t c = priority.order[j][pos];
      lower += market.phi()(c, j) * market.psi()(j, c) *
               market.exam_employer().at_real(1.0 + expected_above) * t(c, j);
      expected_above += market.phi()(c, j) * t(c, j);
    }
  }
  return lower;
}

std::vector<Matrix> lower_bound_gradient(const Market& market, const Policy& policy) {
  check_dimensions(market, policy);
  require_convex(market, "lower_bound_gradient");
  const std::size_t C = market.num_candidates();
  const std::size_t J = market.num_employers();
  const std::vector<double> v = exam_vector(market.exam_candidate(), J);
  const Matrix t = exposure_matrix(market, policy);
  const PriorityIndex priority = build_priority_index(market);

  // d(lower)/dM_c(j,k) = w(c,j) * v[k] with a direct and a crowding part.
  Matrix w(C, J);
  std::vector<double> expected_above(C);
  for (std::size_t j = 0; j < J; ++j) {
    double acc = 0.0;
    for (std::size_t pos = 0; pos < C; ++pos) {
      const std::size_t c = priority.order[j][pos];
      expected_above[pos] = acc;
      acc += market.phi()(c, j) * t(c, j);
    }
    // Crowding: raising c's exposure to j lowers the examination every
    // lower-priority candidate receives; sweep the list backwards.
    double suffix = 0.0;
    for (std::size_t pos = C; pos-- > 0;) {
      const std::size_t c = priority.order[j][pos];
      const double phi_cj = market.phi()(c, j);
      const double psi_jc = market.psi()(j, c);
      w(c, j) = phi_cj * psi_jc * market.exam_employer().at_real(1.0 + expected_above[pos]) +
                phi_cj * suffix;
      suffix += phi_cj * psi_jc *
                market.exam_employer().derivative_at(1.0 + expected_above[pos]) * t(c, j);
    }
  }

  std::vector<Matrix> grad;
  grad.reserve(C);
  for (std::size_t c = 0; c < C; ++c) {
    Matrix g(J, J);
    for (std::size_t j = 0; j < J; ++j)
      for (std::size_t k = 0; k < J; ++k) g(j, k) = w(c, j) * v[k];
    grad.push_back(std::move(g));
  }
  return grad;
}

EvaluationReport evaluate_policy(const Market& market, const Policy& policy) {
  const Matrix match = match_probabilities(market, policy);
  EvaluationReport report;
  report.candidate_utilities.resize(market.num_candidates());
  report.employer_utilities.resize(market.num_employers());
  for (std::size_t c = 0; c < market.num_candidates(); ++c)
    report.candidate_utilities[c] = match.row_sum(c);
  for (std::size_t j = 0; j < market.num_employers(); ++j)
    report.employer_utilities[j] = match.col_sum(j);
  for (double u : report.candidate_utilities) report.sw_exact += u;
  if (market.exam_candidate().is_convex() && market.exam_employer().is_convex())
    report.sw_lower_bound = social_welfare_lower_bound(market, policy);
  return report;
}

std::string evaluation_report_to_json_string(const EvaluationReport& report) {
  nlohmann::json j{{"sw_exact", report.sw_exact},
                   {"candidate_utilities", report.candidate_utilities},
                   {"employer_utilities", report.employer_utilities}};
  if (report.sw_lower_bound)
    j["sw_lower_bound"] = *report.sw_lower_bound;
  else
    j["sw_lower_bound"] = nullptr;
  return j.dump(2) + "\n";
}

}  // namespace matchrank
