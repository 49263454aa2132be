#include "matchrank/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "matchrank/errors.hpp"
#include "matchrank/objective.hpp"

namespace matchrank {

Histogram make_histogram(const std::vector<double>& values, double lo, double hi,
                         std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("make_histogram: bins must be >= 1");
  Histogram h;
  h.bin_lo.resize(bins);
  h.bin_hi.resize(bins);
  h.counts.assign(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    h.bin_lo[b] = lo + width * static_cast<double>(b);
    h.bin_hi[b] = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (const double x : values) {
    std::size_t b = 0;
    if (width > 0.0) {
      const double f = (x - lo) / width;
      b = f <= 0.0 ? 0 : std::min<std::size_t>(static_cast<std::size_t>(f), bins - 1);
    }
    ++h.counts[b];
  }
  return h;
}

Histogram make_histogram(const std::vector<double>& values, std::size_t bins) {
  double lo = 0.0, hi = 0.0;
  if (!values.empty()) {
    lo = *std::min_element(values.begin(), values.end());
    hi = *std::max_element(values.begin(), values.end());
  }
  return make_histogram(values, lo, hi, bins);
}

namespace {

GainReport report_from_values(std::vector<double> values) {
  GainReport report;
  report.values = std::move(values);
  std::size_t positive = 0;
  for (const double g : report.values)
    if (g > 0.0) ++positive;
  report.fraction_positive = report.values.empty()
      ? 0.0
      : static_cast<double>(positive) / static_cast<double>(report.values.size());
  report.histogram = make_histogram(report.values);
  return report;
}

// Expected crowding ahead of candidate c at employer j under the context
// policy: sum over higher-priority candidates of phi * (M v).
std::vector<double> expected_above(const Market& market, const Policy& others,
                                   const PriorityIndex& priority, std::size_t c,
                                   const std::vector<double>& vc) {
  const std::size_t J = market.num_employers();
  std::vector<double> s(J, 0.0);
  for (std::size_t j = 0; j < J; ++j) {
    const std::size_t pos = priority.rank[j][c];
    for (std::size_t p = 0; p < pos; ++p) {
      const std::size_t other = priority.order[j][p];
      const Matrix& m = others.matrix(other);
      double exposure = 0.0;
      for (std::size_t k = 0; k < J; ++k) exposure += m(j, k) * vc[k];
      s[j] += market.phi()(other, j) * exposure;
    }
  }
  return s;
}

}  // namespace

double payoff(const Market& market, const Matrix& own_matrix, const Policy& others,
              std::size_t c) {
  if (others.num_candidates() != market.num_candidates() ||
      others.num_employers() != market.num_employers())
    throw std::invalid_argument("payoff: context policy dimensions do not match market");
  if (own_matrix.rows() != market.num_employers() ||
      own_matrix.cols() != market.num_employers())
    throw std::invalid_argument("payoff: own matrix has wrong shape");
  if (!market.exam_candidate().is_convex() || !market.exam_employer().is_convex())
    throw std::invalid_argument("payoff: requires convex examination models");

  const std::size_t J = market.num_employers();
  const std::vector<double> vc = exam_vector(market.exam_candidate(), J);
  const PriorityIndex priority = build_priority_index(market);
  const std::vector<double> crowd = expected_above(market, others, priority, c, vc);

  double total = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    double exposure = 0.0;
    for (std::size_t k = 0; k < J; ++k) exposure += own_matrix(j, k) * vc[k];
    total += market.phi()(c, j) * market.psi()(j, c) *
             market.exam_employer().at_real(1.0 + crowd[j]) * exposure;
  }
  return total;
}

GainReport switch_gain(const Market& market, const Policy& policy_a, const Policy& policy_b) {
  const EvaluationReport a = evaluate_policy(market, policy_a);
  const EvaluationReport b = evaluate_policy(market, policy_b);
  std::vector<double> gains(market.num_candidates());
  for (std::size_t c = 0; c < gains.size(); ++c)
    gains[c] = b.candidate_utilities[c] - a.candidate_utilities[c];
  return report_from_values(std::move(gains));
}

GainReport adoption_gain(const Market& market, const Policy& system_policy,
                         const Policy& naive) {
  std::vector<double> gains(market.num_candidates());
  for (std::size_t c = 0; c < gains.size(); ++c)
    gains[c] = payoff(market, system_policy.matrix(c), naive, c) -
               payoff(market, naive.matrix(c), naive, c);
  return report_from_values(std::move(gains));
}

GainReport retention_gain(const Market& market, const Policy& system_policy,
                          const Policy& naive) {
  std::vector<double> gains(market.num_candidates());
  for (std::size_t c = 0; c < gains.size(); ++c)
    gains[c] = payoff(market, system_policy.matrix(c), system_policy, c) -
               payoff(market, naive.matrix(c), system_policy, c);
  return report_from_values(std::move(gains));
}

UtilityTable utility_histograms(
    const Market& market,
    const std::vector<std::pair<std::string, const Policy*>>& policies) {
  if (policies.empty()) throw std::invalid_argument("utility_histograms: no policies given");
  UtilityTable table;
  table.rows.reserve(policies.size());
  double cand_lo = std::numeric_limits<double>::infinity(), cand_hi = -cand_lo;
  double emp_lo = cand_lo, emp_hi = -cand_lo;
  for (const auto& [name, policy] : policies) {
    const EvaluationReport report = evaluate_policy(market, *policy);
    for (const double u : report.candidate_utilities) {
      cand_lo = std::min(cand_lo, u);
      cand_hi = std::max(cand_hi, u);
    }
    for (const double u : report.employer_utilities) {
      emp_lo = std::min(emp_lo, u);
      emp_hi = std::max(emp_hi, u);
    }
    table.rows.push_back({name, report.candidate_utilities, report.employer_utilities, {}, {}});
  }
  for (auto& row : table.rows) {
    row.candidate_hist = make_histogram(row.candidate_utilities, cand_lo, cand_hi);
    row.employer_hist = make_histogram(row.employer_utilities, emp_lo, emp_hi);
  }
  return table;
}

void write_gains_csv(const std::string& path,
                     const std::vector<std::pair<std::string, const GainReport*>>& reports) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write gains file: " + path);
  out << "name,candidate_index,value\n";
  char buf[128];
  for (const auto& [name, report] : reports)
    for (std::size_t c = 0; c < report->values.size(); ++c) {
      std::snprintf(buf, sizeof(buf), "%s,%zu,%.17g\n", name.c_str(), c, report->values[c]);
      out << buf;
    }
  if (!out) throw IoError("failed writing gains file: " + path);
}

void write_histogram_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, const Histogram*>>& histograms) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write histogram file: " + path);
  out << "name,bin_lo,bin_hi,count\n";
  char buf[160];
  for (const auto& [name, hist] : histograms)
    for (std::size_t b = 0; b < hist->counts.size(); ++b) {
      std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%zu\n", name.c_str(), hist->bin_lo[b],
                    hist->bin_hi[b], hist->counts[b]);
      out << buf;
    }
  if (!out) throw IoError("failed writing histogram file: " + path);
}

}  // namespace matchrank
