#include "matchrank/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace matchrank {

namespace {

// Compensated accumulator so reduction order cannot leak into reported means.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

namespace detail {

double simulate_one_sample(const Market& market, const RankingSampler& sampler,
                           const PriorityIndex& priority,
                           const std::vector<double>& exam_candidate,
                           const std::vector<double>& exam_employer, RngStream sample_stream,
                           std::vector<double>* per_candidate, std::vector<double>* per_employer,
                           std::vector<std::uint8_t>* apply_events,
                           std::vector<std::uint8_t>* match_events) {
  const std::size_t C = market.num_candidates();
  const std::size_t J = market.num_employers();

  // Candidates act: sample a ranking, then apply independently per position.
  std::vector<std::uint8_t> applied(C * J, 0);
  for (std::size_t c = 0; c < C; ++c) {
    RngStream rng = sample_stream.fork(c);
    const DeterministicRanking& ranking = sampler.sample(c, rng);
    for (std::size_t j = 0; j < J; ++j) {
      const double p = market.phi()(c, j) * exam_candidate[ranking.position_of[j]];
      if (rng.next_bernoulli(p)) applied[c * J + j] = 1;
    }
  }
  if (apply_events) *apply_events = applied;

  // Employers act: walk the priority list so the k-th applicant seen sits at
  // realized rank k, reply with psi * v_employer(rank).
  double matches = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    RngStream rng = sample_stream.fork(C + j);
    std::size_t realized_rank = 0;
    for (const std::size_t c : priority.order[j]) {
      if (!applied[c * J + j]) continue;
      const double p = market.psi()(j, c) * exam_employer[realized_rank];
      ++realized_rank;
      if (rng.next_bernoulli(p)) {
        matches += 1.0;
        if (per_candidate) (*per_candidate)[c] += 1.0;
        if (per_employer) (*per_employer)[j] += 1.0;
        if (match_events) (*match_events)[c * J + j] = 1;
      }
    }
  }
  return matches;
}

}  // namespace detail

SimulationResult simulate_market(const Market& market, const Policy& policy,
                                 const SimulationConfig& config) {
  if (policy.num_candidates() != market.num_candidates() ||
      policy.num_employers() != market.num_employers())
    throw std::invalid_argument("simulate_market: market and policy dimensions do not match");
  if (config.num_samples == 0 || config.num_runs == 0)
    throw std::invalid_argument("simulate_market: sample and run counts must be positive");

  const std::size_t C = market.num_candidates();
  const std::size_t J = market.num_employers();
  const RankingSampler sampler(policy);
  const PriorityIndex priority = build_priority_index(market);
  const std::vector<double> vc = exam_vector(market.exam_candidate(), J);
  const std::vector<double> ve = exam_vector(market.exam_employer(), C);

  const RngStream master(config.seed);
  SimulationResult result;
  result.run_means.resize(config.num_runs);
  std::vector<KahanSum> cand_totals(C), emp_totals(J);

  for (std::size_t run = 0; run < config.num_runs; ++run) {
    const RngStream run_stream = master.fork(run);
    KahanSum run_total;
    std::vector<double> cand(C, 0.0), emp(J, 0.0);
    for (std::size_t s = 0; s < config.num_samples; ++s) {
      run_total.add(detail::simulate_one_sample(market, sampler, priority, vc, ve,
                                                run_stream.fork(s), &cand, &emp, nullptr,
                                                nullptr));
    }
    result.run_means[run] = run_total.sum / static_cast<double>(config.num_samples);
    for (std::size_t c = 0; c < C; ++c) cand_totals[c].add(cand[c]);
    for (std::size_t j = 0; j < J; ++j) emp_totals[j].add(emp[j]);
  }

  KahanSum mean;
  for (double m : result.run_means) mean.add(m);
  result.mean_matches = mean.sum / static_cast<double>(config.num_runs);

  if (config.num_runs > 1) {
    double ss = 0.0;
    for (double m : result.run_means) {
      const double d = m - result.mean_matches;
      ss += d * d;
    }
    const double var = ss / static_cast<double>(config.num_runs - 1);
    result.stderr_of_mean = std::sqrt(var / static_cast<double>(config.num_runs));
  }

  const double draws = static_cast<double>(config.num_runs * config.num_samples);
  result.per_candidate_means.resize(C);
  result.per_employer_means.resize(J);
  for (std::size_t c = 0; c < C; ++c) result.per_candidate_means[c] = cand_totals[c].sum / draws;
  for (std::size_t j = 0; j < J; ++j) result.per_employer_means[j] = emp_totals[j].sum / draws;
  return result;
}

McCheckReport mc_vs_exact_check(const Market& market, const Policy& policy,
                                const SimulationConfig& config) {
  const SimulationResult sim = simulate_market(market, policy, config);
  McCheckReport report;
  report.mc_mean = sim.mean_matches;
  report.mc_stderr = sim.stderr_of_mean;
  report.sw_exact = social_welfare_exact(market, policy);
  const double diff = report.mc_mean - report.sw_exact;
  if (report.mc_stderr > 0.0)
    report.z_score = diff / report.mc_stderr;
  else
    report.z_score = std::abs(diff) < 1e-12 ? 0.0 : std::copysign(HUGE_VAL, diff);
  report.within_three_sigma = std::abs(report.z_score) <= 3.0;
  return report;
}

std::string simulation_result_to_json_string(const SimulationResult& result) {
  nlohmann::json j{{"mean_matches", result.mean_matches},
                   {"stderr", result.stderr_of_mean},
                   {"run_means", result.run_means},
                   {"per_candidate_means", result.per_candidate_means},
                   {"per_employer_means", result.per_employer_means}};
  return j.dump(2) + "\n";
}

std::string simulation_result_to_csv_row(const std::string& name,
                                         const SimulationResult& result) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g\n", name.c_str(), result.mean_matches,
                result.stderr_of_mean);
  return buf;
}

}  // namespace matchrank
