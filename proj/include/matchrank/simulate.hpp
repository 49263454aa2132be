#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "matchrank/bvn.hpp"
#include "matchrank/market.hpp"
#include "matchrank/objective.hpp"
#include "matchrank/policy.hpp"
#include "matchrank/rng.hpp"

namespace matchrank {

struct SimulationConfig {
  std::size_t num_samples = 10000;
  std::size_t num_runs = 10;
  std::uint64_t seed = 0;
};

struct SimulationResult {
  double mean_matches = 0.0;    // average of the per-run means
  double stderr_of_mean = 0.0;  // sample stderr across runs (0 for a single run)
  std::vector<double> per_candidate_means;
  std::vector<double> per_employer_means;
  std::vector<double> run_means;
};

// Monte-Carlo rollout of the full interaction: sample one ranking per
// candidate, draw position-based applications, let each employer rank its
// realized applicants by psi and draw position-based replies, count matches.
//
// Streams split hierarchically: run r forks tag r off the master seed, sample
// s forks tag s off the run, candidate c uses tag c (ranking + applications)
// and employer j uses tag |C|+j (replies) off the sample.
SimulationResult simulate_market(const Market& market, const Policy& policy,
                                 const SimulationConfig& config);

struct McCheckReport {
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  double sw_exact = 0.0;
  double z_score = 0.0;
  bool within_three_sigma = false;
};

// Cross-validates the Monte-Carlo estimate against the exact evaluator; a
// failed check is reported, not thrown.
McCheckReport mc_vs_exact_check(const Market& market, const Policy& policy,
                                const SimulationConfig& config);

std::string simulation_result_to_json_string(const SimulationResult& result);
std::string simulation_result_to_csv_row(const std::string& name,
                                         const SimulationResult& result);

namespace detail {

// One sample with optional event recording (apply[c * J + j], match likewise);
// exposed for tests of the generative process.
double simulate_one_sample(const Market& market, const RankingSampler& sampler,
                           const PriorityIndex& priority,
                           const std::vector<double>& exam_candidate,
                           const std::vector<double>& exam_employer, RngStream sample_stream,
                           std::vector<double>* per_candidate, std::vector<double>* per_employer,
                           std::vector<std::uint8_t>* apply_events,
                           std::vector<std::uint8_t>* match_events);

}  // namespace detail

}  // namespace matchrank
