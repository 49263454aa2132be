#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "matchrank/exam.hpp"
#include "matchrank/matrix.hpp"

namespace matchrank {

// Immutable two-sided market instance: candidate-side relevance phi (C x J),
// employer-side relevance psi (J x C), and one examination model per side.
class Market {
 public:
  Market(Matrix phi, Matrix psi, ExaminationModel exam_candidate,
         ExaminationModel exam_employer);

  std::size_t num_candidates() const { return phi_.rows(); }
  std::size_t num_employers() const { return phi_.cols(); }

  const Matrix& phi() const { return phi_; }
  const Matrix& psi() const { return psi_; }
  const ExaminationModel& exam_candidate() const { return exam_candidate_; }
  const ExaminationModel& exam_employer() const { return exam_employer_; }

 private:
  Matrix phi_;
  Matrix psi_;
  ExaminationModel exam_candidate_;
  ExaminationModel exam_employer_;
};

enum class RelevanceStructure { Random, Similar, Reversed };

std::string structure_name(RelevanceStructure s);
RelevanceStructure structure_from_name(const std::string& name);

struct SyntheticSpec {
  std::size_t n = 100;              // employers
  double candidate_ratio = 1.5;     // candidates = round(ratio * n)
  double lambda = 0.5;              // crowding level in [0, 1]
  RelevanceStructure structure = RelevanceStructure::Random;
  double noise_sd = 0.2;            // sd of the similar/reversed noise
  std::uint64_t seed = 0;
};

// Stream tags used by generate_synthetic, public so tests can re-derive the
// raw draws from the same seed.
namespace stream_tag {
inline constexpr std::uint64_t phi_draws = 1;    // row-major over phi
inline constexpr std::uint64_t psi_draws = 2;    // row-major over psi (Random only)
inline constexpr std::uint64_t noise_draws = 3;  // row-major over psi (Similar/Reversed)
}  // namespace stream_tag

// Synthetic market of the crowding-blend family: uniform random relevances,
// optionally restructured on the employer side (similar/reversed, clipped
// Gaussian noise), convex-combined with the fully crowded linear profile at
// weight lambda. Deterministic in spec.seed.
Market generate_synthetic(const SyntheticSpec& spec,
                          ExaminationModel exam_candidate = ExaminationModel::inverse_rank(),
                          ExaminationModel exam_employer = ExaminationModel::inverse_rank());

// The n x n circulant gap instance: every candidate's top employer is j_1,
// employer k's priority list starts at c_k and wraps around. Relevances are
// (n - rank + 1)/n; ranks below a candidate's top 3 are filled by the
// remaining employers in ascending index (any values at or below the rank-3
// relevance preserve the construction; this fill keeps it reproducible).
// Both sides examine with TruncatedGeometric(0.1, cutoff).
Market theorem2_instance(std::size_t n, std::size_t cutoff = 2);

// Fixed 3x3 market where the stable matching is welfare-suboptimal.
// Relevance 1 / 0.9 / 0.1 by rank, top-1 examination on both sides.
Market proposition5_instance();

// Fixture rankings (position -> employer, one per candidate). Positions past
// the examined prefix hold the remaining employers in ascending index.
std::vector<std::vector<std::size_t>> theorem2_pi_s_rankings(std::size_t n);
std::vector<std::vector<std::size_t>> proposition5_stable_rankings();
std::vector<std::vector<std::size_t>> proposition5_pi_s_rankings();

Market load_market(const std::string& path);
void save_market(const Market& market, const std::string& path);
std::string market_to_json_string(const Market& market);
Market market_from_json_string(const std::string& text);

}  // namespace matchrank
