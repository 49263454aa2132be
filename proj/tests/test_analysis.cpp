#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "matchrank/analysis.hpp"
#include "matchrank/market.hpp"
#include "matchrank/objective.hpp"
#include "matchrank/optimize.hpp"

using namespace matchrank;
using testutil::all_permutations;
using testutil::lb_reference;
using testutil::random_ds_policy;
using testutil::random_market;

TEST_CASE("payoffs of the all-play profile sum to the lower bound") {
  RngStream rng(71);
  const Market m = random_market(rng, 5, 4);
  const Policy p = random_ds_policy(rng, 5, 4);
  double total = 0.0;
  for (std::size_t c = 0; c < 5; ++c) total += payoff(m, p.matrix(c), p, c);
  CHECK(std::abs(total - social_welfare_lower_bound(m, p)) <= 1e-9);
}

TEST_CASE("a lone candidate's payoff ignores the context policy") {
  RngStream rng(72);
  const Market m = random_market(rng, 1, 4);
  const Policy ctx_a = random_ds_policy(rng, 1, 4);
  const Policy ctx_b = random_ds_policy(rng, 1, 4);
  const Matrix own = ctx_a.matrix(0);
  CHECK(payoff(m, own, ctx_a, 0) == doctest::Approx(payoff(m, own, ctx_b, 0)).epsilon(1e-15));
}

TEST_CASE("payoff matches term extraction from the reference objective") {
  RngStream rng(73);
  const Market m = random_market(rng, 4, 4);
  const Policy ctx = random_ds_policy(rng, 4, 4);
  const Policy own = random_ds_policy(rng, 4, 4);
  const std::size_t J = m.num_employers();
  const auto v = exam_vector(m.exam_candidate(), J);
  for (std::size_t c = 0; c < 4; ++c) {
    // c's summand of the lower bound, crowding taken from the context policy.
    double expected = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      double crowd = 0.0;
      for (std::size_t o = 0; o < 4; ++o) {
        if (o == c) continue;
        const bool higher = m.psi()(j, o) > m.psi()(j, c) ||
                            (m.psi()(j, o) == m.psi()(j, c) && o < c);
        if (!higher) continue;
        double exposure = 0.0;
        for (std::size_t k = 0; k < J; ++k) exposure += ctx.matrix(o)(j, k) * v[k];
        crowd += m.phi()(o, j) * exposure;
      }
      double exposure = 0.0;
      for (std::size_t k = 0; k < J; ++k) exposure += own.matrix(c)(j, k) * v[k];
      expected += m.phi()(c, j) * m.psi()(j, c) * m.exam_employer().at_real(1.0 + crowd) *
                  exposure;
    }
    CHECK(payoff(m, own.matrix(c), ctx, c) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("switch gain is zero between identical policies") {
  RngStream rng(74);
  const Market m = random_market(rng, 4, 3);
  const Policy p = random_ds_policy(rng, 4, 3);
  const GainReport r = switch_gain(m, p, p);
  for (double g : r.values) CHECK(g == 0.0);
  CHECK(r.fraction_positive == 0.0);
}

TEST_CASE("switch gain on the counterexample totals the welfare difference") {
  const Market p5 = proposition5_instance();
  const Policy stable = Policy::from_rankings(proposition5_stable_rankings());
  const Policy pi_s = Policy::from_rankings(proposition5_pi_s_rankings());
  const GainReport r = switch_gain(p5, stable, pi_s);
  double total = 0.0;
  for (double g : r.values) total += g;
  CHECK(total == doctest::Approx(0.79).epsilon(1e-9));
}

TEST_CASE("switch gains telescope to the exact welfare difference") {
  RngStream rng(75);
  const Market m = random_market(rng, 5, 5);
  const Policy a = random_ds_policy(rng, 5, 5);
  const Policy b = random_ds_policy(rng, 5, 5);
  const GainReport r = switch_gain(m, a, b);
  double total = 0.0;
  for (double g : r.values) total += g;
  CHECK(total == doctest::Approx(social_welfare_exact(m, b) - social_welfare_exact(m, a))
                     .epsilon(1e-9));
}

TEST_CASE("adoption gain vanishes when the system ranking is the naive one") {
  RngStream rng(76);
  const Market m = random_market(rng, 4, 4);
  const Policy naive = naive_policy(m);
  const GainReport r = adoption_gain(m, naive, naive);
  for (double g : r.values) CHECK(g == 0.0);
  std::size_t total = 0;
  for (std::size_t c : r.histogram.counts) total += c;
  CHECK(total == 4);
}

TEST_CASE("for a lone candidate the reciprocal ranking maximizes the payoff") {
  RngStream rng(77);
  const Market m = random_market(rng, 1, 4);
  const Policy naive = naive_policy(m);
  const Policy recip = reciprocal_policy(m);
  const GainReport r = adoption_gain(m, recip, naive);
  CHECK(r.values[0] >= -1e-12);
  // Enumerate every deterministic ranking: none beats the reciprocal one.
  const double recip_payoff = payoff(m, recip.matrix(0), naive, 0);
  for (const auto& perm : all_permutations(4)) {
    const Policy alt = Policy::from_rankings({perm});
    CHECK(payoff(m, alt.matrix(0), naive, 0) <= recip_payoff + 1e-12);
  }
}

TEST_CASE("retention gain vanishes when the rankings coincide and extracts terms") {
  RngStream rng(78);
  const Market m = random_market(rng, 4, 4);
  const Policy naive = naive_policy(m);
  CHECK(retention_gain(m, naive, naive).fraction_positive == 0.0);

  const Policy system = random_ds_policy(rng, 4, 4);
  const GainReport r = retention_gain(m, system, naive);
  CHECK(r.fraction_positive >= 0.0);
  CHECK(r.fraction_positive <= 1.0);
  for (std::size_t c = 0; c < 4; ++c) {
    const double expected = payoff(m, system.matrix(c), system, c) -
                            payoff(m, naive.matrix(c), system, c);
    CHECK(r.values[c] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("histograms bin every individual exactly once") {
  Matrix zero_phi(4, 3, 0.0);
  Matrix psi(3, 4, 0.5);
  const Market dead(zero_phi, psi, ExaminationModel::inverse_rank(),
                    ExaminationModel::inverse_rank());
  const Policy naive = naive_policy(dead);
  const UtilityTable table = utility_histograms(dead, {{"naive", &naive}});
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0].candidate_hist.counts[0] == 4);  // all utilities are zero
  std::size_t cand_total = 0, emp_total = 0;
  for (std::size_t c : table.rows[0].candidate_hist.counts) cand_total += c;
  for (std::size_t c : table.rows[0].employer_hist.counts) emp_total += c;
  CHECK(cand_total == 4);
  CHECK(emp_total == 3);
}

TEST_CASE("optimized ranking does not grow the lowest utility bin") {
  SyntheticSpec spec;
  spec.n = 20;
  spec.lambda = 0.5;
  spec.seed = 2;
  const Market m = generate_synthetic(spec);
  const Policy naive = naive_policy(m);
  OptimizerConfig config;
  const Policy optimized = frank_wolfe(m, config).policy;
  const UtilityTable table =
      utility_histograms(m, {{"naive", &naive}, {"social_welfare", &optimized}});
  const std::size_t naive_low = table.rows[0].candidate_hist.counts[0];
  const std::size_t opt_low = table.rows[1].candidate_hist.counts[0];
  MESSAGE("lowest-bin occupancy: naive=", naive_low, " social_welfare=", opt_low);
  std::size_t cand_total = 0;
  for (std::size_t c : table.rows[1].candidate_hist.counts) cand_total += c;
  CHECK(cand_total == m.num_candidates());
}

TEST_CASE("gain and histogram csv writers") {
  RngStream rng(79);
  const Market m = random_market(rng, 3, 3);
  const Policy a = naive_policy(m);
  const Policy b = reciprocal_policy(m);
  const GainReport r = switch_gain(m, a, b);
  const auto dir = std::filesystem::temp_directory_path();
  const auto gains_path = (dir / "matchrank_gains.csv").string();
  const auto hist_path = (dir / "matchrank_hist.csv").string();
  write_gains_csv(gains_path, {{"switch", &r}});
  write_histogram_csv(hist_path, {{"switch", &r.histogram}});

  std::ifstream gains(gains_path);
  std::string header;
  std::getline(gains, header);
  CHECK(header == "name,candidate_index,value");
  std::size_t rows = 0;
  for (std::string line; std::getline(gains, line);)
    if (!line.empty()) ++rows;
  CHECK(rows == 3);

  std::ifstream hist(hist_path);
  std::getline(hist, header);
  CHECK(header == "name,bin_lo,bin_hi,count");
  std::filesystem::remove(gains_path);
  std::filesystem::remove(hist_path);
}
