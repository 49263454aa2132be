#pragma once

#include <string>
#include <utility>
#include <vector>

#include "matchrank/market.hpp"
#include "matchrank/matrix.hpp"
#include "matchrank/policy.hpp"

namespace matchrank {

struct Histogram {
  std::vector<double> bin_lo;
  std::vector<double> bin_hi;
  std::vector<std::size_t> counts;
};

// 20 equal-width bins over [lo, hi]; a degenerate range puts everything in
// bin 0.
Histogram make_histogram(const std::vector<double>& values, double lo, double hi,
                         std::size_t bins = 20);
Histogram make_histogram(const std::vector<double>& values, std::size_t bins = 20);

struct GainReport {
  std::vector<double> values;      // one gain per candidate
  double fraction_positive = 0.0;  // strictly positive gains
  Histogram histogram;
};

// Lower-bound payoff of candidate c playing own_matrix while everyone else
// plays their matrix from `others`: the c-th summand of the welfare lower
// bound with the crowding terms taken from the context policy.
double payoff(const Market& market, const Matrix& own_matrix, const Policy& others,
              std::size_t c);

// Exact per-candidate utility change when the whole market switches from
// policy a to policy b.
GainReport switch_gain(const Market& market, const Policy& policy_a, const Policy& policy_b);

// Payoff gain from unilaterally adopting the system ranking while everyone
// else still plays the naive one.
GainReport adoption_gain(const Market& market, const Policy& system_policy,
                         const Policy& naive);

// Payoff gain from staying with the system ranking when everyone else does.
GainReport retention_gain(const Market& market, const Policy& system_policy,
                          const Policy& naive);

struct UtilityTable {
  struct Row {
    std::string name;
    std::vector<double> candidate_utilities;
    std::vector<double> employer_utilities;
    Histogram candidate_hist;  // bins pooled across policies per side
    Histogram employer_hist;
  };
  std::vector<Row> rows;
};

UtilityTable utility_histograms(const Market& market,
                                const std::vector<std::pair<std::string, const Policy*>>& policies);

// name,candidate_index,value
void write_gains_csv(const std::string& path,
                     const std::vector<std::pair<std::string, const GainReport*>>& reports);
// name,bin_lo,bin_hi,count
void write_histogram_csv(const std::string& path,
                         const std::vector<std::pair<std::string, const Histogram*>>& histograms);

}  // namespace matchrank
