#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "matchrank/market.hpp"
#include "matchrank/matrix.hpp"
#include "matchrank/policy.hpp"

namespace matchrank {

enum class OptimizeMethod { FrankWolfe, ProjectedGradient };

struct LearningRate {
  enum class Kind { Constant, Decaying };
  Kind kind = Kind::Constant;
  double value = 0.2;

  static LearningRate constant(double value) { return {Kind::Constant, value}; }
  static LearningRate decaying() { return {Kind::Decaying, 0.0}; }

  // Step size at iteration t (0-based); decaying follows 1/(t+2).
  double at(std::size_t t) const {
    return kind == Kind::Constant ? value : 1.0 / static_cast<double>(t + 2);
  }
};

struct OptimizerConfig {
  OptimizeMethod method = OptimizeMethod::FrankWolfe;
  std::size_t steps = 50;
  LearningRate learning_rate = LearningRate::constant(0.2);
  double stop_epsilon = 1e-3;
  std::size_t sinkhorn_max_sweeps = 1000;
  std::uint64_t seed = 0;  // reserved; both solvers are deterministic
};

struct TraceEntry {
  std::size_t iteration;
  double lower_bound;  // objective after this iteration's update
  double gap;          // FW duality gap (FW) or L1 step norm (PGD) before the update
  double step_norm;
  double wall_ms;      // cumulative wall time, non-deterministic across runs
};

struct TraceRecord {
  std::vector<TraceEntry> entries;
};

// Columns: iteration,lower_bound,gap,wall_ms
void write_trace_csv(const TraceRecord& trace, const std::string& path);

// Exact max-weight assignment over permutations: returns the row -> column map
// maximizing sum_i gain(i, perm[i]). Among optimal permutations (ties within a
// scale-relative 1e-9) the lexicographically smallest one is returned, which
// keeps optimizer runs reproducible on degenerate gradients. O(n^3) Hungarian
// solve plus an O(n^4)-average refinement pass.
std::vector<std::size_t> assignment_lmo(const Matrix& gain);

double assignment_value(const Matrix& gain, const std::vector<std::size_t>& perm);

struct SinkhornResult {
  Matrix matrix;
  std::size_t sweeps = 0;
  double row_dev = 0.0;  // ||row sums - 1||_1 at exit
  double col_dev = 0.0;
  bool converged = false;
};

// Alternate row/column scaling of a non-negative matrix (entries floored at
// 1e-12) until both L1 sum deviations drop below epsilon or the sweep budget
// runs out; an already doubly stochastic input is returned unchanged.
SinkhornResult sinkhorn_project(const Matrix& m, double epsilon = 1e-3,
                                std::size_t max_sweeps = 1000);

struct OptimizeResult {
  Policy policy;
  TraceRecord trace;
};

// Conditional-gradient ascent on the welfare lower bound over the product of
// Birkhoff polytopes; the per-candidate linear subproblem is solved exactly by
// assignment_lmo, so every step direction is a permutation matrix. Stops after
// config.steps iterations or when the summed duality gap falls below
// config.stop_epsilon.
OptimizeResult frank_wolfe(const Market& market, const OptimizerConfig& config,
                           const Policy& init);
OptimizeResult frank_wolfe(const Market& market, const OptimizerConfig& config);

// Gradient ascent with Sinkhorn-Knopp projection back onto the polytope after
// every step. The ascent step is multiplicative, M .* exp(eta * grad): the
// additive step is absorbed by Sinkhorn's diagonal scalings (the per-candidate
// gradients are rank-1, so M + eta*grad rescales to an interior fixpoint and
// never reaches a vertex), while the exponentiated step is the gradient step
// in the KL geometry that Sinkhorn projects in.
OptimizeResult projected_gradient(const Market& market, const OptimizerConfig& config,
                                  const Policy& init);
OptimizeResult projected_gradient(const Market& market, const OptimizerConfig& config);

// Runs config.method from the uniform start point.
OptimizeResult optimize(const Market& market, const OptimizerConfig& config);

// Per candidate, keep only the top shortlist_size employers by reciprocal
// relevance for optimization: those occupy ranks 1..shortlist_size with an
// optimized doubly stochastic block, the rest follow deterministically in
// reciprocal order. shortlist_size = |J| is full optimization; 1 reproduces
// the reciprocal ranking.
OptimizeResult two_stage_rerank(const Market& market, std::size_t shortlist_size,
                                const OptimizerConfig& config = {});

}  // namespace matchrank
