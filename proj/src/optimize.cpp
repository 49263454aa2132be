#include "matchrank/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "matchrank/errors.hpp"
#include "matchrank/objective.hpp"

namespace matchrank {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSinkhornFloor = 1e-12;

struct HungarianResult {
  double value = 0.0;                   // optimal assignment value (max form)
  std::vector<std::size_t> row_to_col;  // sub-index space
  std::vector<double> u, v;             // min-form potentials, sub-index space
};

// Shortest-augmenting-path assignment with potentials (Jonker-Volgenant
// flavor), O(n^3), deterministic scan order; 1-based arrays internally.
// Minimizes `cost`; the returned potentials are dual feasible:
// u[i] + v[j] <= cost(i, j) for every pair, with equality on assigned edges.
HungarianResult hungarian_min(const std::vector<double>& cost, std::size_t n) {
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1, false);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      std::size_t j1 = 0;
      double delta = kInf;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  HungarianResult result;
  result.row_to_col.assign(n, 0);
  result.u.assign(n, 0.0);
  result.v.assign(n, 0.0);
  for (std::size_t j = 1; j <= n; ++j) {
    result.value += cost[(p[j] - 1) * n + (j - 1)];
    result.row_to_col[p[j] - 1] = j - 1;
  }
  for (std::size_t i = 0; i < n; ++i) result.u[i] = u[i + 1];
  for (std::size_t j = 0; j < n; ++j) result.v[j] = v[j + 1];
  return result;
}

// Max-weight assignment restricted to rows x cols (original index lists).
HungarianResult hungarian_max_sub(const Matrix& gain, const std::vector<std::size_t>& rows,
                                  const std::vector<std::size_t>& cols) {
  const std::size_t n = rows.size();
  std::vector<double> cost(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) cost[r * n + c] = -gain(rows[r], cols[c]);
  HungarianResult result = hungarian_min(cost, n);
  result.value = -result.value;
  return result;
}

}  // namespace

double assignment_value(const Matrix& gain, const std::vector<std::size_t>& perm) {
  double total = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) total += gain(i, perm[i]);
  return total;
}

std::vector<std::size_t> assignment_lmo(const Matrix& gain) {
  if (gain.rows() != gain.cols() || gain.rows() == 0)
    throw std::invalid_argument("assignment_lmo: square non-empty matrix required");
  for (double x : gain.data())
    if (!std::isfinite(x)) throw NumericalError("assignment_lmo: non-finite gain entry");
  const std::size_t n = gain.rows();

  double scale = 0.0;
  for (double x : gain.data()) scale = std::max(scale, std::abs(x));
  const double tol = 1e-9 * std::max(1.0, scale);

  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<std::size_t> cols(rows);
  HungarianResult live = hungarian_max_sub(gain, rows, cols);
  double remaining = live.value;

  // Fix rows top-down to the smallest column that still reaches the optimum.
  // Forcing edge (i, c) can cost at least its reduced cost against the live
  // duals, so columns with reduced cost above the tie tolerance are pruned
  // without solving; a surviving smaller column is certified (or refuted) by
  // one exact sub-assignment. Tie-free inputs take the duals-only path.
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t m = cols.size();
    const std::vector<std::size_t> rest_rows(rows.begin() + (n - m) + 1, rows.end());

    const std::size_t chosen_pos_default = live.row_to_col[0];
    std::size_t chosen = cols[chosen_pos_default];
    bool have_sub = false;
    HungarianResult sub;
    std::vector<std::size_t> rest_cols;
    for (std::size_t ci = 0; ci < m && cols[ci] < chosen; ++ci) {
      const std::size_t c = cols[ci];
      const double reduced = (-gain(i, c)) - live.u[0] - live.v[ci];
      if (reduced > tol) continue;
      rest_cols.clear();
      rest_cols.reserve(m - 1);
      for (const std::size_t cc : cols)
        if (cc != c) rest_cols.push_back(cc);
      HungarianResult candidate = hungarian_max_sub(gain, rest_rows, rest_cols);
      if (gain(i, c) + candidate.value >= remaining - tol) {
        chosen = c;
        sub = std::move(candidate);
        have_sub = true;
        break;
      }
    }

    perm[i] = chosen;
    remaining -= gain(i, chosen);
    if (m == 1) break;

    if (have_sub) {
      live = std::move(sub);
      cols = std::move(rest_cols);
    } else {
      // Drop row i and its column from the live solution; the restricted
      // duals stay feasible and the restricted assignment stays optimal.
      const std::size_t drop = chosen_pos_default;
      HungarianResult shrunk;
      shrunk.row_to_col.reserve(m - 1);
      shrunk.u.assign(live.u.begin() + 1, live.u.end());
      shrunk.v.reserve(m - 1);
      for (std::size_t k = 0; k < m; ++k)
        if (k != drop) shrunk.v.push_back(live.v[k]);
      for (std::size_t r = 1; r < m; ++r) {
        const std::size_t pos = live.row_to_col[r];
        shrunk.row_to_col.push_back(pos > drop ? pos - 1 : pos);
      }
      live = std::move(shrunk);
      cols.erase(cols.begin() + drop);
    }
  }
  return perm;
}

void write_trace_csv(const TraceRecord& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write trace file: " + path);
  out << "iteration,lower_bound,gap,wall_ms\n";
  char buf[128];
  for (const TraceEntry& e : trace.entries) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.3f\n", e.iteration, e.lower_bound,
                  e.gap, e.wall_ms);
    out << buf;
  }
  if (!out) throw IoError("failed writing trace file: " + path);
}

SinkhornResult sinkhorn_project(const Matrix& m, double epsilon, std::size_t max_sweeps) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw std::invalid_argument("sinkhorn_project: square non-empty matrix required");
  const std::size_t n = m.rows();

  const auto deviations = [n](const Matrix& x) {
    double row_dev = 0.0, col_dev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      row_dev += std::abs(x.row_sum(i) - 1.0);
      col_dev += std::abs(x.col_sum(i) - 1.0);
    }
    return std::pair{row_dev, col_dev};
  };

  bool non_negative = true;
  for (double x : m.data())
    if (!(x >= 0.0)) non_negative = false;
  if (non_negative) {
    const auto [rd, cd] = deviations(m);
    if (rd <= epsilon && cd <= epsilon) return {m, 0, rd, cd, true};
  }

  SinkhornResult result;
  result.matrix = m;
  for (double& x : result.matrix.data()) x = std::max(x, kSinkhornFloor);
  {
    const auto [rd, cd] = deviations(result.matrix);
    result.row_dev = rd;
    result.col_dev = cd;
    result.converged = rd <= epsilon && cd <= epsilon;
  }

  while (!result.converged && result.sweeps < max_sweeps) {
    ++result.sweeps;
    for (std::size_t r = 0; r < n; ++r) {
      const double s = result.matrix.row_sum(r);
      for (std::size_t c = 0; c < n; ++c) result.matrix(r, c) /= s;
    }
    for (std::size_t c = 0; c < n; ++c) {
      const double s = result.matrix.col_sum(c);
      for (std::size_t r = 0; r < n; ++r) result.matrix(r, c) /= s;
    }
    const auto [rd, cd] = deviations(result.matrix);
    result.row_dev = rd;
    result.col_dev = cd;
    result.converged = rd <= epsilon && cd <= epsilon;
  }
  return result;
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

void check_optimizer_preconditions(const Market& market, const OptimizerConfig& config) {
  if (config.steps == 0) throw std::invalid_argument("optimizer: steps must be >= 1");
  if (config.learning_rate.kind == LearningRate::Kind::Constant &&
      !(config.learning_rate.value > 0.0 && config.learning_rate.value <= 1.0))
    throw std::invalid_argument("optimizer: constant learning rate must be in (0,1]");
  if (!market.exam_candidate().is_convex() || !market.exam_employer().is_convex())
    throw std::invalid_argument("optimizer: requires convex examination models");
}

}  // namespace

OptimizeResult frank_wolfe(const Market& market, const OptimizerConfig& config,
                           const Policy& init) {
  check_optimizer_preconditions(market, config);
  const std::size_t C = market.num_candidates();
  const std::size_t J = market.num_employers();
  if (init.num_candidates() != C || init.num_employers() != J)
    throw std::invalid_argument("frank_wolfe: init policy dimensions do not match market");

  const auto start = std::chrono::steady_clock::now();
  std::vector<Matrix> m = init.matrices();
  TraceRecord trace;

  for (std::size_t t = 0; t < config.steps; ++t) {
    const Policy current(m);
    const std::vector<Matrix> grads = lower_bound_gradient(market, current);

    double gap = 0.0;
    std::vector<std::vector<std::size_t>> directions(C);
    for (std::size_t c = 0; c < C; ++c) {
      directions[c] = assignment_lmo(grads[c]);
      gap += assignment_value(grads[c], directions[c]) - frobenius_inner(grads[c], m[c]);
    }

    if (gap < config.stop_epsilon) {
      trace.entries.push_back({t, social_welfare_lower_bound(market, current), gap, 0.0,
                               elapsed_ms(start)});
      break;
    }

    const double eta = config.learning_rate.at(t);
    double step_norm = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      Matrix& mc = m[c];
      for (std::size_t j = 0; j < J; ++j)
        for (std::size_t k = 0; k < J; ++k) {
          const double vertex = directions[c][j] == k ? 1.0 : 0.0;
          const double delta = eta * (vertex - mc(j, k));
          step_norm += std::abs(delta);
          mc(j, k) += delta;
        }
    }
    trace.entries.push_back({t, social_welfare_lower_bound(market, Policy(m)), gap,
                             step_norm, elapsed_ms(start)});
  }
  return {Policy(std::move(m)), std::move(trace)};
}

OptimizeResult frank_wolfe(const Market& market, const OptimizerConfig& config) {
  return frank_wolfe(market, config,
                     uniform_policy(market.num_candidates(), market.num_employers()));
}

OptimizeResult projected_gradient(const Market& market, const OptimizerConfig& config,
                                  const Policy& init) {
  check_optimizer_preconditions(market, config);
  const std::size_t C = market.num_candidates();
  const std::size_t J = market.num_employers();
  if (init.num_candidates() != C || init.num_employers() != J)
    throw std::invalid_argument("projected_gradient: init policy dimensions do not match market");

  const auto start = std::chrono::steady_clock::now();
  std::vector<Matrix> m = init.matrices();
  TraceRecord trace;

  // Iterates must satisfy the doubly stochastic policy tolerance, so the
  // per-step projection runs to stop_epsilon or tighter.
  const double iterate_eps = std::min(config.stop_epsilon, 1e-7);

  for (std::size_t t = 0; t < config.steps; ++t) {
    const std::vector<Matrix> grads = lower_bound_gradient(market, Policy(m));
    const double eta = config.learning_rate.at(t);

    double step_norm = 0.0;
    double worst_dev = 0.0;  // records which bound the Sinkhorn loop hit
    bool budget_hit = false;
    for (std::size_t c = 0; c < C; ++c) {
      Matrix moved = m[c];
      for (std::size_t i = 0; i < moved.data().size(); ++i)
        moved.data()[i] *= std::exp(eta * grads[c].data()[i]);
      SinkhornResult projected =
          sinkhorn_project(moved, iterate_eps, config.sinkhorn_max_sweeps);
      // Near-vertex iterates make Sinkhorn arbitrarily slow; a budget-
      // exhausted projection still inside the policy tolerance ends the run
      // instead of grinding further, anything worse is an error.
      if (!projected.converged) {
        if (std::max(projected.row_dev, projected.col_dev) > kDoublyStochasticTol)
          throw NumericalError(
              "projected_gradient: Sinkhorn sweep budget exhausted at L1 deviation " +
              std::to_string(std::max(projected.row_dev, projected.col_dev)));
        budget_hit = true;
      }
      worst_dev = std::max({worst_dev, projected.row_dev, projected.col_dev});
      for (std::size_t i = 0; i < moved.data().size(); ++i)
        step_norm += std::abs(projected.matrix.data()[i] - m[c].data()[i]);
      m[c] = std::move(projected.matrix);
    }
    trace.entries.push_back({t, social_welfare_lower_bound(market, Policy(m)), worst_dev,
                             step_norm, elapsed_ms(start)});
    if (budget_hit || step_norm < 1e-8) break;  // stationary or terminal regime
  }
  return {Policy(std::move(m)), std::move(trace)};
}

OptimizeResult projected_gradient(const Market& market, const OptimizerConfig& config) {
  return projected_gradient(market, config,
                            uniform_policy(market.num_candidates(), market.num_employers()));
}

OptimizeResult optimize(const Market& market, const OptimizerConfig& config) {
  return config.method == OptimizeMethod::FrankWolfe ? frank_wolfe(market, config)
                                                     : projected_gradient(market, config);
}

OptimizeResult two_stage_rerank(const Market& market, std::size_t shortlist_size,
                                const OptimizerConfig& config) {
  check_optimizer_preconditions(market, config);
  const std::size_t C = market.num_candidates();
  const std::size_t J = market.num_employers();
  if (shortlist_size < 1 || shortlist_size > J)
    throw std::invalid_argument("two_stage_rerank: shortlist size must be in [1, |J|]");
  const std::size_t s = shortlist_size;

  // Reciprocal ordering per candidate; the first s employers form the block.
  std::vector<std::vector<std::size_t>> recip_order(C);
  for (std::size_t c = 0; c < C; ++c) {
    std::vector<double> scores(J);
    for (std::size_t j = 0; j < J; ++j) scores[j] = market.phi()(c, j) * market.psi()(j, c);
    recip_order[c] = order_by_score_desc(scores);
  }

  std::vector<Matrix> blocks(C, Matrix(s, s, 1.0 / static_cast<double>(s)));

  const auto assemble = [&](const std::vector<Matrix>& bs) {
    std::vector<Matrix> full(C, Matrix(J, J));
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t r = 0; r < s; ++r)
        for (std::size_t k = 0; k < s; ++k) full[c](recip_order[c][r], k) = bs[c](r, k);
      for (std::size_t i = s; i < J; ++i) full[c](recip_order[c][i], i) = 1.0;
    }
    return Policy(std::move(full));
  };

  const auto start = std::chrono::steady_clock::now();
  TraceRecord trace;
  const double iterate_eps = std::min(config.stop_epsilon, 1e-7);

  for (std::size_t t = 0; t < config.steps; ++t) {
    const Policy current = assemble(blocks);
    const std::vector<Matrix> grads = lower_bound_gradient(market, current);

    std::vector<Matrix> block_grads(C, Matrix(s, s));
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t r = 0; r < s; ++r)
        for (std::size_t k = 0; k < s; ++k)
          block_grads[c](r, k) = grads[c](recip_order[c][r], k);

    if (config.method == OptimizeMethod::FrankWolfe) {
      double gap = 0.0;
      std::vector<std::vector<std::size_t>> directions(C);
      for (std::size_t c = 0; c < C; ++c) {
        directions[c] = assignment_lmo(block_grads[c]);
        gap += assignment_value(block_grads[c], directions[c]) -
               frobenius_inner(block_grads[c], blocks[c]);
      }
      if (gap < config.stop_epsilon) {
        trace.entries.push_back({t, social_welfare_lower_bound(market, current), gap, 0.0,
                                 elapsed_ms(start)});
        break;
      }
      const double eta = config.learning_rate.at(t);
      double step_norm = 0.0;
      for (std::size_t c = 0; c < C; ++c)
        for (std::size_t r = 0; r < s; ++r)
          for (std::size_t k = 0; k < s; ++k) {
            const double vertex = directions[c][r] == k ? 1.0 : 0.0;
            const double delta = eta * (vertex - blocks[c](r, k));
            step_norm += std::abs(delta);
            blocks[c](r, k) += delta;
          }
      trace.entries.push_back({t, social_welfare_lower_bound(market, assemble(blocks)), gap,
                               step_norm, elapsed_ms(start)});
    } else {
      const double eta = config.learning_rate.at(t);
      double step_norm = 0.0;
      double worst_dev = 0.0;
      bool budget_hit = false;
      for (std::size_t c = 0; c < C; ++c) {
        Matrix moved = blocks[c];
        for (std::size_t i = 0; i < moved.data().size(); ++i)
          moved.data()[i] *= std::exp(eta * block_grads[c].data()[i]);
        SinkhornResult projected =
            sinkhorn_project(moved, iterate_eps, config.sinkhorn_max_sweeps);
        if (!projected.converged) {
          if (std::max(projected.row_dev, projected.col_dev) > kDoublyStochasticTol)
            throw NumericalError("two_stage_rerank: Sinkhorn sweep budget exhausted");
          budget_hit = true;
        }
        worst_dev = std::max({worst_dev, projected.row_dev, projected.col_dev});
        for (std::size_t i = 0; i < moved.data().size(); ++i)
          step_norm += std::abs(projected.matrix.data()[i] - blocks[c].data()[i]);
        blocks[c] = std::move(projected.matrix);
      }
      trace.entries.push_back({t, social_welfare_lower_bound(market, assemble(blocks)),
                               worst_dev, step_norm, elapsed_ms(start)});
      if (budget_hit || step_norm < 1e-8) break;
    }
  }
  return {assemble(blocks), std::move(trace)};
}

}  // namespace matchrank
