#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace matchrank {

// Position-based examination model: v(k) is the probability that a user
// inspects the item at rank k. v is non-increasing with v(k) in [0, 1].
//
// The three analytic kinds extend to real arguments (needed when v is
// evaluated at an expected rank) by their formula and are convex on x >= 1:
//   InverseRank          v(x) = 1/x
//   InverseLog           v(x) = 1/log2(1+x)
//   InverseExp           v(x) = 1/e^(x-1)
// TruncatedGeometric(b,m): v(k) = b^(k-1) for k <= m, 0 afterwards.
// Explicit holds a literal vector of examination probabilities.
//
// The vector kinds evaluate at real arguments through piecewise-linear
// interpolation between integer ranks, which preserves convexity exactly when
// the rank sequence is discretely convex (non-decreasing differences); only
// then does is_convex() report true and the Jensen lower bound stays valid.
class ExaminationModel {
 public:
  enum class Kind { InverseRank, InverseLog, InverseExp, TruncatedGeometric, Explicit };

  static ExaminationModel inverse_rank();
  static ExaminationModel inverse_log();
  static ExaminationModel inverse_exp();
  static ExaminationModel truncated_geometric(double base, std::size_t cutoff);
  static ExaminationModel explicit_values(std::vector<double> values);

  Kind kind() const { return kind_; }
  double base() const { return base_; }
  std::size_t cutoff() const { return cutoff_; }
  const std::vector<double>& values() const { return values_; }

  // Largest rank this model can be evaluated at (unbounded except Explicit).
  std::size_t max_position() const;

  // v at an integer rank >= 1.
  double at_rank(std::size_t rank) const;

  // v and v' at a real argument x >= 1: the formula for analytic kinds, the
  // piecewise-linear interpolation (right slope at knots) for vector kinds.
  // Explicit models extend as constants past their stored length.
  double at_real(double x) const;
  double derivative_at(double x) const;

  // Convexity of v on x >= 1; precondition of the Jensen lower bound. Always
  // true for the analytic kinds, checked per instance for the vector kinds.
  bool is_convex() const;
  bool is_analytic() const;

  std::string kind_name() const;

  bool operator==(const ExaminationModel&) const = default;

 private:
  ExaminationModel(Kind kind, double base, std::size_t cutoff, std::vector<double> values);

  Kind kind_;
  double base_ = 0.0;
  std::size_t cutoff_ = 0;
  std::vector<double> values_;
};

// [v(1), ..., v(length)]; throws if an Explicit model is shorter than length.
std::vector<double> exam_vector(const ExaminationModel& model, std::size_t length);

}  // namespace matchrank
