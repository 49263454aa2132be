#include "matchrank/exam.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace matchrank {

namespace {
constexpr double kLn2 = 0.69314718055994530941723212145818;
}

ExaminationModel::ExaminationModel(Kind kind, double base, std::size_t cutoff,
                                   std::vector<double> values)
    : kind_(kind), base_(base), cutoff_(cutoff), values_(std::move(values)) {}

ExaminationModel ExaminationModel::inverse_rank() {
  return ExaminationModel(Kind::InverseRank, 0.0, 0, {});
}

ExaminationModel ExaminationModel::inverse_log() {
  return ExaminationModel(Kind::InverseLog, 0.0, 0, {});
}

ExaminationModel ExaminationModel::inverse_exp() {
  return ExaminationModel(Kind::InverseExp, 0.0, 0, {});
}

ExaminationModel ExaminationModel::truncated_geometric(double base, std::size_t cutoff) {
  if (!(base >= 0.0 && base <= 1.0))
    throw std::invalid_argument("truncated_geometric: base must be in [0,1]");
  if (cutoff < 1) throw std::invalid_argument("truncated_geometric: cutoff must be >= 1");
  return ExaminationModel(Kind::TruncatedGeometric, base, cutoff, {});
}

ExaminationModel ExaminationModel::explicit_values(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("explicit exam model: empty vector");
  double prev = 1.0;
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("explicit exam model: entries must be in [0,1]");
    if (v > prev + 1e-12)
      throw std::invalid_argument("explicit exam model: entries must be non-increasing");
    prev = v;
  }
  return ExaminationModel(Kind::Explicit, 0.0, 0, std::move(values));
}

std::size_t ExaminationModel::max_position() const {
  if (kind_ == Kind::Explicit) return values_.size();
  return std::numeric_limits<std::size_t>::max();
}

double ExaminationModel::at_rank(std::size_t rank) const {
  if (rank < 1) throw std::invalid_argument("exam model: rank must be >= 1");
  switch (kind_) {
    case Kind::InverseRank:
    case Kind::InverseLog:
    case Kind::InverseExp:
      return at_real(static_cast<double>(rank));
    case Kind::TruncatedGeometric:
      if (rank > cutoff_) return 0.0;
      return std::pow(base_, static_cast<double>(rank - 1));
    case Kind::Explicit:
      if (rank > values_.size())
        throw std::invalid_argument("explicit exam model: rank beyond stored values");
      return values_[rank - 1];
  }
  throw std::logic_error("unreachable");
}

double ExaminationModel::at_real(double x) const {
  if (!(x >= 1.0)) throw std::invalid_argument("exam model: argument must be >= 1");
  switch (kind_) {
    case Kind::InverseRank:
      return 1.0 / x;
    case Kind::InverseLog:
      return kLn2 / std::log1p(x);
    case Kind::InverseExp:
      return std::exp(1.0 - x);
    case Kind::TruncatedGeometric:
    case Kind::Explicit: {
      const auto lo = static_cast<std::size_t>(x);
      if (kind_ == Kind::Explicit && lo >= values_.size()) return values_.back();
      const double f = x - static_cast<double>(lo);
      if (f == 0.0) return at_rank(lo);
      return (1.0 - f) * at_rank(lo) + f * at_rank(lo + 1);
    }
  }
  throw std::logic_error("unreachable");
}

double ExaminationModel::derivative_at(double x) const {
  if (!(x >= 1.0)) throw std::invalid_argument("exam model: argument must be >= 1");
  switch (kind_) {
    case Kind::InverseRank:
      return -1.0 / (x * x);
    case Kind::InverseLog: {
      const double l = std::log1p(x);
      return -kLn2 / ((1.0 + x) * l * l);
    }
    case Kind::InverseExp:
      return -std::exp(1.0 - x);
    case Kind::TruncatedGeometric:
    case Kind::Explicit: {
      const auto lo = static_cast<std::size_t>(x);
      if (kind_ == Kind::Explicit && lo >= values_.size()) return 0.0;
      return at_rank(lo + 1) - at_rank(lo);
    }
  }
  throw std::logic_error("unreachable");
}

bool ExaminationModel::is_convex() const {
  switch (kind_) {
    case Kind::InverseRank:
    case Kind::InverseLog:
    case Kind::InverseExp:
      return true;
    case Kind::TruncatedGeometric:
      // Differences inside the geometric run shrink in magnitude; the drop to
      // zero at the cutoff only preserves convexity for base <= 1/2.
      return cutoff_ == 1 || base_ <= 0.5;
    case Kind::Explicit: {
      double prev_diff = values_.size() > 1 ? values_[1] - values_[0]
                                            : 0.0;
      for (std::size_t k = 2; k < values_.size(); ++k) {
        const double diff = values_[k] - values_[k - 1];
        if (diff < prev_diff - 1e-12) return false;
        prev_diff = diff;
      }
      // Constant extension past the vector adds a final difference of 0.
      return values_.size() < 2 || prev_diff <= 1e-12;
    }
  }
  throw std::logic_error("unreachable");
}

bool ExaminationModel::is_analytic() const {
  return kind_ == Kind::InverseRank || kind_ == Kind::InverseLog || kind_ == Kind::InverseExp;
}

std::string ExaminationModel::kind_name() const {
  switch (kind_) {
    case Kind::InverseRank: return "inverse_rank";
    case Kind::InverseLog: return "inverse_log";
    case Kind::InverseExp: return "inverse_exp";
    case Kind::TruncatedGeometric: return "truncated_geometric";
    case Kind::Explicit: return "explicit";
  }
  throw std::logic_error("unreachable");
}

std::vector<double> exam_vector(const ExaminationModel& model, std::size_t length) {
  if (length < 1) throw std::invalid_argument("exam_vector: length must be >= 1");
  if (length > model.max_position())
    throw std::invalid_argument("exam_vector: length beyond explicit model size");
  std::vector<double> v(length);
  for (std::size_t k = 0; k < length; ++k) v[k] = model.at_rank(k + 1);
  return v;
}

}  // namespace matchrank
