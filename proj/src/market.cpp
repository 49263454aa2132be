#include "matchrank/market.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "matchrank/errors.hpp"
#include "matchrank/rng.hpp"

namespace matchrank {

namespace {

void check_probability_matrix(const Matrix& m, const char* name) {
  for (double x : m.data()) {
    if (!std::isfinite(x) || x < 0.0 || x > 1.0)
      throw std::invalid_argument(std::string(name) + ": entries must be finite and in [0,1]");
  }
}

double clip01(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace

Market::Market(Matrix phi, Matrix psi, ExaminationModel exam_candidate,
               ExaminationModel exam_employer)
    : phi_(std::move(phi)),
      psi_(std::move(psi)),
      exam_candidate_(std::move(exam_candidate)),
      exam_employer_(std::move(exam_employer)) {
  if (phi_.rows() == 0 || phi_.cols() == 0)
    throw std::invalid_argument("market: needs at least one candidate and one employer");
  if (psi_.rows() != phi_.cols() || psi_.cols() != phi_.rows())
    throw std::invalid_argument("market: psi must be the transpose shape of phi");
  check_probability_matrix(phi_, "phi");
  check_probability_matrix(psi_, "psi");
  if (exam_candidate_.max_position() < num_employers())
    throw std::invalid_argument("market: candidate exam model shorter than employer count");
  if (exam_employer_.max_position() < num_candidates())
    throw std::invalid_argument("market: employer exam model shorter than candidate count");
}

std::string structure_name(RelevanceStructure s) {
  switch (s) {
    case RelevanceStructure::Random: return "random";
    case RelevanceStructure::Similar: return "similar";
    case RelevanceStructure::Reversed: return "reversed";
  }
  throw std::logic_error("unreachable");
}

RelevanceStructure structure_from_name(const std::string& name) {
  if (name == "random") return RelevanceStructure::Random;
  if (name == "similar") return RelevanceStructure::Similar;
  if (name == "reversed") return RelevanceStructure::Reversed;
  throw std::invalid_argument("unknown relevance structure: " + name);
}

Market generate_synthetic(const SyntheticSpec& spec, ExaminationModel exam_candidate,
                          ExaminationModel exam_employer) {
  if (spec.n < 1) throw std::invalid_argument("synthetic spec: n must be >= 1");
  if (!(spec.lambda >= 0.0 && spec.lambda <= 1.0))
    throw std::invalid_argument("synthetic spec: lambda must be in [0,1]");
  if (!(spec.candidate_ratio > 0.0))
    throw std::invalid_argument("synthetic spec: candidate_ratio must be positive");
  if (!(spec.noise_sd >= 0.0))
    throw std::invalid_argument("synthetic spec: noise_sd must be non-negative");

  const std::size_t num_employers = spec.n;
  const auto num_candidates = static_cast<std::size_t>(
      std::llround(spec.candidate_ratio * static_cast<double>(spec.n)));
  if (num_candidates < 1)
    throw std::invalid_argument("synthetic spec: candidate count rounds to zero");

  const RngStream root(spec.seed);
  RngStream phi_stream = root.fork(stream_tag::phi_draws);
  RngStream psi_stream = root.fork(stream_tag::psi_draws);
  RngStream noise_stream = root.fork(stream_tag::noise_draws);

  Matrix phi_rand(num_candidates, num_employers);
  for (double& x : phi_rand.data()) x = phi_stream.next_double();

  Matrix psi_rand(num_employers, num_candidates);
  switch (spec.structure) {
    case RelevanceStructure::Random:
      for (double& x : psi_rand.data()) x = psi_stream.next_double();
      break;
    case RelevanceStructure::Similar:
      for (std::size_t j = 0; j < num_employers; ++j)
        for (std::size_t c = 0; c < num_candidates; ++c)
          psi_rand(j, c) = clip01(phi_rand(c, j) + noise_stream.next_gaussian(spec.noise_sd));
      break;
    case RelevanceStructure::Reversed:
      for (std::size_t j = 0; j < num_employers; ++j)
        for (std::size_t c = 0; c < num_candidates; ++c)
          psi_rand(j, c) = clip01(1.0 - phi_rand(c, j) + noise_stream.next_gaussian(spec.noise_sd));
      break;
  }

  // Fully crowded profile: the i-th employer (candidate) has the same linearly
  // decreasing relevance for everyone.
  const double lam = spec.lambda;
  Matrix phi(num_candidates, num_employers);
  for (std::size_t c = 0; c < num_candidates; ++c)
    for (std::size_t j = 0; j < num_employers; ++j) {
      const double crowded = num_employers > 1
          ? 1.0 - static_cast<double>(j) / static_cast<double>(num_employers - 1)
          : 1.0;
      phi(c, j) = (1.0 - lam) * phi_rand(c, j) + lam * crowded;
    }

  Matrix psi(num_employers, num_candidates);
  for (std::size_t j = 0; j < num_employers; ++j)
    for (std::size_t c = 0; c < num_candidates; ++c) {
      const double crowded = num_candidates > 1
          ? 1.0 - static_cast<double>(c) / static_cast<double>(num_candidates - 1)
          : 1.0;
      psi(j, c) = (1.0 - lam) * psi_rand(j, c) + lam * crowded;
    }

  return Market(std::move(phi), std::move(psi), std::move(exam_candidate),
                std::move(exam_employer));
}

namespace {

// Candidate orderings of the gap instance: j_1 tops every list; c_1 and c_2
// continue (j_2, j_3), candidate c_i with i >= 3 continues (j_i, j_{i-1});
// remaining employers follow in ascending index.
std::vector<std::size_t> theorem2_candidate_order(std::size_t i, std::size_t n) {
  std::vector<std::size_t> order;
  order.reserve(n);
  auto push_unique = [&](std::size_t j) {
    if (j < n && std::find(order.begin(), order.end(), j) == order.end()) order.push_back(j);
  };
  push_unique(0);
  if (i <= 1) {
    push_unique(1);
    push_unique(2);
  } else {
    push_unique(i);
    push_unique(i - 1);
  }
  for (std::size_t j = 0; j < n; ++j) push_unique(j);
  return order;
}

}  // namespace

Market theorem2_instance(std::size_t n, std::size_t cutoff) {
  if (n < 2) throw std::invalid_argument("theorem2_instance: n must be >= 2");

  Matrix phi(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto order = theorem2_candidate_order(i, n);
    for (std::size_t r = 0; r < n; ++r)
      phi(i, order[r]) = static_cast<double>(n - r) / static_cast<double>(n);
  }

  // Employer k's priority list is the cyclic shift starting at c_k.
  Matrix psi(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t rank0 = (i + n - k) % n;
      psi(k, i) = static_cast<double>(n - rank0) / static_cast<double>(n);
    }

  auto exam = ExaminationModel::truncated_geometric(0.1, cutoff);
  return Market(std::move(phi), std::move(psi), exam, exam);
}

Market proposition5_instance() {
  // Rows are candidate preference orders (j-index, best first):
  //   c1: j1 j3 j2, c2: j2 j1 j3, c3: j1 j2 j3, relevances 1 / 0.9 / 0.1.
  Matrix phi(3, 3);
  phi(0, 0) = 1.0;  phi(0, 2) = 0.9;  phi(0, 1) = 0.1;
  phi(1, 1) = 1.0;  phi(1, 0) = 0.9;  phi(1, 2) = 0.1;
  phi(2, 0) = 1.0;  phi(2, 1) = 0.9;  phi(2, 2) = 0.1;

  //   j1: c1 c3 c2, j2: c2 c1 c3, j3: c1 c2 c3.
  Matrix psi(3, 3);
  psi(0, 0) = 1.0;  psi(0, 2) = 0.9;  psi(0, 1) = 0.1;
  psi(1, 1) = 1.0;  psi(1, 0) = 0.9;  psi(1, 2) = 0.1;
  psi(2, 0) = 1.0;  psi(2, 1) = 0.9;  psi(2, 2) = 0.1;

  auto top1 = ExaminationModel::explicit_values({1.0, 0.0, 0.0});
  return Market(std::move(phi), std::move(psi), top1, top1);
}

std::vector<std::vector<std::size_t>> theorem2_pi_s_rankings(std::size_t n) {
  if (n < 2) throw std::invalid_argument("theorem2_pi_s_rankings: n must be >= 2");
  std::vector<std::vector<std::size_t>> rankings(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t>& r = rankings[i];
    r.reserve(n);
    if (i == 0) {
      r.push_back(0);
      r.push_back(1);
    } else {
      r.push_back(i);
      r.push_back(i - 1);
    }
    for (std::size_t j = 0; j < n; ++j)
      if (std::find(r.begin(), r.end(), j) == r.end()) r.push_back(j);
  }
  return rankings;
}

std::vector<std::vector<std::size_t>> proposition5_stable_rankings() {
  // Stable matching (c1,j1), (c2,j2), (c3,j3) as top-1 rankings.
  return {{0, 1, 2}, {1, 0, 2}, {2, 0, 1}};
}

std::vector<std::vector<std::size_t>> proposition5_pi_s_rankings() {
  // c1 -> j3, c2 -> j2, c3 -> j1 at the examined top position.
  return {{2, 0, 1}, {1, 0, 2}, {0, 1, 2}};
}

namespace {

using nlohmann::json;

json exam_to_json(const ExaminationModel& m) {
  json params = json::object();
  switch (m.kind()) {
    case ExaminationModel::Kind::TruncatedGeometric:
      params["base"] = m.base();
      params["cutoff"] = m.cutoff();
      break;
    case ExaminationModel::Kind::Explicit:
      params["values"] = m.values();
      break;
    default:
      break;
  }
  return json{{"kind", m.kind_name()}, {"params", params}};
}

ExaminationModel exam_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const json params = j.value("params", json::object());
  if (kind == "inverse_rank") return ExaminationModel::inverse_rank();
  if (kind == "inverse_log") return ExaminationModel::inverse_log();
  if (kind == "inverse_exp") return ExaminationModel::inverse_exp();
  if (kind == "truncated_geometric")
    return ExaminationModel::truncated_geometric(params.at("base").get<double>(),
                                                 params.at("cutoff").get<std::size_t>());
  if (kind == "explicit")
    return ExaminationModel::explicit_values(params.at("values").get<std::vector<double>>());
  throw std::invalid_argument("unknown examination model kind: " + kind);
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const char* name) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument(std::string(name) + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j.at(0).size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const json& row = j.at(r);
    if (row.size() != cols)
      throw std::invalid_argument(std::string(name) + ": ragged rows");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = row.at(c).get<double>();
  }
  return m;
}

}  // namespace

std::string market_to_json_string(const Market& market) {
  json j{{"num_candidates", market.num_candidates()},
         {"num_employers", market.num_employers()},
         {"phi", matrix_to_json(market.phi())},
         {"psi", matrix_to_json(market.psi())},
         {"exam_candidate", exam_to_json(market.exam_candidate())},
         {"exam_employer", exam_to_json(market.exam_employer())}};
  return j.dump(2) + "\n";
}

Market market_from_json_string(const std::string& text) {
  json j = json::parse(text);
  Matrix phi = matrix_from_json(j.at("phi"), "phi");
  Matrix psi = matrix_from_json(j.at("psi"), "psi");
  if (j.at("num_candidates").get<std::size_t>() != phi.rows() ||
      j.at("num_employers").get<std::size_t>() != phi.cols())
    throw std::invalid_argument("market json: declared dimensions do not match phi");
  return Market(std::move(phi), std::move(psi), exam_from_json(j.at("exam_candidate")),
                exam_from_json(j.at("exam_employer")));
}

Market load_market(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open market file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return market_from_json_string(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed market file " + path + ": " + e.what());
  }
}

void save_market(const Market& market, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write market file: " + path);
  out << market_to_json_string(market);
  if (!out) throw IoError("failed writing market file: " + path);
}

}  // namespace matchrank
