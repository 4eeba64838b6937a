#pragma once

#include <Eigen/Core>
#include <Eigen/QR>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "diffcone/model.hpp"

namespace diffcone::testing {

inline std::vector<std::string> make_ids(Index n, const std::string& prefix = "x") {
  std::vector<std::string> ids;
  for (Index i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

inline Eigen::MatrixXd gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
  }
  return m;
}

inline EmbeddingSet<double> random_unit_embeddings(Index n, Index dim, std::mt19937_64& rng) {
  return EmbeddingSet<double>(make_ids(n), gaussian_matrix(dim, n, rng), NormPolicy::kRenormalize);
}

inline Eigen::VectorXd random_unit_vector(Index dim, std::mt19937_64& rng) {
  return gaussian_matrix(dim, 1, rng).col(0).normalized();
}

inline Eigen::MatrixXd random_orthogonal(Index dim, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(dim, dim, rng));
  return qr.householderQ() * Eigen::MatrixXd::Identity(dim, dim);
}

inline EmbeddingSet<double> transformed(const EmbeddingSet<double>& e, const Eigen::MatrixXd& q) {
  return EmbeddingSet<double>(e.ids(), q * e.vectors(), NormPolicy::kAssertUnit);
}

// K random pairs (i, j) with i != j; duplicates allowed.
inline ConstraintSet random_constraints(Index n, std::size_t k, std::mt19937_64& rng) {
  std::uniform_int_distribution<Index> pick(0, n - 1);
  ConstraintSet c;
  while (c.pairs.size() < k) {
    const Index i = pick(rng);
    const Index j = pick(rng);
    if (i != j) c.pairs.push_back({i, j});
  }
  return c;
}

// Labels items round-robin over `levels` levels named L0, L1, ...
inline LabeledDataset round_robin_labels(const EmbeddingSet<double>& e, int levels) {
  std::vector<std::string> names;
  for (int l = 0; l < levels; ++l) names.push_back("L" + std::to_string(l));
  std::vector<LabeledDataset::Label> labels;
  for (Index i = 0; i < e.size(); ++i) labels.push_back({e.id(i), static_cast<int>(i % levels)});
  return LabeledDataset(names, labels);
}

}  // namespace diffcone::testing
