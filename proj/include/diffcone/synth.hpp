#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "diffcone/model.hpp"

namespace diffcone {

// Cone-structured synthetic embeddings. An item of level l is
//
//   normalize(t * d + spread_l * g),   t = offset_l + jitter * (2u - 1)
//
// with d the unit true direction, g a standard Gaussian D-vector and u uniform.
// t is the item's hidden fine-grained difficulty.
struct ConeSpec {
  Index dim = 16;
  std::vector<Index> counts{50, 50, 50, 50};
  std::vector<double> offsets;  // empty: evenly spaced in [-1, 1]
  std::vector<double> spreads{0.1, 0.2, 0.3, 0.4};
  double latent_jitter = 0.0;
  std::uint64_t direction_seed = 1;
  std::uint64_t noise_seed = 2;

  std::size_t level_count() const { return counts.size(); }
  std::vector<double> resolved_offsets() const;
  // Throws kInvalidSpec.
  void validate() const;
};

ConeSpec scale_spreads(ConeSpec spec, double factor);

struct SyntheticData {
  EmbeddingSet<double> embeddings;
  LabeledDataset dataset;
  Eigen::VectorXd true_direction;
  std::vector<double> latent;  // hidden difficulty t, in embedding order
};

// Random streams: the direction uses Random(direction_seed); item k (global
// index, levels in order) uses Random(derive_seed(noise_seed, k)) and draws u
// first, then the D Gaussian components.
SyntheticData generate(const ConeSpec& spec);

}  // namespace diffcone
