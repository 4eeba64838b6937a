#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "diffcone/solver.hpp"

namespace diffcone {

// Fractional ranks starting at 1; tied values share the mean of their ranks.
std::vector<double> mid_ranks(std::span<const double> values);

// Pearson correlation of mid-ranks. Throws kLengthMismatch, kInsufficientData
// (fewer than 3 samples) or kConstantInput.
double spearman_rho(std::span<const double> a, std::span<const double> b);

struct PermutationTest {
  int n_perm = 9999;
  std::uint64_t seed = 0;
};

struct CorrelationResult {
  double rho = 0.0;
  std::size_t n = 0;
  double p_value = 1.0;
  PermutationTest method;
  // Fewer distinct permutations exist than were drawn (n! <= n_perm).
  bool low_resolution = false;
};

// Two-sided permutation test of Spearman's rho: b is reshuffled n_perm times
// and p = (1 + #{|rho_perm| >= |rho_obs|}) / (1 + n_perm).
CorrelationResult permutation_pvalue(std::span<const double> a, std::span<const double> b,
                                     int n_perm, std::uint64_t seed);

struct RankedModel {
  std::string model_name;
  double score = 0.0;
  Index dim = 0;
  bool tied = false;  // another model has exactly the same score
};

// Descending by score, ties broken by model name. Throws kMissingPair.
std::vector<RankedModel> rank_models(std::span<const CompatibilityReport<double>> reports,
                                     LevelPair levels);

}  // namespace diffcone
