#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "diffcone/model.hpp"

namespace diffcone {

// Below this norm the summed difference vectors are treated as cancelled.
inline constexpr double kDegeneracyThreshold = 1e-12;

template <typename Scalar>
struct DifficultyDirection {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector w;          // unit difficulty direction
  Vector raw_sum;    // sum of (harder - easier) over the constraints
  Scalar objective;  // sum of margins at the optimum, equal to |raw_sum|
  Scalar mean_margin;
  Vector margins;    // one per constraint, in constraint order

  // Apex of the cone: the point the easiest items cluster around.
  Vector simplest_point() const { return -w; }
  Index constraint_count() const { return margins.size(); }
};

namespace detail {

template <typename Scalar>
void check_pairs(const ConstraintSet& constraints, Index item_count) {
  if (constraints.empty()) throw Error(ErrorCode::kEmptyConstraintSet, "no constraints");
  for (const auto& p : constraints.pairs) {
    if (p.easier < 0 || p.harder < 0 || p.easier >= item_count || p.harder >= item_count) {
      throw Error(ErrorCode::kInvalidArgument,
                  "constraint (" + std::to_string(p.easier) + ", " + std::to_string(p.harder) +
                      ") out of range for " + std::to_string(item_count) + " items");
    }
  }
}

}  // namespace detail

// Closed-form maximiser of sum_k xi_k subject to w^T (x_i - x_j) + xi_k = 0 and
// |w| = 1: the normalised sum of the difference vectors.
template <typename Scalar>
DifficultyDirection<Scalar> fit_direction(const EmbeddingSet<Scalar>& embeddings,
                                          const ConstraintSet& constraints) {
  using Vector = typename DifficultyDirection<Scalar>::Vector;
  detail::check_pairs<Scalar>(constraints, embeddings.size());
  const auto& x = embeddings.vectors();

  Vector raw_sum = Vector::Zero(embeddings.dim());
  for (const auto& p : constraints.pairs) {
    raw_sum += x.col(p.harder) - x.col(p.easier);
  }
  const Scalar norm = raw_sum.norm();
  if (!(static_cast<double>(norm) >= kDegeneracyThreshold)) {
    std::ostringstream msg;
    msg << "difference vectors cancel (|sum| = " << std::setprecision(3) << static_cast<double>(norm)
        << " < " << kDegeneracyThreshold << "), no difficulty direction exists";
    throw Error(ErrorCode::kDegenerateDirection, msg.str());
  }

  DifficultyDirection<Scalar> out;
  out.w = raw_sum / norm;
  out.raw_sum = std::move(raw_sum);
  out.margins.resize(static_cast<Index>(constraints.size()));
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    const auto& p = constraints.pairs[k];
    out.margins[static_cast<Index>(k)] = -out.w.dot(x.col(p.easier) - x.col(p.harder));
  }
  out.objective = norm;
  out.mean_margin = norm / static_cast<Scalar>(constraints.size());
  return out;
}

// Difficulty coordinate of x along w; larger is harder.
template <typename DerivedW, typename DerivedX>
typename DerivedW::Scalar project(const Eigen::MatrixBase<DerivedW>& w,
                                  const Eigen::MatrixBase<DerivedX>& x) {
  if (w.size() != x.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(w.size()) + " vs " + std::to_string(x.size()));
  }
  return w.dot(x);
}

// Sum of margins -w^T (x_i - x_j) for an arbitrary direction.
template <typename Scalar, typename Derived>
Scalar objective_at(const EmbeddingSet<Scalar>& embeddings, const ConstraintSet& constraints,
                    const Eigen::MatrixBase<Derived>& w) {
  const auto& x = embeddings.vectors();
  Scalar total = 0;
  for (const auto& p : constraints.pairs) total += -w.dot(x.col(p.easier) - x.col(p.harder));
  return total;
}

template <typename Scalar>
struct CompatibilityScore {
  Scalar score = 0;          // |mu_b - mu_a|, the mean margin of the level-pair fit
  Index pair_count = 0;      // K = n_a * n_b
  bool degenerate = false;   // centroids coincide; score reported as 0
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> direction;  // empty when degenerate
};

// Mean margin of the level-pair fit, computed from the two level centroids in
// O(N D) instead of O(n_a n_b D).
template <typename Scalar>
CompatibilityScore<Scalar> compatibility_score(const EmbeddingSet<Scalar>& embeddings,
                                               const LabeledDataset& dataset, LevelPair levels) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const auto level_count = static_cast<int>(dataset.level_names().size());
  for (int rank : {levels.easier, levels.harder}) {
    if (rank < 0 || rank >= level_count) throw Error(ErrorCode::kUnknownLevel, "rank " + std::to_string(rank));
  }
  if (levels.easier >= levels.harder) {
    throw Error(ErrorCode::kInvalidArgument, "level pair must be ordered easier < harder");
  }

  Vector sum_easier = Vector::Zero(embeddings.dim());
  Vector sum_harder = Vector::Zero(embeddings.dim());
  Index n_easier = 0;
  Index n_harder = 0;
  for (const auto& label : dataset.labels()) {
    if (label.level != levels.easier && label.level != levels.harder) continue;
    auto position = embeddings.find(label.id);
    if (!position) throw Error(ErrorCode::kUnknownId, "no embedding for '" + label.id + "'");
    if (label.level == levels.easier) {
      sum_easier += embeddings.vector(*position);
      ++n_easier;
    } else {
      sum_harder += embeddings.vector(*position);
      ++n_harder;
    }
  }
  if (n_easier == 0 || n_harder == 0) {
    throw Error(ErrorCode::kEmptyLevel,
                "level '" + dataset.level_name(n_easier == 0 ? levels.easier : levels.harder) +
                    "' has no items");
  }

  CompatibilityScore<Scalar> out;
  out.pair_count = n_easier * n_harder;
  const Vector delta = sum_harder / static_cast<Scalar>(n_harder) - sum_easier / static_cast<Scalar>(n_easier);
  const Scalar norm = delta.norm();
  // Same threshold as fit_direction, applied to |raw_sum| = K |delta|.
  if (!(static_cast<double>(norm) * static_cast<double>(out.pair_count) >= kDegeneracyThreshold)) {
    out.degenerate = true;
    return out;
  }
  out.score = norm;
  out.direction = delta / norm;
  return out;
}

template <typename Scalar>
struct CompatibilityEntry {
  LevelPair levels;
  Scalar score;
  Index pair_count;
  bool degenerate;
};

template <typename Scalar>
struct CompatibilityReport {
  std::string model_name;
  Index dim = 0;
  std::vector<CompatibilityEntry<Scalar>> entries;

  const CompatibilityEntry<Scalar>* find(LevelPair levels) const {
    for (const auto& e : entries) {
      if (e.levels == levels) return &e;
    }
    return nullptr;
  }
};

template <typename Scalar>
CompatibilityReport<Scalar> compatibility_report(std::string model_name,
                                                 const EmbeddingSet<Scalar>& embeddings,
                                                 const LabeledDataset& dataset,
                                                 const std::vector<LevelPair>& level_pairs) {
  CompatibilityReport<Scalar> report{std::move(model_name), embeddings.dim(), {}};
  report.entries.reserve(level_pairs.size());
  for (const auto& levels : level_pairs) {
    const auto s = compatibility_score(embeddings, dataset, levels);
    report.entries.push_back({levels, s.score, s.pair_count, s.degenerate});
  }
  return report;
}

// Mean margin of the direction fitted to one item against every item of a
// strictly lower or strictly higher level.
template <typename Scalar>
Scalar item_consistency(const EmbeddingSet<Scalar>& embeddings, const LabeledDataset& dataset,
                        const std::string& anchor_id) {
  if (!dataset.level_of(anchor_id)) throw Error(ErrorCode::kUnknownId, "anchor '" + anchor_id + "' has no label");
  if (!embeddings.find(anchor_id)) throw Error(ErrorCode::kUnknownId, "anchor '" + anchor_id + "' has no embedding");
  ConstraintSet constraints;
  try {
    constraints = build_constraints(dataset, embeddings, PerItem{anchor_id});
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSingleLevel || e.code() == ErrorCode::kEmptyConstraintSet) {
      throw Error(ErrorCode::kNoReferenceItems, "no items above or below '" + anchor_id + "'");
    }
    throw;
  }
  return fit_direction(embeddings, constraints).mean_margin;
}

struct OracleOptions {
  int steps = 5000;
  double step_size = 0.05;
  std::uint64_t seed = 0;
};

// Projected gradient ascent on the same program, for validating the closed
// form. The gradient is assembled per item (X c with c_j = #harder - #easier
// occurrences) rather than by summing pair differences.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> oracle_fit_direction(const EmbeddingSet<Scalar>& embeddings,
                                                              const ConstraintSet& constraints,
                                                              const OracleOptions& options = {}) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  detail::check_pairs<Scalar>(constraints, embeddings.size());

  Vector coefficients = Vector::Zero(embeddings.size());
  for (const auto& p : constraints.pairs) {
    coefficients[p.harder] += Scalar(1);
    coefficients[p.easier] -= Scalar(1);
  }
  const Vector gradient = embeddings.vectors() * coefficients;
  if (!(static_cast<double>(gradient.norm()) >= kDegeneracyThreshold)) {
    throw Error(ErrorCode::kDegenerateDirection, "objective gradient vanishes");
  }

  std::mt19937_64 engine(options.seed);
  std::normal_distribution<double> normal;
  Vector w(embeddings.dim());
  for (Index d = 0; d < w.size(); ++d) w[d] = static_cast<Scalar>(normal(engine));
  w.normalize();

  const auto step = static_cast<Scalar>(options.step_size);
  for (int t = 0; t < options.steps; ++t) {
    w += step * gradient;
    w.normalize();
  }
  return w;
}

}  // namespace diffcone
