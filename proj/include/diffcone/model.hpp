#pragma once

#include <Eigen/Core>

#include <cmath>
#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "diffcone/error.hpp"

namespace diffcone {

using Index = Eigen::Index;

enum class NormPolicy { kAssertUnit, kRenormalize };

// Largest deviation from unit norm accepted under NormPolicy::kAssertUnit.
// Vectors accepted this way are stored verbatim.
inline constexpr double kAssertUnitTolerance = 1e-6;

// Unique, non-empty item ids with O(1) lookup of their position.
class ItemIndex {
 public:
  ItemIndex() = default;
  explicit ItemIndex(std::vector<std::string> ids);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(Index i) const { return ids_[static_cast<std::size_t>(i)]; }
  std::optional<Index> find(std::string_view id) const;

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, Index> positions_;
};

// Unit-norm embedding vectors stored column-wise in a D x N matrix.
template <typename Scalar>
class EmbeddingSet {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  EmbeddingSet() = default;

  // `vectors` has one column per id. Throws kDimensionMismatch, kDuplicateId,
  // kInvalidArgument, kZeroVector or kNormViolation.
  EmbeddingSet(std::vector<std::string> ids, Matrix vectors, NormPolicy policy)
      : policy_(policy) {
    if (vectors.rows() < 1) {
      throw Error(ErrorCode::kDimensionMismatch, "embedding dimension must be at least 1");
    }
    if (static_cast<std::size_t>(vectors.cols()) != ids.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "got " + std::to_string(ids.size()) + " ids for " +
                      std::to_string(vectors.cols()) + " vectors");
    }
    for (Index i = 0; i < vectors.cols(); ++i) {
      auto column = vectors.col(i);
      if (!column.allFinite()) {
        throw Error(ErrorCode::kInvalidArgument, "non-finite value in vector '" + ids[i] + "'");
      }
      const Scalar norm = column.norm();
      if (policy == NormPolicy::kRenormalize) {
        if (!(norm > Scalar(0))) {
          throw Error(ErrorCode::kZeroVector, "cannot normalize zero vector '" + ids[i] + "'");
        }
        column /= norm;
      } else if (std::abs(static_cast<double>(norm) - 1.0) > kAssertUnitTolerance) {
        throw Error(ErrorCode::kNormViolation,
                    "vector '" + ids[i] + "' has norm " + std::to_string(static_cast<double>(norm)));
      }
    }
    index_ = ItemIndex(std::move(ids));
    vectors_ = std::move(vectors);
  }

  // Empty set of known dimension.
  static EmbeddingSet empty(Index dim) {
    return EmbeddingSet({}, Matrix(dim, 0), NormPolicy::kAssertUnit);
  }

  Index dim() const { return vectors_.rows(); }
  Index size() const { return vectors_.cols(); }
  bool is_empty() const { return vectors_.cols() == 0; }
  NormPolicy norm_policy() const { return policy_; }

  const Matrix& vectors() const { return vectors_; }
  auto vector(Index i) const { return vectors_.col(i); }

  const ItemIndex& index() const { return index_; }
  const std::vector<std::string>& ids() const { return index_.ids(); }
  const std::string& id(Index i) const { return index_.id(i); }
  std::optional<Index> find(std::string_view id) const { return index_.find(id); }

  // Items at `positions`, in that order.
  EmbeddingSet subset(std::span<const Index> positions) const {
    Matrix picked(dim(), static_cast<Index>(positions.size()));
    std::vector<std::string> picked_ids;
    picked_ids.reserve(positions.size());
    for (std::size_t k = 0; k < positions.size(); ++k) {
      picked.col(static_cast<Index>(k)) = vectors_.col(positions[k]);
      picked_ids.push_back(id(positions[k]));
    }
    EmbeddingSet out;
    out.policy_ = policy_;
    out.index_ = ItemIndex(std::move(picked_ids));
    out.vectors_ = std::move(picked);
    return out;
  }

 private:
  ItemIndex index_;
  Matrix vectors_;
  NormPolicy policy_ = NormPolicy::kAssertUnit;
};

// Ordinal difficulty labels. Levels are ranks into level_names (0 = easiest).
class LabeledDataset {
 public:
  struct Label {
    std::string id;
    int level;
  };

  LabeledDataset() = default;
  LabeledDataset(std::vector<std::string> level_names, std::vector<Label> labels);

  const std::vector<std::string>& level_names() const { return level_names_; }
  const std::vector<Label>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }

  std::optional<int> level_of(std::string_view id) const;
  // Rank of a level name; throws kUnknownLevel.
  int rank_of(std::string_view level_name) const;
  const std::string& level_name(int rank) const;

  // Distinct levels that have at least one item, ascending.
  std::vector<int> present_levels() const;
  std::size_t count(int level) const;

  LabeledDataset restricted_to_levels(std::span<const int> levels) const;

 private:
  std::vector<std::string> level_names_;
  std::vector<Label> labels_;
  std::unordered_map<std::string, int> level_by_id_;
};

struct OrderPair {
  Index easier;
  Index harder;

  friend auto operator<=>(const OrderPair&, const OrderPair&) = default;
};

struct AllCrossLevel {};
struct AdjacentLevels {};
struct LevelPair {
  int easier;
  int harder;

  friend bool operator==(const LevelPair&, const LevelPair&) = default;
};
struct PerItem {
  std::string anchor_id;
};
// Hand-assembled pair lists (tests, external graphs).
struct ExplicitPairs {};

using ConstraintMode = std::variant<AllCrossLevel, AdjacentLevels, LevelPair, PerItem, ExplicitPairs>;

std::string describe(const ConstraintMode& mode, const LabeledDataset* dataset = nullptr);

// Pairwise order constraints; pair (i, j) asserts item i is easier than item j.
struct ConstraintSet {
  std::vector<OrderPair> pairs;
  ConstraintMode mode = ExplicitPairs{};

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

ConstraintSet build_constraints(const LabeledDataset& dataset, const ItemIndex& items,
                                const ConstraintMode& mode);

template <typename Scalar>
ConstraintSet build_constraints(const LabeledDataset& dataset,
                                const EmbeddingSet<Scalar>& embeddings,
                                const ConstraintMode& mode) {
  return build_constraints(dataset, embeddings.index(), mode);
}

struct ValidationReport {
  std::vector<std::size_t> out_of_bounds;  // positions in the pair list
  std::vector<std::size_t> self_loops;
  std::vector<std::size_t> duplicates;     // later occurrences only
  // Item indices along one directed cycle, empty when the graph is acyclic.
  std::vector<Index> cycle;

  bool has_cycle() const { return !cycle.empty(); }
  bool clean() const {
    return out_of_bounds.empty() && self_loops.empty() && duplicates.empty() && cycle.empty();
  }
};

ValidationReport validate(const ConstraintSet& constraints, Index item_count);

template <typename Scalar>
ValidationReport validate(const ConstraintSet& constraints, const EmbeddingSet<Scalar>& embeddings) {
  return validate(constraints, embeddings.size());
}

}  // namespace diffcone
