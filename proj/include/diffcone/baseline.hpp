#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "diffcone/model.hpp"

namespace diffcone {

inline const std::vector<double> kDefaultCGrid{0.1, 1.0, 10.0};
inline constexpr int kDefaultEpochs = 200;

// Binary-labelled vectors (labels in {-1, +1}); x holds one column per item.
struct LabeledVectors {
  std::vector<std::string> ids;
  Eigen::MatrixXd x;
  std::vector<int> y;

  Index size() const { return x.cols(); }
  Index dim() const { return x.rows(); }
};

LabeledVectors concatenate(const LabeledVectors& first, const LabeledVectors& second);

struct TrainMeta {
  int epochs = 0;
  std::uint64_t seed = 0;
  double val_accuracy = -1.0;  // negative when no validation split was used
};

struct LinearModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double c_used = 0.0;
  TrainMeta train_meta;

  double decision(const Eigen::Ref<const Eigen::VectorXd>& x) const { return weights.dot(x) + bias; }
  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const { return decision(x) >= 0.0 ? 1 : -1; }
};

// Pegasos: minimises (1/(2 C n)) |w|^2 + (1/n) sum hinge(y (w.x + b)) with
// step 1/(lambda t), lambda = 1/(C n). The bias is carried as an extra
// coordinate with a constant feature of 1, so it is regularised with w. Each
// epoch visits the examples in an order drawn from derive_seed(seed, epoch).
LinearModel train_linear_svm(const LabeledVectors& data, double c, int epochs = kDefaultEpochs,
                             std::uint64_t seed = 0);

double accuracy(const LinearModel& model, const LabeledVectors& data);

struct GridPoint {
  double c;
  double val_accuracy;
};

struct TransferResult {
  double test_accuracy = 0.0;
  LinearModel model;  // retrained on train + val with the selected C
  std::vector<GridPoint> grid;
};

// Picks C by validation accuracy (ties go to the smaller C), retrains on
// train + val and scores the test split. Splits must be disjoint by id.
TransferResult tune_and_evaluate(const LabeledVectors& train, const LabeledVectors& val,
                                 const LabeledVectors& test, std::span<const double> grid = kDefaultCGrid,
                                 int epochs = kDefaultEpochs, std::uint64_t seed = 0);

struct TransferSplits {
  LabeledVectors train;
  LabeledVectors val;
  LabeledVectors test;
};

// Train on one level pair, test on another. The easier level of each pair is
// labelled -1 and the harder +1. Items of a level used by both pairs are split
// half/half between the two sides so no id is reused; the training side is then
// split into train/validation stratified by class.
TransferSplits make_transfer_splits(const EmbeddingSet<double>& embeddings, const LabeledDataset& dataset,
                                    LevelPair train_pair, LevelPair test_pair, double val_fraction = 0.2,
                                    std::uint64_t seed = 0);

}  // namespace diffcone
