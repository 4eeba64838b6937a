#include "diffcone/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "diffcone/random.hpp"

namespace diffcone {

namespace {

void check_shape(const LabeledVectors& data) {
  if (static_cast<std::size_t>(data.size()) != data.y.size() ||
      (!data.ids.empty() && data.ids.size() != data.y.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "labels, ids and vectors differ in count");
  }
  for (int label : data.y) {
    if (label != 1 && label != -1) throw Error(ErrorCode::kInvalidArgument, "labels must be -1 or +1");
  }
}

}  // namespace

LabeledVectors concatenate(const LabeledVectors& first, const LabeledVectors& second) {
  if (first.size() > 0 && second.size() > 0 && first.dim() != second.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "cannot concatenate splits of different dimension");
  }
  LabeledVectors out;
  out.x.resize(first.size() > 0 ? first.dim() : second.dim(), first.size() + second.size());
  out.x << first.x, second.x;
  out.y = first.y;
  out.y.insert(out.y.end(), second.y.begin(), second.y.end());
  out.ids = first.ids;
  out.ids.insert(out.ids.end(), second.ids.begin(), second.ids.end());
  return out;
}

LinearModel train_linear_svm(const LabeledVectors& data, double c, int epochs, std::uint64_t seed) {
  check_shape(data);
  if (!(c > 0.0)) throw Error(ErrorCode::kInvalidArgument, "C must be positive");
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be positive");
  const auto positives = std::count(data.y.begin(), data.y.end(), 1);
  if (positives == 0 || positives == data.size()) {
    throw Error(ErrorCode::kSingleClass, "training data needs both classes");
  }

  const Index n = data.size();
  const Index dim = data.dim();
  const double lambda = 1.0 / (c * static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim + 1);  // last coordinate is the bias
  Eigen::VectorXd example(dim + 1);
  std::vector<Index> order(static_cast<std::size_t>(n));
  double t = 0.0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Index{0});
    Random(derive_seed(seed, static_cast<std::uint64_t>(epoch))).shuffle(std::span<Index>(order));
    for (Index i : order) {
      t += 1.0;
      const double eta = 1.0 / (lambda * t);
      const double y = data.y[static_cast<std::size_t>(i)];
      example.head(dim) = data.x.col(i);
      example[dim] = 1.0;
      const double margin = y * w.dot(example);
      w *= 1.0 - eta * lambda;
      if (margin < 1.0) w += (eta * y) * example;
      const double norm = w.norm();
      if (norm > radius) w *= radius / norm;
    }
  }

  LinearModel model;
  model.weights = w.head(dim);
  model.bias = w[dim];
  model.c_used = c;
  model.train_meta = {epochs, seed, -1.0};
  return model;
}

double accuracy(const LinearModel& model, const LabeledVectors& data) {
  check_shape(data);
  if (data.size() == 0) throw Error(ErrorCode::kInsufficientData, "accuracy of an empty split");
  if (data.dim() != model.weights.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "model dimension " + std::to_string(model.weights.size()) +
                                                   ", data dimension " + std::to_string(data.dim()));
  }
  Index correct = 0;
  for (Index i = 0; i < data.size(); ++i) {
    if (model.predict(data.x.col(i)) == data.y[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TransferResult tune_and_evaluate(const LabeledVectors& train, const LabeledVectors& val, const LabeledVectors& test,
                                 std::span<const double> grid, int epochs, std::uint64_t seed) {
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "empty C grid");
  std::set<std::string> seen;
  for (const auto* split : {&train, &val, &test}) {
    for (const auto& id : split->ids) {
      if (!seen.insert(id).second) throw Error(ErrorCode::kInvalidArgument, "id '" + id + "' appears in two splits");
    }
  }

  TransferResult result;
  double best_accuracy = -1.0;
  double best_c = 0.0;
  for (double c : grid) {
    const double val_accuracy = accuracy(train_linear_svm(train, c, epochs, seed), val);
    result.grid.push_back({c, val_accuracy});
    if (val_accuracy > best_accuracy || (val_accuracy == best_accuracy && c < best_c)) {
      best_accuracy = val_accuracy;
      best_c = c;
    }
  }
  result.model = train_linear_svm(concatenate(train, val), best_c, epochs, seed);
  result.model.train_meta.val_accuracy = best_accuracy;
  result.test_accuracy = accuracy(result.model, test);
  return result;
}

TransferSplits make_transfer_splits(const EmbeddingSet<double>& embeddings, const LabeledDataset& dataset,
                                    LevelPair train_pair, LevelPair test_pair, double val_fraction,
                                    std::uint64_t seed) {
  for (auto pair : {train_pair, test_pair}) {
    dataset.level_name(pair.easier);
    dataset.level_name(pair.harder);
    if (pair.easier >= pair.harder) {
      throw Error(ErrorCode::kInvalidArgument, "level pair must be ordered easier < harder");
    }
  }
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "validation fraction must lie in (0, 1)");
  }

  // Items per level, ordered by id so the split does not depend on file order.
  std::vector<std::vector<std::pair<std::string, Index>>> by_level(dataset.level_names().size());
  for (const auto& label : dataset.labels()) {
    auto position = embeddings.find(label.id);
    if (!position) throw Error(ErrorCode::kUnknownId, "no embedding for '" + label.id + "'");
    by_level[static_cast<std::size_t>(label.level)].emplace_back(label.id, *position);
  }
  for (auto& items : by_level) std::sort(items.begin(), items.end());

  // One shuffle per level, so both halves of a shared level come from the same
  // permutation.
  Random random(seed);
  for (auto& items : by_level) random.shuffle(std::span(items));
  auto shuffled = [&](int level) { return by_level[static_cast<std::size_t>(level)]; };

  using Items = std::vector<std::pair<std::string, Index>>;
  auto side = [&](LevelPair own, LevelPair other, bool first_half, Items& easier, Items& harder) {
    for (int level : {own.easier, own.harder}) {
      Items items = shuffled(level);
      if (level == other.easier || level == other.harder) {
        const auto half = static_cast<std::ptrdiff_t>(items.size() / 2);
        items = first_half ? Items(items.begin(), items.begin() + half) : Items(items.begin() + half, items.end());
      }
      (level == own.easier ? easier : harder) = std::move(items);
    }
  };

  auto assemble = [&](const Items& easier, const Items& harder) {
    LabeledVectors out;
    out.x.resize(embeddings.dim(), static_cast<Index>(easier.size() + harder.size()));
    Index column = 0;
    for (const auto* items : {&easier, &harder}) {
      const int label = items == &easier ? -1 : 1;
      for (const auto& [id, position] : *items) {
        out.x.col(column++) = embeddings.vector(position);
        out.y.push_back(label);
        out.ids.push_back(id);
      }
    }
    return out;
  };

  Items train_easier, train_harder, test_easier, test_harder;
  side(train_pair, test_pair, true, train_easier, train_harder);
  side(test_pair, train_pair, false, test_easier, test_harder);

  for (const auto* items : {&train_easier, &train_harder}) {
    if (items->size() < 2) {
      throw Error(ErrorCode::kInsufficientData, "training pair needs at least 2 items per level");
    }
  }
  if (test_easier.empty() || test_harder.empty()) {
    throw Error(ErrorCode::kInsufficientData, "test pair has an empty level");
  }

  // Stratified split: the first round(fraction * n) items of each (already
  // shuffled) class go to validation, at least one and leaving one to train.
  auto split = [&](const Items& items, Items& fit, Items& held_out) {
    auto n_val = static_cast<std::size_t>(std::lround(val_fraction * static_cast<double>(items.size())));
    n_val = std::clamp<std::size_t>(n_val, 1, items.size() - 1);
    held_out.assign(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(n_val));
    fit.assign(items.begin() + static_cast<std::ptrdiff_t>(n_val), items.end());
  };
  Items fit_easier, val_easier, fit_harder, val_harder;
  split(train_easier, fit_easier, val_easier);
  split(train_harder, fit_harder, val_harder);

  return {assemble(fit_easier, fit_harder), assemble(val_easier, val_harder), assemble(test_easier, test_harder)};
}

}  // namespace diffcone
