#include "diffcone/model.hpp"

#include <algorithm>
#include <set>

namespace diffcone {

ItemIndex::ItemIndex(std::vector<std::string> ids) : ids_(std::move(ids)) {
  positions_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i].empty()) {
      throw Error(ErrorCode::kInvalidArgument, "empty item id at position " + std::to_string(i));
    }
    if (!positions_.emplace(ids_[i], static_cast<Index>(i)).second) {
      throw Error(ErrorCode::kDuplicateId, ids_[i]);
    }
  }
}

std::optional<Index> ItemIndex::find(std::string_view id) const {
  auto it = positions_.find(std::string(id));
  if (it == positions_.end()) return std::nullopt;
  return it->second;
}

LabeledDataset::LabeledDataset(std::vector<std::string> level_names, std::vector<Label> labels)
    : level_names_(std::move(level_names)), labels_(std::move(labels)) {
  std::set<std::string_view> seen_names;
  for (const auto& name : level_names_) {
    if (name.empty()) throw Error(ErrorCode::kInvalidArgument, "empty level name");
    if (!seen_names.insert(name).second) {
      throw Error(ErrorCode::kInvalidArgument, "level '" + name + "' listed twice");
    }
  }
  level_by_id_.reserve(labels_.size());
  for (const auto& label : labels_) {
    if (label.id.empty()) throw Error(ErrorCode::kInvalidArgument, "empty label id");
    if (label.level < 0 || static_cast<std::size_t>(label.level) >= level_names_.size()) {
      throw Error(ErrorCode::kUnknownLevel,
                  "rank " + std::to_string(label.level) + " for '" + label.id + "'");
    }
    if (!level_by_id_.emplace(label.id, label.level).second) {
      throw Error(ErrorCode::kDuplicateId, label.id);
    }
  }
}

std::optional<int> LabeledDataset::level_of(std::string_view id) const {
  auto it = level_by_id_.find(std::string(id));
  if (it == level_by_id_.end()) return std::nullopt;
  return it->second;
}

int LabeledDataset::rank_of(std::string_view level_name) const {
  auto it = std::find(level_names_.begin(), level_names_.end(), level_name);
  if (it == level_names_.end()) throw Error(ErrorCode::kUnknownLevel, std::string(level_name));
  return static_cast<int>(it - level_names_.begin());
}

const std::string& LabeledDataset::level_name(int rank) const {
  if (rank < 0 || static_cast<std::size_t>(rank) >= level_names_.size()) {
    throw Error(ErrorCode::kUnknownLevel, "rank " + std::to_string(rank));
  }
  return level_names_[static_cast<std::size_t>(rank)];
}

std::vector<int> LabeledDataset::present_levels() const {
  std::set<int> levels;
  for (const auto& label : labels_) levels.insert(label.level);
  return {levels.begin(), levels.end()};
}

std::size_t LabeledDataset::count(int level) const {
  return static_cast<std::size_t>(std::count_if(
      labels_.begin(), labels_.end(), [level](const Label& l) { return l.level == level; }));
}

LabeledDataset LabeledDataset::restricted_to_levels(std::span<const int> levels) const {
  std::vector<Label> kept;
  for (const auto& label : labels_) {
    if (std::find(levels.begin(), levels.end(), label.level) != levels.end()) kept.push_back(label);
  }
  return LabeledDataset(level_names_, std::move(kept));
}

std::string describe(const ConstraintMode& mode, const LabeledDataset* dataset) {
  auto name = [dataset](int rank) {
    return dataset != nullptr ? dataset->level_name(rank) : std::to_string(rank);
  };
  struct Visitor {
    decltype(name)& level;
    std::string operator()(const AllCrossLevel&) const { return "all"; }
    std::string operator()(const AdjacentLevels&) const { return "adjacent"; }
    std::string operator()(const LevelPair& p) const {
      return "pair:" + level(p.easier) + ":" + level(p.harder);
    }
    std::string operator()(const PerItem& p) const { return "item:" + p.anchor_id; }
    std::string operator()(const ExplicitPairs&) const { return "explicit"; }
  };
  return std::visit(Visitor{name}, mode);
}

namespace {

void check_rank(const LabeledDataset& dataset, int rank) {
  if (rank < 0 || static_cast<std::size_t>(rank) >= dataset.level_names().size()) {
    throw Error(ErrorCode::kUnknownLevel, "rank " + std::to_string(rank));
  }
}

void cross(const std::vector<Index>& easier, const std::vector<Index>& harder,
           std::vector<OrderPair>& out) {
  for (Index i : easier) {
    for (Index j : harder) out.push_back({i, j});
  }
}

}  // namespace

ConstraintSet build_constraints(const LabeledDataset& dataset, const ItemIndex& items,
                                const ConstraintMode& mode) {
  const std::size_t level_count = dataset.level_names().size();
  std::vector<std::vector<Index>> by_level(level_count);
  for (const auto& label : dataset.labels()) {
    auto position = items.find(label.id);
    if (!position) throw Error(ErrorCode::kUnknownId, "no embedding for '" + label.id + "'");
    by_level[static_cast<std::size_t>(label.level)].push_back(*position);
  }

  const std::vector<int> present = dataset.present_levels();
  if (present.size() < 2) {
    throw Error(ErrorCode::kSingleLevel,
                "need at least 2 distinct levels, found " + std::to_string(present.size()));
  }

  ConstraintSet out;
  out.mode = mode;
  auto& pairs = out.pairs;

  if (std::holds_alternative<AllCrossLevel>(mode)) {
    for (std::size_t a = 0; a < present.size(); ++a) {
      for (std::size_t b = a + 1; b < present.size(); ++b) {
        cross(by_level[present[a]], by_level[present[b]], pairs);
      }
    }
  } else if (std::holds_alternative<AdjacentLevels>(mode)) {
    // Adjacency is over the levels present in the dataset, so an unused level
    // in the order file does not disconnect its neighbours.
    for (std::size_t a = 0; a + 1 < present.size(); ++a) {
      cross(by_level[present[a]], by_level[present[a + 1]], pairs);
    }
  } else if (const auto* pair = std::get_if<LevelPair>(&mode)) {
    check_rank(dataset, pair->easier);
    check_rank(dataset, pair->harder);
    if (pair->easier >= pair->harder) {
      throw Error(ErrorCode::kInvalidArgument, "level pair must be ordered easier < harder");
    }
    cross(by_level[pair->easier], by_level[pair->harder], pairs);
  } else if (const auto* item = std::get_if<PerItem>(&mode)) {
    auto anchor_level = dataset.level_of(item->anchor_id);
    if (!anchor_level) throw Error(ErrorCode::kUnknownId, "anchor '" + item->anchor_id + "' has no label");
    const Index anchor = *items.find(item->anchor_id);
    for (int level : present) {
      if (level < *anchor_level) {
        for (Index i : by_level[level]) pairs.push_back({i, anchor});
      } else if (level > *anchor_level) {
        for (Index j : by_level[level]) pairs.push_back({anchor, j});
      }
    }
  } else {
    throw Error(ErrorCode::kInvalidArgument, "explicit pair lists are not built from labels");
  }

  if (pairs.empty()) {
    throw Error(ErrorCode::kEmptyConstraintSet, "mode " + describe(mode, &dataset) + " yields no pairs");
  }
  std::sort(pairs.begin(), pairs.end());
  return out;
}

ValidationReport validate(const ConstraintSet& constraints, Index item_count) {
  ValidationReport report;
  std::set<OrderPair> seen;
  std::vector<std::vector<Index>> successors(static_cast<std::size_t>(std::max<Index>(item_count, 0)));

  for (std::size_t k = 0; k < constraints.pairs.size(); ++k) {
    const auto& p = constraints.pairs[k];
    if (p.easier < 0 || p.harder < 0 || p.easier >= item_count || p.harder >= item_count) {
      report.out_of_bounds.push_back(k);
      continue;
    }
    if (p.easier == p.harder) {
      report.self_loops.push_back(k);
      continue;
    }
    if (!seen.insert(p).second) {
      report.duplicates.push_back(k);
      continue;
    }
    successors[static_cast<std::size_t>(p.easier)].push_back(p.harder);
  }

  // Iterative three-colour DFS; the first back edge yields the cycle.
  enum : char { kWhite, kGrey, kBlack };
  std::vector<char> colour(successors.size(), kWhite);
  std::vector<Index> parent(successors.size(), -1);
  for (std::size_t root = 0; root < successors.size() && report.cycle.empty(); ++root) {
    if (colour[root] != kWhite || successors[root].empty()) continue;
    std::vector<std::pair<Index, std::size_t>> stack{{static_cast<Index>(root), 0}};
    colour[root] = kGrey;
    while (!stack.empty() && report.cycle.empty()) {
      auto& [node, next] = stack.back();
      const auto& out = successors[static_cast<std::size_t>(node)];
      if (next == out.size()) {
        colour[static_cast<std::size_t>(node)] = kBlack;
        stack.pop_back();
        continue;
      }
      const Index child = out[next++];
      const auto c = static_cast<std::size_t>(child);
      if (colour[c] == kWhite) {
        colour[c] = kGrey;
        parent[c] = node;
        stack.emplace_back(child, 0);
      } else if (colour[c] == kGrey) {
        for (Index v = node; v != child; v = parent[static_cast<std::size_t>(v)]) {
          report.cycle.push_back(v);
        }
        report.cycle.push_back(child);
        std::reverse(report.cycle.begin(), report.cycle.end());
      }
    }
  }
  return report;
}

}  // namespace diffcone
