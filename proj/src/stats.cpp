#include "diffcone/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "diffcone/random.hpp"

namespace diffcone {

std::vector<double> mid_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
  std::vector<double> ranks(values.size());
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() && values[order[end]] == values[order[start]]) ++end;
    // Positions start..end-1 hold ranks start+1..end.
    const double rank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) ranks[order[k]] = rank;
    start = end;
  }
  return ranks;
}

namespace {

void check_inputs(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  if (a.size() < 3) {
    throw Error(ErrorCode::kInsufficientData, "need at least 3 samples, got " + std::to_string(a.size()));
  }
  for (auto values : {a, b}) {
    if (std::any_of(values.begin(), values.end(), [](double v) { return !std::isfinite(v); })) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite sample");
    }
    if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; })) {
      throw Error(ErrorCode::kConstantInput, "rank correlation undefined for constant input");
    }
  }
}

std::vector<double> centred(std::vector<double> ranks) {
  const double mean = std::accumulate(ranks.begin(), ranks.end(), 0.0) / static_cast<double>(ranks.size());
  for (double& r : ranks) r -= mean;
  return ranks;
}

double sum_squares(const std::vector<double>& v) {
  return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

double correlation(const std::vector<double>& ca, const std::vector<double>& cb, double scale) {
  const double rho = std::inner_product(ca.begin(), ca.end(), cb.begin(), 0.0) / scale;
  return std::clamp(rho, -1.0, 1.0);
}

}  // namespace

double spearman_rho(std::span<const double> a, std::span<const double> b) {
  check_inputs(a, b);
  const auto ca = centred(mid_ranks(a));
  const auto cb = centred(mid_ranks(b));
  return correlation(ca, cb, std::sqrt(sum_squares(ca) * sum_squares(cb)));
}

CorrelationResult permutation_pvalue(std::span<const double> a, std::span<const double> b, int n_perm,
                                     std::uint64_t seed) {
  check_inputs(a, b);
  if (n_perm < 100) throw Error(ErrorCode::kInvalidArgument, "n_perm must be at least 100");

  const auto ca = centred(mid_ranks(a));
  auto cb = centred(mid_ranks(b));
  const double scale = std::sqrt(sum_squares(ca) * sum_squares(cb));

  CorrelationResult result;
  result.rho = correlation(ca, cb, scale);
  result.n = a.size();
  result.method = {n_perm, seed};

  // Sums over permuted operands may differ from the observed one in the last
  // bits; equal-magnitude statistics must still count as extreme.
  const double threshold = std::abs(result.rho) - 1e-12;
  Random random(seed);
  long extreme = 0;
  for (int t = 0; t < n_perm; ++t) {
    random.shuffle(std::span<double>(cb));
    if (std::abs(correlation(ca, cb, scale)) >= threshold) ++extreme;
  }
  result.p_value = static_cast<double>(1 + extreme) / static_cast<double>(1 + n_perm);

  double permutations = 1.0;
  for (std::size_t k = 2; k <= result.n && permutations <= n_perm; ++k) permutations *= static_cast<double>(k);
  result.low_resolution = permutations <= n_perm;
  return result;
}

std::vector<RankedModel> rank_models(std::span<const CompatibilityReport<double>> reports, LevelPair levels) {
  std::vector<RankedModel> ranked;
  ranked.reserve(reports.size());
  for (const auto& report : reports) {
    const auto* entry = report.find(levels);
    if (entry == nullptr) {
      throw Error(ErrorCode::kMissingPair, "model '" + report.model_name + "' has no entry for (" +
                                               std::to_string(levels.easier) + ", " +
                                               std::to_string(levels.harder) + ")");
    }
    ranked.push_back({report.model_name, entry->score, report.dim, false});
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedModel& l, const RankedModel& r) {
    if (l.score != r.score) return l.score > r.score;
    return l.model_name < r.model_name;
  });
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    ranked[k].tied = (k > 0 && ranked[k - 1].score == ranked[k].score) ||
                     (k + 1 < ranked.size() && ranked[k + 1].score == ranked[k].score);
  }
  return ranked;
}

}  // namespace diffcone
