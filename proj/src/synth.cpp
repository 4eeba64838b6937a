#include "diffcone/synth.hpp"

#include <cmath>
#include <cstdio>

#include "diffcone/random.hpp"

namespace diffcone {

std::vector<double> ConeSpec::resolved_offsets() const {
  if (!offsets.empty()) return offsets;
  const std::size_t levels = level_count();
  std::vector<double> out(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    out[l] = levels == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(l) / static_cast<double>(levels - 1);
  }
  return out;
}

void ConeSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidSpec, what); };
  if (dim < 1) fail("dimension must be at least 1");
  if (level_count() < 2) fail("need at least 2 levels");
  if (spreads.size() != level_count()) fail("one spread per level required");
  if (!offsets.empty() && offsets.size() != level_count()) fail("one offset per level required");
  if (!(latent_jitter >= 0.0)) fail("latent jitter must be non-negative");
  const auto resolved = resolved_offsets();
  for (std::size_t l = 0; l < level_count(); ++l) {
    if (counts[l] < 1) fail("every level needs at least one item");
    if (!(spreads[l] >= 0.0)) fail("spreads must be non-negative");
    if (l > 0 && !(resolved[l] > resolved[l - 1])) fail("offsets must be strictly increasing");
    if (l > 0 && spreads[l] < spreads[l - 1]) fail("spreads must be non-decreasing");
    if (spreads[l] == 0.0 && std::abs(resolved[l]) <= latent_jitter) {
      fail("level " + std::to_string(l) + " can produce a zero vector");
    }
  }
}

ConeSpec scale_spreads(ConeSpec spec, double factor) {
  for (double& s : spec.spreads) s *= factor;
  return spec;
}

SyntheticData generate(const ConeSpec& spec) {
  spec.validate();
  const auto offsets = spec.resolved_offsets();

  Random direction_stream(spec.direction_seed);
  Eigen::VectorXd direction(spec.dim);
  for (Index d = 0; d < spec.dim; ++d) direction[d] = direction_stream.gaussian();
  direction.normalize();

  Index total = 0;
  for (Index n : spec.counts) total += n;

  Eigen::MatrixXd vectors(spec.dim, total);
  std::vector<std::string> ids;
  std::vector<LabeledDataset::Label> labels;
  std::vector<double> latent;
  ids.reserve(static_cast<std::size_t>(total));
  latent.reserve(static_cast<std::size_t>(total));

  Index k = 0;
  for (std::size_t level = 0; level < spec.level_count(); ++level) {
    for (Index i = 0; i < spec.counts[level]; ++i, ++k) {
      Random stream(derive_seed(spec.noise_seed, static_cast<std::uint64_t>(k)));
      const double t = offsets[level] + spec.latent_jitter * (2.0 * stream.uniform() - 1.0);
      auto column = vectors.col(k);
      for (Index d = 0; d < spec.dim; ++d) column[d] = spec.spreads[level] * stream.gaussian();
      column += t * direction;
      column.normalize();

      char id[32];
      std::snprintf(id, sizeof id, "item%05ld", static_cast<long>(k));
      ids.emplace_back(id);
      labels.push_back({ids.back(), static_cast<int>(level)});
      latent.push_back(t);
    }
  }

  std::vector<std::string> level_names;
  for (std::size_t l = 0; l < spec.level_count(); ++l) level_names.push_back("L" + std::to_string(l + 1));

  return {EmbeddingSet<double>(std::move(ids), std::move(vectors), NormPolicy::kAssertUnit),
          LabeledDataset(std::move(level_names), std::move(labels)), std::move(direction), std::move(latent)};
}

}  // namespace diffcone
