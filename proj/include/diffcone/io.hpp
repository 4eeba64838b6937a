#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "diffcone/model.hpp"

namespace diffcone {

enum class EmbeddingFormat { kJsonLines, kWord2VecText };

// JsonLines: one {"id": string, "vector": [numbers]} object per line. Lines
// starting with '#' are comments; a comment holding a JSON object with a
// "dim" key declares the dimension (e.g. `# {"model": "m", "dim": 384}`).
//
// Word2VecText: header "N D", then N lines "token v1 ... vD".
struct RawEmbeddingFile {
  std::filesystem::path path;
  EmbeddingFormat format = EmbeddingFormat::kJsonLines;
  std::optional<Index> declared_dim;
};

// .txt/.vec/.w2v are read as Word2VecText, everything else as JsonLines.
EmbeddingFormat guess_format(const std::filesystem::path& path);

EmbeddingSet<double> read_embeddings(const RawEmbeddingFile& file, NormPolicy policy = NormPolicy::kRenormalize);
EmbeddingSet<double> parse_embeddings(std::istream& in, EmbeddingFormat format,
                                      std::optional<Index> declared_dim = std::nullopt,
                                      NormPolicy policy = NormPolicy::kRenormalize);

// Shortest decimal form that parses back to the same double.
std::string format_shortest(double value);

// Canonical JsonLines; `header`, when non-empty, becomes a leading '#' line.
void write_embeddings_jsonl(std::ostream& out, const EmbeddingSet<double>& embeddings,
                            std::string_view header = {});

std::vector<std::string> parse_level_order(std::istream& in);
std::vector<std::string> read_level_order(const std::filesystem::path& path);

// Tab-separated "id<TAB>level_name" lines.
LabeledDataset parse_labels(std::istream& in, std::vector<std::string> level_order);
LabeledDataset read_labels(const std::filesystem::path& labels, const std::filesystem::path& level_order);

void write_level_order(std::ostream& out, const LabeledDataset& dataset);
void write_labels(std::ostream& out, const LabeledDataset& dataset);

enum class OnMissing { kError, kDropWithWarning };

struct JoinResult {
  EmbeddingSet<double> embeddings;
  LabeledDataset dataset;
  std::vector<std::string> labels_without_embedding;
  std::vector<std::string> embeddings_without_label;
};

// Restricts both sides to their shared ids, ordered by id. Throws kUnknownId
// under OnMissing::kError when a labelled id has no embedding.
JoinResult join(const EmbeddingSet<double>& embeddings, const LabeledDataset& labels, OnMissing on_missing);

// Per-item reference values: "id<TAB>value" lines, or one bare value per line.
struct ValueTable {
  std::vector<std::string> ids;  // empty for bare values
  std::vector<double> values;

  bool keyed() const { return !ids.empty(); }
};

ValueTable parse_values(std::istream& in);
ValueTable read_values(const std::filesystem::path& path);

}  // namespace diffcone
