#include "diffcone/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace diffcone {

namespace {

std::string line_tag(std::size_t line) { return "line " + std::to_string(line); }

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < s.size()) {
    pos = s.find_first_not_of(" \t\r", pos);
    if (pos == std::string_view::npos) break;
    const auto end = std::min(s.find_first_of(" \t\r", pos), s.size());
    fields.push_back(s.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

// Locale-independent.
std::optional<double> parse_double(std::string_view text) {
  double value = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<long long> parse_integer(std::string_view text) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  return in;
}

void check_dim(std::optional<Index>& dim, Index found, std::size_t line) {
  if (!dim) {
    dim = found;
  } else if (*dim != found) {
    throw Error(ErrorCode::kDimensionMismatch,
                line_tag(line) + ": expected " + std::to_string(*dim) + " values, found " + std::to_string(found));
  }
}

struct Rows {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> values;
  std::optional<Index> dim;
};

Rows parse_jsonl(std::istream& in, std::optional<Index> declared_dim) {
  Rows rows;
  rows.dim = declared_dim;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      // Optional metadata header; plain comments are ignored.
      auto meta = nlohmann::json::parse(trim(text.substr(1)), nullptr, false);
      if (!meta.is_discarded() && meta.is_object() && meta.contains("dim") && !declared_dim) {
        if (!meta["dim"].is_number_integer() || meta["dim"].get<long long>() < 1) {
          throw Error(ErrorCode::kParseError, line_tag(line_no) + ": bad \"dim\" in header");
        }
        rows.dim = meta["dim"].get<Index>();
      }
      continue;
    }
    auto row = nlohmann::json::parse(text, nullptr, false);
    if (row.is_discarded() || !row.is_object()) {
      throw Error(ErrorCode::kParseError, line_tag(line_no) + ": not a JSON object");
    }
    auto id = row.find("id");
    auto vector = row.find("vector");
    if (id == row.end() || !id->is_string() || vector == row.end() || !vector->is_array()) {
      throw Error(ErrorCode::kParseError, line_tag(line_no) + ": expected {\"id\": string, \"vector\": [...]}");
    }
    std::vector<double> values;
    values.reserve(vector->size());
    for (const auto& v : *vector) {
      if (!v.is_number()) throw Error(ErrorCode::kParseError, line_tag(line_no) + ": non-numeric vector entry");
      values.push_back(v.get<double>());
    }
    check_dim(rows.dim, static_cast<Index>(values.size()), line_no);
    rows.ids.push_back(id->get<std::string>());
    rows.values.push_back(std::move(values));
  }
  return rows;
}

Rows parse_word2vec(std::istream& in, std::optional<Index> declared_dim) {
  Rows rows;
  std::string line;
  std::size_t line_no = 0;
  long long expected_rows = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (expected_rows < 0) {
      const auto n = fields.size() == 2 ? parse_integer(fields[0]) : std::nullopt;
      const auto d = fields.size() == 2 ? parse_integer(fields[1]) : std::nullopt;
      if (!n || !d || *n < 0 || *d < 1) {
        throw Error(ErrorCode::kParseError, line_tag(line_no) + ": expected header \"N D\"");
      }
      expected_rows = *n;
      rows.dim = static_cast<Index>(*d);
      if (declared_dim && *declared_dim != rows.dim) {
        throw Error(ErrorCode::kDimensionMismatch, line_tag(line_no) + ": header declares " +
                                                       std::to_string(*rows.dim) + ", expected " +
                                                       std::to_string(*declared_dim));
      }
      continue;
    }
    check_dim(rows.dim, static_cast<Index>(fields.size()) - 1, line_no);
    std::vector<double> values;
    values.reserve(fields.size() - 1);
    for (std::size_t f = 1; f < fields.size(); ++f) {
      auto value = parse_double(fields[f]);
      if (!value) {
        throw Error(ErrorCode::kParseError, line_tag(line_no) + ": bad number '" + std::string(fields[f]) + "'");
      }
      values.push_back(*value);
    }
    rows.ids.emplace_back(fields[0]);
    rows.values.push_back(std::move(values));
  }
  if (expected_rows >= 0 && static_cast<long long>(rows.ids.size()) != expected_rows) {
    throw Error(ErrorCode::kParseError, "header declares " + std::to_string(expected_rows) + " rows, found " +
                                            std::to_string(rows.ids.size()));
  }
  return rows;
}

}  // namespace

EmbeddingFormat guess_format(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".txt" || ext == ".vec" || ext == ".w2v") return EmbeddingFormat::kWord2VecText;
  return EmbeddingFormat::kJsonLines;
}

EmbeddingSet<double> parse_embeddings(std::istream& in, EmbeddingFormat format, std::optional<Index> declared_dim,
                                      NormPolicy policy) {
  Rows rows = format == EmbeddingFormat::kJsonLines ? parse_jsonl(in, declared_dim) : parse_word2vec(in, declared_dim);
  if (rows.ids.empty()) throw Error(ErrorCode::kEmptyFile, "no vectors");

  std::set<std::string_view> seen;
  for (const auto& id : rows.ids) {
    if (id.empty()) throw Error(ErrorCode::kParseError, "empty id");
    if (!seen.insert(id).second) throw Error(ErrorCode::kDuplicateId, id);
  }

  Eigen::MatrixXd vectors(*rows.dim, static_cast<Index>(rows.ids.size()));
  for (std::size_t i = 0; i < rows.values.size(); ++i) {
    vectors.col(static_cast<Index>(i)) = Eigen::Map<const Eigen::VectorXd>(rows.values[i].data(), *rows.dim);
  }
  return EmbeddingSet<double>(std::move(rows.ids), std::move(vectors), policy);
}

EmbeddingSet<double> read_embeddings(const RawEmbeddingFile& file, NormPolicy policy) {
  auto in = open(file.path);
  try {
    return parse_embeddings(in, file.format, file.declared_dim, policy);
  } catch (const Error& e) {
    throw Error(e.code(), file.path.string() + ": " + e.message());
  }
}

std::string format_shortest(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

void write_embeddings_jsonl(std::ostream& out, const EmbeddingSet<double>& embeddings, std::string_view header) {
  if (!header.empty()) out << "# " << header << '\n';
  for (Index i = 0; i < embeddings.size(); ++i) {
    out << "{\"id\":" << nlohmann::json(embeddings.id(i)).dump() << ",\"vector\":[";
    for (Index d = 0; d < embeddings.dim(); ++d) {
      if (d > 0) out << ',';
      out << format_shortest(embeddings.vectors()(d, i));
    }
    out << "]}\n";
  }
}

std::vector<std::string> parse_level_order(std::istream& in) {
  std::vector<std::string> names;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto name = trim(line);
    if (name.empty()) continue;
    if (!seen.emplace(name).second) {
      throw Error(ErrorCode::kParseError, line_tag(line_no) + ": level '" + std::string(name) + "' repeated");
    }
    names.emplace_back(name);
  }
  if (names.empty()) throw Error(ErrorCode::kEmptyFile, "level order lists no levels");
  return names;
}

std::vector<std::string> read_level_order(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_level_order(in);
}

LabeledDataset parse_labels(std::istream& in, std::vector<std::string> level_order) {
  std::map<std::string, int, std::less<>> rank;
  for (std::size_t r = 0; r < level_order.size(); ++r) rank.emplace(level_order[r], static_cast<int>(r));

  std::vector<LabeledDataset::Label> labels;
  std::set<std::string, std::less<>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(ErrorCode::kParseError, line_tag(line_no) + ": expected id<TAB>level");
    const std::string id(trim(std::string_view(line).substr(0, tab)));
    const auto level = trim(std::string_view(line).substr(tab + 1));
    if (id.empty()) throw Error(ErrorCode::kParseError, line_tag(line_no) + ": empty id");
    auto it = rank.find(level);
    if (it == rank.end()) throw Error(ErrorCode::kUnknownLevel, line_tag(line_no) + ": '" + std::string(level) + "'");
    if (!seen.insert(id).second) throw Error(ErrorCode::kDuplicateId, line_tag(line_no) + ": '" + id + "'");
    labels.push_back({id, it->second});
  }
  if (labels.empty()) throw Error(ErrorCode::kEmptyFile, "no labels");
  return LabeledDataset(std::move(level_order), std::move(labels));
}

LabeledDataset read_labels(const std::filesystem::path& labels, const std::filesystem::path& level_order) {
  auto order = read_level_order(level_order);
  auto in = open(labels);
  return parse_labels(in, std::move(order));
}

void write_level_order(std::ostream& out, const LabeledDataset& dataset) {
  for (const auto& name : dataset.level_names()) out << name << '\n';
}

void write_labels(std::ostream& out, const LabeledDataset& dataset) {
  for (const auto& label : dataset.labels()) out << label.id << '\t' << dataset.level_name(label.level) << '\n';
}

JoinResult join(const EmbeddingSet<double>& embeddings, const LabeledDataset& labels, OnMissing on_missing) {
  JoinResult result;
  std::vector<LabeledDataset::Label> kept;
  for (const auto& label : labels.labels()) {
    if (embeddings.find(label.id)) {
      kept.push_back(label);
    } else {
      result.labels_without_embedding.push_back(label.id);
    }
  }
  std::sort(result.labels_without_embedding.begin(), result.labels_without_embedding.end());
  if (on_missing == OnMissing::kError && !result.labels_without_embedding.empty()) {
    throw Error(ErrorCode::kUnknownId, std::to_string(result.labels_without_embedding.size()) +
                                           " labelled ids have no embedding, first '" +
                                           result.labels_without_embedding.front() + "'");
  }
  std::sort(kept.begin(), kept.end(), [](const auto& l, const auto& r) { return l.id < r.id; });

  std::vector<Index> positions;
  positions.reserve(kept.size());
  for (const auto& label : kept) positions.push_back(*embeddings.find(label.id));
  for (Index i = 0; i < embeddings.size(); ++i) {
    if (!labels.level_of(embeddings.id(i))) result.embeddings_without_label.push_back(embeddings.id(i));
  }
  std::sort(result.embeddings_without_label.begin(), result.embeddings_without_label.end());

  result.embeddings = embeddings.subset(positions);
  result.dataset = LabeledDataset(labels.level_names(), std::move(kept));
  return result;
}

ValueTable parse_values(std::istream& in) {
  ValueTable table;
  std::string line;
  std::size_t line_no = 0;
  std::optional<bool> keyed;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto fields = split_whitespace(line);
    const bool has_id = fields.size() == 2;
    if (fields.size() > 2 || (keyed && *keyed != has_id)) {
      throw Error(ErrorCode::kParseError, line_tag(line_no) + ": expected \"id<TAB>value\" or a bare value throughout");
    }
    keyed = has_id;
    auto value = parse_double(fields.back());
    if (!value) throw Error(ErrorCode::kParseError, line_tag(line_no) + ": bad number '" + std::string(fields.back()) + "'");
    if (has_id) table.ids.emplace_back(fields[0]);
    table.values.push_back(*value);
  }
  if (table.values.empty()) throw Error(ErrorCode::kEmptyFile, "no values");
  return table;
}

ValueTable read_values(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_values(in);
}

}  // namespace diffcone
