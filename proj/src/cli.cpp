#include "diffcone/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "diffcone/baseline.hpp"
#include "diffcone/io.hpp"
#include "diffcone/random.hpp"
#include "diffcone/report.hpp"
#include "diffcone/solver.hpp"
#include "diffcone/stats.hpp"
#include "diffcone/synth.hpp"

namespace diffcone {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

class Log {
 public:
  Log(std::ostream& err, const bool& verbose) : err_(err), verbose_(verbose) {}

  void stage(const std::string& message) const {
    if (verbose_) err_ << "[diffcone] " << message << '\n';
  }
  void warn(const std::string& message) const { err_ << "warning: " << message << '\n'; }

 private:
  std::ostream& err_;
  const bool& verbose_;
};

struct InputOptions {
  std::string embeddings;
  std::string embedding_format = "auto";
  std::string norm = "renormalize";
  std::string labels;
  std::string level_order;
  bool drop_missing = false;
};

struct OutputOptions {
  std::string format;
  std::string out;
  int precision = -1;
};

void add_label_options(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("--labels", in.labels, "Tab-separated id<TAB>level file")->required();
  cmd->add_option("--level-order", in.level_order, "Level names, one per line, easiest first")->required();
  cmd->add_flag("--drop-missing", in.drop_missing, "Drop labelled ids without an embedding instead of failing");
}

void add_embedding_format_options(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("--embedding-format", in.embedding_format, "auto, jsonl or w2v")
      ->check(CLI::IsMember({"auto", "jsonl", "w2v"}));
  cmd->add_option("--norm", in.norm, "renormalize or assert-unit")
      ->check(CLI::IsMember({"renormalize", "assert-unit"}));
}

void add_input_options(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("--embeddings", in.embeddings, "Embedding file (JsonLines or word2vec text)")->required();
  add_embedding_format_options(cmd, in);
  add_label_options(cmd, in);
}

void add_output_options(CLI::App* cmd, OutputOptions& out, bool with_precision, bool with_json = false) {
  if (with_json) {
    cmd->add_option("--format", out.format, "Output format: table, tsv or json")
        ->check(CLI::IsMember({"table", "tsv", "json"}));
  } else {
    cmd->add_option("--format", out.format, "Output format: table or tsv")->check(CLI::IsMember({"table", "tsv"}));
  }
  cmd->add_option("--out", out.out, "Write output to this file instead of standard output");
  if (with_precision) {
    cmd->add_option("--precision", out.precision, "Fixed decimals for scores (default: 6 significant digits)")
        ->check(CLI::Range(0, 17));
  }
}

void require_files(std::initializer_list<const std::string*> paths) {
  for (const auto* path : paths) {
    if (!path->empty() && !fs::is_regular_file(*path)) {
      throw Error(ErrorCode::kIoError, "input file '" + *path + "' does not exist");
    }
  }
}

std::string resolve_format(const OutputOptions& out, bool terminal, bool allow_json) {
  if (out.format.empty()) return terminal ? "table" : "tsv";
  if (out.format == "json" && !allow_json) throw Error(ErrorCode::kInvalidArgument, "--format json is only supported by fit");
  return out.format;
}

std::string render(const Table& table, const std::string& format) {
  return format == "table" ? table.aligned() : table.tsv();
}

RawEmbeddingFile embedding_file(const std::string& path, const std::string& format) {
  RawEmbeddingFile file{path, guess_format(path), std::nullopt};
  if (format == "jsonl") file.format = EmbeddingFormat::kJsonLines;
  if (format == "w2v") file.format = EmbeddingFormat::kWord2VecText;
  return file;
}

NormPolicy norm_policy(const std::string& name) {
  return name == "assert-unit" ? NormPolicy::kAssertUnit : NormPolicy::kRenormalize;
}

struct Inputs {
  EmbeddingSet<double> embeddings;
  LabeledDataset dataset;
};

Inputs join_inputs(const EmbeddingSet<double>& embeddings, const LabeledDataset& labels, bool drop_missing,
                   const Log& log, const std::string& context = {}) {
  auto joined = join(embeddings, labels, drop_missing ? OnMissing::kDropWithWarning : OnMissing::kError);
  const std::string prefix = context.empty() ? "" : context + ": ";
  if (!joined.labels_without_embedding.empty()) {
    log.warn(prefix + "dropped " + std::to_string(joined.labels_without_embedding.size()) +
             " labelled ids without an embedding");
  }
  if (joined.dataset.empty()) log.warn(prefix + "no labelled item has an embedding");
  log.stage(prefix + "joined " + std::to_string(joined.dataset.size()) + " items (" +
            std::to_string(joined.embeddings_without_label.size()) + " unlabelled embeddings ignored)");
  return {std::move(joined.embeddings), std::move(joined.dataset)};
}

Inputs load_inputs(const InputOptions& in, const Log& log) {
  require_files({&in.embeddings, &in.labels, &in.level_order});
  auto labels = read_labels(in.labels, in.level_order);
  log.stage("read " + std::to_string(labels.size()) + " labels over " + std::to_string(labels.level_names().size()) +
            " levels");
  auto embeddings = read_embeddings(embedding_file(in.embeddings, in.embedding_format), norm_policy(in.norm));
  log.stage("read " + std::to_string(embeddings.size()) + " embeddings of dimension " +
            std::to_string(embeddings.dim()));
  return join_inputs(embeddings, labels, in.drop_missing, log);
}

LevelPair parse_level_pair(const LabeledDataset& dataset, const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "level pair '" + text + "' is not a:b");
  const int easier = dataset.rank_of(text.substr(0, colon));
  const int harder = dataset.rank_of(text.substr(colon + 1));
  if (easier >= harder) {
    throw Error(ErrorCode::kInvalidArgument, "level pair '" + text + "' must list the easier level first");
  }
  return {easier, harder};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream stream(text);
  std::string part;
  while (std::getline(stream, part, ',')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

std::vector<LevelPair> parse_pairs(const LabeledDataset& dataset, const std::string& text) {
  std::vector<LevelPair> pairs;
  if (text == "all") {
    const auto present = dataset.present_levels();
    for (std::size_t a = 0; a < present.size(); ++a) {
      for (std::size_t b = a + 1; b < present.size(); ++b) pairs.push_back({present[a], present[b]});
    }
    if (pairs.empty()) throw Error(ErrorCode::kSingleLevel, "fewer than 2 levels have items");
    return pairs;
  }
  for (const auto& part : split_list(text)) pairs.push_back(parse_level_pair(dataset, part));
  if (pairs.empty()) throw Error(ErrorCode::kInvalidArgument, "no level pairs given");
  return pairs;
}

std::string pair_label(const LabeledDataset& dataset, LevelPair pair) {
  return "(" + dataset.level_name(pair.easier) + "," + dataset.level_name(pair.harder) + ")";
}

ConstraintMode parse_mode(const LabeledDataset& dataset, const std::string& text) {
  if (text == "all") return AllCrossLevel{};
  if (text == "adjacent") return AdjacentLevels{};
  if (text.rfind("pair:", 0) == 0) return parse_level_pair(dataset, text.substr(5));
  if (text.rfind("item:", 0) == 0) return PerItem{text.substr(5)};
  throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + text + "' (all, adjacent, pair:A:B, item:ID)");
}

std::string join_numbers(const Eigen::VectorXd& v, int decimals = -1) {
  std::string out;
  for (Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += decimals < 0 ? format_shortest(v[i]) : format_number(v[i], decimals);
  }
  return out;
}

// ---------------------------------------------------------------- fit

constexpr int kHistogramBins = 16;
constexpr double kHistogramLo = -2.0;
constexpr double kHistogramHi = 2.0;

std::string cmd_fit(const InputOptions& in, const OutputOptions& out, const std::string& mode_text,
                    bool terminal, const Log& log) {
  const auto format = resolve_format(out, terminal, true);
  auto [embeddings, dataset] = load_inputs(in, log);
  const auto mode = parse_mode(dataset, mode_text);
  const auto constraints = build_constraints(dataset, embeddings, mode);
  log.stage("built " + std::to_string(constraints.size()) + " constraints (" + describe(mode, &dataset) + ")");

  const auto findings = validate(constraints, embeddings);
  if (findings.has_cycle()) log.warn("constraint graph has a cycle (contradictory annotations)");
  if (!findings.duplicates.empty()) log.warn(std::to_string(findings.duplicates.size()) + " duplicate constraints");

  const auto fit = fit_direction(embeddings, constraints);
  log.stage("fitted direction");

  std::vector<long> histogram(kHistogramBins, 0);
  const double width = (kHistogramHi - kHistogramLo) / kHistogramBins;
  Index satisfied = 0;
  for (Index k = 0; k < fit.margins.size(); ++k) {
    const double margin = fit.margins[k];
    const auto bin = static_cast<int>(std::floor((margin - kHistogramLo) / width));
    ++histogram[static_cast<std::size_t>(std::clamp(bin, 0, kHistogramBins - 1))];
    if (margin > 0.0) ++satisfied;
  }
  const double margin_min = fit.margins.minCoeff();
  const double margin_max = fit.margins.maxCoeff();
  const Eigen::VectorXd simplest = fit.simplest_point();
  const std::string score_definition = "mean_margin = objective / K";

  if (format == "json") {
    Json report;
    report["mode"] = describe(mode, &dataset);
    report["dim"] = embeddings.dim();
    report["items"] = dataset.size();
    report["constraints"] = constraints.size();
    report["objective"] = fit.objective;
    report["mean_margin"] = fit.mean_margin;
    report["w"] = std::vector<double>(fit.w.data(), fit.w.data() + fit.w.size());
    report["simplest_point"] = std::vector<double>(simplest.data(), simplest.data() + simplest.size());
    report["margins"] = {{"min", margin_min},
                         {"max", margin_max},
                         {"satisfied", satisfied},
                         {"histogram", {{"lo", kHistogramLo}, {"hi", kHistogramHi}, {"counts", histogram}}}};
    report["validation"] = {{"cycle", findings.has_cycle()}, {"duplicates", findings.duplicates.size()}};
    report["score_definition"] = score_definition;
    return report.dump(2) + "\n";
  }

  std::string counts;
  for (std::size_t b = 0; b < histogram.size(); ++b) counts += (b > 0 ? "," : "") + std::to_string(histogram[b]);

  if (format == "tsv") {
    Table table({"key", "value"});
    table.add_row({"mode", describe(mode, &dataset)});
    table.add_row({"dim", std::to_string(embeddings.dim())});
    table.add_row({"items", std::to_string(dataset.size())});
    table.add_row({"constraints", std::to_string(constraints.size())});
    table.add_row({"objective", format_number(fit.objective, out.precision)});
    table.add_row({"mean_margin", format_number(fit.mean_margin, out.precision)});
    table.add_row({"w", join_numbers(fit.w)});
    table.add_row({"simplest_point", join_numbers(simplest)});
    table.add_row({"margin_min", format_number(margin_min, out.precision)});
    table.add_row({"margin_max", format_number(margin_max, out.precision)});
    table.add_row({"satisfied", std::to_string(satisfied)});
    table.add_row({"margin_histogram", counts});
    table.add_row({"cycle", findings.has_cycle() ? "yes" : "no"});
    table.add_row({"score_definition", score_definition});
    return table.tsv();
  }

  std::ostringstream text;
  text << "Difficulty direction (" << describe(mode, &dataset) << ")\n"
       << "  items        " << dataset.size() << "\n"
       << "  dim          " << embeddings.dim() << "\n"
       << "  constraints  " << constraints.size() << "\n"
       << "  objective    " << format_number(fit.objective, out.precision) << "\n"
       << "  mean margin  " << format_number(fit.mean_margin, out.precision) << "\n"
       << "  satisfied    " << satisfied << " of " << constraints.size() << "\n"
       << "  margins      [" << format_number(margin_min, out.precision) << ", "
       << format_number(margin_max, out.precision) << "]\n"
       << "  w            (" << join_numbers(fit.w, 8) << ")\n"
       << "  e = -w       (" << join_numbers(simplest, 8) << ")\n"
       << "Margin histogram\n";
  for (int b = 0; b < kHistogramBins; ++b) {
    const double lo = kHistogramLo + b * width;
    text << "  [" << format_number(lo, 2) << ", " << format_number(lo + width, 2) << ")  "
         << histogram[static_cast<std::size_t>(b)] << "\n";
  }
  if (findings.has_cycle()) text << "Note: the constraint graph contains a cycle.\n";
  return text.str();
}

// -------------------------------------------------------------- score

std::string cmd_score(const InputOptions& in, const OutputOptions& out, const std::string& pairs_text,
                      std::string model_name, bool terminal, const Log& log) {
  const auto format = resolve_format(out, terminal, false);
  auto [embeddings, dataset] = load_inputs(in, log);
  if (model_name.empty()) model_name = fs::path(in.embeddings).stem().string();
  const auto pairs = parse_pairs(dataset, pairs_text);
  const auto report = compatibility_report(model_name, embeddings, dataset, pairs);
  log.stage("scored " + std::to_string(pairs.size()) + " level pairs");

  Table table({"model", "dim", "pair", "K", "score", "degenerate"});
  for (const auto& entry : report.entries) {
    if (entry.degenerate) log.warn(pair_label(dataset, entry.levels) + ": level centroids coincide, score set to 0");
    table.add_row({report.model_name, std::to_string(report.dim), pair_label(dataset, entry.levels),
                   std::to_string(entry.pair_count), format_number(entry.score, out.precision),
                   entry.degenerate ? "yes" : "no"});
  }
  return render(table, format);
}

// --------------------------------------------------------------- rank

std::string cmd_rank(const InputOptions& in, const OutputOptions& out, const std::vector<std::string>& models,
                     const std::string& pairs_text, bool terminal, const Log& log) {
  const auto format = resolve_format(out, terminal, false);
  require_files({&in.labels, &in.level_order});

  std::vector<std::pair<std::string, std::string>> named;
  std::set<std::string> names;
  for (const auto& spec : models) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw Error(ErrorCode::kInvalidArgument, "--model expects name=path, got '" + spec + "'");
    }
    named.emplace_back(spec.substr(0, eq), spec.substr(eq + 1));
    if (!names.insert(named.back().first).second) {
      throw Error(ErrorCode::kInvalidArgument, "model name '" + named.back().first + "' used twice");
    }
    require_files({&named.back().second});
  }

  const auto labels = read_labels(in.labels, in.level_order);
  const auto pairs = parse_pairs(labels, pairs_text);

  // One task per model; results are consumed in input order.
  std::vector<std::future<CompatibilityReport<double>>> tasks;
  std::vector<std::ostringstream> logs(named.size());
  for (std::size_t m = 0; m < named.size(); ++m) {
    tasks.push_back(std::async(std::launch::async, [&, m] {
      const bool quiet = false;
      Log local(logs[m], quiet);
      const auto embeddings =
          read_embeddings(embedding_file(named[m].second, in.embedding_format), norm_policy(in.norm));
      auto joined = join_inputs(embeddings, labels, in.drop_missing, local, named[m].first);
      return compatibility_report(named[m].first, joined.embeddings, joined.dataset, pairs);
    }));
  }
  std::vector<CompatibilityReport<double>> reports;
  for (std::size_t m = 0; m < tasks.size(); ++m) {
    reports.push_back(tasks[m].get());
    // Warnings are replayed in model order.
    std::istringstream lines(logs[m].str());
    for (std::string line; std::getline(lines, line);) {
      if (line.rfind("warning: ", 0) == 0) log.warn(line.substr(9));
    }
    log.stage("scored model '" + reports.back().model_name + "'");
  }

  std::vector<std::string> header{"model", "dim"};
  for (const auto& pair : pairs) header.push_back(pair_label(labels, pair));
  Table matrix(header);
  for (const auto& report : reports) {
    std::vector<std::string> row{report.model_name, std::to_string(report.dim)};
    for (const auto& entry : report.entries) row.push_back(format_number(entry.score, out.precision));
    matrix.add_row(std::move(row));
  }

  Table ranking({"pair", "rank", "model", "dim", "score", "tied"});
  bool any_tie = false;
  for (const auto& pair : pairs) {
    const auto ranked = rank_models(reports, pair);
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      any_tie = any_tie || ranked[r].tied;
      ranking.add_row({pair_label(labels, pair), std::to_string(r + 1), ranked[r].model_name,
                       std::to_string(ranked[r].dim), format_number(ranked[r].score, out.precision),
                       ranked[r].tied ? "yes" : "no"});
    }
  }

  if (format == "tsv") return matrix.tsv() + "\n" + ranking.tsv();
  std::string text = "Compatibility scores\n" + matrix.aligned() + "\nRanking per level pair\n" + ranking.aligned();
  if (any_tie) text += "Tied scores are ordered by model name.\n";
  return text;
}

// ---------------------------------------------------- item consistency

struct ConsistencyOptions {
  std::string anchor_level;
  std::vector<std::string> anchor_ids;
  std::size_t sample = 0;
  std::uint64_t seed = 0;
  std::string reference_levels;
  std::string correlate_with;
  int n_perm = 9999;
  std::uint64_t perm_seed = 0;
};

std::string cmd_item_consistency(const InputOptions& in, const OutputOptions& out, const ConsistencyOptions& opt,
                                 bool terminal, const Log& log) {
  const auto format = resolve_format(out, terminal, false);
  require_files({&opt.correlate_with});
  if (opt.anchor_level.empty() == opt.anchor_ids.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "give exactly one of --anchor-level or --anchor-id");
  }
  auto [embeddings, dataset] = load_inputs(in, log);

  std::vector<std::string> anchors = opt.anchor_ids;
  std::set<int> anchor_levels;
  if (!opt.anchor_level.empty()) {
    const int level = dataset.rank_of(opt.anchor_level);
    anchor_levels.insert(level);
    for (const auto& label : dataset.labels()) {
      if (label.level == level) anchors.push_back(label.id);
    }
    std::sort(anchors.begin(), anchors.end());
    if (anchors.empty()) throw Error(ErrorCode::kEmptyLevel, "level '" + opt.anchor_level + "' has no items");
  } else {
    for (const auto& id : anchors) {
      auto level = dataset.level_of(id);
      if (!level) throw Error(ErrorCode::kUnknownId, "anchor '" + id + "' has no label");
      anchor_levels.insert(*level);
    }
  }

  if (opt.sample > 0 && opt.sample < anchors.size()) {
    Random random(opt.seed);
    random.shuffle(std::span(anchors));
    anchors.resize(opt.sample);
    std::sort(anchors.begin(), anchors.end());
  }

  const LabeledDataset* reference = &dataset;
  LabeledDataset restricted;
  if (!opt.reference_levels.empty()) {
    std::vector<int> keep(anchor_levels.begin(), anchor_levels.end());
    for (const auto& name : split_list(opt.reference_levels)) keep.push_back(dataset.rank_of(name));
    restricted = dataset.restricted_to_levels(keep);
    reference = &restricted;
  }

  std::vector<double> scores;
  Table table({"id", "level", "consistency"});
  for (const auto& id : anchors) {
    scores.push_back(item_consistency(embeddings, *reference, id));
    table.add_row({id, dataset.level_name(*dataset.level_of(id)), format_number(scores.back(), out.precision)});
  }
  log.stage("scored " + std::to_string(anchors.size()) + " anchors");

  std::string text = render(table, format);
  if (opt.correlate_with.empty()) return text;

  const auto values = read_values(opt.correlate_with);
  if (!values.keyed()) throw Error(ErrorCode::kParseError, "--correlate-with needs id<TAB>value lines");
  std::map<std::string, double> by_id;
  for (std::size_t i = 0; i < values.ids.size(); ++i) by_id[values.ids[i]] = values.values[i];
  std::vector<double> ours;
  std::vector<double> theirs;
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    auto it = by_id.find(anchors[a]);
    if (it == by_id.end()) {
      log.warn("no reference value for '" + anchors[a] + "'");
      continue;
    }
    ours.push_back(scores[a]);
    theirs.push_back(it->second);
  }
  const auto result = permutation_pvalue(ours, theirs, opt.n_perm, opt.perm_seed);
  Table correlation({"rho", "n", "p_value", "n_perm", "seed", "low_resolution"});
  correlation.add_row({format_number(result.rho, out.precision), std::to_string(result.n),
                       format_number(result.p_value, out.precision), std::to_string(result.method.n_perm),
                       std::to_string(result.method.seed), result.low_resolution ? "yes" : "no"});
  return text + "\n" + (format == "table" ? "Spearman correlation with reference values\n" : "") +
         render(correlation, format);
}

// ----------------------------------------------------------- correlate

std::string cmd_correlate(const std::string& file_a, const std::string& file_b, int n_perm, std::uint64_t seed,
                          const OutputOptions& out, bool terminal, const Log& log) {
  const auto format = resolve_format(out, terminal, false);
  require_files({&file_a, &file_b});
  const auto a = read_values(file_a);
  const auto b = read_values(file_b);
  if (a.keyed() != b.keyed()) throw Error(ErrorCode::kParseError, "both files must be keyed or both bare");

  std::vector<double> xs;
  std::vector<double> ys;
  if (a.keyed()) {
    std::map<std::string, double> by_id;
    for (std::size_t i = 0; i < b.ids.size(); ++i) {
      if (!by_id.emplace(b.ids[i], b.values[i]).second) throw Error(ErrorCode::kDuplicateId, b.ids[i]);
    }
    std::map<std::string, std::pair<double, double>> matched;
    for (std::size_t i = 0; i < a.ids.size(); ++i) {
      auto it = by_id.find(a.ids[i]);
      if (it == by_id.end()) continue;
      if (!matched.emplace(a.ids[i], std::pair{a.values[i], it->second}).second) {
        throw Error(ErrorCode::kDuplicateId, a.ids[i]);
      }
    }
    const auto dropped = a.ids.size() + b.ids.size() - 2 * matched.size();
    if (dropped > 0) log.warn(std::to_string(dropped) + " ids present in only one file were ignored");
    for (const auto& [id, pair] : matched) {
      xs.push_back(pair.first);
      ys.push_back(pair.second);
    }
  } else {
    xs = a.values;
    ys = b.values;
  }
  const auto result = permutation_pvalue(xs, ys, n_perm, seed);
  if (result.low_resolution) log.warn("fewer distinct permutations than --n-perm; p-value has low resolution");
  Table table({"rho", "n", "p_value", "n_perm", "seed", "low_resolution"});
  table.add_row({format_number(result.rho, out.precision), std::to_string(result.n),
                 format_number(result.p_value, out.precision), std::to_string(result.method.n_perm),
                 std::to_string(result.method.seed), result.low_resolution ? "yes" : "no"});
  return render(table, format);
}

// ------------------------------------------------------------ baseline

struct BaselineOptions {
  std::string train_pair;
  std::string test_pair;
  std::string grid = "0.1,1.0,10.0";
  int epochs = kDefaultEpochs;
  std::uint64_t seed = 0;
  double val_fraction = 0.2;
};

std::string cmd_baseline(const InputOptions& in, const OutputOptions& out, const BaselineOptions& opt,
                         bool terminal, const Log& log) {
  const auto format = resolve_format(out, terminal, false);
  std::vector<double> grid;
  for (const auto& part : split_list(opt.grid)) {
    std::size_t used = 0;
    double c = 0.0;
    try {
      c = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != part.size()) throw Error(ErrorCode::kInvalidArgument, "bad C value '" + part + "'");
    grid.push_back(c);
  }
  auto [embeddings, dataset] = load_inputs(in, log);
  const auto train_pair = parse_level_pair(dataset, opt.train_pair);
  const auto test_pair = parse_level_pair(dataset, opt.test_pair);
  const auto splits = make_transfer_splits(embeddings, dataset, train_pair, test_pair, opt.val_fraction, opt.seed);
  log.stage("split " + std::to_string(splits.train.size()) + " train, " + std::to_string(splits.val.size()) +
            " validation, " + std::to_string(splits.test.size()) + " test items");
  const auto result = tune_and_evaluate(splits.train, splits.val, splits.test, grid, opt.epochs, opt.seed);
  const auto compat = compatibility_score(embeddings, dataset, train_pair);

  Table table({"key", "value"});
  table.add_row({"train_pair", pair_label(dataset, train_pair)});
  table.add_row({"test_pair", pair_label(dataset, test_pair)});
  table.add_row({"dim", std::to_string(embeddings.dim())});
  table.add_row({"n_train", std::to_string(splits.train.size())});
  table.add_row({"n_val", std::to_string(splits.val.size())});
  table.add_row({"n_test", std::to_string(splits.test.size())});
  for (const auto& point : result.grid) {
    table.add_row({"val_accuracy[C=" + format_number(point.c) + "]", format_number(point.val_accuracy, out.precision)});
  }
  table.add_row({"selected_C", format_number(result.model.c_used)});
  table.add_row({"test_accuracy", format_number(result.test_accuracy, out.precision)});
  table.add_row({"train_pair_compatibility", format_number(compat.score, out.precision)});
  table.add_row({"epochs", std::to_string(opt.epochs)});
  table.add_row({"seed", std::to_string(opt.seed)});
  return render(table, format);
}

// --------------------------------------------------------------- synth

struct SynthOptions {
  Index dim = 16;
  int levels = 4;
  std::string per_level = "50";
  std::string offsets;
  std::string spreads;  // empty: 0.1, 0.2, ... one per level
  double jitter = 0.0;
  std::uint64_t direction_seed = 1;
  std::uint64_t noise_seed = 2;
  std::string out_dir;
};

std::vector<double> parse_doubles(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  for (const auto& part : split_list(text)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != part.size()) throw Error(ErrorCode::kInvalidArgument, flag + ": bad number '" + part + "'");
    values.push_back(v);
  }
  return values;
}

std::string cmd_synth(const SynthOptions& opt, const OutputOptions& out, bool terminal, const Log& log) {
  const auto format = resolve_format(out, terminal, false);
  if (opt.levels < 2) throw Error(ErrorCode::kInvalidSpec, "need at least 2 levels");
  ConeSpec spec;
  spec.dim = opt.dim;
  const auto counts = parse_doubles(opt.per_level, "--per-level");
  if (counts.size() != 1 && counts.size() != static_cast<std::size_t>(opt.levels)) {
    throw Error(ErrorCode::kInvalidSpec, "--per-level needs 1 or " + std::to_string(opt.levels) + " values");
  }
  spec.counts.clear();
  for (int l = 0; l < opt.levels; ++l) {
    const double n = counts[counts.size() == 1 ? 0 : static_cast<std::size_t>(l)];
    if (n < 1 || n != std::floor(n)) throw Error(ErrorCode::kInvalidSpec, "--per-level values must be positive integers");
    spec.counts.push_back(static_cast<Index>(n));
  }
  spec.offsets = parse_doubles(opt.offsets, "--offsets");
  spec.spreads = parse_doubles(opt.spreads, "--spreads");
  if (opt.spreads.empty()) {
    for (int l = 0; l < opt.levels; ++l) spec.spreads.push_back((l + 1) / 10.0);
  }
  spec.latent_jitter = opt.jitter;
  spec.direction_seed = opt.direction_seed;
  spec.noise_seed = opt.noise_seed;
  const auto data = generate(spec);
  log.stage("generated " + std::to_string(data.embeddings.size()) + " items");

  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);
  auto write = [&](const std::string& name, auto&& body) {
    std::ofstream file(dir / name, std::ios::binary);
    if (!file) throw Error(ErrorCode::kIoError, "cannot write '" + (dir / name).string() + "'");
    body(file);
  };
  write("embeddings.jsonl", [&](std::ostream& f) {
    write_embeddings_jsonl(f, data.embeddings, Json{{"generator", "synth"}, {"dim", spec.dim}}.dump());
  });
  write("labels.tsv", [&](std::ostream& f) { write_labels(f, data.dataset); });
  write("levels.txt", [&](std::ostream& f) { write_level_order(f, data.dataset); });
  write("truth.json", [&](std::ostream& f) {
    Json truth;
    truth["true_direction"] = std::vector<double>(data.true_direction.data(),
                                                  data.true_direction.data() + data.true_direction.size());
    Json latent = Json::object();
    for (Index i = 0; i < data.embeddings.size(); ++i) latent[data.embeddings.id(i)] = data.latent[static_cast<std::size_t>(i)];
    truth["latent"] = std::move(latent);
    f << truth.dump(2) << '\n';
  });

  Table table({"file", "rows"});
  table.add_row({(dir / "embeddings.jsonl").string(), std::to_string(data.embeddings.size())});
  table.add_row({(dir / "labels.tsv").string(), std::to_string(data.dataset.size())});
  table.add_row({(dir / "levels.txt").string(), std::to_string(spec.level_count())});
  table.add_row({(dir / "truth.json").string(), std::to_string(data.embeddings.size())});
  return render(table, format);
}

void emit(const std::string& text, const OutputOptions& out, std::ostream& stream) {
  if (out.out.empty()) {
    stream << text;
    stream.flush();
    return;
  }
  std::ofstream file(out.out, std::ios::binary);
  if (!file) throw Error(ErrorCode::kIoError, "cannot write '" + out.out + "'");
  file << text;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, const CliStreams& streams) {
  CLI::App app{"Evaluate how well an embedding space aligns with ordinal difficulty levels.", "diffcone"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log one line per stage to standard error");
  Log log(streams.err, verbose);

  InputOptions in;
  OutputOptions out;
  std::string mode = "all";
  std::string pairs = "all";
  std::string model_name;
  std::vector<std::string> models;
  ConsistencyOptions consistency;
  std::string file_a;
  std::string file_b;
  int n_perm = 9999;
  std::uint64_t seed = 0;
  BaselineOptions baseline;
  SynthOptions synth;

  auto* fit = app.add_subcommand("fit", "Fit the difficulty direction for a constraint mode");
  add_input_options(fit, in);
  add_output_options(fit, out, true, true);
  fit->add_option("--mode", mode, "all, adjacent, pair:A:B or item:ID");

  auto* score = app.add_subcommand("score", "Compatibility score per level pair");
  add_input_options(score, in);
  add_output_options(score, out, true);
  score->add_option("--pairs", pairs, "'all' or a comma list of easier:harder level pairs");
  score->add_option("--model-name", model_name, "Model name in the report (default: embedding file stem)");

  auto* rank = app.add_subcommand("rank", "Rank several embedding models per level pair");
  rank->add_option("--model", models, "name=path, repeatable")->required();
  add_embedding_format_options(rank, in);
  add_label_options(rank, in);
  add_output_options(rank, out, true);
  rank->add_option("--pairs", pairs, "'all' or a comma list of easier:harder level pairs");

  auto* item = app.add_subcommand("item-consistency", "Per-item annotation consistency");
  add_input_options(item, in);
  add_output_options(item, out, true);
  item->add_option("--anchor-level", consistency.anchor_level, "Score items of this level");
  item->add_option("--anchor-id", consistency.anchor_ids, "Score this item (repeatable)");
  item->add_option("--sample", consistency.sample, "Score a seeded random sample of this many anchors");
  item->add_option("--seed", consistency.seed, "Seed for anchor sampling");
  item->add_option("--reference-levels", consistency.reference_levels,
                   "Only compare anchors against these levels (comma list)");
  item->add_option("--correlate-with", consistency.correlate_with, "id<TAB>value file to correlate with");
  item->add_option("--n-perm", consistency.n_perm, "Permutations for the p-value");
  item->add_option("--perm-seed", consistency.perm_seed, "Seed for the permutation test");

  auto* correlate = app.add_subcommand("correlate", "Spearman correlation with a permutation p-value");
  correlate->add_option("file-a", file_a, "Values (id<TAB>value or one value per line)")->required();
  correlate->add_option("file-b", file_b, "Values (same layout as file-a)")->required();
  correlate->add_option("--n-perm", n_perm, "Number of permutations");
  correlate->add_option("--seed", seed, "Permutation seed");
  add_output_options(correlate, out, true);

  auto* svm = app.add_subcommand("baseline", "Linear SVM transfer from one level pair to another");
  add_input_options(svm, in);
  add_output_options(svm, out, true);
  svm->add_option("--train-pair", baseline.train_pair, "easier:harder level pair to train on")->required();
  svm->add_option("--test-pair", baseline.test_pair, "easier:harder level pair to test on")->required();
  svm->add_option("--grid", baseline.grid, "Comma list of C values");
  svm->add_option("--epochs", baseline.epochs, "Training epochs")->check(CLI::PositiveNumber);
  svm->add_option("--seed", baseline.seed, "Seed for splits and training");
  svm->add_option("--val-fraction", baseline.val_fraction, "Validation share of the training pair");

  auto* gen = app.add_subcommand("synth", "Write a synthetic cone dataset");
  gen->add_option("--dim", synth.dim, "Embedding dimension");
  gen->add_option("--levels", synth.levels, "Number of levels");
  gen->add_option("--per-level", synth.per_level, "Items per level (one value or one per level)");
  gen->add_option("--offsets", synth.offsets, "Offsets along the true direction (default: even in [-1, 1])");
  gen->add_option("--spreads", synth.spreads, "Noise scale per level");
  gen->add_option("--jitter", synth.jitter, "Half-width of the per-item hidden difficulty jitter");
  gen->add_option("--direction-seed", synth.direction_seed, "Seed for the true direction");
  gen->add_option("--noise-seed", synth.noise_seed, "Seed for item noise");
  gen->add_option("--out-dir", synth.out_dir, "Directory for the generated files")->required();
  add_output_options(gen, out, false);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, streams.out, streams.err);
    return code == 0 ? 0 : 2;
  }

  const bool terminal = streams.out_is_terminal;
  try {
    std::string text;
    if (*fit) text = cmd_fit(in, out, mode, terminal, log);
    if (*score) text = cmd_score(in, out, pairs, model_name, terminal, log);
    if (*rank) text = cmd_rank(in, out, models, pairs, terminal, log);
    if (*item) text = cmd_item_consistency(in, out, consistency, terminal, log);
    if (*correlate) text = cmd_correlate(file_a, file_b, n_perm, seed, out, terminal, log);
    if (*svm) text = cmd_baseline(in, out, baseline, terminal, log);
    if (*gen) text = cmd_synth(synth, out, terminal, log);
    emit(text, out, streams.out);
  } catch (const Error& e) {
    streams.err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    streams.err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace diffcone
