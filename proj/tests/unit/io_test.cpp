#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "diffcone/io.hpp"
#include "support.hpp"

namespace diffcone {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIoError;
}

EmbeddingSet<double> parse(const std::string& text, EmbeddingFormat format = EmbeddingFormat::kJsonLines,
                           NormPolicy policy = NormPolicy::kRenormalize) {
  std::istringstream in(text);
  return parse_embeddings(in, format, std::nullopt, policy);
}

TEST(ParseEmbeddings, JsonLinesUnitVectors) {
  const auto e = parse(R"({"id": "a", "vector": [1, 0]}
{"id": "b", "vector": [0.6, 0.8]}
)", EmbeddingFormat::kJsonLines, NormPolicy::kAssertUnit);
  EXPECT_EQ(e.size(), 2);
  EXPECT_EQ(e.dim(), 2);
  EXPECT_EQ(e.id(1), "b");
  EXPECT_EQ(e.vector(1)[1], 0.8);
}

TEST(ParseEmbeddings, Word2VecText) {
  const auto e = parse("3 4\nthe 1 0 0 0\ncat 0 2 0 0\nsat 0 0 0 -3.5\n", EmbeddingFormat::kWord2VecText);
  EXPECT_EQ(e.dim(), 4);
  EXPECT_EQ(e.ids(), (std::vector<std::string>{"the", "cat", "sat"}));
  EXPECT_NEAR(e.vector(1).norm(), 1.0, 1e-15);
  EXPECT_EQ(e.vector(2)[3], -1.0);
}

TEST(ParseEmbeddings, ExporterHeaderDeclaresDim) {
  const std::string text = "# {\"model\": \"all-MiniLM-L6-v2\", \"dim\": 3}\n{\"id\": \"x\", \"vector\": [0, 0, 1]}\n";
  EXPECT_EQ(parse(text, EmbeddingFormat::kJsonLines, NormPolicy::kAssertUnit).dim(), 3);
  const std::string wrong = "# {\"model\": \"m\", \"dim\": 4}\n{\"id\": \"x\", \"vector\": [0, 0, 1]}\n";
  EXPECT_EQ(code_of([&] { parse(wrong); }), ErrorCode::kDimensionMismatch);
  // Plain comments are ignored.
  EXPECT_EQ(parse("# just a note\n{\"id\": \"x\", \"vector\": [2, 0]}\n").size(), 1);
}

TEST(ParseEmbeddings, RenormalizeVersusAssertUnit) {
  const std::string text = R"({"id": "a", "vector": [3, 4]})";
  const auto e = parse(text);
  EXPECT_NEAR(e.vector(0)[0], 0.6, 1e-15);
  EXPECT_EQ(code_of([&] { parse(text, EmbeddingFormat::kJsonLines, NormPolicy::kAssertUnit); }),
            ErrorCode::kNormViolation);
  // Within 1e-6 of unit length is accepted.
  EXPECT_NO_THROW(parse(R"({"id": "a", "vector": [1.0000005, 0]})", EmbeddingFormat::kJsonLines,
                        NormPolicy::kAssertUnit));
}

TEST(ParseEmbeddings, Errors) {
  EXPECT_EQ(code_of([] { parse("{\"id\": \"a\", \"vector\": [1, 0]}\n{\"id\": \"b\", \"vector\": [1, 0, 0]}\n"); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([] { parse("{\"id\": \"a\", \"vector\": [1, 0]}\n{\"id\": \"a\", \"vector\": [0, 1]}\n"); }),
            ErrorCode::kDuplicateId);
  EXPECT_EQ(code_of([] { parse("{\"id\": \"z\", \"vector\": [0, 0]}\n"); }), ErrorCode::kZeroVector);
  EXPECT_EQ(code_of([] { parse("{\"id\": \"a\", \"vector\": [1, 0]\n"); }), ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { parse("{\"id\": 3, \"vector\": [1, 0]}\n"); }), ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { parse("{\"id\": \"a\", \"vector\": [1, \"x\"]}\n"); }), ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { parse("# only a comment\n"); }), ErrorCode::kEmptyFile);
  EXPECT_EQ(code_of([] { parse("2 2\na 1 0\n", EmbeddingFormat::kWord2VecText); }), ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { parse("1 2\na 1 0 0\n", EmbeddingFormat::kWord2VecText); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([] { parse("1 2\na 1 zz\n", EmbeddingFormat::kWord2VecText); }), ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { parse("x y\n", EmbeddingFormat::kWord2VecText); }), ErrorCode::kParseError);
}

TEST(ParseEmbeddings, ParseErrorNamesLine) {
  try {
    parse("{\"id\": \"a\", \"vector\": [1, 0]}\n\n{bad\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(FormatShortest, RoundTrips) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 10000; ++i) {
    const double v = normal(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    EXPECT_EQ(std::stod(format_shortest(v)), v);
  }
  EXPECT_EQ(format_shortest(0.1), "0.1");
  EXPECT_EQ(format_shortest(1.0), "1");
}

TEST(WriteEmbeddings, RoundTripIsBitIdentical) {
  std::mt19937_64 rng(2);
  const auto e = testing::random_unit_embeddings(30, 7, rng);
  std::ostringstream first;
  write_embeddings_jsonl(first, e, R"({"generator":"test","dim":7})");
  std::istringstream in(first.str());
  const auto back = parse_embeddings(in, EmbeddingFormat::kJsonLines, std::nullopt, NormPolicy::kAssertUnit);
  EXPECT_EQ(back.ids(), e.ids());
  EXPECT_EQ(back.vectors(), e.vectors());
  std::ostringstream second;
  write_embeddings_jsonl(second, back, R"({"generator":"test","dim":7})");
  EXPECT_EQ(first.str(), second.str());
}

TEST(ReadEmbeddings, FileAndFormatGuess) {
  const auto dir = std::filesystem::temp_directory_path() / "diffcone_io_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "v.vec") << "1 2\ntok 0 1\n";
  }
  EXPECT_EQ(guess_format(dir / "v.vec"), EmbeddingFormat::kWord2VecText);
  EXPECT_EQ(guess_format(dir / "v.jsonl"), EmbeddingFormat::kJsonLines);
  const auto e = read_embeddings({dir / "v.vec", guess_format(dir / "v.vec"), std::nullopt});
  EXPECT_EQ(e.id(0), "tok");
  try {
    read_embeddings({dir / "missing.jsonl", EmbeddingFormat::kJsonLines, std::nullopt});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kIoError);
  }
  std::filesystem::remove_all(dir);
}

TEST(Labels, ResolvesRanksAndRoundTrips) {
  std::istringstream order_in("A1\nA2\nB1\n");
  const auto order = parse_level_order(order_in);
  std::istringstream labels_in("w2\tB1\nw1\tA1\nw3\tA2\n");
  const auto d = parse_labels(labels_in, order);
  EXPECT_EQ(*d.level_of("w2"), 2);
  EXPECT_EQ(*d.level_of("w1"), 0);
  EXPECT_EQ(d.count(1), 1u);

  std::ostringstream order_out, labels_out;
  write_level_order(order_out, d);
  write_labels(labels_out, d);
  std::istringstream order_back(order_out.str());
  std::istringstream labels_back(labels_out.str());
  const auto again = parse_labels(labels_back, parse_level_order(order_back));
  EXPECT_EQ(again.labels().size(), 3u);
  EXPECT_EQ(*again.level_of("w3"), 1);
}

TEST(Labels, TwelveLevelOrderIsNotLexicographic) {
  std::ostringstream text;
  for (int l = 1; l <= 12; ++l) text << "Level " << l << "\n";
  std::istringstream in(text.str());
  const auto order = parse_level_order(in);
  ASSERT_EQ(order.size(), 12u);
  std::ostringstream labels;
  for (int l = 1; l <= 12; ++l) labels << "w" << l << "\tLevel " << l << "\n";
  std::istringstream labels_in(labels.str());
  const auto d = parse_labels(labels_in, order);
  for (int l = 1; l <= 12; ++l) EXPECT_EQ(*d.level_of("w" + std::to_string(l)), l - 1);
  EXPECT_LT(*d.level_of("w2"), *d.level_of("w10"));
}

TEST(Labels, Errors) {
  const std::vector<std::string> order{"A", "B"};
  EXPECT_EQ(code_of([&] {
              std::istringstream in("x\tA\nx\tB\n");
              parse_labels(in, order);
            }),
            ErrorCode::kDuplicateId);
  EXPECT_EQ(code_of([&] {
              std::istringstream in("x\tC\n");
              parse_labels(in, order);
            }),
            ErrorCode::kUnknownLevel);
  EXPECT_EQ(code_of([&] {
              std::istringstream in("\n");
              parse_labels(in, order);
            }),
            ErrorCode::kEmptyFile);
  EXPECT_EQ(code_of([] {
              std::istringstream in("A\nA\n");
              parse_level_order(in);
            }),
            ErrorCode::kParseError);
}

TEST(Join, IntersectionSortedById) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Identity(3, 3);
  EmbeddingSet<double> e({"c", "a", "z"}, x, NormPolicy::kAssertUnit);
  LabeledDataset d({"L", "H"}, {{"a", 1}, {"c", 0}});
  const auto joined = join(e, d, OnMissing::kError);
  EXPECT_EQ(joined.embeddings.ids(), (std::vector<std::string>{"a", "c"}));
  EXPECT_EQ(joined.embeddings.vector(0), e.vector(1));
  EXPECT_EQ(joined.embeddings_without_label, (std::vector<std::string>{"z"}));
  EXPECT_TRUE(joined.labels_without_embedding.empty());
}

TEST(Join, HundredLabelsNinetyEmbeddings) {
  std::mt19937_64 rng(3);
  const auto e = testing::random_unit_embeddings(90, 4, rng);
  std::vector<LabeledDataset::Label> labels;
  for (int i = 0; i < 100; ++i) labels.push_back({"x" + std::to_string(i), i % 3});
  const LabeledDataset d({"A", "B", "C"}, labels);
  const auto joined = join(e, d, OnMissing::kDropWithWarning);
  EXPECT_EQ(joined.embeddings.size(), 90);
  EXPECT_EQ(joined.dataset.labels().size(), 90u);
  EXPECT_EQ(joined.labels_without_embedding.size(), 10u);
  EXPECT_EQ(code_of([&] { join(e, d, OnMissing::kError); }), ErrorCode::kUnknownId);
}

TEST(Join, DisjointIdsGiveEmptyDataset) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Identity(2, 2);
  EmbeddingSet<double> e({"a", "b"}, x, NormPolicy::kAssertUnit);
  LabeledDataset d({"L", "H"}, {{"p", 0}, {"q", 1}});
  const auto joined = join(e, d, OnMissing::kDropWithWarning);
  EXPECT_TRUE(joined.embeddings.is_empty());
  EXPECT_TRUE(joined.dataset.labels().empty());
  EXPECT_EQ(joined.labels_without_embedding.size(), 2u);
}

TEST(Values, KeyedAndBare) {
  std::istringstream keyed("a\t1.5\nb\t-2\n");
  const auto k = parse_values(keyed);
  EXPECT_TRUE(k.keyed());
  EXPECT_EQ(k.values, (std::vector<double>{1.5, -2}));
  std::istringstream bare("3\n4\n");
  EXPECT_FALSE(parse_values(bare).keyed());
  std::istringstream mixed("a\t1\n2\n");
  EXPECT_THROW(parse_values(mixed), Error);
}

}  // namespace
}  // namespace diffcone
