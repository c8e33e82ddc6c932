#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "readability/corpus.hpp"
#include "readability/error.hpp"
#include "readability/precomputed.hpp"
#include "readability/provider.hpp"
#include "readability/rng.hpp"

namespace readability {
namespace {

TEST(Precomputed, StoreLoadRoundTripIsExact) {
  Rng rng(1);
  PrecomputedEmbeddings table;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> v(13);
    for (auto& x : v) x = rng.normal() * std::pow(10.0, static_cast<double>(rng.below(12)) - 6.0);
    table.add("id" + std::to_string(i), v);
  }
  std::ostringstream out;
  write_precomputed(out, table);
  std::istringstream in(out.str());
  const auto back = read_precomputed(in);
  EXPECT_EQ(back.dim(), 13u);
  EXPECT_EQ(back.ids(), table.ids());
  for (const auto& id : table.ids()) EXPECT_EQ(back.at(id), table.at(id));
}

TEST(Precomputed, LineFormat) {
  PrecomputedEmbeddings table;
  table.add("a", {0.5, -1.0});
  std::ostringstream out;
  write_precomputed(out, table);
  EXPECT_EQ(out.str(), "{\"id\":\"a\",\"dim\":2,\"values\":[0.5,-1.0]}\n");
}

TEST(Precomputed, ExternalFixtureDim1024InFileOrder) {
  const auto table = load_precomputed(std::string(READABILITY_TEST_DATA) + "/embeddings_1024.jsonl");
  EXPECT_EQ(table.dim(), 1024u);
  ASSERT_EQ(table.size(), 10u);
  const auto sentences = load_sentences(std::string(READABILITY_TEST_DATA) + "/sentences_10.csv");
  for (std::size_t i = 0; i < sentences.size(); ++i) EXPECT_EQ(table.ids()[i], sentences[i].id);
}

TEST(Precomputed, DimensionMismatchRejected) {
  std::istringstream in(
      "{\"id\":\"a\",\"dim\":2,\"values\":[1,2]}\n"
      "{\"id\":\"b\",\"dim\":3,\"values\":[1,2,3]}\n");
  EXPECT_THROW(read_precomputed(in), FormatError);
  std::istringstream declared("{\"id\":\"a\",\"dim\":3,\"values\":[1,2]}\n");
  EXPECT_THROW(read_precomputed(declared), FormatError);
}

TEST(Precomputed, DuplicateIdRejected) {
  std::istringstream in(
      "{\"id\":\"a\",\"dim\":1,\"values\":[1]}\n"
      "{\"id\":\"a\",\"dim\":1,\"values\":[2]}\n");
  EXPECT_THROW(read_precomputed(in), FormatError);
}

TEST(Precomputed, MalformedLineNamesLine) {
  std::istringstream in("{\"id\":\"a\",\"dim\":1,\"values\":[1]}\nnot json\n");
  try {
    read_precomputed(in);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Precomputed, MissingIdNamesId) {
  PrecomputedEmbeddings table;
  table.add("a", {1.0});
  try {
    table.at("ghost");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}

TEST(Provider, PrecomputedEmbedsById) {
  auto table = std::make_shared<PrecomputedEmbeddings>();
  table->add("x", {1.0, 2.0, 3.0});
  const EncoderProvider p = PrecomputedProvider{table};
  EXPECT_EQ(provider_kind(p), ProviderKind::Precomputed);
  EXPECT_EQ(embedding_dim(p), 3u);
  const RowVec e = embed(p, "x", "ignored text");
  EXPECT_EQ(e(2), 3.0);
  EXPECT_THROW(embed(p, "y", "text"), Error);
}

TEST(Provider, KindNames) {
  for (auto k : {ProviderKind::Transformer, ProviderKind::RandomProjection, ProviderKind::Precomputed}) {
    EXPECT_EQ(parse_provider_kind(to_string(k)), k);
  }
  EXPECT_EQ(to_string(ProviderKind::RandomProjection), "random-projection");
  EXPECT_THROW(parse_provider_kind("bert"), Error);
}

}  // namespace
}  // namespace readability
