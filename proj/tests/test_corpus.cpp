#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "readability/corpus.hpp"
#include "readability/csv.hpp"
#include "readability/error.hpp"
#include "readability/rng.hpp"
#include "synthetic.hpp"

namespace readability {
namespace {

std::vector<RatedSentence> numbered(std::size_t n) {
  std::vector<RatedSentence> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"id" + std::to_string(i), "Satz " + std::to_string(i), 1.0 + static_cast<double>(i % 7)});
  return out;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

TEST(CleanSentence, StripsOneQuotePairOnly) {
  EXPECT_EQ(clean_sentence("\"Er sagte, hallo.\""), "Er sagte, hallo.");
  EXPECT_EQ(clean_sentence("\"\"doppelt\"\""), "\"doppelt\"");
  EXPECT_EQ(clean_sentence("\"nur links"), "\"nur links");
  EXPECT_EQ(clean_sentence("ohne"), "ohne");
}

TEST(LoadCorpus, QuotedSentenceIsCleaned) {
  std::istringstream in("id,sentence,mos\n1,\"\"\"Er sagte, hallo.\"\"\",2.5\n");
  const auto corpus = read_corpus(in);
  ASSERT_EQ(corpus.size(), 1u);
  EXPECT_EQ(corpus[0].text, "Er sagte, hallo.");
  EXPECT_DOUBLE_EQ(corpus[0].mos, 2.5);
}

TEST(LoadCorpus, QuotedSampleSentence) {
  std::istringstream in(
      "id,sentence,mos\n"
      "7,Bei der Tour de France liegt die höchste Durchschnittsgeschwindigkeit eines Fahrers bei 41 km/h.,1.5\n");
  const auto corpus = read_corpus(in);
  ASSERT_EQ(corpus.size(), 1u);
  EXPECT_DOUBLE_EQ(corpus[0].mos, 1.5);
}

TEST(LoadCorpus, OrderPreservedAndThousandRows) {
  const auto original = testing::synthetic_corpus(1000, 3);
  std::ostringstream out;
  write_corpus(out, original);
  std::istringstream in(out.str());
  const auto loaded = read_corpus(in);
  ASSERT_EQ(loaded.size(), 1000u);
  for (std::size_t i = 0; i < loaded.size(); ++i) EXPECT_EQ(loaded[i].id, original[i].id);
}

TEST(LoadCorpus, MalformedRowNamesLine) {
  std::istringstream in("id,sentence,mos\n1,gut,2\n2,kaputt\n");
  EXPECT_NE(message_of([&] { read_corpus(in); }).find("line 3"), std::string::npos);
}

TEST(LoadCorpus, OutOfRangeMosNamesId) {
  std::istringstream in("id,sentence,mos\nabc,Text,7.5\n");
  EXPECT_NE(message_of([&] { read_corpus(in); }).find("abc"), std::string::npos);
  std::istringstream low("id,sentence,mos\nxyz,Text,0.99\n");
  EXPECT_NE(message_of([&] { read_corpus(low); }).find("xyz"), std::string::npos);
}

TEST(LoadCorpus, RejectsBadHeaderEmptyTextAndDuplicates) {
  std::istringstream header("ID,text,score\n1,a,2\n");
  EXPECT_THROW(read_corpus(header), FormatError);
  std::istringstream empty("id,sentence,mos\n1,\"\"\"\"\"\",2\n");
  EXPECT_THROW(read_corpus(empty), FormatError);
  std::istringstream dup("id,sentence,mos\n1,a,2\n1,b,3\n");
  EXPECT_THROW(read_corpus(dup), FormatError);
  std::istringstream nan("id,sentence,mos\n1,a,nan\n");
  EXPECT_THROW(read_corpus(nan), FormatError);
}

TEST(LoadCorpus, BoundaryScoresAccepted) {
  std::istringstream in("id,sentence,mos\n1,a,1\n2,b,7.0\n");
  EXPECT_EQ(read_corpus(in).size(), 2u);
}

TEST(LoadSentences, AcceptsBothHeaders) {
  std::istringstream two("id,sentence\na,Hallo Welt.\n");
  EXPECT_EQ(read_sentences(two).at(0).text, "Hallo Welt.");
  std::istringstream three("id,sentence,mos\na,\"\"\"Hallo\"\"\",3\n");
  EXPECT_EQ(read_sentences(three).at(0).text, "Hallo");
}

TEST(CorpusRoundTrip, WriteThenReadIsIdentity) {
  const std::vector<RatedSentence> tricky{
      {"q1", "\"zitiert\"", 2.0},
      {"q2", "Komma, \"Anführung\" und\nZeilenumbruch", 3.25},
      {"q3", "Umlaute äöüß", 6.999999999999999},
      {"q4", "\"", 1.0},
      {"q5", "a\"b", 7.0},
      {"q6", "0.1 + 0.2", 0.1 + 0.2 + 1.0},
  };
  std::ostringstream out;
  write_corpus(out, tricky);
  std::istringstream in(out.str());
  EXPECT_EQ(read_corpus(in), tricky);
}

TEST(CorpusRoundTrip, RandomCorpora) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto corpus = testing::synthetic_corpus(50, seed);
    std::ostringstream out;
    write_corpus(out, corpus);
    std::istringstream in(out.str());
    EXPECT_EQ(read_corpus(in), corpus);
  }
}

void expect_partition(const FoldSplit& s, std::size_t n) {
  std::set<std::string> all;
  for (const auto* part : {&s.train_ids, &s.early_stop_ids, &s.validation_ids}) {
    for (const auto& id : *part) EXPECT_TRUE(all.insert(id).second) << "id in two sets: " << id;
  }
  EXPECT_EQ(all.size(), n);
}

TEST(CvSplits, ThousandSentencesFiveFolds) {
  const auto corpus = numbered(1000);
  const auto splits = make_cv_splits(corpus, 5, 0.1, 42);
  ASSERT_EQ(splits.size(), 5u);
  for (std::size_t f = 0; f < splits.size(); ++f) {
    EXPECT_EQ(splits[f].fold_index, static_cast<int>(f));
    EXPECT_EQ(splits[f].validation_ids.size(), 200u);
    EXPECT_EQ(splits[f].early_stop_ids.size(), 80u);
    EXPECT_EQ(splits[f].train_ids.size(), 720u);
    expect_partition(splits[f], 1000);
  }
}

TEST(CvSplits, TenSentencesGiveFoldsOfTwo) {
  const auto splits = make_cv_splits(numbered(10), 5, 0.1, 1);
  for (const auto& s : splits) {
    EXPECT_EQ(s.validation_ids.size(), 2u);
    EXPECT_EQ(s.early_stop_ids.size(), 1u);
    EXPECT_EQ(s.train_ids.size(), 7u);
  }
}

TEST(CvSplits, ValidationSetsCoverCorpusOnce) {
  for (std::size_t n : {7u, 23u, 101u}) {
    for (int k : {2, 3, 5}) {
      const auto splits = make_cv_splits(numbered(n), k, 0.1, n * 31 + static_cast<std::size_t>(k));
      std::multiset<std::string> seen;
      for (const auto& s : splits) {
        expect_partition(s, n);
        const auto expected = static_cast<double>(n) / k;
        EXPECT_LE(std::abs(static_cast<double>(s.validation_ids.size()) - expected), 1.0);
        seen.insert(s.validation_ids.begin(), s.validation_ids.end());
      }
      EXPECT_EQ(seen.size(), n);
      EXPECT_EQ(std::set<std::string>(seen.begin(), seen.end()).size(), n);
    }
  }
}

TEST(CvSplits, PureFunctionOfInputs) {
  const auto corpus = numbered(137);
  EXPECT_EQ(make_cv_splits(corpus, 5, 0.1, 9), make_cv_splits(corpus, 5, 0.1, 9));
  EXPECT_NE(make_cv_splits(corpus, 5, 0.1, 9), make_cv_splits(corpus, 5, 0.1, 10));
}

TEST(CvSplits, IdsKeepCorpusOrder) {
  const auto corpus = numbered(60);
  for (const auto& s : make_cv_splits(corpus, 5, 0.1, 2)) {
    for (const auto* part : {&s.train_ids, &s.early_stop_ids, &s.validation_ids}) {
      std::vector<int> idx;
      for (const auto& id : *part) idx.push_back(std::stoi(id.substr(2)));
      EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
    }
  }
}

TEST(CvSplits, RejectsBadArguments) {
  const auto corpus = numbered(4);
  EXPECT_THROW(make_cv_splits(corpus, 5, 0.1, 0), ConfigError);
  EXPECT_THROW(make_cv_splits(corpus, 1, 0.1, 0), ConfigError);
  EXPECT_THROW(make_cv_splits(corpus, 2, 0.0, 0), ConfigError);
  EXPECT_THROW(make_cv_splits(corpus, 2, 1.0, 0), ConfigError);
}

TEST(FinalSplit, SevenPointFivePercent) {
  const auto split = carve_final_split(numbered(1000), 0.075, 3);
  EXPECT_EQ(split.early_stop_ids.size(), 75u);
  EXPECT_EQ(split.train_ids.size(), 925u);
  EXPECT_EQ(split, carve_final_split(numbered(1000), 0.075, 3));
  std::set<std::string> all(split.train_ids.begin(), split.train_ids.end());
  all.insert(split.early_stop_ids.begin(), split.early_stop_ids.end());
  EXPECT_EQ(all.size(), 1000u);
}

TEST(FinalSplit, DegenerateInputsRejected) {
  EXPECT_THROW(carve_final_split(numbered(10), 0.0, 0), ConfigError);
  EXPECT_THROW(carve_final_split(std::vector<RatedSentence>{}, 0.075, 0), ConfigError);
}

TEST(SplitManifest, JsonShapeAndRoundTrip) {
  const auto split = make_cv_splits(numbered(20), 5, 0.1, 4).at(2);
  const auto j = split_manifest(split, 4);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"fold", "train", "early_stop", "validation", "seed"}));
  EXPECT_EQ(j["seed"].get<std::uint64_t>(), 4u);
  EXPECT_EQ(parse_split_manifest(nlohmann::json::parse(j.dump())), split);
}

}  // namespace
}  // namespace readability
