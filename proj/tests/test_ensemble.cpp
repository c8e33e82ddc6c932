#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "readability/ensemble.hpp"
#include "readability/error.hpp"
#include "readability/metrics.hpp"
#include "readability/rng.hpp"

namespace readability {
namespace {

TEST(EnsemblePredict, Examples) {
  EXPECT_DOUBLE_EQ(ensemble_predict(std::vector<double>{0.8, 1.2, 2.0}), 1.6);
  EXPECT_EQ(ensemble_predict(std::vector<double>{1.5}), 1.5);
  EXPECT_EQ(ensemble_predict(std::vector<double>{0.5, 0.9}), 1.0);
  EXPECT_THROW(ensemble_predict(std::vector<double>{}), Error);
}

TEST(EnsemblePredict, FilterIsStrict) {
  EXPECT_EQ(ensemble_predict(std::vector<double>{1.0, 3.0}), 3.0);
  EXPECT_EQ(ensemble_predict(std::vector<double>{1.0}), 1.0);
  EXPECT_EQ(ensemble_predict(std::vector<double>{2.0, 4.0}, 2.0), 4.0);
}

TEST(EnsemblePredict, PropertiesOnRandomScores) {
  Rng rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> s(1 + rng.below(12));
    for (auto& v : s) v = 7.5 * rng.uniform();
    const double e = ensemble_predict(s);
    std::vector<double> kept;
    for (double v : s) {
      if (v > 1.0) kept.push_back(v);
    }
    if (kept.empty()) {
      EXPECT_EQ(e, 1.0);
    } else {
      EXPECT_GE(e, *std::min_element(kept.begin(), kept.end()) - 1e-12);
      EXPECT_LE(e, *std::max_element(kept.begin(), kept.end()) + 1e-12);
    }
    auto shuffled = s;
    rng.shuffle(shuffled);
    EXPECT_NEAR(ensemble_predict(shuffled), e, 1e-12);
    if (kept.size() == s.size()) {
      double mean = 0.0;
      for (double v : s) mean += v / static_cast<double>(s.size());
      EXPECT_NEAR(e, mean, 1e-12);
    }
  }
}

TEST(Composition, Names) {
  EXPECT_EQ(parse_composition("a"), Composition::FamilyA);
  EXPECT_EQ(parse_composition("b"), Composition::FamilyB);
  EXPECT_EQ(parse_composition("mixed"), Composition::MixedEqual);
  EXPECT_EQ(to_string(Composition::MixedEqual), "mixed");
  EXPECT_THROW(parse_composition("c"), ConfigError);
}

TEST(ParseSizes, RangesAndLists) {
  EXPECT_EQ(parse_sizes("1..4"), (std::vector<std::size_t>{1, 2, 3, 4}));
  EXPECT_EQ(parse_sizes("1,5,20,60"), (std::vector<std::size_t>{1, 5, 20, 60}));
  EXPECT_EQ(parse_sizes("1..3,10"), (std::vector<std::size_t>{1, 2, 3, 10}));
  EXPECT_EQ(parse_sizes("1..60").size(), 60u);
  EXPECT_THROW(parse_sizes("5..2"), ConfigError);
  EXPECT_THROW(parse_sizes("x"), ConfigError);
}

struct Pool {
  PredictionPool pool;
  std::map<int, std::vector<double>> labels;
};

// Every member predicts truth + iid N(0, sigma) per sentence.
Pool noisy_pool(int folds, std::size_t per_fold, std::size_t members, double sigma, std::uint64_t seed) {
  Pool p;
  Rng rng(seed);
  for (int f = 0; f < folds; ++f) {
    std::vector<std::string> ids;
    std::vector<double> y;
    for (std::size_t i = 0; i < per_fold; ++i) {
      ids.push_back("f" + std::to_string(f) + "s" + std::to_string(i));
      y.push_back(2.0 + 4.0 * rng.uniform());
    }
    p.pool.add_fold(f, ids);
    for (auto family : {ModelFamily::A, ModelFamily::B}) {
      for (std::size_t m = 0; m < members; ++m) {
        PoolMember pm{to_string(family) + std::to_string(m), family, f, {}};
        for (double v : y) pm.predictions.push_back(v + sigma * rng.normal());
        p.pool.add_member(pm);
      }
    }
    p.labels[f] = y;
  }
  return p;
}

TEST(PredictionPool, Validation) {
  PredictionPool pool;
  pool.add_fold(0, {"a", "b"});
  EXPECT_THROW(pool.add_fold(0, {"c"}), Error);
  EXPECT_THROW(pool.add_member({"m", ModelFamily::A, 1, {1.0, 2.0}}), Error);
  EXPECT_THROW(pool.add_member({"m", ModelFamily::A, 0, {1.0}}), Error);
  EXPECT_THROW(pool.add_member({"m", ModelFamily::A, 0, {1.0, std::nan("")}}), Error);
  pool.add_member({"m", ModelFamily::A, 0, {1.0, 2.0}});
  EXPECT_THROW(pool.add_member({"m", ModelFamily::A, 0, {1.0, 2.0}}), Error);
  EXPECT_EQ(pool.member_indices(0, ModelFamily::A).size(), 1u);
  EXPECT_TRUE(pool.member_indices(0, ModelFamily::B).empty());
}

TEST(PoolCsv, RoundTripThroughDirectory) {
  const auto p = noisy_pool(2, 5, 2, 0.3, 3);
  const auto dir = std::filesystem::temp_directory_path() / "readability_pool_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  for (const auto& m : p.pool.members()) {
    std::ofstream out(dir / (m.member_id + "_fold" + std::to_string(m.fold) + ".csv"));
    write_pool_csv(out, m, p.pool.sentence_ids(m.fold));
  }
  const auto back = load_pool_dir(dir);
  EXPECT_EQ(back.folds(), p.pool.folds());
  ASSERT_EQ(back.members().size(), p.pool.members().size());
  for (int f : back.folds()) {
    EXPECT_EQ(back.sentence_ids(f), p.pool.sentence_ids(f));
    for (auto family : {ModelFamily::A, ModelFamily::B}) {
      const auto a = back.member_indices(f, family);
      const auto b = p.pool.member_indices(f, family);
      ASSERT_EQ(a.size(), b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(back.members()[a[i]].predictions, p.pool.members()[b[i]].predictions);
      }
    }
  }
  std::filesystem::remove_all(dir);
}

TEST(PoolCsv, ReorderedRowsAlignToFirstMember) {
  std::istringstream in(
      "member,family,fold,id,prediction\n"
      "m0,a,0,x,1.5\nm0,a,0,y,2.5\n"
      "m1,b,0,y,4\nm1,b,0,x,3\n");
  const auto pool = read_pool_csv(in);
  const auto b = pool.member_indices(0, ModelFamily::B);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(pool.members()[b[0]].predictions, (std::vector<double>{3.0, 4.0}));
  std::istringstream missing(
      "member,family,fold,id,prediction\n"
      "m0,a,0,x,1.5\nm0,a,0,y,2.5\n"
      "m1,b,0,y,4\n");
  EXPECT_THROW(read_pool_csv(missing), FormatError);
}

TEST(Bootstrap, IdenticalMembersHaveZeroSpread) {
  PredictionPool pool;
  std::map<int, std::vector<double>> labels;
  std::vector<double> fold_rmse;
  for (int f = 0; f < 3; ++f) {
    pool.add_fold(f, {"a" + std::to_string(f), "b" + std::to_string(f), "c" + std::to_string(f)});
    labels[f] = {2.0, 3.0, 4.0 + f};
    const std::vector<double> pred{2.5, 2.0, 4.0};
    for (int m = 0; m < 4; ++m) {
      pool.add_member({"a" + std::to_string(m), ModelFamily::A, f, pred});
      pool.add_member({"b" + std::to_string(m), ModelFamily::B, f, pred});
    }
    fold_rmse.push_back(rmse(labels[f], pred));
  }
  BootstrapOptions o;
  o.sizes = {2, 4, 10};
  o.n_resamples = 50;
  o.seed = 1;
  for (const auto& row : bootstrap_study(pool, labels, o)) {
    EXPECT_NEAR(row.std_rmse, 0.0, 1e-12);
    EXPECT_NEAR(row.mean_rmse, cv_average(fold_rmse), 1e-12);
    EXPECT_EQ(row.n_resamples, 50u);
  }
}

TEST(Bootstrap, SizeOneSamplesSingleMembers) {
  PredictionPool pool;
  pool.add_fold(0, {"x", "y"});
  pool.add_member({"m0", ModelFamily::A, 0, {2.0, 3.0}});
  pool.add_member({"m1", ModelFamily::A, 0, {3.0, 4.0}});
  std::map<int, std::vector<double>> labels{{0, {2.0, 3.0}}};
  BootstrapOptions o;
  o.sizes = {1};
  o.compositions = {Composition::FamilyA};
  o.n_resamples = 4000;
  o.seed = 7;
  const auto row = bootstrap_study(pool, labels, o).at(0);
  // Each resample scores 0 or 1 with probability 1/2.
  EXPECT_NEAR(row.mean_rmse, 0.5, 0.03);
  EXPECT_NEAR(row.std_rmse, 0.5, 0.01);
}

TEST(Bootstrap, IndependentNoiseAveragingLaw) {
  const double sigma = 0.5;
  const auto p = noisy_pool(5, 200, 60, sigma, 11);
  BootstrapOptions o;
  o.sizes = {1, 5, 16, 20, 60};
  o.compositions = {Composition::FamilyA};
  o.n_resamples = 300;
  o.seed = 3;
  const auto report = bootstrap_study(p.pool, p.labels, o);
  // n draws with replacement from M members have E[sum of squared counts]
  // = n + n(n-1)/M, so the ensemble noise is sigma * sqrt(that) / n.
  auto expected = [&](double n) { return sigma * std::sqrt(n + n * (n - 1.0) / 60.0) / n; };
  for (const auto& row : report) {
    EXPECT_NEAR(row.mean_rmse, expected(static_cast<double>(row.size)), 0.05 * expected(static_cast<double>(row.size)))
        << row.size;
  }
  EXPECT_GT(report[0].mean_rmse, report[1].mean_rmse);
  EXPECT_GT(report[1].mean_rmse, report[3].mean_rmse);
  EXPECT_GT(report[3].mean_rmse, report[4].mean_rmse);
}

TEST(Bootstrap, DeterministicRowOrderAndJobsIndependence) {
  const auto p = noisy_pool(3, 20, 6, 0.4, 5);
  BootstrapOptions o;
  o.sizes = {2, 4, 6};
  o.n_resamples = 100;
  o.seed = 9;
  const auto one = bootstrap_study(p.pool, p.labels, o);
  o.jobs = 4;
  const auto four = bootstrap_study(p.pool, p.labels, o);
  ASSERT_EQ(one.size(), 9u);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].size, o.sizes[i % 3]);
    EXPECT_EQ(one[i].composition, o.compositions[i / 3]);
    EXPECT_EQ(one[i].mean_rmse, four[i].mean_rmse);
    EXPECT_EQ(one[i].std_rmse, four[i].std_rmse);
  }
}

TEST(Bootstrap, AddingSizesKeepsEarlierRows) {
  const auto p = noisy_pool(2, 10, 5, 0.4, 6);
  BootstrapOptions o;
  o.sizes = {2};
  o.compositions = {Composition::MixedEqual};
  o.n_resamples = 80;
  o.seed = 4;
  const auto small = bootstrap_study(p.pool, p.labels, o);
  o.sizes = {2, 8, 40};
  const auto big = bootstrap_study(p.pool, p.labels, o);
  EXPECT_EQ(small[0].mean_rmse, big[0].mean_rmse);
  EXPECT_EQ(small[0].std_rmse, big[0].std_rmse);
}

TEST(Bootstrap, Errors) {
  const auto p = noisy_pool(2, 5, 2, 0.4, 8);
  BootstrapOptions o;
  o.sizes = {3};
  o.compositions = {Composition::MixedEqual};
  EXPECT_THROW(bootstrap_study(p.pool, p.labels, o), ConfigError);
  o.sizes = {0};
  o.compositions = {Composition::FamilyA};
  EXPECT_THROW(bootstrap_study(p.pool, p.labels, o), ConfigError);
  o.sizes = {1};
  o.n_resamples = 0;
  EXPECT_THROW(bootstrap_study(p.pool, p.labels, o), ConfigError);

  PredictionPool only_a;
  only_a.add_fold(0, {"x"});
  only_a.add_member({"m", ModelFamily::A, 0, {2.0}});
  BootstrapOptions b;
  b.sizes = {2};
  b.compositions = {Composition::MixedEqual};
  EXPECT_THROW(bootstrap_study(only_a, {{0, {2.0}}}, b), Error);
}

TEST(Report, CsvAndCurveFormats) {
  BootstrapReport report{{1, Composition::FamilyA, 0.5, 0.1, 10},
                         {2, Composition::FamilyA, 0.25, 0.05, 10},
                         {2, Composition::MixedEqual, 0.2, 0.04, 10}};
  std::ostringstream csv;
  write_report_csv(csv, report);
  EXPECT_EQ(csv.str(),
            "size,composition,mean_rmse,std_rmse,n_resamples\n"
            "1,a,0.5,0.1,10\n2,a,0.25,0.05,10\n2,mixed,0.2,0.04,10\n");
  std::ostringstream curve;
  write_curve_file(curve, report);
  EXPECT_EQ(curve.str(),
            "# size a_mean a_std mixed_mean mixed_std\n"
            "1 0.5 0.1 nan nan\n"
            "2 0.25 0.05 0.2 0.04\n");
}

}  // namespace
}  // namespace readability
