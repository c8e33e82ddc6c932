#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "readability/corpus.hpp"
#include "readability/family.hpp"

namespace readability {

inline constexpr double kDefaultFloor = 1.0;

/// Mean of the member scores strictly above floor; returns floor when no
/// score survives. Throws on an empty list.
double ensemble_predict(std::span<const double> member_scores, double floor = kDefaultFloor);

struct PoolMember {
  std::string member_id;
  ModelFamily family = ModelFamily::A;
  int fold = 0;
  std::vector<double> predictions;  // aligned with the fold's sentence ids
};

/// Validation-set predictions of many trained members, grouped by fold.
class PredictionPool {
 public:
  /// Declares the sentence order of a fold.
  void add_fold(int fold, std::vector<std::string> sentence_ids);
  /// Throws unless the fold exists, predictions align with it, and the
  /// (fold, family, member_id) key is new.
  void add_member(PoolMember member);

  std::vector<int> folds() const;
  const std::vector<std::string>& sentence_ids(int fold) const;
  const std::vector<PoolMember>& members() const { return members_; }
  /// Indices into members() for one fold and family.
  std::vector<std::size_t> member_indices(int fold, ModelFamily family) const;

 private:
  std::map<int, std::vector<std::string>> fold_ids_;
  std::vector<PoolMember> members_;
};

/// Labels per fold in the pool's sentence order, looked up by id.
std::map<int, std::vector<double>> pool_labels(const PredictionPool& pool, std::span<const RatedSentence> corpus);

/// Long CSV `member,family,fold,id,prediction`.
void write_pool_csv(std::ostream& out, const PoolMember& member, std::span<const std::string> sentence_ids);
/// Reads every *.csv file of a directory (in file-name order).
PredictionPool load_pool_dir(const std::filesystem::path& dir);
PredictionPool read_pool_csv(std::istream& in, PredictionPool pool = {});

enum class Composition { FamilyA, FamilyB, MixedEqual };

std::string to_string(Composition composition);
Composition parse_composition(std::string_view text);

struct BootstrapOptions {
  std::vector<std::size_t> sizes;
  std::vector<Composition> compositions{Composition::FamilyA, Composition::FamilyB, Composition::MixedEqual};
  std::size_t n_resamples = 1000;
  std::uint64_t seed = 0;
  double floor = kDefaultFloor;
  int jobs = 1;
};

struct BootstrapRow {
  std::size_t size = 0;
  Composition composition = Composition::FamilyA;
  double mean_rmse = 0.0;
  double std_rmse = 0.0;  // population standard deviation over resamples
  std::size_t n_resamples = 0;
};

using BootstrapReport = std::vector<BootstrapRow>;

/// For every (composition, size): draw n_resamples ensembles with
/// replacement per fold (mixed-equal draws size/2 per family), score the
/// filtered ensemble on each fold, average the fold RMSEs, and report the
/// mean and spread of those averages. Rows come out composition-major in
/// option order; each row uses its own derived seed.
BootstrapReport bootstrap_study(const PredictionPool& pool, const std::map<int, std::vector<double>>& labels,
                                const BootstrapOptions& options);

/// `size,composition,mean_rmse,std_rmse,n_resamples`
void write_report_csv(std::ostream& out, const BootstrapReport& report);
/// Whitespace-separated per-size table for gnuplot, one mean/std column
/// pair per composition.
void write_curve_file(std::ostream& out, const BootstrapReport& report);

/// Parses "1..60", "1,5,20,60" or a mix ("1..4,10").
std::vector<std::size_t> parse_sizes(std::string_view text);

}  // namespace readability
