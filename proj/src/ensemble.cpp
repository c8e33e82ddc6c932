#include "readability/ensemble.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <tuple>
#include <unordered_map>

#include "readability/csv.hpp"
#include "readability/error.hpp"
#include "readability/metrics.hpp"
#include "readability/parallel.hpp"
#include "readability/rng.hpp"

namespace readability {

double ensemble_predict(std::span<const double> member_scores, double floor) {
  if (member_scores.empty()) throw Error("ensemble_predict: no member scores");
  double sum = 0.0;
  std::size_t kept = 0;
  for (double s : member_scores) {
    if (s > floor) {
      sum += s;
      ++kept;
    }
  }
  return kept == 0 ? floor : sum / static_cast<double>(kept);
}

void PredictionPool::add_fold(int fold, std::vector<std::string> sentence_ids) {
  if (sentence_ids.empty()) throw Error("fold " + std::to_string(fold) + " has no sentences");
  const auto [it, inserted] = fold_ids_.emplace(fold, std::move(sentence_ids));
  if (!inserted) throw Error("fold " + std::to_string(fold) + " declared twice");
}

void PredictionPool::add_member(PoolMember member) {
  const auto it = fold_ids_.find(member.fold);
  if (it == fold_ids_.end()) throw Error("member '" + member.member_id + "' refers to unknown fold");
  if (member.predictions.size() != it->second.size()) {
    throw Error("member '" + member.member_id + "' has " + std::to_string(member.predictions.size()) +
                " predictions for a fold of " + std::to_string(it->second.size()));
  }
  for (double p : member.predictions) {
    if (!std::isfinite(p)) throw Error("member '" + member.member_id + "' has a non-finite prediction");
  }
  for (const auto& m : members_) {
    if (m.fold == member.fold && m.family == member.family && m.member_id == member.member_id) {
      throw Error("member '" + member.member_id + "' appears twice in fold " + std::to_string(member.fold));
    }
  }
  members_.push_back(std::move(member));
}

std::vector<int> PredictionPool::folds() const {
  std::vector<int> out;
  for (const auto& [fold, ids] : fold_ids_) out.push_back(fold);
  return out;
}

const std::vector<std::string>& PredictionPool::sentence_ids(int fold) const {
  const auto it = fold_ids_.find(fold);
  if (it == fold_ids_.end()) throw Error("unknown fold " + std::to_string(fold));
  return it->second;
}

std::vector<std::size_t> PredictionPool::member_indices(int fold, ModelFamily family) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (members_[i].fold == fold && members_[i].family == family) out.push_back(i);
  }
  return out;
}

std::map<int, std::vector<double>> pool_labels(const PredictionPool& pool, std::span<const RatedSentence> corpus) {
  std::unordered_map<std::string, double> mos;
  for (const auto& s : corpus) mos.emplace(s.id, s.mos);
  std::map<int, std::vector<double>> out;
  for (int fold : pool.folds()) {
    auto& labels = out[fold];
    for (const auto& id : pool.sentence_ids(fold)) {
      const auto it = mos.find(id);
      if (it == mos.end()) throw Error("pool sentence '" + id + "' is not in the corpus");
      labels.push_back(it->second);
    }
  }
  return out;
}

void write_pool_csv(std::ostream& out, const PoolMember& member, std::span<const std::string> sentence_ids) {
  if (sentence_ids.size() != member.predictions.size()) throw Error("write_pool_csv: id/prediction count mismatch");
  csv::write_row(out, {"member", "family", "fold", "id", "prediction"});
  for (std::size_t i = 0; i < sentence_ids.size(); ++i) {
    csv::write_row(out, {member.member_id, to_string(member.family), std::to_string(member.fold), sentence_ids[i],
                         csv::format_double(member.predictions[i])});
  }
}

PredictionPool read_pool_csv(std::istream& in, PredictionPool pool) {
  const auto records = csv::read(in);
  if (records.empty() ||
      records.front().fields != std::vector<std::string>{"member", "family", "fold", "id", "prediction"}) {
    throw FormatError("pool CSV header must be 'member,family,fold,id,prediction'");
  }
  // (fold, family, member) -> rows, in first-appearance order.
  using Key = std::tuple<int, ModelFamily, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<std::pair<std::string, double>>> rows;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string where = "pool line " + std::to_string(rec.line);
    if (rec.fields.size() != 5) throw FormatError(where + ": expected 5 fields");
    int fold = 0;
    const auto& fs = rec.fields[2];
    if (std::from_chars(fs.data(), fs.data() + fs.size(), fold).ptr != fs.data() + fs.size() || fs.empty()) {
      throw FormatError(where + ": bad fold '" + fs + "'");
    }
    ModelFamily family;
    try {
      family = parse_family(rec.fields[1]);
    } catch (const ConfigError& e) {
      throw FormatError(where + ": " + e.what());
    }
    Key key{fold, family, rec.fields[0]};
    auto [it, inserted] = rows.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.emplace_back(rec.fields[3], csv::parse_double(rec.fields[4], where));
  }

  std::set<int> known;
  for (int f : pool.folds()) known.insert(f);
  for (const auto& key : order) {
    const auto& [fold, family, member_id] = key;
    const auto& entries = rows.at(key);
    if (!known.contains(fold)) {
      std::vector<std::string> ids;
      for (const auto& e : entries) ids.push_back(e.first);
      pool.add_fold(fold, std::move(ids));
      known.insert(fold);
    }
    const auto& ids = pool.sentence_ids(fold);
    std::unordered_map<std::string, double> by_id;
    for (const auto& [id, value] : entries) {
      if (!by_id.emplace(id, value).second) throw FormatError("member '" + member_id + "' repeats sentence '" + id + "'");
    }
    if (by_id.size() != ids.size()) {
      throw FormatError("member '" + member_id + "' does not cover the sentence set of fold " + std::to_string(fold));
    }
    PoolMember m{member_id, family, fold, {}};
    for (const auto& id : ids) {
      const auto it = by_id.find(id);
      if (it == by_id.end()) throw FormatError("member '" + member_id + "' is missing sentence '" + id + "'");
      m.predictions.push_back(it->second);
    }
    pool.add_member(std::move(m));
  }
  return pool;
}

PredictionPool load_pool_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("pool directory " + dir.string() + " does not exist");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("pool directory " + dir.string() + " contains no CSV files");
  PredictionPool pool;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw Error("cannot open " + f.string());
    try {
      pool = read_pool_csv(in, std::move(pool));
    } catch (const Error& e) {
      throw FormatError(f.filename().string() + ": " + e.what());
    }
  }
  return pool;
}

std::string to_string(Composition composition) {
  switch (composition) {
    case Composition::FamilyA:
      return "a";
    case Composition::FamilyB:
      return "b";
    case Composition::MixedEqual:
      return "mixed";
  }
  return "unknown";
}

Composition parse_composition(std::string_view text) {
  if (text == "a") return Composition::FamilyA;
  if (text == "b") return Composition::FamilyB;
  if (text == "mixed") return Composition::MixedEqual;
  throw ConfigError("unknown composition '" + std::string(text) + "' (expected a, b or mixed)");
}

namespace {

struct FoldMembers {
  std::vector<const std::vector<double>*> family_a;
  std::vector<const std::vector<double>*> family_b;
  const std::vector<double>* labels = nullptr;
};

BootstrapRow run_row(const std::vector<FoldMembers>& folds, Composition composition, std::size_t size,
                     const BootstrapOptions& options) {
  Rng rng = Rng(options.seed).derive("bootstrap").derive(to_string(composition)).derive(size);
  const std::size_t from_a = composition == Composition::FamilyA     ? size
                             : composition == Composition::MixedEqual ? size / 2
                                                                      : 0;
  const std::size_t from_b = size - from_a;

  std::vector<double> averaged(options.n_resamples);
  std::vector<const std::vector<double>*> chosen(size);
  std::vector<double> scores(size);
  std::vector<double> fold_rmse(folds.size());
  std::vector<double> ensemble;
  for (std::size_t r = 0; r < options.n_resamples; ++r) {
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const auto& fm = folds[f];
      for (std::size_t i = 0; i < from_a; ++i) chosen[i] = fm.family_a[rng.below(fm.family_a.size())];
      for (std::size_t i = 0; i < from_b; ++i) chosen[from_a + i] = fm.family_b[rng.below(fm.family_b.size())];
      const std::size_t n = fm.labels->size();
      ensemble.resize(n);
      for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t m = 0; m < size; ++m) scores[m] = (*chosen[m])[s];
        ensemble[s] = ensemble_predict(scores, options.floor);
      }
      fold_rmse[f] = rmse(*fm.labels, ensemble);
    }
    averaged[r] = cv_average(fold_rmse);
  }

  const double n = static_cast<double>(averaged.size());
  double mean = 0.0;
  for (double v : averaged) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : averaged) var += (v - mean) * (v - mean);
  return {size, composition, mean, std::sqrt(var / n), options.n_resamples};
}

}  // namespace

BootstrapReport bootstrap_study(const PredictionPool& pool, const std::map<int, std::vector<double>>& labels,
                                const BootstrapOptions& options) {
  if (options.n_resamples == 0) throw ConfigError("n_resamples must be positive");
  if (options.sizes.empty()) throw ConfigError("no ensemble sizes requested");
  if (options.compositions.empty()) throw ConfigError("no compositions requested");
  for (auto size : options.sizes) {
    if (size == 0) throw ConfigError("ensemble size must be positive");
    for (auto c : options.compositions) {
      if (c == Composition::MixedEqual && size % 2 != 0) {
        throw ConfigError("mixed-equal ensembles need an even size, got " + std::to_string(size));
      }
    }
  }
  const bool need_a = std::any_of(options.compositions.begin(), options.compositions.end(),
                                  [](auto c) { return c != Composition::FamilyB; });
  const bool need_b = std::any_of(options.compositions.begin(), options.compositions.end(),
                                  [](auto c) { return c != Composition::FamilyA; });

  std::vector<FoldMembers> folds;
  for (int fold : pool.folds()) {
    FoldMembers fm;
    for (auto i : pool.member_indices(fold, ModelFamily::A)) fm.family_a.push_back(&pool.members()[i].predictions);
    for (auto i : pool.member_indices(fold, ModelFamily::B)) fm.family_b.push_back(&pool.members()[i].predictions);
    if ((need_a && fm.family_a.empty()) || (need_b && fm.family_b.empty())) {
      throw Error("fold " + std::to_string(fold) + " lacks members of a family required by the compositions");
    }
    const auto it = labels.find(fold);
    if (it == labels.end() || it->second.size() != pool.sentence_ids(fold).size()) {
      throw Error("labels missing or misaligned for fold " + std::to_string(fold));
    }
    fm.labels = &it->second;
    folds.push_back(std::move(fm));
  }
  if (folds.empty()) throw Error("prediction pool has no folds");

  BootstrapReport report(options.compositions.size() * options.sizes.size());
  parallel_for(report.size(), options.jobs, [&](std::size_t i) {
    const auto composition = options.compositions[i / options.sizes.size()];
    const auto size = options.sizes[i % options.sizes.size()];
    report[i] = run_row(folds, composition, size, options);
  });
  return report;
}

void write_report_csv(std::ostream& out, const BootstrapReport& report) {
  csv::write_row(out, {"size", "composition", "mean_rmse", "std_rmse", "n_resamples"});
  for (const auto& row : report) {
    csv::write_row(out, {std::to_string(row.size), to_string(row.composition), csv::format_double(row.mean_rmse),
                         csv::format_double(row.std_rmse), std::to_string(row.n_resamples)});
  }
}

void write_curve_file(std::ostream& out, const BootstrapReport& report) {
  std::vector<Composition> compositions;
  std::map<std::size_t, std::map<Composition, const BootstrapRow*>> by_size;
  for (const auto& row : report) {
    if (std::find(compositions.begin(), compositions.end(), row.composition) == compositions.end()) {
      compositions.push_back(row.composition);
    }
    by_size[row.size][row.composition] = &row;
  }
  out << "# size";
  for (auto c : compositions) out << ' ' << to_string(c) << "_mean " << to_string(c) << "_std";
  out << '\n';
  for (const auto& [size, rows] : by_size) {
    out << size;
    for (auto c : compositions) {
      const auto it = rows.find(c);
      if (it == rows.end()) {
        out << " nan nan";
      } else {
        out << ' ' << csv::format_double(it->second->mean_rmse) << ' ' << csv::format_double(it->second->std_rmse);
      }
    }
    out << '\n';
  }
}

std::vector<std::size_t> parse_sizes(std::string_view text) {
  auto parse_one = [&](std::string_view s) {
    std::size_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size() || v == 0) {
      throw ConfigError("bad ensemble size '" + std::string(s) + "' in '" + std::string(text) + "'");
    }
    return v;
  };
  std::vector<std::size_t> sizes;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    const auto dots = item.find("..");
    if (dots == std::string_view::npos) {
      sizes.push_back(parse_one(item));
    } else {
      const auto lo = parse_one(item.substr(0, dots));
      const auto hi = parse_one(item.substr(dots + 2));
      if (hi < lo) throw ConfigError("empty size range '" + std::string(item) + "'");
      for (auto s = lo; s <= hi; ++s) sizes.push_back(s);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return sizes;
}

}  // namespace readability
