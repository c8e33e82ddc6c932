#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace readability {

/// Sentence id -> embedding, as exported from an external model. Every row
/// has the same dimension.
class PrecomputedEmbeddings {
 public:
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return order_.size(); }
  /// Ids in file order.
  const std::vector<std::string>& ids() const { return order_; }
  bool contains(std::string_view id) const;
  /// Throws Error naming the id when it is missing.
  const std::vector<double>& at(std::string_view id) const;

  /// Throws FormatError on a dimension mismatch or duplicate id.
  void add(std::string id, std::vector<double> values);

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::vector<double>> table_;
};

/// JSONL, one `{"id": ..., "dim": ..., "values": [...]}` object per line.
PrecomputedEmbeddings read_precomputed(std::istream& in);
PrecomputedEmbeddings load_precomputed(const std::filesystem::path& path);

void write_precomputed(std::ostream& out, const PrecomputedEmbeddings& embeddings);
void store_precomputed(const std::filesystem::path& path, const PrecomputedEmbeddings& embeddings);

}  // namespace readability
