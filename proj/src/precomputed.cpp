#include "readability/precomputed.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "readability/error.hpp"

namespace readability {

bool PrecomputedEmbeddings::contains(std::string_view id) const { return table_.contains(std::string(id)); }

const std::vector<double>& PrecomputedEmbeddings::at(std::string_view id) const {
  const auto it = table_.find(std::string(id));
  if (it == table_.end()) throw Error("no precomputed embedding for sentence '" + std::string(id) + "'");
  return it->second;
}

void PrecomputedEmbeddings::add(std::string id, std::vector<double> values) {
  if (values.empty()) throw FormatError("embedding for '" + id + "' is empty");
  if (!order_.empty() && values.size() != dim_) {
    throw FormatError("embedding for '" + id + "' has dimension " + std::to_string(values.size()) + ", expected " +
                      std::to_string(dim_));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw FormatError("embedding for '" + id + "' has a non-finite value");
  }
  if (table_.contains(id)) throw FormatError("duplicate embedding id '" + id + "'");
  dim_ = values.size();
  order_.push_back(id);
  table_.emplace(std::move(id), std::move(values));
}

PrecomputedEmbeddings read_precomputed(std::istream& in) {
  PrecomputedEmbeddings out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto row = nlohmann::json::parse(line);
      auto id = row.at("id").get<std::string>();
      const auto dim = row.at("dim").get<std::size_t>();
      auto values = row.at("values").get<std::vector<double>>();
      if (values.size() != dim) {
        throw FormatError("declared dim " + std::to_string(dim) + " but " + std::to_string(values.size()) +
                          " values");
      }
      out.add(std::move(id), std::move(values));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("embedding line " + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("embedding line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

PrecomputedEmbeddings load_precomputed(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_precomputed(in);
}

void write_precomputed(std::ostream& out, const PrecomputedEmbeddings& embeddings) {
  for (const auto& id : embeddings.ids()) {
    nlohmann::ordered_json row;
    row["id"] = id;
    row["dim"] = embeddings.dim();
    row["values"] = embeddings.at(id);
    out << row.dump() << '\n';
  }
}

void store_precomputed(const std::filesystem::path& path, const PrecomputedEmbeddings& embeddings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_precomputed(out, embeddings);
}

}  // namespace readability
