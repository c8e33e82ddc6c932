#pragma once

#include <string>
#include <string_view>

namespace readability {

/// Model family of an ensemble member: A is bidirectional with CLS pooling,
/// B is causal with EOS pooling.
enum class ModelFamily { A, B };

std::string to_string(ModelFamily family);
ModelFamily parse_family(std::string_view text);

}  // namespace readability
