#pragma once

#include "kronfeat/errors.hpp"

#include <algorithm>
#include <span>
#include <string>
#include <vector>

namespace kronfeat {

/// Distinct labels in lexicographic order; class index k refers to entry k.
inline std::vector<std::string> sorted_classes(std::span<const std::string> labels) {
  std::vector<std::string> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return classes;
}

/// Throws ContractError for labels missing from `classes`.
inline std::vector<int> encode_labels(std::span<const std::string> labels, const std::vector<std::string>& classes) {
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    auto it = std::lower_bound(classes.begin(), classes.end(), l);
    if (it == classes.end() || *it != l) throw ContractError("unknown class label '" + l + "'");
    out.push_back(static_cast<int>(it - classes.begin()));
  }
  return out;
}

}  // namespace kronfeat
