#pragma once

#include <initializer_list>
#include <vector>

#include "core/dataset.hpp"
#include "core/random.hpp"

namespace colltrain::testing {

// Rows given as lists of codes; arity per feature is 1 + the largest code seen (at least 2).
inline CategoricalDataset make_dataset(std::initializer_list<std::initializer_list<int>> rows,
                                       std::initializer_list<int> labels) {
  std::vector<CategoryCode> arity;
  for (const auto& r : rows) {
    if (arity.empty()) arity.assign(r.size(), 2);
    std::size_t f = 0;
    for (int c : r) {
      arity[f] = std::max<CategoryCode>(arity[f], static_cast<CategoryCode>(c + 1));
      ++f;
    }
  }
  CategoricalDataset ds(arity);
  auto label = labels.begin();
  for (const auto& r : rows) {
    std::vector<CategoryCode> codes;
    for (int c : r) codes.push_back(static_cast<CategoryCode>(c));
    ds.add_row(codes, static_cast<Label>(*label++));
  }
  return ds;
}

// Uniform codes and labels, no structure.
inline CategoricalDataset random_dataset(std::size_t rows, std::size_t features,
                                         CategoryCode arity, std::uint64_t seed) {
  Rng rng(seed);
  CategoricalDataset ds(std::vector<CategoryCode>(features, arity));
  std::vector<CategoryCode> row(features);
  for (std::size_t i = 0; i < rows; ++i) {
    for (auto& c : row) c = static_cast<CategoryCode>(uniform_index(rng, arity));
    ds.add_row(row, static_cast<Label>(rng() & 1U));
  }
  return ds;
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

}  // namespace colltrain::testing
