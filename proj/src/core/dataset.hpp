#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace colltrain {

using CategoryCode = std::uint16_t;
using Label = std::uint8_t;

/// Rows of small-integer category codes with a binary label each.
/// Codes of feature f are always < arity(f).
class CategoricalDataset {
 public:
  CategoricalDataset() = default;
  explicit CategoricalDataset(std::vector<CategoryCode> arity);

  /// Appends a row; throws InvalidArgument on length, code, or label violations.
  void add_row(std::span<const CategoryCode> features, Label label);

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  std::size_t num_features() const noexcept { return arity_.size(); }
  std::span<const CategoryCode> arity() const noexcept { return arity_; }

  std::span<const CategoryCode> row(std::size_t i) const {
    return {codes_.data() + i * num_features(), num_features()};
  }
  CategoryCode code(std::size_t i, std::size_t f) const { return codes_[i * num_features() + f]; }
  Label label(std::size_t i) const { return labels_[i]; }
  std::span<const Label> labels() const noexcept { return labels_; }

  /// Rows picked by index (repeats allowed), same schema.
  CategoricalDataset select(std::span<const std::size_t> indices) const;

  /// Concatenation of same-schema datasets.
  static CategoricalDataset concat(std::span<const CategoricalDataset> parts);

  friend bool operator==(const CategoricalDataset&, const CategoricalDataset&) = default;

 private:
  std::vector<CategoryCode> arity_;
  std::vector<CategoryCode> codes_;
  std::vector<Label> labels_;
};

/// Symbol tables recorded at load time, in first-appearance order.
struct SymbolMapping {
  std::vector<std::vector<std::string>> feature_symbols;
  std::vector<std::string> label_symbols;
  friend bool operator==(const SymbolMapping&, const SymbolMapping&) = default;
};

struct LoadedDataset {
  CategoricalDataset data;
  SymbolMapping mapping;
};

/// Comma-separated categorical file, last field is the class. Symbols become
/// dense codes in first-appearance order per column; the first class symbol
/// seen becomes label 0. Blank lines are skipped.
/// Throws IoError if unreadable, DataError (with line number) on ragged rows,
/// more than two classes, or an empty file.
LoadedDataset load_categorical_csv(const std::filesystem::path& path);
LoadedDataset parse_categorical_csv(std::string_view text);

/// Inverse of the loader for any dataset whose codes are covered by `mapping`.
std::string format_categorical_csv(const CategoricalDataset& data, const SymbolMapping& mapping);

struct SplitSpec {
  std::size_t train_count = 2000;
  std::size_t test_count = 1196;
  std::size_t num_shards = 20;
  std::uint64_t seed = 0;
};

struct ShardedSplit {
  std::vector<CategoricalDataset> shards;
  CategoricalDataset test;
  /// Original row indices, shards first then test, in assignment order.
  std::vector<std::size_t> permutation;
};

/// Seeded uniform permutation; the first train_count rows are dealt into
/// num_shards equal consecutive shards, the next test_count rows form the
/// test set. Throws InvalidArgument if train_count is not divisible by
/// num_shards or train_count + test_count exceeds the dataset.
ShardedSplit split_and_shard(const CategoricalDataset& ds, const SplitSpec& spec);

struct SyntheticSpec {
  std::size_t rows = 3196;
  std::size_t features = 36;
  CategoryCode arity = 2;
  std::size_t rule_depth = 6;
  double noise_rate = 0.05;
  std::uint64_t seed = 0;
};

class DecisionTree;

struct SyntheticDataset {
  CategoricalDataset data;
  /// Noise-free labelling rule; clean labels are rule.predict(row).
  std::vector<Label> clean_labels;
  std::size_t flipped = 0;
  std::string rule;  // serialized DecisionTree
};

/// Uniform random features, labels from a random decision list of rule_depth tests,
/// each label flipped with probability noise_rate.
SyntheticDataset synthetic_categorical(const SyntheticSpec& spec);

}  // namespace colltrain
