#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "core/dataset.hpp"

namespace colltrain {

class PredictionVector;

struct TreeParams {
  std::size_t max_depth = 10;
  std::size_t min_leaf = 1;
};

/// Binary classification tree over categorical features. Each internal node
/// sends a subset of one feature's categories left and the rest right; every
/// code in [0, 64) has a side, so prediction is total. Codes never seen at a
/// node during training follow the side that received more training rows.
class DecisionTree {
 public:
  static constexpr std::size_t kMaxArity = 64;
  static constexpr std::uint32_t kNoChild = static_cast<std::uint32_t>(-1);

  struct Node {
    std::int32_t feature = -1;  // -1 for leaves
    std::uint64_t left_mask = 0;
    std::uint32_t left = kNoChild;
    std::uint32_t right = kNoChild;
    Label label = 0;      // majority training label at this node
    double purity = 1.0;  // fraction of training rows carrying `label`
    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };

  DecisionTree() : DecisionTree(0, {Node{}}) {}

  /// Validates that children are in range, every node is reached exactly
  /// once from node 0, and no path tests a feature twice.
  DecisionTree(std::size_t num_features, std::vector<Node> nodes);

  std::size_t num_features() const noexcept { return num_features_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const;
  std::size_t num_leaves() const;

  Label predict_row(std::span<const CategoryCode> row) const;

  /// Nested text form:
  ///   (leaf <label> <purity>)
  ///   (split <feature> {<left codes>} <left> <right>)
  /// prefixed by "tree <num_features> ".
  std::string serialize() const;
  static DecisionTree parse(std::string_view text);

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::size_t num_features_ = 0;
  std::vector<Node> nodes_;
};

/// Greedy top-down induction minimizing weighted Gini impurity over binary
/// category partitions. A node becomes a leaf at max_depth, when pure, or
/// when no partition of an unused feature leaves min_leaf rows on both sides.
/// Among equal-impurity splits the lowest feature wins, then the partition
/// whose left-category bitmask is smallest. Leaf labels are majorities, ties to 0.
/// Throws InvalidArgument on empty data or arity above 64.
DecisionTree train_tree(const CategoricalDataset& data, const TreeParams& params = {});

/// One bit per row. Throws InvalidArgument on a feature-count mismatch.
PredictionVector predict(const DecisionTree& tree, const CategoricalDataset& data);

/// Fraction of rows whose prediction differs from the label.
double error_rate(const DecisionTree& tree, const CategoricalDataset& data);

}  // namespace colltrain
