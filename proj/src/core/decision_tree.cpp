#include "core/decision_tree.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cctype>
#include <numeric>
#include <optional>
#include <sstream>

#include "core/errors.hpp"
#include "core/prediction.hpp"

namespace colltrain {

DecisionTree::DecisionTree(std::size_t num_features, std::vector<Node> nodes)
    : num_features_(num_features), nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw InvalidArgument("decision tree: no nodes");
  std::vector<int> visits(nodes_.size(), 0);
  struct Frame {
    std::uint32_t node;
    std::vector<bool> used;
  };
  std::vector<Frame> stack{{0, std::vector<bool>(num_features_, false)}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (++visits[f.node] > 1) throw InvalidArgument("decision tree: node reached twice");
    const Node& n = nodes_[f.node];
    if (n.label > 1) throw InvalidArgument("decision tree: label must be 0 or 1");
    if (n.is_leaf()) continue;
    const auto feat = static_cast<std::size_t>(n.feature);
    if (feat >= num_features_) throw InvalidArgument("decision tree: feature out of range");
    if (f.used[feat]) throw InvalidArgument("decision tree: feature tested twice on a path");
    if (n.left >= nodes_.size() || n.right >= nodes_.size()) {
      throw InvalidArgument("decision tree: child index out of range");
    }
    f.used[feat] = true;
    stack.push_back({n.right, f.used});
    stack.push_back({n.left, std::move(f.used)});
  }
  if (std::find(visits.begin(), visits.end(), 0) != visits.end()) {
    throw InvalidArgument("decision tree: unreachable node");
  }
}

std::size_t DecisionTree::depth() const {
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  std::size_t best = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes_[i].is_leaf()) {
      stack.emplace_back(nodes_[i].left, d + 1);
      stack.emplace_back(nodes_[i].right, d + 1);
    }
  }
  return best;
}

std::size_t DecisionTree::num_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

Label DecisionTree::predict_row(std::span<const CategoryCode> row) const {
  std::uint32_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const Node& n = nodes_[i];
    const CategoryCode c = row[static_cast<std::size_t>(n.feature)];
    bool go_left;
    if (c < kMaxArity) {
      go_left = (n.left_mask >> c) & 1U;
    } else {
      // Beyond the mask range: follow the side holding code 63, which was
      // assigned to the heavier branch unless 63 itself was seen in training.
      go_left = (n.left_mask >> 63) & 1U;
    }
    i = go_left ? n.left : n.right;
  }
  return nodes_[i].label;
}

namespace {

void write_node(const DecisionTree& t, std::uint32_t i, std::string& out) {
  const auto& n = t.nodes()[i];
  char buf[64];
  if (n.is_leaf()) {
    std::snprintf(buf, sizeof buf, "(leaf %u %.17g)", static_cast<unsigned>(n.label), n.purity);
    out += buf;
    return;
  }
  out += "(split " + std::to_string(n.feature) + " {";
  bool first = true;
  for (unsigned c = 0; c < DecisionTree::kMaxArity; ++c) {
    if ((n.left_mask >> c) & 1U) {
      if (!first) out += ',';
      out += std::to_string(c);
      first = false;
    }
  }
  // Internal label and purity ride along so the round trip is exact.
  std::snprintf(buf, sizeof buf, "} %u %.17g ", static_cast<unsigned>(n.label), n.purity);
  out += buf;
  write_node(t, n.left, out);
  out += ' ';
  write_node(t, n.right, out);
  out += ')';
}

class TreeParser {
 public:
  explicit TreeParser(std::string_view text) : text_(text) {}

  DecisionTree parse() {
    expect_word("tree");
    const auto nf = static_cast<std::size_t>(number());
    parse_node();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
    return DecisionTree(nf, std::move(nodes_));
  }

 private:
  std::uint32_t parse_node() {
    skip_ws();
    expect('(');
    const std::string kind = word();
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    if (kind == "leaf") {
      nodes_[index].label = static_cast<Label>(number());
      nodes_[index].purity = real();
    } else if (kind == "split") {
      DecisionTree::Node n;
      n.feature = static_cast<std::int32_t>(number());
      skip_ws();
      expect('{');
      skip_ws();
      while (peek() != '}') {
        const auto c = number();
        if (c >= DecisionTree::kMaxArity) fail("category code out of range");
        n.left_mask |= std::uint64_t{1} << c;
        skip_ws();
        if (peek() == ',') ++pos_;
        skip_ws();
      }
      expect('}');
      n.label = static_cast<Label>(number());
      n.purity = real();
      n.left = parse_node();
      n.right = parse_node();
      nodes_[index] = n;
    } else {
      fail("unknown node kind '" + kind + "'");
    }
    skip_ws();
    expect(')');
    return index;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  std::string word() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }
  void expect_word(std::string_view w) {
    if (word() != w) fail("expected '" + std::string(w) + "'");
  }
  std::uint64_t number() {
    skip_ws();
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
    if (ec != std::errc{}) fail("expected integer");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return v;
  }
  double real() {
    skip_ws();
    double v = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
    if (ec != std::errc{}) fail("expected number");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return v;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("tree text offset " + std::to_string(pos_) + ": " + what);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<DecisionTree::Node> nodes_;
};

// Sum over both sides of 2 * n0 * n1 / n, i.e. n times the weighted Gini.
double split_cost(std::size_t n0l, std::size_t n1l, std::size_t n0r, std::size_t n1r) {
  auto side = [](std::size_t a, std::size_t b) {
    const std::size_t n = a + b;
    return n == 0 ? 0.0 : 2.0 * static_cast<double>(a) * static_cast<double>(b) / static_cast<double>(n);
  };
  return side(n0l, n1l) + side(n0r, n1r);
}

class TreeBuilder {
 public:
  TreeBuilder(const CategoricalDataset& data, const TreeParams& params)
      : data_(data), params_(params), used_(data.num_features(), false) {}

  DecisionTree build() {
    std::vector<std::size_t> rows(data_.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    grow(rows, 0);
    return DecisionTree(data_.num_features(), std::move(nodes_));
  }

 private:
  struct Split {
    std::size_t feature = 0;
    std::uint64_t left_mask = 0;  // over codes present at the node
    double cost = 0.0;
  };

  std::uint32_t grow(const std::vector<std::size_t>& rows, std::size_t depth) {
    std::size_t ones = 0;
    for (auto r : rows) ones += data_.label(r);
    const std::size_t zeros = rows.size() - ones;
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    DecisionTree::Node node;
    node.label = ones > zeros ? 1 : 0;
    node.purity = static_cast<double>(std::max(ones, zeros)) / static_cast<double>(rows.size());
    nodes_.push_back(node);

    const bool pure = ones == 0 || zeros == 0;
    if (pure || depth >= params_.max_depth || rows.size() < 2 * params_.min_leaf) return index;

    const auto best = best_split(rows);
    if (!best) return index;

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      ((best->left_mask >> data_.code(r, best->feature)) & 1U ? left : right).push_back(r);
    }
    std::uint64_t mask = best->left_mask;
    if (left.size() >= right.size()) {
      // Unseen codes follow the heavier branch.
      std::uint64_t present = 0;
      for (auto r : rows) present |= std::uint64_t{1} << data_.code(r, best->feature);
      mask |= ~present;
    }
    used_[best->feature] = true;
    const auto l = grow(left, depth + 1);
    const auto r = grow(right, depth + 1);
    used_[best->feature] = false;

    nodes_[index].feature = static_cast<std::int32_t>(best->feature);
    nodes_[index].left_mask = mask;
    nodes_[index].left = l;
    nodes_[index].right = r;
    return index;
  }

  std::optional<Split> best_split(const std::vector<std::size_t>& rows) const {
    std::optional<Split> best;
    constexpr double kTieTol = 1e-9;
    for (std::size_t f = 0; f < data_.num_features(); ++f) {
      if (used_[f]) continue;
      const std::size_t arity = data_.arity()[f];
      std::vector<std::size_t> n0(arity, 0), n1(arity, 0);
      for (auto r : rows) (data_.label(r) ? n1 : n0)[data_.code(r, f)]++;
      std::vector<CategoryCode> present;
      for (std::size_t c = 0; c < arity; ++c) {
        if (n0[c] + n1[c] > 0) present.push_back(static_cast<CategoryCode>(c));
      }
      if (present.size() < 2) continue;

      auto consider = [&](std::uint64_t left_mask) {
        std::size_t n0l = 0, n1l = 0, n0r = 0, n1r = 0;
        for (auto c : present) {
          if ((left_mask >> c) & 1U) {
            n0l += n0[c];
            n1l += n1[c];
          } else {
            n0r += n0[c];
            n1r += n1[c];
          }
        }
        if (n0l + n1l < params_.min_leaf || n0r + n1r < params_.min_leaf) return;
        const double cost = split_cost(n0l, n1l, n0r, n1r);
        if (!best || cost < best->cost - kTieTol) best = Split{f, left_mask, cost};
      };

      const std::size_t k = present.size();
      if (k <= 16) {
        // The lowest present code always goes left; enumerate the rest in
        // ascending bitmask order, excluding the all-left partition.
        const std::uint64_t combos = std::uint64_t{1} << (k - 1);
        for (std::uint64_t bits = 0; bits + 1 < combos; ++bits) {
          std::uint64_t mask = std::uint64_t{1} << present[0];
          for (std::size_t i = 1; i < k; ++i) {
            if ((bits >> (i - 1)) & 1U) mask |= std::uint64_t{1} << present[i];
          }
          consider(mask);
        }
      } else {
        // Ordering categories by positive rate makes prefix cuts optimal for
        // binary labels, so k - 1 candidates suffice.
        std::vector<CategoryCode> order = present;
        std::stable_sort(order.begin(), order.end(), [&](CategoryCode a, CategoryCode b) {
          return static_cast<double>(n1[a]) * static_cast<double>(n0[b] + n1[b]) <
                 static_cast<double>(n1[b]) * static_cast<double>(n0[a] + n1[a]);
        });
        std::uint64_t mask = 0;
        for (std::size_t i = 0; i + 1 < k; ++i) {
          mask |= std::uint64_t{1} << order[i];
          consider(mask);
        }
      }
    }
    return best;
  }

  const CategoricalDataset& data_;
  TreeParams params_;
  std::vector<bool> used_;
  std::vector<DecisionTree::Node> nodes_;
};

}  // namespace

std::string DecisionTree::serialize() const {
  std::string out = "tree " + std::to_string(num_features_) + ' ';
  write_node(*this, 0, out);
  return out;
}

DecisionTree DecisionTree::parse(std::string_view text) { return TreeParser(text).parse(); }

DecisionTree train_tree(const CategoricalDataset& data, const TreeParams& params) {
  if (data.empty()) throw InvalidArgument("train_tree: empty dataset");
  for (auto a : data.arity()) {
    if (a > DecisionTree::kMaxArity) {
      throw InvalidArgument("train_tree: feature arity above " +
                            std::to_string(DecisionTree::kMaxArity));
    }
  }
  return TreeBuilder(data, params).build();
}

PredictionVector predict(const DecisionTree& tree, const CategoricalDataset& data) {
  if (data.num_features() != tree.num_features()) {
    throw InvalidArgument("predict: dataset has " + std::to_string(data.num_features()) +
                          " features, tree expects " + std::to_string(tree.num_features()));
  }
  PredictionVector out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out.set(i, tree.predict_row(data.row(i)));
  return out;
}

double error_rate(const DecisionTree& tree, const CategoricalDataset& data) {
  return disagreement(predict(tree, data), data.labels());
}

}  // namespace colltrain
