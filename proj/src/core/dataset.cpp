#include "core/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "core/decision_tree.hpp"
#include "core/errors.hpp"
#include "core/random.hpp"

namespace colltrain {

CategoricalDataset::CategoricalDataset(std::vector<CategoryCode> arity)
    : arity_(std::move(arity)) {}

void CategoricalDataset::add_row(std::span<const CategoryCode> features, Label label) {
  if (features.size() != arity_.size()) {
    throw InvalidArgument("dataset: row has " + std::to_string(features.size()) +
                          " features, expected " + std::to_string(arity_.size()));
  }
  if (label > 1) throw InvalidArgument("dataset: label must be 0 or 1");
  for (std::size_t f = 0; f < features.size(); ++f) {
    if (features[f] >= arity_[f]) {
      throw InvalidArgument("dataset: code " + std::to_string(features[f]) +
                            " out of range for feature " + std::to_string(f));
    }
  }
  codes_.insert(codes_.end(), features.begin(), features.end());
  labels_.push_back(label);
}

CategoricalDataset CategoricalDataset::select(std::span<const std::size_t> indices) const {
  CategoricalDataset out(arity_);
  out.codes_.reserve(indices.size() * num_features());
  out.labels_.reserve(indices.size());
  for (auto i : indices) {
    if (i >= size()) throw OutOfRange("dataset: row index out of range");
    auto r = row(i);
    out.codes_.insert(out.codes_.end(), r.begin(), r.end());
    out.labels_.push_back(labels_[i]);
  }
  return out;
}

CategoricalDataset CategoricalDataset::concat(std::span<const CategoricalDataset> parts) {
  if (parts.empty()) return {};
  CategoricalDataset out(parts.front().arity_);
  for (const auto& p : parts) {
    if (p.arity_ != out.arity_) throw InvalidArgument("dataset: concat of differing schemas");
    out.codes_.insert(out.codes_.end(), p.codes_.begin(), p.codes_.end());
    out.labels_.insert(out.labels_.end(), p.labels_.begin(), p.labels_.end());
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

LoadedDataset parse_categorical_csv(std::string_view text) {
  SymbolMapping mapping;
  std::vector<std::unordered_map<std::string, CategoryCode>> lookup;
  std::unordered_map<std::string, Label> label_lookup;
  std::vector<std::vector<CategoryCode>> rows;
  std::vector<Label> labels;
  std::size_t width = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;

  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (trim(line).empty()) continue;

    const auto fields = split_fields(line);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (fields.size() < 2) throw DataError(where + "need at least one feature and a class");
    if (width == 0) {
      width = fields.size();
      lookup.resize(width - 1);
      mapping.feature_symbols.resize(width - 1);
    } else if (fields.size() != width) {
      throw DataError(where + "expected " + std::to_string(width) + " fields, found " +
                      std::to_string(fields.size()));
    }

    std::vector<CategoryCode> codes(width - 1);
    for (std::size_t f = 0; f + 1 < width; ++f) {
      const std::string sym(fields[f]);
      auto [it, inserted] =
          lookup[f].try_emplace(sym, static_cast<CategoryCode>(lookup[f].size()));
      if (inserted) {
        if (lookup[f].size() > DecisionTree::kMaxArity) {
          throw DataError(where + "feature " + std::to_string(f) + " has more than " +
                          std::to_string(DecisionTree::kMaxArity) + " categories");
        }
        mapping.feature_symbols[f].push_back(sym);
      }
      codes[f] = it->second;
    }
    const std::string cls(fields.back());
    auto [it, inserted] = label_lookup.try_emplace(cls, static_cast<Label>(label_lookup.size()));
    if (inserted) {
      if (label_lookup.size() > 2) {
        throw DataError(where + "third class symbol '" + cls + "'; only binary labels supported");
      }
      mapping.label_symbols.push_back(cls);
    }
    rows.push_back(std::move(codes));
    labels.push_back(it->second);
  }
  if (rows.empty()) throw DataError("line " + std::to_string(line_no) + ": empty dataset");

  std::vector<CategoryCode> arity(width - 1);
  for (std::size_t f = 0; f + 1 < width; ++f) {
    arity[f] = static_cast<CategoryCode>(mapping.feature_symbols[f].size());
  }
  LoadedDataset out{CategoricalDataset(std::move(arity)), std::move(mapping)};
  for (std::size_t i = 0; i < rows.size(); ++i) out.data.add_row(rows[i], labels[i]);
  return out;
}

LoadedDataset load_categorical_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_categorical_csv(buf.str());
}

std::string format_categorical_csv(const CategoricalDataset& data,
                                   const SymbolMapping& mapping) {
  if (mapping.feature_symbols.size() != data.num_features()) {
    throw InvalidArgument("format csv: mapping does not match dataset schema");
  }
  std::string out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t f = 0; f < data.num_features(); ++f) {
      const auto& syms = mapping.feature_symbols[f];
      const auto c = data.code(i, f);
      if (c >= syms.size()) throw InvalidArgument("format csv: code without symbol");
      out += syms[c];
      out += ',';
    }
    const auto l = data.label(i);
    if (l >= mapping.label_symbols.size()) throw InvalidArgument("format csv: label without symbol");
    out += mapping.label_symbols[l];
    out += '\n';
  }
  return out;
}

ShardedSplit split_and_shard(const CategoricalDataset& ds, const SplitSpec& spec) {
  if (spec.num_shards == 0) throw InvalidArgument("split: num_shards must be >= 1");
  if (spec.train_count % spec.num_shards != 0) {
    throw InvalidArgument("split: train_count " + std::to_string(spec.train_count) +
                          " not divisible by " + std::to_string(spec.num_shards) + " shards");
  }
  if (spec.train_count + spec.test_count > ds.size()) {
    throw InvalidArgument("split: train + test = " +
                          std::to_string(spec.train_count + spec.test_count) +
                          " exceeds dataset size " + std::to_string(ds.size()));
  }
  std::vector<std::size_t> perm(ds.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(spec.seed);
  // Fisher-Yates with our own index draw so the order is library independent.
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
  }
  perm.resize(spec.train_count + spec.test_count);

  ShardedSplit out;
  const std::size_t per = spec.train_count / spec.num_shards;
  for (std::size_t k = 0; k < spec.num_shards; ++k) {
    out.shards.push_back(ds.select(std::span(perm).subspan(k * per, per)));
  }
  out.test = ds.select(std::span(perm).subspan(spec.train_count, spec.test_count));
  out.permutation = std::move(perm);
  return out;
}

namespace {

// Random decision list: every internal node tests an unused feature with a
// random non-trivial category partition, one side ends in a leaf with a
// random label and the other side continues. The two leaves under the last
// test carry different labels. Unlike a random full tree this is learnable
// by greedy impurity splits, since each test separates a pure block.
std::uint32_t grow_rule(Rng& rng, const SyntheticSpec& spec, std::vector<bool>& used,
                        std::size_t depth, std::vector<DecisionTree::Node>& nodes) {
  const auto index = static_cast<std::uint32_t>(nodes.size());
  nodes.emplace_back();
  std::vector<std::size_t> free;
  for (std::size_t f = 0; f < used.size(); ++f) {
    if (!used[f]) free.push_back(f);
  }
  if (depth >= spec.rule_depth || free.empty() || spec.arity < 2) {
    nodes[index].label = static_cast<Label>(rng() & 1U);
    return index;
  }
  const std::size_t f = free[uniform_index(rng, free.size())];
  std::uint64_t mask = 0;
  do {
    mask = 0;
    for (std::size_t c = 0; c < spec.arity; ++c) {
      if (rng() & 1U) mask |= std::uint64_t{1} << c;
    }
    const std::uint64_t all = spec.arity >= 64 ? ~std::uint64_t{0}
                                               : (std::uint64_t{1} << spec.arity) - 1;
    if (mask != 0 && mask != all) break;
  } while (true);
  const bool leaf_left = (rng() & 1U) != 0;
  used[f] = true;
  std::uint32_t leaf = static_cast<std::uint32_t>(nodes.size());
  nodes.emplace_back();
  nodes[leaf].label = static_cast<Label>(rng() & 1U);
  const auto rest = grow_rule(rng, spec, used, depth + 1, nodes);
  used[f] = false;
  if (nodes[rest].is_leaf() && nodes[rest].label == nodes[leaf].label) {
    nodes[rest].label = static_cast<Label>(1 - nodes[leaf].label);
  }
  nodes[index].feature = static_cast<std::int32_t>(f);
  nodes[index].left_mask = mask;
  nodes[index].left = leaf_left ? leaf : rest;
  nodes[index].right = leaf_left ? rest : leaf;
  return index;
}

}  // namespace

SyntheticDataset synthetic_categorical(const SyntheticSpec& spec) {
  if (spec.rows == 0 || spec.features == 0 || spec.arity == 0) {
    throw InvalidArgument("synthetic: rows, features and arity must be positive");
  }
  if (spec.arity > DecisionTree::kMaxArity) throw InvalidArgument("synthetic: arity above 64");
  if (!(spec.noise_rate >= 0.0 && spec.noise_rate < 0.5)) {
    throw InvalidArgument("synthetic: noise_rate must lie in [0, 0.5)");
  }
  Rng rule_rng(derive_seed(spec.seed, "synthetic/rule"));
  std::vector<bool> used(spec.features, false);
  std::vector<DecisionTree::Node> nodes;
  grow_rule(rule_rng, spec, used, 0, nodes);
  const DecisionTree rule(spec.features, std::move(nodes));

  Rng row_rng(derive_seed(spec.seed, "synthetic/rows"));
  Rng noise_rng(derive_seed(spec.seed, "synthetic/noise"));
  SyntheticDataset out{CategoricalDataset(std::vector<CategoryCode>(spec.features, spec.arity)),
                       {}, 0, rule.serialize()};
  std::vector<CategoryCode> row(spec.features);
  for (std::size_t i = 0; i < spec.rows; ++i) {
    for (auto& c : row) c = static_cast<CategoryCode>(uniform_index(row_rng, spec.arity));
    const Label clean = rule.predict_row(row);
    const bool flip = uniform01(noise_rng) < spec.noise_rate;
    out.flipped += flip;
    out.clean_labels.push_back(clean);
    out.data.add_row(row, flip ? static_cast<Label>(1 - clean) : clean);
  }
  return out;
}

}  // namespace colltrain
