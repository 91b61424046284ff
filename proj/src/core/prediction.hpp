#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "core/dataset.hpp"

namespace colltrain {

/// Identifies the rows a prediction vector was computed on. Sensor shards
/// use the sensor id; kPooledRows marks the union of all shards.
using EvalSetId = std::uint32_t;
inline constexpr EvalSetId kUntagged = std::numeric_limits<EvalSetId>::max();
inline constexpr EvalSetId kPooledRows = kUntagged - 1;

/// Packed binary predictions of one classifier on a fixed row set.
class PredictionVector {
 public:
  PredictionVector() = default;
  explicit PredictionVector(std::size_t n, EvalSetId eval_set = kUntagged)
      : words_((n + 63) / 64, 0), size_(n), eval_set_(eval_set) {}
  static PredictionVector from_bits(std::span<const Label> bits, EvalSetId eval_set = kUntagged);

  std::size_t size() const noexcept { return size_; }
  EvalSetId eval_set() const noexcept { return eval_set_; }
  void set_eval_set(EvalSetId id) noexcept { eval_set_ = id; }

  Label operator[](std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  void set(std::size_t i, Label bit) {
    const std::uint64_t mask = std::uint64_t{1} << (i % 64);
    words_[i / 64] = bit ? (words_[i / 64] | mask) : (words_[i / 64] & ~mask);
  }

  std::size_t hamming(const PredictionVector& other) const;
  std::size_t count_ones() const;
  std::vector<Label> bits() const;

  /// Bitwise equality; the evaluation-set tag is not compared.
  friend bool operator==(const PredictionVector& a, const PredictionVector& b) {
    return a.size_ == b.size_ && a.words_ == b.words_;
  }

 private:
  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
  EvalSetId eval_set_ = kUntagged;
};

struct KernelParams {
  int kernel_exponent = 4;   // K = (1 - hamming/n)^kernel_exponent
  int similarity_power = 3;  // sigma = K^similarity_power
};

/// (1 - hamming/n)^exponent. Throws InvalidArgument on length mismatch, n = 0,
/// or vectors tagged with different evaluation sets.
double kernel(const PredictionVector& a, const PredictionVector& b, const KernelParams& p = {});

/// kernel^similarity_power; the relaxed agreement potential between neighbors.
double edge_similarity(const PredictionVector& a, const PredictionVector& b,
                       const KernelParams& p = {});

/// Fraction of disagreeing positions between predictions and labels.
double disagreement(const PredictionVector& predictions, std::span<const Label> labels);

/// Test hook: while alive, every kernel evaluation on this thread reports the
/// evaluation set of its arguments. Scopes nest; the innermost one receives calls.
class KernelAuditScope {
 public:
  explicit KernelAuditScope(std::function<void(EvalSetId)> sink);
  ~KernelAuditScope();
  KernelAuditScope(const KernelAuditScope&) = delete;
  KernelAuditScope& operator=(const KernelAuditScope&) = delete;

 private:
  std::function<void(EvalSetId)> sink_;
  KernelAuditScope* previous_;
};

}  // namespace colltrain
