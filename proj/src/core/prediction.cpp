#include "core/prediction.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace colltrain {
namespace {
thread_local KernelAuditScope* g_audit = nullptr;
thread_local const std::function<void(EvalSetId)>* g_audit_sink = nullptr;
}  // namespace

KernelAuditScope::KernelAuditScope(std::function<void(EvalSetId)> sink)
    : sink_(std::move(sink)), previous_(g_audit) {
  g_audit = this;
  g_audit_sink = &sink_;
}

KernelAuditScope::~KernelAuditScope() {
  g_audit = previous_;
  g_audit_sink = previous_ ? &previous_->sink_ : nullptr;
}

PredictionVector PredictionVector::from_bits(std::span<const Label> bits, EvalSetId eval_set) {
  PredictionVector v(bits.size(), eval_set);
  for (std::size_t i = 0; i < bits.size(); ++i) v.set(i, bits[i] ? 1 : 0);
  return v;
}

std::size_t PredictionVector::hamming(const PredictionVector& other) const {
  if (other.size_ != size_) {
    throw InvalidArgument("prediction vectors differ in length");
  }
  std::size_t d = 0;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    d += static_cast<std::size_t>(std::popcount(words_[w] ^ other.words_[w]));
  }
  return d;
}

std::size_t PredictionVector::count_ones() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::vector<Label> PredictionVector::bits() const {
  std::vector<Label> out(size_);
  for (std::size_t i = 0; i < size_; ++i) out[i] = (*this)[i];
  return out;
}

double kernel(const PredictionVector& a, const PredictionVector& b, const KernelParams& p) {
  if (a.size() != b.size()) throw InvalidArgument("kernel: prediction length mismatch");
  if (a.size() == 0) throw InvalidArgument("kernel: empty prediction vectors");
  if (a.eval_set() != b.eval_set() && a.eval_set() != kUntagged && b.eval_set() != kUntagged) {
    throw InvalidArgument("kernel: predictions computed on different evaluation sets");
  }
  if (g_audit_sink) (*g_audit_sink)(a.eval_set() != kUntagged ? a.eval_set() : b.eval_set());
  const double agree = 1.0 - static_cast<double>(a.hamming(b)) / static_cast<double>(a.size());
  return std::pow(agree, p.kernel_exponent);
}

double edge_similarity(const PredictionVector& a, const PredictionVector& b,
                       const KernelParams& p) {
  return std::pow(kernel(a, b, p), p.similarity_power);
}

double disagreement(const PredictionVector& predictions, std::span<const Label> labels) {
  if (predictions.size() != labels.size()) {
    throw InvalidArgument("disagreement: prediction and label counts differ");
  }
  if (labels.empty()) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) wrong += predictions[i] != labels[i];
  return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

}  // namespace colltrain
