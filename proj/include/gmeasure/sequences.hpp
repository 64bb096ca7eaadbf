#ifndef GMEASURE_SEQUENCES_HPP
#define GMEASURE_SEQUENCES_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gmeasure/core.hpp"

namespace gmeasure {

/// Infinite nonnegative real sequence given as an explicit head plus a
/// structured tail rule. The tail structure is what makes bounds, tail
/// sums and renewal normalizations computable in closed form (absolute
/// error below tol::kernel_tail, usually exact).
class Sequence {
public:
  enum class TailKind { zero, constant, periodic, harmonic, geometric };

  struct Tail {
    TailKind kind = TailKind::zero;
    double value = 0.0;                // constant
    std::vector<double> values;        // periodic
    double offset = 2.0;               // harmonic: 1/(i+offset), global index
    double first = 0.0, ratio = 0.5;   // geometric: first*ratio^(i-head_len)
  };

  Sequence(std::vector<double> head, Tail tail)
      : head_(std::move(head)), tail_(std::move(tail)) {
    validate();
  }

  static Sequence constant(double v) { return Sequence({}, {TailKind::constant, v, {}, 0, 0, 0}); }
  static Sequence periodic(std::vector<double> vals) {
    Tail t;
    t.kind = TailKind::periodic;
    t.values = std::move(vals);
    return Sequence({}, t);
  }
  static Sequence list(std::vector<double> vals) {
    return Sequence(std::move(vals), Tail{});
  }
  static Sequence harmonic(double offset) {
    Tail t;
    t.kind = TailKind::harmonic;
    t.offset = offset;
    return Sequence({}, t);
  }

  std::size_t head_size() const { return head_.size(); }
  const std::vector<double>& head() const { return head_; }
  const Tail& tail() const { return tail_; }

  double value(std::size_t i) const {
    if (i < head_.size()) return head_[i];
    switch (tail_.kind) {
      case TailKind::zero: return 0.0;
      case TailKind::constant: return tail_.value;
      case TailKind::periodic:
        return tail_.values[(i - head_.size()) % tail_.values.size()];
      case TailKind::harmonic: return 1.0 / (static_cast<double>(i) + tail_.offset);
      case TailKind::geometric:
        return tail_.first * std::pow(tail_.ratio, static_cast<double>(i - head_.size()));
    }
    return 0.0;
  }

  /// Supremum of {value(i) : i >= k} (closure of the attainable set).
  double sup_from(std::size_t k) const {
    double s = -std::numeric_limits<double>::infinity();
    for (std::size_t i = k; i < head_.size(); ++i) s = std::max(s, head_[i]);
    const std::size_t t0 = std::max(k, head_.size());
    switch (tail_.kind) {
      case TailKind::zero: s = std::max(s, 0.0); break;
      case TailKind::constant: s = std::max(s, tail_.value); break;
      case TailKind::periodic:
        // every period value recurs beyond any index
        for (double v : tail_.values) s = std::max(s, v);
        break;
      case TailKind::harmonic: s = std::max(s, value(t0)); break;
      case TailKind::geometric: s = std::max(s, value(t0)); break;
    }
    return s;
  }

  /// Infimum of {value(i) : i >= k}; decaying tails contribute their limit 0.
  double inf_from(std::size_t k) const {
    double s = std::numeric_limits<double>::infinity();
    for (std::size_t i = k; i < head_.size(); ++i) s = std::min(s, head_[i]);
    switch (tail_.kind) {
      case TailKind::zero: s = std::min(s, 0.0); break;
      case TailKind::constant: s = std::min(s, tail_.value); break;
      case TailKind::periodic:
        for (double v : tail_.values) s = std::min(s, v);
        break;
      case TailKind::harmonic: s = std::min(s, 0.0); break;
      case TailKind::geometric: s = std::min(s, 0.0); break;
    }
    return s;
  }

  /// Sum_{i>=k} value(i); nullopt when divergent.
  std::optional<double> tail_sum(std::size_t k) const {
    double s = 0.0;
    for (std::size_t i = k; i < head_.size(); ++i) s += head_[i];
    const std::size_t t0 = std::max(k, head_.size());
    switch (tail_.kind) {
      case TailKind::zero: return s;
      case TailKind::constant:
        if (tail_.value > 0.0) return std::nullopt;
        return s;
      case TailKind::periodic: {
        double per = 0.0;
        for (double v : tail_.values) per += v;
        if (per > 0.0) return std::nullopt;
        return s;
      }
      case TailKind::harmonic: return std::nullopt;
      case TailKind::geometric: {
        if (tail_.first == 0.0) return s;
        if (tail_.ratio >= 1.0) return std::nullopt;
        // first term at index t0 is first*ratio^(t0-head_len)
        double lead = tail_.first * std::pow(tail_.ratio, static_cast<double>(t0 - head_.size()));
        return s + lead / (1.0 - tail_.ratio);
      }
    }
    return std::nullopt;
  }

  /// True when value(i) == 0 for all i >= support_end() (finite support).
  bool finitely_supported() const {
    if (tail_.kind == TailKind::zero) return true;
    if (tail_.kind == TailKind::geometric && tail_.first == 0.0) return true;
    if (tail_.kind == TailKind::constant && tail_.value == 0.0) return true;
    if (tail_.kind == TailKind::periodic) {
      for (double v : tail_.values)
        if (v != 0.0) return false;
      return true;
    }
    return false;
  }

  std::size_t support_end() const {
    // only meaningful when finitely_supported(); smallest k with all-zero beyond
    std::size_t k = head_.size();
    while (k > 0 && head_[k - 1] == 0.0) --k;
    return finitely_supported() ? k : std::numeric_limits<std::size_t>::max();
  }

private:
  void validate() const {
    auto check = [](double v, const std::string& where) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw spec_error("sequence value out of range at " + where);
    };
    for (std::size_t i = 0; i < head_.size(); ++i)
      check(head_[i], "head[" + std::to_string(i) + "]");
    switch (tail_.kind) {
      case TailKind::zero: break;
      case TailKind::constant: check(tail_.value, "tail.value"); break;
      case TailKind::periodic:
        if (tail_.values.empty())
          throw spec_error("periodic tail needs at least one value");
        for (double v : tail_.values) check(v, "tail.values");
        break;
      case TailKind::harmonic:
        if (!(tail_.offset >= 1.0))
          throw spec_error("harmonic tail offset must be >= 1");
        break;
      case TailKind::geometric:
        check(tail_.first, "tail.first");
        if (!(tail_.ratio >= 0.0) || !(tail_.ratio < 1.0))
          throw spec_error("geometric tail ratio must lie in [0,1)");
        break;
    }
  }

  std::vector<double> head_;
  Tail tail_;
};

/// Checks every value lies in [0,1]; sequences feeding probabilities use it.
inline void require_probability_range(const Sequence& q, const std::string& name) {
  for (std::size_t i = 0; i < q.head_size(); ++i)
    if (q.value(i) > 1.0)
      throw spec_error(name + "[" + std::to_string(i) + "] exceeds 1");
  const auto& t = q.tail();
  switch (t.kind) {
    case Sequence::TailKind::zero: break;
    case Sequence::TailKind::constant:
      if (t.value > 1.0) throw spec_error(name + " tail value exceeds 1");
      break;
    case Sequence::TailKind::periodic:
      for (double v : t.values)
        if (v > 1.0) throw spec_error(name + " tail value exceeds 1");
      break;
    case Sequence::TailKind::harmonic: break;  // offset >= 1 keeps values <= 1
    case Sequence::TailKind::geometric:
      if (t.first > 1.0) throw spec_error(name + " tail value exceeds 1");
      break;
  }
}

}  // namespace gmeasure

#endif  // GMEASURE_SEQUENCES_HPP
