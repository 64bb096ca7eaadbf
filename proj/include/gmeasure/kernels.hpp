#ifndef GMEASURE_KERNELS_HPP
#define GMEASURE_KERNELS_HPP

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gmeasure/core.hpp"
#include "gmeasure/sequences.hpp"

namespace gmeasure {

inline constexpr std::size_t kDefaultDepthBudget = 14;

/// A probability kernel evaluable on cylinders. `bounds(w, a)` returns
/// certified inf/sup of the kernel value for emitting `a` over all infinite
/// pasts refining the context `w` (most recent |w| coordinates fixed).
///
/// Contract highlights:
///   - sum_a bounds(w,a).lo <= 1 <= sum_a bounds(w,a).hi;
///   - refinement monotonicity: bounds(w',a) inside bounds(w,a) whenever
///     w is a suffix of w';
///   - discontinuity_words(n+1) projects into discontinuity_words(n) under
///     suffix truncation, and every level-n word extends to level n+1.
class Kernel {
public:
  virtual ~Kernel() = default;

  virtual const Alphabet& alphabet() const = 0;
  virtual std::string name() const = 0;

  virtual ProbabilityInterval bounds(const Word& context, char next) const = 0;

  /// Depth-n words of the declared discontinuity set, sorted.
  virtual std::vector<Word> discontinuity_words(std::size_t n) const = 0;

  /// Closed-form upper bound on the n-th variation over the subtree rooted
  /// at context v, when the kernel has one.
  virtual std::optional<double> variation_bound_analytic(const Word& /*v*/,
                                                         std::size_t /*n*/) const {
    return std::nullopt;
  }

  /// Closed-form upper bound on sum_{n >= n0} [var^v_n]^2, when available.
  virtual std::optional<double> variation_tail_sq(const Word& /*v*/,
                                                  std::size_t /*n0*/) const {
    return std::nullopt;
  }

  /// Symbol prepended when a representative infinite completion is needed
  /// (lower pressure bounds, diagnostics).
  virtual char regeneration_symbol() const { return alphabet().label(0); }

protected:
  void check_context(const Word& w) const {
    for (std::size_t i = 0; i < w.size(); ++i)
      if (!alphabet().contains(w.at(i)))
        throw spec_error(std::string("context symbol '") + w.at(i) +
                         "' not in alphabet \"" + alphabet().labels() + "\"");
  }
  std::size_t check_next(char a) const { return alphabet().index_of(a); }
};

using KernelPtr = std::shared_ptr<const Kernel>;

namespace detail {
// Distance from coordinate 0 of the context to its most recent '1';
// nullopt when the context has none.
inline std::optional<std::size_t> last_one_distance(const Word& w) {
  for (std::size_t j = 0; j < w.size(); ++j)
    if (w.at(w.size() - 1 - j) == '1') return j;
  return std::nullopt;
}
}  // namespace detail

/// Binary kernel depending on the distance ell to the last occurrence of
/// symbol '1': emits '1' with probability q_ell, and q_inf on the all-zero
/// past. Its ell-process is a house-of-cards chain.
class CombKernel : public Kernel {
public:
  CombKernel(Sequence q, double q_inf)
      : alphabet_("01"), q_(std::move(q)), q_inf_(q_inf) {
    require_probability_range(q_, "q");
    if (!(q_inf_ >= 0.0) || !(q_inf_ <= 1.0))
      throw spec_error("q_inf must lie in [0,1]");
  }

  const Alphabet& alphabet() const override { return alphabet_; }
  std::string name() const override { return "comb"; }
  const Sequence& q() const { return q_; }
  double q_inf() const { return q_inf_; }

  ProbabilityInterval bounds(const Word& context, char next) const override {
    check_context(context);
    const bool one = check_next(next) == 1;
    if (auto d = detail::last_one_distance(context)) {
      const double p1 = q_.value(*d);
      return ProbabilityInterval::point(one ? p1 : 1.0 - p1);
    }
    // all-zero context: ell ranges over {k, k+1, ...} and infinity
    const std::size_t k = context.size();
    const double lo1 = std::min(q_.inf_from(k), q_inf_);
    const double hi1 = std::max(q_.sup_from(k), q_inf_);
    return one ? ProbabilityInterval(lo1, hi1)
               : ProbabilityInterval(1.0 - hi1, 1.0 - lo1);
  }

  std::vector<Word> discontinuity_words(std::size_t n) const override {
    return {repeated('0', n)};
  }

  std::optional<double> variation_bound_analytic(const Word& v,
                                                 std::size_t /*n*/) const override {
    // a context pinning ell pins the value exactly
    if (detail::last_one_distance(v)) return 0.0;
    return std::nullopt;
  }

  std::optional<double> variation_tail_sq(const Word& v,
                                          std::size_t /*n0*/) const override {
    if (detail::last_one_distance(v)) return 0.0;
    return std::nullopt;
  }

  char regeneration_symbol() const override { return '1'; }

private:
  Alphabet alphabet_;
  Sequence q_;
  double q_inf_;
};

/// Binary kernel in which the dependence continues past the last '1':
/// value eps + (1-2eps) * sum_n 1{x_{-ell-n} = a} q^ell_n, with q^ell either
/// the geometric family with parameter alpha^ell or explicit rows.
class LongMemoryKernel : public Kernel {
public:
  struct GeometricFamily {
    double alpha;  // success parameter of row l is alpha^l
  };
  struct TableFamily {
    std::vector<std::vector<double>> rows;  // row l, l >= rows.size() reuses last
  };

  LongMemoryKernel(double eps, GeometricFamily fam)
      : alphabet_("01"), eps_(eps), alpha_(fam.alpha), geometric_(true) {
    validate_eps();
    if (!(alpha_ > 0.0) || !(alpha_ < 1.0))
      throw spec_error("long_memory alpha must lie in (0,1)");
  }

  LongMemoryKernel(double eps, TableFamily fam)
      : alphabet_("01"), eps_(eps), geometric_(false), rows_(std::move(fam.rows)) {
    validate_eps();
    if (rows_.empty()) throw spec_error("long_memory table needs at least one row");
    row_tails_.reserve(rows_.size());
    for (std::size_t l = 0; l < rows_.size(); ++l) {
      double s = 0.0;
      for (double v : rows_[l]) {
        if (!(v >= 0.0) || !(v <= 1.0))
          throw spec_error("long_memory table entry out of [0,1]");
        s += v;
      }
      if (std::abs(s - 1.0) > tol::normalization)
        throw spec_error("long_memory table row " + std::to_string(l) +
                         " sums to " + std::to_string(s) + ", expected 1");
      // suffix masses: tail(j) = 1 - sum of first j entries, clipped at 0
      std::vector<double> t(rows_[l].size() + 1, 0.0);
      t[0] = 1.0;
      double acc = 0.0;
      for (std::size_t j = 0; j < rows_[l].size(); ++j) {
        acc += rows_[l][j];
        t[j + 1] = std::max(0.0, 1.0 - acc);
      }
      row_tails_.push_back(std::move(t));
    }
  }

  const Alphabet& alphabet() const override { return alphabet_; }
  std::string name() const override { return "long_memory"; }
  double eps() const { return eps_; }
  bool geometric() const { return geometric_; }
  double alpha() const { return geometric_ ? alpha_ : 0.0; }

  double family_value(std::size_t l, std::size_t n) const {  // q^l_n, n >= 1
    if (geometric_) {
      const double p = std::pow(alpha_, static_cast<double>(l));
      return p * std::pow(1.0 - p, static_cast<double>(n - 1));
    }
    const auto& row = rows_[std::min(l, rows_.size() - 1)];
    return n - 1 < row.size() ? row[n - 1] : 0.0;
  }

  double family_tail(std::size_t l, std::size_t j) const {  // sum_{n > j} q^l_n
    if (geometric_) {
      const double p = std::pow(alpha_, static_cast<double>(l));
      return std::pow(1.0 - p, static_cast<double>(j));
    }
    const auto& t = row_tails_[std::min(l, row_tails_.size() - 1)];
    return j < t.size() ? t[j] : 0.0;
  }

  ProbabilityInterval bounds(const Word& context, char next) const override {
    check_context(context);
    const std::size_t a = check_next(next);
    if (auto d = detail::last_one_distance(context)) {
      const std::size_t l = *d;
      const std::size_t seen = context.size() - 1 - l;
      double s = 0.0;
      for (std::size_t n = 1; n <= seen; ++n) {
        const char deeper = context.at(context.size() - 1 - (l + n));
        if (static_cast<std::size_t>(alphabet_.index_of(deeper)) == a)
          s += family_value(l, n);
      }
      const double t = family_tail(l, seen);
      const double cap = 1.0 - eps_;
      const double hi =
          std::min(cap, eps_ + (1.0 - 2.0 * eps_) * std::min(1.0, s + t));
      const double lo =
          std::min(hi, eps_ + (1.0 - 2.0 * eps_) * std::min(1.0, s));
      return {lo, hi};
    }
    // ell unseen: any mass split is attainable, plus the all-zero past at eps
    return {eps_, 1.0 - eps_};
  }

  std::vector<Word> discontinuity_words(std::size_t n) const override {
    return {repeated('0', n)};
  }

  std::optional<double> variation_bound_analytic(const Word& v,
                                                 std::size_t n) const override {
    if (!detail::last_one_distance(v)) return std::nullopt;
    if (n < v.size()) return std::nullopt;
    // geometric: (1-2eps) * (1-alpha^|v|)^(n-|v|), which dominates the
    // enumerated oscillation for every context through the subtree at v
    if (geometric_)
      return (1.0 - 2.0 * eps_) * family_tail(v.size(), n - v.size());
    const std::size_t d = *detail::last_one_distance(v);
    return (1.0 - 2.0 * eps_) * family_tail(d, n - 1 - d);
  }

  std::optional<double> variation_tail_sq(const Word& v,
                                          std::size_t n0) const override {
    if (!detail::last_one_distance(v)) return std::nullopt;
    if (n0 < v.size()) return std::nullopt;
    const double c = (1.0 - 2.0 * eps_) * (1.0 - 2.0 * eps_);
    if (geometric_) {
      const double p = std::pow(alpha_, static_cast<double>(v.size()));
      const double r = 1.0 - p;  // per-step decay of the variation bound
      const double lead = std::pow(r, 2.0 * static_cast<double>(n0 - v.size()));
      return c * lead / (1.0 - r * r);
    }
    // finite-support rows: the bound vanishes once the whole row is seen
    const std::size_t d = *detail::last_one_distance(v);
    const auto& t = row_tails_[std::min(d, row_tails_.size() - 1)];
    double s = 0.0;
    for (std::size_t n = n0; n - 1 - d < t.size(); ++n) {
      const double b = family_tail(d, n - 1 - d);
      if (b == 0.0) break;
      s += b * b;
    }
    return c * s;
  }

  char regeneration_symbol() const override { return '1'; }

private:
  void validate_eps() const {
    if (!(eps_ > 0.0) || !(eps_ < 0.5))
      throw spec_error("long_memory eps must lie in (0, 1/2)");
  }

  Alphabet alphabet_;
  double eps_;
  double alpha_ = 0.0;
  bool geometric_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::vector<double>> row_tails_;
};

/// Three-letter kernel on {0,1,2}: constant on all-{0,2} pasts, half/half
/// branches when ell falls in N0/N1/N2, and 0.26 + sum theta_k * x_{-ell-k}
/// (symbols entering by numeric value) otherwise.
class ThreeLetterKernel : public Kernel {
public:
  ThreeLetterKernel(std::set<std::size_t> n0, std::set<std::size_t> n1,
                    std::set<std::size_t> n2, Sequence theta)
      : alphabet_("012"),
        n0_(std::move(n0)), n1_(std::move(n1)), n2_(std::move(n2)),
        theta_(std::move(theta)) {
    for (std::size_t v : n0_)
      if (n1_.count(v) || n2_.count(v))
        throw spec_error("three_letter N sets must be disjoint");
    for (std::size_t v : n1_)
      if (n2_.count(v)) throw spec_error("three_letter N sets must be disjoint");
    auto total = theta_.tail_sum(0);
    if (!total || !(*total < 0.03))
      throw spec_error("three_letter theta must have finite sum < 0.03");
    theta_total_ = *total;
  }

  const Alphabet& alphabet() const override { return alphabet_; }
  std::string name() const override { return "three_letter"; }
  double theta_total() const { return theta_total_; }

  ProbabilityInterval bounds(const Word& context, char next) const override {
    check_context(context);
    const std::size_t a = check_next(next);
    if (auto d = detail::last_one_distance(context)) {
      const std::size_t l = *d;
      if (auto fixed = half_branch_value(l, a))
        return ProbabilityInterval::point(*fixed);
      const std::size_t seen = context.size() - 1 - l;
      double s = 0.0;
      for (std::size_t k = 1; k <= seen; ++k) {
        const char deeper = context.at(context.size() - 1 - (l + k));
        s += theta_.value(k - 1) * static_cast<double>(alphabet_.index_of(deeper));
      }
      const double mt = *theta_.tail_sum(seen);  // unseen theta mass
      return generic_interval(a, s, s + 2.0 * mt);
    }
    // all-{0,2} context of length k: hull over the pure {0,2} branch, any
    // feasible half-branch with l >= k, and the generic branch with all
    // theta positions unseen
    const std::size_t k = context.size();
    ProbabilityInterval h = ProbabilityInterval::point(a == 2 ? 0.4 : 0.3);
    auto feasible = [&](const std::set<std::size_t>& s) {
      return !s.empty() && *s.rbegin() >= k;
    };
    if (feasible(n0_)) h = h.hull(ProbabilityInterval::point(a == 0 ? 0.0 : 0.5));
    if (feasible(n1_)) h = h.hull(ProbabilityInterval::point(a == 1 ? 0.0 : 0.5));
    if (feasible(n2_)) h = h.hull(ProbabilityInterval::point(a == 2 ? 0.0 : 0.5));
    h = h.hull(generic_interval(a, 0.0, 2.0 * theta_total_));
    return h;
  }

  std::vector<Word> discontinuity_words(std::size_t n) const override {
    std::vector<Word> out;
    if (n == 0) return {Word()};
    out.reserve(std::size_t{1} << n);
    std::string cur(n, '0');
    const std::size_t total = std::size_t{1} << n;
    if (n > 26) throw resource_error("three_letter discontinuity level too deep");
    for (std::size_t c = 0; c < total; ++c) {
      for (std::size_t b = 0; b < n; ++b) cur[n - 1 - b] = (c >> b) & 1 ? '2' : '0';
      out.emplace_back(cur);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  std::optional<double> variation_bound_analytic(const Word& v,
                                                 std::size_t n) const override {
    auto d = detail::last_one_distance(v);
    if (!d || n < v.size()) return std::nullopt;
    if (n0_.count(*d) || n1_.count(*d) || n2_.count(*d)) return 0.0;
    // widest next-symbol oscillation is the doubled one on symbol '2'
    return 4.0 * *theta_.tail_sum(n - 1 - *d);
  }

  std::optional<double> variation_tail_sq(const Word& v,
                                          std::size_t n0) const override {
    auto d = detail::last_one_distance(v);
    if (!d || n0 < v.size()) return std::nullopt;
    if (n0_.count(*d) || n1_.count(*d) || n2_.count(*d)) return 0.0;
    return tail_sq_of_theta(n0 - 1 - *d);
  }

private:
  std::optional<double> half_branch_value(std::size_t l, std::size_t a) const {
    if (n0_.count(l)) return a == 0 ? 0.0 : 0.5;
    if (n1_.count(l)) return a == 1 ? 0.0 : 0.5;
    if (n2_.count(l)) return a == 2 ? 0.0 : 0.5;
    return std::nullopt;
  }

  ProbabilityInterval generic_interval(std::size_t a, double s_lo,
                                       double s_hi) const {
    if (a == 2) return {0.48 - 2.0 * s_hi, 0.48 - 2.0 * s_lo};
    return {0.26 + s_lo, 0.26 + s_hi};
  }

  // sum_{j >= j0} [4 * theta_tail(j)]^2 in closed form
  double tail_sq_of_theta(std::size_t j0) const {
    double s = 0.0;
    std::size_t j = j0;
    const std::size_t h = theta_.head_size();
    for (; j < h; ++j) {
      const double t = *theta_.tail_sum(j);
      s += 16.0 * t * t;
    }
    const auto& tail = theta_.tail();
    if (tail.kind == Sequence::TailKind::geometric && tail.first > 0.0) {
      const double c = *theta_.tail_sum(std::max(j0, h));
      const double r2 = tail.ratio * tail.ratio;
      s += 16.0 * c * c / (1.0 - r2);
    } else {
      // finitely supported tails contribute nothing beyond the head
      const double rest = *theta_.tail_sum(std::max(j0, h));
      s += 16.0 * rest * rest;  // rest == 0 unless support straddles the head end
    }
    return s;
  }

  Alphabet alphabet_;
  std::set<std::size_t> n0_, n1_, n2_;
  Sequence theta_;
  double theta_total_ = 0.0;
};

/// Finite-order Markov kernel, the continuous cross-check case. Order 0 is
/// an i.i.d. source.
class MarkovKernel : public Kernel {
public:
  MarkovKernel(Alphabet alphabet, std::size_t order,
               std::map<std::string, std::vector<double>> rows)
      : alphabet_(std::move(alphabet)), order_(order) {
    const std::size_t m = alphabet_.size();
    std::size_t states = 1;
    for (std::size_t i = 0; i < order_; ++i) {
      if (states > (std::size_t{1} << 22) / m)
        throw resource_error("markov order too large for explicit table");
      states *= m;
    }
    if (rows.size() != states)
      throw spec_error("markov table has " + std::to_string(rows.size()) +
                       " rows, expected " + std::to_string(states));
    table_.assign(states, {});
    for (auto& [ctx, probs] : rows) {
      if (ctx.size() != order_)
        throw spec_error("markov context \"" + ctx + "\" has wrong length");
      if (probs.size() != m)
        throw spec_error("markov row \"" + ctx + "\" needs " +
                         std::to_string(m) + " probabilities");
      double s = 0.0;
      for (double p : probs) {
        if (!(p >= 0.0) || !(p <= 1.0))
          throw spec_error("markov probability out of [0,1] in row \"" + ctx + "\"");
        s += p;
      }
      if (std::abs(s - 1.0) > tol::normalization)
        throw spec_error("markov row \"" + ctx + "\" sums to " + std::to_string(s));
      table_[state_index(Word(ctx))] = probs;
    }
  }

  const Alphabet& alphabet() const override { return alphabet_; }
  std::string name() const override { return "markov"; }
  std::size_t order() const { return order_; }

  ProbabilityInterval bounds(const Word& context, char next) const override {
    check_context(context);
    const std::size_t a = check_next(next);
    if (context.size() >= order_)
      return ProbabilityInterval::point(table_[state_index(context.suffix(order_))][a]);
    // hull over the unseen older symbols
    const std::size_t m = alphabet_.size();
    const std::size_t fixed = context.size();
    const std::size_t base = state_index(context);
    std::size_t step = 1;
    for (std::size_t i = 0; i < fixed; ++i) step *= m;
    std::size_t count = 1;
    for (std::size_t i = fixed; i < order_; ++i) count *= m;
    double lo = 1.0, hi = 0.0;
    for (std::size_t t = 0; t < count; ++t) {
      const double p = table_[t * step + base][a];
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
    return {lo, hi};
  }

  std::vector<Word> discontinuity_words(std::size_t /*n*/) const override {
    return {};
  }

  std::optional<double> variation_bound_analytic(const Word& /*v*/,
                                                 std::size_t n) const override {
    if (n >= order_) return 0.0;
    return std::nullopt;
  }

  std::optional<double> variation_tail_sq(const Word& /*v*/,
                                          std::size_t n0) const override {
    if (n0 >= order_) return 0.0;
    return std::nullopt;
  }

private:
  std::size_t state_index(const Word& w) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
      idx = idx * alphabet_.size() + alphabet_.index_of(w.at(i));
    return idx;
  }

  Alphabet alphabet_;
  std::size_t order_;
  std::vector<std::vector<double>> table_;
};

/// Upper bound on var^v_n: sup over pasts of length n through the subtree
/// at v, and over next symbols, of the oscillation of the kernel. Uses the
/// kernel's closed form when declared, otherwise enumerates the
/// m^(n-|v|+1) free choices up to `depth_budget` total symbols.
inline double variation_bound(const Kernel& kernel, const Word& v, std::size_t n,
                              std::size_t depth_budget = kDefaultDepthBudget) {
  if (n < v.size())
    throw spec_error("variation_bound: depth " + std::to_string(n) +
                     " below context length " + std::to_string(v.size()));
  if (auto a = kernel.variation_bound_analytic(v, n)) return *a;
  if (n + 1 > depth_budget)
    throw resource_error(
        "variation enumeration needs " + std::to_string(n + 1) +
        " symbols, over the depth budget of " + std::to_string(depth_budget) +
        "; raise --budget-depth or use a kernel with analytic variation bounds");
  const auto& alphabet = kernel.alphabet();
  double worst = 0.0;
  for (const Word& free : all_words(alphabet, n - v.size())) {
    const Word past(free.str() + v.str());
    for (std::size_t a = 0; a < alphabet.size(); ++a)
      worst = std::max(worst, kernel.bounds(past, alphabet.label(a)).width());
  }
  return worst;
}

}  // namespace gmeasure

#endif  // GMEASURE_KERNELS_HPP
