#ifndef GMEASURE_STATIONARY_HPP
#define GMEASURE_STATIONARY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gmeasure/core.hpp"
#include "gmeasure/kernels.hpp"
#include "gmeasure/pressure.hpp"
#include "gmeasure/trees.hpp"

namespace gmeasure {

inline constexpr std::size_t kDefaultStateBudget = std::size_t{1} << 20;
inline constexpr std::size_t kPowerIterationCap = 100000;

/// Cylinder-probability table; sources are the order-k operator truncation,
/// the exact comb renewal oracle, or empirical path frequencies.
class StationaryEstimate {
public:
  virtual ~StationaryEstimate() = default;
  virtual std::string source() const = 0;
  virtual std::size_t max_len() const = 0;
  virtual double prob(const Word& w) const = 0;
};

using EstimatePtr = std::shared_ptr<const StationaryEstimate>;

/// Order-k Markov truncation of the transfer-operator fixed point. States
/// are the words of length k; the transition emitting `a` from state w is
/// the renormalized midpoint of bounds(w, a), so it is exact wherever the
/// context determines the kernel.
class MarkovApprox : public StationaryEstimate {
public:
  MarkovApprox(const Kernel& kernel, std::size_t order,
               std::size_t state_budget = kDefaultStateBudget)
      : alphabet_(kernel.alphabet()), order_(order) {
    if (order_ < 1) throw spec_error("markov approximation order must be >= 1");
    const std::size_t m = alphabet_.size();
    states_ = 1;
    for (std::size_t i = 0; i < order_; ++i) {
      if (states_ > state_budget / m)
        throw resource_error("markov approximation needs " + std::to_string(m) +
                             "^" + std::to_string(order_) +
                             " states, over the budget of " +
                             std::to_string(state_budget));
      states_ *= m;
    }
    assemble(kernel);
    iterate();
    analyze_classes();
  }

  std::string source() const override {
    return "markov_approx(" + std::to_string(order_) + ")";
  }
  std::size_t max_len() const override { return order_; }
  std::size_t order() const { return order_; }
  const Alphabet& alphabet() const { return alphabet_; }
  const std::vector<double>& pi() const { return pi_; }
  double transition(std::size_t state, std::size_t a) const {
    return trans_[state * alphabet_.size() + a];
  }
  std::size_t iterations() const { return iterations_; }
  double residual() const { return residual_; }
  double max_interval_width() const { return max_width_; }
  bool reducible() const { return closed_classes_ > 1; }
  std::size_t closed_classes() const { return closed_classes_; }

  double prob(const Word& w) const override {
    if (w.size() > order_)
      throw spec_error("cylinder \"" + w.str() + "\" longer than the order " +
                       std::to_string(order_) + " truncation");
    const std::size_t m = alphabet_.size();
    std::size_t suffix_idx = 0, block = 1;
    for (std::size_t i = 0; i < w.size(); ++i)
      suffix_idx = suffix_idx * m + alphabet_.index_of(w.at(i));
    for (std::size_t i = 0; i < w.size(); ++i) block *= m;
    // low digits hold the most recent symbols: states s with s % block == idx
    double s = 0.0;
    for (std::size_t hi = 0; hi < states_ / block; ++hi)
      s += pi_[hi * block + suffix_idx];
    return s;
  }

  /// Disagreement between the two length-(k-1) marginals of pi (oldest k-1
  /// coordinates vs newest k-1); zero for an exactly shift-invariant table.
  double shift_consistency_residual() const {
    const std::size_t m = alphabet_.size();
    const std::size_t sub = states_ / m;
    double worst = 0.0;
    for (std::size_t u = 0; u < sub; ++u) {
      double oldest = 0.0, newest = 0.0;
      for (std::size_t a = 0; a < m; ++a) {
        oldest += pi_[u * m + a];
        newest += pi_[a * sub + u];
      }
      worst = std::max(worst, std::abs(oldest - newest));
    }
    return worst;
  }

  Word state_word(std::size_t idx) const {
    std::string s(order_, alphabet_.label(0));
    for (std::size_t i = order_; i-- > 0;) {
      s[i] = alphabet_.label(idx % alphabet_.size());
      idx /= alphabet_.size();
    }
    return Word(s);
  }

private:
  void assemble(const Kernel& kernel) {
    const std::size_t m = alphabet_.size();
    trans_.assign(states_ * m, 0.0);
    max_width_ = 0.0;
    for (std::size_t s = 0; s < states_; ++s) {
      const Word w = state_word(s);
      double row = 0.0;
      for (std::size_t a = 0; a < m; ++a) {
        const ProbabilityInterval b = kernel.bounds(w, alphabet_.label(a));
        max_width_ = std::max(max_width_, b.width());
        trans_[s * m + a] = b.mid();
        row += b.mid();
      }
      for (std::size_t a = 0; a < m; ++a) trans_[s * m + a] /= row;
    }
  }

  void iterate() {
    const std::size_t m = alphabet_.size();
    const std::size_t mask = states_ / m;  // states_ = mask * m
    pi_.assign(states_, 1.0 / static_cast<double>(states_));
    std::vector<double> next(states_);
    for (iterations_ = 1; iterations_ <= kPowerIterationCap; ++iterations_) {
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t s = 0; s < states_; ++s) {
        const double ps = pi_[s];
        if (ps == 0.0) continue;
        const std::size_t shifted = (s % mask) * m;
        for (std::size_t a = 0; a < m; ++a)
          next[shifted + a] += ps * trans_[s * m + a];
      }
      double sum = 0.0, tv = 0.0;
      for (std::size_t s = 0; s < states_; ++s) sum += next[s];
      for (std::size_t s = 0; s < states_; ++s) {
        next[s] /= sum;
        tv += std::abs(next[s] - pi_[s]);
      }
      tv *= 0.5;
      pi_.swap(next);
      residual_ = tv;
      if (tv < 1e-12) return;
    }
    throw diagnostic_error(
        "power iteration did not converge in " +
        std::to_string(kPowerIterationCap) +
        " steps; total-variation step residual " + std::to_string(residual_));
  }

  // Count closed communicating classes of the positive-weight transition
  // graph (iterative Tarjan); more than one means the uniform-start limit is
  // a particular convex combination and callers should see a warning.
  void analyze_classes() {
    const std::size_t m = alphabet_.size();
    const std::size_t mask = states_ / m;
    constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> index(states_, kUnvisited), low(states_, 0),
        comp(states_, kUnvisited);
    std::vector<bool> on_stack(states_, false);
    std::vector<std::size_t> stack, call_node, call_edge;
    std::size_t counter = 0, comps = 0;
    for (std::size_t root = 0; root < states_; ++root) {
      if (index[root] != kUnvisited) continue;
      call_node.assign(1, root);
      call_edge.assign(1, 0);
      index[root] = low[root] = counter++;
      stack.push_back(root);
      on_stack[root] = true;
      while (!call_node.empty()) {
        const std::size_t v = call_node.back();
        if (call_edge.back() < m) {
          const std::size_t a = call_edge.back()++;
          if (trans_[v * m + a] <= 0.0) continue;
          const std::size_t w = (v % mask) * m + a;
          if (index[w] == kUnvisited) {
            index[w] = low[w] = counter++;
            stack.push_back(w);
            on_stack[w] = true;
            call_node.push_back(w);
            call_edge.push_back(0);
          } else if (on_stack[w]) {
            low[v] = std::min(low[v], index[w]);
          }
        } else {
          call_node.pop_back();
          call_edge.pop_back();
          if (!call_node.empty())
            low[call_node.back()] = std::min(low[call_node.back()], low[v]);
          if (low[v] == index[v]) {
            while (true) {
              const std::size_t w = stack.back();
              stack.pop_back();
              on_stack[w] = false;
              comp[w] = comps;
              if (w == v) break;
            }
            ++comps;
          }
        }
      }
    }
    std::vector<bool> closed(comps, true);
    for (std::size_t s = 0; s < states_; ++s)
      for (std::size_t a = 0; a < m; ++a) {
        if (trans_[s * m + a] <= 0.0) continue;
        const std::size_t t = (s % mask) * m + a;
        if (comp[t] != comp[s]) closed[comp[s]] = false;
      }
    closed_classes_ = 0;
    for (bool c : closed)
      if (c) ++closed_classes_;
  }

  Alphabet alphabet_;
  std::size_t order_;
  std::size_t states_ = 0;
  std::vector<double> trans_;
  std::vector<double> pi_;
  std::size_t iterations_ = 0;
  double residual_ = 0.0;
  double max_width_ = 0.0;
  std::size_t closed_classes_ = 1;
};

inline std::shared_ptr<const MarkovApprox> build_markov_approx(
    const Kernel& kernel, std::size_t order,
    std::size_t state_budget = kDefaultStateBudget) {
  return std::make_shared<MarkovApprox>(kernel, order, state_budget);
}

/// Exact stationary law of the comb kernel's ell-chain: survival weights
/// rho(l) = prod_{i<l}(1 - q_i), normalization Z = sum rho(l). A divergent Z
/// together with q_inf > 0 reproduces the known non-existence criterion.
class RenewalOracle : public StationaryEstimate {
public:
  enum class Summability { summable, non_summable, inconclusive };

  RenewalOracle(const Sequence& q, double q_inf, std::size_t tail_terms = 64)
      : q_(q), q_inf_(q_inf) {
    require_probability_range(q_, "q");
    analyze();
    weights_.reserve(tail_terms);
    for (std::size_t l = 0; l < tail_terms; ++l) weights_.push_back(rho(l));
  }

  explicit RenewalOracle(const CombKernel& kernel, std::size_t tail_terms = 64)
      : RenewalOracle(kernel.q(), kernel.q_inf(), tail_terms) {}

  std::string source() const override { return "renewal_oracle"; }
  std::size_t max_len() const override {
    return std::numeric_limits<std::size_t>::max();
  }

  Summability summability() const { return summability_; }
  bool summable() const { return summability_ == Summability::summable; }
  /// Divergent normalization with q_inf > 0: no stationary law exists for
  /// this comb kernel.
  bool no_gmeasure() const {
    return summability_ == Summability::non_summable && q_inf_ > 0.0;
  }
  const std::string& note() const { return note_; }
  double normalization() const { return Z_; }
  const std::vector<double>& weights() const { return weights_; }

  double rho(std::size_t l) const {
    if (l < rho_.size()) return rho_[l];
    // beyond the analyzed prefix the tail rule is in force
    double r = rho_.back();
    for (std::size_t i = rho_.size() - 1; i < l; ++i) r *= 1.0 - q_.value(i);
    return r;
  }

  double pi(std::size_t l) const {
    require_summable();
    return rho(l) / Z_;
  }

  /// P(ell >= n) = sum_{l >= n} pi(l), in closed form.
  double tail_pi(std::size_t n) const {
    require_summable();
    return tail_rho(n) / Z_;
  }

  /// Exact cylinder probability. The chain regenerates at the first '1' of
  /// the word; everything after it is a deterministic ell-path.
  double prob(const Word& w) const override {
    require_summable();
    if (w.empty()) return 1.0;
    const std::string& s = w.str();
    std::size_t first_one = s.find('1');
    for (char c : s)
      if (c != '0' && c != '1')
        throw spec_error("renewal oracle words are binary, got \"" + s + "\"");
    if (first_one == std::string::npos) return tail_pi(s.size());
    double p = pi(first_one);
    std::size_t ell = 0;
    for (std::size_t t = first_one + 1; t < s.size(); ++t) {
      const double q = q_.value(ell);
      if (s[t] == '1') {
        p *= q;
        ell = 0;
      } else {
        p *= 1.0 - q;
        ell += 1;
      }
    }
    return p;
  }

  /// log decay rate per level of tail_pi(n) when the survival weights are
  /// eventually geometric-periodic.
  std::optional<double> tail_log_rate() const {
    if (!summable() || period_ == 0 || period_ratio_ <= 0.0) return std::nullopt;
    return std::log(period_ratio_) / static_cast<double>(period_);
  }

private:
  void require_summable() const {
    if (summable()) return;
    throw diagnostic_error(
        "renewal normalization diverges (" + note_ +
        "); no stationary distribution for this comb kernel");
  }

  void analyze() {
    const auto& tail = q_.tail();
    const std::size_t l0 = q_.head_size();
    const std::size_t probe =
        l0 + (tail.kind == Sequence::TailKind::periodic ? tail.values.size() : 1);
    rho_.assign(1, 1.0);
    for (std::size_t l = 0; l < probe; ++l) {
      const double next = rho_.back() * (1.0 - q_.value(l));
      rho_.push_back(next);
      if (next == 0.0) {  // a reset probability of 1 ends the support
        summability_ = Summability::summable;
        Z_ = 0.0;
        for (double r : rho_) Z_ += r;
        tail_start_ = rho_.size();
        period_ = 0;
        note_ = "finite support";
        return;
      }
    }
    tail_start_ = l0;
    switch (tail.kind) {
      case Sequence::TailKind::zero:
        summability_ = Summability::non_summable;
        note_ = "q vanishes beyond index " + std::to_string(l0) +
                ", survival weights stay constant";
        return;
      case Sequence::TailKind::constant:
        period_ = 1;
        period_ratio_ = 1.0 - tail.value;
        break;
      case Sequence::TailKind::periodic: {
        period_ = tail.values.size();
        period_ratio_ = 1.0;
        for (double v : tail.values) period_ratio_ *= 1.0 - v;
        break;
      }
      case Sequence::TailKind::harmonic:
        summability_ = Summability::non_summable;
        note_ = "harmonic reset probabilities give survival weights of order 1/l";
        return;
      case Sequence::TailKind::geometric:
        summability_ = Summability::non_summable;
        note_ = "summable q keeps the survival weights bounded away from zero";
        return;
    }
    if (period_ratio_ >= 1.0) {
      summability_ = Summability::non_summable;
      note_ = "all reset probabilities vanish along the period";
      return;
    }
    summability_ = Summability::summable;
    Z_ = 0.0;
    for (std::size_t l = 0; l < tail_start_; ++l) Z_ += rho_[l];
    double block = 0.0;
    for (std::size_t j = 0; j < period_; ++j) block += rho_[tail_start_ + j];
    Z_ += block / (1.0 - period_ratio_);
    note_ = "eventually periodic survival ratio " + std::to_string(period_ratio_);
  }

  double tail_rho(std::size_t n) const {
    double s = 0.0;
    if (period_ == 0) {  // finite support
      for (std::size_t l = n; l < rho_.size(); ++l) s += rho_[l];
      return s;
    }
    for (std::size_t l = n; l < tail_start_; ++l) s += rho_[l];
    for (std::size_t j = 0; j < period_; ++j) {
      const std::size_t base = tail_start_ + j;
      std::size_t tmin = 0;
      if (n > base) tmin = (n - base + period_ - 1) / period_;
      s += rho_[base] * std::pow(period_ratio_, static_cast<double>(tmin)) /
           (1.0 - period_ratio_);
    }
    return s;
  }

  Sequence q_;
  double q_inf_;
  Summability summability_ = Summability::inconclusive;
  double Z_ = std::numeric_limits<double>::infinity();
  std::vector<double> rho_;     // rho(0 .. tail_start+period)
  std::size_t tail_start_ = 0;  // first index governed by the tail rule
  std::size_t period_ = 0;      // 0 marks finite support
  double period_ratio_ = 0.0;   // survival factor across one period
  std::vector<double> weights_;
  std::string note_;
};

inline std::shared_ptr<const RenewalOracle> renewal_oracle(
    const CombKernel& kernel, std::size_t tail_terms = 64) {
  return std::make_shared<RenewalOracle>(kernel, tail_terms);
}

struct DiscontinuityMassPoint {
  std::size_t n = 0;
  double mass = 0.0;     // estimated measure of the cylinders meeting D
  double ceiling = 0.0;  // certified pressure ceiling for the same level
};

/// Estimated measure of C_n(D) per level, next to the certified ceiling
/// sum of per-cylinder upper bounds.
inline std::vector<DiscontinuityMassPoint> discontinuity_mass(
    const Kernel& kernel, const StationaryEstimate& est,
    const DiscontinuityTree& tree, std::size_t n_max) {
  if (n_max > est.max_len())
    throw spec_error("discontinuity_mass needs estimate order >= n_max");
  if (tree.depth() < n_max)
    throw spec_error("discontinuity_mass needs tree depth >= n_max");
  std::vector<DiscontinuityMassPoint> out;
  for (std::size_t n = 1; n <= n_max; ++n) {
    DiscontinuityMassPoint p;
    p.n = n;
    for (const Word& w : tree.level(n)) {
      p.mass += est.prob(w);
      p.ceiling += sup_gn_bound(kernel, w).ub;
    }
    out.push_back(p);
  }
  return out;
}

struct H4Result {
  double partial_sum = 0.0;
  std::vector<double> increment_by_size;  // leaf-length marginals, index = |v|
  bool tails_closed = true;               // every leaf had a closed-form tail
  std::optional<double> fitted_ratio;     // geometric fit of the increments
  std::string verdict = "inconclusive";   // "summable_to_depth" | "inconclusive"
  std::size_t leaf_count = 0;
};

namespace detail {
// Pairs (v, n) run over |v| <= n <= depth, plus the kernel's closed tail at
// depth+1. check_H4 and jo_criterion iterate the same set in different
// orders; keeping the set identical is what makes their leaf parts agree.
inline double leaf_R(const Kernel& kernel, const Word& v, std::size_t depth,
                     std::size_t depth_budget, bool& tail_closed) {
  double r = 0.0;
  for (std::size_t n = v.size(); n <= depth; ++n) {
    const double b = variation_bound(kernel, v, n, depth_budget);
    r += b * b;
  }
  if (auto t = kernel.variation_tail_sq(v, depth + 1)) r += *t;
  else tail_closed = false;
  return r;
}
}  // namespace detail

/// Partial sums of sum_v mu(v) R_v over the finite skeleton leaves, the
/// uniqueness functional. The verdict is conditional on the estimate source
/// and never theorem-grade: "summable_to_depth" needs closed tails and
/// geometrically decaying leaf-size increments.
inline H4Result check_H4(const Kernel& kernel, const Skeleton& skeleton,
                         const StationaryEstimate& est, std::size_t depth,
                         std::size_t depth_budget = kDefaultDepthBudget) {
  if (depth > est.max_len())
    throw spec_error("check_H4 needs estimate order >= depth");
  H4Result r;
  r.increment_by_size.assign(depth + 1, 0.0);
  for (const Word& v : skeleton.finite_leaves) {
    if (v.size() > depth) continue;
    bool closed = true;
    const double rv = detail::leaf_R(kernel, v, depth, depth_budget, closed);
    if (!closed) r.tails_closed = false;
    const double term = est.prob(v) * rv;
    r.partial_sum += term;
    r.increment_by_size[v.size()] += term;
    ++r.leaf_count;
  }
  // geometric fit over the nonzero increments in the deeper half
  std::vector<std::pair<std::size_t, double>> pts;
  for (std::size_t s = 1; s <= depth; ++s)
    if (r.increment_by_size[s] > 0.0) pts.emplace_back(s, r.increment_by_size[s]);
  if (pts.size() >= 2) {
    const auto& [s0, t0] = pts[pts.size() / 2];
    const auto& [s1, t1] = pts.back();
    if (s1 > s0)
      r.fitted_ratio = std::pow(t1 / t0, 1.0 / static_cast<double>(s1 - s0));
  }
  const bool tiny = r.partial_sum < 1e-15;
  const bool decaying = r.fitted_ratio && *r.fitted_ratio < 1.0;
  if (r.tails_closed && (tiny || decaying)) r.verdict = "summable_to_depth";
  return r;
}

struct JoCriterionResult {
  double total = 0.0;
  double d_part = 0.0;        // estimated mass of the discontinuity levels
  double leaf_part = 0.0;     // skeleton part, regrouped leaf-wise
  double d_part_ceiling = 0.0;  // certified pressure ceiling for d_part
  bool tails_closed = true;
};

/// Truncated square-variation integral sum_n sum_w mu(w) var_n(w)^2 split
/// into the discontinuity levels (variation majorated by 1, reported next
/// to the pressure ceiling) and the skeleton part, whose regrouping by leaf
/// equals the check_H4 summand.
inline JoCriterionResult jo_criterion(const Kernel& kernel,
                                      const DiscontinuityTree& tree,
                                      const Skeleton& skeleton,
                                      const StationaryEstimate& est,
                                      std::size_t depth,
                                      std::size_t depth_budget = kDefaultDepthBudget) {
  if (depth + 1 > est.max_len())
    throw spec_error("jo_criterion needs estimate order >= depth + 1");
  if (tree.depth() < depth + 1)
    throw spec_error("jo_criterion needs tree depth >= depth + 1");
  JoCriterionResult r;
  for (std::size_t n = 0; n <= depth; ++n) {
    for (const Word& w : tree.level(n + 1)) {
      r.d_part += est.prob(w);
      r.d_part_ceiling += sup_gn_bound(kernel, w).ub;
    }
    for (const Word& v : skeleton.finite_leaves) {
      if (v.size() > n || v.size() > depth) continue;
      const double b = variation_bound(kernel, v, n, depth_budget);
      r.leaf_part += est.prob(v) * b * b;
    }
  }
  for (const Word& v : skeleton.finite_leaves) {
    if (v.size() > depth) continue;
    if (auto t = kernel.variation_tail_sq(v, depth + 1))
      r.leaf_part += est.prob(v) * *t;
    else
      r.tails_closed = false;
  }
  r.total = r.d_part + r.leaf_part;
  return r;
}

}  // namespace gmeasure

#endif  // GMEASURE_STATIONARY_HPP
