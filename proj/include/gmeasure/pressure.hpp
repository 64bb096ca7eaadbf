#ifndef GMEASURE_PRESSURE_HPP
#define GMEASURE_PRESSURE_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gmeasure/core.hpp"
#include "gmeasure/kernels.hpp"
#include "gmeasure/trees.hpp"

namespace gmeasure {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr std::size_t kDefaultCompletionBudget = 96;

struct GnBound {
  double ub = 1.0;  // certified upper bound on sup of the n-block weight
  double lb = 0.0;  // weight of one representative completion (certified lower)
};

namespace detail {
// Prepend the kernel's regeneration symbol until the bounds on the next
// factor become degenerate (or the budget runs out); returns the certified
// lower endpoint at the narrowed context.
inline double completed_lo(const Kernel& kernel, const Word& context, char next,
                           std::size_t budget = kDefaultCompletionBudget) {
  Word c = context;
  const char r = kernel.regeneration_symbol();
  ProbabilityInterval b = kernel.bounds(c, next);
  for (std::size_t i = 0; i < budget && !b.degenerate(); ++i) {
    c = c.prepended(r);
    b = kernel.bounds(c, next);
  }
  return b.lo;
}
}  // namespace detail

/// Certified bounds on sup over the cylinder B of the n-block weight
/// g_n = product of the per-step kernel values. The upper bound multiplies
/// per-factor suprema (sub-multiplicativity); the lower bound evaluates one
/// representative completion through degenerate bounds.
inline GnBound sup_gn_bound(const Kernel& kernel, const Word& B) {
  if (B.empty()) throw spec_error("sup_gn_bound needs a nonempty word");
  GnBound r;
  r.lb = 1.0;
  for (std::size_t j = 0; j < B.size(); ++j) {
    const Word prefix = B.prefix(j);
    r.ub *= kernel.bounds(prefix, B.at(j)).hi;
    r.lb *= detail::completed_lo(kernel, prefix, B.at(j));
  }
  return r;
}

struct PressurePoint {
  std::size_t n = 0;
  double upper = kNegInf;  // (1/n) log sum of certified upper bounds
  double lower = kNegInf;  // (1/n) log sum of representative lower bounds
};

struct PressureCurve {
  std::vector<PressurePoint> per_n;
  bool negative_to_depth = false;
  bool empty_set = false;
  std::string verdict() const {
    return negative_to_depth ? "negative_to_depth" : "inconclusive";
  }
};

namespace detail {
inline PressureCurve curve_over_levels(
    const Kernel& kernel, std::size_t n_max,
    const std::vector<std::vector<Word>>& levels) {
  PressureCurve c;
  bool any = false;
  for (std::size_t n = 1; n <= n_max; ++n) {
    PressurePoint pt;
    pt.n = n;
    double s_up = 0.0, s_lo = 0.0;
    for (const Word& B : levels[n - 1]) {  // lexicographic order: deterministic sums
      const GnBound b = sup_gn_bound(kernel, B);
      s_up += b.ub;
      s_lo += b.lb;
      any = true;
    }
    const double dn = static_cast<double>(n);
    pt.upper = s_up > 0.0 ? std::log(s_up) / dn : kNegInf;
    pt.lower = s_lo > 0.0 ? std::log(s_lo) / dn : kNegInf;
    c.per_n.push_back(pt);
  }
  c.empty_set = !any;
  if (c.empty_set) {
    c.negative_to_depth = true;  // pressure of the empty set
    return c;
  }
  // negative from some level on, and settled: non-increasing over the last
  // three points (within tolerance)
  std::size_t n0 = n_max + 1;
  for (std::size_t n = n_max; n >= 1; --n) {
    if (c.per_n[n - 1].upper < 0.0) n0 = n;
    else break;
  }
  bool settled = true;
  const std::size_t tail_pts = std::min<std::size_t>(3, c.per_n.size());
  for (std::size_t i = c.per_n.size() - tail_pts; i + 1 < c.per_n.size(); ++i)
    if (c.per_n[i + 1].upper > c.per_n[i].upper + tol::eq) settled = false;
  c.negative_to_depth = n0 <= n_max && settled;
  return c;
}
}  // namespace detail

/// Pressure curve of the discontinuity set: per n, the certified upper and
/// representative lower (1/n) log sums over the cylinders meeting D.
inline PressureCurve pressure_curve(const Kernel& kernel,
                                    const DiscontinuityTree& tree,
                                    std::size_t n_max) {
  if (tree.depth() < n_max)
    throw spec_error("pressure_curve needs tree depth >= n_max");
  std::vector<std::vector<Word>> levels;
  for (std::size_t n = 1; n <= n_max; ++n) levels.push_back(tree.level(n));
  return detail::curve_over_levels(kernel, n_max, levels);
}

/// Same curve over the depth-n shadows of the shifted set T(D): the words
/// obtained from D^{n+1} by dropping the coordinate-0 symbol.
inline PressureCurve pressure_curve_shadow(const Kernel& kernel,
                                           const DiscontinuityTree& tree,
                                           std::size_t n_max) {
  if (tree.depth() < n_max + 1)
    throw spec_error("pressure_curve_shadow needs tree depth >= n_max + 1");
  std::vector<std::vector<Word>> levels(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    std::set<Word> shadow;
    for (const Word& w : tree.level(n + 1)) shadow.insert(drop_last(w));
    levels[n - 1].assign(shadow.begin(), shadow.end());
  }
  return detail::curve_over_levels(kernel, n_max, levels);
}

struct H1Result {
  bool found = false;
  std::size_t N = 0;
  double eps = 0.0;
  std::vector<double> eps_by_N;  // certified inf over E_N, N = 0..N_max
};

/// Smallest N with a certified positive infimum of the kernel over E_N,
/// the one-symbol extensions of the depth-N pasts shadowing D. The value
/// eps_N is the minimum of the lower bounds over the contexts obtained by
/// dropping the last symbol of each word of D^{N+1}, across next symbols.
///
/// An empty discontinuity set makes every E_N empty; the check then reports
/// N = 0 with the global infimum of the kernel as the non-nullness parameter.
inline H1Result check_H1(const Kernel& kernel, const DiscontinuityTree& tree,
                         std::size_t N_max) {
  if (!tree.empty() && tree.depth() < N_max + 1)
    throw spec_error("check_H1 needs tree depth >= N_max + 1");
  const Alphabet& alphabet = kernel.alphabet();
  H1Result r;
  for (std::size_t N = 0; N <= N_max; ++N) {
    std::set<Word> contexts;
    if (tree.empty()) {
      if (N == 0) contexts.insert(Word());
      else break;
    } else {
      for (const Word& w : tree.level(N + 1)) contexts.insert(drop_last(w));
    }
    double eps = 1.0;
    for (const Word& c : contexts)
      for (std::size_t a = 0; a < alphabet.size(); ++a)
        eps = std::min(eps, kernel.bounds(c, alphabet.label(a)).lo);
    r.eps_by_N.push_back(eps);
    if (!r.found && eps > 0.0) {
      r.found = true;
      r.N = N;
      r.eps = eps;
      break;
    }
  }
  return r;
}

/// Global infimum of the kernel (the strong non-nullness parameter).
inline double strong_nonnullness(const Kernel& kernel) {
  const Alphabet& alphabet = kernel.alphabet();
  double eps = 1.0;
  for (std::size_t a = 0; a < alphabet.size(); ++a)
    eps = std::min(eps, kernel.bounds(Word(), alphabet.label(a)).lo);
  return eps;
}

struct CorollaryResult {
  std::string route = "none";  // "H1'+H2'" | "H1+H2'+H3" | "none"
  bool holds = false;
  double gr = 0.0;
  double threshold = 0.0;  // 1 / (1 - (|A|-1) eps)
  double eps = 0.0;
  std::size_t N = 0;
  bool h3_holds = false;
  std::optional<Word> h3_witness;
};

/// Sufficient existence conditions: the growth rate of the discontinuity
/// tree against 1/(1-(|A|-1)eps). N = 0 uses strong non-nullness alone;
/// N > 0 additionally needs the shift-stability check.
inline CorollaryResult check_corollary(const Kernel& kernel,
                                       const DiscontinuityTree& tree,
                                       const H1Result& h1) {
  CorollaryResult r;
  const GrowthRate g = growth_rate(tree);
  r.gr = g.empty_set ? 0.0 : g.estimate;
  if (!h1.found) return r;
  r.eps = h1.eps;
  r.N = h1.N;
  const double m1 = static_cast<double>(kernel.alphabet().size()) - 1.0;
  const double denom = 1.0 - m1 * h1.eps;
  r.threshold = denom > 0.0 ? 1.0 / denom : std::numeric_limits<double>::infinity();
  if (h1.N == 0) {
    r.route = "H1'+H2'";
    r.holds = r.gr < r.threshold;
    return r;
  }
  r.route = "H1+H2'+H3";
  const H3Result h3 = check_H3(tree);
  r.h3_holds = h3.holds_to_depth;
  r.h3_witness = h3.witness;
  r.holds = h3.holds_to_depth && r.gr < r.threshold;
  return r;
}

}  // namespace gmeasure

#endif  // GMEASURE_PRESSURE_HPP
