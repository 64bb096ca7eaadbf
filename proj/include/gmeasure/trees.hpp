#ifndef GMEASURE_TREES_HPP
#define GMEASURE_TREES_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "gmeasure/core.hpp"
#include "gmeasure/kernels.hpp"

namespace gmeasure {

/// Per-depth word sets D^n of the discontinuity set, n = 1..depth.
/// Invariants checked at construction: every level-(n+1) word projects onto
/// level n under suffix truncation, and every level-n word has at least one
/// extension (branches are infinite pasts).
class DiscontinuityTree {
public:
  DiscontinuityTree(Alphabet alphabet, std::vector<std::vector<Word>> levels)
      : alphabet_(std::move(alphabet)), levels_(std::move(levels)) {
    for (auto& lvl : levels_) std::sort(lvl.begin(), lvl.end());
    sets_.reserve(levels_.size());
    for (std::size_t n = 0; n < levels_.size(); ++n) {
      std::unordered_set<std::string> s;
      for (const Word& w : levels_[n]) {
        if (w.size() != n + 1)
          throw spec_error("discontinuity word \"" + w.str() +
                           "\" has wrong length for level " + std::to_string(n + 1));
        s.insert(w.str());
      }
      if (s.size() != levels_[n].size())
        throw spec_error("duplicate discontinuity word at level " +
                         std::to_string(n + 1));
      sets_.push_back(std::move(s));
    }
    for (std::size_t n = 0; n + 1 < levels_.size(); ++n) {
      for (const Word& w : levels_[n + 1])
        if (!sets_[n].count(w.suffix(n + 1).str()))
          throw spec_error("level " + std::to_string(n + 2) + " word \"" +
                           w.str() + "\" does not project into level " +
                           std::to_string(n + 1));
      std::unordered_set<std::string> extended;
      for (const Word& w : levels_[n + 1]) extended.insert(w.suffix(n + 1).str());
      for (const Word& w : levels_[n])
        if (!extended.count(w.str()))
          throw spec_error("level " + std::to_string(n + 1) + " word \"" +
                           w.str() + "\" has no extension; branches must be infinite");
    }
  }

  const Alphabet& alphabet() const { return alphabet_; }
  std::size_t depth() const { return levels_.size(); }
  bool empty() const {
    return levels_.empty() || levels_.front().empty();
  }

  /// Sorted D^n, 1-based depth.
  const std::vector<Word>& level(std::size_t n) const {
    if (n == 0 || n > levels_.size())
      throw spec_error("tree level " + std::to_string(n) + " not materialized");
    return levels_[n - 1];
  }

  bool contains(std::size_t n, const Word& w) const {
    if (n == 0 || n > sets_.size()) return false;
    return sets_[n - 1].count(w.str()) != 0;
  }

private:
  Alphabet alphabet_;
  std::vector<std::vector<Word>> levels_;
  std::vector<std::unordered_set<std::string>> sets_;
};

inline DiscontinuityTree build_tree(const Kernel& kernel, std::size_t depth) {
  if (depth < 1) throw spec_error("tree depth must be >= 1");
  std::vector<std::vector<Word>> levels;
  levels.reserve(depth);
  std::size_t total = 0;
  for (std::size_t n = 1; n <= depth; ++n) {
    levels.push_back(kernel.discontinuity_words(n));
    total += levels.back().size();
    if (total > (std::size_t{1} << 22))
      throw resource_error("discontinuity tree exceeds the level budget at depth " +
                           std::to_string(n));
  }
  return DiscontinuityTree(kernel.alphabet(), std::move(levels));
}

struct GrowthRate {
  std::vector<double> per_level;  // |D^n|^{1/n}, n = 1..depth
  double estimate = 0.0;          // max over the deepest half of the levels
  bool empty_set = false;
};

namespace detail {
// |D^n|^{1/n} with exact integer roots snapped, so geometric level counts
// report their rate without floating noise.
inline double level_root(std::size_t count, std::size_t n) {
  if (count == 0) return 0.0;
  const double r = std::pow(static_cast<double>(count), 1.0 / static_cast<double>(n));
  const auto k = static_cast<std::size_t>(std::llround(r));
  if (k >= 1) {
    std::size_t p = 1;
    bool overflow = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (p > std::numeric_limits<std::size_t>::max() / k) { overflow = true; break; }
      p *= k;
    }
    if (!overflow && p == count) return static_cast<double>(k);
  }
  return r;
}
}  // namespace detail

/// Finite-depth proxy for limsup |D^n|^{1/n}: the maximum over the deepest
/// half of the materialized levels, which is robust to transient small-n
/// counts and exact when the counts are exactly geometric.
inline GrowthRate growth_rate(const DiscontinuityTree& tree) {
  GrowthRate g;
  if (tree.empty()) {
    g.empty_set = true;
    for (std::size_t n = 1; n <= tree.depth(); ++n) g.per_level.push_back(0.0);
    return g;
  }
  if (tree.depth() < 2) throw spec_error("growth_rate needs tree depth >= 2");
  for (std::size_t n = 1; n <= tree.depth(); ++n)
    g.per_level.push_back(detail::level_root(tree.level(n).size(), n));
  const std::size_t window = (tree.depth() + 1) / 2;
  for (std::size_t n = tree.depth() - window + 1; n <= tree.depth(); ++n)
    g.estimate = std::max(g.estimate, g.per_level[n - 1]);
  return g;
}

/// Finite leaves of the skeleton context tree discovered up to the tree's
/// depth, together with the discontinuity levels they complement.
struct Skeleton {
  std::vector<Word> finite_leaves;  // sorted, lengths 1..depth
  const DiscontinuityTree* infinite_part = nullptr;
};

/// Leaves are one-symbol continuations that leave the discontinuity tree:
/// words a.w (symbol prepended on the old side) with w in D^k and a.w not
/// in D^{k+1}, plus the length-1 words outside D^1.
inline Skeleton skeleton_leaves(const DiscontinuityTree& tree) {
  Skeleton sk;
  sk.infinite_part = &tree;
  const Alphabet& alphabet = tree.alphabet();
  for (std::size_t a = 0; a < alphabet.size(); ++a) {
    const Word w(std::string(1, alphabet.label(a)));
    if (!tree.contains(1, w)) sk.finite_leaves.push_back(w);
  }
  for (std::size_t k = 1; k + 1 <= tree.depth(); ++k)
    for (const Word& w : tree.level(k))
      for (std::size_t a = 0; a < alphabet.size(); ++a) {
        const Word ext = w.prepended(alphabet.label(a));
        if (!tree.contains(k + 1, ext)) sk.finite_leaves.push_back(ext);
      }
  std::sort(sk.finite_leaves.begin(), sk.finite_leaves.end());
  return sk;
}

struct H3Result {
  bool holds_to_depth = true;
  std::optional<Word> witness;  // first level-(n+1) word whose shift leaves D
};

/// Depth-n shadow of the shift-stability T(D) inside D: for every word in
/// D^{n+1}, dropping the coordinate-0 symbol must land in D^n.
inline H3Result check_H3(const DiscontinuityTree& tree) {
  if (tree.depth() < 2) throw spec_error("check_H3 needs tree depth >= 2");
  H3Result r;
  for (std::size_t n = 1; n + 1 <= tree.depth(); ++n)
    for (const Word& w : tree.level(n + 1))
      if (!tree.contains(n, drop_last(w))) {
        r.holds_to_depth = false;
        r.witness = w;
        return r;
      }
  return r;
}

}  // namespace gmeasure

#endif  // GMEASURE_TREES_HPP
