#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <set>

#include "gmeasure/kernels.hpp"
#include "gmeasure/trees.hpp"

using namespace gmeasure;
using Catch::Approx;

namespace {

CombKernel alternating_comb() {
  return CombKernel(Sequence::periodic({0.8, 0.2}), 0.5);
}

ThreeLetterKernel bundled_three_letter() {
  return ThreeLetterKernel({1}, {2}, {3}, Sequence::list({0.01, 0.005}));
}

MarkovKernel iid_markov() {
  return MarkovKernel(Alphabet("01"), 0, {{"", {0.7, 0.3}}});
}

// minimal kernel stub whose declared discontinuity sets come from a table;
// used to exercise tree validation and synthetic fixtures
class TableTreeKernel : public Kernel {
public:
  TableTreeKernel(Alphabet a, std::vector<std::vector<Word>> levels)
      : alphabet_(std::move(a)), levels_(std::move(levels)) {}
  const Alphabet& alphabet() const override { return alphabet_; }
  std::string name() const override { return "table_tree"; }
  ProbabilityInterval bounds(const Word&, char) const override {
    return {0.0, 1.0};
  }
  std::vector<Word> discontinuity_words(std::size_t n) const override {
    if (n == 0 || n > levels_.size()) return {};
    return levels_[n - 1];
  }

private:
  Alphabet alphabet_;
  std::vector<std::vector<Word>> levels_;
};

std::vector<Word> words_of(std::initializer_list<const char*> ss) {
  std::vector<Word> out;
  for (const char* s : ss) out.emplace_back(std::string(s));
  return out;
}

// full m-ary tree over the first `arity` symbols of the alphabet
DiscontinuityTree full_tree(const Alphabet& a, std::size_t arity,
                            std::size_t depth) {
  const Alphabet sub(a.labels().substr(0, std::max<std::size_t>(arity, 2)));
  std::vector<std::vector<Word>> levels;
  for (std::size_t n = 1; n <= depth; ++n) {
    std::vector<Word> level;
    for (const Word& w : all_words(sub, n))
      if ([&] {
            for (std::size_t i = 0; i < w.size(); ++i)
              if (sub.index_of(w.at(i)) >= arity) return false;
            return true;
          }())
        level.push_back(w);
    levels.push_back(std::move(level));
  }
  return DiscontinuityTree(a, std::move(levels));
}

}  // namespace

TEST_CASE("comb tree is the single all-zero branch") {
  const auto tree = build_tree(alternating_comb(), 5);
  REQUIRE(tree.depth() == 5);
  for (std::size_t n = 1; n <= 5; ++n) {
    REQUIRE(tree.level(n).size() == 1);
    CHECK(tree.level(n)[0].str() == std::string(n, '0'));
  }
}

TEST_CASE("three-letter tree doubles every level") {
  const auto tree = build_tree(bundled_three_letter(), 3);
  CHECK(tree.level(1).size() == 2);
  CHECK(tree.level(2).size() == 4);
  CHECK(tree.level(3).size() == 8);
}

TEST_CASE("continuous kernels have an empty tree") {
  const auto tree = build_tree(iid_markov(), 4);
  CHECK(tree.empty());
  const auto g = growth_rate(tree);
  CHECK(g.empty_set);
  CHECK(g.estimate == 0.0);
}

TEST_CASE("tree validation rejects inconsistent level sets") {
  const Alphabet binary("01");
  // level-2 word whose suffix is not in level 1
  TableTreeKernel bad_projection(binary,
                                 {words_of({"0"}), words_of({"11"})});
  CHECK_THROWS_AS(build_tree(bad_projection, 2), spec_error);
  // level-1 word with no extension: branches must be infinite
  TableTreeKernel childless(binary,
                            {words_of({"0", "1"}), words_of({"00"})});
  CHECK_THROWS_AS(build_tree(childless, 2), spec_error);
  CHECK_THROWS_AS(build_tree(bad_projection, 0), spec_error);
}

TEST_CASE("growth rate is exact for geometric level counts") {
  const auto three = build_tree(bundled_three_letter(), 6);
  CHECK(growth_rate(three).estimate == 2.0);
  const auto comb = build_tree(alternating_comb(), 6);
  CHECK(growth_rate(comb).estimate == 1.0);
}

TEST_CASE("growth per-level values for the branching fixture") {
  // level counts 2, 3, 4, 6, 7, 8 over a binary alphabet
  const Alphabet binary("01");
  std::vector<std::vector<Word>> levels = {
      words_of({"0", "1"}),
      words_of({"00", "10", "01"}),
      words_of({"000", "100", "110", "001"}),
      words_of({"0000", "1000", "1100", "0110", "1001", "0001"}),
      words_of({"00000", "10000", "11000", "01100", "10110", "01001",
                "00001"}),
      words_of({"000000", "100000", "110000", "011000", "101100", "010110",
                "101001", "000001"})};
  const DiscontinuityTree tree(binary, std::move(levels));
  const auto g = growth_rate(tree);
  REQUIRE(g.per_level.size() == 6);
  CHECK(g.per_level[0] == 2.0);
  CHECK(g.per_level[1] == Approx(std::sqrt(3.0)).margin(1e-12));
  CHECK(g.per_level[2] == Approx(std::pow(4.0, 1.0 / 3.0)).margin(1e-12));
  CHECK(g.per_level[3] == Approx(std::pow(6.0, 0.25)).margin(1e-12));
  CHECK(g.per_level[4] == Approx(std::pow(7.0, 0.2)).margin(1e-12));
  CHECK(g.per_level[5] == Approx(std::pow(8.0, 1.0 / 6.0)).margin(1e-12));
  CHECK(g.estimate == Approx(std::pow(6.0, 0.25)).margin(1e-12));
}

TEST_CASE("growth estimate recovers geometric branching rates") {
  const Alphabet ternary("012");
  for (std::size_t r : {std::size_t{1}, std::size_t{2}, std::size_t{3}}) {
    const auto tree = full_tree(ternary, r, 8);
    CHECK(growth_rate(tree).estimate == static_cast<double>(r));
  }
  // a transient prefix then steady doubling: the estimate approaches 2
  auto delayed = [&](std::size_t depth) {
    std::vector<std::vector<Word>> levels;
    levels.push_back(words_of({"0"}));
    levels.push_back(words_of({"00"}));
    const Alphabet binary("01");
    for (std::size_t n = 3; n <= depth; ++n) {
      std::vector<Word> lvl;
      for (const Word& w : all_words(binary, n - 2))
        lvl.emplace_back(w.str() + "00");
      levels.push_back(std::move(lvl));
    }
    return growth_rate(DiscontinuityTree(binary, std::move(levels))).estimate;
  };
  const double e6 = delayed(6), e12 = delayed(12), e16 = delayed(16);
  CHECK(e12 > e6);
  CHECK(e16 > e12 - 1e-12);
  CHECK(std::abs(e16 - 2.0) < 0.25);
}

TEST_CASE("skeleton leaves of the comb") {
  const auto tree = build_tree(alternating_comb(), 5);
  const auto sk = skeleton_leaves(tree);
  std::vector<std::string> got;
  for (const Word& w : sk.finite_leaves) got.push_back(w.str());
  CHECK(got == std::vector<std::string>{"1", "10", "100", "1000", "10000"});
}

TEST_CASE("skeleton leaves of the three-letter kernel") {
  const auto tree = build_tree(bundled_three_letter(), 3);
  const auto sk = skeleton_leaves(tree);
  std::set<std::string> got;
  for (const Word& w : sk.finite_leaves) got.insert(w.str());
  const std::set<std::string> want = {"1",   "10",  "12",  "100",
                                      "102", "120", "122"};
  CHECK(got == want);
}

TEST_CASE("empty tree makes every length-1 word a leaf") {
  const auto tree = build_tree(iid_markov(), 3);
  const auto sk = skeleton_leaves(tree);
  REQUIRE(sk.finite_leaves.size() == 2);
  CHECK(sk.finite_leaves[0].str() == "0");
  CHECK(sk.finite_leaves[1].str() == "1");
}

TEST_CASE("shift stability holds for the built-in kernels") {
  CHECK(check_H3(build_tree(alternating_comb(), 6)).holds_to_depth);
  CHECK(check_H3(build_tree(bundled_three_letter(), 5)).holds_to_depth);
}

TEST_CASE("shift stability fails when the branch pins a trailing symbol") {
  // branch ...0001: depth-n words are 0^(n-1) 1; the shift strips the 1
  const Alphabet binary("01");
  std::vector<std::vector<Word>> levels;
  for (std::size_t n = 1; n <= 4; ++n)
    levels.push_back({Word(std::string(n - 1, '0') + "1")});
  const DiscontinuityTree tree(binary, std::move(levels));
  const auto h3 = check_H3(tree);
  CHECK_FALSE(h3.holds_to_depth);
  REQUIRE(h3.witness);
  CHECK(h3.witness->str() == "01");
}

TEST_CASE("skeleton leaves and the deepest level tile the word space") {
  // exactly one suffix of every depth-length word is a finite leaf, unless
  // the word itself sits in the discontinuity set
  auto check_tiling = [](const DiscontinuityTree& tree) {
    const auto sk = skeleton_leaves(tree);
    std::set<std::string> leaves;
    for (const Word& v : sk.finite_leaves) leaves.insert(v.str());
    const std::size_t depth = tree.depth();
    for (const Word& u : all_words(tree.alphabet(), depth)) {
      std::size_t hits = tree.contains(depth, u) ? 1 : 0;
      for (std::size_t len = 1; len <= depth; ++len)
        if (leaves.count(u.suffix(len).str())) ++hits;
      if (hits != 1) return false;
    }
    return true;
  };

  CHECK(check_tiling(build_tree(alternating_comb(), 6)));
  CHECK(check_tiling(build_tree(bundled_three_letter(), 5)));
  CHECK(check_tiling(build_tree(iid_markov(), 4)));

  std::mt19937 rng(31);
  int instances = 0;
  for (int it = 0; it < 120; ++it, ++instances) {
    const std::size_t m = 2 + rng() % 2;
    const Alphabet alphabet(std::string("012").substr(0, m));
    const std::size_t depth = 3 + rng() % 3;
    std::vector<std::vector<Word>> levels(depth);
    for (std::size_t a = 0; a < m; ++a)
      if (rng() % 2) levels[0].emplace_back(std::string(1, alphabet.label(a)));
    if (levels[0].empty()) levels[0].emplace_back(std::string(1, '0'));
    for (std::size_t n = 1; n < depth; ++n)
      for (const Word& w : levels[n - 1]) {
        bool extended = false;
        for (std::size_t a = 0; a < m; ++a)
          if (rng() % 2) {
            levels[n].push_back(w.prepended(alphabet.label(a)));
            extended = true;
          }
        if (!extended)
          levels[n].push_back(w.prepended(alphabet.label(rng() % m)));
      }
    const DiscontinuityTree tree(alphabet, std::move(levels));
    CHECK(check_tiling(tree));
  }
  CHECK(instances >= 100);
}
