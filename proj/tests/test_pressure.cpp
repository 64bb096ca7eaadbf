#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "gmeasure/kernels.hpp"
#include "gmeasure/pressure.hpp"
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

LongMemoryKernel geometric_longmem() {
  return LongMemoryKernel(0.1, LongMemoryKernel::GeometricFamily{0.95});
}

MarkovKernel order1_markov() {
  return MarkovKernel(Alphabet("01"), 1,
                      {{"0", {0.9, 0.1}}, {"1", {0.4, 0.6}}});
}

MarkovKernel iid_markov() {
  return MarkovKernel(Alphabet("01"), 0, {{"", {0.7, 0.3}}});
}

DiscontinuityTree full_binary_tree(std::size_t depth) {
  const Alphabet binary("01");
  std::vector<std::vector<Word>> levels;
  for (std::size_t n = 1; n <= depth; ++n) levels.push_back(all_words(binary, n));
  return DiscontinuityTree(binary, std::move(levels));
}

}  // namespace

TEST_CASE("block-weight bounds on the comb") {
  const auto k = alternating_comb();
  const auto b = sup_gn_bound(k, Word("00"));
  CHECK(b.ub == Approx(0.64).margin(1e-12));
  // representative completion pins ell through the regeneration symbol '1':
  // the factors become (1 - q_0)(1 - q_1) = 0.2 * 0.8
  CHECK(b.lb == Approx(0.16).margin(1e-12));
  CHECK(b.lb <= b.ub);
}

TEST_CASE("single-factor block weight is the plain upper bound") {
  const auto comb = alternating_comb();
  const auto tl = bundled_three_letter();
  const Kernel* kernels[] = {&comb, &tl};
  for (const Kernel* k : kernels)
    for (std::size_t a = 0; a < k->alphabet().size(); ++a) {
      const char c = k->alphabet().label(a);
      CHECK(sup_gn_bound(*k, Word(std::string(1, c))).ub ==
            Approx(k->bounds(Word(), c).hi).margin(1e-15));
    }
  CHECK_THROWS_AS(sup_gn_bound(comb, Word()), spec_error);
}

TEST_CASE("block weights of a known transition matrix are exact products") {
  const auto mk = order1_markov();
  const double p[2][2] = {{0.9, 0.1}, {0.4, 0.6}};
  for (const Word& B : all_words(mk.alphabet(), 3)) {
    const std::size_t s0 = B.at(0) - '0', s1 = B.at(1) - '0', s2 = B.at(2) - '0';
    // sup over the unseen initial state, then exact matrix entries
    const double expected =
        std::max(p[0][s0], p[1][s0]) * p[s0][s1] * p[s1][s2];
    CHECK(sup_gn_bound(mk, B).ub == Approx(expected).margin(1e-12));
  }
  // the regeneration completion attains the supremum on 0-led words
  const auto b = sup_gn_bound(mk, Word("01"));
  CHECK(b.ub == Approx(0.9 * 0.1).margin(1e-12));
  CHECK(b.lb == Approx(b.ub).margin(1e-12));
}

TEST_CASE("comb pressure curve sits exactly at log(1 - eps)") {
  const auto k = alternating_comb();
  const auto tree = build_tree(k, 20);
  const auto curve = pressure_curve(k, tree, 20);
  REQUIRE(curve.per_n.size() == 20);
  for (const auto& pt : curve.per_n) {
    CHECK(pt.upper <= std::log(0.8) + 1e-12);
    CHECK(pt.upper == Approx(std::log(0.8)).margin(1e-12));
    CHECK(pt.lower <= pt.upper + 1e-12);
  }
  CHECK(curve.negative_to_depth);
}

TEST_CASE("three-letter pressure curve matches the per-level factor table") {
  // independent evaluation: the certified factor for prefix length j is
  //   next '0': 1/2 while some l >= j lies in N1 or N2, else the 0.3 branch
  //   next '2': 1/2 while some l >= j lies in N0 or N1, else 0.48
  const auto k = bundled_three_letter();
  const auto tree = build_tree(k, 12);
  const auto curve = pressure_curve(k, tree, 12);
  auto f0 = [](std::size_t j) { return j <= 3 ? 0.5 : 0.3; };
  auto f2 = [](std::size_t j) { return j <= 2 ? 0.5 : 0.48; };
  for (std::size_t n = 1; n <= 12; ++n) {
    double level_sum = 1.0;
    for (std::size_t j = 0; j < n; ++j) level_sum *= f0(j) + f2(j);
    CHECK(curve.per_n[n - 1].upper ==
          Approx(std::log(level_sum) / double(n)).margin(1e-9));
    // the coarse bound through |D^n| = 2^n and the H1 block estimate
    const double coarse =
        std::log(std::pow(2.0, double(n)) * std::pow(0.48, double(n) - 4.0)) /
        double(n);
    CHECK(curve.per_n[n - 1].upper <= coarse + 1e-12);
  }
  CHECK(curve.negative_to_depth);
}

TEST_CASE("empty discontinuity set has negative pressure by convention") {
  const auto k = iid_markov();
  const auto tree = build_tree(k, 6);
  const auto curve = pressure_curve(k, tree, 6);
  CHECK(curve.empty_set);
  CHECK(curve.negative_to_depth);
  for (const auto& pt : curve.per_n) CHECK(pt.upper == kNegInf);
}

TEST_CASE("upper curve does not depend on the requested depth") {
  const auto k = bundled_three_letter();
  const auto tree = build_tree(k, 10);
  const auto c6 = pressure_curve(k, tree, 6);
  const auto c10 = pressure_curve(k, tree, 10);
  for (std::size_t n = 1; n <= 6; ++n)
    CHECK(c6.per_n[n - 1].upper == c10.per_n[n - 1].upper);
}

TEST_CASE("degenerate bounds collapse lower onto upper") {
  // constant q makes every cylinder bound a point, so both block-weight
  // routes agree
  const CombKernel k(Sequence::constant(0.3), 0.3);
  const auto tree = build_tree(k, 8);
  const auto curve = pressure_curve(k, tree, 8);
  for (const auto& pt : curve.per_n)
    CHECK(pt.lower == Approx(pt.upper).margin(1e-9));
}

TEST_CASE("pressure over the full word space is nonnegative") {
  const auto iid = iid_markov();
  const auto tree = full_binary_tree(6);
  const auto curve = pressure_curve(iid, tree, 6);
  for (const auto& pt : curve.per_n) {
    CHECK(pt.upper >= -1e-12);
    CHECK(pt.upper <= 1e-12);  // product measure: the sums are exactly 1
  }
  const auto comb_curve = pressure_curve(alternating_comb(), tree, 6);
  for (const auto& pt : comb_curve.per_n) CHECK(pt.upper >= -1e-12);
}

TEST_CASE("strongly non-null kernels obey the block-weight envelope") {
  const auto comb = alternating_comb();
  const auto lm = geometric_longmem();
  const auto mk = order1_markov();
  const Kernel* kernels[] = {&comb, &lm, &mk};
  std::mt19937 rng(47);
  int instances = 0;
  for (const Kernel* k : kernels) {
    const double eps = strong_nonnullness(*k);
    REQUIRE(eps > 0.0);
    const double envelope =
        1.0 - (double(k->alphabet().size()) - 1.0) * eps;
    for (int it = 0; it < 40; ++it, ++instances) {
      const std::size_t n = 1 + rng() % 10;
      std::string s;
      for (std::size_t i = 0; i < n; ++i)
        s += k->alphabet().label(rng() % k->alphabet().size());
      CHECK(sup_gn_bound(*k, Word(s)).ub <=
            std::pow(envelope, double(n)) + 1e-12);
    }
  }
  CHECK(instances >= 100);
}

TEST_CASE("weak non-nullness scan over the shifted discontinuity contexts") {
  SECTION("three-letter: first positive level is past the largest branch index") {
    const auto k = bundled_three_letter();
    const auto tree = build_tree(k, 8);
    const auto h1 = check_H1(k, tree, 7);
    REQUIRE(h1.found);
    CHECK(h1.N == 4);
    CHECK(h1.eps == Approx(0.26).margin(1e-15));
    for (std::size_t N = 0; N < 4; ++N) CHECK(h1.eps_by_N[N] == 0.0);
  }
  SECTION("comb: strong non-nullness already holds") {
    const auto k = alternating_comb();
    const auto tree = build_tree(k, 6);
    const auto h1 = check_H1(k, tree, 5);
    REQUIRE(h1.found);
    CHECK(h1.N == 0);
    CHECK(h1.eps == Approx(0.2).margin(1e-12));
  }
  SECTION("a reachable zero value defeats every level") {
    const CombKernel k(Sequence::periodic({0.0, 0.5}), 0.5);
    const auto tree = build_tree(k, 6);
    const auto h1 = check_H1(k, tree, 5);
    CHECK_FALSE(h1.found);
  }
}

TEST_CASE("corollary route selection and thresholds") {
  SECTION("three-letter goes through the shift-stable route") {
    const auto k = bundled_three_letter();
    const auto tree = build_tree(k, 8);
    const auto cor = check_corollary(k, tree, check_H1(k, tree, 7));
    CHECK(cor.route == "H1+H2'+H3");
    CHECK(cor.holds);
    CHECK(cor.gr == 2.0);
    CHECK(cor.threshold == Approx(1.0 / 0.48).margin(1e-12));
    CHECK(cor.h3_holds);
  }
  SECTION("comb alternating goes through strong non-nullness") {
    const auto k = alternating_comb();
    const auto tree = build_tree(k, 6);
    const auto cor = check_corollary(k, tree, check_H1(k, tree, 5));
    CHECK(cor.route == "H1'+H2'");
    CHECK(cor.holds);
    CHECK(cor.gr == 1.0);
    CHECK(cor.threshold == Approx(1.25).margin(1e-12));
  }
  SECTION("fast-growing synthetic tree fails the threshold") {
    const Alphabet ternary("012");
    std::vector<std::vector<Word>> levels;
    for (std::size_t n = 1; n <= 6; ++n) levels.push_back(all_words(ternary, n));
    const DiscontinuityTree tree(ternary, std::move(levels));
    H1Result h1;
    h1.found = true;
    h1.N = 0;
    h1.eps = 0.2;
    const auto cor = check_corollary(alternating_comb(), tree, h1);
    CHECK(cor.gr == 3.0);
    CHECK(cor.threshold == Approx(1.25).margin(1e-12));
    CHECK_FALSE(cor.holds);
  }
  SECTION("no positive level means no route") {
    const CombKernel k(Sequence::periodic({0.0, 0.5}), 0.5);
    const auto tree = build_tree(k, 6);
    const auto cor = check_corollary(k, tree, check_H1(k, tree, 5));
    CHECK(cor.route == "none");
    CHECK_FALSE(cor.holds);
  }
}

TEST_CASE("shadow curve coincides with the main curve on shift-stable trees") {
  const auto comb = alternating_comb();
  const auto tree = build_tree(comb, 9);
  const auto main_curve = pressure_curve(comb, tree, 8);
  const auto shadow = pressure_curve_shadow(comb, tree, 8);
  for (std::size_t n = 1; n <= 8; ++n)
    CHECK(shadow.per_n[n - 1].upper == main_curve.per_n[n - 1].upper);

  const auto tl = bundled_three_letter();
  const auto tl_tree = build_tree(tl, 7);
  const auto tl_main = pressure_curve(tl, tl_tree, 6);
  const auto tl_shadow = pressure_curve_shadow(tl, tl_tree, 6);
  for (std::size_t n = 1; n <= 6; ++n)
    CHECK(tl_shadow.per_n[n - 1].upper == tl_main.per_n[n - 1].upper);
}
