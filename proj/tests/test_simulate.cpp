#include <catch_amalgamated.hpp>

#include <cmath>

#include "gmeasure/kernels.hpp"
#include "gmeasure/simulate.hpp"
#include "gmeasure/stationary.hpp"

using namespace gmeasure;
using Catch::Approx;

namespace {

CombKernel alternating_comb() {
  return CombKernel(Sequence::periodic({0.8, 0.2}), 0.5);
}

CombKernel harmonic_comb() {
  return CombKernel(Sequence::harmonic(2.0), 0.5);
}

MarkovKernel order1_markov() {
  return MarkovKernel(Alphabet("01"), 1,
                      {{"0", {0.9, 0.1}}, {"1", {0.4, 0.6}}});
}

MarkovKernel iid_markov(double p1) {
  return MarkovKernel(Alphabet("01"), 0, {{"", {1.0 - p1, p1}}});
}

double freq_of(const std::string& path, char c) {
  double n = 0.0;
  for (char x : path) n += x == c;
  return n / double(path.size());
}

}  // namespace

TEST_CASE("identical seeds reproduce the path byte for byte") {
  const auto k = alternating_comb();
  SimConfig cfg;
  cfg.seed = 99;
  cfg.length = 5000;
  cfg.stationary_init = true;
  const auto a = sample_path(k, cfg);
  const auto b = sample_path(k, cfg);
  CHECK(a.symbols == b.symbols);
  CHECK(a.generator == std::string("mt19937_64"));
  cfg.seed = 100;
  CHECK(sample_path(k, cfg).symbols != a.symbols);
}

TEST_CASE("iid sampling matches the marginal") {
  const auto k = iid_markov(0.3);
  SimConfig cfg;
  cfg.seed = 7;
  cfg.length = 200000;
  cfg.burn_in = 100;
  const auto path = sample_path(k, cfg);
  const double se = std::sqrt(0.3 * 0.7 / double(cfg.length));
  CHECK(std::abs(freq_of(path.symbols, '1') - 0.3) <= 3.0 * se);
  CHECK(path.nondegenerate_draws == 0);
}

TEST_CASE("markov sampling reproduces the transition matrix") {
  const auto k = order1_markov();
  SimConfig cfg;
  cfg.seed = 21;
  cfg.length = 200000;
  cfg.burn_in = 500;
  cfg.init = Word("0");
  const auto path = sample_path(k, cfg);
  double n0 = 0, n01 = 0, n1 = 0, n10 = 0;
  for (std::size_t t = 0; t + 1 < path.symbols.size(); ++t) {
    if (path.symbols[t] == '0') {
      n0 += 1;
      n01 += path.symbols[t + 1] == '1';
    } else {
      n1 += 1;
      n10 += path.symbols[t + 1] == '0';
    }
  }
  const double p01 = n01 / n0, p10 = n10 / n1;
  CHECK(std::abs(p01 - 0.1) <= 3.0 * std::sqrt(0.1 * 0.9 / n0));
  CHECK(std::abs(p10 - 0.4) <= 3.0 * std::sqrt(0.4 * 0.6 / n1));
}

TEST_CASE("comb path frequencies agree with the renewal law") {
  const auto k = alternating_comb();
  const auto oracle = RenewalOracle(k);
  SimConfig cfg;
  cfg.seed = 5;
  cfg.length = 200000;
  cfg.stationary_init = true;
  cfg.truncation_depth = 64;
  const auto path = sample_path(k, cfg);
  const double p1 = oracle.pi(0);
  const double se = std::sqrt(p1 * (1 - p1) / double(cfg.length));
  CHECK(std::abs(freq_of(path.symbols, '1') - p1) <= 3.0 * se);
  CHECK(path.nondegenerate_draws == 0);
}

TEST_CASE("empirical cylinder tables") {
  const auto k = alternating_comb();
  const auto oracle = RenewalOracle(k);
  SimConfig cfg;
  cfg.seed = 12;
  cfg.length = 400000;
  cfg.stationary_init = true;
  cfg.truncation_depth = 64;
  const auto path = sample_path(k, cfg);
  const auto est = empirical_cylinders(k, path, 6);
  CHECK(est->source() == "empirical");

  const double p06 = oracle.tail_pi(6);
  const double se = std::sqrt(p06 * (1 - p06) / double(cfg.length));
  CHECK(std::abs(est->prob(repeated('0', 6)) - p06) <= 4.0 * se);

  // additivity up to the window boundary
  for (const Word& w : all_words(k.alphabet(), 3)) {
    const double gap = est->prob(w) -
                       (est->prob(w.prepended('0')) + est->prob(w.prepended('1')));
    CHECK(std::abs(gap) <= 6.0 / double(cfg.length));
  }
  CHECK_THROWS_AS(est->prob(repeated('0', 7)), spec_error);
}

TEST_CASE("constant emitter concentrates every cylinder") {
  const auto k = iid_markov(1.0);
  SimConfig cfg;
  cfg.seed = 3;
  cfg.length = 30000;
  cfg.init = Word("1");
  const auto path = sample_path(k, cfg);
  const auto est = empirical_cylinders(k, path, 5);
  CHECK(est->prob(repeated('1', 5)) == 1.0);
  CHECK(est->prob(repeated('0', 1)) == 0.0);
}

TEST_CASE("iid empirical joint frequencies factorize approximately") {
  const auto k = iid_markov(0.3);
  SimConfig cfg;
  cfg.seed = 17;
  cfg.length = 300000;
  const auto path = sample_path(k, cfg);
  const auto est = empirical_cylinders(k, path, 3);
  for (const Word& w : all_words(k.alphabet(), 3)) {
    double expect = 1.0;
    for (std::size_t i = 0; i < 3; ++i)
      expect *= w.at(i) == '1' ? 0.3 : 0.7;
    CHECK(est->prob(w) == Approx(expect).margin(4.0 * std::sqrt(expect / 3e5)));
  }
}

TEST_CASE("short paths are rejected for deep cylinder tables") {
  const auto k = iid_markov(0.5);
  SimConfig cfg;
  cfg.seed = 2;
  cfg.length = 500;
  const auto path = sample_path(k, cfg);
  CHECK_THROWS_AS(empirical_cylinders(k, path, 6), resource_error);
}

TEST_CASE("monte carlo error halves when the length quadruples") {
  const auto k = alternating_comb();
  const auto oracle = RenewalOracle(k);
  const double p1 = oracle.pi(0);
  auto rms = [&](std::size_t length) {
    double acc = 0.0;
    const int reps = 16;
    for (int r = 0; r < reps; ++r) {
      SimConfig cfg;
      cfg.seed = 1000 + r;
      cfg.length = length;
      cfg.stationary_init = true;
      const auto path = sample_path(k, cfg);
      const double err = freq_of(path.symbols, '1') - p1;
      acc += err * err;
    }
    return std::sqrt(acc / reps);
  };
  const double e1 = rms(20000), e4 = rms(80000);
  CHECK(e4 <= 0.72 * e1);
}

TEST_CASE("decay diagnostic tracks the renewal tail") {
  const auto k = alternating_comb();
  const auto tree = build_tree(k, 10);
  SimConfig cfg;
  cfg.seed = 8;
  cfg.length = 200000;
  cfg.stationary_init = true;
  cfg.truncation_depth = 64;
  const auto path = sample_path(k, cfg);
  const auto d = decay_diagnostic(k, tree, path, 10);
  REQUIRE(d.slope);
  CHECK(*d.slope <= std::log(0.8) + 0.05);
  CHECK_FALSE(d.slow_decay);
  for (const auto& p : d.points) CHECK(p.mass <= p.ceiling + 1e-9);
}

TEST_CASE("decay diagnostic is silent on empty discontinuity sets") {
  const auto k = iid_markov(0.3);
  const auto tree = build_tree(k, 6);
  SimConfig cfg;
  cfg.seed = 4;
  cfg.length = 20000;
  const auto path = sample_path(k, cfg);
  const auto d = decay_diagnostic(k, tree, path, 6);
  for (const auto& p : d.points) CHECK(p.mass == 0.0);
  CHECK_FALSE(d.slope);
  CHECK_FALSE(d.slow_decay);
}

TEST_CASE("non-summable comb shows non-vanishing deep-zero mass") {
  const auto k = harmonic_comb();
  const auto tree = build_tree(k, 10);
  SimConfig cfg;
  cfg.seed = 6;
  cfg.length = 200000;
  cfg.init = Word("1");
  cfg.truncation_depth = 64;
  const auto path = sample_path(k, cfg);
  const auto d = decay_diagnostic(k, tree, path, 10);
  REQUIRE(d.slope_tail);
  CHECK(*d.slope_tail > -0.15);
  CHECK(d.slow_decay);
}

TEST_CASE("non-degenerate contexts are counted or rejected") {
  const auto k = alternating_comb();
  SimConfig cfg;
  cfg.seed = 14;
  cfg.length = 50000;
  cfg.init = Word("1");
  cfg.truncation_depth = 3;  // zero runs longer than the window occur often
  const auto path = sample_path(k, cfg);
  CHECK(path.nondegenerate_draws > 0);
  cfg.midpoint_fallback = false;
  CHECK_THROWS_AS(sample_path(k, cfg), diagnostic_error);
}

TEST_CASE("stationary initialization requires an exact oracle") {
  SimConfig cfg;
  cfg.seed = 1;
  cfg.length = 10;
  cfg.stationary_init = true;
  const auto mk = order1_markov();
  CHECK_THROWS_AS(sample_path(mk, cfg), spec_error);
  const auto bad = harmonic_comb();
  CHECK_THROWS_AS(sample_path(bad, cfg), diagnostic_error);
}

TEST_CASE("bad simulation configs are rejected") {
  const auto k = alternating_comb();
  SimConfig cfg;
  cfg.length = 0;
  CHECK_THROWS_AS(sample_path(k, cfg), spec_error);
  cfg.length = 10;
  cfg.truncation_depth = 0;
  CHECK_THROWS_AS(sample_path(k, cfg), spec_error);
  cfg.truncation_depth = 4;
  cfg.init = Word("12");
  CHECK_THROWS_AS(sample_path(k, cfg), spec_error);
}
