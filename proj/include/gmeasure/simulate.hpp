#ifndef GMEASURE_SIMULATE_HPP
#define GMEASURE_SIMULATE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gmeasure/core.hpp"
#include "gmeasure/kernels.hpp"
#include "gmeasure/pressure.hpp"
#include "gmeasure/stationary.hpp"
#include "gmeasure/trees.hpp"

namespace gmeasure {

/// Identifier of the random source recorded in every simulation report;
/// draws are (x >> 11) * 2^-53 from the standard 64-bit Mersenne twister,
/// so runs reproduce across implementations of the same generator.
inline constexpr const char* kGeneratorId = "mt19937_64";

struct SimConfig {
  std::uint64_t seed = 1;
  std::size_t burn_in = 0;
  std::size_t length = 1;
  /// Starting context; padded on the old side with `fill` (0 means the
  /// kernel's regeneration symbol). `stationary_init` draws the comb
  /// ell-state from the exact renewal law instead.
  Word init;
  bool stationary_init = false;
  char fill = '\0';
  std::size_t truncation_depth = 32;
  bool midpoint_fallback = true;

  void validate() const {
    if (length < 1) throw spec_error("simulation length must be >= 1");
    if (truncation_depth < 1) throw spec_error("truncation_depth must be >= 1");
  }
};

struct SamplePath {
  std::string symbols;  // emitted labels, oldest first
  std::size_t nondegenerate_draws = 0;
  std::string generator = kGeneratorId;
};

namespace detail {
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
}  // namespace detail

/// Draws a trajectory. Each step samples the next symbol from the canonical
/// per-context distribution: the degenerate-bound value where the window
/// determines the kernel, otherwise the renormalized midpoints (counted, or
/// rejected when the fallback is disabled). Deterministic given the seed.
inline SamplePath sample_path(const Kernel& kernel, const SimConfig& cfg) {
  cfg.validate();
  const Alphabet& alphabet = kernel.alphabet();
  const std::size_t m = alphabet.size();
  std::mt19937_64 rng(cfg.seed);

  std::string ctx;
  if (cfg.stationary_init) {
    const auto* comb = dynamic_cast<const CombKernel*>(&kernel);
    if (!comb)
      throw spec_error("stationary initialization is only exact for comb kernels");
    const RenewalOracle oracle(*comb);
    if (!oracle.summable())
      throw diagnostic_error("stationary initialization impossible: " +
                             oracle.note());
    const double u = detail::uniform01(rng);
    std::size_t ell = 0;
    double cum = oracle.pi(0);
    while (cum < u && ell < 4096) cum += oracle.pi(++ell);
    ctx = "1" + std::string(ell, '0');
  } else {
    const char fill = cfg.fill ? cfg.fill : kernel.regeneration_symbol();
    if (!alphabet.contains(fill))
      throw spec_error(std::string("fill symbol '") + fill + "' not in alphabet");
    for (std::size_t i = 0; i < cfg.init.size(); ++i)
      if (!alphabet.contains(cfg.init.at(i)))
        throw spec_error("init word \"" + cfg.init.str() + "\" not over the alphabet");
    ctx = cfg.init.size() >= cfg.truncation_depth
              ? cfg.init.suffix(cfg.truncation_depth).str()
              : std::string(cfg.truncation_depth - cfg.init.size(), fill) +
                    cfg.init.str();
  }
  if (ctx.size() > cfg.truncation_depth)
    ctx.erase(0, ctx.size() - cfg.truncation_depth);

  SamplePath out;
  out.symbols.reserve(cfg.length);
  std::vector<double> p(m);
  for (std::size_t step = 0; step < cfg.burn_in + cfg.length; ++step) {
    double sum = 0.0;
    bool degenerate = true;
    for (std::size_t a = 0; a < m; ++a) {
      const ProbabilityInterval b = kernel.bounds(Word(ctx), alphabet.label(a));
      if (b.width() > tol::normalization) degenerate = false;
      p[a] = b.mid();
      sum += p[a];
    }
    if (!degenerate) {
      if (!cfg.midpoint_fallback)
        throw diagnostic_error(
            "non-degenerate bounds at context \"" + ctx +
            "\"; enable the midpoint fallback or deepen the window");
      ++out.nondegenerate_draws;
    }
    const double u = detail::uniform01(rng) * sum;
    double cum = 0.0;
    std::size_t pick = m - 1;
    for (std::size_t a = 0; a < m; ++a) {
      cum += p[a];
      if (u < cum) {
        pick = a;
        break;
      }
    }
    const char emitted = alphabet.label(pick);
    if (step >= cfg.burn_in) out.symbols.push_back(emitted);
    ctx.push_back(emitted);
    if (ctx.size() > cfg.truncation_depth) ctx.erase(0, 1);
  }
  return out;
}

/// Sliding-window frequencies of all words up to max_len. Additivity holds
/// up to boundary effects of order max_len / length.
class EmpiricalEstimate : public StationaryEstimate {
public:
  EmpiricalEstimate(const Alphabet& alphabet, const std::string& path,
                    std::size_t max_len)
      : max_len_(max_len) {
    std::size_t cells = 1;
    for (std::size_t i = 0; i < max_len; ++i) cells *= alphabet.size();
    if (path.size() < 100 * cells)
      throw resource_error("empirical cylinders of length " +
                           std::to_string(max_len) + " need a path of at least " +
                           std::to_string(100 * cells) + " steps, got " +
                           std::to_string(path.size()));
    for (std::size_t n = 1; n <= max_len; ++n) {
      auto& level = freq_[n];
      const double denom = static_cast<double>(path.size() - n + 1);
      for (std::size_t t = n - 1; t < path.size(); ++t)
        level[path.substr(t - n + 1, n)] += 1.0;
      for (auto& [w, c] : level) c /= denom;
    }
  }

  std::string source() const override { return "empirical"; }
  std::size_t max_len() const override { return max_len_; }

  double prob(const Word& w) const override {
    if (w.empty()) return 1.0;
    if (w.size() > max_len_)
      throw spec_error("empirical estimate only covers words up to length " +
                       std::to_string(max_len_));
    const auto& level = freq_.at(w.size());
    auto it = level.find(w.str());
    return it == level.end() ? 0.0 : it->second;
  }

private:
  std::size_t max_len_;
  std::unordered_map<std::size_t, std::unordered_map<std::string, double>> freq_;
};

inline std::shared_ptr<const EmpiricalEstimate> empirical_cylinders(
    const Kernel& kernel, const SamplePath& path, std::size_t max_len) {
  return std::make_shared<EmpiricalEstimate>(kernel.alphabet(), path.symbols,
                                             max_len);
}

struct DecayDiagnostic {
  std::vector<DiscontinuityMassPoint> points;  // empirical mass vs ceiling
  std::optional<double> slope;       // least-squares slope of log mass
  std::optional<double> slope_tail;  // same fit over the deeper half
  /// Tail slope above -0.15, i.e. the mass shrinks by less than a factor
  /// ~0.86 per level: a sign it is not vanishing along the levels.
  bool slow_decay = false;
};

namespace detail {
inline std::optional<double> log_slope(
    const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return std::nullopt;
  return (n * sxy - sx * sy) / den;
}
}  // namespace detail

/// Empirical mass of the discontinuity levels along a path, against the
/// certified pressure ceiling, with a log-linear decay fit.
inline DecayDiagnostic decay_diagnostic(const Kernel& kernel,
                                        const DiscontinuityTree& tree,
                                        const SamplePath& path,
                                        std::size_t n_max) {
  if (tree.depth() < n_max)
    throw spec_error("decay_diagnostic needs tree depth >= n_max");
  if (path.symbols.size() < n_max)
    throw resource_error("path shorter than the requested diagnostic depth");
  DecayDiagnostic d;
  const std::string& s = path.symbols;
  for (std::size_t n = 1; n <= n_max; ++n) {
    DiscontinuityMassPoint p;
    p.n = n;
    std::vector<std::string> words;
    words.reserve(tree.level(n).size());
    for (const Word& w : tree.level(n)) {
      words.push_back(w.str());
      p.ceiling += sup_gn_bound(kernel, w).ub;
    }
    std::sort(words.begin(), words.end());
    std::size_t hits = 0;
    for (std::size_t t = n - 1; t < s.size(); ++t) {
      const std::string_view window(s.data() + (t - n + 1), n);
      if (std::binary_search(words.begin(), words.end(), window,
                             [](const auto& a, const auto& b) {
                               return std::string_view(a) < std::string_view(b);
                             }))
        ++hits;
    }
    p.mass = static_cast<double>(hits) / static_cast<double>(s.size() - n + 1);
    d.points.push_back(p);
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : d.points)
    if (p.mass > 0.0)
      pts.emplace_back(static_cast<double>(p.n), std::log(p.mass));
  d.slope = detail::log_slope(pts);
  if (pts.size() >= 2) {
    std::vector<std::pair<double, double>> tail(pts.begin() + pts.size() / 2,
                                                pts.end());
    d.slope_tail = detail::log_slope(tail);
  }
  d.slow_decay = d.slope_tail && *d.slope_tail > -0.15;
  return d;
}

}  // namespace gmeasure

#endif  // GMEASURE_SIMULATE_HPP
