#ifndef GMEASURE_JSON_IO_HPP
#define GMEASURE_JSON_IO_HPP

#include <cstdio>
#include <cstdlib>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmeasure/core.hpp"
#include "gmeasure/kernels.hpp"
#include "gmeasure/pressure.hpp"
#include "gmeasure/simulate.hpp"
#include "gmeasure/stationary.hpp"
#include "gmeasure/trees.hpp"
#include "gmeasure/version.hpp"

namespace gmeasure {

using json = nlohmann::json;

namespace jio {

inline void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw spec_error(where + ": expected a JSON object");
}

/// Strict field check: all of `required` present, nothing outside
/// required + optional accepted.
inline void check_fields(const json& j, const std::string& where,
                         std::initializer_list<const char*> required,
                         std::initializer_list<const char*> optional = {}) {
  require_object(j, where);
  for (const char* k : required)
    if (!j.contains(k))
      throw spec_error(where + ": missing field \"" + k + "\"");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : required)
      if (it.key() == k) known = true;
    for (const char* k : optional)
      if (it.key() == k) known = true;
    if (!known)
      throw spec_error(where + ": unknown field \"" + it.key() + "\"");
  }
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw spec_error(where + ": expected a number");
  return j.get<double>();
}

inline std::vector<double> number_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw spec_error(where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(number(v, where));
  return out;
}

/// Round-trips through %.15g: probabilities are exported at 15 significant
/// digits.
inline double sig15(double v) {
  if (!std::isfinite(v)) return v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return std::strtod(buf, nullptr);
}

inline json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace jio

inline Sequence parse_sequence(const json& j, const std::string& where) {
  jio::require_object(j, where);
  if (!j.contains("type") || !j.at("type").is_string())
    throw spec_error(where + ": sequence needs a string \"type\"");
  const std::string type = j.at("type").get<std::string>();
  auto tail_of = [&](const json& t, const std::string& w) -> Sequence::Tail {
    jio::require_object(t, w);
    if (!t.contains("type") || !t.at("type").is_string())
      throw spec_error(w + ": tail needs a string \"type\"");
    const std::string tt = t.at("type").get<std::string>();
    Sequence::Tail tail;
    if (tt == "zero") {
      jio::check_fields(t, w, {"type"});
      tail.kind = Sequence::TailKind::zero;
    } else if (tt == "constant") {
      jio::check_fields(t, w, {"type", "value"});
      tail.kind = Sequence::TailKind::constant;
      tail.value = jio::number(t.at("value"), w + ".value");
    } else if (tt == "periodic") {
      jio::check_fields(t, w, {"type", "values"});
      tail.kind = Sequence::TailKind::periodic;
      tail.values = jio::number_list(t.at("values"), w + ".values");
    } else if (tt == "harmonic") {
      jio::check_fields(t, w, {"type", "offset"});
      tail.kind = Sequence::TailKind::harmonic;
      tail.offset = jio::number(t.at("offset"), w + ".offset");
    } else if (tt == "geometric") {
      jio::check_fields(t, w, {"type", "first", "ratio"});
      tail.kind = Sequence::TailKind::geometric;
      tail.first = jio::number(t.at("first"), w + ".first");
      tail.ratio = jio::number(t.at("ratio"), w + ".ratio");
    } else {
      throw spec_error(w + ": unknown tail type \"" + tt + "\"");
    }
    return tail;
  };
  if (type == "list") {
    jio::check_fields(j, where, {"type", "values"}, {"tail"});
    auto values = jio::number_list(j.at("values"), where + ".values");
    Sequence::Tail tail;  // zero tail unless stated
    if (j.contains("tail")) tail = tail_of(j.at("tail"), where + ".tail");
    return Sequence(std::move(values), tail);
  }
  if (type == "periodic" || type == "constant" || type == "harmonic" ||
      type == "geometric")
    return Sequence({}, tail_of(j, where));
  throw spec_error(where + ": unknown sequence type \"" + type + "\"");
}

struct KernelSpec {
  KernelPtr kernel;
  json echo;      // the parsed document, echoed into reports
  json analysis;  // optional per-spec analysis defaults
};

inline KernelSpec parse_kernel_spec(const json& doc) {
  jio::check_fields(doc, "spec", {"kernel", "params"}, {"analysis"});
  if (!doc.at("kernel").is_string())
    throw spec_error("spec.kernel: expected a string");
  const std::string kind = doc.at("kernel").get<std::string>();
  const json& p = doc.at("params");
  KernelSpec out;
  out.echo = doc;
  out.analysis = doc.contains("analysis") ? doc.at("analysis") : json::object();
  if (kind == "comb") {
    jio::check_fields(p, "params", {"q", "q_inf"});
    out.kernel = std::make_shared<CombKernel>(
        parse_sequence(p.at("q"), "params.q"),
        jio::number(p.at("q_inf"), "params.q_inf"));
  } else if (kind == "long_memory") {
    jio::check_fields(p, "params", {"eps", "q_family"});
    const json& fam = p.at("q_family");
    jio::require_object(fam, "params.q_family");
    if (!fam.contains("type") || !fam.at("type").is_string())
      throw spec_error("params.q_family: needs a string \"type\"");
    const std::string ft = fam.at("type").get<std::string>();
    const double eps = jio::number(p.at("eps"), "params.eps");
    if (ft == "geometric") {
      jio::check_fields(fam, "params.q_family", {"type", "alpha"});
      out.kernel = std::make_shared<LongMemoryKernel>(
          eps, LongMemoryKernel::GeometricFamily{
                   jio::number(fam.at("alpha"), "params.q_family.alpha")});
    } else if (ft == "table") {
      jio::check_fields(fam, "params.q_family", {"type", "rows"});
      if (!fam.at("rows").is_array())
        throw spec_error("params.q_family.rows: expected an array of rows");
      LongMemoryKernel::TableFamily tf;
      for (const auto& row : fam.at("rows"))
        tf.rows.push_back(jio::number_list(row, "params.q_family.rows[]"));
      out.kernel = std::make_shared<LongMemoryKernel>(eps, std::move(tf));
    } else {
      throw spec_error("params.q_family: unknown type \"" + ft + "\"");
    }
  } else if (kind == "three_letter") {
    jio::check_fields(p, "params", {"N0", "N1", "N2", "theta"});
    auto index_set = [&](const json& j, const std::string& w) {
      if (!j.is_array()) throw spec_error(w + ": expected an array of integers");
      std::set<std::size_t> s;
      for (const auto& v : j) {
        if (!v.is_number_unsigned())
          throw spec_error(w + ": entries must be nonnegative integers");
        s.insert(v.get<std::size_t>());
      }
      return s;
    };
    out.kernel = std::make_shared<ThreeLetterKernel>(
        index_set(p.at("N0"), "params.N0"), index_set(p.at("N1"), "params.N1"),
        index_set(p.at("N2"), "params.N2"),
        parse_sequence(p.at("theta"), "params.theta"));
  } else if (kind == "markov") {
    jio::check_fields(p, "params", {"alphabet", "order", "transitions"});
    std::string labels;
    if (p.at("alphabet").is_string()) {
      labels = p.at("alphabet").get<std::string>();
    } else if (p.at("alphabet").is_array()) {
      for (const auto& s : p.at("alphabet")) {
        if (!s.is_string() || s.get<std::string>().size() != 1)
          throw spec_error("params.alphabet: labels must be single characters");
        labels += s.get<std::string>();
      }
    } else {
      throw spec_error("params.alphabet: expected a string or array");
    }
    if (!p.at("order").is_number_unsigned())
      throw spec_error("params.order: expected a nonnegative integer");
    const auto order = p.at("order").get<std::size_t>();
    jio::require_object(p.at("transitions"), "params.transitions");
    std::map<std::string, std::vector<double>> rows;
    for (auto it = p.at("transitions").begin(); it != p.at("transitions").end(); ++it)
      rows[it.key()] =
          jio::number_list(it.value(), "params.transitions." + it.key());
    out.kernel = std::make_shared<MarkovKernel>(Alphabet(labels), order,
                                                std::move(rows));
  } else {
    throw spec_error("spec.kernel: unknown kernel \"" + kind + "\"");
  }
  return out;
}

// ---- exports ---------------------------------------------------------

inline json tree_to_json(const DiscontinuityTree& tree) {
  json levels = json::array();
  for (std::size_t n = 1; n <= tree.depth(); ++n) {
    json lvl = json::array();
    for (const Word& w : tree.level(n)) lvl.push_back(w.str());
    levels.push_back(std::move(lvl));
  }
  return json{{"depth", tree.depth()}, {"levels", std::move(levels)}};
}

inline json growth_to_json(const GrowthRate& g) {
  return json{{"per_level", g.per_level},
              {"estimate", g.estimate},
              {"empty_set", g.empty_set}};
}

inline json pressure_to_json(const PressureCurve& c) {
  json per_n = json::array();
  for (const auto& p : c.per_n)
    per_n.push_back(json{{"n", p.n},
                         {"upper", jio::finite_or_null(p.upper)},
                         {"lower", jio::finite_or_null(p.lower)}});
  return json{{"per_n", std::move(per_n)},
              {"verdict", c.verdict()},
              {"empty_set", c.empty_set}};
}

inline std::string pressure_to_csv(const PressureCurve& c) {
  std::string out = "n,upper,lower\n";
  char buf[96];
  for (const auto& p : c.per_n) {
    auto cell = [&](double v) -> std::string {
      if (!std::isfinite(v)) return v < 0 ? "-inf" : "inf";
      std::snprintf(buf, sizeof buf, "%.15g", v);
      return buf;
    };
    out += std::to_string(p.n) + "," + cell(p.upper) + "," + cell(p.lower) + "\n";
  }
  return out;
}

inline json skeleton_to_json(const Skeleton& sk) {
  json leaves = json::array();
  for (const Word& v : sk.finite_leaves) leaves.push_back(v.str());
  return json{{"finite_leaves", std::move(leaves)}};
}

inline json h3_to_json(const H3Result& h3) {
  json j{{"holds_to_depth", h3.holds_to_depth}};
  j["witness"] = h3.witness ? json(h3.witness->str()) : json(nullptr);
  return j;
}

inline json stationary_to_json(const StationaryEstimate& est,
                               const Alphabet& alphabet, std::size_t max_len) {
  const auto* renewal = dynamic_cast<const RenewalOracle*>(&est);
  json cyl;
  if (renewal && !renewal->summable()) {
    cyl = nullptr;  // the flag is the answer; there is nothing to tabulate
  } else {
    cyl = json::object();
    for (std::size_t n = 1; n <= max_len; ++n)
      for (const Word& w : all_words(alphabet, n))
        cyl[w.str()] = jio::sig15(est.prob(w));
  }
  json j{{"source", est.source()}, {"cylinders", std::move(cyl)}};
  if (const auto* m = dynamic_cast<const MarkovApprox*>(&est)) {
    j["order"] = m->order();
    j["power_iterations"] = m->iterations();
    j["fixed_point_residual"] = m->residual();
    j["max_interval_width"] = m->max_interval_width();
    j["shift_consistency_residual"] = m->shift_consistency_residual();
    if (m->reducible()) j["reducibility_warning"] = true;
  }
  if (renewal) {
    j["summable"] = renewal->summable();
    j["no_gmeasure"] = renewal->no_gmeasure();
    j["note"] = renewal->note();
    if (renewal->summable())
      j["normalization"] = jio::sig15(renewal->normalization());
    json w = json::array();
    for (double x : renewal->weights()) w.push_back(jio::sig15(x));
    j["weights"] = std::move(w);
  }
  return j;
}

inline std::string stationary_to_csv(const StationaryEstimate& est,
                                     const Alphabet& alphabet,
                                     std::size_t max_len) {
  std::string out = "cylinder,probability\n";
  char buf[64];
  for (std::size_t n = 1; n <= max_len; ++n)
    for (const Word& w : all_words(alphabet, n)) {
      std::snprintf(buf, sizeof buf, "%.15g", est.prob(w));
      out += w.str() + "," + buf + "\n";
    }
  return out;
}

inline json mass_to_json(const std::vector<DiscontinuityMassPoint>& pts) {
  json arr = json::array();
  for (const auto& p : pts)
    arr.push_back(json{{"n", p.n},
                       {"mass", jio::sig15(p.mass)},
                       {"ceiling", jio::sig15(p.ceiling)}});
  return arr;
}

inline std::string mass_to_csv(const std::vector<DiscontinuityMassPoint>& pts) {
  std::string out = "n,mass,ceiling\n";
  char buf[96];
  for (const auto& p : pts) {
    std::snprintf(buf, sizeof buf, "%zu,%.15g,%.15g", p.n, p.mass, p.ceiling);
    out += buf;
    out += "\n";
  }
  return out;
}

inline json h4_to_json(const H4Result& h4) {
  return json{{"partial_sum", h4.partial_sum},
              {"increment_by_size", h4.increment_by_size},
              {"tails_closed", h4.tails_closed},
              {"fitted_ratio",
               h4.fitted_ratio ? json(*h4.fitted_ratio) : json(nullptr)},
              {"verdict", h4.verdict},
              {"leaf_count", h4.leaf_count}};
}

inline json jo_to_json(const JoCriterionResult& r) {
  return json{{"total", r.total},
              {"d_part", r.d_part},
              {"leaf_part", r.leaf_part},
              {"d_part_ceiling", r.d_part_ceiling},
              {"tails_closed", r.tails_closed}};
}

inline json decay_to_json(const DecayDiagnostic& d) {
  return json{
      {"points", mass_to_json(d.points)},
      {"slope", d.slope ? json(*d.slope) : json(nullptr)},
      {"slope_tail", d.slope_tail ? json(*d.slope_tail) : json(nullptr)},
      {"slow_decay", d.slow_decay}};
}

/// Full hypothesis report: H1/H1', the pressure verdict for H2, the growth
/// threshold comparison H2', the shift-stability shadow H3, the corollary
/// routing, and H4 when an estimate is supplied.
inline json hypotheses_report(const Kernel& kernel, std::size_t depth,
                              std::size_t pressure_depth,
                              const StationaryEstimate* est = nullptr,
                              std::size_t depth_budget = kDefaultDepthBudget) {
  if (depth < 2) throw spec_error("hypotheses need depth >= 2");
  const DiscontinuityTree tree = build_tree(kernel, depth);
  const GrowthRate gr = growth_rate(tree);
  const std::size_t n_max = std::min(pressure_depth, depth);
  const PressureCurve curve = pressure_curve(kernel, tree, n_max);
  const H1Result h1 = check_H1(kernel, tree, depth - 1);
  const double eps_prime = strong_nonnullness(kernel);
  const H3Result h3 = check_H3(tree);
  const CorollaryResult cor = check_corollary(kernel, tree, h1);

  json j;
  j["H1"] = json{{"holds", h1.found},
                 {"N", h1.N},
                 {"eps", h1.eps},
                 {"eps_by_N", h1.eps_by_N}};
  j["H1_prime"] = json{{"holds", eps_prime > 0.0}, {"eps", eps_prime}};
  j["H2"] = json{{"verdict", curve.verdict()}, {"curve", pressure_to_json(curve)}};
  j["H2_prime"] = json{{"holds", h1.found && cor.gr < cor.threshold},
                       {"gr", cor.gr},
                       {"threshold", jio::finite_or_null(cor.threshold)}};
  j["H3"] = h3_to_json(h3);
  j["corollary"] = json{{"route", cor.route},
                        {"holds", cor.holds},
                        {"gr", cor.gr},
                        {"threshold", jio::finite_or_null(cor.threshold)},
                        {"eps", cor.eps},
                        {"N", cor.N}};
  j["growth"] = growth_to_json(gr);
  if (est) {
    const Skeleton sk = skeleton_leaves(tree);
    const std::size_t h4_depth = std::min(depth, est->max_len());
    j["H4"] = h4_to_json(check_H4(kernel, sk, *est, h4_depth, depth_budget));
  }
  return j;
}

/// Report envelope carrying the resolved configuration and tool version, so
/// a report file reproduces itself.
inline json report_envelope(const json& kernel_echo, const json& config,
                            json results) {
  return json{{"tool", "gmeasure"},
              {"version", kVersion},
              {"kernel_spec", kernel_echo},
              {"config", config},
              {"results", std::move(results)}};
}

}  // namespace gmeasure

#endif  // GMEASURE_JSON_IO_HPP
