// gmeasure: analysis front end for discontinuous probability kernels.
//
// Subcommands: tree, pressure, hypotheses, stationary, simulate, report.
// Exit codes: 0 success, 2 spec/input error, 3 resource budget exceeded,
// 4 diagnostic failure (non-convergence, missing stationary law, ...).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gmeasure/gmeasure.hpp"

namespace {

using gmeasure::json;

struct Options {
  std::string spec_path;
  std::string out_path;
  std::string format = "json";
  std::size_t depth = 8;
  std::size_t order = 8;
  std::uint64_t seed = 1;
  std::size_t length = 100000;
  std::size_t burn_in = 1000;
  std::string init = "stationary";
  std::size_t truncation_depth = 32;
  std::size_t max_word_len = 6;
  std::size_t budget_states = gmeasure::kDefaultStateBudget;
  std::size_t budget_depth = gmeasure::kDefaultDepthBudget;
  std::string source = "markov";
  std::string path_out;

  // which values the user pinned on the command line (those win over the
  // spec file's analysis block)
  bool depth_set = false, order_set = false, seed_set = false,
       length_set = false, burn_in_set = false, init_set = false,
       trunc_set = false, format_set = false;
};

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gmeasure::spec_error("cannot open spec file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw gmeasure::spec_error("malformed JSON in " + path + ": " + e.what());
  }
}

void merge_analysis_defaults(Options& o, const json& analysis) {
  if (analysis.is_null() || analysis.empty()) return;
  gmeasure::jio::check_fields(
      analysis, "analysis", {},
      {"depth", "order", "seed", "length", "burn_in", "init",
       "truncation_depth", "format"});
  auto take_size = [&](const char* key, std::size_t& dst, bool pinned) {
    if (!pinned && analysis.contains(key)) {
      if (!analysis.at(key).is_number_unsigned())
        throw gmeasure::spec_error(std::string("analysis.") + key +
                                   ": expected a nonnegative integer");
      dst = analysis.at(key).get<std::size_t>();
    }
  };
  take_size("depth", o.depth, o.depth_set);
  take_size("order", o.order, o.order_set);
  take_size("length", o.length, o.length_set);
  take_size("burn_in", o.burn_in, o.burn_in_set);
  take_size("truncation_depth", o.truncation_depth, o.trunc_set);
  if (!o.seed_set && analysis.contains("seed")) {
    if (!analysis.at("seed").is_number_unsigned())
      throw gmeasure::spec_error("analysis.seed: expected a nonnegative integer");
    o.seed = analysis.at("seed").get<std::uint64_t>();
  }
  auto take_string = [&](const char* key, std::string& dst, bool pinned) {
    if (!pinned && analysis.contains(key)) {
      if (!analysis.at(key).is_string())
        throw gmeasure::spec_error(std::string("analysis.") + key +
                                   ": expected a string");
      dst = analysis.at(key).get<std::string>();
    }
  };
  take_string("init", o.init, o.init_set);
  take_string("format", o.format, o.format_set);
}

json resolved_config(const Options& o, const std::string& command) {
  return json{{"command", command},
              {"spec", o.spec_path},
              {"depth", o.depth},
              {"order", o.order},
              {"seed", o.seed},
              {"length", o.length},
              {"burn_in", o.burn_in},
              {"init", o.init},
              {"truncation_depth", o.truncation_depth},
              {"max_word_len", o.max_word_len},
              {"budget_states", o.budget_states},
              {"budget_depth", o.budget_depth},
              {"format", o.format},
              {"generator", gmeasure::kGeneratorId}};
}

void emit(const Options& o, const std::string& payload) {
  if (o.out_path.empty()) {
    std::cout << payload;
    if (!payload.empty() && payload.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(o.out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw gmeasure::spec_error("cannot write output file: " + o.out_path);
  out << payload;
}

gmeasure::SimConfig sim_config(const gmeasure::Kernel& kernel,
                               const Options& o) {
  gmeasure::SimConfig cfg;
  cfg.seed = o.seed;
  cfg.burn_in = o.burn_in;
  cfg.length = o.length;
  cfg.truncation_depth = o.truncation_depth;
  if (o.init == "stationary") {
    const auto* comb = dynamic_cast<const gmeasure::CombKernel*>(&kernel);
    const bool exact =
        comb && gmeasure::RenewalOracle(*comb, 2).summable();
    if (exact) cfg.stationary_init = true;
    else if (o.init_set)
      throw gmeasure::spec_error(
          "exact stationary initialization is only available for summable "
          "comb kernels; pass an init word instead");
    // default init quietly falls back to a fill-padded empty word
  } else {
    cfg.init = gmeasure::Word(o.init);
  }
  return cfg;
}

struct SimulationRun {
  json results;
  std::string decay_csv;
};

SimulationRun run_simulation(const gmeasure::Kernel& kernel, const Options& o) {
  const gmeasure::SimConfig cfg = sim_config(kernel, o);
  const gmeasure::SamplePath path = gmeasure::sample_path(kernel, cfg);
  auto empirical = gmeasure::empirical_cylinders(kernel, path, o.max_word_len);
  const auto tree = gmeasure::build_tree(kernel, std::max<std::size_t>(o.depth, 2));
  const auto decay = gmeasure::decay_diagnostic(
      kernel, tree, path, std::min(o.max_word_len, tree.depth()));
  SimulationRun run;
  run.results["generator"] = path.generator;
  run.results["stationary_init"] = cfg.stationary_init;
  run.results["nondegenerate_draws"] = path.nondegenerate_draws;
  run.results["cylinders"] = gmeasure::stationary_to_json(
      *empirical, kernel.alphabet(), o.max_word_len)["cylinders"];
  run.results["decay"] = gmeasure::decay_to_json(decay);
  run.decay_csv = gmeasure::mass_to_csv(decay.points);
  if (!o.path_out.empty()) {
    std::ofstream pf(o.path_out, std::ios::binary | std::ios::trunc);
    if (!pf)
      throw gmeasure::spec_error("cannot write path file: " + o.path_out);
    pf << path.symbols << '\n';
  }
  return run;
}

std::shared_ptr<const gmeasure::StationaryEstimate> make_estimate(
    const gmeasure::KernelSpec& spec, const Options& o) {
  if (o.source == "renewal") {
    const auto* comb =
        dynamic_cast<const gmeasure::CombKernel*>(spec.kernel.get());
    if (!comb)
      throw gmeasure::spec_error(
          "the renewal source applies to comb kernels only");
    return gmeasure::renewal_oracle(*comb);
  }
  if (o.source != "markov")
    throw gmeasure::spec_error("unknown stationary source: " + o.source);
  return gmeasure::build_markov_approx(*spec.kernel, o.order, o.budget_states);
}

int run(const std::string& command, Options& o) {
  const json doc = load_json_file(o.spec_path);
  gmeasure::KernelSpec spec = gmeasure::parse_kernel_spec(doc);
  merge_analysis_defaults(o, spec.analysis);
  const gmeasure::Kernel& kernel = *spec.kernel;
  const json config = resolved_config(o, command);

  if (command == "tree") {
    const auto tree = gmeasure::build_tree(kernel, o.depth);
    if (o.format == "csv") {
      std::string csv = "n,word\n";
      for (std::size_t n = 1; n <= tree.depth(); ++n)
        for (const auto& w : tree.level(n))
          csv += std::to_string(n) + "," + w.str() + "\n";
      emit(o, csv);
    } else {
      emit(o, gmeasure::report_envelope(spec.echo, config,
                                        gmeasure::tree_to_json(tree))
                  .dump(2));
    }
    return 0;
  }
  if (command == "pressure") {
    const auto tree = gmeasure::build_tree(kernel, o.depth);
    const auto curve = gmeasure::pressure_curve(kernel, tree, o.depth);
    if (o.format == "csv") emit(o, gmeasure::pressure_to_csv(curve));
    else
      emit(o, gmeasure::report_envelope(spec.echo, config,
                                        gmeasure::pressure_to_json(curve))
                  .dump(2));
    return 0;
  }
  if (command == "hypotheses") {
    std::shared_ptr<const gmeasure::StationaryEstimate> est;
    if (o.order_set || spec.analysis.contains("order"))
      est = gmeasure::build_markov_approx(kernel, o.order, o.budget_states);
    const json results = gmeasure::hypotheses_report(
        kernel, o.depth, o.depth, est.get(), o.budget_depth);
    if (o.format == "csv")
      throw gmeasure::spec_error("hypotheses reports are JSON only");
    emit(o, gmeasure::report_envelope(spec.echo, config, results).dump(2));
    return 0;
  }
  if (command == "stationary") {
    const auto est = make_estimate(spec, o);
    const std::size_t export_len =
        std::min<std::size_t>(o.depth_set ? o.depth : 4, est->max_len());
    if (o.format == "csv")
      emit(o, gmeasure::stationary_to_csv(*est, kernel.alphabet(), export_len));
    else
      emit(o, gmeasure::report_envelope(
                  spec.echo, config,
                  gmeasure::stationary_to_json(*est, kernel.alphabet(),
                                               export_len))
                  .dump(2));
    return 0;
  }
  if (command == "simulate") {
    const SimulationRun run = run_simulation(kernel, o);
    if (o.format == "csv") emit(o, run.decay_csv);
    else
      emit(o, gmeasure::report_envelope(spec.echo, config, run.results).dump(2));
    return 0;
  }
  if (command == "report") {
    json results;
    const auto tree = gmeasure::build_tree(kernel, o.depth);
    results["tree"] = gmeasure::tree_to_json(tree);
    results["growth"] = gmeasure::growth_to_json(gmeasure::growth_rate(tree));
    auto est = gmeasure::build_markov_approx(kernel, o.order, o.budget_states);
    results["hypotheses"] = gmeasure::hypotheses_report(
        kernel, o.depth, o.depth, est.get(), o.budget_depth);
    results["stationary"] = gmeasure::stationary_to_json(
        *est, kernel.alphabet(), std::min<std::size_t>(4, o.order));
    if (o.depth >= 2 && o.order >= 2) {
      const std::size_t jo_depth = std::min(o.depth, o.order) - 1;
      const auto sk = gmeasure::skeleton_leaves(tree);
      results["square_variation"] = gmeasure::jo_to_json(gmeasure::jo_criterion(
          kernel, tree, sk, *est, jo_depth, o.budget_depth));
    }
    if (const auto* comb = dynamic_cast<const gmeasure::CombKernel*>(&kernel)) {
      const auto oracle = gmeasure::renewal_oracle(*comb);
      results["renewal"] = gmeasure::stationary_to_json(
          *oracle, kernel.alphabet(), std::min<std::size_t>(4, o.order));
      if (oracle->summable()) {
        const std::size_t n_max = std::min(o.depth, est->max_len());
        results["discontinuity_mass"] = gmeasure::mass_to_json(
            gmeasure::discontinuity_mass(kernel, *oracle, tree, n_max));
      }
    }
    results["simulation"] = run_simulation(kernel, o).results;
    emit(o, gmeasure::report_envelope(spec.echo, config, results).dump(2));
    return 0;
  }
  throw gmeasure::spec_error("unknown command: " + command);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"analysis toolkit for kernels with unbounded memory"};
  app.require_subcommand(1);

  Options o;
  std::string command;
  for (const char* name :
       {"tree", "pressure", "hypotheses", "stationary", "simulate", "report"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--spec", o.spec_path, "kernel spec JSON file")->required();
    sub->add_option("--out", o.out_path, "output file (default: stdout)");
    auto* f = sub->add_option("--format", o.format, "json|csv");
    auto* d = sub->add_option("--depth", o.depth, "tree/curve depth");
    auto* k = sub->add_option("--order", o.order, "truncation order");
    auto* s = sub->add_option("--seed", o.seed, "simulation seed");
    auto* l = sub->add_option("--length", o.length, "simulation steps");
    auto* b = sub->add_option("--burn-in", o.burn_in, "discarded steps");
    auto* i = sub->add_option("--init", o.init, "init word or 'stationary'");
    auto* t = sub->add_option("--trunc-depth", o.truncation_depth,
                              "simulation context window");
    sub->add_option("--max-word-len", o.max_word_len,
                    "empirical cylinder length");
    sub->add_option("--budget-states", o.budget_states,
                    "state budget for truncations");
    sub->add_option("--budget-depth", o.budget_depth,
                    "enumeration depth budget");
    sub->add_option("--source", o.source, "stationary source: markov|renewal");
    sub->add_option("--path-out", o.path_out, "raw symbol output file");
    sub->callback([&command, &o, name, f, d, k, s, l, b, i, t] {
      command = name;
      o.format_set = f->count() > 0;
      o.depth_set = d->count() > 0;
      o.order_set = k->count() > 0;
      o.seed_set = s->count() > 0;
      o.length_set = l->count() > 0;
      o.burn_in_set = b->count() > 0;
      o.init_set = i->count() > 0;
      o.trunc_set = t->count() > 0;
    });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    return run(command, o);
  } catch (const gmeasure::spec_error& e) {
    std::cerr << "spec error: " << e.what() << '\n';
    return 2;
  } catch (const gmeasure::resource_error& e) {
    std::cerr << "resource error: " << e.what() << '\n';
    return 3;
  } catch (const gmeasure::diagnostic_error& e) {
    std::cerr << "diagnostic error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
