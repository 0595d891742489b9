// Command-line front end: generate, tune, train, eval, parse, significance, table.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "zsp/builtin_domains.hpp"
#include "zsp/errors.hpp"
#include "zsp/evaluation.hpp"
#include "zsp/generator.hpp"
#include "zsp/io.hpp"
#include "zsp/parser.hpp"

namespace {

using namespace zsp;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

/// Flags shared by the experiment commands; unset ones fall back to the config file.
struct CommonFlags {
  std::string config;
  std::string out;
  std::string dataset;
  std::string target;
  std::string algorithm;
  std::optional<std::uint64_t> seed;
  bool no_new_features = false;
  bool no_logic_filter = false;
  bool in_domain = false;
  bool serial = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "run configuration (JSON)");
  cmd->add_option("--out", f.out, "output file");
  cmd->add_option("--dataset", f.dataset, "dataset file; overrides the config");
  cmd->add_option("--target-domain", f.target, "held-out (or in-domain) target domain");
  cmd->add_option("--algorithm", f.algorithm, "gmdp or adagrad");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_flag("--no-new-features", f.no_new_features, "drop description-phrase and size features");
  cmd->add_flag("--no-logic-filter", f.no_logic_filter, "keep candidates the application logic rejects");
  cmd->add_flag("--in-domain", f.in_domain, "train and tune on the target's own train split");
  cmd->add_flag("--serial", f.serial, "score examples on one thread");
}

RunConfig resolve_config(const CommonFlags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  if (!f.dataset.empty()) c.dataset = f.dataset;
  if (!f.target.empty()) c.target = f.target;
  if (!f.algorithm.empty()) {
    try {
      c.algorithm = parse_algorithm(f.algorithm);
    } catch (const std::invalid_argument&) {
      throw ConfigError("--algorithm must be 'gmdp' or 'adagrad'");
    }
  }
  if (f.seed) c.seed = *f.seed;
  if (f.no_new_features) c.new_features = false;
  if (f.no_logic_filter) c.logic_filter = false;
  if (f.in_domain) c.in_domain = true;
  if (f.serial) c.parallel = false;
  return c;
}

void require_experiment(const RunConfig& c) {
  if (c.dataset.empty()) throw ConfigError("no dataset given (config field 'dataset' or --dataset)");
  if (c.target.empty()) throw ConfigError("no target domain given (config field 'target_domain' or --target-domain)");
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(path, text);
  }
}

void print_accesses(const AccessLog& log, const std::string& target, bool in_domain) {
  if (in_domain) return;
  std::cerr << "target-domain accesses: tuning " << log.count(Phase::Tuning, target) << ", training "
            << log.count(Phase::Training, target) << ", testing " << log.count(Phase::Testing, target) << "\n";
}

// ---------------------------------------------------------------------------

struct GenerateFlags {
  std::string config;
  std::string domain;
  std::string out;
  int count = 10;
  std::optional<std::uint64_t> seed;
  std::optional<double> test_fraction;
};

int cmd_generate(const GenerateFlags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  std::uint64_t seed = f.seed.value_or(c.seed);
  double test_fraction = f.test_fraction.value_or(c.test_fraction);
  if (test_fraction < 0 || test_fraction > 1) throw ConfigError("--test-fraction must lie in [0, 1]");
  if (f.count < 0) throw ConfigError("--count must be >= 0");
  if (f.out.empty()) throw ConfigError("--out is required");
  DomainRegistry registry = builtin_registry();
  DomainPtr domain = registry.find(f.domain);
  if (!domain) throw ConfigError("unregistered domain '" + f.domain + "'");

  PairGenerationOptions options;
  if (auto it = c.generation.find(f.domain); it != c.generation.end()) options.ranges = it->second;
  Rng rng(seed);
  std::vector<DatasetRecord> records;
  std::vector<std::pair<std::string, MethodCall>> gold;
  const int train = static_cast<int>(std::lround(f.count * (1.0 - test_fraction)));
  for (const auto& m : domain->methods()) {
    for (int i = 0; i < f.count; ++i) {
      StatePair p = generate_state_pair(*domain, m, rng, options);
      DatasetRecord r;
      r.example = Example{f.domain + "-" + m.name + "-" + std::to_string(i), f.domain, p.initial, "", p.desired};
      r.split = i < train ? "train" : "test";
      gold.emplace_back(r.example.id, p.call);
      records.push_back(std::move(r));
    }
  }
  std::ostringstream data, sidecar;
  write_dataset(data, records);
  write_gold_calls(sidecar, gold);
  write_file_atomic(f.out, data.str());
  write_file_atomic(f.out + ".gold", sidecar.str());
  std::cerr << "wrote " << records.size() << " records to " << f.out << "\n";
  return 0;
}

int cmd_tune(const CommonFlags& f) {
  RunConfig c = resolve_config(f);
  require_experiment(c);
  DomainRegistry registry = builtin_registry();
  Dataset data = load_dataset(c.dataset, &registry);
  AccessLog log;
  TuningOutcome t = tune_experiment(experiment_spec(c), data, registry, &log);
  Json j = {{"selected", train_config_to_json(t.result.best)},
            {"selected_index", t.result.best_index},
            {"mean_accuracy", t.result.mean_accuracy},
            {"training_domains", t.training_domains}};
  write_output(f.out, j.dump(2) + "\n");
  print_accesses(log, c.target, c.in_domain);
  return 0;
}

int cmd_train(const CommonFlags& f, const std::string& tuned_path) {
  RunConfig c = resolve_config(f);
  require_experiment(c);
  if (f.out.empty()) throw ConfigError("--out is required");
  DomainRegistry registry = builtin_registry();
  Dataset data = load_dataset(c.dataset, &registry);
  ExperimentSpec spec = experiment_spec(c);
  AccessLog log;
  TrainConfig config;
  if (!tuned_path.empty()) {
    Json j = Json::parse(read_file(tuned_path));
    config = train_config_from_json(j.contains("selected") ? j["selected"] : j);
  } else {
    config = tune_experiment(spec, data, registry, &log).result.best;
  }
  TrainedModel t = train_experiment(spec, data, registry, config, &log);
  ModelFile m;
  m.model = experiment_model(spec, t.weights);
  m.algorithm = c.in_domain ? Algorithm::AdaGrad : c.algorithm;
  m.config = t.config;
  m.partition = t.partition;
  m.training_domains = t.training_domains;
  save_model(f.out, m);
  std::cerr << "wrote model with " << t.weights.size() << " non-zero weights to " << f.out << "\n";
  print_accesses(log, c.target, c.in_domain);
  return 0;
}

int cmd_eval(const CommonFlags& f, const std::string& model_path) {
  RunConfig c = resolve_config(f);
  require_experiment(c);
  DomainRegistry registry = builtin_registry();
  Dataset data = load_dataset(c.dataset, &registry);
  ExperimentSpec spec = experiment_spec(c);
  AccessLog log;
  ExperimentReport report;
  if (!model_path.empty()) {
    ModelFile m = load_model(model_path);
    for (const auto& d : m.training_domains) {
      if (d == c.target && !c.in_domain) std::cerr << "warning: the model was trained on the target domain\n";
    }
    spec.use_new_features = m.model.features.new_features;
    spec.use_logic_filter = m.model.use_filter;
    spec.parser = m.model.parser;
    spec.algorithm = m.algorithm;
    report.spec = spec;
    report.tuned = m.config;
    report.partition = m.partition;
    report.training_domains = m.training_domains;
    report.weights = m.model.weights;
    report.scores = test_experiment(spec, data, registry, m.model, &log);
    if (auto mc = mean_credit(report.scores)) report.accuracy = *mc * 100.0;
  } else {
    report = run_experiment(spec, data, registry, &log);
  }
  write_output(f.out, report_to_json(report, &log).dump(2) + "\n");
  std::cerr << "accuracy on " << c.target << ": "
            << (report.accuracy ? std::to_string(*report.accuracy) : std::string("no test data")) << "\n";
  print_accesses(log, c.target, c.in_domain);
  return 0;
}

struct ParseFlags {
  std::string model;
  std::string domain;
  std::string state;
  std::string utterance;
  int nbest = 5;
  bool explain = false;
  bool no_logic_filter = false;
};

int cmd_parse(const ParseFlags& f) {
  DomainRegistry registry = builtin_registry();
  DomainPtr domain = registry.find(f.domain);
  if (!domain) throw ConfigError("unregistered domain '" + f.domain + "'");
  Model model;
  if (!f.model.empty()) model = load_model(f.model).model;
  if (f.no_logic_filter) model.use_filter = false;
  State state = state_from_json(Json::parse(read_file(f.state)), f.domain);
  MatchLexicon lexicon = build_lexicon(*domain);
  ParseRequest req = make_request(*domain, lexicon, state, f.utterance, model.features);
  InvocationCache cache;
  Prediction p = predict(req, model.parser, model.weights, PredictOptions{model.use_filter}, &cache);
  std::vector<Derivation> ranked = p.considered;
  std::stable_sort(ranked.begin(), ranked.end(), [](const Derivation& a, const Derivation& b) {
    if (a.score() != b.score()) return a.score() > b.score();
    return a.to_string() < b.to_string();
  });
  std::cout << "tokens:";
  for (const auto& t : req.tokens) std::cout << " " << t;
  std::cout << "\ncandidates: " << p.candidates.roots.size() << ", considered: " << p.considered.size()
            << ", tied at the top: " << p.best.size() << "\n";
  const int n = std::min<int>(f.nbest, static_cast<int>(ranked.size()));
  for (int i = 0; i < n; ++i) {
    const Derivation& d = ranked[static_cast<std::size_t>(i)];
    const Invocation& inv = cache.invoke(*domain, state, d.call());
    std::cout << i + 1 << ". " << std::fixed << std::setprecision(4) << d.score() << "  " << d.to_string();
    if (!inv.result) {
      std::cout << "  [exception: " << inv.error << "]";
    } else if (!inv.changed) {
      std::cout << "  [no change]";
    }
    std::cout << "\n";
    if (f.explain) {
      for (const auto& [name, v] : d.features()) {
        auto it = model.weights.find(name);
        double w = it == model.weights.end() ? 0.0 : it->second;
        std::cout << "     " << std::setw(9) << w * v << "  " << name << " = " << v << " x " << w << "\n";
      }
    }
  }
  if (p.parse_failed()) std::cout << "parse failure\n";
  return 0;
}

struct SignificanceFlags {
  std::string a;
  std::string b;
  std::string out;
  int iterations = 10000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
};

int cmd_significance(const SignificanceFlags& f) {
  auto load = [](const std::string& path) {
    try {
      return scores_from_report(Json::parse(read_file(path)));
    } catch (const Json::exception& e) {
      throw DataError(path + ": " + e.what());
    }
  };
  BootstrapResult r;
  try {
    r = paired_bootstrap(load(f.a), load(f.b), f.iterations, f.alpha, f.seed);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  std::ostringstream s;
  s << "mean A " << r.mean_a << ", mean B " << r.mean_b << ", p = " << r.p_value << ": "
    << (r.significant ? "significant" : "not significant") << " at alpha " << f.alpha << "\n";
  std::cout << s.str();
  if (!f.out.empty()) {
    Json j = {{"mean_a", r.mean_a}, {"mean_b", r.mean_b}, {"p_value", r.p_value}, {"significant", r.significant}};
    write_file_atomic(f.out, j.dump(2) + "\n");
  }
  return 0;
}

/// Variant name of a report, e.g. "GMDP-FA".
std::string variant_name(const Json& r) {
  std::string name = r.value("algorithm", std::string("gmdp")) == "adagrad" ? "AdaGrad" : "GMDP";
  std::string suffix;
  if (!r.value("new_features", true)) suffix += "F";
  if (!r.value("logic_filter", true)) suffix += "A";
  return suffix.empty() ? name : name + "-" + suffix;
}

int cmd_table(const std::vector<std::string>& reports, const std::string& baseline_variant,
              const std::string& out) {
  struct Loaded {
    std::string variant;
    std::string domain;
    bool in_domain;
    std::optional<double> accuracy;
    std::vector<ExampleScore> scores;
  };
  std::vector<Loaded> loaded;
  std::vector<std::string> domains;
  for (const auto& path : reports) {
    Json j;
    try {
      j = Json::parse(read_file(path));
      Loaded l{variant_name(j), j.at("target_domain").get<std::string>(), j.value("in_domain", false),
               j.at("accuracy").is_null() ? std::nullopt : std::optional<double>(j["accuracy"].get<double>()),
               scores_from_report(j)};
      if (std::find(domains.begin(), domains.end(), l.domain) == domains.end()) domains.push_back(l.domain);
      loaded.push_back(std::move(l));
    } catch (const Json::exception& e) {
      throw DataError(path + ": " + e.what());
    }
  }
  std::sort(domains.begin(), domains.end());
  AblationTable table;
  for (const auto& l : loaded) {
    TableCell& cell = table[l.variant][l.domain];
    (l.in_domain ? cell.in_domain : cell.zero_shot) = l.accuracy;
  }
  // Stars mark zero-shot cells significantly better than the baseline variant.
  for (const auto& l : loaded) {
    if (l.in_domain || l.variant == baseline_variant) continue;
    for (const auto& base : loaded) {
      if (base.in_domain || base.variant != baseline_variant || base.domain != l.domain) continue;
      try {
        table[l.variant][l.domain].significant = paired_bootstrap(l.scores, base.scores).significant;
      } catch (const std::invalid_argument&) {
      }
    }
  }
  write_output(out, format_ablation_table(table, domains));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zero-shot semantic parsing over simulated applications"};
  app.require_subcommand(1);

  GenerateFlags gen;
  auto* generate = app.add_subcommand("generate", "draw random (initial, desired) state pairs for a domain");
  generate->add_option("--config", gen.config, "run configuration (generation ranges, seed)");
  generate->add_option("--domain,--target-domain", gen.domain, "domain id")->required();
  generate->add_option("--count", gen.count, "records per interface method");
  generate->add_option("--seed", gen.seed, "random seed");
  generate->add_option("--test-fraction", gen.test_fraction, "share of each method's records in the test split");
  generate->add_option("--out", gen.out, "dataset file; gold calls go to <out>.gold");

  CommonFlags tune_flags, train_flags, eval_flags;
  auto* tune = app.add_subcommand("tune", "select hyper-parameters and write the chosen configuration");
  add_common(tune, tune_flags);
  std::string tuned_path;
  auto* train = app.add_subcommand("train", "tune (unless --tuned is given), train and write a model");
  add_common(train, train_flags);
  train->add_option("--tuned", tuned_path, "configuration written by 'tune'");
  std::string model_path;
  auto* eval = app.add_subcommand("eval", "score the target's test split and write a report");
  add_common(eval, eval_flags);
  eval->add_option("--model", model_path, "evaluate this model instead of running the full protocol");

  ParseFlags parse_flags;
  auto* parse = app.add_subcommand("parse", "print the n-best derivations of one utterance");
  parse->add_option("--model", parse_flags.model, "model or weights file (zero weights when omitted)");
  parse->add_option("--domain", parse_flags.domain, "domain id")->required();
  parse->add_option("--state", parse_flags.state, "state file {entities, triples}")->required();
  parse->add_option("--utterance", parse_flags.utterance, "instruction text")->required();
  parse->add_option("--nbest", parse_flags.nbest, "derivations to print");
  parse->add_flag("--explain", parse_flags.explain, "print the features of each derivation");
  parse->add_flag("--no-logic-filter", parse_flags.no_logic_filter, "do not filter with the application logic");

  SignificanceFlags sig;
  auto* significance = app.add_subcommand("significance", "paired bootstrap test of report A over report B");
  significance->add_option("--a", sig.a, "report A")->required();
  significance->add_option("--b", sig.b, "report B")->required();
  significance->add_option("--iterations", sig.iterations, "bootstrap resamples");
  significance->add_option("--alpha", sig.alpha, "significance level");
  significance->add_option("--seed", sig.seed, "resampling seed");
  significance->add_option("--out", sig.out, "result file");

  std::vector<std::string> table_reports;
  std::string table_out;
  std::string baseline = "AdaGrad-FA";
  auto* table = app.add_subcommand("table", "ablation table from eval reports");
  table->add_option("reports", table_reports, "report files")->required();
  table->add_option("--baseline", baseline, "variant the significance stars compare against");
  table->add_option("--out", table_out, "output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*generate) return cmd_generate(gen);
    if (*tune) return cmd_tune(tune_flags);
    if (*train) return cmd_train(train_flags, tuned_path);
    if (*eval) return cmd_eval(eval_flags, model_path);
    if (*parse) return cmd_parse(parse_flags);
    if (*significance) return cmd_significance(sig);
    if (*table) return cmd_table(table_reports, baseline, table_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const Json::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
