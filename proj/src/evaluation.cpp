#include "zsp/evaluation.hpp"

#include <cstdio>
#include <exception>
#include <set>
#include <sstream>
#include <stdexcept>

#include "zsp/errors.hpp"

namespace zsp {

ExampleScore credit_prediction(const Prediction& prediction, const Example& example, const Domain& domain) {
  ExampleScore s;
  s.example_id = example.id;
  if (prediction.parse_failed()) {
    s.parse_failed = true;
    return s;
  }
  InvocationCache cache;
  for (const Derivation& d : prediction.best) {
    const Invocation& inv = cache.invoke(domain, example.initial, d.call());
    if (inv.result && states_equal(*inv.result, example.desired)) ++s.correct_in_tie;
  }
  s.tie_count = static_cast<int>(prediction.best.size());
  s.credit = static_cast<double>(s.correct_in_tie) / s.tie_count;
  return s;
}

ExampleScore score_example(const Model& model, const Example& example, const Domain& domain,
                           const MatchLexicon& lexicon) {
  ParseRequest req = make_request(domain, lexicon, example.initial, example.utterance, model.features);
  Prediction p = predict(req, model.parser, model.weights, PredictOptions{model.use_filter});
  return credit_prediction(p, example, domain);
}

namespace {

struct Resolved {
  std::vector<const Domain*> domain;  // per example
  std::map<const Domain*, MatchLexicon> lexicons;
};

Resolved resolve_all(const std::vector<const Example*>& examples, const DomainResolver& resolve) {
  Resolved r;
  std::map<std::string, const Domain*> seen;
  for (const Example* ex : examples) {
    auto it = seen.find(ex->domain);
    if (it == seen.end()) {
      const Domain* d = &resolve(ex->domain);
      it = seen.emplace(ex->domain, d).first;
      r.lexicons.emplace(d, build_lexicon(*d));
    }
    r.domain.push_back(it->second);
  }
  return r;
}

}  // namespace

std::vector<ExampleScore> score_examples_serial(const Model& model, const std::vector<const Example*>& examples,
                                                const DomainResolver& resolve) {
  Resolved r = resolve_all(examples, resolve);
  std::vector<ExampleScore> out;
  out.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Domain& d = *r.domain[i];
    out.push_back(score_example(model, *examples[i], d, r.lexicons.at(&d)));
  }
  return out;
}

std::vector<ExampleScore> score_examples_parallel(const Model& model, const std::vector<const Example*>& examples,
                                                  const DomainResolver& resolve) {
  Resolved r = resolve_all(examples, resolve);
  std::vector<ExampleScore> out(examples.size());
  std::exception_ptr error;
  const auto n = static_cast<long>(examples.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    auto idx = static_cast<std::size_t>(i);
    try {
      const Domain& d = *r.domain[idx];
      out[idx] = score_example(model, *examples[idx], d, r.lexicons.at(&d));
    } catch (...) {
#pragma omp critical(zsp_score_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::optional<double> mean_credit(const std::vector<ExampleScore>& scores) {
  if (scores.empty()) return std::nullopt;
  double s = 0;
  for (const auto& x : scores) s += x.credit;
  return s / static_cast<double>(scores.size());
}

// ---------------------------------------------------------------------------
// Protocol isolation

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::Tuning: return "tuning";
    case Phase::Training: return "training";
    case Phase::Testing: return "testing";
  }
  return "?";
}

void AccessLog::record(Phase phase, const std::string& domain) {
  std::lock_guard lock(mutex_);
  ++counts_[{phase, domain}];
}

std::size_t AccessLog::count(Phase phase, const std::string& domain) const {
  std::lock_guard lock(mutex_);
  auto it = counts_.find({phase, domain});
  return it == counts_.end() ? 0 : it->second;
}

std::size_t AccessLog::total(Phase phase) const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& [k, v] : counts_) {
    if (k.first == phase) n += v;
  }
  return n;
}

const Domain& DomainView::get(const std::string& id) const {
  if (log_) log_->record(phase_, id);
  return registry_->get(id);
}

DomainResolver DomainView::resolver() const {
  return [this](const std::string& id) -> const Domain& { return get(id); };
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

struct Setup {
  const DomainData* target = nullptr;
  std::vector<std::string> training_domains;
  ExamplesByDomain train;  // zero-shot only
  FeatureOptions features;
};

Setup setup(const ExperimentSpec& spec, const Dataset& data) {
  auto it = data.find(spec.target);
  if (it == data.end()) throw DataError("no data for target domain '" + spec.target + "'");
  if (spec.in_domain && spec.algorithm == Algorithm::Gmdp) {
    throw ConfigError("in-domain runs train with adagrad; GMDP needs several source domains");
  }
  Setup s;
  s.target = &it->second;
  s.features.new_features = spec.use_new_features;
  s.features.max_size = spec.parser.max_rule_applications;
  if (spec.in_domain) {
    s.training_domains = {spec.target};
    return s;
  }
  for (const auto& [id, d] : data) {
    if (id == spec.target) continue;
    s.training_domains.push_back(id);
    s.train[id] = d.train;
  }
  if (s.training_domains.size() < 2) throw DataError("zero-shot runs need at least two source domains");
  return s;
}

std::vector<ExampleScore> score_with(const ExperimentSpec& spec, const Model& model,
                                     const std::vector<const Example*>& exs, const DomainResolver& resolve) {
  return spec.parallel ? score_examples_parallel(model, exs, resolve) : score_examples_serial(model, exs, resolve);
}

}  // namespace

Model experiment_model(const ExperimentSpec& spec, WeightVector weights) {
  FeatureOptions fo;
  fo.new_features = spec.use_new_features;
  fo.max_size = spec.parser.max_rule_applications;
  return Model{std::move(weights), spec.parser, fo, spec.use_logic_filter};
}

TuningOutcome tune_experiment(const ExperimentSpec& spec, const Dataset& data, const DomainRegistry& registry,
                              AccessLog* log) {
  Setup s = setup(spec, data);
  DomainView view(registry, log);
  view.set_phase(Phase::Tuning);
  ParserCandidateSource source(view.resolver(), spec.parser, s.features, spec.use_logic_filter);
  HeldOutScorer scorer = [&](const WeightVector& w, const std::vector<const Example*>& exs) {
    return mean_credit(score_with(spec, experiment_model(spec, w), exs, view.resolver())).value_or(0.0);
  };
  TuningOutcome out;
  out.training_domains = s.training_domains;
  if (spec.in_domain) {
    auto grid = spec.grid ? *spec.grid : make_grid(Algorithm::AdaGrad, {spec.target}, spec.seed, spec.axes);
    out.result = tune_in_domain(s.target->train, spec.folds, grid, source, scorer);
  } else {
    auto grid = spec.grid ? *spec.grid : make_grid(spec.algorithm, s.training_domains, spec.seed, spec.axes);
    out.result = tune_hyperparameters(s.training_domains, s.train, grid, spec.algorithm, source, scorer);
  }
  return out;
}

TrainedModel train_experiment(const ExperimentSpec& spec, const Dataset& data, const DomainRegistry& registry,
                              const TrainConfig& config, AccessLog* log) {
  Setup s = setup(spec, data);
  DomainView view(registry, log);
  view.set_phase(Phase::Training);
  ParserCandidateSource source(view.resolver(), spec.parser, s.features, spec.use_logic_filter);
  TrainedModel out;
  out.config = config;
  out.training_domains = s.training_domains;
  if (spec.in_domain) {
    std::vector<const Example*> train;
    for (const auto& e : s.target->train) train.push_back(&e);
    out.weights = adagrad(train, {}, config, source);
  } else if (spec.algorithm == Algorithm::AdaGrad) {
    out.weights = adagrad(collect_examples(s.train, s.training_domains), {}, config, source);
  } else {
    out.partition = final_partition(config, s.training_domains);
    out.weights = gmdp(*out.partition, s.train, config, source);
  }
  return out;
}

std::vector<ExampleScore> test_experiment(const ExperimentSpec& spec, const Dataset& data,
                                          const DomainRegistry& registry, const Model& model, AccessLog* log) {
  auto it = data.find(spec.target);
  if (it == data.end()) throw DataError("no data for target domain '" + spec.target + "'");
  DomainView view(registry, log);
  view.set_phase(Phase::Testing);
  std::vector<const Example*> test;
  for (const auto& e : it->second.test) test.push_back(&e);
  return score_with(spec, model, test, view.resolver());
}

ExperimentReport run_experiment(const ExperimentSpec& spec, const Dataset& data, const DomainRegistry& registry,
                                AccessLog* log) {
  ExperimentReport report;
  report.spec = spec;
  TrainConfig config;
  if (spec.fixed) {
    config = *spec.fixed;
    report.training_domains = setup(spec, data).training_domains;
  } else {
    TuningOutcome t = tune_experiment(spec, data, registry, log);
    config = t.result.best;
    report.tuning_accuracy = t.result.mean_accuracy;
    report.training_domains = t.training_domains;
  }
  report.tuned = config;
  TrainedModel m = train_experiment(spec, data, registry, config, log);
  report.partition = m.partition;
  report.weights = m.weights;
  report.scores = test_experiment(spec, data, registry, experiment_model(spec, m.weights), log);
  if (auto mc = mean_credit(report.scores)) report.accuracy = *mc * 100.0;
  return report;
}

// ---------------------------------------------------------------------------
// Significance

BootstrapResult paired_bootstrap(const std::vector<ExampleScore>& a, const std::vector<ExampleScore>& b,
                                 int iterations, double alpha, std::uint64_t seed) {
  if (a.size() != b.size()) throw std::invalid_argument("bootstrap over score lists of different length");
  if (iterations < 1) throw std::invalid_argument("bootstrap needs at least one iteration");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < b.size(); ++i) index[b[i].example_id] = i;
  if (index.size() != b.size()) throw std::invalid_argument("duplicate example ids in bootstrap input");
  std::vector<double> xa, xb;
  for (const auto& s : a) {
    auto it = index.find(s.example_id);
    if (it == index.end()) throw std::invalid_argument("example '" + s.example_id + "' missing from second report");
    xa.push_back(s.credit);
    xb.push_back(b[it->second].credit);
  }
  BootstrapResult r;
  const std::size_t n = xa.size();
  if (n == 0) return r;
  for (std::size_t i = 0; i < n; ++i) {
    r.mean_a += xa[i];
    r.mean_b += xb[i];
  }
  r.mean_a /= static_cast<double>(n);
  r.mean_b /= static_cast<double>(n);
  if (r.mean_a <= r.mean_b) return r;
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick_index(0, n - 1);
  int not_better = 0;
  for (int it = 0; it < iterations; ++it) {
    double sa = 0, sb = 0;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t j = pick_index(rng);
      sa += xa[j];
      sb += xb[j];
    }
    if (sa <= sb) ++not_better;
  }
  r.p_value = static_cast<double>(not_better) / iterations;
  r.significant = r.p_value < alpha;
  return r;
}

// ---------------------------------------------------------------------------
// Ablation table

std::vector<ModelVariant> ablation_variants() {
  std::vector<ModelVariant> out;
  for (Algorithm a : {Algorithm::Gmdp, Algorithm::AdaGrad}) {
    std::string base = a == Algorithm::Gmdp ? "GMDP" : "AdaGrad";
    out.push_back({base, a, true, true});
    out.push_back({base + "-F", a, false, true});
    out.push_back({base + "-A", a, true, false});
    out.push_back({base + "-FA", a, false, false});
  }
  return out;
}

std::optional<double> reference_average(const std::string& variant) {
  static const std::map<std::string, double> kAverages = {
      {"GMDP", 44.5},    {"GMDP-F", 26.9},    {"GMDP-A", 34.5},    {"GMDP-FA", 25.5},
      {"AdaGrad", 39.1}, {"AdaGrad-F", 32.4}, {"AdaGrad-A", 35.8}, {"AdaGrad-FA", 28.3}};
  auto it = kAverages.find(variant);
  if (it == kAverages.end()) return std::nullopt;
  return it->second;
}

namespace {

std::string fixed1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string format_ablation_table(const AblationTable& table, const std::vector<std::string>& domains) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header = {"model"};
  for (const auto& d : domains) header.push_back(d);
  header.insert(header.end(), {"avg", "published", "delta"});
  rows.push_back(header);

  std::vector<std::string> names;
  for (const auto& v : ablation_variants()) names.push_back(v.name);
  for (const auto& [name, cells] : table) {
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
  }
  for (const auto& name : names) {
    auto it = table.find(name);
    if (it == table.end()) continue;
    std::vector<std::string> row = {name};
    double sum = 0, sum_in = 0;
    int n = 0, n_in = 0;
    for (const auto& d : domains) {
      auto c = it->second.find(d);
      std::string cell = "-";
      if (c != it->second.end()) {
        const TableCell& tc = c->second;
        if (tc.zero_shot) {
          cell = fixed1(*tc.zero_shot) + (tc.significant ? "*" : "");
          sum += *tc.zero_shot;
          ++n;
        }
        if (tc.in_domain) {
          cell += " (" + fixed1(*tc.in_domain) + ")";
          sum_in += *tc.in_domain;
          ++n_in;
        }
      }
      row.push_back(cell);
    }
    std::string avg = n ? fixed1(sum / n) : "-";
    if (n_in) avg += " (" + fixed1(sum_in / n_in) + ")";
    row.push_back(avg);
    auto ref = reference_average(name);
    row.push_back(ref ? fixed1(*ref) : "-");
    row.push_back(ref && n ? (sum / n - *ref >= 0 ? "+" : "") + fixed1(sum / n - *ref) : "-");
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream out;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "  " : "") << pad(r[i], width[i]);
    out << "\n";
  }
  return out.str();
}

}  // namespace zsp
