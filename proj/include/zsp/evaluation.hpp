#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "zsp/domain.hpp"
#include "zsp/parser.hpp"
#include "zsp/training.hpp"

namespace zsp {

struct ExampleScore {
  std::string example_id;
  double credit = 0;
  int tie_count = 0;
  int correct_in_tie = 0;
  bool parse_failed = false;
};

/// Weights plus the inference settings they were trained with.
struct Model {
  WeightVector weights;
  ParserConfig parser;
  FeatureOptions features;
  bool use_filter = true;
};

/// Credit of a prediction: the fraction of maximal-score derivations whose
/// call yields `desired`.
ExampleScore credit_prediction(const Prediction& prediction, const Example& example, const Domain& domain);

ExampleScore score_example(const Model& model, const Example& example, const Domain& domain,
                           const MatchLexicon& lexicon);

/// Scores every example; the parallel kernel splits examples over OpenMP
/// threads and returns the same scores in the same order.
std::vector<ExampleScore> score_examples_serial(const Model& model, const std::vector<const Example*>& examples,
                                                const DomainResolver& resolve);
std::vector<ExampleScore> score_examples_parallel(const Model& model, const std::vector<const Example*>& examples,
                                                  const DomainResolver& resolve);

/// Mean credit; nullopt for an empty list.
std::optional<double> mean_credit(const std::vector<ExampleScore>& scores);

// ---------------------------------------------------------------------------
// Protocol isolation

enum class Phase : std::uint8_t { Tuning, Training, Testing };
std::string_view to_string(Phase phase);

/// Domain accesses (examples, lexicon, application logic) per phase.
class AccessLog {
 public:
  void record(Phase phase, const std::string& domain);
  std::size_t count(Phase phase, const std::string& domain) const;
  std::size_t total(Phase phase) const;

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<Phase, std::string>, std::size_t> counts_;
};

/// Registry wrapper whose resolver logs every lookup under the current phase.
class DomainView {
 public:
  DomainView(const DomainRegistry& registry, AccessLog* log) : registry_(&registry), log_(log) {}

  void set_phase(Phase phase) { phase_ = phase; }
  Phase phase() const { return phase_; }
  const Domain& get(const std::string& id) const;
  DomainResolver resolver() const;

 private:
  const DomainRegistry* registry_;
  AccessLog* log_;
  Phase phase_ = Phase::Tuning;
};

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentSpec {
  std::string target;
  Algorithm algorithm = Algorithm::Gmdp;
  bool use_new_features = true;
  bool use_logic_filter = true;
  bool in_domain = false;
  std::uint64_t seed = 1;
  ParserConfig parser;
  GridAxes axes;
  std::optional<std::vector<TrainConfig>> grid;  // replaces the grid built from `axes`
  std::optional<TrainConfig> fixed;              // skips tuning
  int folds = 3;                                 // in-domain cross-validation
  bool parallel = true;
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<std::string> training_domains;
  TrainConfig tuned;
  std::vector<double> tuning_accuracy;  // per grid entry
  std::optional<DomainPartition> partition;
  WeightVector weights;
  std::vector<ExampleScore> scores;
  std::optional<double> accuracy;  // percent; nullopt without test data
};

Model experiment_model(const ExperimentSpec& spec, WeightVector weights);

struct TuningOutcome {
  std::vector<std::string> training_domains;
  TuningResult result;
};

struct TrainedModel {
  TrainConfig config;
  std::vector<std::string> training_domains;
  std::optional<DomainPartition> partition;
  WeightVector weights;
};

/// Grid search: leave-one-domain-out over the source domains, or k-fold
/// over the target's train split for in-domain runs.
TuningOutcome tune_experiment(const ExperimentSpec& spec, const Dataset& data, const DomainRegistry& registry,
                              AccessLog* log = nullptr);

/// Final training with a chosen configuration.
TrainedModel train_experiment(const ExperimentSpec& spec, const Dataset& data, const DomainRegistry& registry,
                              const TrainConfig& config, AccessLog* log = nullptr);

/// Scores of `model` on the target's test split.
std::vector<ExampleScore> test_experiment(const ExperimentSpec& spec, const Dataset& data,
                                          const DomainRegistry& registry, const Model& model,
                                          AccessLog* log = nullptr);

/// Tunes, trains the final model and scores the target's test split.
/// Zero-shot runs never hand target data to tuning or training.
ExperimentReport run_experiment(const ExperimentSpec& spec, const Dataset& data, const DomainRegistry& registry,
                                AccessLog* log = nullptr);

// ---------------------------------------------------------------------------
// Significance

struct BootstrapResult {
  double p_value = 1;
  bool significant = false;
  double mean_a = 0;
  double mean_b = 0;
};

/// One-sided paired bootstrap of "A beats B". Scores are paired by example
/// id. p is the fraction of resamples with mean(A) <= mean(B); it is 1 when
/// A does not beat B on the observed data.
BootstrapResult paired_bootstrap(const std::vector<ExampleScore>& a, const std::vector<ExampleScore>& b,
                                 int iterations = 10000, double alpha = 0.05, std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Ablation table

struct ModelVariant {
  std::string name;
  Algorithm algorithm;
  bool new_features;
  bool logic_filter;
};

/// GMDP, GMDP-F, GMDP-A, GMDP-FA, AdaGrad, AdaGrad-F, AdaGrad-A, AdaGrad-FA.
std::vector<ModelVariant> ablation_variants();

/// Published average accuracy of a variant, if any.
std::optional<double> reference_average(const std::string& variant);

struct TableCell {
  std::optional<double> zero_shot;
  std::optional<double> in_domain;
  bool significant = false;
};

/// rows: variant name -> domain -> cell.
using AblationTable = std::map<std::string, std::map<std::string, TableCell>>;

/// Rows in variant order, one column per domain, the average and its
/// difference from the published average.
std::string format_ablation_table(const AblationTable& table, const std::vector<std::string>& domains);

}  // namespace zsp
