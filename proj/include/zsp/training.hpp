#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zsp/domain.hpp"
#include "zsp/features.hpp"
#include "zsp/parser.hpp"

namespace zsp {

using ExamplesByDomain = std::map<std::string, std::vector<Example>>;

inline constexpr double kAdaGradEpsilon = 1e-8;

enum class Algorithm : std::uint8_t { AdaGrad, Gmdp };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);  // throws std::invalid_argument

struct TrainConfig {
  double l1 = 0.001;
  double step_size = 0.1;
  int iterations = 3;        // AdaGrad passes; the second GMDP step
  int iterations_step1 = 2;  // first GMDP step
  int partition_size = 3;    // |D1| over the tuning domains
  std::vector<std::string> domain_ordering;
  std::uint64_t seed = 1;
  bool reset_accumulators = true;  // between the two GMDP steps

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct DomainPartition {
  std::vector<std::string> d1;
  std::vector<std::string> d2;

  /// Throws std::invalid_argument unless d1 and d2 are non-empty, disjoint
  /// and together cover `domains` (when given).
  void validate(const std::vector<std::string>* domains = nullptr) const;
  friend bool operator==(const DomainPartition&, const DomainPartition&) = default;
};

// ---------------------------------------------------------------------------
// Log-linear model

double score(const WeightVector& weights, const FeatureVector& features);

/// One candidate as seen by the objective: its features, whether its
/// denotation is the desired state, and how many identical candidates it
/// stands for.
struct CandidateFeatures {
  std::shared_ptr<const FeatureVector> features;
  bool correct = false;
  double multiplicity = 1;
};

/// Softmax over candidate scores (max-subtracted). Throws on an empty list.
std::vector<double> candidate_distribution(const WeightVector& weights, const std::vector<CandidateFeatures>& cands);

struct LogLikelihood {
  double log_prob = 0;
  FeatureVector gradient;  // E[phi | correct] - E[phi]
  bool has_correct = false;
};

/// log of the probability mass on correct candidates and its gradient.
/// Without any correct candidate the result is marked and carries no gradient.
LogLikelihood example_log_likelihood(const WeightVector& weights, const std::vector<CandidateFeatures>& cands);

/// Marks candidates correct when their denotation equals `desired`.
LogLikelihood example_log_likelihood(const WeightVector& weights, const std::vector<FeatureVector>& features,
                                     const std::vector<std::optional<State>>& denotations, const State& desired);

// ---------------------------------------------------------------------------
// Candidate sources

/// Supplies the candidates of a training example under the current weights.
class CandidateSource {
 public:
  virtual ~CandidateSource() = default;
  virtual std::vector<CandidateFeatures> candidates(const Example& example, const WeightVector& weights) const = 0;
};

using DomainResolver = std::function<const Domain&(const std::string&)>;

/// Parses the example with the current weights, optionally filters with the
/// application logic, and groups candidates with identical features.
class ParserCandidateSource : public CandidateSource {
 public:
  ParserCandidateSource(DomainResolver resolve, ParserConfig parser, FeatureOptions features, bool use_filter);

  std::vector<CandidateFeatures> candidates(const Example& example, const WeightVector& weights) const override;

  const ParserConfig& parser_config() const { return parser_; }
  const FeatureOptions& feature_options() const { return features_; }
  bool use_filter() const { return use_filter_; }
  const MatchLexicon& lexicon(const Domain& domain) const;

 private:
  DomainResolver resolve_;
  ParserConfig parser_;
  FeatureOptions features_;
  bool use_filter_;
  mutable std::map<const Domain*, std::shared_ptr<const MatchLexicon>> lexicons_;
};

// ---------------------------------------------------------------------------
// Optimization

/// Accumulated squared gradients, per feature.
using AdaGradAccumulator = std::map<std::string, double>;

struct EpochReport {
  int epoch = 0;
  int examples = 0;
  int skipped = 0;  // no candidate reached the desired state
  double log_likelihood = 0;
};

/// Called after every pass with the pass number (1-based) and the weights.
using EpochCallback = std::function<void(int, const WeightVector&)>;

struct AdaGradOptions {
  double l1 = 0;
  double step_size = 0.1;
  int iterations = 1;
  std::uint64_t seed = 1;
};

/// One AdaGrad update with the composite L1 step on the coordinates of
/// `gradient` (ascent direction).
void adagrad_update(WeightVector& weights, AdaGradAccumulator& accum, const FeatureVector& gradient, double l1,
                    double step_size);

/// Per-example AdaGrad over `examples`, reshuffled each pass from `seed`.
WeightVector adagrad(const std::vector<const Example*>& examples, const WeightVector& init,
                     const AdaGradOptions& options, const CandidateSource& source,
                     AdaGradAccumulator* accumulator = nullptr, const EpochCallback& on_epoch = {},
                     std::vector<EpochReport>* reports = nullptr);

WeightVector adagrad(const std::vector<const Example*>& examples, const WeightVector& init,
                     const TrainConfig& config, const CandidateSource& source,
                     const EpochCallback& on_epoch = {}, std::vector<EpochReport>* reports = nullptr);

struct GmdpTrace {
  WeightVector theta_d1;
  std::vector<EpochReport> step1;
  std::vector<EpochReport> step2;
};

/// Seed of the first GMDP step; the second step uses the config seed so
/// that an empty first step reproduces plain AdaGrad.
std::uint64_t step1_seed(std::uint64_t seed);

/// AdaGrad on D1 from zero weights, then AdaGrad on D2 from the result.
WeightVector gmdp(const DomainPartition& partition, const ExamplesByDomain& examples, const TrainConfig& config,
                  const CandidateSource& source, GmdpTrace* trace = nullptr, const EpochCallback& on_step2_epoch = {});

std::vector<const Example*> collect_examples(const ExamplesByDomain& examples, const std::vector<std::string>& domains);

// ---------------------------------------------------------------------------
// Hyper-parameters

/// l1 x step size x iterations, and for GMDP also |D1| x orderings x
/// first-step iterations. Orderings are seeded permutations of `domains`.
std::vector<TrainConfig> default_grid(Algorithm algorithm, const std::vector<std::string>& domains, std::uint64_t seed);

/// Values searched per hyper-parameter. The defaults give default_grid().
struct GridAxes {
  std::vector<double> l1 = {0.001, 0.01};
  std::vector<double> step_size = {0.01, 0.1};
  std::vector<int> iterations = {1, 2, 3};
  std::vector<int> partition_size = {3, 4};  // kept when 1 <= M < tuning domains
  std::vector<int> iterations_step1 = {2, 4};
  int orderings = 3;
};

std::vector<TrainConfig> make_grid(Algorithm algorithm, const std::vector<std::string>& domains, std::uint64_t seed,
                                   const GridAxes& axes);

/// Partition used while tuning with `held_out` removed: the first
/// partition_size domains of the ordering form D1.
DomainPartition tuning_partition(const TrainConfig& config, const std::string& held_out);

/// Final partition over all training domains: the ordering with the
/// held-out position restored, and whichever side was larger (D1 on ties)
/// grown by one.
DomainPartition final_partition(const TrainConfig& tuned, const std::vector<std::string>& training_domains);

/// Mean credit of weights on a list of examples.
using HeldOutScorer = std::function<double(const WeightVector&, const std::vector<const Example*>&)>;

struct TuningResult {
  TrainConfig best;
  std::vector<double> mean_accuracy;  // per grid entry
  std::size_t best_index = 0;
};

/// Leave-one-domain-out grid search over `domains`. Configurations that
/// differ only in `iterations` share one training run.
TuningResult tune_hyperparameters(const std::vector<std::string>& domains, const ExamplesByDomain& examples,
                                  const std::vector<TrainConfig>& grid, Algorithm algorithm,
                                  const CandidateSource& source, const HeldOutScorer& scorer);

/// Grid search with k folds over one domain's examples.
TuningResult tune_in_domain(const std::vector<Example>& examples, int folds, const std::vector<TrainConfig>& grid,
                            const CandidateSource& source, const HeldOutScorer& scorer);

/// First index with the maximal value.
std::size_t argmax_first(const std::vector<double>& values);

}  // namespace zsp
