#include "zsp/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string_view>
#include <tuple>
#include <unordered_map>

#include "zsp/errors.hpp"

namespace zsp {

std::string_view to_string(Algorithm a) { return a == Algorithm::Gmdp ? "gmdp" : "adagrad"; }

Algorithm parse_algorithm(std::string_view name) {
  if (name == "gmdp") return Algorithm::Gmdp;
  if (name == "adagrad") return Algorithm::AdaGrad;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "' (expected gmdp or adagrad)");
}

void DomainPartition::validate(const std::vector<std::string>* domains) const {
  if (d1.empty() || d2.empty()) throw std::invalid_argument("domain partition with an empty side");
  for (const auto& d : d1) {
    if (std::find(d2.begin(), d2.end(), d) != d2.end()) {
      throw std::invalid_argument("domain '" + d + "' on both sides of the partition");
    }
  }
  if (domains) {
    if (d1.size() + d2.size() != domains->size()) throw std::invalid_argument("partition does not cover the domains");
    for (const auto& d : *domains) {
      if (std::find(d1.begin(), d1.end(), d) == d1.end() && std::find(d2.begin(), d2.end(), d) == d2.end()) {
        throw std::invalid_argument("domain '" + d + "' missing from the partition");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Log-linear model

double score(const WeightVector& weights, const FeatureVector& features) { return dot(weights, features); }

namespace {

std::vector<double> log_scores(const WeightVector& weights, const std::vector<CandidateFeatures>& cands) {
  std::vector<double> s;
  s.reserve(cands.size());
  for (const auto& c : cands) {
    double v = c.features ? dot(weights, *c.features) : 0.0;
    s.push_back(v + std::log(c.multiplicity));
  }
  return s;
}

double log_sum_exp(const std::vector<double>& s, const std::vector<CandidateFeatures>* only_correct = nullptr) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (only_correct && !(*only_correct)[i].correct) continue;
    mx = std::max(mx, s[i]);
  }
  if (!std::isfinite(mx)) return mx;
  double acc = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (only_correct && !(*only_correct)[i].correct) continue;
    acc += std::exp(s[i] - mx);
  }
  return mx + std::log(acc);
}

}  // namespace

std::vector<double> candidate_distribution(const WeightVector& weights, const std::vector<CandidateFeatures>& cands) {
  if (cands.empty()) throw std::invalid_argument("candidate distribution over an empty candidate list");
  std::vector<double> s = log_scores(weights, cands);
  double mx = *std::max_element(s.begin(), s.end());
  double z = 0;
  for (double& v : s) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : s) v /= z;
  return s;
}

LogLikelihood example_log_likelihood(const WeightVector& weights, const std::vector<CandidateFeatures>& cands) {
  LogLikelihood out;
  if (cands.empty()) return out;
  std::vector<double> s = log_scores(weights, cands);
  double log_z = log_sum_exp(s);
  double log_c = log_sum_exp(s, &cands);
  if (!std::isfinite(log_c)) return out;
  out.has_correct = true;
  out.log_prob = log_c - log_z;
  std::unordered_map<std::string_view, double> grad;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    double p = std::exp(s[i] - log_z);
    double q = cands[i].correct ? std::exp(s[i] - log_c) : 0.0;
    double coef = q - p;
    if (coef == 0 || !cands[i].features) continue;
    for (const auto& [k, v] : *cands[i].features) grad[k] += coef * v;
  }
  for (const auto& [k, v] : grad) out.gradient.emplace(std::string(k), v);
  return out;
}

LogLikelihood example_log_likelihood(const WeightVector& weights, const std::vector<FeatureVector>& features,
                                     const std::vector<std::optional<State>>& denotations, const State& desired) {
  if (features.size() != denotations.size()) throw std::invalid_argument("features and denotations differ in length");
  std::vector<CandidateFeatures> cands;
  for (std::size_t i = 0; i < features.size(); ++i) {
    bool correct = denotations[i] && states_equal(*denotations[i], desired);
    cands.push_back({std::make_shared<const FeatureVector>(features[i]), correct, 1});
  }
  return example_log_likelihood(weights, cands);
}

// ---------------------------------------------------------------------------
// Candidate sources

namespace {
std::mutex lexicon_mutex;
}

ParserCandidateSource::ParserCandidateSource(DomainResolver resolve, ParserConfig parser, FeatureOptions features,
                                             bool use_filter)
    : resolve_(std::move(resolve)), parser_(parser), features_(features), use_filter_(use_filter) {}

const MatchLexicon& ParserCandidateSource::lexicon(const Domain& domain) const {
  std::lock_guard lock(lexicon_mutex);
  auto& slot = lexicons_[&domain];
  if (!slot) slot = std::make_shared<const MatchLexicon>(build_lexicon(domain));
  return *slot;
}

std::vector<CandidateFeatures> ParserCandidateSource::candidates(const Example& example,
                                                                  const WeightVector& weights) const {
  const Domain& domain = resolve_(example.domain);
  const MatchLexicon& lex = lexicon(domain);
  ParseRequest req = make_request(domain, lex, example.initial, example.utterance, features_);
  CandidateSet cs = generate_candidates(req, parser_, weights);
  InvocationCache cache;
  std::map<const Invocation*, bool> correct_by_call;
  using Key = std::tuple<std::string, int, std::uint64_t, int, bool>;
  std::map<Key, std::size_t> groups;
  std::vector<CandidateFeatures> out;
  for (const Derivation& d : cs.roots) {
    const Invocation& inv = cache.invoke(domain, example.initial, d.call());
    if (use_filter_ && !inv.changed) continue;
    auto it = correct_by_call.find(&inv);
    if (it == correct_by_call.end()) {
      bool ok = inv.result && states_equal(*inv.result, example.desired);
      it = correct_by_call.emplace(&inv, ok).first;
    }
    const FeatureSignature& sig = d.signature();
    Key key{sig.predicates.to_string(), sig.anchored_values, sig.token_mask, sig.size, it->second};
    auto [g, inserted] = groups.emplace(key, out.size());
    if (inserted) {
      out.push_back({std::make_shared<const FeatureVector>(d.features()), it->second, 1});
    } else {
      out[g->second].multiplicity += 1;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Optimization

namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t step1_seed(std::uint64_t seed) { return mix_seed(seed, 0xD1); }

void adagrad_update(WeightVector& weights, AdaGradAccumulator& accum, const FeatureVector& gradient, double l1,
                    double step_size) {
  for (const auto& [k, g] : gradient) {
    if (g == 0) continue;
    double& G = accum[k];
    G += g * g;
    double eta = step_size / std::sqrt(G + kAdaGradEpsilon);
    auto it = weights.find(k);
    double w = (it == weights.end() ? 0.0 : it->second) + eta * g;
    double shrunk = std::max(0.0, std::abs(w) - l1 * eta);
    w = std::copysign(shrunk, w);
    if (w == 0) {
      if (it != weights.end()) weights.erase(it);
    } else if (it != weights.end()) {
      it->second = w;
    } else {
      weights.emplace(k, w);
    }
  }
}

WeightVector adagrad(const std::vector<const Example*>& examples, const WeightVector& init,
                     const AdaGradOptions& options, const CandidateSource& source, AdaGradAccumulator* accumulator,
                     const EpochCallback& on_epoch, std::vector<EpochReport>* reports) {
  WeightVector w = init;
  AdaGradAccumulator local;
  AdaGradAccumulator& accum = accumulator ? *accumulator : local;
  for (int epoch = 1; epoch <= options.iterations; ++epoch) {
    std::vector<const Example*> order = examples;
    Rng rng(mix_seed(options.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    EpochReport report;
    report.epoch = epoch;
    for (const Example* ex : order) {
      ++report.examples;
      LogLikelihood ll = example_log_likelihood(w, source.candidates(*ex, w));
      if (!ll.has_correct) {
        ++report.skipped;
        continue;
      }
      report.log_likelihood += ll.log_prob;
      adagrad_update(w, accum, ll.gradient, options.l1, options.step_size);
    }
    if (reports) reports->push_back(report);
    if (on_epoch) on_epoch(epoch, w);
  }
  return w;
}

WeightVector adagrad(const std::vector<const Example*>& examples, const WeightVector& init,
                     const TrainConfig& config, const CandidateSource& source, const EpochCallback& on_epoch,
                     std::vector<EpochReport>* reports) {
  AdaGradOptions o{config.l1, config.step_size, config.iterations, config.seed};
  return adagrad(examples, init, o, source, nullptr, on_epoch, reports);
}

std::vector<const Example*> collect_examples(const ExamplesByDomain& examples,
                                             const std::vector<std::string>& domains) {
  std::vector<const Example*> out;
  for (const auto& d : domains) {
    auto it = examples.find(d);
    if (it == examples.end()) throw DataError("no training examples for domain '" + d + "'");
    for (const auto& ex : it->second) out.push_back(&ex);
  }
  return out;
}

WeightVector gmdp(const DomainPartition& partition, const ExamplesByDomain& examples, const TrainConfig& config,
                  const CandidateSource& source, GmdpTrace* trace, const EpochCallback& on_step2_epoch) {
  partition.validate();
  AdaGradAccumulator accum;
  AdaGradOptions step1{config.l1, config.step_size, config.iterations_step1, step1_seed(config.seed)};
  WeightVector theta_d1 = adagrad(collect_examples(examples, partition.d1), WeightVector{}, step1, source, &accum,
                                  {}, trace ? &trace->step1 : nullptr);
  if (trace) trace->theta_d1 = theta_d1;
  if (config.reset_accumulators) accum.clear();
  AdaGradOptions step2{config.l1, config.step_size, config.iterations, config.seed};
  return adagrad(collect_examples(examples, partition.d2), theta_d1, step2, source, &accum, on_step2_epoch,
                 trace ? &trace->step2 : nullptr);
}

// ---------------------------------------------------------------------------
// Hyper-parameters

std::vector<TrainConfig> default_grid(Algorithm algorithm, const std::vector<std::string>& domains,
                                      std::uint64_t seed) {
  return make_grid(algorithm, domains, seed, GridAxes{});
}

std::vector<TrainConfig> make_grid(Algorithm algorithm, const std::vector<std::string>& domains, std::uint64_t seed,
                                   const GridAxes& axes) {
  std::vector<TrainConfig> grid;
  if (algorithm == Algorithm::AdaGrad) {
    for (double l1 : axes.l1) {
      for (double eta : axes.step_size) {
        for (int it : axes.iterations) {
          TrainConfig c;
          c.l1 = l1;
          c.step_size = eta;
          c.iterations = it;
          c.iterations_step1 = 0;
          c.partition_size = 0;
          c.seed = seed;
          grid.push_back(c);
        }
      }
    }
    return grid;
  }
  std::vector<std::vector<std::string>> orderings;
  Rng rng(mix_seed(seed, 0x0D));
  for (int i = 0; i < axes.orderings; ++i) {
    std::vector<std::string> o = domains;
    std::shuffle(o.begin(), o.end(), rng);
    orderings.push_back(std::move(o));
  }
  // |D1| is counted over the domains left after holding one out.
  const int tuning = static_cast<int>(domains.size()) - 1;
  std::vector<int> sizes;
  for (int m : axes.partition_size) {
    if (m >= 1 && m < tuning) sizes.push_back(m);
  }
  if (sizes.empty()) sizes.push_back(std::max(1, tuning / 2));
  for (double l1 : axes.l1) {
    for (double eta : axes.step_size) {
      for (int it : axes.iterations) {
        for (int m : sizes) {
          for (const auto& o : orderings) {
            for (int it1 : axes.iterations_step1) {
              TrainConfig c;
              c.l1 = l1;
              c.step_size = eta;
              c.iterations = it;
              c.iterations_step1 = it1;
              c.partition_size = m;
              c.domain_ordering = o;
              c.seed = seed;
              grid.push_back(c);
            }
          }
        }
      }
    }
  }
  return grid;
}

DomainPartition tuning_partition(const TrainConfig& config, const std::string& held_out) {
  DomainPartition p;
  for (const auto& d : config.domain_ordering) {
    if (d == held_out) continue;
    (static_cast<int>(p.d1.size()) < config.partition_size ? p.d1 : p.d2).push_back(d);
  }
  p.validate();
  return p;
}

DomainPartition final_partition(const TrainConfig& tuned, const std::vector<std::string>& training_domains) {
  std::vector<std::string> ordering = tuned.domain_ordering.empty() ? training_domains : tuned.domain_ordering;
  if (ordering.size() != training_domains.size()) {
    throw std::invalid_argument("tuned ordering does not cover the training domains");
  }
  int n = static_cast<int>(ordering.size());
  int a = tuned.partition_size;
  int b = n - 1 - a;
  if (a < 1 || b < 1) throw std::invalid_argument("tuned partition size out of range");
  int d1 = a >= b ? a + 1 : a;
  DomainPartition p;
  for (int i = 0; i < n; ++i) (i < d1 ? p.d1 : p.d2).push_back(ordering[static_cast<std::size_t>(i)]);
  p.validate(&training_domains);
  return p;
}

std::size_t argmax_first(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best] || std::isnan(values[best])) best = i;
  }
  return best;
}

namespace {

/// Grid entries that differ only in `iterations`, keyed by their first entry.
std::vector<std::vector<std::size_t>> iteration_groups(const std::vector<TrainConfig>& grid) {
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    TrainConfig key = grid[i];
    key.iterations = 0;
    bool placed = false;
    for (auto& g : groups) {
      TrainConfig other = grid[g.front()];
      other.iterations = 0;
      if (other == key) {
        g.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back({i});
  }
  return groups;
}

struct Job {
  std::size_t group;
  std::size_t fold;
};

/// Trains one group on one fold and records held-out accuracy for every
/// iteration count of the group.
template <typename Train>
void run_group(const std::vector<TrainConfig>& grid, const std::vector<std::size_t>& members, Train&& train,
               const HeldOutScorer& scorer, const std::vector<const Example*>& held_out,
               std::vector<std::vector<double>>& acc, std::size_t fold) {
  int max_it = 0;
  for (std::size_t gi : members) max_it = std::max(max_it, grid[gi].iterations);
  TrainConfig cfg = grid[members.front()];
  cfg.iterations = max_it;
  auto record = [&](int epoch, const WeightVector& w) {
    double a = -1;
    for (std::size_t gi : members) {
      if (grid[gi].iterations != epoch) continue;
      if (a < 0) a = scorer(w, held_out);
      acc[gi][fold] = a;
    }
  };
  WeightVector start = train(cfg, record);
  record(0, start);
}

}  // namespace

TuningResult tune_hyperparameters(const std::vector<std::string>& domains, const ExamplesByDomain& examples,
                                  const std::vector<TrainConfig>& grid, Algorithm algorithm,
                                  const CandidateSource& source, const HeldOutScorer& scorer) {
  if (grid.empty()) throw std::invalid_argument("empty hyper-parameter grid");
  if (algorithm == Algorithm::Gmdp && domains.size() < 3) {
    throw std::invalid_argument("GMDP tuning needs at least 3 training domains");
  }
  if (domains.size() < 2) throw std::invalid_argument("leave-one-out tuning needs at least 2 domains");
  auto groups = iteration_groups(grid);
  std::vector<std::vector<double>> acc(grid.size(), std::vector<double>(domains.size(), 0.0));
  std::vector<Job> jobs;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t f = 0; f < domains.size(); ++f) jobs.push_back({g, f});
  }
  std::vector<std::vector<const Example*>> held(domains.size());
  for (std::size_t f = 0; f < domains.size(); ++f) held[f] = collect_examples(examples, {domains[f]});

#pragma omp parallel for schedule(dynamic)
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const Job& job = jobs[j];
    const std::string& out = domains[job.fold];
    std::vector<std::string> rest;
    for (const auto& d : domains) {
      if (d != out) rest.push_back(d);
    }
    if (algorithm == Algorithm::AdaGrad) {
      auto train_set = collect_examples(examples, rest);
      run_group(
          grid, groups[job.group],
          [&](const TrainConfig& cfg, const EpochCallback& cb) {
            adagrad(train_set, {}, cfg, source, cb);
            return WeightVector{};
          },
          scorer, held[job.fold], acc, job.fold);
    } else {
      run_group(
          grid, groups[job.group],
          [&](const TrainConfig& cfg, const EpochCallback& cb) {
            GmdpTrace trace;
            gmdp(tuning_partition(cfg, out), examples, cfg, source, &trace, cb);
            return trace.theta_d1;
          },
          scorer, held[job.fold], acc, job.fold);
    }
  }

  TuningResult r;
  for (const auto& row : acc) {
    double s = 0;
    for (double v : row) s += v;
    r.mean_accuracy.push_back(s / static_cast<double>(row.size()));
  }
  r.best_index = argmax_first(r.mean_accuracy);
  r.best = grid[r.best_index];
  return r;
}

TuningResult tune_in_domain(const std::vector<Example>& examples, int folds, const std::vector<TrainConfig>& grid,
                            const CandidateSource& source, const HeldOutScorer& scorer) {
  if (grid.empty()) throw std::invalid_argument("empty hyper-parameter grid");
  if (folds < 2 || static_cast<std::size_t>(folds) > examples.size()) {
    throw std::invalid_argument("cross-validation needs 2 <= folds <= examples");
  }
  auto groups = iteration_groups(grid);
  auto nf = static_cast<std::size_t>(folds);
  std::vector<std::vector<double>> acc(grid.size(), std::vector<double>(nf, 0.0));
  std::vector<std::vector<const Example*>> train(nf), held(nf);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    for (std::size_t f = 0; f < nf; ++f) (i % nf == f ? held[f] : train[f]).push_back(&examples[i]);
  }
  std::vector<Job> jobs;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t f = 0; f < nf; ++f) jobs.push_back({g, f});
  }
#pragma omp parallel for schedule(dynamic)
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const Job& job = jobs[j];
    run_group(
        grid, groups[job.group],
        [&](const TrainConfig& cfg, const EpochCallback& cb) {
          adagrad(train[job.fold], {}, cfg, source, cb);
          return WeightVector{};
        },
        scorer, held[job.fold], acc, job.fold);
  }
  TuningResult r;
  for (const auto& row : acc) {
    double s = 0;
    for (double v : row) s += v;
    r.mean_accuracy.push_back(s / static_cast<double>(row.size()));
  }
  r.best_index = argmax_first(r.mean_accuracy);
  r.best = grid[r.best_index];
  return r;
}

}  // namespace zsp
