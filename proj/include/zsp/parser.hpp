#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zsp/domain.hpp"
#include "zsp/features.hpp"
#include "zsp/knowledge.hpp"
#include "zsp/logical_form.hpp"

namespace zsp {

struct ParserConfig {
  static constexpr int kUnbounded = 0;

  int beam_size = 200;  // kUnbounded keeps every derivation
  int max_rule_applications = 15;
};

enum class Category : std::uint8_t { Value, EntitySet, Relation, Method, Root };

/// A value literal the utterance can anchor: digits, number words,
/// ordinals, and 1-4 token spans equal to a KB text value.
struct Anchor {
  Value value;
  int begin = 0;
  int end = 0;  // exclusive
  std::uint64_t mask = 0;
};

std::vector<Anchor> find_anchors(const std::vector<std::string>& tokens, const State& state);

/// Integer named by a number word, ordinal or digit token ("four", "4th", "4").
std::optional<int> number_word_value(std::string_view token);

class Chart;

/// Handle to one derivation inside a parse chart. Cheap to copy; keeps the
/// chart alive. The logical form is built on first request.
class Derivation {
 public:
  Derivation() = default;
  Derivation(std::shared_ptr<const Chart> chart, int node) : chart_(std::move(chart)), node_(node) {}

  LfPtr logical_form() const;
  const std::string& to_string() const;
  Category category() const;
  /// Rule applications used to build this derivation.
  int size() const;
  /// Utterance tokens consumed by anchored leaves.
  std::uint64_t anchored_tokens() const;
  std::vector<Derivation> children() const;
  /// Beam score under the weights of the parse.
  double score() const;
  const FeatureSignature& signature() const;
  FeatureVector features() const;
  /// Root derivations only.
  const MethodCall& call() const;
  /// Set denotation of a non-root derivation.
  ValueSet denotation() const;

  int id() const { return node_; }
  bool valid() const { return chart_ != nullptr; }

 private:
  std::shared_ptr<const Chart> chart_;
  int node_ = -1;
};

/// Inputs of one inference. Domain and lexicon must outlive every
/// Derivation produced from the request.
struct ParseRequest {
  const Domain* domain = nullptr;
  const MatchLexicon* lexicon = nullptr;
  State state;
  std::vector<std::string> tokens;
  FeatureOptions features;
};

ParseRequest make_request(const Domain& domain, const MatchLexicon& lexicon, const State& state,
                          std::string_view utterance, FeatureOptions features = {});

struct CandidateSet {
  std::shared_ptr<const Chart> chart;
  std::vector<Derivation> roots;

  const FeatureContext& feature_context() const;
};

/// Bottom-up beam search over (category, size) cells.
///
/// Grammar: anchored values; floating symbols, entity types, relations and
/// methods; R[r].z and r.z (entity-valued r only); and(a, b); argmax/argmin
/// over integer relations; method calls whose arguments fit the signature.
/// Set-valued derivations must denote a non-empty set, siblings may not
/// share anchored tokens, and intersections are kept in one canonical
/// left-nested order with distinct conjuncts.
CandidateSet generate_candidates(const ParseRequest& request, const ParserConfig& config,
                                 const WeightVector& weights);

/// Result of invoking a candidate's call on the initial state.
struct Invocation {
  std::optional<State> result;  // empty when the logic threw
  std::string error;
  bool changed = false;
};

/// Memo of call outcomes within one inference.
class InvocationCache {
 public:
  const Invocation& invoke(const Domain& domain, const State& state, const MethodCall& call);
  std::size_t size() const { return cache_.size(); }
  std::size_t invocations() const { return invocations_; }

 private:
  std::map<MethodCall, Invocation> cache_;
  std::size_t invocations_ = 0;
};

/// Drops candidates whose call throws or leaves the state unchanged.
std::vector<Derivation> filter_by_application_logic(const std::vector<Derivation>& candidates, const State& state,
                                                    const Domain& domain, InvocationCache* cache = nullptr);

struct Prediction {
  CandidateSet candidates;
  std::vector<Derivation> considered;  // after filtering, if enabled
  std::vector<Derivation> best;        // every derivation at the maximal score
  double best_score = 0;
  std::optional<State> state;          // denotation of best.front(), if it executes

  bool parse_failed() const { return best.empty(); }
};

struct PredictOptions {
  bool use_filter = true;
};

Prediction predict(const ParseRequest& request, const ParserConfig& config, const WeightVector& weights,
                   PredictOptions options = {}, InvocationCache* cache = nullptr);

}  // namespace zsp
