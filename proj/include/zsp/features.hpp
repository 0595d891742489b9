#pragma once

#include <bitset>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "zsp/domain.hpp"

namespace zsp {

/// Sparse feature and weight vectors, keyed by feature name.
using FeatureVector = std::map<std::string, double>;
using WeightVector = std::map<std::string, double>;

/// Lowercases and splits on anything that is not a letter, digit or
/// apostrophe. Digit runs stay single tokens.
std::vector<std::string> tokenize(std::string_view utterance);

enum class PredicateKind : std::uint8_t { Method, Relation, Type, Operator, Value };
enum class PhraseSource : std::uint8_t { Description, Name };

std::string_view to_string(PredicateKind kind);
std::string_view to_string(PhraseSource source);

/// Operator predicates shared by every domain.
inline constexpr std::string_view kArgmax = "argmax";
inline constexpr std::string_view kArgmin = "argmin";

/// A predicate of a domain: method, relation, entity type, enum symbol or
/// superlative operator.
struct Predicate {
  std::string name;
  PredicateKind kind;
};

struct LexiconEntry {
  std::vector<std::string> phrase;  // tokenized
  int predicate = 0;                // index into MatchLexicon::predicates()
  PhraseSource source = PhraseSource::Name;
};

/// Phrases that can evoke each predicate of a domain.
///
/// Methods get their description phrases plus the tokens of their camelCase
/// name. Relations and types get their configured phrases plus name tokens;
/// `index` also answers to ordinal words. Enum symbols match their lowercase
/// name. Operator phrases are global.
class MatchLexicon {
 public:
  static constexpr int kMaxPredicates = 128;

  const std::vector<Predicate>& predicates() const { return predicates_; }
  const std::vector<LexiconEntry>& entries() const { return entries_; }
  /// -1 when the domain has no such predicate.
  int index_of(std::string_view name, PredicateKind kind) const;
  /// Phrases (space-joined) recorded for a predicate.
  std::vector<std::string> phrases(std::string_view name, PredicateKind kind) const;

  int add_predicate(std::string name, PredicateKind kind);
  void add_phrase(int predicate, std::string_view phrase, PhraseSource source);

 private:
  std::vector<Predicate> predicates_;
  std::vector<LexiconEntry> entries_;
};

MatchLexicon build_lexicon(const Domain& domain);

/// Tokens of a camelCase identifier, lowercased ("sizeInBytes" -> size, in, bytes).
std::vector<std::string> split_identifier(std::string_view name);

struct FeatureOptions {
  /// Description-phrase matches and size features.
  bool new_features = true;
  /// Crude plural/tense stripping of tokens and phrases before matching.
  bool strip_suffixes = false;
  int max_size = 15;
};

using PredicateMask = std::bitset<MatchLexicon::kMaxPredicates>;

/// Everything the feature templates look at in a derivation.
struct FeatureSignature {
  PredicateMask predicates;
  int anchored_values = 0;       // ValueLit leaves built from utterance spans
  std::uint64_t token_mask = 0;  // utterance tokens consumed by those leaves
  int size = 0;
};

/// Per-utterance feature extractor.
///
/// Templates:
///   cooc|p|q            count of utterance 1-2-gram p, for each predicate q in the form
///   cooc-any|k|s        lexicon matches of predicates of kind k from source s present in the form
///   missing|p|q         lexicon phrase p occurs but q is absent
///   missing-any|k|s     count of such absent matches
///   cooc-any|value|anchor / missing-any|value|anchor
///                       anchored values used / anchor spans left untouched
///   size>n              n >= 2 with size > n
class FeatureContext {
 public:
  FeatureContext(std::vector<std::string> tokens, const MatchLexicon& lexicon, FeatureOptions options,
                 std::vector<std::uint64_t> anchor_spans = {});

  const std::vector<std::string>& tokens() const { return tokens_; }
  const MatchLexicon& lexicon() const { return *lexicon_; }
  const FeatureOptions& options() const { return options_; }
  const std::vector<std::uint64_t>& anchor_spans() const { return anchor_spans_; }

  FeatureVector extract(const FeatureSignature& sig) const;

  /// Weights folded into per-predicate terms, so that scoring a signature
  /// costs one pass over its predicate bits. Equals dot(weights, extract(sig)).
  class Scorer {
   public:
    double score(const FeatureSignature& sig) const;

   private:
    friend class FeatureContext;
    const FeatureContext* ctx_ = nullptr;
    double base_ = 0;
    std::vector<double> delta_;     // per predicate: present minus absent contribution
    std::vector<double> size_;      // cumulative size-feature weight by size
    double anchor_used_ = 0;
    double anchor_untouched_ = 0;
  };

  Scorer scorer(const WeightVector& weights) const;

 private:
  struct Match {
    int predicate;
    PhraseSource source;
    std::string phrase;
    int count;
  };

  int untouched_anchors(std::uint64_t mask) const;

  std::vector<std::string> tokens_;
  const MatchLexicon* lexicon_;
  FeatureOptions options_;
  std::vector<std::uint64_t> anchor_spans_;
  std::vector<std::pair<std::string, int>> ngrams_;  // distinct 1-2-grams with counts
  std::vector<Match> matches_;                       // lexicon entries found in the utterance
};

double dot(const WeightVector& weights, const FeatureVector& features);

}  // namespace zsp
