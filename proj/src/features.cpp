#include "zsp/features.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "zsp/knowledge.hpp"

namespace zsp {

std::vector<std::string> tokenize(std::string_view utterance) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char c : utterance) {
    auto u = static_cast<unsigned char>(c);
    if (std::isdigit(u)) {
      if (!cur.empty() && !std::isdigit(static_cast<unsigned char>(cur.back())) && cur.back() != '\'') {
        // letters directly followed by digits start a new token
        flush();
      }
      cur += c;
    } else if (std::isalpha(u) || c == '\'') {
      cur += static_cast<char>(std::tolower(u));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::string_view to_string(PredicateKind kind) {
  switch (kind) {
    case PredicateKind::Method: return "method";
    case PredicateKind::Relation: return "relation";
    case PredicateKind::Type: return "type";
    case PredicateKind::Operator: return "operator";
    case PredicateKind::Value: return "value";
  }
  return "?";
}

std::string_view to_string(PhraseSource source) {
  return source == PhraseSource::Description ? "desc" : "name";
}

std::vector<std::string> split_identifier(std::string_view name) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < name.size(); ++i) {
    auto c = static_cast<unsigned char>(name[i]);
    if (!std::isalnum(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    bool boundary = std::isupper(c) && !cur.empty() &&
                    (std::islower(static_cast<unsigned char>(name[i - 1])) ||
                     (i + 1 < name.size() && std::islower(static_cast<unsigned char>(name[i + 1]))));
    if (boundary) {
      out.push_back(std::move(cur));
      cur.clear();
    }
    cur += static_cast<char>(std::tolower(c));
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

int MatchLexicon::index_of(std::string_view name, PredicateKind kind) const {
  for (std::size_t i = 0; i < predicates_.size(); ++i) {
    if (predicates_[i].kind == kind && predicates_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> MatchLexicon::phrases(std::string_view name, PredicateKind kind) const {
  int q = index_of(name, kind);
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (e.predicate != q) continue;
    std::string joined;
    for (const auto& t : e.phrase) joined += (joined.empty() ? "" : " ") + t;
    if (std::find(out.begin(), out.end(), joined) == out.end()) out.push_back(joined);
  }
  return out;
}

int MatchLexicon::add_predicate(std::string name, PredicateKind kind) {
  int existing = index_of(name, kind);
  if (existing >= 0) return existing;
  if (predicates_.size() >= static_cast<std::size_t>(kMaxPredicates)) {
    throw std::length_error("more than 128 predicates in one domain");
  }
  predicates_.push_back({std::move(name), kind});
  return static_cast<int>(predicates_.size()) - 1;
}

void MatchLexicon::add_phrase(int predicate, std::string_view phrase, PhraseSource source) {
  LexiconEntry e{tokenize(phrase), predicate, source};
  if (e.phrase.empty()) return;
  for (const auto& x : entries_) {
    if (x.predicate == e.predicate && x.source == e.source && x.phrase == e.phrase) return;
  }
  entries_.push_back(std::move(e));
}

namespace {

const std::set<std::string, std::less<>> kNameStopwords = {"a", "an", "by", "in", "new", "of", "the", "to"};

const std::vector<std::string> kOrdinals = {"first",     "second",     "third",      "fourth",      "fifth",
                                            "sixth",     "seventh",    "eighth",     "ninth",       "tenth",
                                            "eleventh",  "twelfth",    "thirteenth", "fourteenth",  "fifteenth",
                                            "sixteenth", "seventeenth", "eighteenth", "nineteenth", "twentieth"};

void add_name_tokens(MatchLexicon& lex, int q, std::string_view name) {
  for (const auto& t : split_identifier(name)) {
    if (!kNameStopwords.contains(t)) lex.add_phrase(q, t, PhraseSource::Name);
  }
}

}  // namespace

MatchLexicon build_lexicon(const Domain& domain) {
  MatchLexicon lex;
  for (const auto& m : domain.methods()) {
    int q = lex.add_predicate(m.name, PredicateKind::Method);
    for (const auto& p : m.description_phrases) lex.add_phrase(q, p, PhraseSource::Description);
    add_name_tokens(lex, q, m.name);
  }
  for (const auto& r : domain.relations()) {
    int q = lex.add_predicate(r.name, PredicateKind::Relation);
    for (const auto& p : r.phrases) lex.add_phrase(q, p, PhraseSource::Name);
    add_name_tokens(lex, q, r.name);
    if (r.name == kIndexRelation) {
      for (const auto& o : kOrdinals) lex.add_phrase(q, o, PhraseSource::Name);
    }
  }
  for (const auto& t : domain.entity_types()) {
    int q = lex.add_predicate(t.name, PredicateKind::Type);
    for (const auto& p : t.phrases) lex.add_phrase(q, p, PhraseSource::Name);
    add_name_tokens(lex, q, t.name);
  }
  for (const auto& s : domain.symbols()) {
    int q = lex.add_predicate(s, PredicateKind::Value);
    lex.add_phrase(q, to_lower(s), PhraseSource::Name);
  }
  int amax = lex.add_predicate(std::string(kArgmax), PredicateKind::Operator);
  for (const char* p : {"largest", "longest", "biggest", "most", "last", "highest"}) {
    lex.add_phrase(amax, p, PhraseSource::Name);
  }
  int amin = lex.add_predicate(std::string(kArgmin), PredicateKind::Operator);
  for (const char* p : {"smallest", "shortest", "first", "least", "lowest"}) {
    lex.add_phrase(amin, p, PhraseSource::Name);
  }
  return lex;
}

namespace {

std::string strip_suffix(std::string t) {
  auto ends = [&](std::string_view s) { return t.size() > s.size() && t.ends_with(s); };
  if (t.size() > 5 && ends("ing")) {
    t.resize(t.size() - 3);
  } else if (t.size() > 4 && ends("ed")) {
    t.resize(t.size() - 2);
  } else if (t.size() > 3 && ends("s") && !ends("ss")) {
    t.pop_back();
  }
  return t;
}

int count_occurrences(const std::vector<std::string>& tokens, const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > tokens.size()) return 0;
  int n = 0;
  for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
    if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) ++n;
  }
  return n;
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) out += (out.empty() ? "" : " ") + w;
  return out;
}

double weight_of(const WeightVector& w, const std::string& key) {
  auto it = w.find(key);
  return it == w.end() ? 0.0 : it->second;
}

std::string any_key(std::string_view head, PredicateKind kind, PhraseSource source) {
  return std::string(head) + "|" + std::string(to_string(kind)) + "|" + std::string(to_string(source));
}

}  // namespace

FeatureContext::FeatureContext(std::vector<std::string> tokens, const MatchLexicon& lexicon, FeatureOptions options,
                               std::vector<std::uint64_t> anchor_spans)
    : tokens_(std::move(tokens)), lexicon_(&lexicon), options_(options), anchor_spans_(std::move(anchor_spans)) {
  std::vector<std::string> toks = tokens_;
  if (options_.strip_suffixes) {
    for (auto& t : toks) t = strip_suffix(t);
  }
  std::map<std::string, int> grams;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    ++grams[toks[i]];
    if (i + 1 < toks.size()) ++grams[toks[i] + " " + toks[i + 1]];
  }
  ngrams_.assign(grams.begin(), grams.end());

  for (const auto& e : lexicon.entries()) {
    if (!options_.new_features && e.source == PhraseSource::Description) continue;
    std::vector<std::string> phrase = e.phrase;
    if (options_.strip_suffixes) {
      for (auto& t : phrase) t = strip_suffix(t);
    }
    int c = count_occurrences(toks, phrase);
    if (c == 0) continue;
    std::string joined = join(phrase);
    bool dup = std::any_of(matches_.begin(), matches_.end(), [&](const Match& m) {
      return m.predicate == e.predicate && m.source == e.source && m.phrase == joined;
    });
    if (!dup) matches_.push_back({e.predicate, e.source, joined, c});
  }
}

int FeatureContext::untouched_anchors(std::uint64_t mask) const {
  int n = 0;
  for (auto span : anchor_spans_) n += (span & mask) == 0;
  return n;
}

FeatureVector FeatureContext::extract(const FeatureSignature& sig) const {
  FeatureVector f;
  const auto& preds = lexicon_->predicates();
  for (std::size_t q = 0; q < preds.size(); ++q) {
    if (!sig.predicates.test(q)) continue;
    for (const auto& [p, c] : ngrams_) f["cooc|" + p + "|" + preds[q].name] += c;
  }
  for (const auto& m : matches_) {
    const Predicate& q = preds[static_cast<std::size_t>(m.predicate)];
    if (sig.predicates.test(static_cast<std::size_t>(m.predicate))) {
      f[any_key("cooc-any", q.kind, m.source)] += m.count;
    } else {
      f["missing|" + m.phrase + "|" + q.name] = 1;
      f[any_key("missing-any", q.kind, m.source)] += 1;
    }
  }
  if (sig.anchored_values > 0) f["cooc-any|value|anchor"] = sig.anchored_values;
  if (int u = untouched_anchors(sig.token_mask); u > 0) f["missing-any|value|anchor"] = u;
  if (options_.new_features) {
    for (int n = 2; n < sig.size && n <= options_.max_size; ++n) f["size>" + std::to_string(n)] = 1;
  }
  return f;
}

FeatureContext::Scorer FeatureContext::scorer(const WeightVector& weights) const {
  Scorer s;
  s.ctx_ = this;
  const auto& preds = lexicon_->predicates();
  s.delta_.assign(preds.size(), 0.0);
  for (std::size_t q = 0; q < preds.size(); ++q) {
    for (const auto& [p, c] : ngrams_) s.delta_[q] += c * weight_of(weights, "cooc|" + p + "|" + preds[q].name);
  }
  std::set<std::pair<std::string, int>> missing_pairs;
  for (const auto& m : matches_) {
    const Predicate& q = preds[static_cast<std::size_t>(m.predicate)];
    double w_missing_any = weight_of(weights, any_key("missing-any", q.kind, m.source));
    s.delta_[static_cast<std::size_t>(m.predicate)] +=
        m.count * weight_of(weights, any_key("cooc-any", q.kind, m.source)) - w_missing_any;
    s.base_ += w_missing_any;
    if (missing_pairs.insert({m.phrase, m.predicate}).second) {
      double w = weight_of(weights, "missing|" + m.phrase + "|" + q.name);
      s.base_ += w;
      s.delta_[static_cast<std::size_t>(m.predicate)] -= w;
    }
  }
  s.anchor_used_ = weight_of(weights, "cooc-any|value|anchor");
  s.anchor_untouched_ = weight_of(weights, "missing-any|value|anchor");
  s.size_.assign(static_cast<std::size_t>(std::max(options_.max_size, 1) + 2), 0.0);
  for (std::size_t size = 1; size < s.size_.size(); ++size) {
    double acc = 0;
    if (options_.new_features) {
      for (int n = 2; n < static_cast<int>(size) && n <= options_.max_size; ++n) {
        acc += weight_of(weights, "size>" + std::to_string(n));
      }
    }
    s.size_[size] = acc;
  }
  return s;
}

double FeatureContext::Scorer::score(const FeatureSignature& sig) const {
  double total = base_;
  for (std::size_t q = 0; q < delta_.size(); ++q) {
    if (sig.predicates.test(q)) total += delta_[q];
  }
  total += sig.anchored_values * anchor_used_;
  total += ctx_->untouched_anchors(sig.token_mask) * anchor_untouched_;
  auto idx = static_cast<std::size_t>(std::clamp(sig.size, 0, static_cast<int>(size_.size()) - 1));
  return total + size_[idx];
}

double dot(const WeightVector& weights, const FeatureVector& features) {
  double total = 0;
  if (weights.size() < features.size()) {
    for (const auto& [k, w] : weights) {
      auto it = features.find(k);
      if (it != features.end()) total += w * it->second;
    }
  } else {
    for (const auto& [k, v] : features) {
      auto it = weights.find(k);
      if (it != weights.end()) total += it->second * v;
    }
  }
  return total;
}

}  // namespace zsp
