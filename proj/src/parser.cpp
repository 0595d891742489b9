#include "zsp/parser.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>

#include "zsp/errors.hpp"

namespace zsp {

namespace detail {

inline constexpr int kUniverse = 512;

/// Fixed-size bit set over the per-parse value universe.
struct Bits {
  std::array<std::uint64_t, kUniverse / 64> w{};

  void set(int i) { w[static_cast<std::size_t>(i >> 6)] |= std::uint64_t{1} << (i & 63); }
  bool test(int i) const { return (w[static_cast<std::size_t>(i >> 6)] >> (i & 63)) & 1U; }
  bool any() const {
    for (auto x : w) {
      if (x) return true;
    }
    return false;
  }
  int count() const {
    int n = 0;
    for (auto x : w) n += std::popcount(x);
    return n;
  }
  /// Exactly one bit set.
  bool single() const {
    bool seen = false;
    for (auto x : w) {
      if (!x) continue;
      if (seen || (x & (x - 1))) return false;
      seen = true;
    }
    return seen;
  }
  bool subset_of(const Bits& o) const {
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] & ~o.w[i]) return false;
    }
    return true;
  }
  bool intersects(const Bits& o) const {
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] & o.w[i]) return true;
    }
    return false;
  }
  Bits& operator|=(const Bits& o) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] |= o.w[i];
    return *this;
  }
  friend Bits operator&(Bits a, const Bits& b) {
    for (std::size_t i = 0; i < a.w.size(); ++i) a.w[i] &= b.w[i];
    return a;
  }
  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t wi = 0; wi < w.size(); ++wi) {
      std::uint64_t x = w[wi];
      while (x) {
        f(static_cast<int>(wi * 64) + std::countr_zero(x));
        x &= x - 1;
      }
    }
  }
  friend bool operator==(const Bits&, const Bits&) = default;
};

struct ChartNode {
  Category category = Category::EntitySet;
  LogicalForm::Kind kind = LogicalForm::Kind::ValueLit;
  LogicalForm::Extreme extreme = LogicalForm::Extreme::Max;
  int pred = -1;    // lexicon predicate of the rule (relation, type, symbol, method)
  int value = -1;   // universe index of a literal
  int method = -1;  // domain method index of a root
  std::array<int, 3> kids{-1, -1, -1};
  int nkids = 0;
  int chain_last = -1;  // rightmost conjunct of an intersection chain
  Bits den;
  FeatureSignature sig;
  double score = 0;
  std::string printed;
  MethodCall call;
  mutable LfPtr lf;
};

}  // namespace detail

class Chart {
 public:
  const Domain* domain = nullptr;
  const MatchLexicon* lexicon = nullptr;
  State state;
  std::vector<Value> universe;
  std::vector<Anchor> anchors;
  std::unique_ptr<FeatureContext> features;
  std::vector<detail::ChartNode> nodes;

  LfPtr materialize(int id) const {
    const auto& n = nodes[static_cast<std::size_t>(id)];
    if (n.lf) return n.lf;
    using K = LogicalForm::Kind;
    const auto& preds = lexicon->predicates();
    auto name = [&] { return preds[static_cast<std::size_t>(n.pred)].name; };
    switch (n.kind) {
      case K::ValueLit:
        n.lf = LogicalForm::value(universe[static_cast<std::size_t>(n.value)]);
        break;
      case K::TypeSet:
        n.lf = LogicalForm::type_set(name());
        break;
      case K::ReverseJoin:
        n.lf = LogicalForm::reverse_join(name(), materialize(n.kids[0]));
        break;
      case K::ForwardJoin:
        n.lf = LogicalForm::forward_join(name(), materialize(n.kids[0]));
        break;
      case K::Intersect:
        n.lf = LogicalForm::intersect(materialize(n.kids[0]), materialize(n.kids[1]));
        break;
      case K::Superlative:
        n.lf = LogicalForm::superlative(n.extreme, materialize(n.kids[0]), name());
        break;
      case K::Call: {
        std::vector<LfPtr> args;
        for (int i = 0; i < n.nkids; ++i) args.push_back(materialize(n.kids[static_cast<std::size_t>(i)]));
        n.lf = LogicalForm::call(n.call.method, std::move(args));
        break;
      }
    }
    return n.lf;
  }
};

// ---------------------------------------------------------------------------
// Anchors

namespace {

const std::vector<std::string> kNumberWords = {"zero",    "one",     "two",       "three",    "four",
                                               "five",    "six",     "seven",     "eight",    "nine",
                                               "ten",     "eleven",  "twelve",    "thirteen", "fourteen",
                                               "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
                                               "twenty"};
const std::vector<std::string> kOrdinalWords = {
    "",          "first",      "second",     "third",      "fourth",     "fifth",      "sixth",
    "seventh",   "eighth",     "ninth",      "tenth",      "eleventh",   "twelfth",    "thirteenth",
    "fourteenth", "fifteenth", "sixteenth", "seventeenth", "eighteenth", "nineteenth", "twentieth"};

}  // namespace

std::optional<int> number_word_value(std::string_view token) {
  if (token.empty()) return std::nullopt;
  std::size_t digits = 0;
  while (digits < token.size() && std::isdigit(static_cast<unsigned char>(token[digits]))) ++digits;
  if (digits > 0 && digits <= 9) {
    std::string_view rest = token.substr(digits);
    if (rest.empty() || rest == "st" || rest == "nd" || rest == "rd" || rest == "th") {
      return std::stoi(std::string(token.substr(0, digits)));
    }
    return std::nullopt;
  }
  for (std::size_t i = 0; i < kNumberWords.size(); ++i) {
    if (token == kNumberWords[i]) return static_cast<int>(i);
  }
  for (std::size_t i = 1; i < kOrdinalWords.size(); ++i) {
    if (token == kOrdinalWords[i]) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::vector<Anchor> find_anchors(const std::vector<std::string>& tokens, const State& state) {
  std::vector<Anchor> out;
  const int n = std::min<int>(static_cast<int>(tokens.size()), 64);
  auto span_mask = [](int b, int e) {
    std::uint64_t m = 0;
    for (int i = b; i < e; ++i) m |= std::uint64_t{1} << i;
    return m;
  };
  for (int i = 0; i < n; ++i) {
    if (auto v = number_word_value(tokens[static_cast<std::size_t>(i)])) {
      out.push_back({Value::integer(*v), i, i + 1, span_mask(i, i + 1)});
    }
  }
  for (int len = 1; len <= 4; ++len) {
    for (int i = 0; i + len <= n; ++i) {
      std::string joined;
      for (int j = i; j < i + len; ++j) joined += (j > i ? " " : "") + tokens[static_cast<std::size_t>(j)];
      ValueSet matches = state.match_text(joined);
      if (!matches.empty()) out.push_back({matches.front(), i, i + len, span_mask(i, i + len)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Derivation handles

LfPtr Derivation::logical_form() const { return chart_->materialize(node_); }
const std::string& Derivation::to_string() const { return chart_->nodes[static_cast<std::size_t>(node_)].printed; }
Category Derivation::category() const { return chart_->nodes[static_cast<std::size_t>(node_)].category; }
int Derivation::size() const { return chart_->nodes[static_cast<std::size_t>(node_)].sig.size; }
std::uint64_t Derivation::anchored_tokens() const {
  return chart_->nodes[static_cast<std::size_t>(node_)].sig.token_mask;
}
double Derivation::score() const { return chart_->nodes[static_cast<std::size_t>(node_)].score; }
const FeatureSignature& Derivation::signature() const { return chart_->nodes[static_cast<std::size_t>(node_)].sig; }
FeatureVector Derivation::features() const { return chart_->features->extract(signature()); }

std::vector<Derivation> Derivation::children() const {
  const auto& n = chart_->nodes[static_cast<std::size_t>(node_)];
  std::vector<Derivation> out;
  for (int i = 0; i < n.nkids; ++i) out.emplace_back(chart_, n.kids[static_cast<std::size_t>(i)]);
  return out;
}

const MethodCall& Derivation::call() const {
  const auto& n = chart_->nodes[static_cast<std::size_t>(node_)];
  if (n.category != Category::Root) throw std::logic_error("call() on a non-root derivation");
  return n.call;
}

ValueSet Derivation::denotation() const {
  const auto& n = chart_->nodes[static_cast<std::size_t>(node_)];
  ValueSet out;
  n.den.for_each([&](int i) { out.push_back(chart_->universe[static_cast<std::size_t>(i)]); });
  return out;
}

const FeatureContext& CandidateSet::feature_context() const { return *chart->features; }

ParseRequest make_request(const Domain& domain, const MatchLexicon& lexicon, const State& state,
                          std::string_view utterance, FeatureOptions features) {
  return ParseRequest{&domain, &lexicon, state, tokenize(utterance), features};
}

// ---------------------------------------------------------------------------
// Beam search

namespace {

using detail::Bits;
using detail::ChartNode;
using K = LogicalForm::Kind;

struct RelationTable {
  int pred = -1;
  std::string name;
  bool entity_objects = false;
  bool integer_objects = false;
  std::vector<Bits> fwd;  // by subject
  std::vector<Bits> rev;  // by object
  std::vector<std::uint8_t> has_key;
  std::vector<std::int64_t> max_key;
  std::vector<std::int64_t> min_key;
};

struct ParamCheck {
  Bits allowed;
  bool single = false;

  bool ok(const Bits& den) const { return den.subset_of(allowed) && (!single || den.single()); }
};

struct Proposal {
  double score = 0;
  std::array<int, 3> kids{-1, -1, -1};
  int op = -1;  // relation table index or method index
  K kind = K::ValueLit;
  LogicalForm::Extreme extreme = LogicalForm::Extreme::Max;
};

/// Printed text of a proposal as string pieces.
struct Pieces {
  std::array<std::string_view, 10> p;
  int n = 0;
  void add(std::string_view s) { p[static_cast<std::size_t>(n++)] = s; }
};

class Builder {
 public:
  Builder(const ParseRequest& req, const ParserConfig& config, const WeightVector& weights)
      : req_(req), config_(config) {
    if (req.domain == nullptr || req.lexicon == nullptr) throw std::invalid_argument("parse request without domain");
    if (config.max_rule_applications < 1 || config.beam_size < 0) {
      throw std::invalid_argument("parser limits must be positive");
    }
    chart_ = std::make_shared<Chart>();
    chart_->domain = req.domain;
    chart_->lexicon = req.lexicon;
    chart_->state = req.state;
    chart_->anchors = find_anchors(req.tokens, req.state);
    std::vector<std::uint64_t> spans;
    for (const auto& a : chart_->anchors) {
      if (std::find(spans.begin(), spans.end(), a.mask) == spans.end()) spans.push_back(a.mask);
    }
    FeatureOptions fo = req.features;
    fo.max_size = config.max_rule_applications;
    chart_->features = std::make_unique<FeatureContext>(req.tokens, *req.lexicon, fo, std::move(spans));
    scorer_ = chart_->features->scorer(weights);
    build_universe();
    build_tables();
  }

  CandidateSet run() {
    const int max = config_.max_rule_applications;
    set_cells_.assign(static_cast<std::size_t>(max + 1), {});
    root_cells_.assign(static_cast<std::size_t>(max + 1), {});
    leaves();
    for (int k = 2; k <= max; ++k) {
      if (k >= 3) fill_set_cell(k);
      fill_root_cell(k);
    }
    CandidateSet out;
    out.chart = chart_;
    for (int k = 1; k <= max; ++k) {
      for (int id : root_cells_[static_cast<std::size_t>(k)]) out.roots.emplace_back(chart_, id);
    }
    return out;
  }

 private:
  ChartNode& node(int id) { return chart_->nodes[static_cast<std::size_t>(id)]; }

  int value_index(const Value& v) const {
    auto it = std::lower_bound(chart_->universe.begin(), chart_->universe.end(), v);
    return it != chart_->universe.end() && *it == v ? static_cast<int>(it - chart_->universe.begin()) : -1;
  }

  void build_universe() {
    std::vector<Value> all(req_.state.entities().begin(), req_.state.entities().end());
    for (const Triple& t : req_.state.triples()) {
      if (!t.object.is_entity()) all.push_back(t.object);
    }
    for (const auto& s : req_.domain->symbols()) all.push_back(Value::symbol(s));
    for (const auto& a : chart_->anchors) all.push_back(a.value);
    std::stable_sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    if (all.size() > static_cast<std::size_t>(detail::kUniverse)) {
      throw std::length_error("state has more than 512 distinct values");
    }
    chart_->universe = std::move(all);
  }

  void build_tables() {
    const auto& U = chart_->universe;
    const std::size_t n = U.size();
    const MatchLexicon& lex = *req_.lexicon;
    for (std::size_t i = 0; i < n; ++i) {
      if (U[i].is_integer()) int_bits_.set(static_cast<int>(i));
      if (U[i].is_symbol()) symbol_bits_.set(static_cast<int>(i));
    }
    std::map<std::string, int, std::less<>> rel_index;
    for (const auto& r : req_.domain->relations()) {
      if (r.name == kTypeRelation) continue;
      RelationTable t;
      t.pred = lex.index_of(r.name, PredicateKind::Relation);
      t.name = r.name;
      t.entity_objects = r.object_kind == ObjectKind::Entity;
      t.integer_objects = r.object_kind == ObjectKind::Integer;
      t.fwd.assign(n, {});
      t.rev.assign(n, {});
      t.has_key.assign(n, 0);
      t.max_key.assign(n, 0);
      t.min_key.assign(n, 0);
      rel_index[r.name] = static_cast<int>(rels_.size());
      rels_.push_back(std::move(t));
    }
    for (const Triple& tr : req_.state.triples()) {
      auto it = rel_index.find(tr.relation);
      if (it == rel_index.end()) continue;
      RelationTable& t = rels_[static_cast<std::size_t>(it->second)];
      int s = value_index(tr.subject);
      int o = value_index(tr.object);
      if (s < 0 || o < 0) continue;
      t.fwd[static_cast<std::size_t>(s)].set(o);
      t.rev[static_cast<std::size_t>(o)].set(s);
      if (tr.object.is_integer()) {
        auto si = static_cast<std::size_t>(s);
        std::int64_t k = tr.object.as_int();
        if (!t.has_key[si]) {
          t.max_key[si] = t.min_key[si] = k;
          t.has_key[si] = 1;
        } else {
          t.max_key[si] = std::max(t.max_key[si], k);
          t.min_key[si] = std::min(t.min_key[si], k);
        }
      }
    }
    for (const auto& ty : req_.domain->entity_types()) {
      Bits b;
      for (const Value& e : req_.state.entities_of_type(ty.name)) b.set(value_index(e));
      type_bits_[ty.name] = b;
    }
    argmax_pred_ = lex.index_of(kArgmax, PredicateKind::Operator);
    argmin_pred_ = lex.index_of(kArgmin, PredicateKind::Operator);
    for (const auto& m : req_.domain->methods()) {
      if (m.parameters.size() > 3) throw std::invalid_argument("methods with more than 3 parameters");
      std::vector<ParamCheck> checks;
      for (const auto& p : m.parameters) {
        ParamCheck c;
        switch (p.kind) {
          case ParameterSpec::Kind::EntityCollection:
          case ParameterSpec::Kind::SingleEntity: {
            auto it = type_bits_.find(p.entity_type);
            if (it != type_bits_.end()) c.allowed = it->second;
            c.single = p.kind == ParameterSpec::Kind::SingleEntity;
            break;
          }
          case ParameterSpec::Kind::Integer:
            c.allowed = int_bits_;
            c.single = true;
            break;
          case ParameterSpec::Kind::Enum:
            for (const auto& s : p.allowed) {
              if (int i = value_index(Value::symbol(s)); i >= 0) c.allowed.set(i);
            }
            c.single = true;
            break;
        }
        checks.push_back(c);
      }
      method_checks_.push_back(std::move(checks));
      method_preds_.push_back(lex.index_of(m.name, PredicateKind::Method));
    }
  }

  static void add_pred(FeatureSignature& sig, int pred) {
    if (pred >= 0) sig.predicates.set(static_cast<std::size_t>(pred));
  }

  int push_node(ChartNode n) {
    chart_->nodes.push_back(std::move(n));
    return static_cast<int>(chart_->nodes.size()) - 1;
  }

  void leaves() {
    std::vector<ChartNode> cands;
    for (const Anchor& a : chart_->anchors) {
      int v = value_index(a.value);
      bool seen = std::any_of(cands.begin(), cands.end(), [&](const ChartNode& c) { return c.value == v; });
      if (seen) continue;
      ChartNode n;
      n.category = Category::Value;
      n.kind = K::ValueLit;
      n.value = v;
      if (a.value.is_text()) {
        for (const Value& m : req_.state.match_text(a.value.str())) n.den.set(value_index(m));
      } else {
        n.den.set(v);
      }
      n.sig.anchored_values = 1;
      n.sig.token_mask = a.mask;
      n.sig.size = 1;
      n.printed = format_value_literal(a.value);
      cands.push_back(std::move(n));
    }
    for (const auto& s : req_.domain->symbols()) {
      ChartNode n;
      n.category = Category::Value;
      n.kind = K::ValueLit;
      n.value = value_index(Value::symbol(s));
      n.pred = req_.lexicon->index_of(s, PredicateKind::Value);
      n.den.set(n.value);
      add_pred(n.sig, n.pred);
      n.sig.size = 1;
      n.printed = s;
      cands.push_back(std::move(n));
    }
    for (const auto& ty : req_.domain->entity_types()) {
      ChartNode n;
      n.kind = K::TypeSet;
      n.pred = req_.lexicon->index_of(ty.name, PredicateKind::Type);
      n.den = type_bits_[ty.name];
      if (!n.den.any()) continue;
      add_pred(n.sig, n.pred);
      n.sig.size = 1;
      n.printed = "R[type]." + ty.name;
      cands.push_back(std::move(n));
    }
    for (auto& n : cands) n.score = scorer_.score(n.sig);
    // Leaves are few; order them like every other cell.
    std::vector<std::size_t> order(cands.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (cands[a].score != cands[b].score) return cands[a].score > cands[b].score;
      return cands[a].printed < cands[b].printed;
    });
    std::size_t keep = order.size();
    if (config_.beam_size != ParserConfig::kUnbounded) keep = std::min(keep, static_cast<std::size_t>(config_.beam_size));
    for (std::size_t i = 0; i < keep; ++i) {
      ChartNode& n = cands[order[i]];
      int id = push_node(std::move(n));
      node(id).chain_last = id;
      set_cells_[1].push_back(id);
    }
  }

  // -- denotations -------------------------------------------------------

  Bits reverse_join(const RelationTable& r, const Bits& child) const {
    Bits out;
    child.for_each([&](int o) { out |= r.rev[static_cast<std::size_t>(o)]; });
    return out;
  }

  Bits forward_join(const RelationTable& r, const Bits& child) const {
    Bits out;
    child.for_each([&](int s) { out |= r.fwd[static_cast<std::size_t>(s)]; });
    return out;
  }

  Bits superlative(const RelationTable& r, LogicalForm::Extreme ext, const Bits& set) const {
    bool want_max = ext == LogicalForm::Extreme::Max;
    bool found = false;
    std::int64_t best = 0;
    set.for_each([&](int s) {
      auto si = static_cast<std::size_t>(s);
      if (!r.has_key[si]) return;
      std::int64_t k = want_max ? r.max_key[si] : r.min_key[si];
      if (!found || (want_max ? k > best : k < best)) best = k;
      found = true;
    });
    Bits out;
    if (!found) return out;
    set.for_each([&](int s) {
      auto si = static_cast<std::size_t>(s);
      if (r.has_key[si] && (want_max ? r.max_key[si] : r.min_key[si]) == best) out.set(s);
    });
    return out;
  }

  Bits denotation(const Proposal& p) const {
    const auto& nodes = chart_->nodes;
    auto kid = [&](int i) -> const Bits& { return nodes[static_cast<std::size_t>(p.kids[static_cast<std::size_t>(i)])].den; };
    switch (p.kind) {
      case K::ReverseJoin: return reverse_join(rels_[static_cast<std::size_t>(p.op)], kid(0));
      case K::ForwardJoin: return forward_join(rels_[static_cast<std::size_t>(p.op)], kid(0));
      case K::Superlative: return superlative(rels_[static_cast<std::size_t>(p.op)], p.extreme, kid(0));
      case K::Intersect: return kid(0) & kid(1);
      default: return {};
    }
  }

  FeatureSignature signature(const Proposal& p, int size) const {
    FeatureSignature sig;
    int n = p.kind == K::Call ? static_cast<int>(method_checks_[static_cast<std::size_t>(p.op)].size())
                              : (p.kind == K::Intersect ? 2 : 1);
    for (int i = 0; i < n; ++i) {
      const auto& c = chart_->nodes[static_cast<std::size_t>(p.kids[static_cast<std::size_t>(i)])].sig;
      sig.predicates |= c.predicates;
      sig.anchored_values += c.anchored_values;
      sig.token_mask |= c.token_mask;
    }
    switch (p.kind) {
      case K::ReverseJoin:
      case K::ForwardJoin:
        add_pred(sig, rels_[static_cast<std::size_t>(p.op)].pred);
        break;
      case K::Superlative:
        add_pred(sig, rels_[static_cast<std::size_t>(p.op)].pred);
        add_pred(sig, p.extreme == LogicalForm::Extreme::Max ? argmax_pred_ : argmin_pred_);
        break;
      case K::Call:
        add_pred(sig, method_preds_[static_cast<std::size_t>(p.op)]);
        break;
      default:
        break;
    }
    sig.size = size;
    return sig;
  }

  void pieces(const Proposal& p, Pieces& out) const {
    const auto& nodes = chart_->nodes;
    auto kid = [&](int i) -> const ChartNode& { return nodes[static_cast<std::size_t>(p.kids[static_cast<std::size_t>(i)])]; };
    auto wrapped = [&](const ChartNode& c) {
      if (c.kind == K::ValueLit || c.kind == K::TypeSet) {
        out.add(c.printed);
      } else {
        out.add("(");
        out.add(c.printed);
        out.add(")");
      }
    };
    switch (p.kind) {
      case K::ReverseJoin:
        out.add("R[");
        out.add(rels_[static_cast<std::size_t>(p.op)].name);
        out.add("].");
        wrapped(kid(0));
        break;
      case K::ForwardJoin:
        out.add(rels_[static_cast<std::size_t>(p.op)].name);
        out.add(".");
        wrapped(kid(0));
        break;
      case K::Superlative:
        out.add(p.extreme == LogicalForm::Extreme::Max ? "argmax(" : "argmin(");
        out.add(kid(0).printed);
        out.add(", R[");
        out.add(rels_[static_cast<std::size_t>(p.op)].name);
        out.add("])");
        break;
      case K::Intersect:
        out.add("and(");
        out.add(kid(0).printed);
        out.add(", ");
        out.add(kid(1).printed);
        out.add(")");
        break;
      case K::Call: {
        const auto& m = req_.domain->methods()[static_cast<std::size_t>(p.op)];
        out.add(m.name);
        out.add("(");
        for (std::size_t i = 0; i < m.parameters.size(); ++i) {
          if (i) out.add(", ");
          out.add(kid(static_cast<int>(i)).printed);
        }
        out.add(")");
        break;
      }
      default:
        break;
    }
  }

  /// Indices of the proposals kept by the beam, best first. Equal scores are
  /// ordered by rule, relation and child position in the chart.
  std::vector<std::size_t> select(const std::vector<Proposal>& props) const {
    std::vector<std::size_t> idx(props.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (config_.beam_size == ParserConfig::kUnbounded) return idx;

    auto structural = [&](std::size_t a, std::size_t b) {
      const Proposal& x = props[a];
      const Proposal& y = props[b];
      return std::tie(x.kind, x.op, x.extreme, x.kids) < std::tie(y.kind, y.op, y.extreme, y.kids);
    };
    auto better = [&](std::size_t a, std::size_t b) {
      if (props[a].score != props[b].score) return props[a].score > props[b].score;
      return structural(a, b);
    };
    const auto beam = static_cast<std::size_t>(config_.beam_size);
    if (idx.size() > beam) {
      std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(beam - 1), idx.end(), better);
      idx.resize(beam);
    }
    std::sort(idx.begin(), idx.end(), better);
    return idx;
  }

  int materialize(const Proposal& p, int size, Category cat) {
    ChartNode n;
    n.category = cat;
    n.kind = p.kind;
    n.extreme = p.extreme;
    n.kids = p.kids;
    n.nkids = p.kind == K::Call ? static_cast<int>(method_checks_[static_cast<std::size_t>(p.op)].size())
                                : (p.kind == K::Intersect ? 2 : 1);
    n.sig = signature(p, size);
    n.score = p.score;
    Pieces pc;
    pieces(p, pc);
    for (int i = 0; i < pc.n; ++i) n.printed += pc.p[static_cast<std::size_t>(i)];
    if (p.kind == K::Call) {
      n.method = p.op;
      n.pred = method_preds_[static_cast<std::size_t>(p.op)];
      n.call.method = req_.domain->methods()[static_cast<std::size_t>(p.op)].name;
      for (int i = 0; i < n.nkids; ++i) {
        ValueSet arg;
        node(p.kids[static_cast<std::size_t>(i)]).den.for_each(
            [&](int v) { arg.push_back(chart_->universe[static_cast<std::size_t>(v)]); });
        n.call.arguments.push_back(std::move(arg));
      }
    } else {
      n.den = denotation(p);
      if (p.kind != K::Intersect) n.pred = rels_[static_cast<std::size_t>(p.op)].pred;
    }
    int id = push_node(std::move(n));
    node(id).chain_last = p.kind == K::Intersect ? p.kids[1] : id;
    return id;
  }

  void fill_set_cell(int k) {
    std::vector<Proposal> props;
    auto propose = [&](Proposal p) {
      p.score = scorer_.score(signature(p, k));
      props.push_back(p);
    };
    for (int child : set_cells_[static_cast<std::size_t>(k - 2)]) {
      const Bits& cd = node(child).den;
      for (std::size_t r = 0; r < rels_.size(); ++r) {
        const RelationTable& rt = rels_[r];
        if (reverse_join(rt, cd).any()) propose({0, {child, -1, -1}, static_cast<int>(r), K::ReverseJoin});
        if (rt.entity_objects && forward_join(rt, cd).any()) {
          propose({0, {child, -1, -1}, static_cast<int>(r), K::ForwardJoin});
        }
        if (rt.integer_objects) {
          for (auto ext : {LogicalForm::Extreme::Max, LogicalForm::Extreme::Min}) {
            if (superlative(rt, ext, cd).any()) propose({0, {child, -1, -1}, static_cast<int>(r), K::Superlative, ext});
          }
        }
      }
    }
    for (int i = 1; i <= k - 2; ++i) {
      int j = k - 1 - i;
      for (int a : set_cells_[static_cast<std::size_t>(i)]) {
        const ChartNode& na = node(a);
        for (int b : set_cells_[static_cast<std::size_t>(j)]) {
          const ChartNode& nb = node(b);
          if (nb.kind == K::Intersect || b <= na.chain_last) continue;
          if (na.sig.token_mask & nb.sig.token_mask) continue;
          if (!na.den.intersects(nb.den)) continue;
          propose({0, {a, b, -1}, -1, K::Intersect});
        }
      }
    }
    for (std::size_t i : select(props)) {
      set_cells_[static_cast<std::size_t>(k)].push_back(materialize(props[i], k, Category::EntitySet));
    }
  }

  void fill_root_cell(int k) {
    std::vector<Proposal> props;
    const auto& methods = req_.domain->methods();
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const auto& checks = method_checks_[m];
      Proposal p;
      p.kind = K::Call;
      p.op = static_cast<int>(m);
      enumerate_args(checks, 0, k - 2, 0, p, props, k);
    }
    for (std::size_t i : select(props)) {
      root_cells_[static_cast<std::size_t>(k)].push_back(materialize(props[i], k, Category::Root));
    }
  }

  void enumerate_args(const std::vector<ParamCheck>& checks, std::size_t pos, int budget, std::uint64_t used,
                      Proposal& p, std::vector<Proposal>& props, int k) {
    if (pos == checks.size()) {
      if (budget == 0) {
        p.score = scorer_.score(signature(p, k));
        props.push_back(p);
      }
      return;
    }
    std::size_t remaining = checks.size() - pos - 1;
    for (int s = 1; s <= budget - static_cast<int>(remaining); ++s) {
      for (int a : set_cells_[static_cast<std::size_t>(s)]) {
        const ChartNode& na = node(a);
        if (na.sig.token_mask & used) continue;
        if (!checks[pos].ok(na.den)) continue;
        p.kids[pos] = a;
        enumerate_args(checks, pos + 1, budget - s, used | na.sig.token_mask, p, props, k);
      }
    }
    p.kids[pos] = -1;
  }

  const ParseRequest& req_;
  const ParserConfig& config_;
  std::shared_ptr<Chart> chart_;
  FeatureContext::Scorer scorer_;
  std::vector<RelationTable> rels_;
  std::map<std::string, Bits, std::less<>> type_bits_;
  Bits int_bits_;
  Bits symbol_bits_;
  int argmax_pred_ = -1;
  int argmin_pred_ = -1;
  std::vector<std::vector<ParamCheck>> method_checks_;
  std::vector<int> method_preds_;
  std::vector<std::vector<int>> set_cells_;
  std::vector<std::vector<int>> root_cells_;
};

}  // namespace

CandidateSet generate_candidates(const ParseRequest& request, const ParserConfig& config,
                                 const WeightVector& weights) {
  return Builder(request, config, weights).run();
}

// ---------------------------------------------------------------------------
// Filtering and prediction

const Invocation& InvocationCache::invoke(const Domain& domain, const State& state, const MethodCall& call) {
  auto it = cache_.find(call);
  if (it != cache_.end()) return it->second;
  ++invocations_;
  Invocation out;
  try {
    out.result = domain.invoke(state, call);
    out.changed = !states_equal(state, *out.result);
  } catch (const DomainException& e) {
    out.error = e.what();
  }
  return cache_.emplace(call, std::move(out)).first->second;
}

std::vector<Derivation> filter_by_application_logic(const std::vector<Derivation>& candidates, const State& state,
                                                    const Domain& domain, InvocationCache* cache) {
  InvocationCache local;
  InvocationCache& memo = cache ? *cache : local;
  std::vector<Derivation> out;
  for (const Derivation& d : candidates) {
    if (memo.invoke(domain, state, d.call()).changed) out.push_back(d);
  }
  return out;
}

Prediction predict(const ParseRequest& request, const ParserConfig& config, const WeightVector& weights,
                   PredictOptions options, InvocationCache* cache) {
  InvocationCache local;
  InvocationCache& memo = cache ? *cache : local;
  Prediction out;
  out.candidates = generate_candidates(request, config, weights);
  out.considered = options.use_filter
                       ? filter_by_application_logic(out.candidates.roots, request.state, *request.domain, &memo)
                       : out.candidates.roots;
  if (out.considered.empty()) return out;
  out.best_score = -std::numeric_limits<double>::infinity();
  for (const auto& d : out.considered) out.best_score = std::max(out.best_score, d.score());
  for (const auto& d : out.considered) {
    if (d.score() == out.best_score) out.best.push_back(d);
  }
  const Invocation& inv = memo.invoke(*request.domain, request.state, out.best.front().call());
  if (inv.result) out.state = inv.result;
  return out;
}

}  // namespace zsp
