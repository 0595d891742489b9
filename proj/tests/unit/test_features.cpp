#include "doctest.h"

#include "zsp/builtin_domains.hpp"
#include "zsp/features.hpp"

using namespace zsp;

namespace {

FeatureSignature with_predicates(const MatchLexicon& lex, std::initializer_list<std::pair<const char*, PredicateKind>> ps) {
  FeatureSignature sig;
  for (const auto& [name, kind] : ps) {
    int q = lex.index_of(name, kind);
    REQUIRE(q >= 0);
    sig.predicates.set(static_cast<std::size_t>(q));
  }
  return sig;
}

}  // namespace

TEST_CASE("tokenize lowercases and splits on punctuation") {
  CHECK(tokenize("Turn OFF the light, in room-2!") ==
        std::vector<std::string>{"turn", "off", "the", "light", "in", "room", "2"});
  CHECK(tokenize("bob's 120th") == std::vector<std::string>{"bob's", "120th"});
  CHECK(tokenize("  ").empty());
}

TEST_CASE("identifiers split on camel case") {
  CHECK(split_identifier("sizeInBytes") == std::vector<std::string>{"size", "in", "bytes"});
  CHECK(split_identifier("turnLightOff") == std::vector<std::string>{"turn", "light", "off"});
  CHECK(split_identifier("index") == std::vector<std::string>{"index"});
}

TEST_CASE("the lexicon holds description and name phrases") {
  auto d = make_lighting_domain();
  MatchLexicon lex = build_lexicon(*d);
  auto phrases = lex.phrases("turnLightOff", PredicateKind::Method);
  CHECK(std::count(phrases.begin(), phrases.end(), "turn off") == 1);
  CHECK(std::count(phrases.begin(), phrases.end(), "light") == 1);
  CHECK(lex.index_of("Room", PredicateKind::Type) >= 0);
  CHECK(lex.index_of("ON", PredicateKind::Value) >= 0);
  CHECK(lex.index_of(kArgmax, PredicateKind::Operator) >= 0);
  CHECK(lex.index_of("nothing", PredicateKind::Relation) == -1);
}

TEST_CASE("co-occurrence features pair every 1-2-gram with each present predicate") {
  auto d = make_lighting_domain();
  MatchLexicon lex = build_lexicon(*d);
  FeatureContext ctx(tokenize("turn off the light"), lex, FeatureOptions{});
  FeatureVector f = ctx.extract(with_predicates(lex, {{"turnLightOff", PredicateKind::Method}}));
  CHECK(f.at("cooc|turn off|turnLightOff") == 1);
  CHECK(f.at("cooc|the|turnLightOff") == 1);
  CHECK(f.at("cooc|light|turnLightOff") == 1);
  CHECK(f.count("cooc|turn off|turnLightOn") == 0);
  CHECK(f.at("cooc-any|method|desc") == 1);
  CHECK(f.at("missing|light|turnLightOn") == 1);
  CHECK(f.count("missing|turn off|turnLightOn") == 0);
  CHECK(f.at("missing-any|method|name") >= 1);
}

TEST_CASE("removing the new features drops description matches and size features") {
  auto d = make_lighting_domain();
  MatchLexicon lex = build_lexicon(*d);
  FeatureOptions off;
  off.new_features = false;
  FeatureContext ctx(tokenize("turn off the light"), lex, off);
  FeatureSignature sig = with_predicates(lex, {{"turnLightOff", PredicateKind::Method}});
  sig.size = 9;
  FeatureVector f = ctx.extract(sig);
  CHECK(f.count("cooc-any|method|desc") == 0);
  CHECK(f.count("missing|turn off|turnLightOn") == 0);
  CHECK(f.count("size>2") == 0);
  CHECK(f.at("cooc|turn off|turnLightOff") == 1);

  FeatureContext on(tokenize("turn off the light"), lex, FeatureOptions{});
  FeatureVector g = on.extract(sig);
  for (int n = 2; n < 9; ++n) CHECK(g.at("size>" + std::to_string(n)) == 1);
  CHECK(g.count("size>9") == 0);
}

TEST_CASE("anchor features count used and untouched spans") {
  auto d = make_lighting_domain();
  MatchLexicon lex = build_lexicon(*d);
  FeatureContext ctx(tokenize("bedroom on floor 2"), lex, FeatureOptions{}, {0b0001, 0b1000});
  FeatureSignature sig;
  sig.anchored_values = 1;
  sig.token_mask = 0b0001;
  FeatureVector f = ctx.extract(sig);
  CHECK(f.at("cooc-any|value|anchor") == 1);
  CHECK(f.at("missing-any|value|anchor") == 1);
  sig.token_mask = 0b1001;
  sig.anchored_values = 2;
  f = ctx.extract(sig);
  CHECK(f.count("missing-any|value|anchor") == 0);
}

TEST_CASE("suffix stripping matches plural and tense variants") {
  auto d = make_lighting_domain();
  MatchLexicon lex = build_lexicon(*d);
  FeatureOptions opt;
  opt.strip_suffixes = true;
  FeatureContext ctx(tokenize("switching lights"), lex, opt);
  FeatureVector f = ctx.extract(with_predicates(lex, {{"turnLightOff", PredicateKind::Method}}));
  CHECK(f.count("cooc|light|turnLightOff") == 1);
}

TEST_CASE("the folded scorer equals the dot product on random signatures") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> wdist(-2, 2);
  for (const auto& d : builtin_domains()) {
    MatchLexicon lex = build_lexicon(*d);
    for (bool nf : {true, false}) {
      FeatureOptions opt;
      opt.new_features = nf;
      FeatureContext ctx(tokenize("remove the first largest file named report and turn on the lights 3 2"), lex, opt,
                         {1u << 11, 1u << 12});
      WeightVector w;
      std::vector<FeatureSignature> sigs;
      for (int i = 0; i < 40; ++i) {
        FeatureSignature sig;
        for (std::size_t q = 0; q < lex.predicates().size(); ++q) {
          if (rng() % 3 == 0) sig.predicates.set(q);
        }
        sig.size = static_cast<int>(rng() % 16) + 1;
        sig.anchored_values = static_cast<int>(rng() % 3);
        sig.token_mask = rng() & ((1u << 11) | (1u << 12));
        for (const auto& [k, v] : ctx.extract(sig)) {
          if (!w.count(k)) w[k] = wdist(rng);
        }
        sigs.push_back(sig);
      }
      auto scorer = ctx.scorer(w);
      for (const auto& sig : sigs) CHECK(scorer.score(sig) == doctest::Approx(dot(w, ctx.extract(sig))).epsilon(1e-12));
    }
  }
}

TEST_CASE("dot ignores features without weights") {
  CHECK(dot({{"a", 2.0}}, {{"a", 3.0}, {"b", 5.0}}) == 6.0);
  CHECK(dot({}, {{"a", 1.0}}) == 0.0);
}
