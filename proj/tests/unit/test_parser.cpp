#include "doctest.h"

#include <set>

#include "oracles.hpp"
#include "toy_domain.hpp"
#include "zsp/builtin_domains.hpp"
#include "zsp/generator.hpp"
#include "zsp/parser.hpp"

using namespace zsp;

namespace {

std::set<std::string> parser_roots(const Domain& d, const State& s, const std::string& utterance, int max_size) {
  MatchLexicon lex = build_lexicon(d);
  ParserConfig cfg;
  cfg.beam_size = ParserConfig::kUnbounded;
  cfg.max_rule_applications = max_size;
  CandidateSet cs = generate_candidates(make_request(d, lex, s, utterance), cfg, {});
  std::set<std::string> out;
  for (const auto& r : cs.roots) out.insert(oracle::normalize(r.logical_form())->to_string());
  return out;
}

std::set<std::string> oracle_roots(const Domain& d, const State& s, const std::string& utterance, int max_size) {
  oracle::EnumerationBudget budget;
  budget.max_size = max_size;
  auto res = oracle::enumerate_all_forms(d, s, tokenize(utterance), budget);
  REQUIRE_FALSE(res.truncated);
  std::set<std::string> out;
  for (const auto& r : res.roots) out.insert(r->to_string());
  return out;
}

State bedroom_house() {
  StateBuilder b("lighting");
  Value r1 = b.add_entity("room1", "Room");
  Value r2 = b.add_entity("room2", "Room");
  Value r3 = b.add_entity("room3", "Room");
  b.add(r1, "name", Value::text("bedroom"));
  b.add(r1, "floor", Value::integer(2));
  b.add(r1, "lightMode", Value::symbol("ON"));
  b.add(r2, "name", Value::text("bedroom"));
  b.add(r2, "floor", Value::integer(1));
  b.add(r2, "lightMode", Value::symbol("ON"));
  b.add(r3, "name", Value::text("kitchen"));
  b.add(r3, "floor", Value::integer(2));
  b.add(r3, "lightMode", Value::symbol("OFF"));
  return b.build();
}

}  // namespace

TEST_CASE("anchors cover digits, number words, ordinals and KB text") {
  State s = bedroom_house();
  auto anchors = find_anchors(tokenize("turn off the light in the bedroom on floor two 2nd"), s);
  std::set<std::string> seen;
  for (const auto& a : anchors) seen.insert(format_value_literal(a.value) + "@" + std::to_string(a.begin));
  CHECK(seen.count("bedroom@6"));
  CHECK(seen.count("2@9"));
  CHECK(seen.count("2@10"));
  CHECK(number_word_value("four") == 4);
  CHECK(number_word_value("4th") == 4);
  CHECK(number_word_value("17") == 17);
  CHECK_FALSE(number_word_value("room"));
}

TEST_CASE("unbounded toy candidates equal exhaustive enumeration") {
  auto d = testing::make_toy_domain();
  State s = testing::toy_state();
  for (int size : {5, 7, 9, 11}) {
    CAPTURE(size);
    CHECK(parser_roots(*d, s, "", size) == oracle_roots(*d, s, "", size));
    CHECK(parser_roots(*d, s, "drop the item with weight 2", size) ==
          oracle_roots(*d, s, "drop the item with weight 2", size));
  }
}

TEST_CASE("unbounded lighting candidates equal exhaustive enumeration at small sizes") {
  auto d = make_lighting_domain();
  State s = bedroom_house();
  const std::string u = "turn off the light in the bedroom on floor 2";
  CHECK(parser_roots(*d, s, u, 9) == oracle_roots(*d, s, u, 9));
}

TEST_CASE("the bedroom on floor two is among the candidates") {
  auto d = make_lighting_domain();
  MatchLexicon lex = build_lexicon(*d);
  State s = bedroom_house();
  CandidateSet cs = generate_candidates(make_request(*d, lex, s, "turn off the light in the bedroom on floor 2"),
                                        ParserConfig{}, {});
  bool found = false;
  for (const auto& r : cs.roots) {
    if (r.to_string() == "turnLightOff(and(R[name].bedroom, R[floor].2))") found = true;
  }
  CHECK(found);
}

TEST_CASE("derivations agree with their logical forms") {
  Rng rng(5);
  for (const auto& d : builtin_domains()) {
    MatchLexicon lex = build_lexicon(*d);
    State s = generate_initial_state(*d, rng);
    ParserConfig cfg;
    cfg.beam_size = 50;
    CandidateSet cs = generate_candidates(make_request(*d, lex, s, "remove the first two items"), cfg, {});
    REQUIRE_FALSE(cs.roots.empty());
    for (const auto& r : cs.roots) {
      LfPtr lf = r.logical_form();
      CHECK(r.to_string() == lf->to_string());
      CHECK(*parse_logical_form(r.to_string()) == *lf);
      CHECK(r.size() == lf->size());
      CHECK(r.size() <= cfg.max_rule_applications);
      CHECK(r.category() == Category::Root);
      CHECK(r.call() == execute_to_call(*lf, s, *d));
      for (const auto& c : r.children()) CHECK(c.denotation() == execute_set(*c.logical_form(), s));
    }
  }
}

TEST_CASE("beam scores equal the dot product of extracted features") {
  Rng rng(17);
  WeightVector w;
  for (const auto& d : builtin_domains()) {
    State s = generate_initial_state(*d, rng);
    MatchLexicon lex = build_lexicon(*d);
    ParseRequest req = make_request(*d, lex, s, "please turn on all the rooms named kitchen on floor 1");
    CandidateSet first = generate_candidates(req, ParserConfig{}, w);
    for (const auto& r : first.roots) {
      for (const auto& [k, v] : r.features()) {
        if (!w.count(k)) w[k] = std::uniform_real_distribution<double>(-1, 1)(rng);
      }
    }
    CandidateSet cs = generate_candidates(req, ParserConfig{}, w);
    for (const auto& r : cs.roots) CHECK(r.score() == doctest::Approx(dot(w, r.features())).epsilon(1e-9));
  }
}

TEST_CASE("the beam keeps at most beam_size derivations per cell") {
  auto d = make_workforce_domain();
  Rng rng(3);
  State s = generate_initial_state(*d, rng);
  MatchLexicon lex = build_lexicon(*d);
  ParseRequest req = make_request(*d, lex, s, "give bob a salary of 120");
  ParserConfig small;
  small.beam_size = 5;
  CandidateSet cs = generate_candidates(req, small, {});
  std::map<int, int> per_size;
  for (const auto& r : cs.roots) ++per_size[r.size()];
  for (const auto& [size, n] : per_size) CHECK(n <= 5);
  ParserConfig big;
  CHECK(generate_candidates(req, big, {}).roots.size() >= cs.roots.size());
}

TEST_CASE("candidate generation is deterministic") {
  auto d = make_file_domain();
  Rng rng(8);
  State s = generate_initial_state(*d, rng);
  MatchLexicon lex = build_lexicon(*d);
  ParseRequest req = make_request(*d, lex, s, "delete the biggest file in photos");
  auto a = generate_candidates(req, ParserConfig{}, {{"cooc|delete|removeFiles", 1.0}});
  auto b = generate_candidates(req, ParserConfig{}, {{"cooc|delete|removeFiles", 1.0}});
  REQUIRE(a.roots.size() == b.roots.size());
  for (std::size_t i = 0; i < a.roots.size(); ++i) CHECK(a.roots[i].to_string() == b.roots[i].to_string());
}

TEST_CASE("the filter drops calls that throw or change nothing") {
  auto d = make_lighting_domain();
  MatchLexicon lex = build_lexicon(*d);
  State s = bedroom_house();
  CandidateSet cs = generate_candidates(make_request(*d, lex, s, "turn off the bedroom"), ParserConfig{}, {});
  InvocationCache cache;
  auto kept = filter_by_application_logic(cs.roots, s, *d, &cache);
  CHECK(kept.size() < cs.roots.size());
  for (const auto& r : kept) CHECK_FALSE(states_equal(d->invoke(s, r.call()), s));
  CHECK(cache.size() <= cs.roots.size());
  CHECK(cache.invocations() == cache.size());
}

TEST_CASE("prediction returns every top-scoring candidate") {
  auto d = make_lighting_domain();
  MatchLexicon lex = build_lexicon(*d);
  State s = bedroom_house();
  ParseRequest req = make_request(*d, lex, s, "turn off the bedroom on floor 2");
  WeightVector w{{"cooc|turn off|turnLightOff", 2.0}, {"cooc-any|value|anchor", 1.0}, {"missing-any|value|anchor", -1.0}};
  Prediction p = predict(req, ParserConfig{}, w);
  REQUIRE_FALSE(p.parse_failed());
  for (const auto& b : p.best) {
    CHECK(b.score() == p.best_score);
    CHECK(b.call().method == "turnLightOff");
  }
  for (const auto& c : p.considered) CHECK(c.score() <= p.best_score);
  REQUIRE(p.state);
  CHECK(p.state->object_of(*s.find_entity("room1"), "lightMode") == Value::symbol("OFF"));
}

TEST_CASE("an utterance over an empty domain state fails to parse") {
  auto d = make_lighting_domain();
  MatchLexicon lex = build_lexicon(*d);
  State empty("lighting", {}, {});
  Prediction p = predict(make_request(*d, lex, empty, "turn on the lights"), ParserConfig{}, {});
  CHECK(p.parse_failed());
  CHECK_FALSE(p.state);
}
