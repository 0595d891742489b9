#include "doctest.h"

#include <set>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "toy_domain.hpp"
#include "zsp/builtin_domains.hpp"
#include "zsp/errors.hpp"
#include "zsp/generator.hpp"
#include "zsp/parser.hpp"

using namespace zsp;

namespace {

std::set<std::string> printed(const std::vector<LfPtr>& forms) {
  std::set<std::string> out;
  for (const auto& f : forms) out.insert(f->to_string());
  return out;
}

}  // namespace

TEST_CASE("toy enumeration matches a hand count") {
  auto d = testing::make_toy_domain();
  State s = testing::toy_state();
  oracle::EnumerationBudget b;
  b.max_size = 3;
  CHECK(printed(oracle::enumerate_all_forms(*d, s, {}, b).roots) == std::set<std::string>{"drop(R[type].Item)"});
  b.max_size = 5;
  CHECK(printed(oracle::enumerate_all_forms(*d, s, {}, b).roots) ==
        std::set<std::string>{"drop(R[type].Item)", "drop(R[next].R[type].Item)", "drop(next.R[type].Item)",
                              "drop(argmax(R[type].Item, R[weight]))", "drop(argmin(R[type].Item, R[weight]))"});
}

TEST_CASE("the toy domain behaves as described") {
  auto d = testing::make_toy_domain();
  State s = testing::toy_state();
  Value a = *s.find_entity("a");
  State t = d->invoke(s, MethodCall{"reweigh", {{a}, {Value::integer(5)}}});
  CHECK(t.object_of(a, "weight") == Value::integer(5));
  CHECK_THROWS_AS(d->invoke(s, MethodCall{"reweigh", {{a}, {Value::integer(-1)}}}), DomainException);
  CHECK(d->invoke(s, MethodCall{"drop", {{a}}}).entities().size() == 2);
}

TEST_CASE("a zero form budget truncates at once") {
  auto d = testing::make_toy_domain();
  oracle::EnumerationBudget b;
  b.max_forms = 0;
  auto r = oracle::enumerate_all_forms(*d, testing::toy_state(), {}, b);
  CHECK(r.truncated);
  CHECK(r.roots.empty());
  b.max_forms = 3;
  CHECK(oracle::enumerate_all_forms(*d, testing::toy_state(), {}, b).truncated);
}

TEST_CASE("beam-limited candidates are a subset of the enumeration") {
  auto d = make_list_domain();
  Rng rng(6);
  MatchLexicon lex = build_lexicon(*d);
  for (int i = 0; i < 3; ++i) {
    State s = generate_initial_state(*d, rng);
    const std::string u = "remove the first element";
    ParserConfig cfg;
    cfg.beam_size = 10;
    cfg.max_rule_applications = 9;
    CandidateSet cs = generate_candidates(make_request(*d, lex, s, u), cfg, {});
    oracle::EnumerationBudget b;
    b.max_size = 9;
    auto all = printed(oracle::enumerate_all_forms(*d, s, tokenize(u), b).roots);
    for (const auto& r : cs.roots) CHECK(all.count(oracle::normalize(r.logical_form())->to_string()));
  }
}

TEST_CASE("normalize flattens and sorts conjuncts") {
  LfPtr a = parse_logical_form("and(and(R[floor].2, R[name].bedroom), R[lightMode].ON)");
  LfPtr b = parse_logical_form("and(and(R[lightMode].ON, R[floor].2), R[name].bedroom)");
  CHECK(oracle::normalize(a)->to_string() == oracle::normalize(b)->to_string());
}

TEST_CASE("synthetic examples are reachable by their gold call") {
  for (const auto& d : builtin_domains()) {
    Rng rng(12);
    for (int i = 0; i < 10; ++i) {
      auto ex = testing::synthetic_example(*d, "x", rng);
      REQUIRE(ex);
      CHECK(states_equal(d->invoke(ex->example.initial, ex->gold), ex->example.desired));
      CHECK_FALSE(states_equal(ex->example.initial, ex->example.desired));
      CHECK_FALSE(ex->example.utterance.empty());
    }
  }
}
