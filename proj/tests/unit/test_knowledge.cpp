#include "doctest.h"

#include "zsp/builtin_domains.hpp"
#include "zsp/errors.hpp"
#include "zsp/generator.hpp"
#include "zsp/io.hpp"
#include "zsp/knowledge.hpp"

using namespace zsp;

namespace {

State small_lighting() {
  StateBuilder b("lighting");
  Value r1 = b.add_entity("room1", "Room");
  Value r2 = b.add_entity("room2", "Room");
  b.add(r1, "name", Value::text("bedroom"));
  b.add(r1, "floor", Value::integer(2));
  b.add(r2, "name", Value::text("Kitchen"));
  b.add(r2, "floor", Value::integer(2));
  return b.build();
}

}  // namespace

TEST_CASE("queries return sorted object and subject sets") {
  State s = small_lighting();
  Value r1 = *s.find_entity("room1");
  CHECK(s.query_objects(r1, "floor") == ValueSet{Value::integer(2)});
  ValueSet subs = s.query_subjects("floor", Value::integer(2));
  REQUIRE(subs.size() == 2);
  CHECK(subs[0].str() == "room1");
  CHECK(subs[1].str() == "room2");
  CHECK(s.query_objects(r1, "nosuch").empty());
  CHECK(s.query_subjects("floor", Value::integer(9)).empty());
  CHECK(s.query_objects(Value::entity("ghost", "Room"), "floor").empty());
}

TEST_CASE("type triples are implied by entities") {
  State s = small_lighting();
  auto rooms = s.query_subjects(kTypeRelation, Value::symbol("Room"));
  CHECK(rooms.size() == 2);
  CHECK(s.entities_of_type("Room").size() == 2);
}

TEST_CASE("text matching ignores case") {
  State s = small_lighting();
  CHECK(s.match_text("kitchen") == ValueSet{Value::text("Kitchen")});
  CHECK(s.match_text("KITCHEN").size() == 1);
  CHECK(s.match_text("garage").empty());
}

TEST_CASE("duplicate triples are idempotent") {
  StateBuilder b("lighting");
  Value r = b.add_entity("room1", "Room");
  b.add(r, "floor", Value::integer(1));
  b.add(r, "floor", Value::integer(1));
  State s = b.build();
  CHECK(s.query_objects(r, "floor").size() == 1);
  CHECK(states_equal(s, State("lighting", {r}, {Triple{r, "floor", Value::integer(1)}, Triple{r, "floor", Value::integer(1)}})));
}

TEST_CASE("states reject triples about undeclared entities") {
  Value r = Value::entity("room1", "Room");
  CHECK_THROWS_AS(State("lighting", {}, {Triple{r, "floor", Value::integer(1)}}), std::invalid_argument);
  Value other = Value::entity("room2", "Room");
  CHECK_THROWS_AS(State("lighting", {r}, {Triple{r, "next", other}}), std::invalid_argument);
}

TEST_CASE("states_equal distinguishes one triple and refuses mixed domains") {
  State a = small_lighting();
  StateBuilder b(a);
  b.set(*a.find_entity("room1"), "floor", Value::integer(3));
  State c = b.build();
  CHECK(states_equal(a, a));
  CHECK_FALSE(states_equal(a, c));
  CHECK_THROWS_AS(states_equal(a, State("list", {}, {})), CrossDomainError);
}

TEST_CASE("states_equal is an equivalence on random states") {
  for (const auto& d : builtin_domains()) {
    Rng rng(11);
    std::vector<State> states;
    for (int i = 0; i < 6; ++i) states.push_back(generate_initial_state(*d, rng));
    states.push_back(states[0]);
    for (const auto& x : states) {
      CHECK(states_equal(x, x));
      for (const auto& y : states) {
        CHECK(states_equal(x, y) == states_equal(y, x));
        for (const auto& z : states) {
          if (states_equal(x, y) && states_equal(y, z)) CHECK(states_equal(x, z));
        }
      }
    }
  }
}

TEST_CASE("state serialization round-trips") {
  for (const auto& d : builtin_domains()) {
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
      State s = generate_initial_state(*d, rng);
      State back = state_from_json(Json::parse(state_to_json(s).dump()), d->id());
      CHECK(states_equal(s, back));
    }
  }
}

TEST_CASE("builder edits do not touch the source state") {
  State a = small_lighting();
  StateBuilder b(a);
  b.erase_entity(*a.find_entity("room2"));
  State c = b.build();
  CHECK(a.entities().size() == 2);
  CHECK(c.entities().size() == 1);
  CHECK(c.query_subjects("floor", Value::integer(2)).size() == 1);
}
