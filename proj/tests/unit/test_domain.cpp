#include "doctest.h"

#include <algorithm>

#include "zsp/builtin_domains.hpp"
#include "zsp/errors.hpp"
#include "zsp/generator.hpp"

using namespace zsp;

namespace {

State lighting_state(const std::string& mode1, const std::string& mode2) {
  StateBuilder b("lighting");
  Value r1 = b.add_entity("room1", "Room");
  Value r2 = b.add_entity("room2", "Room");
  b.add(r1, "name", Value::text("bedroom"));
  b.add(r1, "floor", Value::integer(2));
  b.add(r1, "lightMode", Value::symbol(mode1));
  b.add(r2, "name", Value::text("kitchen"));
  b.add(r2, "floor", Value::integer(1));
  b.add(r2, "lightMode", Value::symbol(mode2));
  return b.build();
}

ValueSet ents(const State& s, std::initializer_list<const char*> ids) {
  ValueSet out;
  for (const char* id : ids) out.push_back(*s.find_entity(id));
  normalize(out);
  return out;
}

std::vector<std::string> method_names(const Domain& d) {
  std::vector<std::string> out;
  for (const auto& m : d.methods()) out.push_back(m.name);
  return out;
}

}  // namespace

TEST_CASE("lighting turnLightOn switches one room and leaves the input alone") {
  auto d = make_lighting_domain();
  State s = lighting_state("OFF", "OFF");
  State t = d->invoke(s, MethodCall{"turnLightOn", {ents(s, {"room1"})}});
  CHECK(t.query_objects(*t.find_entity("room1"), "lightMode") == ValueSet{Value::symbol("ON")});
  CHECK(t.query_objects(*t.find_entity("room2"), "lightMode") == ValueSet{Value::symbol("OFF")});
  CHECK(s.query_objects(*s.find_entity("room1"), "lightMode") == ValueSet{Value::symbol("OFF")});
}

TEST_CASE("turning off a dark room changes nothing") {
  auto d = make_lighting_domain();
  State s = lighting_state("OFF", "ON");
  CHECK(states_equal(s, d->invoke(s, MethodCall{"turnLightOff", {ents(s, {"room1"})}})));
}

TEST_CASE("turnLightOn twice equals once") {
  auto d = make_lighting_domain();
  State s = lighting_state("OFF", "OFF");
  MethodCall c{"turnLightOn", {ents(s, {"room1", "room2"})}};
  State once = d->invoke(s, c);
  CHECK(states_equal(once, d->invoke(once, c)));
}

TEST_CASE("workforce refuses a developer as the new manager") {
  auto d = make_workforce_domain();
  StateBuilder b("workforce");
  Value boss = b.add_entity("e1", "Employee");
  Value dev = b.add_entity("e2", "Employee");
  Value other = b.add_entity("e3", "Employee");
  b.add(boss, "position", Value::symbol("MANAGER"));
  b.add(dev, "position", Value::symbol("DEVELOPER"));
  b.add(other, "position", Value::symbol("QA"));
  b.add(other, "manager", boss);
  State s = b.build();
  CHECK_THROWS_AS(d->invoke(s, MethodCall{"assignEmployeesToNewManager", {{other}, {dev}}}), DomainException);
  State t = d->invoke(s, MethodCall{"assignEmployeesToNewManager", {{dev}, {boss}}});
  CHECK(t.query_objects(dev, "manager") == ValueSet{boss});
}

TEST_CASE("invoke validates calls against the signature") {
  auto d = make_lighting_domain();
  State s = lighting_state("OFF", "OFF");
  CHECK_THROWS_AS(d->invoke(s, MethodCall{"explode", {ents(s, {"room1"})}}), DomainException);
  CHECK_THROWS_AS(d->invoke(s, MethodCall{"turnLightOn", {}}), DomainException);
  CHECK_THROWS_AS(d->invoke(s, MethodCall{"turnLightOn", {{}}}), DomainException);
  CHECK_THROWS_AS(d->invoke(s, MethodCall{"turnLightOn", {{Value::integer(3)}}}), DomainException);
}

TEST_CASE("parameter specs accept only fitting arguments") {
  Value room = Value::entity("room1", "Room");
  Value file = Value::entity("f1", "File");
  CHECK(ParameterSpec::collection("Room").accepts({room}));
  CHECK_FALSE(ParameterSpec::collection("Room").accepts({}));
  CHECK_FALSE(ParameterSpec::collection("Room").accepts({file}));
  CHECK_FALSE(ParameterSpec::single("Room").accepts({room, Value::entity("room2", "Room")}));
  CHECK(ParameterSpec::integer().accepts({Value::integer(3)}));
  CHECK_FALSE(ParameterSpec::integer().accepts({Value::integer(3), Value::integer(4)}));
  CHECK(ParameterSpec::enumeration({"ON", "OFF"}).accepts({Value::symbol("ON")}));
  CHECK_FALSE(ParameterSpec::enumeration({"ON", "OFF"}).accepts({Value::symbol("RED")}));
}

TEST_CASE("the seven built-in domains expose their interfaces") {
  auto all = builtin_domains();
  REQUIRE(all.size() == 7);
  std::vector<std::string> ids;
  for (const auto& d : all) ids.push_back(d->id());
  CHECK(ids == std::vector<std::string>{"calendar", "container", "file", "lighting", "list", "messenger", "workforce"});

  auto container = make_container_domain();
  CHECK(method_names(*container) == std::vector<std::string>{"loadContainers", "unloadContainers", "removeContainers"});
  for (const auto& m : container->methods()) {
    REQUIRE(m.parameters.size() == 1);
    CHECK(m.parameters[0].kind == ParameterSpec::Kind::EntityCollection);
    CHECK(m.parameters[0].entity_type == "ShippingContainer");
  }
  auto workforce = make_workforce_domain();
  CHECK(workforce->methods().size() == 4);
  const InterfaceMethod* salary = workforce->find_method("updateSalary");
  REQUIRE(salary);
  REQUIRE(salary->parameters.size() == 2);
  CHECK(salary->parameters[0].kind == ParameterSpec::Kind::SingleEntity);
  CHECK(salary->parameters[1].kind == ParameterSpec::Kind::Integer);

  auto lighting = make_lighting_domain();
  for (const char* r : {"name", "floor", "lightMode"}) CHECK(lighting->find_relation(r));
  CHECK(lighting->symbols() == std::vector<std::string>{"OFF", "ON"});
  for (const auto& d : all) {
    for (const auto& m : d->methods()) {
      CHECK(m.description_phrases.size() >= 1);
      CHECK(m.description_phrases.size() <= 3);
    }
  }
}

TEST_CASE("generated lighting states stay within the configured ranges") {
  auto d = make_lighting_domain();
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    State s = generate_initial_state(*d, rng);
    std::map<std::int64_t, int> per_floor;
    for (const Value& r : s.entities()) {
      auto floor = s.object_of(r, "floor");
      REQUIRE(floor);
      ++per_floor[floor->as_int()];
      auto mode = s.object_of(r, "lightMode");
      REQUIRE(mode);
      CHECK((mode->str() == "ON" || mode->str() == "OFF"));
      CHECK(s.object_of(r, "name"));
    }
    CHECK(per_floor.size() >= 1);
    CHECK(per_floor.size() <= 3);
    for (const auto& [f, n] : per_floor) {
      CHECK(f >= 1);
      CHECK(f <= 3);
      CHECK(n <= 4);
    }
  }
}

TEST_CASE("ordered collections carry contiguous 1-based indexes") {
  Rng rng(9);
  for (const auto& d : {make_list_domain(), make_container_domain()}) {
    for (int i = 0; i < 30; ++i) {
      State s = generate_initial_state(*d, rng);
      std::vector<std::int64_t> idx;
      for (const Value& e : s.entities()) idx.push_back(s.object_of(e, kIndexRelation)->as_int());
      std::sort(idx.begin(), idx.end());
      for (std::size_t k = 0; k < idx.size(); ++k) CHECK(idx[k] == static_cast<std::int64_t>(k) + 1);
      if (d->id() == "list") {
        CHECK(idx.size() >= 3);
        CHECK(idx.size() <= 8);
      }
    }
  }
}

TEST_CASE("removal keeps indexes contiguous") {
  auto d = make_list_domain();
  Rng rng(4);
  for (int i = 0; i < 30; ++i) {
    State s = generate_initial_state(*d, rng);
    MethodCall c = d->random_call(s, *d->find_method("remove"), rng);
    State t = d->invoke(s, c);
    std::vector<std::int64_t> idx;
    for (const Value& e : t.entities()) idx.push_back(t.object_of(e, kIndexRelation)->as_int());
    std::sort(idx.begin(), idx.end());
    for (std::size_t k = 0; k < idx.size(); ++k) CHECK(idx[k] == static_cast<std::int64_t>(k) + 1);
  }
}

TEST_CASE("degenerate ranges fix the entity count") {
  auto d = make_list_domain();
  Rng rng(1);
  GenerationRanges r = d->default_ranges();
  r.set("elements", {5, 5});
  for (int i = 0; i < 10; ++i) CHECK(generate_initial_state(*d, rng, r).entities().size() == 5);
}

TEST_CASE("generated pairs always change the state through their call") {
  for (const auto& d : builtin_domains()) {
    Rng rng(21);
    for (const auto& m : d->methods()) {
      for (int i = 0; i < 10; ++i) {
        StatePair p = generate_state_pair(*d, m, rng);
        CHECK(p.call.method == m.name);
        CHECK_FALSE(states_equal(p.initial, p.desired));
        CHECK(states_equal(d->invoke(p.initial, p.call), p.desired));
      }
    }
  }
}

TEST_CASE("an all-on house exhausts the argument draws and is redrawn") {
  auto d = make_lighting_domain();
  PairGenerationOptions opt;
  int forced = 0;
  opt.initial_source = [&](Rng& rng) {
    if (forced++ == 0) return lighting_state("ON", "ON");
    return generate_initial_state(*d, rng);
  };
  GenerationStats stats;
  Rng rng(2);
  StatePair p = generate_state_pair(*d, *d->find_method("turnLightOn"), rng, opt, &stats);
  CHECK(stats.initial_states >= 2);
  CHECK(stats.argument_draws >= 1000);
  CHECK_FALSE(states_equal(p.initial, p.desired));
}

TEST_CASE("generation gives up after the restart cap") {
  auto d = make_lighting_domain();
  PairGenerationOptions opt;
  opt.max_restarts = 3;
  opt.max_argument_draws = 20;
  opt.initial_source = [](Rng&) { return lighting_state("ON", "ON"); };
  Rng rng(2);
  GenerationStats stats;
  CHECK_THROWS_AS(generate_state_pair(*d, *d->find_method("turnLightOn"), rng, opt, &stats), GenerationError);
  CHECK(stats.initial_states == 3);
  CHECK(stats.argument_draws == 60);
}

TEST_CASE("generation is deterministic under a seed") {
  auto d = make_file_domain();
  Rng a(77), b(77);
  for (int i = 0; i < 5; ++i) {
    StatePair x = generate_state_pair(*d, d->methods()[1], a);
    StatePair y = generate_state_pair(*d, d->methods()[1], b);
    CHECK(x.initial == y.initial);
    CHECK(x.call == y.call);
    CHECK(x.desired == y.desired);
  }
}

TEST_CASE("invoke is deterministic") {
  for (const auto& d : builtin_domains()) {
    Rng rng(8);
    State s = generate_initial_state(*d, rng);
    for (const auto& m : d->methods()) {
      MethodCall c = d->random_call(s, m, rng);
      std::optional<State> first;
      std::string err1, err2;
      try {
        first = d->invoke(s, c);
      } catch (const DomainException& e) {
        err1 = e.what();
      }
      try {
        State again = d->invoke(s, c);
        REQUIRE(first);
        CHECK(states_equal(*first, again));
      } catch (const DomainException& e) {
        err2 = e.what();
        CHECK(err1 == err2);
      }
    }
  }
}
