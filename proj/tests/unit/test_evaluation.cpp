#include "doctest.h"

#include <algorithm>

#include "synthetic.hpp"
#include "zsp/builtin_domains.hpp"
#include "zsp/errors.hpp"
#include "zsp/evaluation.hpp"

using namespace zsp;

namespace {

State four_rooms() {
  StateBuilder b("lighting");
  const char* names[] = {"bedroom", "bedroom", "kitchen", "hall"};
  for (int i = 0; i < 4; ++i) {
    Value r = b.add_entity("room" + std::to_string(i + 1), "Room");
    b.add(r, "name", Value::text(names[i]));
    b.add(r, "floor", Value::integer(i < 2 ? 1 : 2));
    b.add(r, "lightMode", Value::symbol("ON"));
  }
  return b.build();
}

std::vector<ExampleScore> scores(std::initializer_list<double> credits, const std::string& prefix = "x") {
  std::vector<ExampleScore> out;
  int i = 0;
  for (double c : credits) out.push_back({prefix + std::to_string(i++), c, 1, c > 0 ? 1 : 0, false});
  return out;
}

}  // namespace

TEST_CASE("a four-way tie with two correct candidates earns half credit") {
  auto d = make_lighting_domain();
  MatchLexicon lex = build_lexicon(*d);
  State s = four_rooms();
  Example ex;
  ex.id = "tie";
  ex.domain = "lighting";
  ex.initial = s;
  ex.utterance = "turn off the bedroom lights";
  ex.desired = d->invoke(s, MethodCall{"turnLightOff", {{*s.find_entity("room1"), *s.find_entity("room2")}}});

  Prediction p = predict(make_request(*d, lex, s, ex.utterance), ParserConfig{}, {});
  std::vector<Derivation> right, wrong;
  for (const auto& c : p.considered) {
    CHECK(c.score() == 0.0);
    bool ok = states_equal(d->invoke(s, c.call()), ex.desired);
    (ok ? right : wrong).push_back(c);
  }
  REQUIRE(right.size() >= 2);
  REQUIRE(wrong.size() >= 2);
  Prediction tie = p;
  tie.best = {right[0], wrong[0], right[1], wrong[1]};
  ExampleScore sc = credit_prediction(tie, ex, *d);
  CHECK(sc.tie_count == 4);
  CHECK(sc.correct_in_tie == 2);
  CHECK(sc.credit == 0.5);

  Prediction none = p;
  none.best.clear();
  ExampleScore failed = credit_prediction(none, ex, *d);
  CHECK(failed.parse_failed);
  CHECK(failed.credit == 0.0);
}

TEST_CASE("mean credit of nothing is undefined") {
  CHECK_FALSE(mean_credit({}));
  CHECK(*mean_credit(scores({1.0, 0.0, 0.5})) == doctest::Approx(0.5));
}

TEST_CASE("paired bootstrap") {
  auto a = scores({1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
  auto b = scores({0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  BootstrapResult r = paired_bootstrap(a, b, 2000);
  CHECK(r.p_value == 0.0);
  CHECK(r.significant);
  CHECK(r.mean_a == 1.0);

  BootstrapResult same = paired_bootstrap(a, a, 2000);
  CHECK(same.p_value == 1.0);
  CHECK_FALSE(same.significant);
  CHECK(paired_bootstrap(b, a, 2000).p_value == 1.0);

  auto close_a = scores({1, 0, 1, 0, 1, 0, 0, 0, 0, 0});
  auto close_b = scores({0, 1, 1, 0, 0, 0, 0, 0, 0, 0});
  BootstrapResult c = paired_bootstrap(close_a, close_b, 2000);
  CHECK(c.p_value > 0.05);
  CHECK_FALSE(c.significant);
  CHECK(paired_bootstrap(close_a, close_b, 2000, 0.05, 7).p_value ==
        paired_bootstrap(close_a, close_b, 2000, 0.05, 7).p_value);

  auto shuffled = a;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(paired_bootstrap(shuffled, b, 500).mean_a == 1.0);
  CHECK_THROWS_AS(paired_bootstrap(a, scores({0, 1}), 100), std::invalid_argument);
  CHECK_THROWS_AS(paired_bootstrap(scores({0, 1}), scores({0, 1}, "y"), 100), std::invalid_argument);
}

TEST_CASE("the access log counts per phase and domain") {
  AccessLog log;
  DomainRegistry reg = builtin_registry();
  DomainView view(reg, &log);
  view.get("list");
  view.set_phase(Phase::Testing);
  view.resolver()("list");
  view.resolver()("file");
  CHECK(log.count(Phase::Tuning, "list") == 1);
  CHECK(log.count(Phase::Testing, "list") == 1);
  CHECK(log.total(Phase::Testing) == 2);
  CHECK(log.total(Phase::Training) == 0);
}

TEST_CASE("zero-shot experiments never touch the target before testing") {
  DomainRegistry reg = builtin_registry();
  std::vector<DomainPtr> doms{reg.find("lighting"), reg.find("list"), reg.find("container"), reg.find("calendar")};
  Dataset data = testing::synthetic_corpus(doms, 8, 4, 3);
  for (Algorithm alg : {Algorithm::AdaGrad, Algorithm::Gmdp}) {
    ExperimentSpec spec;
    spec.target = "list";
    spec.algorithm = alg;
    spec.parser.beam_size = 40;
    spec.axes.l1 = {0.001};
    spec.axes.step_size = {0.1};
    spec.axes.iterations = {1};
    spec.axes.partition_size = {1};
    spec.axes.iterations_step1 = {1};
    spec.axes.orderings = 1;
    AccessLog log;
    ExperimentReport r = run_experiment(spec, data, reg, &log);
    CHECK(log.count(Phase::Tuning, "list") == 0);
    CHECK(log.count(Phase::Training, "list") == 0);
    CHECK(log.count(Phase::Testing, "list") > 0);
    CHECK(log.total(Phase::Tuning) > 0);
    CHECK(r.training_domains == std::vector<std::string>{"calendar", "container", "lighting"});
    REQUIRE(r.accuracy);
    CHECK(r.scores.size() == 4);
    if (alg == Algorithm::Gmdp) CHECK(r.partition);
  }
}

TEST_CASE("experiments reject bad setups and report missing test data") {
  DomainRegistry reg = builtin_registry();
  std::vector<DomainPtr> doms{reg.find("lighting"), reg.find("list"), reg.find("container")};
  Dataset data = testing::synthetic_corpus(doms, 4, 4, 5);
  ExperimentSpec spec;
  spec.target = "list";
  spec.algorithm = Algorithm::AdaGrad;
  spec.parser.beam_size = 20;
  spec.fixed = TrainConfig{};
  spec.fixed->iterations = 1;
  ExperimentReport r = run_experiment(spec, data, reg);
  CHECK_FALSE(r.accuracy);

  ExperimentSpec missing = spec;
  missing.target = "messenger";
  CHECK_THROWS_AS(run_experiment(missing, data, reg), DataError);
  ExperimentSpec gin = spec;
  gin.in_domain = true;
  gin.algorithm = Algorithm::Gmdp;
  CHECK_THROWS_AS(run_experiment(gin, data, reg), ConfigError);
  Dataset lone;
  lone["list"] = data["list"];
  lone["lighting"] = data["lighting"];
  CHECK_THROWS_AS(run_experiment(spec, lone, reg), DataError);
}

TEST_CASE("parallel scoring equals serial scoring in any order") {
  DomainRegistry reg = builtin_registry();
  std::vector<DomainPtr> doms{reg.find("lighting"), reg.find("file")};
  Dataset data = testing::synthetic_corpus(doms, 6, 0, 9);
  std::vector<const Example*> exs;
  for (const auto& [id, dd] : data) {
    for (const auto& e : dd.test) exs.push_back(&e);
  }
  Model m;
  m.weights = {{"cooc-any|value|anchor", 1.0}, {"missing-any|value|anchor", -1.0}, {"cooc-any|method|desc", 0.5}};
  DomainResolver resolve = [&](const std::string& id) -> const Domain& { return reg.get(id); };
  auto serial = score_examples_serial(m, exs, resolve);
  auto parallel = score_examples_parallel(m, exs, resolve);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].example_id == parallel[i].example_id);
    CHECK(serial[i].credit == parallel[i].credit);
  }
  std::vector<const Example*> rev(exs.rbegin(), exs.rend());
  auto back = score_examples_serial(m, rev, resolve);
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i].credit == serial[serial.size() - 1 - i].credit);
}

TEST_CASE("the ablation table lists the eight variants with published deltas") {
  auto vars = ablation_variants();
  REQUIRE(vars.size() == 8);
  CHECK(vars.front().name == "GMDP");
  CHECK(vars.back().name == "AdaGrad-FA");
  CHECK(*reference_average("GMDP") == 44.5);
  CHECK(*reference_average("AdaGrad") == 39.1);
  CHECK(*reference_average("AdaGrad-FA") == 28.3);
  CHECK_FALSE(reference_average("Other"));
  AblationTable t;
  t["GMDP"]["list"] = {50.0, 90.0, true};
  t["GMDP"]["file"] = {40.0, std::nullopt, false};
  std::string text = format_ablation_table(t, {"file", "list"});
  CHECK(text.find("50.0*") != std::string::npos);
  CHECK(text.find("(90.0)") != std::string::npos);
  CHECK(text.find("44.5") != std::string::npos);
  CHECK(text.find("+0.5") != std::string::npos);
}
