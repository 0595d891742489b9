#include "doctest.h"

#include <filesystem>
#include <sstream>

#include "synthetic.hpp"
#include "zsp/builtin_domains.hpp"
#include "zsp/errors.hpp"
#include "zsp/io.hpp"

using namespace zsp;

namespace {

std::vector<DatasetRecord> small_records() {
  DomainRegistry reg = builtin_registry();
  std::vector<DomainPtr> doms{reg.find("lighting"), reg.find("workforce")};
  Dataset data = testing::synthetic_corpus(doms, 4, 2, 1);
  std::vector<DatasetRecord> out;
  for (const auto& [id, dd] : data) {
    for (const auto& e : dd.train) out.push_back({e, "train"});
    for (const auto& e : dd.test) out.push_back({e, "test"});
  }
  return out;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("values round-trip through json") {
  std::map<std::string, std::string> types{{"room1", "Room"}};
  for (const Value& v : {Value::integer(-4), Value::text("living room"), Value::symbol("ON"),
                         Value::entity("room1", "Room")}) {
    Value back = value_from_json(value_to_json(v), types);
    CHECK(back == v);
    CHECK(back.entity_type() == v.entity_type());
  }
  CHECK_THROWS_AS(value_from_json(Json{{"ent", "ghost"}}, types), DataError);
  CHECK_THROWS_AS(value_from_json(Json{{"float", 1.5}}, types), DataError);
}

TEST_CASE("datasets round-trip and keep their splits") {
  auto records = small_records();
  std::stringstream buf;
  write_dataset(buf, records);
  std::string first_line;
  std::getline(std::stringstream(buf.str()), first_line);
  CHECK(Json::parse(first_line).at("format") == kDatasetFormat);
  DomainRegistry reg = builtin_registry();
  auto back = read_dataset(buf, &reg);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].example.id == records[i].example.id);
    CHECK(back[i].split == records[i].split);
    CHECK(back[i].example.utterance == records[i].example.utterance);
    CHECK(states_equal(back[i].example.initial, records[i].example.initial));
    CHECK(states_equal(back[i].example.desired, records[i].example.desired));
  }
  Dataset grouped = group_by_domain(back);
  CHECK(grouped.at("lighting").train.size() == 2);
  CHECK(grouped.at("workforce").test.size() == 2);
}

TEST_CASE("dataset errors name the offending line") {
  auto records = small_records();
  std::stringstream good;
  write_dataset(good, records);
  std::string text = good.str();

  std::string bad_split = text;
  auto pos = bad_split.find("\"split\":\"train\"");
  REQUIRE(pos != std::string::npos);
  bad_split.replace(pos, 15, "\"split\":\"dev\"");
  std::stringstream in1(bad_split);
  CHECK(message_of([&] { read_dataset(in1); }).find("line 2") != std::string::npos);

  std::stringstream in2(text + "{not json\n");
  std::string msg = message_of([&] { read_dataset(in2); });
  CHECK(msg.find("line " + std::to_string(records.size() + 2)) != std::string::npos);

  std::stringstream in3(text + text.substr(text.find('\n') + 1));
  DomainRegistry reg = builtin_registry();
  CHECK_THROWS_AS(read_dataset(in3, &reg), DataError);

  std::string unknown = text;
  unknown.replace(unknown.find("\"lighting\""), 10, "\"garden\"");
  std::stringstream in4(unknown);
  CHECK_THROWS_AS(read_dataset(in4, &reg), DataError);
  std::stringstream in5(unknown);
  CHECK_NOTHROW(read_dataset(in5));
}

TEST_CASE("records reject unknown fields") {
  auto records = small_records();
  Json j = example_to_json(records[0].example, "train");
  j["extra"] = 1;
  CHECK_THROWS_AS(example_from_json(j), DataError);
}

TEST_CASE("models round-trip, and a bare weight object loads") {
  ModelFile m;
  m.model.weights = {{"cooc|turn off|turnLightOff", 1.25}, {"size>3", -0.5}};
  m.model.parser.beam_size = 77;
  m.model.use_filter = false;
  m.algorithm = Algorithm::Gmdp;
  m.config.l1 = 0.01;
  m.config.domain_ordering = {"a", "b", "c"};
  m.partition = DomainPartition{{"a", "b"}, {"c"}};
  m.training_domains = {"a", "b", "c"};
  ModelFile back = model_from_json(Json::parse(model_to_json(m).dump()));
  CHECK(back.model.weights == m.model.weights);
  CHECK(back.model.parser.beam_size == 77);
  CHECK_FALSE(back.model.use_filter);
  CHECK(back.config == m.config);
  CHECK(back.partition == m.partition);
  CHECK(back.training_domains == m.training_domains);

  ModelFile bare = model_from_json(Json{{"f", 2.0}});
  CHECK(bare.model.weights == WeightVector{{"f", 2.0}});
  CHECK_THROWS(model_from_json(Json{{"format", "zsp-model"}, {"version", 9}, {"weights", Json::object()}}));
}

TEST_CASE("model files are written atomically") {
  auto dir = std::filesystem::temp_directory_path() / "zsp_io_test";
  std::filesystem::create_directories(dir);
  ModelFile m;
  m.model.weights = {{"x", 1.0}};
  save_model(dir / "m.json", m);
  CHECK(load_model(dir / "m.json").model.weights == m.model.weights);
  CHECK_FALSE(std::filesystem::exists(dir / "m.json.tmp"));
  write_file_atomic(dir / "bad.json", "{");
  CHECK_THROWS_AS(load_model(dir / "bad.json"), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("run configs read every field and reject unknown ones") {
  Json j = Json::parse(R"({
    "dataset": "d.jsonl", "target_domain": "file", "algorithm": "adagrad",
    "new_features": false, "logic_filter": false, "seed": 9, "beam_size": 50,
    "grid": {"l1": [0.01], "iterations": [2]},
    "generation": {"list": {"elements": [4, 4]}}
  })");
  RunConfig c = run_config_from_json(j);
  CHECK(c.target == "file");
  CHECK(c.algorithm == Algorithm::AdaGrad);
  CHECK_FALSE(c.new_features);
  CHECK(c.seed == 9);
  CHECK(c.parser.beam_size == 50);
  CHECK(c.grid.l1 == std::vector<double>{0.01});
  CHECK(c.grid.step_size == GridAxes{}.step_size);
  CHECK(c.generation.at("list").get("elements").lo == 4);
  ExperimentSpec spec = experiment_spec(c);
  CHECK(spec.target == "file");
  CHECK_FALSE(spec.use_logic_filter);

  auto msg = [&](const char* text) { return message_of([&] { run_config_from_json(Json::parse(text)); }); };
  CHECK(msg(R"({"beam": 3})").find("'beam'") != std::string::npos);
  CHECK(msg(R"({"grid": {"l2": [1]}})").find("'grid.l2'") != std::string::npos);
  CHECK(msg(R"({"seed": "x"})").find("'seed'") != std::string::npos);
  CHECK(msg(R"({"algorithm": "sgd"})").find("'algorithm'") != std::string::npos);
  CHECK(msg(R"({"generation": {"list": {"elements": [5, 4]}}})").find("lo > hi") != std::string::npos);
  CHECK_THROWS_AS(run_config_from_json(Json::parse(R"({"folds": 1})")), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(Json::parse("[1]")), ConfigError);
}

TEST_CASE("reports carry scores that read back") {
  ExperimentReport r;
  r.spec.target = "list";
  r.scores = {{"a", 1.0, 1, 1, false}, {"b", 0.5, 2, 1, false}};
  r.accuracy = 75.0;
  Json j = report_to_json(r);
  auto back = scores_from_report(Json::parse(j.dump()));
  REQUIRE(back.size() == 2);
  CHECK(back[1].example_id == "b");
  CHECK(back[1].credit == 0.5);
}
