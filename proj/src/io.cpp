#include "zsp/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "zsp/errors.hpp"

namespace zsp {

namespace {

std::map<std::string, std::string> entity_type_map(const State& s) {
  std::map<std::string, std::string> m;
  for (const Value& e : s.entities()) m[e.str()] = e.entity_type();
  return m;
}

[[noreturn]] void data_error(const std::string& msg) { throw DataError(msg); }

const Json& member(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) data_error(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::string string_member(const Json& j, const char* key) {
  const Json& v = member(j, key);
  if (!v.is_string()) data_error(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

// ---------------------------------------------------------------------------
// Values and states

Json value_to_json(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Entity: return Json{{"ent", v.str()}};
    case Value::Kind::Integer: return Json{{"int", v.as_int()}};
    case Value::Kind::Text: return Json{{"str", v.str()}};
    case Value::Kind::Symbol: return Json{{"sym", v.str()}};
  }
  return {};
}

Value value_from_json(const Json& j, const std::map<std::string, std::string>& entity_types) {
  if (!j.is_object() || j.size() != 1) data_error("value must be an object with one of int/str/sym/ent");
  const auto& [tag, v] = *j.items().begin();
  if (tag == "int") {
    if (!v.is_number_integer()) data_error("int value must be an integer");
    return Value::integer(v.get<std::int64_t>());
  }
  if (!v.is_string()) data_error("value '" + tag + "' must be a string");
  std::string s = v.get<std::string>();
  if (tag == "str") return Value::text(s);
  if (tag == "sym") return Value::symbol(s);
  if (tag == "ent") {
    auto it = entity_types.find(s);
    if (it == entity_types.end()) data_error("reference to undeclared entity '" + s + "'");
    return Value::entity(s, it->second);
  }
  data_error("unknown value tag '" + tag + "'");
}

Json state_to_json(const State& s) {
  Json entities = Json::array();
  for (const Value& e : s.entities()) entities.push_back({{"id", e.str()}, {"type", e.entity_type()}});
  Json triples = Json::array();
  for (const Triple& t : s.triples()) {
    if (t.relation == kTypeRelation) continue;
    triples.push_back(Json::array({t.subject.str(), t.relation, value_to_json(t.object)}));
  }
  return {{"entities", entities}, {"triples", triples}};
}

State state_from_json(const Json& j, const std::string& domain_id) {
  const Json& ents = member(j, "entities");
  const Json& trs = member(j, "triples");
  if (!ents.is_array() || !trs.is_array()) data_error("entities and triples must be arrays");
  std::vector<Value> entities;
  std::map<std::string, std::string> types;
  for (const Json& e : ents) {
    std::string id = string_member(e, "id");
    std::string type = string_member(e, "type");
    if (!types.emplace(id, type).second) data_error("entity '" + id + "' declared twice");
    entities.push_back(Value::entity(id, type));
  }
  std::vector<Triple> triples;
  for (const Json& t : trs) {
    if (!t.is_array() || t.size() != 3 || !t[0].is_string() || !t[1].is_string()) {
      data_error("triple must be [subject, relation, object]");
    }
    std::string subj = t[0].get<std::string>();
    auto it = types.find(subj);
    if (it == types.end()) data_error("triple subject '" + subj + "' is not a declared entity");
    triples.push_back(Triple{Value::entity(subj, it->second), t[1].get<std::string>(), value_from_json(t[2], types)});
  }
  try {
    return State(domain_id, std::move(entities), std::move(triples));
  } catch (const std::invalid_argument& e) {
    data_error(e.what());
  }
}

Json call_to_json(const MethodCall& call) {
  Json args = Json::array();
  for (const auto& arg : call.arguments) {
    Json a = Json::array();
    for (const Value& v : arg) a.push_back(value_to_json(v));
    args.push_back(a);
  }
  return {{"method", call.method}, {"arguments", args}};
}

MethodCall call_from_json(const Json& j, const State& context) {
  auto types = entity_type_map(context);
  MethodCall c;
  c.method = string_member(j, "method");
  const Json& args = member(j, "arguments");
  if (!args.is_array()) data_error("arguments must be an array");
  for (const Json& a : args) {
    if (!a.is_array()) data_error("each argument must be an array of values");
    ValueSet vs;
    for (const Json& v : a) vs.push_back(value_from_json(v, types));
    normalize(vs);
    c.arguments.push_back(std::move(vs));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Datasets

Json example_to_json(const Example& e, const std::string& split) {
  return {{"id", e.id},
          {"domain", e.domain},
          {"split", split},
          {"utterance", e.utterance},
          {"initial", state_to_json(e.initial)},
          {"desired", state_to_json(e.desired)}};
}

DatasetRecord example_from_json(const Json& j) {
  static const std::set<std::string> kKeys = {"id", "domain", "split", "utterance", "initial", "desired"};
  if (!j.is_object()) data_error("record must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!kKeys.count(k)) data_error("unknown record field '" + k + "'");
  }
  DatasetRecord r;
  r.example.id = string_member(j, "id");
  r.example.domain = string_member(j, "domain");
  r.example.utterance = j.contains("utterance") ? string_member(j, "utterance") : "";
  if (j.contains("split")) r.split = string_member(j, "split");
  if (r.split != "train" && r.split != "test") data_error("split must be 'train' or 'test'");
  r.example.initial = state_from_json(member(j, "initial"), r.example.domain);
  r.example.desired = state_from_json(member(j, "desired"), r.example.domain);
  return r;
}

void write_dataset(std::ostream& out, const std::vector<DatasetRecord>& records) {
  out << Json{{"format", kDatasetFormat}, {"version", kFormatVersion}}.dump() << "\n";
  for (const auto& r : records) out << example_to_json(r.example, r.split).dump() << "\n";
}

namespace {

void check_against_domain(const Example& e, const Domain& d) {
  for (const State* s : {&e.initial, &e.desired}) {
    for (const Value& v : s->entities()) {
      if (!d.has_entity_type(v.entity_type())) data_error("undeclared entity type '" + v.entity_type() + "'");
    }
    for (const Triple& t : s->triples()) {
      if (t.relation != kTypeRelation && !d.find_relation(t.relation)) {
        data_error("relation '" + t.relation + "' is not declared by domain '" + d.id() + "'");
      }
    }
  }
}

}  // namespace

std::vector<DatasetRecord> read_dataset(std::istream& in, const DomainRegistry* registry) {
  std::vector<DatasetRecord> out;
  std::set<std::string> ids;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Json j = Json::parse(line);
      if (!header) {
        header = true;
        if (j.is_object() && j.contains("format")) {
          if (j["format"] != kDatasetFormat) data_error("not a dataset file");
          if (j.value("version", 0) != kFormatVersion) data_error("unsupported dataset version");
          continue;
        }
      }
      DatasetRecord r = example_from_json(j);
      if (!ids.insert(r.example.id).second) data_error("duplicate example id '" + r.example.id + "'");
      if (registry) {
        DomainPtr d = registry->find(r.example.domain);
        if (!d) data_error("unknown domain '" + r.example.domain + "'");
        check_against_domain(r.example, *d);
      }
      out.push_back(std::move(r));
    } catch (const Json::exception& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

Dataset group_by_domain(const std::vector<DatasetRecord>& records) {
  Dataset d;
  for (const auto& r : records) {
    auto& dd = d[r.example.domain];
    (r.split == "test" ? dd.test : dd.train).push_back(r.example);
  }
  return d;
}

Dataset load_dataset(const std::filesystem::path& path, const DomainRegistry* registry) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  try {
    return group_by_domain(read_dataset(in, registry));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_gold_calls(std::ostream& out, const std::vector<std::pair<std::string, MethodCall>>& calls) {
  for (const auto& [id, call] : calls) out << Json{{"id", id}, {"call", call_to_json(call)}}.dump() << "\n";
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Models

Json train_config_to_json(const TrainConfig& c) {
  return {{"l1", c.l1},
          {"step_size", c.step_size},
          {"iterations", c.iterations},
          {"iterations_step1", c.iterations_step1},
          {"partition_size", c.partition_size},
          {"domain_ordering", c.domain_ordering},
          {"seed", c.seed},
          {"reset_accumulators", c.reset_accumulators}};
}

TrainConfig train_config_from_json(const Json& j) {
  TrainConfig c;
  try {
    c.l1 = j.value("l1", c.l1);
    c.step_size = j.value("step_size", c.step_size);
    c.iterations = j.value("iterations", c.iterations);
    c.iterations_step1 = j.value("iterations_step1", c.iterations_step1);
    c.partition_size = j.value("partition_size", c.partition_size);
    c.domain_ordering = j.value("domain_ordering", c.domain_ordering);
    c.seed = j.value("seed", c.seed);
    c.reset_accumulators = j.value("reset_accumulators", c.reset_accumulators);
  } catch (const Json::exception& e) {
    throw DataError(std::string("train config: ") + e.what());
  }
  return c;
}

Json model_to_json(const ModelFile& m) {
  Json partition = nullptr;
  if (m.partition) partition = {{"d1", m.partition->d1}, {"d2", m.partition->d2}};
  return {{"format", kModelFormat},
          {"version", kFormatVersion},
          {"algorithm", std::string(to_string(m.algorithm))},
          {"weights", m.model.weights},
          {"config", train_config_to_json(m.config)},
          {"partition", partition},
          {"training_domains", m.training_domains},
          {"new_features", m.model.features.new_features},
          {"logic_filter", m.model.use_filter},
          {"beam_size", m.model.parser.beam_size},
          {"max_rule_applications", m.model.parser.max_rule_applications}};
}

ModelFile model_from_json(const Json& j) {
  ModelFile m;
  if (!j.is_object()) throw DataError("model must be a JSON object");
  try {
    if (!j.contains("format")) {
      m.model.weights = j.get<WeightVector>();
      return m;
    }
    if (j["format"] != kModelFormat) throw DataError("not a model file");
    if (j.value("version", 0) != kFormatVersion) throw DataError("unsupported model version");
    m.algorithm = parse_algorithm(j.value("algorithm", std::string("gmdp")));
    m.model.weights = j.at("weights").get<WeightVector>();
    if (j.contains("config")) m.config = train_config_from_json(j["config"]);
    if (j.contains("partition") && !j["partition"].is_null()) {
      DomainPartition p{j["partition"].at("d1").get<std::vector<std::string>>(),
                        j["partition"].at("d2").get<std::vector<std::string>>()};
      m.partition = p;
    }
    m.training_domains = j.value("training_domains", std::vector<std::string>{});
    m.model.features.new_features = j.value("new_features", true);
    m.model.use_filter = j.value("logic_filter", true);
    m.model.parser.beam_size = j.value("beam_size", m.model.parser.beam_size);
    m.model.parser.max_rule_applications = j.value("max_rule_applications", m.model.parser.max_rule_applications);
    m.model.features.max_size = m.model.parser.max_rule_applications;
  } catch (const Json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model: ") + e.what());
  }
  return m;
}

void save_model(const std::filesystem::path& path, const ModelFile& m) {
  write_file_atomic(path, model_to_json(m).dump(2) + "\n");
}

ModelFile load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(Json::parse(read_file(path)));
  } catch (const Json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Run configuration

namespace {

class ConfigReader {
 public:
  ConfigReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "config" : path_, "must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const Json::exception&) {
      fail(field(key), "has the wrong type");
    }
  }

  const Json* sub(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) fail(path_.empty() ? k : path_ + "." + k, "is not a known setting");
    }
  }

  [[noreturn]] static void fail(const std::string& field, const std::string& what) {
    throw ConfigError("config field '" + field + "' " + what);
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  ConfigReader r(j, "");
  r.read("dataset", c.dataset);
  r.read("target_domain", c.target);
  std::string algorithm(to_string(c.algorithm));
  r.read("algorithm", algorithm);
  try {
    c.algorithm = parse_algorithm(algorithm);
  } catch (const std::invalid_argument&) {
    ConfigReader::fail("algorithm", "must be 'gmdp' or 'adagrad'");
  }
  r.read("new_features", c.new_features);
  r.read("logic_filter", c.logic_filter);
  r.read("in_domain", c.in_domain);
  r.read("seed", c.seed);
  r.read("beam_size", c.parser.beam_size);
  r.read("max_rule_applications", c.parser.max_rule_applications);
  r.read("folds", c.folds);
  r.read("parallel", c.parallel);
  r.read("per_method", c.per_method);
  r.read("test_fraction", c.test_fraction);
  if (c.parser.beam_size < 0) ConfigReader::fail("beam_size", "must be >= 0 (0 means unbounded)");
  if (c.parser.max_rule_applications < 1) ConfigReader::fail("max_rule_applications", "must be positive");
  if (c.folds < 2) ConfigReader::fail("folds", "must be at least 2");
  if (c.per_method < 0) ConfigReader::fail("per_method", "must be >= 0");
  if (c.test_fraction < 0 || c.test_fraction > 1) ConfigReader::fail("test_fraction", "must lie in [0, 1]");

  if (const Json* g = r.sub("grid")) {
    ConfigReader gr(*g, "grid");
    gr.read("l1", c.grid.l1);
    gr.read("step_size", c.grid.step_size);
    gr.read("iterations", c.grid.iterations);
    gr.read("partition_size", c.grid.partition_size);
    gr.read("iterations_step1", c.grid.iterations_step1);
    gr.read("orderings", c.grid.orderings);
    gr.finish();
    if (c.grid.l1.empty() || c.grid.step_size.empty() || c.grid.iterations.empty() ||
        c.grid.iterations_step1.empty() || c.grid.orderings < 1) {
      ConfigReader::fail("grid", "axes must be non-empty");
    }
    for (double v : c.grid.l1) {
      if (v < 0) ConfigReader::fail("grid.l1", "must be non-negative");
    }
    for (double v : c.grid.step_size) {
      if (v <= 0) ConfigReader::fail("grid.step_size", "must be positive");
    }
    for (int v : c.grid.iterations) {
      if (v < 0) ConfigReader::fail("grid.iterations", "must be non-negative");
    }
  }
  if (const Json* g = r.sub("generation")) {
    if (!g->is_object()) ConfigReader::fail("generation", "must map domain ids to ranges");
    for (const auto& [domain, ranges] : g->items()) {
      if (!ranges.is_object()) ConfigReader::fail("generation." + domain, "must map names to [lo, hi]");
      GenerationRanges gr;
      for (const auto& [name, range] : ranges.items()) {
        std::string f = "generation." + domain + "." + name;
        if (!range.is_array() || range.size() != 2 || !range[0].is_number_integer() ||
            !range[1].is_number_integer()) {
          ConfigReader::fail(f, "must be [lo, hi]");
        }
        IntRange ir{range[0].get<int>(), range[1].get<int>()};
        if (ir.lo > ir.hi) ConfigReader::fail(f, "has lo > hi");
        gr.set(name, ir);
      }
      c.generation[domain] = gr;
    }
  }
  r.finish();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return run_config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ExperimentSpec experiment_spec(const RunConfig& c) {
  ExperimentSpec s;
  s.target = c.target;
  s.algorithm = c.algorithm;
  s.use_new_features = c.new_features;
  s.use_logic_filter = c.logic_filter;
  s.in_domain = c.in_domain;
  s.seed = c.seed;
  s.parser = c.parser;
  s.axes = c.grid;
  s.folds = c.folds;
  s.parallel = c.parallel;
  return s;
}

// ---------------------------------------------------------------------------
// Reports

Json report_to_json(const ExperimentReport& r, const AccessLog* log) {
  Json scores = Json::array();
  for (const auto& s : r.scores) {
    scores.push_back({{"id", s.example_id},
                      {"credit", s.credit},
                      {"tie_count", s.tie_count},
                      {"correct_in_tie", s.correct_in_tie},
                      {"parse_failed", s.parse_failed}});
  }
  Json j = {{"target_domain", r.spec.target},
            {"algorithm", std::string(to_string(r.spec.algorithm))},
            {"new_features", r.spec.use_new_features},
            {"logic_filter", r.spec.use_logic_filter},
            {"in_domain", r.spec.in_domain},
            {"seed", r.spec.seed},
            {"training_domains", r.training_domains},
            {"tuned", train_config_to_json(r.tuned)},
            {"tuning_accuracy", r.tuning_accuracy},
            {"accuracy", r.accuracy ? Json(*r.accuracy) : Json(nullptr)},
            {"scores", scores}};
  if (r.partition) j["partition"] = {{"d1", r.partition->d1}, {"d2", r.partition->d2}};
  if (log) {
    Json access;
    for (Phase p : {Phase::Tuning, Phase::Training, Phase::Testing}) {
      access[std::string(to_string(p))] = log->count(p, r.spec.target);
    }
    j["target_accesses"] = access;
  }
  return j;
}

std::vector<ExampleScore> scores_from_report(const Json& j) {
  std::vector<ExampleScore> out;
  try {
    for (const Json& s : j.at("scores")) {
      ExampleScore e;
      e.example_id = s.at("id").get<std::string>();
      e.credit = s.at("credit").get<double>();
      e.tie_count = s.value("tie_count", 0);
      e.correct_in_tie = s.value("correct_in_tie", 0);
      e.parse_failed = s.value("parse_failed", false);
      out.push_back(std::move(e));
    }
  } catch (const Json::exception& e) {
    throw DataError(std::string("report: ") + e.what());
  }
  return out;
}

}  // namespace zsp
