#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "zsp/domain.hpp"
#include "zsp/evaluation.hpp"
#include "zsp/training.hpp"

namespace zsp {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Values and states

/// {"int":4} | {"str":"bedroom"} | {"sym":"ON"} | {"ent":"room1"}
Json value_to_json(const Value& v);
/// Entity references take their type from `entity_types` (id -> type).
Value value_from_json(const Json& j, const std::map<std::string, std::string>& entity_types);

/// {entities:[{id,type}], triples:[[subject, relation, object]]}. Type
/// triples are implied by the entity list and not written.
Json state_to_json(const State& s);
State state_from_json(const Json& j, const std::string& domain_id);

Json call_to_json(const MethodCall& call);
MethodCall call_from_json(const Json& j, const State& context);

// ---------------------------------------------------------------------------
// Datasets

inline constexpr const char* kDatasetFormat = "zsp-dataset";
inline constexpr const char* kModelFormat = "zsp-model";
inline constexpr int kFormatVersion = 1;

struct DatasetRecord {
  Example example;
  std::string split = "train";  // train | test
};

Json example_to_json(const Example& e, const std::string& split);
DatasetRecord example_from_json(const Json& j);

/// Header line, then one record per line.
void write_dataset(std::ostream& out, const std::vector<DatasetRecord>& records);
/// Throws DataError naming the offending line. With a registry, every
/// record's domain, entity types and relations must be declared.
std::vector<DatasetRecord> read_dataset(std::istream& in, const DomainRegistry* registry = nullptr);

Dataset group_by_domain(const std::vector<DatasetRecord>& records);
Dataset load_dataset(const std::filesystem::path& path, const DomainRegistry* registry = nullptr);

/// Gold calls of generated records, keyed by example id. Written next to a
/// generated dataset; nothing in the library reads it back.
void write_gold_calls(std::ostream& out, const std::vector<std::pair<std::string, MethodCall>>& calls);

/// Writes to a temporary sibling, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Models

struct ModelFile {
  Model model;
  Algorithm algorithm = Algorithm::Gmdp;
  TrainConfig config;
  std::optional<DomainPartition> partition;
  std::vector<std::string> training_domains;
};

Json model_to_json(const ModelFile& m);
/// Accepts a full model document or a bare {"feature": weight} object.
ModelFile model_from_json(const Json& j);
void save_model(const std::filesystem::path& path, const ModelFile& m);
ModelFile load_model(const std::filesystem::path& path);

Json train_config_to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j);

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  std::string dataset;
  std::string target;
  Algorithm algorithm = Algorithm::Gmdp;
  bool new_features = true;
  bool logic_filter = true;
  bool in_domain = false;
  std::uint64_t seed = 1;
  ParserConfig parser;
  GridAxes grid;
  int folds = 3;
  bool parallel = true;
  int per_method = 50;                               // generate: records per method
  double test_fraction = 0.5;                        // generate: share of records in the test split
  std::map<std::string, GenerationRanges> generation;  // domain -> ranges
};

/// Unknown keys and ill-typed values raise ConfigError naming the field.
RunConfig run_config_from_json(const Json& j);
RunConfig load_run_config(const std::filesystem::path& path);
ExperimentSpec experiment_spec(const RunConfig& c);

// ---------------------------------------------------------------------------
// Reports

Json report_to_json(const ExperimentReport& r, const AccessLog* log = nullptr);
std::vector<ExampleScore> scores_from_report(const Json& j);

}  // namespace zsp
