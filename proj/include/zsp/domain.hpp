#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "zsp/knowledge.hpp"

namespace zsp {

using Rng = std::mt19937_64;

/// Inclusive integer range read from the generation configuration.
struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct ParameterSpec {
  enum class Kind : std::uint8_t { EntityCollection, SingleEntity, Integer, Enum };

  Kind kind = Kind::EntityCollection;
  std::string entity_type;           // EntityCollection / SingleEntity
  std::vector<std::string> allowed;  // Enum symbols

  static ParameterSpec collection(std::string type) { return {Kind::EntityCollection, std::move(type), {}}; }
  static ParameterSpec single(std::string type) { return {Kind::SingleEntity, std::move(type), {}}; }
  static ParameterSpec integer() { return {Kind::Integer, {}, {}}; }
  static ParameterSpec enumeration(std::vector<std::string> symbols) { return {Kind::Enum, {}, std::move(symbols)}; }

  /// True when `arg` is a legal argument for this parameter.
  bool accepts(const ValueSet& arg) const;
  std::string to_string() const;
};

struct InterfaceMethod {
  std::string name;
  std::vector<ParameterSpec> parameters;
  std::vector<std::string> description_phrases;  // 1-3 entries
};

/// An interface method name plus one value set per parameter.
struct MethodCall {
  std::string method;
  std::vector<ValueSet> arguments;

  std::string to_string() const;
  friend bool operator==(const MethodCall&, const MethodCall&) = default;
  friend auto operator<=>(const MethodCall&, const MethodCall&) = default;
};

enum class ObjectKind : std::uint8_t { Entity, Integer, Text, Symbol };

struct RelationSpec {
  std::string name;
  ObjectKind object_kind = ObjectKind::Text;
  std::string object_type;           // entity type when object_kind == Entity
  std::vector<std::string> phrases;  // synonyms used by the match lexicon
};

struct EntityTypeSpec {
  std::string name;
  std::vector<std::string> phrases;
};

/// Named size ranges for random state generation ("floors", "elements", ...).
class GenerationRanges {
 public:
  GenerationRanges() = default;
  GenerationRanges(std::map<std::string, IntRange> ranges) : ranges_(std::move(ranges)) {}

  IntRange get(const std::string& key) const;
  void set(const std::string& key, IntRange r) { ranges_[key] = r; }
  const std::map<std::string, IntRange>& all() const { return ranges_; }

 private:
  std::map<std::string, IntRange> ranges_;
};

/// A small application: schema, interface methods and deterministic
/// application logic. Subclasses implement apply() and state generation.
class Domain {
 public:
  virtual ~Domain() = default;

  const std::string& id() const { return id_; }
  const std::vector<EntityTypeSpec>& entity_types() const { return types_; }
  const std::vector<RelationSpec>& relations() const { return relations_; }
  const std::vector<InterfaceMethod>& methods() const { return methods_; }
  /// Enumeration symbols that may appear as objects or arguments.
  const std::vector<std::string>& symbols() const { return symbols_; }

  const InterfaceMethod* find_method(std::string_view name) const;
  const RelationSpec* find_relation(std::string_view name) const;
  bool has_entity_type(std::string_view name) const;

  /// Replaces the description phrases of a method (1-3 entries).
  void set_description_phrases(std::string_view method, std::vector<std::string> phrases);

  /// Validates the call against the method signature, then runs the
  /// application logic. Never mutates `state`; throws DomainException.
  State invoke(const State& state, const MethodCall& call) const;

  virtual GenerationRanges default_ranges() const = 0;
  virtual State generate_initial_state(Rng& rng, const GenerationRanges& ranges) const = 0;

  /// Random argument list for `method` over `state`.
  virtual MethodCall random_call(const State& state, const InterfaceMethod& method, Rng& rng) const;

 protected:
  Domain(std::string id, std::vector<EntityTypeSpec> types, std::vector<RelationSpec> relations,
         std::vector<InterfaceMethod> methods, std::vector<std::string> symbols);

  virtual State apply(const State& state, const MethodCall& call) const = 0;
  /// Range used when drawing random integer arguments.
  virtual IntRange integer_argument_range(const InterfaceMethod&) const { return {1, 10}; }

 private:
  std::string id_;
  std::vector<EntityTypeSpec> types_;
  std::vector<RelationSpec> relations_;
  std::vector<InterfaceMethod> methods_;
  std::vector<std::string> symbols_;
};

using DomainPtr = std::shared_ptr<const Domain>;

/// Domains keyed by id.
class DomainRegistry {
 public:
  void add(DomainPtr domain);
  const Domain& get(std::string_view id) const;  // throws std::out_of_range
  DomainPtr find(std::string_view id) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, DomainPtr, std::less<>> domains_;
};

/// One (initial state, utterance, desired state) example.
struct Example {
  std::string id;
  std::string domain;
  State initial;
  std::string utterance;
  State desired;
};

/// Train and test examples of one domain.
struct DomainData {
  std::vector<Example> train;
  std::vector<Example> test;
};

/// Examples keyed by domain id.
using Dataset = std::map<std::string, DomainData>;

// Random helpers shared by generators.
int uniform_int(Rng& rng, int lo, int hi);
int uniform_int(Rng& rng, IntRange r);
template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  return items[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(items.size()) - 1))];
}

}  // namespace zsp
