#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace zsp {

/// The name of the relation linking every domain entity to its type symbol.
inline constexpr std::string_view kTypeRelation = "type";
/// Ordered collections expose 1-based positions through this relation.
inline constexpr std::string_view kIndexRelation = "index";

/// A knowledge-base value: a domain entity, an integer, free text or an
/// enumeration symbol such as ON or LOADED.
///
/// Entities compare by id only; the entity type is carried along so that
/// type checks do not need a state lookup.
class Value {
 public:
  enum class Kind : std::uint8_t { Entity = 0, Integer = 1, Text = 2, Symbol = 3 };

  Value() = default;

  static Value entity(std::string id, std::string type);
  static Value integer(std::int64_t v);
  static Value text(std::string s);
  static Value symbol(std::string s);

  Kind kind() const noexcept { return kind_; }
  bool is_entity() const noexcept { return kind_ == Kind::Entity; }
  bool is_integer() const noexcept { return kind_ == Kind::Integer; }
  bool is_text() const noexcept { return kind_ == Kind::Text; }
  bool is_symbol() const noexcept { return kind_ == Kind::Symbol; }

  /// Entity id, text content or symbol name.
  const std::string& str() const noexcept { return str_; }
  const std::string& entity_type() const noexcept { return type_; }
  std::int64_t as_int() const noexcept { return int_; }

  /// Human-readable rendering (`room1`, `4`, `"bedroom"`, `ON`).
  std::string to_string() const;

  friend bool operator==(const Value& a, const Value& b) noexcept {
    return a.kind_ == b.kind_ && a.int_ == b.int_ && a.str_ == b.str_;
  }
  friend std::strong_ordering operator<=>(const Value& a, const Value& b) noexcept {
    if (auto c = a.kind_ <=> b.kind_; c != 0) return c;
    if (auto c = a.int_ <=> b.int_; c != 0) return c;
    return a.str_.compare(b.str_) <=> 0;
  }

 private:
  Kind kind_ = Kind::Integer;
  std::int64_t int_ = 0;
  std::string str_;
  std::string type_;
};

struct Triple {
  Value subject;
  std::string relation;
  Value object;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend std::strong_ordering operator<=>(const Triple& a, const Triple& b) noexcept {
    if (auto c = a.subject <=> b.subject; c != 0) return c;
    if (auto c = a.relation.compare(b.relation) <=> 0; c != 0) return c;
    return a.object <=> b.object;
  }
};

/// Sorted, duplicate-free collection of values.
using ValueSet = std::vector<Value>;

void normalize(ValueSet& values);

/// An immutable application snapshot: a set of entities plus a set of triples.
///
/// Construction sorts and deduplicates both sets, adds the `type` triple of
/// every entity, and rejects triples whose subject is not a declared entity or
/// whose entity object is undeclared.
class State {
 public:
  State() = default;
  State(std::string domain_id, std::vector<Value> entities, std::vector<Triple> triples);

  const std::string& domain_id() const noexcept { return domain_id_; }
  std::span<const Value> entities() const noexcept { return entities_; }
  std::span<const Triple> triples() const noexcept { return triples_; }

  std::optional<Value> find_entity(std::string_view id) const;
  std::vector<Value> entities_of_type(std::string_view type) const;

  ValueSet query_objects(const Value& subject, std::string_view relation) const;
  ValueSet query_subjects(std::string_view relation, const Value& object) const;
  /// First object of (subject, relation), if any.
  std::optional<Value> object_of(const Value& subject, std::string_view relation) const;

  /// Text values in the KB equal to `text` ignoring ASCII case.
  ValueSet match_text(std::string_view text) const;

  /// Structural equality; use states_equal() to also check the domain.
  friend bool operator==(const State& a, const State& b) noexcept {
    return a.domain_id_ == b.domain_id_ && a.entities_ == b.entities_ && a.triples_ == b.triples_;
  }

 private:
  std::string domain_id_;
  std::vector<Value> entities_;
  std::vector<Triple> triples_;             // sorted by (subject, relation, object)
  std::vector<std::uint32_t> by_relation_;  // triple indices sorted by (relation, object, subject)
};

ValueSet query_objects(const State& state, const Value& subject, std::string_view relation);
ValueSet query_subjects(const State& state, std::string_view relation, const Value& object);

/// Set equality of entities and triples. Throws CrossDomainError when the
/// states belong to different domains.
bool states_equal(const State& a, const State& b);

/// Mutable working copy used by application logic and generators.
class StateBuilder {
 public:
  explicit StateBuilder(std::string domain_id);
  explicit StateBuilder(const State& state);

  Value add_entity(std::string id, std::string type);
  void add(const Value& subject, std::string_view relation, Value object);
  /// Replaces every object of (subject, relation) with `object`.
  void set(const Value& subject, std::string_view relation, Value object);
  void erase(const Value& subject, std::string_view relation);
  void erase_triple(const Value& subject, std::string_view relation, const Value& object);
  /// Removes the entity and every triple mentioning it.
  void erase_entity(const Value& entity);

  bool has_entity(const Value& entity) const;
  std::vector<Value> entities_of_type(std::string_view type) const;
  ValueSet objects(const Value& subject, std::string_view relation) const;
  std::optional<Value> object(const Value& subject, std::string_view relation) const;
  ValueSet subjects(std::string_view relation, const Value& object) const;

  /// Rewrites `index` of the given entities to 1..n in the given order.
  void reindex(std::span<const Value> ordered);
  /// Entities carrying `relation` objects in (key, id) order.
  std::vector<Value> ordered_by(std::span<const Value> entities, std::string_view relation) const;

  State build() const;

 private:
  std::string domain_id_;
  std::vector<Value> entities_;
  std::vector<Triple> triples_;
};

std::string to_lower(std::string_view s);

}  // namespace zsp
