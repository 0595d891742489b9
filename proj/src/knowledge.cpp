#include "zsp/knowledge.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "zsp/errors.hpp"

namespace zsp {

Value Value::entity(std::string id, std::string type) {
  Value v;
  v.kind_ = Kind::Entity;
  v.str_ = std::move(id);
  v.type_ = std::move(type);
  return v;
}

Value Value::integer(std::int64_t x) {
  Value v;
  v.kind_ = Kind::Integer;
  v.int_ = x;
  return v;
}

Value Value::text(std::string s) {
  Value v;
  v.kind_ = Kind::Text;
  v.str_ = std::move(s);
  return v;
}

Value Value::symbol(std::string s) {
  Value v;
  v.kind_ = Kind::Symbol;
  v.str_ = std::move(s);
  return v;
}

std::string Value::to_string() const {
  switch (kind_) {
    case Kind::Entity:
      return str_;
    case Kind::Integer:
      return std::to_string(int_);
    case Kind::Text:
      return '"' + str_ + '"';
    case Kind::Symbol:
      return str_;
  }
  return {};
}

void normalize(ValueSet& values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

namespace {

void sort_unique(std::vector<Triple>& triples) {
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
}

bool relation_object_less(const Triple& a, const Triple& b) {
  if (int c = a.relation.compare(b.relation); c != 0) return c < 0;
  if (auto c = a.object <=> b.object; c != 0) return c < 0;
  return a.subject < b.subject;
}

}  // namespace

State::State(std::string domain_id, std::vector<Value> entities, std::vector<Triple> triples)
    : domain_id_(std::move(domain_id)), entities_(std::move(entities)), triples_(std::move(triples)) {
  for (const Value& e : entities_) {
    if (!e.is_entity()) throw std::invalid_argument("state entity is not an entity value: " + e.to_string());
  }
  std::sort(entities_.begin(), entities_.end());
  entities_.erase(std::unique(entities_.begin(), entities_.end()), entities_.end());

  auto lookup = [this](const Value& v) -> const Value* {
    auto it = std::lower_bound(entities_.begin(), entities_.end(), v);
    return (it != entities_.end() && *it == v) ? &*it : nullptr;
  };
  for (Triple& t : triples_) {
    const Value* subj = t.subject.is_entity() ? lookup(t.subject) : nullptr;
    if (subj == nullptr) {
      throw std::invalid_argument("triple subject is not a declared entity: " + t.subject.to_string());
    }
    t.subject = *subj;  // canonical type
    if (t.object.is_entity()) {
      const Value* obj = lookup(t.object);
      if (obj == nullptr) {
        throw std::invalid_argument("triple object is not a declared entity: " + t.object.to_string());
      }
      t.object = *obj;
    }
  }
  for (const Value& e : entities_) {
    triples_.push_back(Triple{e, std::string(kTypeRelation), Value::symbol(e.entity_type())});
  }
  sort_unique(triples_);

  by_relation_.resize(triples_.size());
  std::iota(by_relation_.begin(), by_relation_.end(), 0u);
  std::sort(by_relation_.begin(), by_relation_.end(), [this](std::uint32_t a, std::uint32_t b) {
    return relation_object_less(triples_[a], triples_[b]);
  });
}

std::optional<Value> State::find_entity(std::string_view id) const {
  auto it = std::lower_bound(entities_.begin(), entities_.end(), id,
                             [](const Value& v, std::string_view key) { return v.str() < key; });
  if (it != entities_.end() && it->str() == id) return *it;
  return std::nullopt;
}

std::vector<Value> State::entities_of_type(std::string_view type) const {
  std::vector<Value> out;
  for (const Value& e : entities_) {
    if (e.entity_type() == type) out.push_back(e);
  }
  return out;
}

ValueSet State::query_objects(const Value& subject, std::string_view relation) const {
  auto lo = std::lower_bound(triples_.begin(), triples_.end(), std::tie(subject, relation),
                             [](const Triple& t, const auto& key) {
                               const auto& [s, r] = key;
                               if (auto c = t.subject <=> s; c != 0) return c < 0;
                               return std::string_view(t.relation) < r;
                             });
  ValueSet out;
  for (auto it = lo; it != triples_.end() && it->subject == subject && it->relation == relation; ++it) {
    out.push_back(it->object);
  }
  return out;  // already sorted by object
}

std::optional<Value> State::object_of(const Value& subject, std::string_view relation) const {
  ValueSet objs = query_objects(subject, relation);
  if (objs.empty()) return std::nullopt;
  return objs.front();
}

ValueSet State::query_subjects(std::string_view relation, const Value& object) const {
  auto lo = std::lower_bound(by_relation_.begin(), by_relation_.end(), 0, [&](std::uint32_t idx, int) {
    const Triple& t = triples_[idx];
    if (int c = std::string_view(t.relation).compare(relation); c != 0) return c < 0;
    return t.object < object;
  });
  ValueSet out;
  for (auto it = lo; it != by_relation_.end(); ++it) {
    const Triple& t = triples_[*it];
    if (t.relation != relation || !(t.object == object)) break;
    out.push_back(t.subject);
  }
  return out;
}

ValueSet State::match_text(std::string_view text) const {
  std::string needle = to_lower(text);
  ValueSet out;
  for (const Triple& t : triples_) {
    if (t.object.is_text() && to_lower(t.object.str()) == needle) out.push_back(t.object);
  }
  normalize(out);
  return out;
}

ValueSet query_objects(const State& state, const Value& subject, std::string_view relation) {
  return state.query_objects(subject, relation);
}

ValueSet query_subjects(const State& state, std::string_view relation, const Value& object) {
  return state.query_subjects(relation, object);
}

bool states_equal(const State& a, const State& b) {
  if (a.domain_id() != b.domain_id()) {
    throw CrossDomainError("comparing states of domains '" + a.domain_id() + "' and '" + b.domain_id() + "'");
  }
  return a == b;
}

// ---------------------------------------------------------------------------

StateBuilder::StateBuilder(std::string domain_id) : domain_id_(std::move(domain_id)) {}

StateBuilder::StateBuilder(const State& state)
    : domain_id_(state.domain_id()),
      entities_(state.entities().begin(), state.entities().end()),
      triples_(state.triples().begin(), state.triples().end()) {}

Value StateBuilder::add_entity(std::string id, std::string type) {
  Value e = Value::entity(std::move(id), std::move(type));
  entities_.push_back(e);
  triples_.push_back(Triple{e, std::string(kTypeRelation), Value::symbol(e.entity_type())});
  return e;
}

void StateBuilder::add(const Value& subject, std::string_view relation, Value object) {
  triples_.push_back(Triple{subject, std::string(relation), std::move(object)});
}

void StateBuilder::set(const Value& subject, std::string_view relation, Value object) {
  erase(subject, relation);
  add(subject, relation, std::move(object));
}

void StateBuilder::erase(const Value& subject, std::string_view relation) {
  std::erase_if(triples_, [&](const Triple& t) { return t.subject == subject && t.relation == relation; });
}

void StateBuilder::erase_triple(const Value& subject, std::string_view relation, const Value& object) {
  std::erase_if(triples_, [&](const Triple& t) {
    return t.subject == subject && t.relation == relation && t.object == object;
  });
}

void StateBuilder::erase_entity(const Value& entity) {
  std::erase(entities_, entity);
  std::erase_if(triples_, [&](const Triple& t) { return t.subject == entity || t.object == entity; });
}

bool StateBuilder::has_entity(const Value& entity) const {
  return std::find(entities_.begin(), entities_.end(), entity) != entities_.end();
}

std::vector<Value> StateBuilder::entities_of_type(std::string_view type) const {
  std::vector<Value> out;
  for (const Value& e : entities_) {
    if (e.entity_type() == type) out.push_back(e);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ValueSet StateBuilder::objects(const Value& subject, std::string_view relation) const {
  ValueSet out;
  for (const Triple& t : triples_) {
    if (t.subject == subject && t.relation == relation) out.push_back(t.object);
  }
  normalize(out);
  return out;
}

std::optional<Value> StateBuilder::object(const Value& subject, std::string_view relation) const {
  ValueSet objs = objects(subject, relation);
  if (objs.empty()) return std::nullopt;
  return objs.front();
}

ValueSet StateBuilder::subjects(std::string_view relation, const Value& object) const {
  ValueSet out;
  for (const Triple& t : triples_) {
    if (t.relation == relation && t.object == object) out.push_back(t.subject);
  }
  normalize(out);
  return out;
}

void StateBuilder::reindex(std::span<const Value> ordered) {
  std::int64_t i = 1;
  for (const Value& e : ordered) set(e, kIndexRelation, Value::integer(i++));
}

std::vector<Value> StateBuilder::ordered_by(std::span<const Value> entities, std::string_view relation) const {
  std::vector<std::pair<Value, Value>> keyed;
  for (const Value& e : entities) {
    auto key = object(e, relation);
    keyed.emplace_back(key.value_or(Value::integer(0)), e);
  }
  std::stable_sort(keyed.begin(), keyed.end());
  std::vector<Value> out;
  for (auto& [k, e] : keyed) out.push_back(e);
  return out;
}

State StateBuilder::build() const { return State(domain_id_, entities_, triples_); }

}  // namespace zsp
