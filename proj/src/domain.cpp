#include "zsp/domain.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "zsp/errors.hpp"

namespace zsp {

bool ParameterSpec::accepts(const ValueSet& arg) const {
  if (arg.empty()) return false;
  switch (kind) {
    case Kind::EntityCollection:
      return std::all_of(arg.begin(), arg.end(),
                         [&](const Value& v) { return v.is_entity() && v.entity_type() == entity_type; });
    case Kind::SingleEntity:
      return arg.size() == 1 && arg[0].is_entity() && arg[0].entity_type() == entity_type;
    case Kind::Integer:
      return arg.size() == 1 && arg[0].is_integer();
    case Kind::Enum:
      return arg.size() == 1 && arg[0].is_symbol() &&
             std::find(allowed.begin(), allowed.end(), arg[0].str()) != allowed.end();
  }
  return false;
}

std::string ParameterSpec::to_string() const {
  switch (kind) {
    case Kind::EntityCollection:
      return "Collection<" + entity_type + ">";
    case Kind::SingleEntity:
      return entity_type;
    case Kind::Integer:
      return "int";
    case Kind::Enum: {
      std::string s = "{";
      for (std::size_t i = 0; i < allowed.size(); ++i) s += (i ? "," : "") + allowed[i];
      return s + "}";
    }
  }
  return {};
}

std::string MethodCall::to_string() const {
  std::ostringstream os;
  os << method << '(';
  for (std::size_t i = 0; i < arguments.size(); ++i) {
    if (i) os << ", ";
    os << '{';
    for (std::size_t j = 0; j < arguments[i].size(); ++j) os << (j ? "," : "") << arguments[i][j].to_string();
    os << '}';
  }
  os << ')';
  return os.str();
}

IntRange GenerationRanges::get(const std::string& key) const {
  auto it = ranges_.find(key);
  if (it == ranges_.end()) throw std::out_of_range("no generation range named '" + key + "'");
  return it->second;
}

Domain::Domain(std::string id, std::vector<EntityTypeSpec> types, std::vector<RelationSpec> relations,
               std::vector<InterfaceMethod> methods, std::vector<std::string> symbols)
    : id_(std::move(id)),
      types_(std::move(types)),
      relations_(std::move(relations)),
      methods_(std::move(methods)),
      symbols_(std::move(symbols)) {
  for (const auto& m : methods_) {
    if (m.description_phrases.empty() || m.description_phrases.size() > 3) {
      throw std::invalid_argument("method " + m.name + " needs 1-3 description phrases");
    }
    if (std::count_if(methods_.begin(), methods_.end(), [&](const auto& o) { return o.name == m.name; }) != 1) {
      throw std::invalid_argument("duplicate method name " + m.name);
    }
  }
}

const InterfaceMethod* Domain::find_method(std::string_view name) const {
  for (const auto& m : methods_) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

const RelationSpec* Domain::find_relation(std::string_view name) const {
  for (const auto& r : relations_) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

bool Domain::has_entity_type(std::string_view name) const {
  return std::any_of(types_.begin(), types_.end(), [&](const auto& t) { return t.name == name; });
}

void Domain::set_description_phrases(std::string_view method, std::vector<std::string> phrases) {
  if (phrases.empty() || phrases.size() > 3) throw std::invalid_argument("description phrases must number 1-3");
  for (auto& m : methods_) {
    if (m.name == method) {
      m.description_phrases = std::move(phrases);
      return;
    }
  }
  throw std::invalid_argument("unknown method " + std::string(method));
}

State Domain::invoke(const State& state, const MethodCall& call) const {
  if (state.domain_id() != id_) {
    throw DomainException("state of domain '" + state.domain_id() + "' passed to domain '" + id_ + "'");
  }
  const InterfaceMethod* m = find_method(call.method);
  if (m == nullptr) throw DomainException("unknown method " + call.method);
  if (call.arguments.size() != m->parameters.size()) {
    throw DomainException(call.method + ": expected " + std::to_string(m->parameters.size()) + " arguments");
  }
  for (std::size_t i = 0; i < call.arguments.size(); ++i) {
    if (!m->parameters[i].accepts(call.arguments[i])) {
      throw DomainException(call.method + ": argument " + std::to_string(i + 1) + " is not a " +
                            m->parameters[i].to_string());
    }
    for (const Value& v : call.arguments[i]) {
      if (v.is_entity() && !state.find_entity(v.str())) {
        throw DomainException(call.method + ": unknown entity " + v.str());
      }
    }
  }
  return apply(state, call);
}

MethodCall Domain::random_call(const State& state, const InterfaceMethod& method, Rng& rng) const {
  MethodCall call{method.name, {}};
  for (const ParameterSpec& p : method.parameters) {
    ValueSet arg;
    switch (p.kind) {
      case ParameterSpec::Kind::EntityCollection: {
        std::vector<Value> pool = state.entities_of_type(p.entity_type);
        if (!pool.empty()) {
          std::shuffle(pool.begin(), pool.end(), rng);
          int n = uniform_int(rng, 1, static_cast<int>(pool.size()));
          arg.assign(pool.begin(), pool.begin() + n);
        }
        break;
      }
      case ParameterSpec::Kind::SingleEntity: {
        std::vector<Value> pool = state.entities_of_type(p.entity_type);
        if (!pool.empty()) arg.push_back(pick(rng, pool));
        break;
      }
      case ParameterSpec::Kind::Integer:
        arg.push_back(Value::integer(uniform_int(rng, integer_argument_range(method))));
        break;
      case ParameterSpec::Kind::Enum:
        arg.push_back(Value::symbol(pick(rng, p.allowed)));
        break;
    }
    normalize(arg);
    call.arguments.push_back(std::move(arg));
  }
  return call;
}

void DomainRegistry::add(DomainPtr domain) {
  std::string id = domain->id();
  domains_[id] = std::move(domain);
}

const Domain& DomainRegistry::get(std::string_view id) const {
  auto it = domains_.find(id);
  if (it == domains_.end()) throw std::out_of_range("unregistered domain '" + std::string(id) + "'");
  return *it->second;
}

DomainPtr DomainRegistry::find(std::string_view id) const {
  auto it = domains_.find(id);
  return it == domains_.end() ? nullptr : it->second;
}

std::vector<std::string> DomainRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, d] : domains_) out.push_back(id);
  return out;
}

int uniform_int(Rng& rng, int lo, int hi) {
  if (hi < lo) throw std::invalid_argument("empty integer range");
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

int uniform_int(Rng& rng, IntRange r) { return uniform_int(rng, r.lo, r.hi); }

}  // namespace zsp
