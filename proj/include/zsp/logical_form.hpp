#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "zsp/domain.hpp"
#include "zsp/knowledge.hpp"

namespace zsp {

class LogicalForm;
using LfPtr = std::shared_ptr<const LogicalForm>;

/// Lambda-DCS subset with a method-call root.
///
/// Textual syntax (print and parse are inverse):
///   4   bedroom   "living room"   ON   @room1          value literals
///   R[type].File                                       all entities of a type
///   R[floor].2   R[manager].(R[name].alice)            subjects whose object is in the child
///   floor.(R[name].bedroom)                            objects of subjects in the child
///   and(a, b)                                          intersection
///   argmax(set, R[sizeInBytes])   argmin(...)          superlatives (all extremal elements)
///   removeFiles(arg, ...)                              method call, root only
class LogicalForm {
 public:
  enum class Kind { ValueLit, TypeSet, ReverseJoin, ForwardJoin, Intersect, Superlative, Call };
  enum class Extreme { Max, Min };

  static LfPtr value(Value v);
  static LfPtr type_set(std::string type);
  static LfPtr reverse_join(std::string relation, LfPtr child);
  static LfPtr forward_join(std::string relation, LfPtr child);
  static LfPtr intersect(LfPtr a, LfPtr b);
  static LfPtr superlative(Extreme extreme, LfPtr set, std::string key);
  static LfPtr call(std::string method, std::vector<LfPtr> args);

  Kind kind() const noexcept { return kind_; }
  const Value& value() const noexcept { return value_; }
  /// Relation, type, superlative key or method name, depending on kind().
  const std::string& name() const noexcept { return name_; }
  Extreme extreme() const noexcept { return extreme_; }
  const std::vector<LfPtr>& children() const noexcept { return children_; }

  /// Canonical text; structurally equal forms print identically.
  std::string to_string() const;
  /// Rule applications of the canonical derivation of this form.
  int size() const;

 private:
  LogicalForm() = default;
  Kind kind_ = Kind::ValueLit;
  Value value_;
  std::string name_;
  Extreme extreme_ = Extreme::Max;
  std::vector<LfPtr> children_;
};

bool operator==(const LogicalForm& a, const LogicalForm& b);

/// Printed form of a value literal.
std::string format_value_literal(const Value& v);

/// Parses the canonical syntax. Throws SyntaxError.
LfPtr parse_logical_form(std::string_view text);

/// Result of executing a form: an entity/value set, or the post-invocation
/// state of a root call.
struct Denotation {
  std::variant<ValueSet, State> result;

  bool is_state() const { return std::holds_alternative<State>(result); }
  const ValueSet& values() const { return std::get<ValueSet>(result); }
  const State& state() const { return std::get<State>(result); }
};

/// Bottom-up evaluation against the indexed state. Throws ExecutionError or
/// propagates DomainException from the application logic.
Denotation execute(const LogicalForm& lf, const State& state, const Domain& domain);
/// Set denotation of a non-root form.
ValueSet execute_set(const LogicalForm& lf, const State& state);
/// Assembles the method call of a root form without invoking it.
MethodCall execute_to_call(const LogicalForm& lf, const State& state, const Domain& domain);

}  // namespace zsp
