#include "zsp/logical_form.hpp"

#include <algorithm>
#include <cctype>
#include <iterator>

#include "zsp/errors.hpp"

namespace zsp {

LfPtr LogicalForm::value(Value v) {
  auto lf = std::shared_ptr<LogicalForm>(new LogicalForm());
  lf->kind_ = Kind::ValueLit;
  lf->value_ = std::move(v);
  return lf;
}

LfPtr LogicalForm::type_set(std::string type) {
  auto lf = std::shared_ptr<LogicalForm>(new LogicalForm());
  lf->kind_ = Kind::TypeSet;
  lf->name_ = std::move(type);
  return lf;
}

LfPtr LogicalForm::reverse_join(std::string relation, LfPtr child) {
  auto lf = std::shared_ptr<LogicalForm>(new LogicalForm());
  lf->kind_ = Kind::ReverseJoin;
  lf->name_ = std::move(relation);
  lf->children_ = {std::move(child)};
  return lf;
}

LfPtr LogicalForm::forward_join(std::string relation, LfPtr child) {
  auto lf = std::shared_ptr<LogicalForm>(new LogicalForm());
  lf->kind_ = Kind::ForwardJoin;
  lf->name_ = std::move(relation);
  lf->children_ = {std::move(child)};
  return lf;
}

LfPtr LogicalForm::intersect(LfPtr a, LfPtr b) {
  auto lf = std::shared_ptr<LogicalForm>(new LogicalForm());
  lf->kind_ = Kind::Intersect;
  lf->children_ = {std::move(a), std::move(b)};
  return lf;
}

LfPtr LogicalForm::superlative(Extreme extreme, LfPtr set, std::string key) {
  auto lf = std::shared_ptr<LogicalForm>(new LogicalForm());
  lf->kind_ = Kind::Superlative;
  lf->extreme_ = extreme;
  lf->name_ = std::move(key);
  lf->children_ = {std::move(set)};
  return lf;
}

LfPtr LogicalForm::call(std::string method, std::vector<LfPtr> args) {
  auto lf = std::shared_ptr<LogicalForm>(new LogicalForm());
  lf->kind_ = Kind::Call;
  lf->name_ = std::move(method);
  lf->children_ = std::move(args);
  return lf;
}

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool is_symbol_name(std::string_view s) {
  if (s.empty() || !std::isupper(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isupper(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) || c == '_';
  });
}

bool is_bare_text(std::string_view s) {
  if (s.empty() || !is_ident_start(s[0])) return false;
  if (!std::all_of(s.begin(), s.end(), is_ident_char)) return false;
  return !is_symbol_name(s) && std::any_of(s.begin(), s.end(), [](char c) {
    return std::islower(static_cast<unsigned char>(c));
  });
}

void print(const LogicalForm& lf, std::string& out);

void print_child(const LogicalForm& lf, std::string& out) {
  if (lf.kind() == LogicalForm::Kind::ValueLit || lf.kind() == LogicalForm::Kind::TypeSet) {
    print(lf, out);
  } else {
    out += '(';
    print(lf, out);
    out += ')';
  }
}

void print(const LogicalForm& lf, std::string& out) {
  using K = LogicalForm::Kind;
  switch (lf.kind()) {
    case K::ValueLit:
      out += format_value_literal(lf.value());
      break;
    case K::TypeSet:
      out += "R[type].";
      out += lf.name();
      break;
    case K::ReverseJoin:
      out += "R[";
      out += lf.name();
      out += "].";
      print_child(*lf.children()[0], out);
      break;
    case K::ForwardJoin:
      out += lf.name();
      out += '.';
      print_child(*lf.children()[0], out);
      break;
    case K::Intersect:
      out += "and(";
      print(*lf.children()[0], out);
      out += ", ";
      print(*lf.children()[1], out);
      out += ')';
      break;
    case K::Superlative:
      out += lf.extreme() == LogicalForm::Extreme::Max ? "argmax(" : "argmin(";
      print(*lf.children()[0], out);
      out += ", R[";
      out += lf.name();
      out += "])";
      break;
    case K::Call:
      out += lf.name();
      out += '(';
      for (std::size_t i = 0; i < lf.children().size(); ++i) {
        if (i) out += ", ";
        print(*lf.children()[i], out);
      }
      out += ')';
      break;
  }
}

}  // namespace

std::string format_value_literal(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Integer:
      return std::to_string(v.as_int());
    case Value::Kind::Symbol:
      return v.str();
    case Value::Kind::Entity:
      return "@" + v.str();
    case Value::Kind::Text: {
      if (is_bare_text(v.str())) return v.str();
      std::string out = "\"";
      for (char c : v.str()) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
      }
      return out + '"';
    }
  }
  return {};
}

std::string LogicalForm::to_string() const {
  std::string out;
  print(*this, out);
  return out;
}

int LogicalForm::size() const {
  switch (kind_) {
    case Kind::ValueLit:
    case Kind::TypeSet:
      return 1;
    case Kind::ReverseJoin:
    case Kind::ForwardJoin:
    case Kind::Superlative:
      return 2 + children_[0]->size();
    case Kind::Intersect:
      return 1 + children_[0]->size() + children_[1]->size();
    case Kind::Call: {
      int n = 2;
      for (const auto& c : children_) n += c->size();
      return n;
    }
  }
  return 0;
}

bool operator==(const LogicalForm& a, const LogicalForm& b) {
  if (a.kind() != b.kind() || a.name() != b.name() || a.children().size() != b.children().size()) return false;
  if (a.kind() == LogicalForm::Kind::ValueLit && !(a.value() == b.value())) return false;
  if (a.kind() == LogicalForm::Kind::Superlative && a.extreme() != b.extreme()) return false;
  for (std::size_t i = 0; i < a.children().size(); ++i) {
    if (!(*a.children()[i] == *b.children()[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class LfParser {
 public:
  explicit LfParser(std::string_view text) : s_(text) {}

  LfPtr parse_root() {
    LfPtr lf = parse_expr();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing input");
    check_calls(*lf, true);
    return lf;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw SyntaxError(what + " at offset " + std::to_string(pos_) + " in '" + std::string(s_) + "'");
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ >= s_.size() || !is_ident_start(s_[pos_])) fail("expected identifier");
    while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  LfPtr parse_expr() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      LfPtr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (c == '"') return LogicalForm::value(Value::text(quoted()));
    if (c == '@') {
      ++pos_;
      std::size_t start = pos_;
      while (pos_ < s_.size() && (is_ident_char(s_[pos_]) || s_[pos_] == '-' || s_[pos_] == ':')) ++pos_;
      if (start == pos_) fail("empty entity id");
      return LogicalForm::value(Value::entity(std::string(s_.substr(start, pos_ - start)), ""));
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])))) {
      std::size_t start = pos_++;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      return LogicalForm::value(Value::integer(std::stoll(std::string(s_.substr(start, pos_ - start)))));
    }
    if (c == 'R' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '[') {
      pos_ += 2;
      std::string rel = ident();
      expect(']');
      expect('.');
      LfPtr child = parse_expr();
      if (rel == kTypeRelation && child->kind() == LogicalForm::Kind::ValueLit &&
          (child->value().is_text() || child->value().is_symbol())) {
        return LogicalForm::type_set(child->value().str());
      }
      return LogicalForm::reverse_join(std::move(rel), std::move(child));
    }
    std::string id = ident();
    if (peek('(')) {
      ++pos_;
      if (id == "and") {
        LfPtr a = parse_expr();
        expect(',');
        LfPtr b = parse_expr();
        expect(')');
        return LogicalForm::intersect(std::move(a), std::move(b));
      }
      if (id == "argmax" || id == "argmin") {
        LfPtr set = parse_expr();
        expect(',');
        skip_ws();
        if (s_.substr(pos_, 2) != "R[") fail("expected R[key]");
        pos_ += 2;
        std::string key = ident();
        expect(']');
        expect(')');
        return LogicalForm::superlative(id == "argmax" ? LogicalForm::Extreme::Max : LogicalForm::Extreme::Min,
                                        std::move(set), std::move(key));
      }
      std::vector<LfPtr> args;
      if (!peek(')')) {
        args.push_back(parse_expr());
        while (peek(',')) {
          ++pos_;
          args.push_back(parse_expr());
        }
      }
      expect(')');
      return LogicalForm::call(std::move(id), std::move(args));
    }
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      return LogicalForm::forward_join(std::move(id), parse_expr());
    }
    if (is_symbol_name(id)) return LogicalForm::value(Value::symbol(std::move(id)));
    return LogicalForm::value(Value::text(std::move(id)));
  }

  std::string quoted() {
    ++pos_;  // opening quote
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
      out += s_[pos_++];
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  void check_calls(const LogicalForm& lf, bool root) const {
    if (lf.kind() == LogicalForm::Kind::Call && !root) {
      throw SyntaxError("method call '" + lf.name() + "' below the root in '" + std::string(s_) + "'");
    }
    for (const auto& c : lf.children()) check_calls(*c, false);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

ValueSet set_union(const ValueSet& a, const ValueSet& b) {
  ValueSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

LfPtr parse_logical_form(std::string_view text) { return LfParser(text).parse_root(); }

// ---------------------------------------------------------------------------
// Execution

ValueSet execute_set(const LogicalForm& lf, const State& state) {
  using K = LogicalForm::Kind;
  switch (lf.kind()) {
    case K::ValueLit: {
      const Value& v = lf.value();
      if (v.is_text()) {
        ValueSet kb = state.match_text(v.str());
        return kb.empty() ? ValueSet{v} : kb;
      }
      if (v.is_entity()) {
        auto e = state.find_entity(v.str());
        return e ? ValueSet{*e} : ValueSet{};
      }
      return {v};
    }
    case K::TypeSet:
      return state.entities_of_type(lf.name());
    case K::ReverseJoin: {
      ValueSet out;
      for (const Value& o : execute_set(*lf.children()[0], state)) {
        out = set_union(out, state.query_subjects(lf.name(), o));
      }
      return out;
    }
    case K::ForwardJoin: {
      ValueSet out;
      for (const Value& s : execute_set(*lf.children()[0], state)) {
        if (s.is_entity()) out = set_union(out, state.query_objects(s, lf.name()));
      }
      return out;
    }
    case K::Intersect: {
      ValueSet a = execute_set(*lf.children()[0], state);
      ValueSet b = execute_set(*lf.children()[1], state);
      ValueSet out;
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
      return out;
    }
    case K::Superlative: {
      bool want_max = lf.extreme() == LogicalForm::Extreme::Max;
      std::vector<std::pair<std::int64_t, Value>> keyed;
      for (const Value& e : execute_set(*lf.children()[0], state)) {
        if (!e.is_entity()) continue;
        bool found = false;
        std::int64_t key = 0;
        for (const Value& k : state.query_objects(e, lf.name())) {
          if (!k.is_integer()) continue;
          if (!found || (want_max ? k.as_int() > key : k.as_int() < key)) key = k.as_int();
          found = true;
        }
        if (found) keyed.emplace_back(key, e);
      }
      if (keyed.empty()) return {};
      auto best = keyed.front().first;
      for (auto& [k, e] : keyed) best = want_max ? std::max(best, k) : std::min(best, k);
      ValueSet out;
      for (auto& [k, e] : keyed) {
        if (k == best) out.push_back(e);
      }
      return out;
    }
    case K::Call:
      throw ExecutionError("method call '" + lf.name() + "' in a non-root position");
  }
  return {};
}

MethodCall execute_to_call(const LogicalForm& lf, const State& state, const Domain& domain) {
  if (lf.kind() != LogicalForm::Kind::Call) throw ExecutionError("not a method call: " + lf.to_string());
  const InterfaceMethod* m = domain.find_method(lf.name());
  if (m == nullptr) throw ExecutionError("unknown method '" + lf.name() + "' in domain " + domain.id());
  if (m->parameters.size() != lf.children().size()) {
    throw ExecutionError(lf.name() + ": expected " + std::to_string(m->parameters.size()) + " arguments, got " +
                         std::to_string(lf.children().size()));
  }
  MethodCall call{lf.name(), {}};
  for (std::size_t i = 0; i < lf.children().size(); ++i) {
    ValueSet arg = execute_set(*lf.children()[i], state);
    if (arg.empty()) throw ExecutionError(lf.name() + ": argument " + std::to_string(i + 1) + " denotes {}");
    if (!m->parameters[i].accepts(arg)) {
      throw ExecutionError(lf.name() + ": argument " + std::to_string(i + 1) + " is not a " +
                           m->parameters[i].to_string());
    }
    call.arguments.push_back(std::move(arg));
  }
  return call;
}

Denotation execute(const LogicalForm& lf, const State& state, const Domain& domain) {
  if (lf.kind() == LogicalForm::Kind::Call) {
    return Denotation{domain.invoke(state, execute_to_call(lf, state, domain))};
  }
  return Denotation{execute_set(lf, state)};
}

}  // namespace zsp
