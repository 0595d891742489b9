#include "zsp/builtin_domains.hpp"

#include <algorithm>
#include <set>

#include "zsp/errors.hpp"

namespace zsp {
namespace {

const std::string kIndex(kIndexRelation);

std::vector<std::string> pick_distinct(Rng& rng, std::vector<std::string> pool, int n) {
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min<std::size_t>(pool.size(), static_cast<std::size_t>(std::max(n, 0))));
  return pool;
}

std::vector<int> distinct_ints(Rng& rng, int lo, int hi, int n) {
  std::vector<int> pool;
  for (int v = lo; v <= hi; ++v) pool.push_back(v);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min<std::size_t>(pool.size(), static_cast<std::size_t>(std::max(n, 0))));
  return pool;
}

/// Entities of `type` ordered by their current index.
std::vector<Value> by_index(const StateBuilder& b, const std::string& type) {
  return b.ordered_by(b.entities_of_type(type), kIndexRelation);
}

void set_all(StateBuilder& b, const ValueSet& targets, std::string_view relation, const Value& v) {
  for (const Value& e : targets) b.set(e, relation, v);
}

// ---------------------------------------------------------------------------
// Calendar

class CalendarDomain final : public Domain {
 public:
  CalendarDomain()
      : Domain("calendar", {{"Event", {"event", "events", "appointment", "appointments"}}},
               {{"title", ObjectKind::Text, {}, {"titled", "called"}},
                {"startTime", ObjectKind::Integer, {}, {"time", "starts", "starting"}},
                {"location", ObjectKind::Text, {}, {"place"}},
                {"color", ObjectKind::Symbol, {}, {"colored"}},
                {"attendees", ObjectKind::Text, {}, {"attendee", "with"}},
                {kIndex, ObjectKind::Integer, {}, {"position"}}},
               {{"removeEvents", {ParameterSpec::collection("Event")}, {"remove", "cancel"}},
                {"setEventColor",
                 {ParameterSpec::collection("Event"), ParameterSpec::enumeration(colors())},
                 {"color", "paint", "mark"}}},
               colors()) {}

  static std::vector<std::string> colors() { return {"BLUE", "GREEN", "RED", "YELLOW"}; }

  GenerationRanges default_ranges() const override {
    return GenerationRanges({{"events", {3, 6}}, {"start_hours", {8, 17}}, {"attendees_per_event", {1, 2}}});
  }

  State generate_initial_state(Rng& rng, const GenerationRanges& ranges) const override {
    static const std::vector<std::string> titles = {"meeting", "lunch",    "standup", "review",
                                                    "interview", "workshop", "dinner", "call"};
    static const std::vector<std::string> places = {"office", "cafe", "library", "lab"};
    static const std::vector<std::string> people = {"alice", "bob", "carol", "dave", "erin"};
    StateBuilder b(id());
    IntRange hours = ranges.get("start_hours");
    std::vector<int> starts = distinct_ints(rng, hours.lo, hours.hi, uniform_int(rng, ranges.get("events")));
    std::sort(starts.begin(), starts.end());
    int n = 0;
    for (int start : starts) {
      Value e = b.add_entity("ev" + std::to_string(++n), "Event");
      b.add(e, "title", Value::text(pick(rng, titles)));
      b.add(e, "startTime", Value::integer(start));
      b.add(e, "location", Value::text(pick(rng, places)));
      b.add(e, "color", Value::symbol(pick(rng, colors())));
      for (const auto& who : pick_distinct(rng, people, uniform_int(rng, ranges.get("attendees_per_event")))) {
        b.add(e, "attendees", Value::text(who));
      }
      b.add(e, kIndex, Value::integer(n));
    }
    return b.build();
  }

 protected:
  State apply(const State& state, const MethodCall& call) const override {
    StateBuilder b(state);
    if (call.method == "removeEvents") {
      for (const Value& e : call.arguments[0]) b.erase_entity(e);
      auto events = b.entities_of_type("Event");
      b.reindex(b.ordered_by(events, "startTime"));
    } else {
      set_all(b, call.arguments[0], "color", call.arguments[1][0]);
    }
    return b.build();
  }
};

// ---------------------------------------------------------------------------
// Container

class ContainerDomain final : public Domain {
 public:
  ContainerDomain()
      : Domain("container", {{"ShippingContainer", {"container", "containers"}}},
               {{"length", ObjectKind::Integer, {}, {"long"}},
                {"contentState", ObjectKind::Symbol, {}, {}},
                {kIndex, ObjectKind::Integer, {}, {"position", "terminal"}}},
               {{"loadContainers", {ParameterSpec::collection("ShippingContainer")}, {"load", "fill"}},
                {"unloadContainers", {ParameterSpec::collection("ShippingContainer")}, {"unload", "empty"}},
                {"removeContainers", {ParameterSpec::collection("ShippingContainer")}, {"remove", "delete"}}},
               {"LOADED", "UNLOADED"}) {}

  GenerationRanges default_ranges() const override {
    return GenerationRanges({{"containers", {3, 7}}, {"length_values", {2, 8}}});
  }

  State generate_initial_state(Rng& rng, const GenerationRanges& ranges) const override {
    StateBuilder b(id());
    int n = uniform_int(rng, ranges.get("containers"));
    for (int i = 1; i <= n; ++i) {
      Value c = b.add_entity("c" + std::to_string(i), "ShippingContainer");
      b.add(c, "length", Value::integer(uniform_int(rng, ranges.get("length_values"))));
      b.add(c, "contentState", Value::symbol(uniform_int(rng, 0, 1) ? "LOADED" : "UNLOADED"));
      b.add(c, kIndex, Value::integer(i));
    }
    return b.build();
  }

 protected:
  State apply(const State& state, const MethodCall& call) const override {
    StateBuilder b(state);
    if (call.method == "loadContainers") {
      set_all(b, call.arguments[0], "contentState", Value::symbol("LOADED"));
    } else if (call.method == "unloadContainers") {
      set_all(b, call.arguments[0], "contentState", Value::symbol("UNLOADED"));
    } else {
      auto order = by_index(b, "ShippingContainer");
      for (const Value& c : call.arguments[0]) {
        b.erase_entity(c);
        std::erase(order, c);
      }
      b.reindex(order);
    }
    return b.build();
  }
};

// ---------------------------------------------------------------------------
// File

class FileDomain final : public Domain {
 public:
  FileDomain()
      : Domain("file",
               {{"Directory", {"directory", "directories", "folder", "folders"}}, {"File", {"file", "files"}}},
               {{"name", ObjectKind::Text, {}, {"named", "called"}},
                {"extension", ObjectKind::Text, {}, {}},
                {"sizeInBytes", ObjectKind::Integer, {}, {"size"}},
                {"childFiles", ObjectKind::Entity, "File", {"contains"}},
                {"childDirectories", ObjectKind::Entity, "Directory", {"subfolder", "subdirectory"}},
                {kIndex, ObjectKind::Integer, {}, {"position"}}},
               {{"removeFiles", {ParameterSpec::collection("File")}, {"remove", "delete"}},
                {"moveFiles", {ParameterSpec::collection("File"), ParameterSpec::single("Directory")},
                 {"move", "transfer"}}},
               {}) {}

  GenerationRanges default_ranges() const override {
    return GenerationRanges({{"directories", {2, 3}}, {"files_per_directory", {1, 2}}, {"size_values", {1, 9}}});
  }

  State generate_initial_state(Rng& rng, const GenerationRanges& ranges) const override {
    static const std::vector<std::string> dir_names = {"documents", "photos", "music", "downloads", "projects"};
    static const std::vector<std::string> file_names = {"report", "notes",  "photo", "song",
                                                        "budget", "resume", "draft", "invoice"};
    static const std::vector<std::string> extensions = {"pdf", "txt", "jpg", "doc"};
    StateBuilder b(id());
    Value home = b.add_entity("d1", "Directory");
    b.add(home, "name", Value::text("home"));
    int dirs = 1, files = 0;
    for (const auto& dname : pick_distinct(rng, dir_names, uniform_int(rng, ranges.get("directories")))) {
      Value d = b.add_entity("d" + std::to_string(++dirs), "Directory");
      b.add(d, "name", Value::text(dname));
      b.add(home, "childDirectories", d);
      int k = uniform_int(rng, ranges.get("files_per_directory"));
      for (int i = 1; i <= k; ++i) {
        Value f = b.add_entity("f" + std::to_string(++files), "File");
        b.add(f, "name", Value::text(pick(rng, file_names)));
        b.add(f, "extension", Value::text(pick(rng, extensions)));
        b.add(f, "sizeInBytes", Value::integer(100 * uniform_int(rng, ranges.get("size_values"))));
        b.add(f, kIndex, Value::integer(i));
        b.add(d, "childFiles", f);
      }
    }
    return b.build();
  }

 protected:
  State apply(const State& state, const MethodCall& call) const override {
    StateBuilder b(state);
    auto files_of = [&](const Value& dir) { return b.ordered_by(b.objects(dir, "childFiles"), kIndexRelation); };
    std::set<Value> touched;
    if (call.method == "removeFiles") {
      for (const Value& f : call.arguments[0]) {
        for (const Value& d : b.subjects("childFiles", f)) touched.insert(d);
        b.erase_entity(f);
      }
    } else {
      const Value& dest = call.arguments[1][0];
      auto dest_files = files_of(dest);
      for (const Value& f : call.arguments[0]) {
        bool already = false;
        for (const Value& d : b.subjects("childFiles", f)) {
          if (d == dest) {
            already = true;
            continue;
          }
          b.erase_triple(d, "childFiles", f);
          touched.insert(d);
        }
        if (!already) {
          b.add(dest, "childFiles", f);
          dest_files.push_back(f);
          touched.insert(dest);
        }
      }
      b.reindex(dest_files);
      touched.erase(dest);
    }
    for (const Value& d : touched) b.reindex(files_of(d));
    return b.build();
  }
};

// ---------------------------------------------------------------------------
// Lighting

class LightingDomain final : public Domain {
 public:
  LightingDomain()
      : Domain("lighting", {{"Room", {"room", "rooms"}}},
               {{"name", ObjectKind::Text, {}, {"named", "called"}},
                {"floor", ObjectKind::Integer, {}, {"floors", "level"}},
                {"lightMode", ObjectKind::Symbol, {}, {"lights"}}},
               {{"turnLightOn", {ParameterSpec::collection("Room")}, {"turn on", "switch on"}},
                {"turnLightOff", {ParameterSpec::collection("Room")}, {"turn off", "switch off"}}},
               {"OFF", "ON"}) {}

  GenerationRanges default_ranges() const override {
    return GenerationRanges({{"floors", {1, 3}}, {"rooms_per_floor", {1, 4}}});
  }

  State generate_initial_state(Rng& rng, const GenerationRanges& ranges) const override {
    static const std::vector<std::string> names = {"bedroom", "kitchen", "bathroom", "living room",
                                                   "office",  "hallway", "dining room", "garage"};
    StateBuilder b(id());
    int floors = uniform_int(rng, ranges.get("floors"));
    int n = 0;
    for (int f = 1; f <= floors; ++f) {
      int rooms = uniform_int(rng, ranges.get("rooms_per_floor"));
      for (int r = 0; r < rooms; ++r) {
        Value room = b.add_entity("room" + std::to_string(++n), "Room");
        b.add(room, "name", Value::text(pick(rng, names)));
        b.add(room, "floor", Value::integer(f));
        b.add(room, "lightMode", Value::symbol(uniform_int(rng, 0, 1) ? "ON" : "OFF"));
      }
    }
    return b.build();
  }

 protected:
  State apply(const State& state, const MethodCall& call) const override {
    StateBuilder b(state);
    set_all(b, call.arguments[0], "lightMode", Value::symbol(call.method == "turnLightOn" ? "ON" : "OFF"));
    return b.build();
  }
};

// ---------------------------------------------------------------------------
// List

class ListDomain final : public Domain {
 public:
  ListDomain()
      : Domain("list", {{"Element", {"element", "elements", "number", "numbers", "item", "items"}}},
               {{"value", ObjectKind::Integer, {}, {}}, {kIndex, ObjectKind::Integer, {}, {"position"}}},
               {{"remove", {ParameterSpec::collection("Element")}, {"remove", "delete"}},
                {"moveToBeginning", {ParameterSpec::single("Element")}, {"beginning", "front", "start"}},
                {"moveToEnd", {ParameterSpec::single("Element")}, {"end", "back"}}},
               {}) {}

  GenerationRanges default_ranges() const override {
    return GenerationRanges({{"elements", {3, 8}}, {"values", {1, 20}}});
  }

  State generate_initial_state(Rng& rng, const GenerationRanges& ranges) const override {
    StateBuilder b(id());
    int n = uniform_int(rng, ranges.get("elements"));
    for (int i = 1; i <= n; ++i) {
      Value e = b.add_entity("el" + std::to_string(i), "Element");
      b.add(e, "value", Value::integer(uniform_int(rng, ranges.get("values"))));
      b.add(e, kIndex, Value::integer(i));
    }
    return b.build();
  }

 protected:
  State apply(const State& state, const MethodCall& call) const override {
    StateBuilder b(state);
    auto order = by_index(b, "Element");
    if (call.method == "remove") {
      for (const Value& e : call.arguments[0]) {
        b.erase_entity(e);
        std::erase(order, e);
      }
    } else {
      const Value& e = call.arguments[0][0];
      std::erase(order, e);
      if (call.method == "moveToBeginning") {
        order.insert(order.begin(), e);
      } else {
        order.push_back(e);
      }
    }
    b.reindex(order);
    return b.build();
  }
};

// ---------------------------------------------------------------------------
// Messenger

class MessengerDomain final : public Domain {
 public:
  MessengerDomain()
      : Domain("messenger",
               {{"User", {"user", "users", "person", "people"}}, {"ChatGroup", {"group", "groups", "chat", "chats"}}},
               {{"firstName", ObjectKind::Text, {}, {"named", "called"}},
                {"contacts", ObjectKind::Entity, "User", {"with", "members"}},
                {"muted", ObjectKind::Symbol, {}, {}},
                {"participantsNumber", ObjectKind::Integer, {}, {"participants"}},
                {kIndex, ObjectKind::Integer, {}, {"position"}}},
               {{"createChatGroup", {ParameterSpec::collection("User")}, {"create", "start"}},
                {"deleteChatGroups", {ParameterSpec::collection("ChatGroup")}, {"delete", "remove"}},
                {"muteChatGroups", {ParameterSpec::collection("ChatGroup")}, {"mute", "silence"}},
                {"unmuteChatGroups", {ParameterSpec::collection("ChatGroup")}, {"unmute"}}},
               {"MUTED", "UNMUTED"}) {}

  GenerationRanges default_ranges() const override {
    return GenerationRanges({{"users", {3, 5}}, {"groups", {1, 3}}, {"group_size", {1, 3}}});
  }

  State generate_initial_state(Rng& rng, const GenerationRanges& ranges) const override {
    static const std::vector<std::string> names = {"alice", "bob", "carol", "dave", "erin", "frank"};
    StateBuilder b(id());
    std::vector<Value> users;
    int n = 0;
    for (const auto& name : pick_distinct(rng, names, uniform_int(rng, ranges.get("users")))) {
      Value u = b.add_entity("u" + std::to_string(++n), "User");
      b.add(u, "firstName", Value::text(name));
      users.push_back(u);
    }
    int groups = uniform_int(rng, ranges.get("groups"));
    std::set<ValueSet> seen;
    int g = 0;
    for (int i = 0; i < groups; ++i) {
      std::vector<Value> pool = users;
      std::shuffle(pool.begin(), pool.end(), rng);
      IntRange gs = ranges.get("group_size");
      pool.resize(std::min<std::size_t>(pool.size(), static_cast<std::size_t>(uniform_int(rng, gs))));
      ValueSet members(pool.begin(), pool.end());
      normalize(members);
      if (members.empty() || !seen.insert(members).second) continue;
      Value grp = b.add_entity("g" + std::to_string(++g), "ChatGroup");
      for (const Value& u : members) b.add(grp, "contacts", u);
      b.add(grp, "participantsNumber", Value::integer(static_cast<std::int64_t>(members.size())));
      b.add(grp, "muted", Value::symbol(uniform_int(rng, 0, 1) ? "MUTED" : "UNMUTED"));
      b.add(grp, kIndex, Value::integer(g));
    }
    return b.build();
  }

 protected:
  State apply(const State& state, const MethodCall& call) const override {
    StateBuilder b(state);
    if (call.method == "createChatGroup") {
      const ValueSet& members = call.arguments[0];
      auto groups = by_index(b, "ChatGroup");
      for (const Value& grp : groups) {
        if (b.objects(grp, "contacts") == members) throw DomainException("a group with these contacts exists");
      }
      int k = 1;
      while (b.has_entity(Value::entity("g" + std::to_string(k), "ChatGroup"))) ++k;
      Value grp = b.add_entity("g" + std::to_string(k), "ChatGroup");
      for (const Value& u : members) b.add(grp, "contacts", u);
      b.add(grp, "participantsNumber", Value::integer(static_cast<std::int64_t>(members.size())));
      b.add(grp, "muted", Value::symbol("UNMUTED"));
      groups.push_back(grp);
      b.reindex(groups);
    } else if (call.method == "deleteChatGroups") {
      auto groups = by_index(b, "ChatGroup");
      for (const Value& grp : call.arguments[0]) {
        b.erase_entity(grp);
        std::erase(groups, grp);
      }
      b.reindex(groups);
    } else {
      set_all(b, call.arguments[0], "muted", Value::symbol(call.method == "muteChatGroups" ? "MUTED" : "UNMUTED"));
    }
    return b.build();
  }
};

// ---------------------------------------------------------------------------
// Workforce

class WorkforceDomain final : public Domain {
 public:
  WorkforceDomain()
      : Domain("workforce", {{"Employee", {"employee", "employees", "worker", "workers"}}},
               {{"name", ObjectKind::Text, {}, {"named", "called"}},
                {"manager", ObjectKind::Entity, "Employee", {"boss"}},
                {"salary", ObjectKind::Integer, {}, {"paid", "earns"}},
                {"position", ObjectKind::Symbol, {}, {"role"}}},
               {{"assignEmployeesToNewManager",
                 {ParameterSpec::collection("Employee"), ParameterSpec::single("Employee")},
                 {"assign", "reassign"}},
                {"fireEmployees", {ParameterSpec::collection("Employee")}, {"fire", "dismiss"}},
                {"assignEmployeeToNewPosition", {ParameterSpec::single("Employee"), ParameterSpec::enumeration(positions())},
                 {"promote", "position"}},
                {"updateSalary", {ParameterSpec::single("Employee"), ParameterSpec::integer()}, {"salary", "pay"}}},
               positions()) {}

  static std::vector<std::string> positions() { return {"DEVELOPER", "MANAGER", "QA"}; }

  GenerationRanges default_ranges() const override {
    return GenerationRanges({{"employees", {3, 7}}, {"salary_values", {5, 15}}});
  }

  State generate_initial_state(Rng& rng, const GenerationRanges& ranges) const override {
    static const std::vector<std::string> names = {"alice", "bob",   "carol", "dave",
                                                   "erin",  "frank", "grace", "heidi"};
    StateBuilder b(id());
    std::vector<Value> staff, managers;
    int n = 0;
    for (const auto& name : pick_distinct(rng, names, uniform_int(rng, ranges.get("employees")))) {
      Value e = b.add_entity("emp" + std::to_string(++n), "Employee");
      b.add(e, "name", Value::text(name));
      b.add(e, "salary", Value::integer(10 * uniform_int(rng, ranges.get("salary_values"))));
      std::string pos = n == 1 ? "MANAGER" : pick(rng, positions());
      b.add(e, "position", Value::symbol(pos));
      (pos == "MANAGER" ? managers : staff).push_back(e);
    }
    for (const Value& e : staff) b.add(e, "manager", pick(rng, managers));
    return b.build();
  }

 protected:
  IntRange integer_argument_range(const InterfaceMethod&) const override { return {50, 150}; }

  State apply(const State& state, const MethodCall& call) const override {
    StateBuilder b(state);
    if (call.method == "assignEmployeesToNewManager") {
      const Value& boss = call.arguments[1][0];
      if (b.object(boss, "position") != Value::symbol("MANAGER")) {
        throw DomainException(boss.str() + " is not a manager");
      }
      for (const Value& e : call.arguments[0]) {
        if (e == boss) throw DomainException("an employee cannot manage themselves");
        b.set(e, "manager", boss);
      }
    } else if (call.method == "fireEmployees") {
      for (const Value& e : call.arguments[0]) b.erase_entity(e);
    } else if (call.method == "assignEmployeeToNewPosition") {
      b.set(call.arguments[0][0], "position", call.arguments[1][0]);
    } else {
      const Value& amount = call.arguments[1][0];
      if (amount.as_int() <= 0) throw DomainException("salary must be positive");
      b.set(call.arguments[0][0], "salary", amount);
    }
    return b.build();
  }
};

}  // namespace

DomainPtr make_calendar_domain() { return std::make_shared<CalendarDomain>(); }
DomainPtr make_container_domain() { return std::make_shared<ContainerDomain>(); }
DomainPtr make_file_domain() { return std::make_shared<FileDomain>(); }
DomainPtr make_lighting_domain() { return std::make_shared<LightingDomain>(); }
DomainPtr make_list_domain() { return std::make_shared<ListDomain>(); }
DomainPtr make_messenger_domain() { return std::make_shared<MessengerDomain>(); }
DomainPtr make_workforce_domain() { return std::make_shared<WorkforceDomain>(); }

std::vector<DomainPtr> builtin_domains() {
  return {make_calendar_domain(), make_container_domain(), make_file_domain(),     make_lighting_domain(),
          make_list_domain(),     make_messenger_domain(), make_workforce_domain()};
}

DomainRegistry builtin_registry() {
  DomainRegistry reg;
  for (auto& d : builtin_domains()) reg.add(std::move(d));
  return reg;
}

}  // namespace zsp
