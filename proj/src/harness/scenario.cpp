#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"
#include "prelat/harness.hpp"

namespace prelat {

namespace {

using json = nlohmann::json;

constexpr std::pair<ConstructionKind, const char*> kNames[] = {
    {ConstructionKind::Reduce, "reduce"},
    {ConstructionKind::LocalReduce, "local_reduce"},
    {ConstructionKind::Density, "density"},
    {ConstructionKind::Totalizer, "totalizer"},
    {ConstructionKind::Diagonal, "diagonal"},
    {ConstructionKind::SemilatticeCheck, "semilattice_check"},
    {ConstructionKind::Incomparable, "incomparable"},
};

[[noreturn]] void fail(const std::string& why) { throw ScenarioParse("scenario: " + why); }

void only_fields(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where + " must be an object");
  for (auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      fail("unknown field " + where + "." + key);
  }
}

Nat natural(const json& j, const std::string& where) {
  if (!j.is_number_unsigned()) fail(where + " must be a natural number");
  return j.get<Nat>();
}

Nat natural_field(const json& j, const char* key, const std::string& where, Nat fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  return natural(*it, where + "." + key);
}

std::vector<CollapseEvent> collapses(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where + " must be a list");
  std::vector<CollapseEvent> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string at = where + "[" + std::to_string(i) + "]";
    only_fields(j[i], at, {"gen", "stage"});
    if (!j[i].contains("gen")) fail(at + " needs gen");
    out.push_back({natural(j[i]["gen"], at + ".gen"), natural_field(j[i], "stage", at, 1)});
  }
  return out;
}

}  // namespace

std::string construction_name(ConstructionKind kind) {
  for (auto& [k, name] : kNames)
    if (k == kind) return name;
  return "?";
}

std::optional<ConstructionKind> construction_from_name(const std::string& name) {
  for (auto& [k, n] : kNames)
    if (name == n) return k;
  return std::nullopt;
}

std::size_t element_count(const Scenario& s) {
  if (s.elements) return s.elements;
  std::size_t n = 2;
  for (auto& e : s.preorder) n = std::max<std::size_t>(n, std::max(e.x, e.y) + 1);
  return n;
}

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(e.what());
  }
  only_fields(j, "scenario",
              {"v", "name", "pair_source", "preorder_R", "elements", "construction", "budgets", "seed"});
  if (!j.contains("v")) fail("missing schema version v");
  if (natural(j["v"], "v") != kScenarioVersion) fail("unsupported schema version");
  Scenario s;
  if (j.contains("name")) {
    if (!j["name"].is_string()) fail("name must be a string");
    s.name = j["name"].get<std::string>();
  }
  if (!j.contains("construction") || !j["construction"].is_string()) fail("missing construction");
  auto kind = construction_from_name(j["construction"].get<std::string>());
  if (!kind) fail("unknown construction " + j["construction"].get<std::string>());
  s.construction = *kind;

  if (j.contains("pair_source")) {
    const json& ps = j["pair_source"];
    std::string k;
    if (ps.is_string()) {
      k = ps.get<std::string>();
    } else {
      only_fields(ps, "pair_source", {"kind", "U", "V"});
      if (!ps.contains("kind") || !ps["kind"].is_string()) fail("pair_source.kind missing");
      k = ps["kind"].get<std::string>();
      if (ps.contains("U")) s.U = collapses(ps["U"], "pair_source.U");
      if (ps.contains("V")) s.V = collapses(ps["V"], "pair_source.V");
    }
    if (k == "canonical") {
      s.source = SourceKind::Canonical;
      if (!s.U.empty() || !s.V.empty()) fail("canonical pair source takes no scripted events");
    } else if (k == "closed_world") {
      s.source = SourceKind::ClosedWorld;
    } else {
      fail("unknown pair_source kind " + k);
    }
  }

  if (j.contains("preorder_R")) {
    const json& r = j["preorder_R"];
    if (!r.is_array()) fail("preorder_R must be a list");
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::string at = "preorder_R[" + std::to_string(i) + "]";
      only_fields(r[i], at, {"x", "y", "stage"});
      if (!r[i].contains("x") || !r[i].contains("y")) fail(at + " needs x and y");
      s.preorder.push_back(
          {natural(r[i]["x"], at + ".x"), natural(r[i]["y"], at + ".y"), natural_field(r[i], "stage", at, 1)});
    }
    std::stable_sort(s.preorder.begin(), s.preorder.end(),
                     [](const auto& a, const auto& b) { return a.stage < b.stage; });
  }
  s.elements = natural_field(j, "elements", "scenario", 0);
  if (s.elements)
    for (auto& e : s.preorder)
      if (e.x >= s.elements || e.y >= s.elements) fail("preorder_R names an element past elements");

  if (j.contains("budgets")) {
    const json& b = j["budgets"];
    only_fields(b, "budgets", {"stage_budget", "fuel_budget", "wait_budget"});
    s.budgets.stage_budget = natural_field(b, "stage_budget", "budgets", s.budgets.stage_budget);
    s.budgets.fuel_budget = natural_field(b, "fuel_budget", "budgets", s.budgets.fuel_budget);
    s.budgets.wait_budget = natural_field(b, "wait_budget", "budgets", s.budgets.wait_budget);
  }
  s.seed = natural_field(j, "seed", "scenario", 0);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioParse("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string scenario_json(const Scenario& s) {
  nlohmann::ordered_json j;
  j["v"] = kScenarioVersion;
  if (!s.name.empty()) j["name"] = s.name;
  if (s.source == SourceKind::Canonical) {
    j["pair_source"] = "canonical";
  } else {
    nlohmann::ordered_json ps;
    ps["kind"] = "closed_world";
    auto side = [](const std::vector<CollapseEvent>& evs) {
      auto a = nlohmann::ordered_json::array();
      for (auto& e : evs) a.push_back({{"gen", e.gen}, {"stage", e.stage}});
      return a;
    };
    ps["U"] = side(s.U);
    ps["V"] = side(s.V);
    j["pair_source"] = ps;
  }
  auto r = nlohmann::ordered_json::array();
  for (auto& e : s.preorder) r.push_back({{"x", e.x}, {"y", e.y}, {"stage", e.stage}});
  j["preorder_R"] = r;
  if (s.elements) j["elements"] = s.elements;
  j["construction"] = construction_name(s.construction);
  j["budgets"] = {{"stage_budget", s.budgets.stage_budget},
                  {"fuel_budget", s.budgets.fuel_budget},
                  {"wait_budget", s.budgets.wait_budget}};
  j["seed"] = s.seed;
  return j.dump(2);
}

// ---------------------------------------------------------------------------

void Report::add(std::string assertion, bool pass, std::string detail) {
  verdicts.push_back({std::move(assertion), pass, std::move(detail)});
}

bool Report::ok() const { return failures() == 0; }

std::size_t Report::failures() const {
  return std::count_if(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return !v.pass; });
}

std::string Report::json(bool with_runtime) const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["ok"] = ok();
  auto vs = nlohmann::ordered_json::array();
  for (auto& v : verdicts) {
    nlohmann::ordered_json o;
    o["assertion"] = v.assertion;
    o["pass"] = v.pass;
    if (!v.detail.empty()) o["detail"] = v.detail;
    vs.push_back(o);
  }
  j["verdicts"] = vs;
  j["counts"] = counts;
  j["trace_path"] = trace_path;
  if (with_runtime) j["runtime_seconds"] = runtime_seconds;
  return j.dump(2);
}

std::string Report::text() const {
  std::ostringstream out;
  for (auto& v : verdicts) {
    out << (v.pass ? "PASS " : "FAIL ") << v.assertion;
    if (!v.detail.empty()) out << ": " << v.detail;
    out << '\n';
  }
  for (auto& [k, n] : counts) out << "  " << k << " = " << n << '\n';
  if (!trace_path.empty()) out << "  trace " << trace_path << '\n';
  out << (ok() ? "ok" : "FAILED") << " (" << verdicts.size() - failures() << "/" << verdicts.size() << ")\n";
  return out.str();
}

}  // namespace prelat
