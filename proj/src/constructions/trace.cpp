#include <algorithm>
#include <array>
#include <sstream>

#include "json.hpp"
#include "prelat/constructions.hpp"

namespace prelat {

namespace {
constexpr std::array<const char*, 9> kKinds = {"stage_begin",   "deferred_defined", "equivalence_certified",
                                               "tau_transition", "diamond_check",    "diamond_fired",
                                               "one_action",     "zero_action",      "density_merge"};
}

bool valid_event_kind(const std::string& kind) {
  return std::any_of(kKinds.begin(), kKinds.end(), [&](const char* k) { return kind == k; });
}

void Trace::emit(TraceEvent e) {
  if (!valid_event_kind(e.kind)) throw Error("unknown trace event kind: " + e.kind);
  events_.push_back(std::move(e));
}

std::size_t Trace::count(const std::string& kind) const {
  return std::count_if(events_.begin(), events_.end(), [&](const TraceEvent& e) { return e.kind == kind; });
}

std::vector<TraceEvent> Trace::of_kind(const std::string& kind) const {
  std::vector<TraceEvent> out;
  for (auto& e : events_)
    if (e.kind == kind) out.push_back(e);
  return out;
}

std::string Trace::to_json(const TraceEvent& e) {
  nlohmann::ordered_json j;
  j["kind"] = e.kind;
  j["stage"] = e.stage;
  j["codes"] = e.codes;
  j["construction"] = e.construction;
  if (!e.note.empty()) j["note"] = e.note;
  return j.dump();
}

std::string Trace::jsonl() const {
  std::string out;
  for (auto& e : events_) {
    out += to_json(e);
    out += '\n';
  }
  return out;
}

std::vector<TraceEvent> Trace::parse_jsonl(const std::string& text) {
  std::vector<TraceEvent> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      return ScenarioParse("trace line " + std::to_string(lineno) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw fail(e.what());
    }
    if (!j.is_object()) throw fail("not an object");
    for (auto& [key, value] : j.items()) {
      (void)value;
      if (key != "kind" && key != "stage" && key != "codes" && key != "construction" && key != "note")
        throw fail("unknown field " + key);
    }
    try {
      TraceEvent e;
      e.kind = j.at("kind").get<std::string>();
      e.stage = j.at("stage").get<Nat>();
      e.codes = j.at("codes").get<std::vector<Nat>>();
      e.construction = j.at("construction").get<std::string>();
      if (j.contains("note")) e.note = j.at("note").get<std::string>();
      if (!valid_event_kind(e.kind)) throw fail("unknown event kind " + e.kind);
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw fail(e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::optional<Nat> wait_for_equiv(PreLattice& lattice, Nat x, Nat y, Nat budget) {
  Machine& m = lattice.machine();
  for (Nat spent = 0;; ++spent) {
    if (m.settled_stage() > 0 && lattice.equiv_now(x, y)) return m.settled_stage();
    if (spent >= budget) return std::nullopt;
    m.tick();
  }
}

std::optional<Nat> wait_for_leq(PreLattice& lattice, Nat x, Nat y, Nat budget) {
  Machine& m = lattice.machine();
  for (Nat spent = 0;; ++spent) {
    if (m.settled_stage() > 0 && lattice.leq_now(x, y)) return m.settled_stage();
    if (spent >= budget) return std::nullopt;
    m.tick();
  }
}

Nat settle(Machine& m, Nat budget) {
  Nat start = m.now();
  while (!m.quiescent()) {
    auto next = m.next_scheduled();
    Nat target = next ? std::max(m.now() + 1, *next) : m.now() + 1;
    if (target > start + budget) throw StageBudgetExceeded("machine did not settle within " + std::to_string(budget));
    m.advance_to(target);
  }
  return m.now() - start;
}

bool closed_world_leq(PreLattice& lattice, Nat x, Nat y, Nat budget) {
  Machine& m = lattice.machine();
  if (m.settled_stage() == 0) m.advance_to(1);
  for (;;) {
    bool answer = lattice.leq_now(x, y);
    if (m.quiescent()) return answer;
    settle(m, budget);
  }
}

bool closed_world_equiv(PreLattice& lattice, Nat x, Nat y, Nat budget) {
  Machine& m = lattice.machine();
  if (m.settled_stage() == 0) m.advance_to(1);
  for (;;) {
    bool answer = lattice.leq_now(x, y);
    answer = lattice.leq_now(y, x) && answer;
    if (m.quiescent()) return answer;
    settle(m, budget);
  }
}

}  // namespace prelat
