#include <algorithm>
#include <map>
#include <set>

#include "prelat/harness.hpp"

namespace prelat {

std::string schedule_name(Schedule s) {
  switch (s) {
    case Schedule::AllAtOnce: return "all-at-once";
    case Schedule::OneEdgePerStage: return "one-edge-per-stage";
    case Schedule::ReverseGaps: return "reverse-with-gaps";
  }
  return "?";
}

std::vector<ScriptedPreorder::Event> schedule_events(const PreorderBits& order, Schedule s) {
  std::vector<std::pair<Nat, Nat>> edges;
  for (std::size_t i = 0; i < order.n; ++i)
    for (std::size_t j = 0; j < order.n; ++j)
      if (i != j && order.leq(i, j)) edges.emplace_back(i, j);
  if (s == Schedule::ReverseGaps) std::reverse(edges.begin(), edges.end());
  std::vector<ScriptedPreorder::Event> out;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    Nat stage = s == Schedule::AllAtOnce ? 1 : s == Schedule::OneEdgePerStage ? k + 1 : 3 * k + 2;
    out.push_back({edges[k].first, edges[k].second, stage});
  }
  return out;
}

Scenario preorder_scenario(const PreorderBits& order, Schedule s, ConstructionKind kind) {
  Scenario sc;
  sc.construction = kind;
  sc.preorder = schedule_events(order, s);
  sc.elements = std::max<std::size_t>(order.n, 1);
  Nat last = 0;
  for (auto& e : sc.preorder) last = std::max(last, e.stage);
  sc.budgets.stage_budget = last + 2;
  sc.name = construction_name(kind) + " n=" + std::to_string(order.n) + " bits=" + std::to_string(order.bits) + " " +
            schedule_name(s);
  return sc;
}

// ---------------------------------------------------------------------------

ReplayResult replay_trace(const std::string& jsonl) {
  ReplayResult out;
  auto events = Trace::parse_jsonl(jsonl);
  out.events = events.size();
  std::map<std::string, Nat> last_stage;
  std::set<Nat> defined;
  // construction -> a tau transition waiting for its certificate
  std::map<std::string, std::size_t> open_transition;
  std::map<std::string, std::vector<std::pair<Nat, Nat>>> recent_certs;
  auto problem = [&](std::size_t i, const std::string& why) {
    out.problems.push_back("event " + std::to_string(i + 1) + ": " + why);
  };
  for (std::size_t i = 0; i < events.size(); ++i) {
    const TraceEvent& e = events[i];
    ++out.kinds[e.kind];
    auto it = last_stage.find(e.construction);
    if (it != last_stage.end() && e.stage < it->second) problem(i, "stage went back in " + e.construction);
    last_stage[e.construction] = e.stage;
    if (e.kind == "deferred_defined") {
      if (e.codes.size() < 2) {
        problem(i, "deferred_defined needs index and value");
        continue;
      }
      if (!defined.insert(e.codes[0]).second) problem(i, "index " + std::to_string(e.codes[0]) + " defined twice");
    } else if (e.kind == "equivalence_certified") {
      if (e.codes.size() < 2) {
        problem(i, "equivalence_certified needs two codes");
        continue;
      }
      out.certified.emplace_back(e.codes[0], e.codes[1]);
      open_transition.erase(e.construction);
      recent_certs[e.construction].emplace_back(e.codes[0], e.codes[1]);
    } else if (e.kind == "tau_transition") {
      if (open_transition.count(e.construction)) problem(open_transition[e.construction], "transition never certified");
      open_transition[e.construction] = i;
    } else if (e.kind == "stage_begin") {
      if (open_transition.count(e.construction)) problem(open_transition[e.construction], "transition never certified");
      open_transition.erase(e.construction);
    } else if (e.kind == "density_merge") {
      if (e.codes.size() < 3) {
        problem(i, "density_merge needs pair, least pair and target");
        continue;
      }
      auto& certs = recent_certs[e.construction];
      bool found = std::any_of(certs.begin(), certs.end(), [&](auto& c) { return c.second == e.codes[2]; });
      if (!found) problem(i, "merge onto " + std::to_string(e.codes[2]) + " without a certificate");
    }
  }
  for (auto& [c, i] : open_transition) problem(i, "transition never certified");
  return out;
}

ReplayResult reproduce(const Scenario& scenario, const std::string& jsonl) {
  ReplayResult out = replay_trace(jsonl);
  RunOptions opts;
  opts.trace = std::make_shared<Trace>();
  run(scenario, opts);
  ReplayResult again = replay_trace(opts.trace->jsonl());
  if (again.certified != out.certified)
    out.problems.push_back("re-run certified " + std::to_string(again.certified.size()) + " equivalences, trace has " +
                           std::to_string(out.certified.size()));
  else if (opts.trace->events() != Trace::parse_jsonl(jsonl))
    out.problems.push_back("re-run certifies the same equivalences but the event streams differ");
  return out;
}

}  // namespace prelat
