#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prelat/constructions.hpp"

namespace prelat {

// ---------------------------------------------------------------------------
// Scenario files, schema version 1.

inline constexpr int kScenarioVersion = 1;

struct Budgets {
  Nat stage_budget = 16;   // construction stages
  Nat fuel_budget = 4096;  // machine search bound
  Nat wait_budget = 512;   // ticks per speedup wait
};

enum class SourceKind : std::uint8_t { Canonical, ClosedWorld };

enum class ConstructionKind : std::uint8_t {
  Reduce,
  LocalReduce,
  Density,
  Totalizer,
  Diagonal,
  SemilatticeCheck,
  Incomparable,
};

std::string construction_name(ConstructionKind kind);
std::optional<ConstructionKind> construction_from_name(const std::string& name);

struct CollapseEvent {
  Nat gen = 0, stage = 0;
};

struct Scenario {
  std::string name;
  SourceKind source = SourceKind::Canonical;
  // Closed world: generators entering U (collapse to 0) and V (collapse to 1).
  std::vector<CollapseEvent> U, V;
  std::vector<ScriptedPreorder::Event> preorder;  // sorted by stage
  std::size_t elements = 0;                        // 0: read off preorder_R, at least 2
  ConstructionKind construction = ConstructionKind::Reduce;
  Budgets budgets;
  Nat seed = 0;
};

// Throws ScenarioParse on malformed JSON, unknown fields or a wrong version.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string scenario_json(const Scenario& s);
std::size_t element_count(const Scenario& s);

// ---------------------------------------------------------------------------
// Reports.

struct Verdict {
  std::string assertion;
  bool pass = false;
  std::string detail;
  friend bool operator==(const Verdict& a, const Verdict& b) {
    return a.assertion == b.assertion && a.pass == b.pass && a.detail == b.detail;
  }
};

struct Report {
  std::string name;
  std::vector<Verdict> verdicts;
  std::map<std::string, Nat> counts;
  double runtime_seconds = 0;
  std::string trace_path;

  void add(std::string assertion, bool pass, std::string detail = {});
  bool ok() const;
  std::size_t failures() const;
  std::string json(bool with_runtime = true) const;
  std::string text() const;
};

struct RunOptions {
  std::string trace_path;              // JSON lines written here when set
  std::optional<Nat> stage_budget;     // overrides the scenario's
  std::shared_ptr<Trace> trace;        // collects events when set
};

// Deterministic apart from runtime_seconds. Throws BudgetExceeded for a zero budget or when a
// speedup wait runs out.
Report run(const Scenario& scenario, const RunOptions& opts = {});

// No sample x gets x ≡ delta(x) certified in E at any stage up to `stages`.
Report check_diagonal(Machine& m, Nat delta, StagedRelation& E, const std::vector<Nat>& samples, Nat stages,
                      Nat fuel);

// ---------------------------------------------------------------------------
// Adversarial presentations of a fixed pre-order on {0..n-1}.

enum class Schedule : std::uint8_t {
  AllAtOnce,       // every edge at stage 1
  OneEdgePerStage, // lexicographic, edge k at stage k+1
  ReverseGaps,     // reverse lexicographic, edge k at stage 3k+2
};

inline constexpr Schedule kSchedules[] = {Schedule::AllAtOnce, Schedule::OneEdgePerStage, Schedule::ReverseGaps};
std::string schedule_name(Schedule s);
std::vector<ScriptedPreorder::Event> schedule_events(const PreorderBits& order, Schedule s);
// Reduction scenario presenting `order` under `s`, with enough stages to see every edge.
Scenario preorder_scenario(const PreorderBits& order, Schedule s, ConstructionKind kind = ConstructionKind::Reduce);

// ---------------------------------------------------------------------------
// Trace replay.

struct ReplayResult {
  std::size_t events = 0;
  std::map<std::string, std::size_t> kinds;
  std::vector<std::pair<Nat, Nat>> certified;  // first two codes of each equivalence_certified
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};

// Parses and checks a trace: stages never decrease within a construction, deferred indices are
// defined once, every tau transition and density merge is certified.
ReplayResult replay_trace(const std::string& jsonl);
// Re-runs the scenario and compares the certified equivalences with the trace.
ReplayResult reproduce(const Scenario& scenario, const std::string& jsonl);

// ---------------------------------------------------------------------------
// Checks, one per acceptance criterion, at a chosen scale.

struct Criterion {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0;
  std::map<std::string, Nat> counts;
};

Criterion criterion_nf_oracle(std::size_t max_size, std::size_t generators, bool parallel);
Criterion criterion_congruence(std::size_t schedules, Nat stages, std::size_t max_size, Nat seed);
// counts["slowest_query_us"] holds the slowest productive query.
Criterion criterion_productive(std::size_t doubles, Nat seed);
Criterion criterion_totalizer(std::size_t scenarios, Nat seed);
Criterion criterion_universality(std::size_t max_elements, bool parallel);
Criterion criterion_local_universality(std::size_t max_elements, bool parallel);
Criterion criterion_density(std::size_t pairs, std::size_t families, Nat seed);
Criterion criterion_chains(std::size_t max_generators);
Criterion criterion_meet_join(std::size_t generators, bool parallel);
Criterion criterion_diagonal(std::size_t candidates, Nat seed);
Criterion criterion_refutation(std::size_t doubles, Nat seed);

// Named suites at desk scale: lattice, ce, constructions, all.
Report run_suite(const std::string& suite);
bool known_suite(const std::string& suite);

}  // namespace prelat
