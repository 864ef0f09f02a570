#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "prelat/parallel.hpp"

using namespace prelat;

namespace {

const char* kChain2 = R"({
  "v": 1, "name": "chain2", "pair_source": "canonical",
  "preorder_R": [{"x": 0, "y": 1, "stage": 2}], "elements": 2,
  "construction": "reduce",
  "budgets": {"stage_budget": 6, "fuel_budget": 4096, "wait_budget": 512}, "seed": 1
})";

Scenario of_kind(ConstructionKind k, Nat seed = 0) {
  Scenario s;
  s.construction = k;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("scenario parsing") {
  Scenario s = parse_scenario(kChain2);
  CHECK(s.name == "chain2");
  CHECK(s.construction == ConstructionKind::Reduce);
  CHECK(s.preorder.size() == 1);
  CHECK(s.budgets.stage_budget == 6);
  CHECK(element_count(s) == 2);
  CHECK(parse_scenario(scenario_json(s)).preorder.size() == 1);
  CHECK(scenario_json(parse_scenario(scenario_json(s))) == scenario_json(s));

  CHECK_THROWS_AS(parse_scenario("{not json"), ScenarioParse);
  CHECK_THROWS_AS(parse_scenario(R"({"v":1,"construction":"reduce","extra":0})"), ScenarioParse);
  CHECK_THROWS_AS(parse_scenario(R"({"v":2,"construction":"reduce"})"), ScenarioParse);
  CHECK_THROWS_AS(parse_scenario(R"({"construction":"reduce"})"), ScenarioParse);
  CHECK_THROWS_AS(parse_scenario(R"({"v":1,"construction":"sort"})"), ScenarioParse);
  CHECK_THROWS_AS(parse_scenario(R"({"v":1,"construction":"reduce","seed":-1})"), ScenarioParse);
  CHECK_THROWS_AS(parse_scenario(R"({"v":1,"construction":"reduce","budgets":{"stages":3}})"), ScenarioParse);
  CHECK_THROWS_AS(parse_scenario(R"({"v":1,"construction":"reduce","elements":2,"preorder_R":[{"x":0,"y":3}]})"),
                  ScenarioParse);
  CHECK_THROWS_AS(parse_scenario(R"({"v":1,"construction":"reduce","pair_source":{"kind":"canonical","U":[{"gen":1}]}})"),
                  ScenarioParse);

  // events are sorted by stage
  Scenario t = parse_scenario(
      R"({"v":1,"construction":"reduce","preorder_R":[{"x":1,"y":0,"stage":5},{"x":0,"y":2,"stage":1}]})");
  CHECK(t.preorder.front().stage == 1);
  CHECK(element_count(t) == 3);
  Scenario cw = parse_scenario(
      R"({"v":1,"construction":"diagonal","pair_source":{"kind":"closed_world","U":[{"gen":2,"stage":3}],"V":[]}})");
  CHECK(cw.source == SourceKind::ClosedWorld);
  CHECK(cw.U.size() == 1);
}

TEST_CASE("chain2 passes and reports are deterministic") {
  Scenario s = parse_scenario(kChain2);
  Report a = run(s), b = run(s);
  CHECK(a.ok());
  CHECK(a.json(false) == b.json(false));
  // every assertion appears once
  std::set<std::string> names;
  for (auto& v : a.verdicts) CHECK(names.insert(v.assertion).second);
  CHECK(names.size() == 3);
}

TEST_CASE("zero budgets are rejected") {
  Scenario s = parse_scenario(kChain2);
  s.budgets.stage_budget = 0;
  CHECK_THROWS_AS(run(s), BudgetExceeded);
  s = parse_scenario(kChain2);
  s.budgets.wait_budget = 0;
  CHECK_THROWS_AS(run(s), BudgetExceeded);
  s = parse_scenario(kChain2);
  RunOptions o;
  o.stage_budget = 0;
  CHECK_THROWS_AS(run(s, o), BudgetExceeded);
}

TEST_CASE("every construction runs from a scenario") {
  for (auto k : {ConstructionKind::Reduce, ConstructionKind::LocalReduce, ConstructionKind::Density,
                 ConstructionKind::Totalizer, ConstructionKind::Diagonal, ConstructionKind::SemilatticeCheck,
                 ConstructionKind::Incomparable}) {
    CAPTURE(construction_name(k));
    Scenario s = of_kind(k, 4);
    if (k == ConstructionKind::Diagonal) s.budgets.stage_budget = 30;
    Report r = run(s);
    CHECK(r.ok());
    CHECK_FALSE(r.verdicts.empty());
    CHECK(run(s).json(false) == r.json(false));
  }
}

TEST_CASE("totalizer scenarios cover all three modes") {
  for (Nat seed = 0; seed < 6; ++seed) {
    Report r = run(of_kind(ConstructionKind::Totalizer, seed));
    CHECK(r.ok());
    CHECK(r.counts["mode"] == seed % 3);
  }
}

TEST_CASE("a rogue collapse fails the reduction without throwing") {
  Scenario s = parse_scenario(kChain2);
  s.source = SourceKind::ClosedWorld;
  // collapse every small generator id to 1; f(0) and f(1) become comparable
  for (Nat g = 0; g < 200; ++g) s.V.push_back({g, 2});
  Report r = run(s);
  CHECK_FALSE(r.ok());
}

TEST_CASE("check_diagonal examples") {
  Machine m;
  Nat succ = m.add_program("(add x 1)");
  Nat id = m.add_program("x");
  ScriptedPreorder discrete;
  CHECK(check_diagonal(m, succ, discrete, {0, 1, 2, 3, 4, 5}, 12, 64).ok());
  Report same = check_diagonal(m, id, discrete, {0, 1, 2}, 12, 64);
  CHECK_FALSE(same.ok());
  CHECK(same.counts["witness_stage"] == 0);
  ScriptedPreorder late({{3, 4, 7}, {4, 3, 7}});
  Report r = check_diagonal(m, succ, late, {0, 1, 2, 3, 4, 5}, 12, 64);
  CHECK_FALSE(r.ok());
  CHECK(r.failures() == 1);
  CHECK(r.counts["witness_stage"] == 7);
  CHECK(check_diagonal(m, succ, late, {3}, 6, 64).ok());
}

TEST_CASE("adversarial schedules present the same pre-order") {
  for (auto& order : all_preorders(3))
    for (Schedule s : kSchedules) {
      auto events = schedule_events(order, s);
      ScriptedPreorder R(events);
      Nat last = 0;
      for (auto& e : events) last = std::max(last, e.stage);
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(R.holds(i, j, last) == order.leq(i, j));
      if (s == Schedule::AllAtOnce)
        for (auto& e : events) CHECK(e.stage == 1);
      if (s == Schedule::ReverseGaps)
        for (std::size_t k = 1; k < events.size(); ++k) CHECK(events[k].stage == events[k - 1].stage + 3);
      Scenario sc = preorder_scenario(order, s);
      CHECK(sc.budgets.stage_budget > last);
    }
}

TEST_CASE("trace replay") {
  Scenario s = parse_scenario(kChain2);
  auto path = std::string("harness_test_trace.jsonl");
  RunOptions o;
  o.trace_path = path;
  Report r = run(s, o);
  CHECK(r.trace_path == path);
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::remove(path.c_str());
  auto res = replay_trace(text);
  CHECK(res.ok());
  CHECK(res.kinds["tau_transition"] == 1);
  CHECK(res.certified.size() == 1);
  CHECK(reproduce(s, text).ok());

  // a tampered trace
  Nat first_index = 0;
  for (auto& e : Trace::parse_jsonl(text))
    if (e.kind == "deferred_defined") {
      first_index = e.codes[0];
      break;
    }
  std::string twice = text + R"({"kind":"deferred_defined","stage":9,"codes":[)" + std::to_string(first_index) +
                      R"(,5],"construction":"reduce"})" + "\n";
  CHECK_FALSE(replay_trace(twice).ok());
  std::string back = text + R"({"kind":"stage_begin","stage":0,"codes":[],"construction":"reduce"})" + "\n";
  CHECK_FALSE(replay_trace(back).ok());
  std::string open = text + R"({"kind":"tau_transition","stage":9,"codes":[0,1,2],"construction":"reduce"})" + "\n";
  CHECK_FALSE(replay_trace(open).ok());
  CHECK_THROWS_AS(replay_trace(R"({"kind":"teleport","stage":1,"codes":[],"construction":"x"})"), ScenarioParse);
  Scenario other = s;
  other.preorder.clear();
  CHECK_FALSE(reproduce(other, text).ok());
}

TEST_CASE("parallel kernels match their serial twins") {
  auto terms = enumerate_terms(5, {0, 1, 2});
  OracleSweep a = nf_oracle_sweep_serial(terms), b = nf_oracle_sweep_parallel(terms);
  CHECK(a == b);
  CHECK(a.disagreements == 0);
  CHECK(a.classes <= 20);

  MeetJoinSweep c = meet_join_sweep_serial({0, 1}), d = meet_join_sweep_parallel({0, 1});
  CHECK(c == d);
  CHECK(c.mismatches == 0);
  CHECK(c.pairs == c.brute_pairs);

  std::vector<Scenario> batch;
  for (auto& order : all_preorders(2))
    for (Schedule s : kSchedules) batch.push_back(preorder_scenario(order, s));
  batch.push_back(parse_scenario(kChain2));
  Scenario broken = parse_scenario(kChain2);
  broken.budgets.wait_budget = 0;
  batch.push_back(broken);
  auto serial = run_batch_serial(batch), parallel = run_batch_parallel(batch);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) CHECK(serial[i].json(false) == parallel[i].json(false));
  CHECK_FALSE(serial.back().ok());
  for (std::size_t i = 0; i + 1 < serial.size(); ++i) CHECK(serial[i].ok());
}

TEST_CASE("desk-scale suites pass") {
  for (auto name : {"lattice", "ce"}) {
    CAPTURE(name);
    Report r = run_suite(name);
    CHECK(r.ok());
  }
  CHECK_THROWS_AS(run_suite("everything"), ScenarioParse);
}
