#include <algorithm>
#include <chrono>
#include <map>
#include <set>
#include <sstream>

#include "prelat/oracles.hpp"
#include "prelat/parallel.hpp"

namespace prelat {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

Criterion start(int id, std::string title) {
  Criterion c;
  c.id = id;
  c.title = std::move(title);
  return c;
}

std::size_t failed_reports(const std::vector<Report>& rs, std::string* first) {
  std::size_t bad = 0;
  for (auto& r : rs) {
    if (r.ok()) continue;
    if (bad++ == 0 && first) {
      for (auto& v : r.verdicts)
        if (!v.pass) {
          *first = r.name + ": " + v.assertion + (v.detail.empty() ? "" : " (" + v.detail + ")");
          break;
        }
    }
  }
  return bad;
}

std::vector<Nat> iota_gens(std::size_t n) {
  std::vector<Nat> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = i;
  return g;
}

}  // namespace

Criterion criterion_nf_oracle(std::size_t max_size, std::size_t generators, bool parallel) {
  auto t0 = Clock::now();
  Criterion c = start(1, "nf_leq agrees with the boolean-assignment oracle");
  auto terms = enumerate_terms(max_size, iota_gens(generators));
  OracleSweep s = parallel ? nf_oracle_sweep_parallel(terms) : nf_oracle_sweep_serial(terms);
  c.pass = s.disagreements == 0;
  c.counts = {{"terms", s.terms}, {"classes", s.classes}, {"comparisons", s.pairs}, {"disagreements", s.disagreements}};
  std::ostringstream d;
  d << s.terms << " terms, " << s.classes << " classes, " << s.pairs << " comparisons, " << s.disagreements
    << " disagreements";
  c.detail = d.str();
  c.seconds = since(t0);
  return c;
}

Criterion criterion_congruence(std::size_t schedules, Nat stages, std::size_t max_size, Nat seed) {
  auto t0 = Clock::now();
  Criterion c = start(2, "substitution semantics equals the congruence-closure oracle");
  SplitMix64 rng(seed);
  std::vector<Nat> gens = iota_gens(3);
  auto terms = enumerate_terms(max_size, gens);
  // the oracle answers per free class; one representative term each
  std::map<NormalForm, std::size_t> index;
  std::vector<std::size_t> cls(terms.size()), reps;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    auto [it, fresh] = index.emplace(normalize(terms[i]), reps.size());
    if (fresh) reps.push_back(i);
    cls[i] = it->second;
  }
  std::size_t k = reps.size();
  std::size_t checked = 0, wrong = 0;
  for (std::size_t trial = 0; trial < schedules; ++trial) {
    Machine m;
    auto src = std::make_shared<ScriptedSource>(m);
    for (Nat g : gens) {
      Nat roll = rng.below(3);
      Nat at = 1 + rng.below(stages);
      if (roll == 1) src->add_left(g, at);
      if (roll == 2) src->add_right(g, at);
    }
    auto L = build_Ld01(m, src);
    std::vector<Nat> codes;
    for (auto& t : terms) codes.push_back(L->store().intern(t));
    m.advance_to(stages);
    for (Nat s = 0; s <= stages; ++s) {
      auto table = oracle_congruence_closure(collapse_pairs(*src, s), gens);
      std::vector<char> expected(k * k);
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) expected[a * k + b] = table.leq_terms(terms[reps[a]], terms[reps[b]]);
      for (std::size_t i = 0; i < terms.size(); ++i)
        for (std::size_t j = 0; j < terms.size(); ++j) {
          bool expect = s == 0 ? codes[i] == codes[j] : bool(expected[cls[i] * k + cls[j]]);
          ++checked;
          if (L->holds(codes[i], codes[j], s) != expect) ++wrong;
        }
    }
  }
  c.pass = wrong == 0;
  c.counts = {{"schedules", schedules}, {"comparisons", checked}, {"disagreements", wrong}};
  c.detail = std::to_string(schedules) + " schedules, " + std::to_string(terms.size()) + " terms, " +
             std::to_string(checked) + " comparisons, " + std::to_string(wrong) + " disagreements";
  c.seconds = since(t0);
  return c;
}

Criterion criterion_productive(std::size_t doubles, Nat seed) {
  auto t0 = Clock::now();
  Criterion c = start(3, "productive functions avoid closed-world superset doubles");
  SplitMix64 rng(seed);
  std::size_t violations = 0;
  double slowest = 0;
  {
    Machine m;
    auto ei = canonical_ei_pair(m);
    Nat zero_prog = m.add_program("0"), one_prog = m.add_program("1");
    for (std::size_t trial = 0; trial < doubles / 2; ++trial) {
      auto q0 = Clock::now();
      auto wu = ScriptedSet::create(m), wv = ScriptedSet::create(m);
      // members of U and V so far, plus constants with values >= 2, which lie outside U ∪ V
      wu->add(const_code(0), 0);
      wu->add(zero_prog, rng.below(5));
      wv->add(const_code(1), 0);
      wv->add(one_prog, rng.below(5));
      for (int n = 0; n < 6; ++n) {
        Nat extra = const_code(2 + rng.below(1000));
        if (!wu->stage_of(extra) && !wv->stage_of(extra)) (rng.coin() ? wu : wv)->add(extra, rng.below(20));
      }
      auto r = m.eval(ei.p.code, pair(wu->code(), wv->code()), m.config().fuel_budget + m.now());
      bool ok = r.converged;
      if (ok) {
        Nat e = r.value;
        m.advance_to(m.now() + 30);
        ok = !wu->stage_of(e) && !wv->stage_of(e) && !m.stamp(e, e);
      }
      if (!ok) ++violations;
      slowest = std::max(slowest, since(q0));
    }
  }
  {
    Machine m;
    auto ei = canonical_ei_pair(m);
    auto L = build_Ld01(m, std::make_shared<CanonicalSource>(m, ei));
    ProductiveFn p = ei_witness(*L);
    for (std::size_t trial = doubles / 2; trial < doubles; ++trial) {
      auto q0 = Clock::now();
      auto wu = ScriptedSet::create(m), wv = ScriptedSet::create(m);
      Nat x = L->fresh_generator(), y = L->fresh_generator();
      wu->add(L->bottom(), 0);
      wu->add(L->meet(x, L->bottom()), rng.below(5));
      wv->add(L->top(), 0);
      wv->add(L->join(x, L->top()), rng.below(5));
      // codes of free classes on either side keep the doubles disjoint supersets
      (rng.coin() ? wu : wv)->add(rng.coin() ? x : L->meet(x, y), rng.below(8));
      auto r = m.eval(p.code, pair(wu->code(), wv->code()), m.config().fuel_budget + m.now());
      bool ok = r.converged;
      if (ok) {
        Nat out = r.value;
        m.advance_to(m.now() + 30);
        ok = !wu->stage_of(out) && !wv->stage_of(out) && !closed_world_leq(*L, out, L->bottom()) &&
             !closed_world_leq(*L, L->top(), out);
      }
      if (!ok) ++violations;
      slowest = std::max(slowest, since(q0));
    }
  }
  c.pass = violations == 0 && slowest < 1.0;
  c.counts = {{"doubles", doubles}, {"violations", violations}, {"slowest_query_us", Nat(slowest * 1e6)}};
  c.detail = std::to_string(doubles) + " doubles, " + std::to_string(violations) + " violations, slowest query " +
             std::to_string(slowest * 1000) + " ms";
  c.seconds = since(t0);
  return c;
}

Criterion criterion_totalizer(std::size_t scenarios, Nat seed) {
  auto t0 = Clock::now();
  Criterion c = start(4, "totalizer contract and ufp agreement");
  std::vector<Scenario> batch;
  for (std::size_t i = 0; i < scenarios; ++i) {
    Scenario s;
    s.construction = ConstructionKind::Totalizer;
    s.seed = seed + i;
    s.name = "totalizer seed " + std::to_string(s.seed);
    batch.push_back(s);
  }
  auto reports = run_batch_parallel(batch);
  std::string first;
  std::size_t bad = failed_reports(reports, &first);
  std::size_t triggers = 0;
  for (auto& r : reports)
    if (r.counts.count("mode") && r.counts.at("mode") == 1) ++triggers;
  c.pass = bad == 0;
  c.counts = {{"scenarios", scenarios}, {"trigger_cases", triggers}, {"failures", bad}};
  c.detail = std::to_string(scenarios) + " scenarios (" + std::to_string(triggers) + " triggers), " +
             std::to_string(bad) + " failures" + (first.empty() ? "" : "; " + first);
  c.seconds = since(t0);
  return c;
}

namespace {

Criterion preorder_suite(int id, std::string title, std::size_t max_elements, ConstructionKind kind, bool parallel) {
  auto t0 = Clock::now();
  Criterion c = start(id, std::move(title));
  std::vector<Scenario> batch;
  std::size_t orders = 0;
  for (std::size_t n = 1; n <= max_elements; ++n)
    for (auto& order : all_preorders(n)) {
      ++orders;
      for (Schedule s : kSchedules) batch.push_back(preorder_scenario(order, s, kind));
    }
  auto reports = parallel ? run_batch_parallel(batch) : run_batch_serial(batch);
  std::string first;
  std::size_t bad = failed_reports(reports, &first);
  std::size_t fired = 0;
  for (auto& r : reports)
    for (auto& v : r.verdicts)
      if (v.assertion == "diamond monitor silent" && !v.pass) ++fired;
  c.pass = bad == 0;
  c.counts = {{"preorders", orders}, {"scenarios", batch.size()}, {"failures", bad}, {"diamond_fired", fired}};
  c.detail = std::to_string(orders) + " pre-orders x 3 schedules, " + std::to_string(bad) + " failures, diamond fired " +
             std::to_string(fired) + " times" + (first.empty() ? "" : "; " + first);
  c.seconds = since(t0);
  return c;
}

}  // namespace

Criterion criterion_universality(std::size_t max_elements, bool parallel) {
  return preorder_suite(5, "every small pre-order reduces to L", max_elements, ConstructionKind::Reduce, parallel);
}

Criterion criterion_local_universality(std::size_t max_elements, bool parallel) {
  return preorder_suite(6, "every small pre-order reduces into [x1, x1 v x2]", max_elements,
                        ConstructionKind::LocalReduce, parallel);
}

Criterion criterion_density(std::size_t pairs, std::size_t families, Nat seed) {
  auto t0 = Clock::now();
  Criterion c = start(7, "uniform density: strict midpoints, merged families, a ≡ b");
  SplitMix64 rng(seed);
  Machine m;
  auto ei = canonical_ei_pair(m);
  auto L = build_Ld01(m, std::make_shared<CanonicalSource>(m, ei));
  // small codes: two copies of each class so that equivalent pairs exist
  Nat g1 = L->fresh_generator(), g2 = L->fresh_generator();
  std::vector<std::vector<Nat>> classes = {
      {L->bottom(), L->meet(L->bottom(), L->bottom())},
      {L->top(), L->join(L->top(), L->top())},
      {g1, L->meet(g1, g1)},
      {g2, L->meet(g2, g2)},
      {L->meet(g1, g2), L->meet(g2, g1)},
      {L->join(g1, g2), L->join(g2, g1)},
  };
  Nat largest = 0;
  for (auto& cl : classes)
    for (Nat x : cl) largest = std::max(largest, x);
  auto k = totalizer_from_ei(L, *L->productive());
  UniformDensity D(L, k);
  D.run(pair(largest, largest) + 2);
  settle(m, 1 << 20);

  // strict pairs of classes
  std::vector<std::pair<std::size_t, std::size_t>> strict;
  for (std::size_t i = 0; i < classes.size(); ++i)
    for (std::size_t j = 0; j < classes.size(); ++j)
      if (closed_world_leq(*L, classes[i][0], classes[j][0]) && !closed_world_leq(*L, classes[j][0], classes[i][0]))
        strict.emplace_back(i, j);
  std::size_t mid_bad = 0;
  for (std::size_t t = 0; t < pairs; ++t) {
    auto [i, j] = strict[rng.below(strict.size())];
    Nat a = classes[i][rng.below(2)], b = classes[j][rng.below(2)];
    Nat f = D.f(a, b);
    if (!closed_world_leq(*L, a, f) || closed_world_leq(*L, f, a) || !closed_world_leq(*L, f, b) ||
        closed_world_leq(*L, b, f))
      ++mid_bad;
  }
  // families: all four code pairs over one pair of classes
  std::size_t fam_bad = 0;
  for (std::size_t t = 0; t < families; ++t) {
    std::size_t i = rng.below(classes.size()), j = rng.below(classes.size());
    Nat ref = D.f(classes[i][0], classes[j][0]);
    for (Nat a : classes[i])
      for (Nat b : classes[j])
        if (!closed_world_equiv(*L, D.f(a, b), ref)) {
          ++fam_bad;
          goto next_family;
        }
  next_family:;
  }
  std::size_t same_bad = 0;
  for (auto& cl : classes)
    for (Nat a : cl)
      for (Nat b : cl)
        if (!closed_world_equiv(*L, D.f(a, b), a)) ++same_bad;
  c.pass = mid_bad == 0 && fam_bad == 0 && same_bad == 0;
  c.counts = {{"pairs", pairs},         {"families", families},      {"midpoint_failures", mid_bad},
              {"family_failures", fam_bad}, {"equal_failures", same_bad}, {"merges", D.merges()},
              {"stages", D.stage()}};
  c.detail = std::to_string(pairs) + " strict pairs (" + std::to_string(mid_bad) + " bad), " +
             std::to_string(families) + " families (" + std::to_string(fam_bad) + " unmerged), a ≡ b cases " +
             std::to_string(same_bad) + " bad, " + std::to_string(D.merges()) + " merges over " +
             std::to_string(D.stage()) + " stages";
  c.seconds = since(t0);
  return c;
}

Criterion criterion_chains(std::size_t max_generators) {
  auto t0 = Clock::now();
  Criterion c = start(8, "semilattice descending chains bounded by g + 2");
  std::size_t checks = 0, violations = 0, elements = 0;
  std::map<std::size_t, std::size_t> longest;
  for (std::size_t n = 0; n <= max_generators; ++n) {
    Nat patterns = 1;
    for (std::size_t i = 0; i < n; ++i) patterns *= 3;
    for (Nat p = 0; p < patterns; ++p) {
      Machine m;
      auto src = std::make_shared<ScriptedSource>(m);
      Nat q = p;
      for (std::size_t i = 0; i < n; ++i, q /= 3) {
        if (q % 3 == 1) src->add_left(i, 1);
        if (q % 3 == 2) src->add_right(i, 1);
      }
      auto U = build_Usemi01(m, src);
      std::vector<Nat> gens;
      for (std::size_t i = 0; i < n; ++i) gens.push_back(U->gen(i));
      m.advance_to(1);
      auto rep = semilattice_nonuniversality_check(*U, gens, 1);
      ++checks;
      violations += rep.violations;
      elements += rep.elements;
      for (auto& [g, len] : rep.longest) longest[g] = std::max(longest[g], len);
    }
  }
  c.pass = violations == 0;
  c.counts = {{"checks", checks}, {"elements", elements}, {"violations", violations}};
  std::string lens;
  for (auto& [g, len] : longest) {
    c.counts["longest_g" + std::to_string(g)] = len;
    lens += " g=" + std::to_string(g) + ":" + std::to_string(len);
  }
  c.detail = std::to_string(checks) + " collapse patterns, " + std::to_string(violations) + " violations, longest" + lens;
  c.seconds = since(t0);
  return c;
}

Criterion criterion_meet_join(std::size_t generators, bool parallel) {
  auto t0 = Clock::now();
  Criterion c = start(9, "meet_join_pairs equals unrestricted brute force");
  auto ctx = iota_gens(generators);
  MeetJoinSweep s = parallel ? meet_join_sweep_parallel(ctx) : meet_join_sweep_serial(ctx);
  c.pass = s.mismatches == 0 && s.pairs == s.brute_pairs;
  c.counts = {{"intervals", s.intervals}, {"pairs", s.pairs}, {"brute_pairs", s.brute_pairs}, {"mismatches", s.mismatches}};
  c.detail = std::to_string(s.intervals) + " intervals a <= b, " + std::to_string(s.pairs) + " pairs vs " +
             std::to_string(s.brute_pairs) + " by brute force, " + std::to_string(s.mismatches) + " mismatches";
  c.seconds = since(t0);
  return c;
}

Criterion criterion_diagonal(std::size_t candidates, Nat seed) {
  auto t0 = Clock::now();
  Criterion c = start(10, "diagonal candidates all meet a mismatch certificate");
  Scenario s;
  s.construction = ConstructionKind::Diagonal;
  s.elements = candidates;
  s.seed = seed;
  // candidate i first acts at a stage s with unpair(s) = (i, t) and s > 3i + 1
  Nat need = 0;
  for (Nat i = 0; i < candidates; ++i) {
    Nat t = 0;
    while (pair(i, t) <= 3 * i + 1) ++t;
    need = std::max(need, pair(i, t) + 1);
  }
  s.budgets.stage_budget = need + 1;
  s.budgets.fuel_budget = 256;
  Report r = run(s);
  c.pass = r.ok() && r.counts["certificates"] > 0;
  c.counts = {{"candidates", r.counts["candidates"]},
              {"certificates", r.counts["certificates"]},
              {"actions", r.counts["actions"]}};
  std::string first;
  for (auto& v : r.verdicts)
    if (!v.pass && first.empty()) first = v.assertion + " " + v.detail;
  c.detail = std::to_string(r.counts["candidates"]) + " candidates, " + std::to_string(r.counts["certificates"]) +
             " certificates, " + std::to_string(r.counts["actions"]) + " collapses" +
             (first.empty() ? "" : "; " + first);
  c.seconds = since(t0);
  return c;
}

Criterion criterion_refutation(std::size_t doubles, Nat seed) {
  auto t0 = Clock::now();
  Criterion c = start(11, "broken doubles: One/Zero certify 1 <= 0");
  SplitMix64 rng(seed);
  std::size_t certified = 0, replay_bad = 0;
  std::string why;
  for (std::size_t trial = 0; trial < doubles; ++trial) {
    Machine m;
    auto ei = canonical_ei_pair(m);
    auto src = std::make_shared<BrokenSource>(m, ei);
    auto L = build_Ld01(m, src);
    auto k = totalizer_from_ei(L, *L->productive());
    auto trace = std::make_shared<Trace>();
    ReductionConfig cfg;
    cfg.elements = 2 + trial % 2;
    cfg.stages = 8;
    cfg.refutation = true;
    UniversalReduction U(L, k, std::make_shared<ScriptedPreorder>(), cfg, {trace, "reduce"});
    // the rogue collapse targets the productive outputs inside k for one f(n)
    std::size_t n = trial % cfg.elements;
    Nat e = U.e_of(n, U.tau(n));
    Nat when = 1 + rng.below(4);
    bool to_one = (trial / 2) % 2;
    for (auto& [key, call] : k.log->calls) {
      if (call.e != e) continue;
      for (Nat code : call.c) {
        const auto& node = L->store().node(code);
        if (node.kind != TermKind::Gen) continue;
        if (to_one)
          src->rogue().add_right(node.a, when);
        else
          src->rogue().add_left(node.a, when);
      }
    }
    try {
      U.run();
    } catch (const std::exception& ex) {
      if (why.empty()) why = ex.what();
      continue;
    }
    bool ok = U.diamond() && U.diamond()->contradiction;
    auto certs = trace->of_kind("equivalence_certified");
    ok = ok && !certs.empty() && certs.back().note == "1 <= 0";
    if (ok) ++certified;
    else if (why.empty())
      why = "trial " + std::to_string(trial) + ": " + (U.diamond() ? "no contradiction" : "diamond never fired");
    auto replayed = replay_trace(trace->jsonl());
    if (!replayed.ok() || Trace::parse_jsonl(trace->jsonl()) != trace->events()) ++replay_bad;
  }
  c.pass = certified == doubles && replay_bad == 0;
  c.counts = {{"doubles", doubles}, {"certified", certified}, {"replay_failures", replay_bad}};
  c.detail = std::to_string(certified) + "/" + std::to_string(doubles) + " certified 1 <= 0, " +
             std::to_string(replay_bad) + " replay failures" + (why.empty() ? "" : "; " + why);
  c.seconds = since(t0);
  return c;
}

// ---------------------------------------------------------------------------

bool known_suite(const std::string& suite) {
  return suite == "lattice" || suite == "ce" || suite == "constructions" || suite == "all";
}

Report run_suite(const std::string& suite) {
  if (!known_suite(suite)) throw ScenarioParse("unknown suite " + suite);
  auto t0 = Clock::now();
  Report r;
  r.name = "suite " + suite;
  auto add = [&](const Criterion& c) {
    r.add(std::to_string(c.id) + " " + c.title, c.pass, c.detail);
    for (auto& [k, v] : c.counts) r.counts["c" + std::to_string(c.id) + "." + k] = v;
  };
  bool all = suite == "all";
  if (all || suite == "lattice") {
    add(criterion_nf_oracle(5, 3, true));
    add(criterion_congruence(5, 8, 3, 1));
    add(criterion_chains(3));
    add(criterion_meet_join(3, true));
  }
  if (all || suite == "ce") {
    add(criterion_productive(20, 3));
    Machine m;
    ScriptedPreorder discrete;
    Nat succ = m.add_program("(add x 1)");
    Report d = check_diagonal(m, succ, discrete, {0, 1, 2, 3, 4}, 10, 64);
    r.add("successor is diagonal for the identity ceer", d.ok());
    Nat id = m.add_program("x");
    Report e = check_diagonal(m, id, discrete, {0, 1, 2}, 10, 64);
    r.add("identity is not diagonal", !e.ok() && e.counts["witness_stage"] == 0);
  }
  if (all || suite == "constructions") {
    add(criterion_totalizer(6, 0));
    add(criterion_universality(2, true));
    add(criterion_local_universality(2, true));
    add(criterion_density(10, 5, 7));
    add(criterion_diagonal(4, 1));
    add(criterion_refutation(2, 5));
  }
  r.runtime_seconds = since(t0);
  return r;
}

}  // namespace prelat
