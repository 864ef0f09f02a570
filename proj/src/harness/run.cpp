#include <algorithm>
#include <chrono>
#include <fstream>

#include "prelat/harness.hpp"

namespace prelat {

namespace {

bool needs_productive(ConstructionKind k) {
  return k != ConstructionKind::Diagonal && k != ConstructionKind::SemilatticeCheck;
}

struct World {
  std::unique_ptr<Machine> m;
  CanonicalEi ei;
  std::shared_ptr<PairSource> source;
  std::shared_ptr<ScriptedSource> scripted;  // when the source is purely scripted

  explicit World(const Scenario& s) {
    MachineConfig cfg;
    cfg.fuel_budget = s.budgets.fuel_budget;
    m = std::make_unique<Machine>(cfg);
    ei = canonical_ei_pair(*m);
    if (!needs_productive(s.construction)) {
      scripted = std::make_shared<ScriptedSource>(*m);
      for (auto& e : s.U) scripted->add_left(e.gen, e.stage);
      for (auto& e : s.V) scripted->add_right(e.gen, e.stage);
      source = scripted;
    } else if (s.source == SourceKind::Canonical) {
      source = std::make_shared<CanonicalSource>(*m, ei);
    } else {
      auto broken = std::make_shared<BrokenSource>(*m, ei);
      for (auto& e : s.U) broken->rogue().add_left(e.gen, e.stage);
      for (auto& e : s.V) broken->rogue().add_right(e.gen, e.stage);
      source = broken;
    }
  }
};

std::string pairs_text(const std::vector<std::pair<std::size_t, std::size_t>>& ps) {
  std::string out;
  for (auto& [i, j] : ps) out += (out.empty() ? "" : ", ") + std::to_string(i) + "<=" + std::to_string(j);
  return out;
}

// Runs the stages of a reduction, turning claim and monitor failures into verdicts.
void drive(UniversalReduction& U, Report& r) {
  std::string claim, diamond;
  try {
    U.run();
  } catch (const ClaimViolated& e) {
    claim = e.what();
  } catch (const DiamondFired& e) {
    diamond = e.what();
  }
  r.add("claim holds at every stage", claim.empty(), claim);
  r.add("diamond monitor silent", diamond.empty(), diamond);
  r.counts["stages"] = U.stage();
  r.counts["transitions"] = U.transitions();
}

void run_reduce(const Scenario& s, World& w, const TraceSink& sink, Report& r) {
  auto L = build_Ld01(*w.m, w.source);
  auto R = std::make_shared<ScriptedPreorder>(s.preorder);
  ReductionConfig cfg;
  cfg.elements = element_count(s);
  cfg.stages = s.budgets.stage_budget;
  cfg.wait_budget = s.budgets.wait_budget;
  auto k = totalizer_from_ei(L, *L->productive(), sink.sub("k"));
  UniversalReduction U(L, k, R, cfg, sink);
  drive(U, r);
  std::vector<std::pair<std::size_t, std::size_t>> bad;
  bool ok = U.matches(U.stage(), &bad);
  r.add("order of f matches R under the closed world", ok, pairs_text(bad));
  r.counts["elements"] = cfg.elements;
}

void run_local_reduce(const Scenario& s, World& w, const TraceSink& sink, Report& r) {
  auto L = build_Ld01(*w.m, w.source);
  Nat a = L->fresh_generator(), g = L->fresh_generator();
  Nat b = L->join(a, g);
  auto R = std::make_shared<ScriptedPreorder>(s.preorder);
  ReductionConfig cfg;
  cfg.elements = element_count(s);
  cfg.stages = s.budgets.stage_budget;
  cfg.wait_budget = s.budgets.wait_budget;
  auto local = local_universal_reduction(L, a, b, R, cfg, sink);
  drive(*local.inner, r);
  std::vector<std::pair<std::size_t, std::size_t>> bad;
  bool ok = local.inner->matches(local.inner->stage(), &bad);
  r.add("order of f matches R under the closed world", ok, pairs_text(bad));
  std::string outside;
  for (std::size_t n = 0; n < cfg.elements; ++n) {
    Nat img = local.image(n);
    if (!closed_world_leq(*L, a, img) || !closed_world_leq(*L, img, b))
      outside += (outside.empty() ? "" : ", ") + std::to_string(n);
  }
  r.add("images certified inside [a, b]", outside.empty(), outside.empty() ? "" : "outside: " + outside);
  r.counts["elements"] = cfg.elements;
}

void run_density(const Scenario& s, World& w, const TraceSink& sink, Report& r) {
  auto L = build_Ld01(*w.m, w.source);
  SplitMix64 rng(s.seed);
  Nat g1 = L->fresh_generator(), g2 = L->fresh_generator();
  Nat low = L->meet(g1, g2), high = L->join(g1, g2);
  Nat g1c = L->meet(g1, g1);  // ≡ g1 under a different code
  std::vector<Nat> pool = {L->bottom(), L->top(), g1, g2, low, high};
  auto k = totalizer_from_ei(L, *L->productive(), sink.sub("k"));
  UniformDensity D(L, k, sink, s.budgets.wait_budget);
  // at least until every pair over the pool has been processed
  Nat largest = *std::max_element(pool.begin(), pool.end());
  largest = std::max(largest, g1c);
  D.run(std::max(s.budgets.stage_budget, pair(largest, largest) + 2));
  settle(*w.m, s.budgets.wait_budget * 64);
  std::size_t checked = 0;
  std::string bad;
  for (int t = 0; t < 4; ++t) {
    Nat a = pool[rng.below(pool.size())], b = pool[rng.below(pool.size())];
    if (!closed_world_leq(*L, a, b) || closed_world_leq(*L, b, a)) continue;
    Nat f = D.f(a, b);
    ++checked;
    if (!closed_world_leq(*L, a, f) || closed_world_leq(*L, f, a) || !closed_world_leq(*L, f, b) ||
        closed_world_leq(*L, b, f))
      bad += "(" + L->print(a) + ", " + L->print(b) + ") ";
  }
  r.add("a < f(a,b) < b on sampled pairs", bad.empty(), bad);
  bool merged = closed_world_equiv(*L, D.f(L->bottom(), g1), D.f(L->bottom(), g1c));
  r.add("f agrees on equivalent pairs", merged);
  r.add("f(a,b) ≡ a when a ≡ b", closed_world_equiv(*L, D.f(g1, g1c), g1));
  r.counts["stages"] = D.stage();
  r.counts["merges"] = D.merges();
  r.counts["forcings"] = D.forcings();
  r.counts["sampled_pairs"] = checked;
}

// One totalizer case; mode by seed: diverge, trigger inside D, trigger outside D.
void run_totalizer(const Scenario& s, World& w, const TraceSink& sink, Report& r) {
  auto L = build_Ld01(*w.m, w.source);
  Machine& m = *w.m;
  SplitMix64 rng(s.seed);
  int mode = static_cast<int>(s.seed % 3);
  std::size_t size = 1 + rng.below(3);
  std::vector<Nat> gens;
  for (int i = 0; i < 4; ++i) gens.push_back(L->fresh_generator());
  // D: distinct classes built from the generators
  std::vector<Nat> candidates = {gens[0], gens[1], L->join(gens[0], gens[1]), L->meet(gens[1], gens[2]), gens[2]};
  std::vector<Nat> D;
  while (D.size() < size) {
    Nat c = candidates[rng.below(candidates.size())];
    if (std::find(D.begin(), D.end(), c) == D.end()) D.push_back(c);
  }
  auto k = totalizer_from_ei(L, *L->productive(), sink.sub("k"));
  auto chi = uniform_from_totalizer(L, k);
  auto k2 = ufp_from_uei(L, chi, sink.sub("ufp"));
  Nat e = m.fresh_deferred("phi_e");
  Nat x = rng.below(4);
  Nat direct = k(D, e, x);
  Nat via = k2(D, e, x);
  r.add("k total", L->valid(direct) && L->valid(via));
  m.advance_to(m.now() + 1 + rng.below(3));
  Nat target = 0;
  if (mode == 1) {
    Nat d = D[rng.below(D.size())];
    target = rng.coin() ? d : L->meet(d, d);
    m.define_deferred(e, const_code(target));
  } else if (mode == 2) {
    target = L->join(gens[3], gens[2]);
    m.define_deferred(e, const_code(target));
  }
  if (mode != 0) sink("deferred_defined", m.now(), {e, target});
  if (mode == 1) {
    auto reached = wait_for_equiv(*L, direct, target, s.budgets.wait_budget);
    r.add("trigger certified: k(D,e,x) ≡ phi_e(x)", reached.has_value());
    if (reached) sink("equivalence_certified", *reached, {direct, target}, "k(D,e,x) ≡ phi_e(x)");
    auto reached2 = wait_for_equiv(*L, via, target, s.budgets.wait_budget);
    r.add("ufp_from_uei agrees", reached2.has_value() && closed_world_equiv(*L, direct, via));
    if (reached2) sink("equivalence_certified", *reached2, {via, target}, "ufp k(D,e,x) ≡ phi_e(x)");
  } else {
    settle(m, s.budgets.wait_budget * 64);
    // no d in D is the value, so neither totalizer is forced onto a member of D
    bool free = true;
    for (Nat d : D) free = free && !closed_world_equiv(*L, direct, d);
    r.add("k stays off D without a trigger", free);
  }
  r.counts["mode"] = static_cast<Nat>(mode);
  r.counts["D_size"] = D.size();
}

std::vector<Nat> diagonal_candidates(Machine& m, TermStore& store, std::size_t count, Nat seed) {
  SplitMix64 rng(seed);
  std::vector<Nat> out;
  for (std::size_t i = 0; i < count; ++i) {
    switch (i % 3) {
      case 0:
        out.push_back(m.add_program("diverge"));
        break;
      case 1:
        out.push_back(const_code(store.gen(1 + rng.below(9))));
        break;
      default: {
        Nat a = 1 + rng.below(9), b = 1 + rng.below(9), c = 10 + rng.below(3);
        if (a == b) b = a + 1;
        Nat j = i % 2 ? store.join(store.gen(a), store.gen(b))
                      : store.join(store.meet(store.gen(a), store.gen(b)), store.gen(c));
        out.push_back(const_code(j));
      }
    }
  }
  return out;
}

void run_diagonal(const Scenario& s, World& w, const TraceSink& sink, Report& r) {
  auto L2 = build_Ld01(*w.m, w.source);
  std::size_t count = std::max<std::size_t>(3, element_count(s));
  auto cands = diagonal_candidates(*w.m, L2->store(), count, s.seed);
  auto L1 = build_L1_diagonal(L2, cands, sink);
  L1->run(s.budgets.stage_budget);
  auto certs = L1->verify(s.budgets.fuel_budget);
  std::string missing, unconfirmed;
  std::vector<bool> seen(cands.size());
  for (auto& c : certs) {
    seen[c.candidate] = true;
    if (!c.mismatch()) missing += std::to_string(c.candidate) + " ";
    auto gens = nf_generators(c.target_class);
    if (gens.size() <= kMaxBruteForceGenerators &&
        meet_irreducible(c.target_class, {gens.begin(), gens.end()}) != c.target_irreducible)
      unconfirmed += std::to_string(c.candidate) + " ";
  }
  for (std::size_t i = 0; i < cands.size(); ++i)
    if (!seen[i] && w.m->eval(cands[i], L1->z1(i), s.budgets.fuel_budget).converged)
      missing += std::to_string(i) + " ";
  r.add("mismatch certificate for every converging candidate", missing.empty(), missing);
  r.add("brute force confirms each certificate", unconfirmed.empty(), unconfirmed);
  r.counts["candidates"] = cands.size();
  r.counts["certificates"] = certs.size();
  r.counts["actions"] = L1->actions().size();
}

void run_semilattice(const Scenario& s, World& w, Report& r) {
  auto U = build_Usemi01(*w.m, w.source);
  std::size_t n = std::min<std::size_t>(kMaxBruteForceGenerators, element_count(s));
  std::vector<Nat> gens;
  for (std::size_t i = 0; i < n; ++i) gens.push_back(U->gen(i));
  w.m->advance_to(s.budgets.stage_budget);
  auto rep = semilattice_nonuniversality_check(*U, gens, s.budgets.stage_budget);
  r.add("descending chains within g + 2", rep.ok(), std::to_string(rep.violations) + " violations");
  r.counts["elements"] = rep.elements;
  for (auto& [g, len] : rep.longest) r.counts["longest_chain_g" + std::to_string(g)] = len;
}

void run_incomparable(const Scenario& s, World& w, Report& r) {
  auto L = build_Ld01(*w.m, w.source);
  Machine& m = *w.m;
  SplitMix64 rng(s.seed);
  Nat g1 = L->fresh_generator(), g2 = L->fresh_generator();
  std::vector<Nat> pool = {g1, g2, L->join(g1, g2), L->meet(g1, g2)};
  std::vector<Nat> members;
  std::size_t size = 1 + rng.below(pool.size());
  while (members.size() < size) {
    Nat c = pool[rng.below(pool.size())];
    if (std::find(members.begin(), members.end(), c) == members.end()) members.push_back(c);
  }
  Nat X = m.define_dynamic(
      [members](Nat y, Ctx&) -> std::optional<Nat> {
        if (std::find(members.begin(), members.end(), y) != members.end()) return 0;
        return std::nullopt;
      },
      "X");
  m.advance_to(std::max<Nat>(m.now(), 1));
  Nat bound = L->store().size();
  Nat y = incomparable_in_interval(*L, L->bottom(), L->top(), X, *L->productive(), bound);
  Nat z = incomparable_in_interval(static_cast<StagedRelation&>(*L), L->bottom(), L->top(), X, *L->productive(), m,
                                   bound);
  for (Nat t = 0; t < s.budgets.stage_budget; ++t) m.tick();
  auto apart = [&](Nat c) {
    for (Nat x : members)
      if (closed_world_leq(*L, c, x) || closed_world_leq(*L, x, c)) return false;
    return true;
  };
  r.add("lattice witness incomparable with X", apart(y));
  r.add("lattice witness strictly inside (0, 1)",
        !closed_world_leq(*L, y, L->bottom()) && !closed_world_leq(*L, L->top(), y));
  r.add("pre-order witness incomparable with X", L->valid(z) && apart(z));
  r.counts["X_size"] = members.size();
}

}  // namespace

Report run(const Scenario& scenario, const RunOptions& opts) {
  auto start = std::chrono::steady_clock::now();
  Scenario s = scenario;
  if (opts.stage_budget) s.budgets.stage_budget = *opts.stage_budget;
  if (s.budgets.stage_budget == 0) throw BudgetExceeded("stage_budget is zero");
  if (s.budgets.fuel_budget == 0) throw BudgetExceeded("fuel_budget is zero");
  if (s.budgets.wait_budget == 0) throw BudgetExceeded("wait_budget is zero");

  Report r;
  r.name = s.name.empty() ? construction_name(s.construction) : s.name;
  auto trace = opts.trace ? opts.trace : std::make_shared<Trace>();
  TraceSink sink{trace, construction_name(s.construction)};
  World w(s);
  switch (s.construction) {
    case ConstructionKind::Reduce: run_reduce(s, w, sink, r); break;
    case ConstructionKind::LocalReduce: run_local_reduce(s, w, sink, r); break;
    case ConstructionKind::Density: run_density(s, w, sink, r); break;
    case ConstructionKind::Totalizer: run_totalizer(s, w, sink, r); break;
    case ConstructionKind::Diagonal: run_diagonal(s, w, sink, r); break;
    case ConstructionKind::SemilatticeCheck: run_semilattice(s, w, r); break;
    case ConstructionKind::Incomparable: run_incomparable(s, w, r); break;
  }
  r.counts["trace_events"] = trace->events().size();
  r.counts["machine_stage"] = w.m->now();
  if (!opts.trace_path.empty()) {
    std::ofstream out(opts.trace_path);
    if (!out) throw Error("cannot write " + opts.trace_path);
    out << trace->jsonl();
    r.trace_path = opts.trace_path;
  }
  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

Report check_diagonal(Machine& m, Nat delta, StagedRelation& E, const std::vector<Nat>& samples, Nat stages,
                      Nat fuel) {
  Report r;
  r.name = "diagonal function";
  std::optional<Nat> first;
  for (Nat x : samples) {
    std::string name = "x=" + std::to_string(x) + " apart from delta(x)";
    auto d = m.eval(delta, x, fuel);
    if (!d.converged) {
      r.add(name, false, "delta(x) did not converge within the fuel");
      continue;
    }
    std::optional<Nat> at;
    for (Nat s = 0; s <= stages && !at; ++s)
      if (E.equiv(x, d.value, s)) at = s;
    if (at) {
      r.add(name, false, "x ≡ " + std::to_string(d.value) + " certified at stage " + std::to_string(*at));
      first = first ? std::min(*first, *at) : *at;
    } else {
      r.add(name, true);
    }
  }
  r.counts["samples"] = samples.size();
  if (first) r.counts["witness_stage"] = *first;
  return r;
}

}  // namespace prelat
