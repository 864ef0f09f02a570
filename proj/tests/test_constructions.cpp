#include <algorithm>

#include "doctest.h"
#include "prelat/constructions.hpp"

using namespace prelat;

namespace {

struct Canon {
  Machine m;
  CanonicalEi ei;
  std::shared_ptr<TermLattice> L;
  Canon() : ei(canonical_ei_pair(m)), L(build_Ld01(m, std::make_shared<CanonicalSource>(m, ei))) {}
};

std::shared_ptr<ScriptedPreorder> preorder(std::vector<ScriptedPreorder::Event> events) {
  return std::make_shared<ScriptedPreorder>(std::move(events));
}

}  // namespace

TEST_CASE("pre-order and triple counts") {
  std::vector<std::size_t> preorders = {1, 1, 4, 29, 355, 6942};
  for (std::size_t n = 0; n <= 5; ++n) CHECK(all_preorders(n).size() == preorders[n]);
  std::vector<std::size_t> triples = {1, 4, 29, 355, 6942, 209527};
  for (std::size_t n = 0; n <= 4; ++n) {
    auto T = enumerate_T(n);
    CHECK(T.size() == triples[n]);
    for (auto& t : T) {
      CHECK(in_T(t));
      CHECK(triple_leq(T[0], t));
    }
    // exactly one maximal element
    std::size_t maximal = 0;
    for (auto& t : T)
      if (std::none_of(T.begin(), T.end(), [&](const TriplePO& s) { return !(s == t) && triple_leq(t, s); }))
        ++maximal;
    CHECK(maximal == 1);
  }
  CHECK(enumerate_T(5).size() == triples[5]);
}

TEST_CASE("triple read off a staged relation") {
  auto R = preorder({{0, 2, 2}, {2, 1, 4}});
  auto t = triple_at(*R, 2, 1);
  CHECK(t.X == 0);
  CHECK(t.Y == 0);
  t = triple_at(*R, 2, 2);
  CHECK(t.X == 1);
  t = triple_at(*R, 2, 4);
  CHECK(t.X == 1);
  CHECK(t.Y == 2);
  CHECK(t.order.leq(0, 1));
  CHECK(in_T(t));
  CHECK(triple_leq(triple_at(*R, 2, 2), t));
}

TEST_CASE("totalizer: diverging index still yields a code") {
  Canon c;
  auto k = totalizer_from_ei(c.L, *c.L->productive());
  Nat g1 = c.L->fresh_generator(), g2 = c.L->fresh_generator();
  Nat e = c.m.fresh_deferred();
  Nat out = k({g1, g2}, e, 0);
  CHECK(c.L->valid(out));
  settle(c.m, 1000);
  CHECK(k.log->find(canonical_set({g1, g2}), e, 0)->result == out);
  CHECK_FALSE(c.m.stamp(k.log->find(canonical_set({g1, g2}), e, 0)->trigger, 0));
  CHECK_FALSE(closed_world_equiv(*c.L, out, g1));
  CHECK_FALSE(closed_world_equiv(*c.L, out, g2));
}

TEST_CASE("totalizer: literal trigger on a singleton") {
  Canon c;
  auto k = totalizer_from_ei(c.L, *c.L->productive());
  Nat d = c.L->fresh_generator();
  Nat e = c.m.fresh_deferred();
  c.m.define_deferred(e, const_code(d));
  Nat out = k({d}, e, 0);
  CHECK(wait_for_equiv(*c.L, out, d, 64));
}

TEST_CASE("totalizer: trigger up to equivalence on a two-element set") {
  Canon c;
  auto k = totalizer_from_ei(c.L, *c.L->productive());
  Nat d1 = c.L->fresh_generator(), d2 = c.L->fresh_generator();
  Nat e = c.m.fresh_deferred();
  Nat out = k({d1, d2}, e, 0);
  c.m.advance_to(3);
  c.m.define_deferred(e, const_code(c.L->meet(d2, d2)));
  auto when = wait_for_equiv(*c.L, out, d2, 64);
  REQUIRE(when);
  settle(c.m, 1000);
  CHECK(closed_world_equiv(*c.L, out, d2));
  CHECK_FALSE(closed_world_equiv(*c.L, out, d1));
  CHECK_FALSE(closed_world_leq(*c.L, c.L->top(), c.L->bottom()));
}

TEST_CASE("totalizer: trigger outside D leaves k untouched") {
  Canon c;
  auto k = totalizer_from_ei(c.L, *c.L->productive());
  Nat d1 = c.L->fresh_generator(), d2 = c.L->fresh_generator(), other = c.L->fresh_generator();
  Nat e = c.m.fresh_deferred();
  c.m.define_deferred(e, const_code(other));
  Nat out = k({d1, d2}, e, 0);
  settle(c.m, 1000);
  CHECK_FALSE(closed_world_equiv(*c.L, out, other));
  CHECK_FALSE(closed_world_equiv(*c.L, out, d1));
}

TEST_CASE("bounded k lands in the interval and hits d") {
  Canon c;
  auto k = totalizer_from_ei(c.L, *c.L->productive());
  Nat a = c.L->fresh_generator(), g = c.L->fresh_generator();
  Nat b = c.L->join(a, g);
  Nat d = c.L->meet(b, c.L->join(a, c.L->meet(g, g)));
  Nat e1 = c.m.fresh_deferred(), e2 = c.m.fresh_deferred();
  Nat free_out = bounded_k(*c.L, a, b, {a, b, d}, e1, 0, k);
  c.m.define_deferred(e2, const_code(d));
  Nat hit = bounded_k(*c.L, a, b, {a, b, d}, e2, 0, k);
  REQUIRE(wait_for_equiv(*c.L, hit, d, 64));
  CHECK(closed_world_leq(*c.L, a, free_out));
  CHECK(closed_world_leq(*c.L, free_out, b));
  // a = 0, b = 1 reduces to k itself
  Nat e3 = c.m.fresh_deferred();
  Nat plain = k({a, g}, e3, 0);
  Nat wide = bounded_k(*c.L, c.L->bottom(), c.L->top(), {a, g}, e3, 0, k);
  CHECK(closed_world_equiv(*c.L, plain, wide));
}

TEST_CASE("ufp from the uniform productive function agrees with the direct totalizer") {
  Canon c;
  auto k = totalizer_from_ei(c.L, *c.L->productive());
  auto chi = uniform_from_totalizer(c.L, k);
  auto k2 = ufp_from_uei(c.L, chi);
  Nat d1 = c.L->fresh_generator(), d2 = c.L->fresh_generator();
  Nat lo = d1, hi = c.L->join(d1, d2);
  Nat e = c.m.fresh_deferred();
  Nat direct = k({lo, hi}, e, 0);
  Nat via = k2({lo, hi}, e, 0);
  c.m.advance_to(2);
  c.m.define_deferred(e, const_code(hi));
  REQUIRE(wait_for_equiv(*c.L, direct, hi, 256));
  REQUIRE(wait_for_equiv(*c.L, via, hi, 256));
  CHECK(closed_world_equiv(*c.L, direct, via));
  // singleton D: the degenerate interval
  Nat e2 = c.m.fresh_deferred();
  c.m.define_deferred(e2, const_code(d2));
  Nat single = k2({d2}, e2, 0);
  CHECK(wait_for_equiv(*c.L, single, d2, 256));
}

TEST_CASE("interval productive: output stays in [a,b]; feeding j to W_u forces q") {
  Canon c;
  auto trace = std::make_shared<Trace>();
  auto k = totalizer_from_ei(c.L, *c.L->productive());
  Nat a = c.L->fresh_generator(), g = c.L->fresh_generator();
  Nat b = c.L->join(a, g);
  auto q = productive_from_totalizer(c.L, k, a, b);
  auto p = interval_productive(c.L, a, b, q, {trace, "interval"});
  auto seen = std::make_shared<Nat>(kNever);
  PreLattice* L = c.L.get();
  Nat u = c.m.define_dynamic([seen, L, a](Nat y, Ctx& ctx) -> std::optional<Nat> {
    if (y == *seen) return 0;
    if (L->valid(y) && L->equiv(y, a, ctx.fact_stage())) return 0;
    return std::nullopt;
  });
  Nat v = c.m.define_dynamic([L, b](Nat y, Ctx& ctx) -> std::optional<Nat> {
    if (L->valid(y) && L->equiv(y, b, ctx.fact_stage())) return 0;
    return std::nullopt;
  });
  auto r = c.m.eval(p.code, pair(u, v), 4096);
  REQUIRE(r.converged);
  Nat j = r.value;
  c.m.advance_to(2);
  CHECK(closed_world_leq(*c.L, a, j));
  CHECK(closed_world_leq(*c.L, j, b));
  *seen = j;
  c.m.poke(u, j);
  for (int i = 0; i < 64 && trace->count("deferred_defined") == 0; ++i) c.m.tick();
  auto forced = trace->of_kind("deferred_defined");
  REQUIRE_FALSE(forced.empty());
  CHECK(forced[0].note.find("W_u") != std::string::npos);
  // a = 0, b = 1: behaves as a bounds productive function
  auto p01 = interval_productive(c.L, c.L->bottom(), c.L->top(), *c.L->productive());
  auto r01 = c.m.eval(p01.code, pair(v, u), 4096);
  CHECK(r01.converged);
}

TEST_CASE("universality: two-element chain") {
  Canon c;
  auto k = totalizer_from_ei(c.L, *c.L->productive());
  auto trace = std::make_shared<Trace>();
  ReductionConfig cfg;
  cfg.elements = 2;
  cfg.stages = 4;
  UniversalReduction U(c.L, k, preorder({{0, 1, 1}}), cfg, {trace, "reduce"});
  U.run();
  settle(c.m, 100000);
  CHECK(closed_world_leq(*c.L, U.f(0), U.f(1)));
  CHECK_FALSE(closed_world_leq(*c.L, U.f(1), U.f(0)));
  CHECK(U.matches(cfg.stages));
  CHECK(trace->count("diamond_fired") == 0);
  CHECK(trace->count("tau_transition") == 1);
}

TEST_CASE("universality: a late collapse merges the images") {
  Canon c;
  auto k = totalizer_from_ei(c.L, *c.L->productive());
  ReductionConfig cfg;
  cfg.elements = 2;
  cfg.stages = 6;
  UniversalReduction U(c.L, k, preorder({{0, 1, 3}, {1, 0, 3}}), cfg);
  for (int s = 0; s < 2; ++s) U.step();
  CHECK_FALSE(closed_world_leq(*c.L, U.f(0), U.f(1)));
  U.run();
  CHECK(closed_world_equiv(*c.L, U.f(0), U.f(1)));
  settle(c.m, 100000);
  CHECK(U.matches(cfg.stages));
}

TEST_CASE("universality: three elements with a late edge") {
  Canon c;
  auto k = totalizer_from_ei(c.L, *c.L->productive());
  ReductionConfig cfg;
  cfg.elements = 3;
  cfg.stages = 8;
  UniversalReduction U(c.L, k, preorder({{2, 0, 1}, {1, 2, 6}}), cfg);
  U.run();
  settle(c.m, 100000);
  std::vector<std::pair<std::size_t, std::size_t>> bad;
  CHECK(U.matches(cfg.stages, &bad));
  CHECK(bad.empty());
  CHECK(closed_world_leq(*c.L, U.f(1), U.f(0)));
  CHECK_FALSE(closed_world_leq(*c.L, U.f(0), U.f(1)));
  CHECK(U.transitions() >= 2);
}

TEST_CASE("diamond: a rogue collapse is caught, and refuted in replay mode") {
  for (bool refute : {false, true}) {
    Machine m;
    auto ei = canonical_ei_pair(m);
    auto src = std::make_shared<BrokenSource>(m, ei);
    auto L = build_Ld01(m, src);
    auto k = totalizer_from_ei(L, *L->productive());
    auto trace = std::make_shared<Trace>();
    ReductionConfig cfg;
    cfg.elements = 2;
    cfg.stages = 5;
    cfg.refutation = refute;
    UniversalReduction U(L, k, preorder({}), cfg, {trace, "reduce"});
    auto* call = k.log->find({L->bottom(), L->top()}, U.e_of(0, U.tau(0)), 0);
    REQUIRE(call);
    for (Nat code : call->c) src->rogue().add_left(L->store().node(code).a, 2);
    if (!refute) {
      CHECK_THROWS_AS(U.run(), DiamondFired);
      continue;
    }
    U.run();
    REQUIRE(U.diamond());
    CHECK(U.diamond()->contradiction);
    CHECK(trace->count("one_action") >= 1);
    CHECK(trace->count("zero_action") >= 1);
    auto certs = trace->of_kind("equivalence_certified");
    REQUIRE_FALSE(certs.empty());
    CHECK(certs.back().note == "1 <= 0");
    CHECK(Trace::parse_jsonl(trace->jsonl()) == trace->events());
  }
}

TEST_CASE("local universality inside [x1, x1 v x2]") {
  Canon c;
  Nat x1 = c.L->fresh_generator(), x2 = c.L->fresh_generator();
  Nat b = c.L->join(x1, x2);
  ReductionConfig cfg;
  cfg.elements = 2;
  cfg.stages = 4;
  auto local = local_universal_reduction(c.L, x1, b, preorder({{1, 0, 2}}), cfg);
  local.inner->run();
  settle(c.m, 100000);
  Nat i0 = local.image(0), i1 = local.image(1);
  for (Nat img : {i0, i1}) {
    CHECK(closed_world_leq(*c.L, x1, img));
    CHECK(closed_world_leq(*c.L, img, b));
  }
  CHECK(closed_world_leq(*c.L, i1, i0));
  CHECK_FALSE(closed_world_leq(*c.L, i0, i1));
  CHECK_FALSE(closed_world_equiv(*c.L, i0, x1));
  CHECK_FALSE(closed_world_equiv(*c.L, i0, b));
}

TEST_CASE("uniform density") {
  Canon c;
  auto k = totalizer_from_ei(c.L, *c.L->productive());
  auto trace = std::make_shared<Trace>();
  UniformDensity D(c.L, k, {trace, "density"});
  Nat g = c.L->fresh_generator();  // code 2
  Nat gg = c.L->meet(g, g);        // code 3, ≡ g
  D.run(12);
  settle(c.m, 100000);
  SUBCASE("0 < f(0,1) < 1") {
    Nat f = D.f(0, 1);
    CHECK_FALSE(closed_world_leq(*c.L, f, 0));
    CHECK_FALSE(closed_world_leq(*c.L, 1, f));
  }
  SUBCASE("equivalent pairs merge") {
    CHECK(D.merges() >= 1);
    CHECK(closed_world_equiv(*c.L, D.f(0, g), D.f(0, gg)));
    CHECK(trace->count("density_merge") >= 1);
  }
  SUBCASE("a ≡ b gives a") {
    CHECK(closed_world_equiv(*c.L, D.f(g, gg), g));
    CHECK(closed_world_equiv(*c.L, D.f(g, g), g));
  }
}

TEST_CASE("incomparable element beside a single middle element") {
  Canon c;
  Nat mid = c.L->fresh_generator();
  Nat X = c.m.define_dynamic([mid](Nat y, Ctx&) -> std::optional<Nat> {
    if (y == mid) return 0;
    return std::nullopt;
  });
  c.m.advance_to(1);
  Nat y = incomparable_in_interval(*c.L, c.L->bottom(), c.L->top(), X, *c.L->productive(), c.L->store().size());
  for (int i = 0; i < 40; ++i) c.m.tick();
  CHECK_FALSE(closed_world_leq(*c.L, y, mid));
  CHECK_FALSE(closed_world_leq(*c.L, mid, y));
  CHECK_FALSE(closed_world_leq(*c.L, y, 0));
  CHECK_FALSE(closed_world_leq(*c.L, 1, y));
  Nat z = incomparable_in_interval(static_cast<StagedRelation&>(*c.L), 0, 1, X, *c.L->productive(), c.m,
                                   c.L->store().size());
  for (int i = 0; i < 40; ++i) c.m.tick();
  CHECK(c.L->valid(z));
  CHECK_FALSE(closed_world_leq(*c.L, z, mid));
  CHECK_FALSE(closed_world_leq(*c.L, mid, z));
}

TEST_CASE("semilattice chains stay below g + 2") {
  Machine m;
  auto src = std::make_shared<ScriptedSource>(m);
  auto U = build_Usemi01(m, src);
  std::vector<Nat> gens;
  for (int i = 0; i < 4; ++i) gens.push_back(U->fresh_generator());
  m.advance_to(1);
  auto rep = semilattice_nonuniversality_check(*U, gens, 1);
  CHECK(rep.ok());
  CHECK(rep.longest.at(3) == 4);
  CHECK(rep.longest.at(4) == 5);
  CHECK(rep.elements == 16);
}

TEST_CASE("diagonal lattice: mismatch per converging candidate") {
  Machine m;
  auto src = std::make_shared<ScriptedSource>(m);
  auto L2 = build_Ld01(m, src);
  auto& store = L2->store();
  Nat x2 = store.gen(2), x4 = store.gen(4), x5 = store.gen(5), x7 = store.gen(7);
  Nat reducible = store.join(store.meet(x2, x4), x5);
  std::vector<Nat> cands = {
      m.add_program("diverge"),
      const_code(x2),
      const_code(reducible),
      const_code(store.join(x4, x7)),
  };
  auto L1 = build_L1_diagonal(L2, cands);
  L1->run(60);
  auto certs = L1->verify(100);
  REQUIRE(certs.size() == 3);
  for (auto& cert : certs) {
    CHECK(cert.mismatch());
    auto gens = nf_generators(cert.target_class);
    if (gens.size() <= 4)
      CHECK(meet_irreducible(cert.target_class, {gens.begin(), gens.end()}) == cert.target_irreducible);
  }
  CHECK(certs[0].candidate == 1);
  CHECK(certs[0].acted_at);
  CHECK_FALSE(certs[0].z1_irreducible);
  CHECK(certs[1].candidate == 2);
  CHECK_FALSE(certs[1].acted_at);
  CHECK(certs[1].z1_irreducible);
  CHECK(certs[2].acted_at);
  CHECK(L1->actions().size() == 2);
}
