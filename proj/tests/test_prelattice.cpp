#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "prelat/oracles.hpp"
#include "prelat/prelattice.hpp"

using namespace prelat;

namespace {

std::shared_ptr<ScriptedSource> scripted(Machine& m) { return std::make_shared<ScriptedSource>(m); }

std::vector<Nat> intern_all(TermStore& store, const std::vector<Term>& terms) {
  std::vector<Nat> out;
  for (auto& t : terms) out.push_back(store.intern(t));
  return out;
}

}  // namespace

TEST_CASE("scripted pre-order closure") {
  ScriptedPreorder r({{0, 1, 2}, {1, 2, 4}, {2, 0, 9}});
  CHECK(r.holds(3, 3, 0));
  CHECK_FALSE(r.holds(0, 1, 0));
  CHECK_FALSE(r.holds(0, 1, 1));
  CHECK(r.holds(0, 1, 2));
  CHECK_FALSE(r.holds(0, 2, 3));
  CHECK(r.holds(0, 2, 4));
  CHECK_FALSE(r.holds(2, 1, 8));
  CHECK(r.holds(2, 1, 9));
  CHECK(r.equiv(0, 2, 9));
  CHECK(r.change_stages() == std::vector<Nat>{2, 4, 9});
  for (Nat s = 0; s < 12; ++s)
    for (Nat x = 0; x < 3; ++x)
      for (Nat y = 0; y < 3; ++y) {
        if (r.holds(x, y, s)) CHECK(r.holds(x, y, s + 1));
        for (Nat z = 0; z < 3; ++z)
          if (r.holds(x, y, s) && r.holds(y, z, s)) CHECK(r.holds(x, z, s));
      }
}

TEST_CASE("distributive quotient without collapses is the free order") {
  Machine m;
  auto L = build_Ld01(m, scripted(m));
  auto terms = enumerate_terms(3, {0, 1, 2});
  auto codes = intern_all(L->store(), terms);
  m.advance_to(1);
  for (std::size_t i = 0; i < terms.size(); ++i)
    for (std::size_t j = 0; j < terms.size(); ++j)
      CHECK(L->holds(codes[i], codes[j], 1) == nf_leq(normalize(terms[i]), normalize(terms[j])));
  // stage 0 is the identity
  CHECK_FALSE(L->holds(L->bottom(), L->top(), 0));
  CHECK(L->holds(L->bottom(), L->top(), 1));
}

TEST_CASE("a generator entering U collapses to bottom from that stage") {
  Machine m;
  auto src = scripted(m);
  auto L = build_Ld01(m, src);
  Nat x = L->gen(7), y = L->gen(8);
  src->add_left(7, 5);
  m.advance_to(10);
  CHECK_FALSE(L->holds(x, L->bottom(), 4));
  for (Nat s = 5; s <= 10; ++s) CHECK(L->holds(x, L->bottom(), s));
  CHECK(L->holds(L->join(x, y), y, 10));
  CHECK_FALSE(L->holds(L->join(x, y), y, 4));
  CHECK_FALSE(L->holds(y, L->bottom(), 10));
}

TEST_CASE("substitution semantics agrees with congruence closure") {
  SplitMix64 rng(11);
  std::vector<Nat> gens{0, 1, 2};
  auto terms = enumerate_terms(3, gens);
  for (int trial = 0; trial < 10; ++trial) {
    Machine m;
    auto src = scripted(m);
    for (Nat g : gens) {
      Nat roll = rng.below(4);
      if (roll == 1 || roll == 3) src->add_left(g, 1 + rng.below(12));
      if (roll == 2 || roll == 3) src->add_right(g, 1 + rng.below(12));
    }
    auto L = build_Ld01(m, src);
    auto codes = intern_all(L->store(), terms);
    m.advance_to(12);
    for (Nat s = 1; s <= 12; ++s) {
      auto table = oracle_congruence_closure(collapse_pairs(*src, s), gens);
      for (std::size_t i = 0; i < terms.size(); ++i)
        for (std::size_t j = 0; j < terms.size(); ++j)
          REQUIRE(L->holds(codes[i], codes[j], s) == table.leq_terms(terms[i], terms[j]));
    }
  }
}

TEST_CASE("non-distributive and semilattice quotients match their oracles") {
  Machine m;
  auto src = scripted(m);
  src->add_left(0, 3);
  src->add_right(2, 6);
  auto Lnd = build_Lnd01(m, src);
  auto U = build_Usemi01(m, src);
  std::vector<Nat> gens{0, 1, 2};
  auto terms = enumerate_terms(3, gens);
  auto codes = intern_all(Lnd->store(), terms);
  m.advance_to(8);
  for (Nat s : {Nat{1}, Nat{3}, Nat{6}, Nat{8}}) {
    auto pairs = collapse_pairs(*src, s);
    for (std::size_t i = 0; i < terms.size(); ++i)
      for (std::size_t j = 0; j < terms.size(); ++j)
        CHECK(Lnd->holds(codes[i], codes[j], s) == oracle_whitman_collapsed(terms[i], terms[j], pairs));
  }
  // M3-style failure of distributivity survives in the free quotient
  Nat a = Lnd->gen(1), b = Lnd->gen(3), c = Lnd->gen(4);
  CHECK_FALSE(Lnd->holds(Lnd->meet(a, Lnd->join(b, c)), Lnd->join(Lnd->meet(a, b), Lnd->meet(a, c)), 8));

  std::vector<Term> joins;
  for (auto& t : enumerate_terms(3, gens)) {
    std::function<bool(const Term&)> has_meet = [&](const Term& x) -> bool {
      if (x.kind() == TermKind::Meet) return true;
      if (x.kind() == TermKind::Join) return has_meet(x.left()) || has_meet(x.right());
      return false;
    };
    if (!has_meet(t)) joins.push_back(t);
  }
  auto ucodes = intern_all(U->store(), joins);
  for (Nat s : {Nat{1}, Nat{3}, Nat{6}}) {
    auto table = oracle_semilattice_closure(collapse_pairs(*src, s), gens);
    for (std::size_t i = 0; i < joins.size(); ++i)
      for (std::size_t j = 0; j < joins.size(); ++j)
        CHECK(U->holds(ucodes[i], ucodes[j], s) == table.leq_terms(joins[i], joins[j]));
  }
  CHECK_THROWS_AS(U->meet(U->gen(0), U->gen(1)), MalformedTerm);
  Nat m01 = U->store().meet(U->gen(0), U->gen(1));
  CHECK_THROWS_AS(U->holds(m01, U->top(), 6), MalformedTerm);
}

TEST_CASE("congruence oracle sanity") {
  auto free = oracle_congruence_closure({}, {0, 1, 2});
  CHECK(free.class_count() == 20);
  auto one = oracle_congruence_closure({{0, false}}, {0, 1, 2});
  CHECK(one.class_count() == 6);
  for (std::size_t i = 0; i < one.size(); ++i)
    for (std::size_t j = 0; j < one.size(); ++j)
      if (one.class_of(i) == one.class_of(j)) CHECK(one.class_of(j) == one.class_of(i));
  auto both = oracle_congruence_closure({{0, false}, {0, true}}, {0, 1, 2});
  CHECK(both.class_count() == 1);
}

TEST_CASE("canonical source: fresh generators stay free, defined ones collapse") {
  Machine m;
  auto ei = canonical_ei_pair(m);
  auto L = build_Ld01(m, std::make_shared<CanonicalSource>(m, ei));
  Nat x = L->fresh_generator(), y = L->fresh_generator();
  m.advance_to(5);
  CHECK_FALSE(L->leq_now(x, y));
  CHECK_FALSE(L->leq_now(x, L->bottom()));
  CHECK(L->leq_now(L->meet(x, y), x));
  // phi_g(g) = 0 puts the generator into U
  Nat g = L->store().node(x).a;
  m.define_deferred(g, const_code(0));
  m.advance_to(20);
  CHECK(L->leq_now(x, L->bottom()));
  CHECK(L->leq_now(x, y));
  CHECK_FALSE(L->leq_now(y, x));
}

TEST_CASE("machine entries observing the order wake on collapses") {
  Machine m;
  auto ei = canonical_ei_pair(m);
  auto L = build_Ld01(m, std::make_shared<CanonicalSource>(m, ei));
  std::vector<Nat> gs;
  for (int i = 0; i < 12; ++i) gs.push_back(L->fresh_generator());
  Nat small = gs[0];
  Nat big = L->meet_all(gs);  // cone beyond the per-generator registration size
  TermLattice* lp = L.get();
  Nat watch_small = m.define_dynamic([lp, small](Nat, Ctx& c) -> std::optional<Nat> {
    if (lp->holds(small, lp->bottom(), c.fact_stage())) return 0;
    return std::nullopt;
  });
  Nat watch_big = m.define_dynamic([lp, big](Nat, Ctx& c) -> std::optional<Nat> {
    if (lp->holds(lp->top(), big, c.fact_stage())) return 0;
    return std::nullopt;
  });
  m.eval(watch_small, 0, 1);
  m.eval(watch_big, 0, 1);
  m.advance_to(10);
  CHECK(m.quiescent());
  m.define_deferred(L->store().node(small).a, const_code(0));
  for (Nat g : gs) {
    Nat id = L->store().node(g).a;
    if (g != small) m.define_deferred(id, const_code(1));
  }
  m.advance_to(30);
  CHECK(m.stamp(watch_small, 0));
  CHECK_FALSE(m.stamp(watch_big, 0));  // x_small went to 0
  Machine m2;
  auto ei2 = canonical_ei_pair(m2);
  auto L2 = build_Ld01(m2, std::make_shared<CanonicalSource>(m2, ei2));
  std::vector<Nat> hs;
  for (int i = 0; i < 12; ++i) hs.push_back(L2->fresh_generator());
  Nat big2 = L2->meet_all(hs);
  TermLattice* lp2 = L2.get();
  Nat watch2 = m2.define_dynamic([lp2, big2](Nat, Ctx& c) -> std::optional<Nat> {
    if (lp2->holds(lp2->top(), big2, c.fact_stage())) return 0;
    return std::nullopt;
  });
  m2.eval(watch2, 0, 1);
  m2.advance_to(5);
  for (Nat h : hs) m2.define_deferred(L2->store().node(h).a, const_code(1));
  m2.advance_to(20);
  CHECK(m2.stamp(watch2, 0));
}

TEST_CASE("ei witness avoids closed-world superset doubles") {
  Machine m;
  auto ei = canonical_ei_pair(m);
  auto L = build_Ld01(m, std::make_shared<CanonicalSource>(m, ei));
  REQUIRE(L->productive());
  SplitMix64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    auto wu = ScriptedSet::create(m), wv = ScriptedSet::create(m);
    Nat x = L->fresh_generator();
    wu->add(L->bottom(), 0);
    wu->add(L->meet(x, L->bottom()), rng.below(5));
    wv->add(L->top(), 0);
    wv->add(L->join(x, L->top()), rng.below(5));
    auto r = m.eval(L->productive()->code, pair(wu->code(), wv->code()), 100);
    REQUIRE(r.converged);
    Nat out = r.value;
    m.advance_to(m.now() + 40);
    CHECK_FALSE(wu->stage_of(out));
    CHECK_FALSE(wv->stage_of(out));
    CHECK_FALSE(L->leq_now(out, L->bottom()));
    CHECK_FALSE(L->leq_now(L->top(), out));
  }
}

TEST_CASE("interval restriction") {
  Machine m;
  auto src = scripted(m);
  auto L = build_Ld01(m, src);
  Nat x1 = L->gen(1), x2 = L->gen(2), x3 = L->gen(3);
  m.advance_to(1);
  CHECK_THROWS_AS(interval_restrict(L, x2, x1, 1), NotYetComparable);
  auto full = interval_restrict(L, L->bottom(), L->top(), 1);
  CHECK(full->h(0) == L->bottom());
  CHECK(full->h(1) == L->top());
  CHECK(full->h_inv(full->h(x3 + 2)) == x3 + 2);
  CHECK(full->equiv_now(x3 + 2, full->h_inv(L->meet(L->join(L->bottom(), x3), L->top())).value()));

  auto I = interval_restrict(L, x1, L->join(x1, x2), 1);
  SplitMix64 rng(5);
  std::vector<Nat> universe;
  for (auto& t : enumerate_terms(3, {1, 2, 3})) universe.push_back(L->store().intern(t) + 2);
  universe.push_back(0);
  universe.push_back(1);
  for (int i = 0; i < 200; ++i) {
    Nat a = universe[rng.below(universe.size())], b = universe[rng.below(universe.size())];
    CHECK(I->holds(a, b, 1) == L->holds(I->h(a), I->h(b), 1));
    CHECK(L->holds(x1, I->h(a), 1));
    CHECK(L->holds(I->h(a), L->join(x1, x2), 1));
    Nat mt = I->meet(a, b);
    CHECK(I->equiv(mt, I->h_inv(I->h(mt)).value(), 1));
    CHECK(L->equiv(I->h(mt), L->meet(I->h(a), I->h(b)), 1));
  }
  // h is injective on the inspected codes
  std::set<Nat> images;
  for (Nat t : universe) images.insert(I->h(t));
  CHECK(images.size() == universe.size());

  // scripted collapse of the endpoints
  src->add_left(2, 4);
  m.advance_to(4);
  auto J = interval_restrict(L, x1, L->join(x1, x2), 4);
  CHECK(J->equiv(0, 1, 4));
  for (int i = 0; i < 30; ++i) CHECK(J->equiv(universe[rng.below(universe.size())], 0, 4));
}

TEST_CASE("direct sums, opposites, fresh bounds and re-indexing") {
  Machine m;
  auto src = scripted(m);
  auto L = build_Ld01(m, src);
  auto point_src = scripted(m);
  point_src->add_left(0, 1);
  point_src->add_right(0, 1);
  auto point = build_Ld01(m, point_src);
  m.advance_to(2);
  std::vector<Nat> els;
  for (auto& t : enumerate_terms(3, {1, 2})) els.push_back(L->store().intern(t));
  auto S = direct_sum(L, point);
  for (Nat a : els)
    for (Nat b : els) {
      CHECK(S->holds(pair(a, 0), pair(b, 1), 2) == L->holds(a, b, 2));
      CHECK(S->equiv(S->meet(pair(a, 1), pair(b, 0)), pair(L->meet(a, b), 0), 2));
    }

  auto inf = std::make_shared<FiniteSupportSum>(L);
  SplitMix64 rng(8);
  for (int i = 0; i < 30; ++i) {
    std::vector<Nat> coords;
    for (Nat k = rng.below(4); k > 0; --k) coords.push_back(els[rng.below(els.size())]);
    Nat x = FiniteSupportSum::encode(coords);
    CHECK(FiniteSupportSum::decode(x) == coords);
    Nat up = inf->bump(x);
    CHECK(inf->holds(x, up, 2));
    CHECK_FALSE(inf->holds(up, x, 2));
  }

  auto op = opposite(L);
  CHECK(opposite(op) == LatticePtr(L));
  CHECK(op->bottom() == L->top());
  CHECK(op->top() == L->bottom());
  for (Nat a : els)
    for (Nat b : els) {
      CHECK(op->holds(a, b, 2) == L->holds(b, a, 2));
      CHECK(op->meet(a, b) == L->join(a, b));
    }

  auto fb = add_fresh_bounds(L);
  for (Nat a : els) {
    Nat x = FreshBoundsLattice::inner_code(a);
    CHECK(fb->holds(0, x, 2));
    CHECK(fb->holds(x, 1, 2));
    CHECK_FALSE(fb->holds(x, 0, 2));
    CHECK_FALSE(fb->holds(1, x, 2));
    for (Nat b : els) CHECK(fb->holds(x, FreshBoundsLattice::inner_code(b), 2) == L->holds(a, b, 2));
  }

  auto same = reindex(L, [](Nat x) { return x; }, [](Nat x) { return std::optional<Nat>(x); });
  for (Nat a : els)
    for (Nat b : els) CHECK(same->holds(a, b, 2) == L->holds(a, b, 2));
  auto doubled = reindex(L, [](Nat x) { return x / 2; }, [](Nat x) { return std::optional<Nat>(2 * x); });
  for (Nat a : els) CHECK(doubled->equiv(2 * a, 2 * a + 1, 2));
  std::vector<Nat> perm(L->store().size());
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
  std::vector<Nat> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
  auto shuffled = reindex(L, [perm](Nat x) { return perm.at(x); }, [inv](Nat c) -> std::optional<Nat> {
    if (c >= inv.size()) return std::nullopt;
    return inv[c];
  });
  for (Nat a : els)
    for (Nat b : els) CHECK(shuffled->holds(inv[a], inv[b], 2) == L->holds(a, b, 2));
}
