#include <set>

#include "doctest.h"
#include "prelat/ce.hpp"

using namespace prelat;

namespace {

// Finite c.e. set whose element x is emitted after cost[x] steps.
Nat finite_enumerator(Machine& m, std::map<Nat, Nat> cost) {
  return m.define_metered([cost](Nat x, Nat fuel) -> std::optional<Nat> {
    auto it = cost.find(x);
    if (it == cost.end() || fuel < it->second) return std::nullopt;
    return 0;
  });
}

bool in_limit(Machine& m, Nat e, Nat x, Nat fuel = 100000) { return m.eval(e, x, fuel).converged; }

}  // namespace

TEST_CASE("canonical pair membership") {
  Machine m;
  auto ei = canonical_ei_pair(m);
  Nat zero = const_code(0), one = const_code(1);
  CHECK(in_limit(m, ei.pair.left, zero));
  CHECK_FALSE(in_limit(m, ei.pair.right, zero));
  CHECK(in_limit(m, ei.pair.right, one));
  CHECK_FALSE(in_limit(m, ei.pair.left, one));
  CHECK_FALSE(in_limit(m, ei.pair.left, const_code(7)));
}

TEST_CASE("canonical productive function avoids closed-world doubles") {
  Machine m;
  auto ei = canonical_ei_pair(m);
  SplitMix64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto wu = ScriptedSet::create(m), wv = ScriptedSet::create(m);
    // U-so-far and V-so-far among constant codes, plus disjoint extras
    for (Nat n = 0; n < 6; ++n) {
      if (n == 0) wu->add(const_code(0), 0);
      if (n == 1) wv->add(const_code(1), 0);
      Nat extra = 100 + rng.below(1000);
      if (!wu->stage_of(extra) && !wv->stage_of(extra)) (rng.coin() ? wu : wv)->add(extra, rng.below(20));
    }
    Nat e = canonical_witness(m, ei, wu->code(), wv->code());
    m.eval(e, e, 1);
    m.advance_to(m.now() + 50);
    CHECK_FALSE(wu->stage_of(e));
    CHECK_FALSE(wv->stage_of(e));
    CHECK_FALSE(m.stamp(e, e));
  }
}

TEST_CASE("canonical productive function with empty enumerators") {
  Machine m;
  auto ei = canonical_ei_pair(m);
  Nat empty = m.add_program("diverge");
  Nat e = canonical_witness(m, ei, empty, empty);
  m.eval(e, e, 1);
  m.advance_to(100);
  CHECK_FALSE(m.eval(e, e, 1000).converged);
  CHECK(m.quiescent());
}

TEST_CASE("canonical productive function is total") {
  Machine m;
  auto ei = canonical_ei_pair(m);
  SplitMix64 rng(4);
  std::set<Nat> seen;
  for (int i = 0; i < 100; ++i) {
    Nat u = rng.below(500), v = rng.below(500);
    auto r = m.eval(ei.p.code, pair(u, v), 5);
    CHECK(r.converged);
    seen.insert(r.value);
  }
  CHECK(seen.size() > 90);
}

TEST_CASE("adversarial double that enumerates the witness loses the superset property") {
  Machine m;
  auto ei = canonical_ei_pair(m);
  auto wu = ScriptedSet::create(m), wv = ScriptedSet::create(m);
  wu->add(const_code(0), 0);
  wv->add(const_code(1), 0);
  Nat e = canonical_witness(m, ei, wu->code(), wv->code());
  wu->add(e, 5);
  m.eval(e, e, 1);
  m.advance_to(20);
  // e lands in V, which W_v does not cover
  CHECK(m.eval(e, e, 1000) == EvalOutcome::done(1));
  CHECK(member_by(m, ei.pair.right, e, m.now()));
  CHECK_FALSE(wv->stage_of(e));
}

TEST_CASE("totalization patches a diverging productive function") {
  Machine m;
  auto ei = canonical_ei_pair(m);
  Nat u0 = m.add_program("diverge"), v0 = m.add_program("(if (eq x 5) 0 diverge)");
  Nat crafted = pair(u0, v0);
  Nat pc = ei.p.code;
  Machine* mp = &m;
  ProductiveFn bad{m.define_metered([mp, crafted, pc](Nat z, Nat fuel) -> std::optional<Nat> {
                     if (z == crafted) return std::nullopt;
                     auto r = mp->eval(pc, z, fuel);
                     return r.converged ? std::optional<Nat>(r.value) : std::nullopt;
                   }),
                   false};
  CHECK_FALSE(m.eval(bad.code, crafted, 100000).converged);
  auto q = totalize_productive(m, ei.pair, bad);
  m.eval(q.code, crafted, 1);
  m.advance_to(5);
  auto r = m.eval(q.code, crafted, 100);
  CHECK(r.converged);
  // total and still productive on the other inputs
  auto qq = totalize_productive(m, ei.pair, q);
  m.eval(qq.code, pair(3, 4), 1);
  m.eval(q.code, pair(3, 4), 1);
  m.advance_to(10);
  CHECK(m.eval(qq.code, pair(3, 4), 100).converged);
  CHECK(m.eval(q.code, pair(3, 4), 100) == m.eval(pc, pair(3, 4), 100));
  Nat e = r.value;
  m.eval(e, e, 1);
  m.advance_to(30);
  CHECK_FALSE(m.eval(e, e, 1000).converged);
}

TEST_CASE("reduction principle examples") {
  Machine m;
  Nat u = m.add_program("(if (lt x 3) (if (lt 0 x) 0 diverge) diverge)");  // {1,2}
  Nat v = m.add_program("(if (lt x 4) (if (lt 1 x) 0 diverge) diverge)");  // {2,3}
  REQUIRE(u < v);
  auto [up, vp] = reduction_principle(m, u, v);
  std::set<Nat> U, V;
  for (Nat x = 0; x < 10; ++x) {
    if (in_limit(m, up, x)) U.insert(x);
    if (in_limit(m, vp, x)) V.insert(x);
  }
  CHECK(U == std::set<Nat>{1, 2});
  CHECK(V == std::set<Nat>{3});
  Nat a = m.add_program("(if (lt x 2) 0 diverge)"), b = m.add_program("(if (lt 4 x) (if (lt x 7) 0 diverge) diverge)");
  auto [ap, bp] = reduction_principle(m, a, b);
  for (Nat x = 0; x < 10; ++x) {
    CHECK(in_limit(m, ap, x) == in_limit(m, a, x));
    CHECK(in_limit(m, bp, x) == in_limit(m, b, x));
  }
  Nat five1 = m.add_program("(if (eq x 5) 0 diverge)"), five2 = m.add_program("(if (eq 5 x) 0 diverge)");
  auto [fp, gp] = reduction_principle(m, five1, five2);
  CHECK(in_limit(m, fp, 5) != in_limit(m, gp, 5));
}

TEST_CASE("reduction principle on random finite enumerators") {
  SplitMix64 rng(9);
  for (int trial = 0; trial < 1000; ++trial) {
    Machine m;
    std::map<Nat, Nat> cu, cv;
    for (Nat x = 0; x < 8; ++x) {
      if (rng.below(2)) cu[x] = 1 + rng.below(40);
      if (rng.below(2)) cv[x] = 1 + rng.below(40);
    }
    Nat u = finite_enumerator(m, cu), v = finite_enumerator(m, cv);
    auto sched = trial % 2 ? ReductionSchedule::Dovetail : ReductionSchedule::Clocked;
    auto [up, vp] = reduction_principle(m, u, v, sched);
    if (sched == ReductionSchedule::Clocked) {
      for (Nat x = 0; x < 8; ++x) {
        m.eval(up, x, 1);
        m.eval(vp, x, 1);
      }
      m.advance_to(m.now() + 60);
    }
    for (Nat x = 0; x < 8; ++x) {
      bool a = in_limit(m, up, x, Nat{1} << 40), b = in_limit(m, vp, x, Nat{1} << 40);
      CHECK_FALSE((a && b));
      CHECK((a || b) == (cu.count(x) || cv.count(x)));
      if (a) CHECK(cu.count(x));
      if (b) CHECK(cv.count(x));
    }
    if (trial % 50 == 1) {
      for (Nat s = 0; s < 2000; s += 97) {
        auto wu = m.enumerate_W(up, s), wv = m.enumerate_W(vp, s);
        for (Nat x : wu) CHECK(std::find(wv.begin(), wv.end(), x) == wv.end());
      }
    }
  }
}

TEST_CASE("pullback through the identity reproduces the productive function") {
  Machine m;
  auto ei = canonical_ei_pair(m);
  Nat id = m.define_native([](Nat x) { return std::optional<Nat>(x); });
  auto pb = pullback_productive(m, id, ei.p);
  auto same = pair_closure_check(m, ei.pair, ei.p, Supersets{ei.pair});
  CHECK(same.code == ei.p.code);
  auto wu = ScriptedSet::create(m), wv = ScriptedSet::create(m);
  wu->add(const_code(0), 0);
  wv->add(const_code(1), 0);
  auto r = m.eval(pb.code, pair(wu->code(), wv->code()), 10);
  REQUIRE(r.converged);
  Nat e = r.value;
  m.eval(e, e, 1);
  m.advance_to(40);
  CHECK_FALSE(m.eval(e, e, 1000).converged);
  CHECK_FALSE(wu->stage_of(e));
  CHECK_FALSE(wv->stage_of(e));
  // collapsing reduction: vacuous contract, still total
  Nat collapse = m.define_native([](Nat) { return std::optional<Nat>(7); });
  auto pc = pair_closure_check(m, ei.pair, ei.p, Reduction{collapse});
  CHECK(m.eval(pc.code, pair(wu->code(), wv->code()), 10) == EvalOutcome::done(7));
}
