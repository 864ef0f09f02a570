#include <algorithm>

#include "prelat/constructions.hpp"

namespace prelat {

namespace {

Nat eval_or_throw(Machine& m, Nat code, Nat arg) {
  auto r = m.eval(code, arg, m.config().fuel_budget + m.now());
  if (!r.converged) throw Error("productive function did not converge");
  return r.value;
}

}  // namespace

Nat incomparable_in_interval(StagedRelation& relation, Nat u, Nat v, Nat X, const ProductiveFn& p, Machine& m,
                             Nat universe_bound) {
  (void)u;
  (void)v;
  StagedRelation* R = &relation;
  // staged relations outside the machine register no dependencies
  bool tracked = dynamic_cast<PreLattice*>(R) != nullptr;
  auto side = [&](bool below) {
    return m.define_dynamic(
        [R, X, below, universe_bound, tracked](Nat y, Ctx& c) -> std::optional<Nat> {
          if (!tracked) c.mark_volatile();
          Nat fs = c.fact_stage();
          if (fs < universe_bound) c.wake_at(c.stage() + 1);
          Nat limit = std::min(fs, universe_bound);
          for (Nat x = 0; x < limit; ++x) {
            if (!c.value(X, x)) continue;
            if (below ? R->holds(y, x, fs) : R->holds(x, y, fs)) return 0;
          }
          return std::nullopt;
        },
        below ? "below-X" : "above-X");
  };
  Nat U = side(true), V = side(false);
  auto [u1, v1] = reduction_principle(m, U, V, ReductionSchedule::Clocked);
  return eval_or_throw(m, p.code, pair(u1, v1));
}

Nat incomparable_in_interval(PreLattice& lattice, Nat u, Nat v, Nat X, const ProductiveFn& p, Nat universe_bound) {
  Machine& m = lattice.machine();
  PreLattice* L = &lattice;
  auto side = [&](bool below) {
    return m.define_dynamic(
        [L, u, v, X, below, universe_bound](Nat y, Ctx& c) -> std::optional<Nat> {
          if (!L->valid(y)) return std::nullopt;
          Nat fs = c.fact_stage();
          if (fs < universe_bound) c.wake_at(c.stage() + 1);
          Nat clamp = L->meet(L->join(u, y), v);
          for (Nat x = 0; x < std::min(fs, universe_bound); ++x) {
            if (!c.value(X, x) || !L->valid(x)) continue;
            if (below ? L->holds(clamp, x, fs) : L->holds(x, clamp, fs)) return 0;
          }
          return std::nullopt;
        },
        below ? "below-X" : "above-X");
  };
  Nat U = side(true), V = side(false);
  auto [u1, v1] = reduction_principle(m, U, V, ReductionSchedule::Clocked);
  Nat y = eval_or_throw(m, p.code, pair(u1, v1));
  return lattice.meet(lattice.join(u, y), v);
}

// ---------------------------------------------------------------------------

ChainReport semilattice_nonuniversality_check(TermLattice& semilattice, const std::vector<Nat>& generators,
                                              Nat stage) {
  if (generators.size() > kMaxBruteForceGenerators) throw ContextTooLarge("chain check limited to 4 generators");
  TermLattice& U = semilattice;
  std::size_t n = generators.size();
  std::vector<Nat> elems;
  std::vector<std::size_t> free_count;
  for (std::uint32_t s = 0; s < (1u << n); ++s) {
    Nat x = U.bottom();
    std::size_t g = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (s >> i & 1) {
        x = s == (1u << i) ? generators[i] : U.join(x, generators[i]);
        if (!U.holds(generators[i], U.bottom(), stage)) ++g;
      }
    elems.push_back(x);
    free_count.push_back(g);
  }
  elems.push_back(U.top());
  free_count.push_back(0);
  std::size_t total = elems.size();
  std::vector<std::vector<bool>> leq(total, std::vector<bool>(total));
  for (std::size_t i = 0; i < total; ++i)
    for (std::size_t j = 0; j < total; ++j) leq[i][j] = U.holds(elems[i], elems[j], stage);
  auto strictly_below = [&](std::size_t i, std::size_t j) { return leq[i][j] && !leq[j][i]; };
  // longest strict chain starting at each element, by height
  std::vector<std::size_t> chain(total, 0);
  std::vector<std::size_t> order(total);
  for (std::size_t i = 0; i < total; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    std::size_t da = 0, db = 0;
    for (std::size_t k = 0; k < total; ++k) {
      da += strictly_below(k, a);
      db += strictly_below(k, b);
    }
    return da < db;
  });
  for (std::size_t i : order) {
    chain[i] = 1;
    for (std::size_t j = 0; j < total; ++j)
      if (strictly_below(j, i)) chain[i] = std::max(chain[i], chain[j] + 1);
  }
  ChainReport out;
  for (std::size_t i = 0; i < total; ++i) {
    if (leq[total - 1][i]) continue;  // ≡ top
    ++out.elements;
    std::size_t g = free_count[i];
    auto& best = out.longest[g];
    best = std::max(best, chain[i]);
    if (chain[i] > out.bound(g)) ++out.violations;
  }
  return out;
}

}  // namespace prelat
