#include <unordered_map>

#include "prelat/ce.hpp"

namespace prelat {

bool member_by(Machine& m, Nat enumerator, Nat x, Nat stage) { return m.value_by(enumerator, x, stage).has_value(); }

std::vector<Nat> approx(Machine& m, Nat enumerator, Nat stage) { return m.enumerate_W(enumerator, stage); }

bool disjoint_on(Machine& m, const DisjointPair& p, const std::vector<Nat>& elements, Nat stage) {
  for (Nat x : elements)
    if (member_by(m, p.left, x, stage) && member_by(m, p.right, x, stage)) return false;
  return true;
}

std::shared_ptr<ScriptedSet> ScriptedSet::create(Machine& m, std::string label) {
  std::shared_ptr<ScriptedSet> s(new ScriptedSet(m));
  ScriptedSet* raw = s.get();
  s->code_ = m.define_dynamic(
      [keep = s, raw](Nat x, Ctx& c) -> std::optional<Nat> {
        (void)keep;
        auto it = raw->script_.find(x);
        if (it == raw->script_.end()) return std::nullopt;
        if (c.stage() >= it->second) return 0;
        c.wake_at(it->second);
        return std::nullopt;
      },
      label.empty() ? "scripted" : std::move(label));
  return s;
}

void ScriptedSet::add(Nat x, Nat stage) {
  if (stage <= m_.now() && m_.now() > 0) stage = m_.now() + 1;
  auto it = script_.find(x);
  if (it != script_.end() && it->second <= stage) return;
  script_[x] = stage;
  m_.poke(code_, x);
}

bool ScriptedSet::contains_by(Nat x, Nat stage) const {
  auto it = script_.find(x);
  return it != script_.end() && it->second <= stage;
}

std::optional<Nat> ScriptedSet::stage_of(Nat x) const {
  auto it = script_.find(x);
  if (it == script_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------

CanonicalEi canonical_ei_pair(Machine& m) {
  CanonicalEi out;
  out.pair.left = m.add_program("(if (eq (call x x) 0) 0 diverge)");
  out.pair.right = m.add_program("(if (eq (call x x) 1) 0 diverge)");
  auto memo = std::make_shared<std::unordered_map<Nat, Nat>>();
  Machine* mp = &m;
  out.p.code = m.define_native(
      [mp, memo](Nat z) -> std::optional<Nat> {
        auto it = memo->find(z);
        if (it != memo->end()) return it->second;
        auto [u, v] = unpair(z);
        Nat e = mp->fresh_deferred("e*");
        mp->define_deferred(e, Behavior([e, u = u, v = v](Nat, Ctx& c) -> std::optional<Nat> {
          if (c.value(u, e)) return 1;
          if (c.value(v, e)) return 0;
          return std::nullopt;
        }));
        memo->emplace(z, e);
        return e;
      },
      "canonical-p");
  out.p.total = true;
  return out;
}

Nat canonical_witness(Machine& m, const CanonicalEi& ei, Nat u, Nat v) {
  auto r = m.eval(ei.p.code, pair(u, v), 2);
  if (!r.converged) throw Error("canonical productive function did not converge");
  return r.value;
}

ProductiveFn totalize_productive(Machine& m, const DisjointPair& base, const ProductiveFn& p) {
  struct Patch {
    Nat u1, v1;
  };
  auto memo = std::make_shared<std::unordered_map<Nat, Patch>>();
  Machine* mp = &m;
  Nat A = base.left, B = base.right, pc = p.code;
  auto patched = [mp, pc](Nat side, Nat w, Nat z) {
    return mp->define_dynamic(
        [side, w, z, pc](Nat x, Ctx& c) -> std::optional<Nat> {
          if (c.value(side, x)) return 0;
          if (c.value(pc, z) && c.value(w, x)) return 0;
          return std::nullopt;
        },
        "patched");
  };
  ProductiveFn q;
  q.code = m.define_dynamic(
      [memo, patched, pc, A, B](Nat z, Ctx& c) -> std::optional<Nat> {
        if (auto r = c.value(pc, z)) return r;
        auto it = memo->find(z);
        if (it == memo->end()) {
          auto [u, v] = unpair(z);
          it = memo->emplace(z, Patch{patched(A, u, z), patched(B, v, z)}).first;
        }
        return c.value(pc, pair(it->second.u1, it->second.v1));
      },
      "totalized");
  q.total = true;
  return q;
}

namespace {

// First dovetail stage at which W_e emits x, if it does so by stage `bound`.
std::optional<Nat> emission(Machine& m, Nat e, Nat x, Nat bound) {
  Nat z;
  try {
    z = pair(e, x);
  } catch (const ArithmeticOverflow&) {
    return std::nullopt;
  }
  if (z > bound || !m.eval(e, x, bound).converged) return std::nullopt;
  Nat lo = 0, hi = bound;
  while (hi - lo > 1) {
    Nat mid = lo + (hi - lo) / 2;
    if (m.eval(e, x, mid).converged)
      hi = mid;
    else
      lo = mid;
  }
  if (m.eval(e, x, lo).converged) hi = lo;
  return std::max(z, hi);
}

}  // namespace

std::pair<Nat, Nat> reduction_principle(Machine& m, Nat u, Nat v, ReductionSchedule schedule) {
  Machine* mp = &m;
  if (schedule == ReductionSchedule::Dovetail) {
    Nat up = m.define_metered(
        [mp, u, v](Nat x, Nat fuel) -> std::optional<Nat> {
          auto su = emission(*mp, u, x, fuel);
          if (!su) return std::nullopt;
          if (*su > 0 && emission(*mp, v, x, *su - 1)) return std::nullopt;
          return 0;
        },
        "reduced-u");
    Nat vp = m.define_metered(
        [mp, u, v](Nat x, Nat fuel) -> std::optional<Nat> {
          auto sv = emission(*mp, v, x, fuel);
          if (!sv) return std::nullopt;
          if (emission(*mp, u, x, *sv)) return std::nullopt;
          return 0;
        },
        "reduced-v");
    return {up, vp};
  }
  auto first = [mp](Nat e, Nat x, Ctx& c) -> std::optional<Nat> {
    if (!c.value(e, x)) return std::nullopt;
    auto st = mp->stamp(e, x);
    return st ? *st : c.fact_stage();
  };
  Nat up = m.define_dynamic(
      [mp, u, v, first](Nat x, Ctx& c) -> std::optional<Nat> {
        auto su = first(u, x, c);
        if (!su) return std::nullopt;
        if (*su > 0 && mp->value_by(v, x, *su - 1)) return std::nullopt;
        return 0;
      },
      "reduced-u");
  Nat vp = m.define_dynamic(
      [mp, u, v, first](Nat x, Ctx& c) -> std::optional<Nat> {
        auto sv = first(v, x, c);
        if (!sv) return std::nullopt;
        if (mp->value_by(u, x, *sv)) return std::nullopt;
        return 0;
      },
      "reduced-v");
  return {up, vp};
}

ProductiveFn pullback_productive(Machine& m, Nat f, const ProductiveFn& p) {
  auto pre = std::make_shared<std::unordered_map<Nat, Nat>>();
  Machine* mp = &m;
  auto preimage = [mp, pre, f](Nat a) {
    auto it = pre->find(a);
    if (it != pre->end()) return it->second;
    Nat code = mp->define_dynamic(
        [mp, f, a](Nat i, Ctx& c) -> std::optional<Nat> {
          auto y = mp->eval(f, i, mp->config().fuel_budget);
          if (!y.converged) return std::nullopt;
          if (c.value(a, y.value)) return 0;
          return std::nullopt;
        },
        "preimage");
    pre->emplace(a, code);
    return code;
  };
  ProductiveFn out;
  Nat pc = p.code;
  out.code = m.define_metered(
      [mp, preimage, pc, f](Nat z, Nat fuel) -> std::optional<Nat> {
        auto [a, b] = unpair(z);
        Nat ha = preimage(a), hb = preimage(b);
        auto r = mp->eval(pc, pair(ha, hb), fuel);
        if (!r.converged) return std::nullopt;
        auto y = mp->eval(f, r.value, fuel);
        if (!y.converged) return std::nullopt;
        return y.value;
      },
      "pullback");
  out.total = p.total;
  return out;
}

ProductiveFn pair_closure_check(Machine& m, const DisjointPair&, const ProductiveFn& p,
                                const std::variant<Supersets, Reduction>& how) {
  // disjoint supersets of the derived pair are disjoint supersets of the base pair
  if (std::holds_alternative<Supersets>(how)) return p;
  return pullback_productive(m, std::get<Reduction>(how).f, p);
}

}  // namespace prelat
