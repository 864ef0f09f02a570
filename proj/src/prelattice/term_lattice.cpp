#include <algorithm>

#include "prelat/prelattice.hpp"

namespace prelat {

namespace {
constexpr FreeDag::Id kUnset = ~FreeDag::Id{0};
}

Nat PreLattice::meet_all(const std::vector<Nat>& xs) {
  if (xs.empty()) return top();
  Nat acc = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) acc = meet(acc, xs[i]);
  return acc;
}

Nat PreLattice::join_all(const std::vector<Nat>& xs) {
  if (xs.empty()) return bottom();
  Nat acc = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) acc = join(acc, xs[i]);
  return acc;
}

bool PreLattice::identity_stage(Nat x, Nat y) {
  if (machine().evaluating()) machine().wake_current_at(1);
  return x == y;
}

TermLattice::TermLattice(Machine& m, std::shared_ptr<PairSource> source, OrderKind kind,
                         std::shared_ptr<TermStore> store)
    : m_(m),
      source_(std::move(source)),
      kind_(kind),
      store_(store ? std::move(store) : std::make_shared<TermStore>()),
      decider_(kind) {
  if (auto p = source_->productive()) attach_productive(ei_witness(*this));
}

Nat TermLattice::meet(Nat x, Nat y) {
  if (kind_ == OrderKind::Semilattice) throw MalformedTerm("meet in a join-semilattice");
  return store_->meet(x, y);
}

std::optional<std::pair<Nat, Nat>> TermLattice::as_meet(Nat c) const {
  if (!store_->contains(c)) return std::nullopt;
  const auto& n = store_->node(c);
  if (n.kind != TermKind::Meet) return std::nullopt;
  return std::make_pair(n.a, n.b);
}

std::optional<std::pair<Nat, Nat>> TermLattice::as_join(Nat c) const {
  if (!store_->contains(c)) return std::nullopt;
  const auto& n = store_->node(c);
  if (n.kind != TermKind::Join) return std::nullopt;
  return std::make_pair(n.a, n.b);
}

Nat TermLattice::fresh_generator() { return gen(m_.fresh_deferred("generator")); }

const TermLattice::Cone& TermLattice::cone(Nat code) {
  if (!store_->contains(code)) throw MalformedTerm("unallocated term code " + std::to_string(code));
  if (cones_.size() < store_->size()) cones_.resize(store_->size());
  if (cones_[code].computed) return cones_[code];
  std::vector<Nat> stack{code};
  while (!stack.empty()) {
    Nat c = stack.back();
    if (cones_[c].computed) {
      stack.pop_back();
      continue;
    }
    TermStore::Node n = store_->node(c);
    Cone out;
    if (n.kind == TermKind::Gen) {
      out.gens = {n.a};
    } else if (n.kind == TermKind::Meet || n.kind == TermKind::Join) {
      if (!cones_[n.a].computed || !cones_[n.b].computed) {
        if (!cones_[n.a].computed) stack.push_back(n.a);
        if (!cones_[n.b].computed) stack.push_back(n.b);
        continue;
      }
      const Cone &a = cones_[n.a], &b = cones_[n.b];
      out.has_meet = n.kind == TermKind::Meet || a.has_meet || b.has_meet;
      out.big = a.big || b.big;
      if (!out.big) {
        std::set_union(a.gens.begin(), a.gens.end(), b.gens.begin(), b.gens.end(), std::back_inserter(out.gens));
        if (out.gens.size() > kSmallCone) {
          out.big = true;
          out.gens.clear();
        }
      }
    }
    out.computed = true;
    cones_[c] = std::move(out);
    stack.pop_back();
  }
  return cones_[code];
}

FreeDag::Id TermLattice::subst(Nat code, Nat stage, std::vector<FreeDag::Id>& memo, bool track) {
  if (memo.size() < store_->size()) memo.resize(store_->size(), kUnset);
  if (memo[code] != kUnset) return memo[code];
  FreeDag& dag = decider_.dag();
  std::vector<Nat> stack{code};
  while (!stack.empty()) {
    Nat c = stack.back();
    if (memo[c] != kUnset) {
      stack.pop_back();
      continue;
    }
    TermStore::Node n = store_->node(c);
    FreeDag::Id out = FreeDag::kZero;
    switch (n.kind) {
      case TermKind::Zero: out = FreeDag::kZero; break;
      case TermKind::One: out = FreeDag::kOne; break;
      case TermKind::Gen: {
        GenStatus st = source_->status(n.a, stage);
        if (track) memo_until_ = std::min(memo_until_, st.next);
        if (st.left)
          out = FreeDag::kZero;
        else if (st.right)
          out = FreeDag::kOne;
        else
          out = dag.gen(n.a);
        break;
      }
      case TermKind::Meet:
      case TermKind::Join: {
        if (memo[n.a] == kUnset || memo[n.b] == kUnset) {
          if (memo[n.a] == kUnset) stack.push_back(n.a);
          if (memo[n.b] == kUnset) stack.push_back(n.b);
          continue;
        }
        out = n.kind == TermKind::Meet ? dag.meet(memo[n.a], memo[n.b]) : dag.join(memo[n.a], memo[n.b]);
        break;
      }
    }
    memo[c] = out;
    stack.pop_back();
  }
  return memo[code];
}

void TermLattice::refresh(Nat stage) {
  Nat v = source_->version();
  if (v != memo_version_ || stage < memo_stage_ || stage >= memo_until_) {
    memo_.clear();
    memo_version_ = v;
    memo_stage_ = stage;
    memo_until_ = kNever;
  }
}

void TermLattice::register_dependencies(Nat x, Nat y, Nat stage) {
  cone(x);
  cone(y);
  const Cone& cx = cones_[x];
  const Cone& cy = cones_[y];
  if (!cx.big && !cy.big && cx.gens.size() + cy.gens.size() <= kSmallCone) {
    for (Nat g : cx.gens) source_->status(g, stage);
    for (Nat g : cy.gens) source_->status(g, stage);
    return;
  }
  source_->watch_all();
  if (memo_until_ != kNever) m_.wake_current_at(memo_until_ + 1);
}

bool TermLattice::holds(Nat x, Nat y, Nat stage) {
  bool meets = cone(x).has_meet;
  meets = cone(y).has_meet || meets;
  if (kind_ == OrderKind::Semilattice && meets) throw MalformedTerm("meet in a join-semilattice term");
  if (x == y) return true;
  if (stage == 0) return identity_stage(x, y);
  if (stage > m_.settled_stage()) throw Error("order queried at an unsettled stage");
  if (source_->conflict(stage)) return true;
  FreeDag::Id a, b;
  if (stage == m_.settled_stage()) {
    refresh(stage);
    a = subst(x, stage, memo_, true);
    b = subst(y, stage, memo_, true);
    if (m_.evaluating()) register_dependencies(x, y, stage);
  } else {
    Nat v = source_->version();
    if (v != historic_version_ || stage != historic_stage_) {
      historic_memo_.clear();
      historic_version_ = v;
      historic_stage_ = stage;
    }
    a = subst(x, stage, historic_memo_, false);
    b = subst(y, stage, historic_memo_, false);
  }
  return decider_.leq(a, b);
}

Term TermLattice::substituted(Nat x, Nat stage) {
  std::vector<FreeDag::Id> memo;
  return decider_.dag().to_term(subst(x, stage, memo, false));
}

std::shared_ptr<TermLattice> build_Ld01(Machine& m, std::shared_ptr<PairSource> source) {
  return std::make_shared<TermLattice>(m, std::move(source), OrderKind::Distributive);
}

std::shared_ptr<TermLattice> build_Lnd01(Machine& m, std::shared_ptr<PairSource> source) {
  return std::make_shared<TermLattice>(m, std::move(source), OrderKind::Free);
}

std::shared_ptr<TermLattice> build_Usemi01(Machine& m, std::shared_ptr<PairSource> source) {
  return std::make_shared<TermLattice>(m, std::move(source), OrderKind::Semilattice);
}

ProductiveFn ei_witness(TermLattice& lattice) {
  auto p = lattice.source().productive();
  if (!p) throw Error("pair source carries no productive function");
  Machine& m = lattice.machine();
  auto store = lattice.store_ptr();
  Nat to_gen = m.define_native([store](Nat i) -> std::optional<Nat> { return store->gen(i); }, "generator");
  return pullback_productive(m, to_gen, *p);
}

}  // namespace prelat
