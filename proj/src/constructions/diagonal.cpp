#include <functional>
#include <unordered_map>

#include "prelat/constructions.hpp"

namespace prelat {

namespace {

// Meet-irreducible in the free distributive lattice: brute force on small contexts, otherwise
// the single-clause test (x is a join of generators).
bool irreducible(const NormalForm& nf) {
  if (nf.is_zero() || nf.is_one()) return false;
  auto gens = nf_generators(nf);
  if (gens.size() <= kMaxBruteForceGenerators) return meet_irreducible(nf, {gens.begin(), gens.end()});
  for (auto& clause : nf.clauses)
    if (clause.size() != 1) return false;
  return true;
}

}  // namespace

DiagonalLattice::DiagonalLattice(std::shared_ptr<TermLattice> l2, std::vector<Nat> candidates, TraceSink trace)
    : l2_(std::move(l2)), store_(l2_->store_ptr()), candidates_(std::move(candidates)), trace_(std::move(trace)) {}

Term DiagonalLattice::substituted(Nat x, Nat stage) {
  std::unordered_map<Nat, FreeDag::Id> memo;
  FreeDag& dag = decider_.dag();
  PairSource& source = l2_->source();
  std::function<FreeDag::Id(Nat)> go = [&](Nat c) -> FreeDag::Id {
    auto it = memo.find(c);
    if (it != memo.end()) return it->second;
    const auto& n = store_->node(c);
    FreeDag::Id out = FreeDag::kZero;
    switch (n.kind) {
      case TermKind::Zero: out = FreeDag::kZero; break;
      case TermKind::One: out = FreeDag::kOne; break;
      case TermKind::Meet: out = dag.meet(go(n.a), go(n.b)); break;
      case TermKind::Join: out = dag.join(go(n.a), go(n.b)); break;
      case TermKind::Gen: {
        Nat id = n.a;
        if (id % 3 == 0) {
          GenStatus st = source.status(id / 3, stage);
          out = st.left ? FreeDag::kZero : st.right ? FreeDag::kOne : dag.gen(id);
        } else if (id % 3 == 1) {
          auto acted = acted_.find(id / 3);
          if (acted != acted_.end() && acted->second <= stage) {
            auto [k1, k2] = z2_pairs_.at(id / 3);
            out = dag.meet(dag.gen(z2_id(k1)), dag.gen(z2_id(k2)));
          } else {
            out = dag.gen(id);
          }
        } else {
          out = dag.gen(id);
        }
        break;
      }
    }
    memo.emplace(c, out);
    return out;
  };
  return dag.to_term(go(x));
}

bool DiagonalLattice::holds(Nat x, Nat y, Nat stage) {
  if (x == y) return true;
  if (stage == 0) return identity_stage(x, y);
  FreeDag& dag = decider_.dag();
  FreeDag::Id a = dag.from_term(substituted(x, stage));
  FreeDag::Id b = dag.from_term(substituted(y, stage));
  return decider_.leq(a, b);
}

bool DiagonalLattice::in_F(Nat code, Nat s) {
  if (!store_->contains(code)) return false;
  for (Nat g : term_generators(store_->to_term(code)))
    if (g >= s) return false;
  return true;
}

NormalForm DiagonalLattice::class_in_l2(Nat code, Nat stage) { return normalize(l2_->substituted(code, stage)); }

std::optional<Nat> DiagonalLattice::target(std::size_t i, Nat fuel) {
  Machine& m = machine();
  auto r = m.eval(candidates_[i], z1(i), fuel);
  if (!r.converged) return std::nullopt;
  return r.value;
}

void DiagonalLattice::step() {
  Machine& m = machine();
  Nat s = stage_;
  if (m.now() < s) m.advance_to(s);
  trace_("stage_begin", s + 1, {m.now()});
  auto [i, t] = unpair(s);
  (void)t;
  bool act = false;
  Nat x = 0;
  if (i < candidates_.size() && !acted_.count(i) && z1_id(i) < s) {
    auto r = target(i, s);
    if (r && in_F(*r, s)) {
      x = *r;
      NormalForm cls = class_in_l2(x, s);
      act = cls.is_zero() || cls.is_one() || irreducible(cls);
    }
  }
  if (act) {
    Nat k1 = next_z2_++, k2 = next_z2_++;
    z2_pairs_[i] = {k1, k2};
    acted_[i] = s + 1;
    Nat z1c = z1(i);
    Nat low = store_->meet(store_->gen(z2_id(k1)), store_->gen(z2_id(k2)));
    trace_("equivalence_certified", s + 1, {z1c, low, x}, "z1 collapsed to a meet of two fresh generators");
  }
  stage_ = s + 1;
  if (m.now() < stage_) m.advance_to(stage_);
}

void DiagonalLattice::run(Nat stages) {
  for (Nat k = 0; k < stages; ++k) step();
}

std::vector<DiagonalCertificate> DiagonalLattice::verify(Nat fuel) {
  std::vector<DiagonalCertificate> out;
  Nat at = std::min(stage_, machine().settled_stage());
  for (std::size_t i = 0; i < candidates_.size(); ++i) {
    Nat z = z1(i);
    auto r = target(i, fuel);
    if (!r || !store_->contains(*r)) continue;
    DiagonalCertificate c;
    c.candidate = i;
    c.z1 = z;
    c.target = *r;
    c.z1_class = normalize(substituted(z, at));
    c.target_class = class_in_l2(*r, at);
    c.z1_irreducible = irreducible(c.z1_class);
    c.target_irreducible = irreducible(c.target_class);
    c.target_bound = c.target_class.is_zero() || c.target_class.is_one();
    auto it = acted_.find(i);
    if (it != acted_.end()) c.acted_at = it->second;
    out.push_back(std::move(c));
  }
  return out;
}

std::shared_ptr<DiagonalLattice> build_L1_diagonal(std::shared_ptr<TermLattice> l2, std::vector<Nat> candidates,
                                                   TraceSink trace) {
  return std::make_shared<DiagonalLattice>(std::move(l2), std::move(candidates), std::move(trace));
}

}  // namespace prelat
