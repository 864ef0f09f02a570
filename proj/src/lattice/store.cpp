#include <algorithm>

#include "prelat/lattice.hpp"

namespace prelat {

TermStore::TermStore() {
  add(TermKind::Zero, 0, 0);
  add(TermKind::One, 0, 0);
}

Nat TermStore::add(TermKind k, Nat a, Nat b) {
  Key key{k, a, b};
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  Nat code = nodes_.size();
  nodes_.push_back({k, a, b});
  index_.emplace(key, code);
  return code;
}

Nat TermStore::gen(Nat id) { return add(TermKind::Gen, id, 0); }

Nat TermStore::meet(Nat a, Nat b) {
  if (!contains(a) || !contains(b)) throw MalformedTerm("meet of unallocated term codes");
  return add(TermKind::Meet, a, b);
}

Nat TermStore::join(Nat a, Nat b) {
  if (!contains(a) || !contains(b)) throw MalformedTerm("join of unallocated term codes");
  return add(TermKind::Join, a, b);
}

std::optional<Nat> TermStore::find_gen(Nat id) const {
  auto it = index_.find(Key{TermKind::Gen, id, 0});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<Nat> TermStore::find_meet(Nat a, Nat b) const {
  auto it = index_.find(Key{TermKind::Meet, a, b});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const TermStore::Node& TermStore::node(Nat code) const {
  if (!contains(code)) throw MalformedTerm("unallocated term code " + std::to_string(code));
  return nodes_[code];
}

Nat TermStore::intern(const Term& t) {
  switch (t.kind()) {
    case TermKind::Zero: return kZero;
    case TermKind::One: return kOne;
    case TermKind::Gen: return gen(t.id());
    case TermKind::Meet: {
      Nat a = intern(t.left());
      return meet(a, intern(t.right()));
    }
    case TermKind::Join: {
      Nat a = intern(t.left());
      return join(a, intern(t.right()));
    }
  }
  return kZero;
}

Term TermStore::to_term(Nat code) const {
  const Node& n = node(code);
  switch (n.kind) {
    case TermKind::Zero: return Term::zero();
    case TermKind::One: return Term::one();
    case TermKind::Gen: return Term::gen(n.a);
    case TermKind::Meet: return Term::meet(to_term(n.a), to_term(n.b));
    case TermKind::Join: return Term::join(to_term(n.a), to_term(n.b));
  }
  return Term::zero();
}

std::string TermStore::print(Nat code) const { return print_term(to_term(code)); }

// ---------------------------------------------------------------------------

namespace {

Signature gen_signature(Nat id) {
  Nat r[24];
  for (Nat j = 0; j < 24; ++j) r[j] = mix64(id * 64 + j + 0x51ed27);
  return {r[0],
          r[1] & r[2],
          r[3] | r[4],
          r[5] & r[6] & r[7],
          r[8] | r[9] | r[10],
          r[11] & r[12] & r[13] & r[14],
          r[15] | r[16] | r[17] | r[18],
          r[19] ^ (r[20] & r[21])};
}

constexpr std::uint32_t kSat = 1u << 30;
std::uint32_t sat_add(std::uint32_t a, std::uint32_t b) { return std::min(kSat, a + b); }

}  // namespace

FreeDag::FreeDag() {
  nodes_.push_back({TermKind::Zero, 0, 0, 0, 0});
  sigs_.push_back({});
  nodes_.push_back({TermKind::One, 0, 0, 0, 0});
  Signature ones;
  ones.fill(~Nat{0});
  sigs_.push_back(ones);
}

FreeDag::Id FreeDag::add(TermKind k, Nat g, Id a, Id b) {
  Id id = static_cast<Id>(nodes_.size());
  std::uint32_t n = k == TermKind::Gen ? 1 : sat_add(nodes_[a].ngens, nodes_[b].ngens);
  nodes_.push_back({k, g, a, b, n});
  Signature s;
  if (k == TermKind::Gen) {
    s = gen_signature(g);
  } else {
    for (std::size_t w = 0; w < kSigWords; ++w)
      s[w] = k == TermKind::Meet ? sigs_[a][w] & sigs_[b][w] : sigs_[a][w] | sigs_[b][w];
  }
  sigs_.push_back(s);
  return id;
}

FreeDag::Id FreeDag::gen(Nat g) {
  auto it = gens_.find(g);
  if (it != gens_.end()) return it->second;
  Id id = add(TermKind::Gen, g, 0, 0);
  gens_.emplace(g, id);
  return id;
}

FreeDag::Id FreeDag::meet(Id a, Id b) {
  if (a == kZero || b == kZero) return kZero;
  if (a == kOne) return b;
  if (b == kOne || a == b) return a;
  if (a > b) std::swap(a, b);
  Nat key = ((static_cast<Nat>(a) << 32) | b) * 2;
  auto it = binops_.find(key);
  if (it != binops_.end()) return it->second;
  Id id = add(TermKind::Meet, 0, a, b);
  binops_.emplace(key, id);
  return id;
}

FreeDag::Id FreeDag::join(Id a, Id b) {
  if (a == kOne || b == kOne) return kOne;
  if (a == kZero) return b;
  if (b == kZero || a == b) return a;
  if (a > b) std::swap(a, b);
  Nat key = ((static_cast<Nat>(a) << 32) | b) * 2 + 1;
  auto it = binops_.find(key);
  if (it != binops_.end()) return it->second;
  Id id = add(TermKind::Join, 0, a, b);
  binops_.emplace(key, id);
  return id;
}

FreeDag::Id FreeDag::from_term(const Term& t) {
  switch (t.kind()) {
    case TermKind::Zero: return kZero;
    case TermKind::One: return kOne;
    case TermKind::Gen: return gen(t.id());
    case TermKind::Meet: {
      Id a = from_term(t.left());
      return meet(a, from_term(t.right()));
    }
    case TermKind::Join: {
      Id a = from_term(t.left());
      return join(a, from_term(t.right()));
    }
  }
  return kZero;
}

Term FreeDag::to_term(Id i) const {
  const Node& n = nodes_[i];
  switch (n.kind) {
    case TermKind::Zero: return Term::zero();
    case TermKind::One: return Term::one();
    case TermKind::Gen: return Term::gen(n.gen);
    case TermKind::Meet: return Term::meet(to_term(n.a), to_term(n.b));
    case TermKind::Join: return Term::join(to_term(n.a), to_term(n.b));
  }
  return Term::zero();
}

NormalForm FreeDag::normal_form(Id i) {
  const Node& n = nodes_[i];
  switch (n.kind) {
    case TermKind::Zero: return NormalForm::zero();
    case TermKind::One: return NormalForm::one();
    case TermKind::Gen: return NormalForm::gen(n.gen);
    default: break;
  }
  auto it = nf_cache_.find(i);
  if (it != nf_cache_.end()) return it->second;
  NormalForm a = normal_form(n.a);
  NormalForm b = normal_form(n.b);
  NormalForm r = n.kind == TermKind::Meet ? nf_meet(a, b) : nf_join(a, b);
  nf_cache_.emplace(i, r);
  return r;
}

std::set<Nat> FreeDag::generators(Id i) const {
  std::set<Nat> out;
  std::vector<Id> stack{i};
  std::vector<bool> seen(nodes_.size(), false);
  while (!stack.empty()) {
    Id x = stack.back();
    stack.pop_back();
    if (seen[x]) continue;
    seen[x] = true;
    const Node& n = nodes_[x];
    if (n.kind == TermKind::Gen) out.insert(n.gen);
    if (n.kind == TermKind::Meet || n.kind == TermKind::Join) {
      stack.push_back(n.a);
      stack.push_back(n.b);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

bool OrderDecider::refuted_by_signature(FreeDag::Id s, FreeDag::Id t) const {
  const Signature& a = dag_.sig(s);
  const Signature& b = dag_.sig(t);
  for (std::size_t w = 0; w < kSigWords; ++w)
    if (a[w] & ~b[w]) return true;
  return false;
}

bool OrderDecider::whitman(FreeDag::Id s, FreeDag::Id t) {
  if (s == t || s == FreeDag::kZero || t == FreeDag::kOne) return true;
  if (s == FreeDag::kOne || t == FreeDag::kZero) return false;
  if (refuted_by_signature(s, t)) return false;
  Nat key = (static_cast<Nat>(s) << 32) | t;
  auto it = whitman_memo_.find(key);
  if (it != whitman_memo_.end()) return it->second;
  const auto& ns = dag_.node(s);
  const auto& nt = dag_.node(t);
  bool r;
  if (ns.kind == TermKind::Join) {
    r = whitman(ns.a, t) && whitman(ns.b, t);
  } else if (nt.kind == TermKind::Meet) {
    r = whitman(s, nt.a) && whitman(s, nt.b);
  } else if (ns.kind == TermKind::Gen && nt.kind == TermKind::Gen) {
    r = ns.gen == nt.gen;
  } else {
    r = false;
    if (ns.kind == TermKind::Meet) r = whitman(ns.a, t) || whitman(ns.b, t);
    if (!r && nt.kind == TermKind::Join) r = whitman(s, nt.a) || whitman(s, nt.b);
  }
  whitman_memo_.emplace(key, r);
  return r;
}

namespace {

void semi_collect(const FreeDag& dag, FreeDag::Id i, SemiNF& out) {
  const auto& n = dag.node(i);
  switch (n.kind) {
    case TermKind::Zero: return;
    case TermKind::One: out.top = true; return;
    case TermKind::Gen: out.gens.push_back(n.gen); return;
    case TermKind::Meet: throw MalformedTerm("meet node in a join-semilattice term");
    case TermKind::Join:
      semi_collect(dag, n.a, out);
      semi_collect(dag, n.b, out);
      return;
  }
}

}  // namespace

bool OrderDecider::semilattice(FreeDag::Id s, FreeDag::Id t) {
  SemiNF a, b;
  semi_collect(dag_, s, a);
  semi_collect(dag_, t, b);
  a.gens = canonical_set(std::move(a.gens));
  b.gens = canonical_set(std::move(b.gens));
  if (a.top) a.gens.clear();
  if (b.top) b.gens.clear();
  return semilattice_leq(a, b);
}

bool OrderDecider::sat_leq(FreeDag::Id s, FreeDag::Id t) { return !separating_assignment(dag_, s, t).has_value(); }

bool OrderDecider::leq(FreeDag::Id s, FreeDag::Id t) {
  ++stats_.queries;
  if (kind_ == OrderKind::Semilattice) {
    if (s == t || s == FreeDag::kZero || t == FreeDag::kOne) {
      // still reject meets hidden inside s or t
      SemiNF tmp;
      semi_collect(dag_, s, tmp);
      semi_collect(dag_, t, tmp);
      ++stats_.trivial;
      return true;
    }
    return semilattice(s, t);
  }
  if (s == t || s == FreeDag::kZero || t == FreeDag::kOne) {
    ++stats_.trivial;
    return true;
  }
  if (s == FreeDag::kOne || t == FreeDag::kZero) {
    ++stats_.trivial;
    return false;
  }
  Nat key = (static_cast<Nat>(s) << 32) | t;
  auto it = cache_.find(key);
  if (it != cache_.end()) {
    ++stats_.cached;
    return it->second;
  }
  bool r;
  if (refuted_by_signature(s, t)) {
    ++stats_.refuted;
    r = false;
  } else if (kind_ == OrderKind::Free) {
    ++stats_.whitman;
    r = whitman(s, t);
  } else if (dag_.node(s).ngens + dag_.node(t).ngens <= 24) {
    ++stats_.normal_form;
    r = nf_leq(dag_.normal_form(s), dag_.normal_form(t));
  } else if (whitman(s, t)) {
    ++stats_.whitman;
    r = true;
  } else {
    ++stats_.sat;
    r = sat_leq(s, t);
  }
  cache_.emplace(key, r);
  return r;
}

}  // namespace prelat
