#include <algorithm>
#include <numeric>

#include "prelat/oracles.hpp"

namespace prelat {

std::vector<CollapsePair> collapse_pairs(const ScriptedSource& source, Nat stage) {
  std::vector<CollapsePair> out;
  for (auto& [g, s] : source.left())
    if (s <= stage) out.push_back({g, false});
  for (auto& [g, s] : source.right())
    if (s <= stage) out.push_back({g, true});
  return out;
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (a < b) std::swap(a, b);
    parent[a] = b;
    return true;
  }
};

// Close the seed identifications under compatibility with the given binary operation tables.
std::vector<std::size_t> close_congruence(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& seeds,
                                          const std::vector<const std::vector<std::vector<std::size_t>>*>& ops) {
  UnionFind uf(n);
  for (auto [a, b] : seeds) uf.unite(a, b);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        if (uf.find(i) != uf.find(j)) continue;
        for (auto* op : ops)
          for (std::size_t k = 0; k < n; ++k) changed |= uf.unite((*op)[i][k], (*op)[j][k]);
      }
  }
  std::vector<std::size_t> cls(n);
  for (std::size_t i = 0; i < n; ++i) cls[i] = uf.find(i);
  return cls;
}

}  // namespace

std::size_t RelationTable::class_count() const {
  std::vector<std::size_t> c = classes_;
  std::sort(c.begin(), c.end());
  return std::unique(c.begin(), c.end()) - c.begin();
}

std::size_t RelationTable::index_of(const Term& t) const {
  if (!semilattice_) {
    auto it = index_.find(normalize(t));
    if (it == index_.end()) throw ContextTooLarge("term outside the oracle context");
    return it->second;
  }
  SemiNF nf = semilattice_nf(t);
  if (nf.top) return semi_elements_.size() - 1;
  auto it = std::find(semi_elements_.begin(), semi_elements_.end() - 1, nf.gens);
  if (it == semi_elements_.end() - 1) throw ContextTooLarge("term outside the oracle context");
  return it - semi_elements_.begin();
}

bool RelationTable::leq_terms(const Term& s, const Term& t) const { return leq_[index_of(s)][index_of(t)]; }

RelationTable oracle_congruence_closure(const std::vector<CollapsePair>& pairs, const std::vector<Nat>& ctx) {
  if (ctx.size() > kMaxBruteForceGenerators) throw ContextTooLarge("congruence oracle is capped at 4 generators");
  RelationTable out;
  out.elements_ = free_distributive_elements(ctx);
  std::size_t n = out.elements_.size();
  for (std::size_t i = 0; i < n; ++i) out.index_.emplace(out.elements_[i], i);
  std::vector<std::vector<std::size_t>> meet(n, std::vector<std::size_t>(n)), join = meet;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      meet[i][j] = out.index_.at(nf_meet(out.elements_[i], out.elements_[j]));
      join[i][j] = out.index_.at(nf_join(out.elements_[i], out.elements_[j]));
    }
  std::size_t zero = out.index_.at(NormalForm::zero()), one = out.index_.at(NormalForm::one());
  std::vector<std::pair<std::size_t, std::size_t>> seeds;
  for (auto& p : pairs) {
    auto it = out.index_.find(NormalForm::gen(p.gen));
    if (it == out.index_.end()) continue;
    seeds.emplace_back(it->second, p.to_one ? one : zero);
  }
  out.classes_ = close_congruence(n, seeds, {&meet, &join});
  out.leq_.assign(n, std::vector<bool>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.leq_[i][j] = out.classes_[meet[i][j]] == out.classes_[i];
  return out;
}

RelationTable oracle_semilattice_closure(const std::vector<CollapsePair>& pairs, const std::vector<Nat>& ctx) {
  if (ctx.size() > 8) throw ContextTooLarge("semilattice oracle is capped at 8 generators");
  RelationTable out;
  out.semilattice_ = true;
  std::vector<Nat> c = canonical_set(ctx);
  std::size_t subsets = std::size_t{1} << c.size();
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    std::vector<Nat> s;
    for (std::size_t k = 0; k < c.size(); ++k)
      if (mask >> k & 1) s.push_back(c[k]);
    out.semi_elements_.push_back(s);
  }
  out.semi_elements_.push_back({});  // top
  std::size_t n = out.semi_elements_.size(), top = n - 1;
  std::vector<std::vector<std::size_t>> join(n, std::vector<std::size_t>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) join[i][j] = (i == top || j == top) ? top : (i | j);
  std::vector<std::pair<std::size_t, std::size_t>> seeds;
  for (auto& p : pairs) {
    auto it = std::find(c.begin(), c.end(), p.gen);
    if (it == c.end()) continue;
    seeds.emplace_back(std::size_t{1} << (it - c.begin()), p.to_one ? top : 0);
  }
  out.classes_ = close_congruence(n, seeds, {&join});
  out.leq_.assign(n, std::vector<bool>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.leq_[i][j] = out.classes_[join[i][j]] == out.classes_[j];
  return out;
}

bool oracle_whitman_collapsed(const Term& s, const Term& t, const std::vector<CollapsePair>& pairs) {
  std::map<Nat, bool> sigma;
  bool conflict = false;
  for (auto& p : pairs) {
    auto [it, fresh] = sigma.emplace(p.gen, p.to_one);
    if (!fresh && it->second != p.to_one) conflict = true;
  }
  if (conflict) return true;
  return whitman_leq(substitute(s, sigma), substitute(t, sigma));
}

NfLeqVerdict oracle_nf_leq(const Term& s, const Term& t) {
  auto v = oracle_leq(s, t);
  return {v.holds, v.witness};
}

}  // namespace prelat
