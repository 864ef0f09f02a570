#include <algorithm>

#include "prelat/lattice.hpp"

namespace prelat {

namespace {

bool subset(const std::vector<Nat>& a, const std::vector<Nat>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::vector<Nat> set_union(const std::vector<Nat>& a, const std::vector<Nat>& b) {
  std::vector<Nat> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

NormalForm NormalForm::from_clauses(std::vector<std::vector<Nat>> cs) {
  if (cs.empty()) return zero();
  for (auto& c : cs) {
    c = canonical_set(std::move(c));
    if (c.empty()) return one();
  }
  std::sort(cs.begin(), cs.end(), [](const auto& x, const auto& y) {
    if (x.size() != y.size()) return x.size() < y.size();
    return x < y;
  });
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
  std::vector<std::vector<Nat>> kept;
  for (auto& c : cs) {
    bool absorbed = false;
    for (const auto& k : kept)
      if (subset(k, c)) {
        absorbed = true;
        break;
      }
    if (!absorbed) kept.push_back(std::move(c));
  }
  std::sort(kept.begin(), kept.end());
  return {Kind::Clauses, std::move(kept)};
}

NormalForm nf_meet(const NormalForm& a, const NormalForm& b) {
  if (a.is_zero() || b.is_zero()) return NormalForm::zero();
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  std::vector<std::vector<Nat>> cs;
  cs.reserve(a.clauses.size() * b.clauses.size());
  for (const auto& x : a.clauses)
    for (const auto& y : b.clauses) cs.push_back(set_union(x, y));
  return NormalForm::from_clauses(std::move(cs));
}

NormalForm nf_join(const NormalForm& a, const NormalForm& b) {
  if (a.is_one() || b.is_one()) return NormalForm::one();
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  auto cs = a.clauses;
  cs.insert(cs.end(), b.clauses.begin(), b.clauses.end());
  return NormalForm::from_clauses(std::move(cs));
}

NormalForm normalize(const Term& t) {
  switch (t.kind()) {
    case TermKind::Zero: return NormalForm::zero();
    case TermKind::One: return NormalForm::one();
    case TermKind::Gen: return NormalForm::gen(t.id());
    case TermKind::Meet: return nf_meet(normalize(t.left()), normalize(t.right()));
    case TermKind::Join: return nf_join(normalize(t.left()), normalize(t.right()));
  }
  return NormalForm::zero();
}

bool nf_leq(const NormalForm& a, const NormalForm& b) {
  if (a.is_zero() || b.is_one()) return true;
  if (a.is_one() || b.is_zero()) return false;
  for (const auto& cx : a.clauses) {
    bool found = false;
    for (const auto& cy : b.clauses)
      if (subset(cy, cx)) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

Term nf_to_term(const NormalForm& x) {
  if (x.is_zero()) return Term::zero();
  if (x.is_one()) return Term::one();
  std::optional<Term> acc;
  for (const auto& c : x.clauses) {
    Term m = Term::gen(c[0]);
    for (std::size_t i = 1; i < c.size(); ++i) m = Term::meet(m, Term::gen(c[i]));
    acc = acc ? Term::join(*acc, m) : m;
  }
  return *acc;
}

std::string print_nf(const NormalForm& x) {
  if (x.is_zero()) return "zero";
  if (x.is_one()) return "one";
  std::string out = "{";
  for (std::size_t i = 0; i < x.clauses.size(); ++i) {
    if (i) out += ',';
    out += '{';
    for (std::size_t j = 0; j < x.clauses[i].size(); ++j) {
      if (j) out += ',';
      out += std::to_string(x.clauses[i][j]);
    }
    out += '}';
  }
  return out + "}";
}

std::set<Nat> nf_generators(const NormalForm& x) {
  std::set<Nat> out;
  for (const auto& c : x.clauses) out.insert(c.begin(), c.end());
  return out;
}

NormalForm nf_substitute(const NormalForm& x, const std::map<Nat, bool>& sigma) {
  if (x.kind != NormalForm::Kind::Clauses) return x;
  std::vector<std::vector<Nat>> cs;
  for (const auto& c : x.clauses) {
    std::vector<Nat> kept;
    bool dead = false;
    for (Nat g : c) {
      auto it = sigma.find(g);
      if (it == sigma.end()) {
        kept.push_back(g);
      } else if (!it->second) {
        dead = true;
        break;
      }
    }
    if (!dead) cs.push_back(std::move(kept));
  }
  return NormalForm::from_clauses(std::move(cs));
}

namespace {

// Monotone Boolean functions on k variables as truth tables; bit m is the value at assignment m.
std::vector<std::uint32_t> monotone_tables(std::size_t k) {
  std::vector<std::uint32_t> cur = {0u, 1u};
  for (std::size_t i = 1; i <= k; ++i) {
    std::size_t half = std::size_t{1} << (i - 1);
    std::vector<std::uint32_t> next;
    for (auto f0 : cur)
      for (auto f1 : cur)
        if ((f0 & ~f1) == 0) next.push_back(f0 | (f1 << half));
    cur = std::move(next);
  }
  return cur;
}

NormalForm table_to_nf(std::uint32_t table, const std::vector<Nat>& ctx) {
  if (table == 0) return NormalForm::zero();
  if (table & 1u) return NormalForm::one();
  std::size_t n = std::size_t{1} << ctx.size();
  std::vector<std::vector<Nat>> cs;
  for (std::size_t m = 0; m < n; ++m) {
    if (!((table >> m) & 1u)) continue;
    bool minimal = true;
    for (std::size_t b = 0; b < ctx.size() && minimal; ++b)
      if (((m >> b) & 1u) && ((table >> (m & ~(std::size_t{1} << b))) & 1u)) minimal = false;
    if (!minimal) continue;
    std::vector<Nat> c;
    for (std::size_t b = 0; b < ctx.size(); ++b)
      if ((m >> b) & 1u) c.push_back(ctx[b]);
    cs.push_back(std::move(c));
  }
  return NormalForm::from_clauses(std::move(cs));
}

std::vector<Nat> context_of(const NormalForm& a, const NormalForm& b) {
  std::set<Nat> g = nf_generators(a);
  for (Nat x : nf_generators(b)) g.insert(x);
  return {g.begin(), g.end()};
}

std::vector<std::pair<NormalForm, NormalForm>> pairs_among(const NormalForm& a, const NormalForm& b,
                                                           const std::vector<NormalForm>& elems) {
  std::vector<NormalForm> between;
  for (const auto& x : elems)
    if (nf_leq(a, x) && nf_leq(x, b)) between.push_back(x);
  std::vector<std::pair<NormalForm, NormalForm>> out;
  for (const auto& x : between)
    for (const auto& y : between)
      if (nf_meet(x, y) == a && nf_join(x, y) == b) out.emplace_back(x, y);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<NormalForm> free_distributive_elements(const std::vector<Nat>& ctx) {
  if (ctx.size() > 5) throw ContextTooLarge("element enumeration limited to 5 generators");
  std::vector<Nat> sorted = canonical_set(ctx);
  std::vector<NormalForm> out;
  for (auto t : monotone_tables(sorted.size())) out.push_back(table_to_nf(t, sorted));
  std::sort(out.begin(), out.end());
  return out;
}

bool meet_irreducible(const NormalForm& x, const std::vector<Nat>& ctx) {
  if (ctx.size() > kMaxBruteForceGenerators)
    throw ContextTooLarge("meet_irreducible brute force is capped at 4 generators");
  std::vector<Nat> c = canonical_set(ctx);
  for (Nat g : nf_generators(x))
    if (!std::binary_search(c.begin(), c.end(), g)) throw ContextTooLarge("generator outside the context");
  if (x.is_zero() || x.is_one()) return false;
  std::vector<NormalForm> above;
  for (auto& y : free_distributive_elements(c))
    if (nf_leq(x, y) && y != x) above.push_back(std::move(y));
  for (std::size_t i = 0; i < above.size(); ++i)
    for (std::size_t j = i; j < above.size(); ++j)
      if (nf_meet(above[i], above[j]) == x) return false;
  return true;
}

std::vector<std::pair<NormalForm, NormalForm>> meet_join_pairs(const NormalForm& a, const NormalForm& b) {
  if (!nf_leq(a, b)) return {};
  return pairs_among(a, b, free_distributive_elements(context_of(a, b)));
}

std::vector<std::pair<NormalForm, NormalForm>> meet_join_pairs_brute(const NormalForm& a, const NormalForm& b,
                                                                     const std::vector<Nat>& ctx) {
  if (!nf_leq(a, b)) return {};
  return pairs_among(a, b, free_distributive_elements(ctx));
}

}  // namespace prelat
