#include <array>
#include <mutex>

#include "prelat/constructions.hpp"

namespace prelat {

namespace {

std::uint32_t row(const PreorderBits& p, std::size_t i) { return (p.bits >> (i * p.n)) & ((1u << p.n) - 1); }

bool transitive(std::uint32_t bits, std::size_t n) {
  std::uint32_t mask = (1u << n) - 1;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t r = bits >> (i * n) & mask;
    for (std::size_t j = 0; j < n; ++j)
      if ((r >> j & 1) && ((bits >> (j * n) & mask) & ~r)) return false;
  }
  return true;
}

std::uint8_t down_closure(const PreorderBits& p, std::uint8_t set) {
  std::uint8_t out = 0;
  for (std::size_t i = 0; i < p.n; ++i)
    for (std::size_t a = 0; a < p.n; ++a)
      if ((set >> a & 1) && p.leq(i, a)) out |= std::uint8_t(1u << i);
  return out;
}

std::uint8_t up_closure(const PreorderBits& p, std::uint8_t set) {
  std::uint8_t out = 0;
  for (std::size_t j = 0; j < p.n; ++j)
    for (std::size_t b = 0; b < p.n; ++b)
      if ((set >> b & 1) && p.leq(b, j)) out |= std::uint8_t(1u << j);
  return out;
}

}  // namespace

std::vector<PreorderBits> all_preorders(std::size_t n) {
  if (n > kMaxTripleSize) throw ContextTooLarge("pre-orders on more than 5 points");
  static std::array<std::vector<PreorderBits>, kMaxTripleSize + 1> cache;
  static std::mutex lock;
  std::lock_guard<std::mutex> guard(lock);
  if (!cache[n].empty()) return cache[n];
  std::uint32_t diag = 0;
  std::vector<std::size_t> off;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j)
        diag |= 1u << (i * n + j);
      else
        off.push_back(i * n + j);
    }
  std::vector<PreorderBits> out;
  for (std::uint32_t subset = 0; subset < (1u << off.size()); ++subset) {
    std::uint32_t bits = diag;
    for (std::size_t k = 0; k < off.size(); ++k)
      if (subset >> k & 1) bits |= 1u << off[k];
    if (transitive(bits, n)) out.push_back({std::uint8_t(n), bits});
  }
  cache[n] = out;
  return out;
}

bool in_T(const TriplePO& t) {
  const auto& p = t.order;
  std::uint32_t all = (1u << p.n) - 1;
  if ((t.X & ~all) || (t.Y & ~all)) return false;
  if (!transitive(p.bits, p.n)) return false;
  for (std::size_t i = 0; i < p.n; ++i)
    if (!p.leq(i, i)) return false;
  for (std::size_t a = 0; a < p.n; ++a)
    for (std::size_t b = 0; b < p.n; ++b)
      if ((t.X >> a & 1) && (t.Y >> b & 1) && !p.leq(a, b)) return false;
  return down_closure(p, t.X) == t.X && up_closure(p, t.Y) == t.Y;
}

bool triple_leq(const TriplePO& a, const TriplePO& b) {
  if (a.order.n != b.order.n) return false;
  return (a.order.bits & ~b.order.bits) == 0 && (a.X & ~b.X) == 0 && (a.Y & ~b.Y) == 0;
}

std::vector<TriplePO> enumerate_T(std::size_t n) {
  std::vector<TriplePO> out;
  std::uint32_t diag = 0;
  for (std::size_t i = 0; i < n; ++i) diag |= 1u << (i * n + i);
  out.push_back({{std::uint8_t(n), diag}, 0, 0});
  for (const auto& p : all_preorders(n)) {
    std::vector<std::uint8_t> downs, ups;
    for (std::uint32_t s = 0; s < (1u << n); ++s) {
      if (down_closure(p, std::uint8_t(s)) == s) downs.push_back(std::uint8_t(s));
      if (up_closure(p, std::uint8_t(s)) == s) ups.push_back(std::uint8_t(s));
    }
    for (auto X : downs)
      for (auto Y : ups) {
        TriplePO t{p, X, Y};
        if (p.bits == diag && X == 0 && Y == 0) continue;
        bool ok = true;
        for (std::size_t a = 0; a < n && ok; ++a)
          if (X >> a & 1) ok = (row(p, a) & Y) == Y;
        if (ok) out.push_back(t);
      }
  }
  return out;
}

TriplePO triple_at(StagedRelation& r, std::size_t m, Nat stage) {
  if (m > kMaxTripleSize) throw ContextTooLarge("triples over more than 5 points");
  TriplePO t;
  t.order.n = std::uint8_t(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j)
      if (i == j || r.holds(i, j, stage)) t.order.bits |= 1u << (i * m + j);
    if (r.holds(i, m, stage)) t.X |= std::uint8_t(1u << i);
    if (r.holds(m, i, stage)) t.Y |= std::uint8_t(1u << i);
  }
  return t;
}

}  // namespace prelat
