#include <algorithm>

#include "prelat/prelattice.hpp"

namespace prelat {

Nat IntervalLattice::h(Nat t) {
  if (t == 0) return a_;
  if (t == 1) return b_;
  if (!base_->valid(t - 2)) throw MalformedTerm("interval code outside the universe: " + std::to_string(t));
  Nat c = base_->meet(base_->join(a_, t - 2), b_);
  inverse_.emplace(c, t);
  return c;
}

std::optional<Nat> IntervalLattice::h_inv(Nat c) const {
  if (c == a_) return 0;
  if (c == b_) return 1;
  auto it = inverse_.find(c);
  if (it != inverse_.end()) return it->second;
  auto m = base_->as_meet(c);
  if (!m || m->second != b_) return std::nullopt;
  auto j = base_->as_join(m->first);
  if (!j || j->first != a_) return std::nullopt;
  return j->second + 2;
}

std::string IntervalLattice::print(Nat x) const {
  if (x == 0) return base_->print(a_);
  if (x == 1) return base_->print(b_);
  return "clamp(" + base_->print(x - 2) + ")";
}

bool IntervalLattice::holds(Nat x, Nat y, Nat stage) {
  if (stage == 0) return identity_stage(x, y);
  return base_->holds(h(x), h(y), stage);
}

std::shared_ptr<IntervalLattice> interval_restrict(LatticePtr base, Nat a, Nat b, Nat stage) {
  if (!base->holds(a, b, stage))
    throw NotYetComparable("no certificate for " + base->print(a) + " <= " + base->print(b) + " at stage " +
                           std::to_string(stage));
  auto out = std::make_shared<IntervalLattice>(std::move(base), a, b);
  return out;
}

// ---------------------------------------------------------------------------

Nat SumLattice::meet(Nat x, Nat y) {
  auto [x0, x1] = unpair(x);
  auto [y0, y1] = unpair(y);
  return pair(first_->meet(x0, y0), second_->meet(x1, y1));
}

Nat SumLattice::join(Nat x, Nat y) {
  auto [x0, x1] = unpair(x);
  auto [y0, y1] = unpair(y);
  return pair(first_->join(x0, y0), second_->join(x1, y1));
}

bool SumLattice::valid(Nat x) const {
  auto [x0, x1] = unpair(x);
  return first_->valid(x0) && second_->valid(x1);
}

std::string SumLattice::print(Nat x) const {
  auto [x0, x1] = unpair(x);
  return "<" + first_->print(x0) + ", " + second_->print(x1) + ">";
}

bool SumLattice::holds(Nat x, Nat y, Nat stage) {
  if (stage == 0) return identity_stage(x, y);
  auto [x0, x1] = unpair(x);
  auto [y0, y1] = unpair(y);
  return first_->holds(x0, y0, stage) && second_->holds(x1, y1, stage);
}

std::shared_ptr<SumLattice> direct_sum(LatticePtr first, LatticePtr second) {
  return std::make_shared<SumLattice>(std::move(first), std::move(second));
}

// ---------------------------------------------------------------------------

Nat FiniteSupportSum::encode(const std::vector<Nat>& coords) {
  Nat code = 0;
  for (auto it = coords.rbegin(); it != coords.rend(); ++it) code = checked_add(pair(*it, code), 1);
  return code;
}

std::vector<Nat> FiniteSupportSum::decode(Nat code) {
  std::vector<Nat> out;
  while (code != 0) {
    auto [head, tail] = unpair(code - 1);
    out.push_back(head);
    code = tail;
  }
  return out;
}

std::vector<Nat> FiniteSupportSum::padded(Nat code, std::size_t n) const {
  auto v = decode(code);
  if (v.size() < n) v.resize(n, component_->bottom());
  return v;
}

Nat FiniteSupportSum::meet(Nat x, Nat y) {
  std::size_t n = std::max(decode(x).size(), decode(y).size());
  auto a = padded(x, n), b = padded(y, n);
  for (std::size_t i = 0; i < n; ++i) a[i] = component_->meet(a[i], b[i]);
  return encode(a);
}

Nat FiniteSupportSum::join(Nat x, Nat y) {
  std::size_t n = std::max(decode(x).size(), decode(y).size());
  auto a = padded(x, n), b = padded(y, n);
  for (std::size_t i = 0; i < n; ++i) a[i] = component_->join(a[i], b[i]);
  return encode(a);
}

bool FiniteSupportSum::valid(Nat x) const {
  for (Nat c : decode(x))
    if (!component_->valid(c)) return false;
  return true;
}

bool FiniteSupportSum::holds(Nat x, Nat y, Nat stage) {
  if (stage == 0) return identity_stage(x, y);
  std::size_t n = std::max(decode(x).size(), decode(y).size());
  auto a = padded(x, n), b = padded(y, n);
  for (std::size_t i = 0; i < n; ++i)
    if (!component_->holds(a[i], b[i], stage)) return false;
  return true;
}

Nat FiniteSupportSum::bump(Nat x) {
  auto v = decode(x);
  v.push_back(component_->top());
  return encode(v);
}

// ---------------------------------------------------------------------------

LatticePtr opposite(LatticePtr lattice) {
  if (auto op = std::dynamic_pointer_cast<OppositeLattice>(lattice)) return op->inner();
  return std::make_shared<OppositeLattice>(std::move(lattice));
}

Nat FreshBoundsLattice::meet(Nat x, Nat y) {
  if (x == 0 || y == 0) return 0;
  if (x == 1) return y;
  if (y == 1) return x;
  return inner_code(inner_->meet(x - 2, y - 2));
}

Nat FreshBoundsLattice::join(Nat x, Nat y) {
  if (x == 1 || y == 1) return 1;
  if (x == 0) return y;
  if (y == 0) return x;
  return inner_code(inner_->join(x - 2, y - 2));
}

bool FreshBoundsLattice::holds(Nat x, Nat y, Nat stage) {
  if (x == y) return true;
  if (stage == 0) return identity_stage(x, y);
  if (x == 0 || y == 1) return true;
  if (x == 1 || y == 0) return false;
  return inner_->holds(x - 2, y - 2, stage);
}

std::shared_ptr<FreshBoundsLattice> add_fresh_bounds(LatticePtr lattice) {
  return std::make_shared<FreshBoundsLattice>(std::move(lattice));
}

// ---------------------------------------------------------------------------

Nat ReindexedLattice::back(Nat c) const {
  auto r = from_(c);
  if (!r) throw Error("code outside the re-indexed range: " + std::to_string(c));
  return *r;
}

std::shared_ptr<ReindexedLattice> reindex(LatticePtr lattice, std::function<Nat(Nat)> to,
                                          std::function<std::optional<Nat>(Nat)> from) {
  return std::make_shared<ReindexedLattice>(std::move(lattice), std::move(to), std::move(from));
}

}  // namespace prelat
