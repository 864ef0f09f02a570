#include <algorithm>
#include <bit>
#include <numeric>

#include "prelat/constructions.hpp"

namespace prelat {

namespace {

int weight(const TriplePO& t) {
  return std::popcount(t.order.bits) + std::popcount(unsigned(t.X)) + std::popcount(unsigned(t.Y));
}

std::vector<std::size_t> members(std::uint8_t set, std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (set >> i & 1) out.push_back(i);
  return out;
}

}  // namespace

UniversalReduction::UniversalReduction(LatticePtr lattice, Totalizer k, std::shared_ptr<StagedRelation> relation,
                                       ReductionConfig cfg, TraceSink trace)
    : lattice_(std::move(lattice)), k_(std::move(k)), relation_(std::move(relation)), cfg_(cfg),
      trace_(std::move(trace)) {
  if (cfg_.elements > kMaxTripleSize) throw ContextTooLarge("universality construction limited to 5 elements");
  tables_.resize(cfg_.elements);
  current_.assign(cfg_.elements, 0);
  for (std::size_t m = 0; m < cfg_.elements; ++m) build(m);
}

void UniversalReduction::build(std::size_t m) {
  PreLattice& L = *lattice_;
  Machine& mc = L.machine();
  Table& t = tables_[m];
  t.nodes = enumerate_T(m);
  std::size_t n = t.nodes.size();
  for (std::size_t i = 0; i < n; ++i) t.index.emplace(t.nodes[i].key(), i);
  t.x.assign(n, 0);
  t.e.assign(n, 0);
  t.a.assign(n, 0);
  t.b.assign(n, 0);
  std::vector<Nat> fs;
  for (std::size_t j = 0; j < m; ++j) fs.push_back(f(j));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t p, std::size_t q) { return weight(t.nodes[p]) > weight(t.nodes[q]); });
  for (std::size_t i : order) {
    const TriplePO& tau = t.nodes[i];
    std::vector<Nat> lo, hi;
    for (auto j : members(tau.X, m)) lo.push_back(fs[j]);
    for (auto j : members(tau.Y, m)) hi.push_back(fs[j]);
    t.a[i] = L.join_all(lo);
    t.b[i] = L.meet_all(hi);
    std::vector<Nat> S;
    for (std::size_t s = 0; s < n; ++s)
      if (s != i && triple_leq(tau, t.nodes[s])) S.push_back(t.x[s]);
    if (S.empty()) S = fs;
    S.push_back(L.bottom());
    S.push_back(L.top());
    t.e[i] = mc.fresh_deferred("e_tau");
    t.x[i] = bounded_k(L, t.a[i], t.b[i], S, t.e[i], 0, k_);
  }
}

Nat UniversalReduction::f(std::size_t n) {
  if (n >= tables_.size() || tables_[n].x.empty()) throw Error("f(" + std::to_string(n) + ") outside the construction");
  return tables_[n].x[0];
}

std::size_t UniversalReduction::node_of(std::size_t m, const TriplePO& t) const {
  auto it = tables_[m].index.find(t.key());
  if (it == tables_[m].index.end()) throw ClaimViolated("triple outside T_" + std::to_string(m));
  return it->second;
}

Nat UniversalReduction::x_of(std::size_t m, const TriplePO& t) const { return tables_[m].x[node_of(m, t)]; }
Nat UniversalReduction::e_of(std::size_t m, const TriplePO& t) const { return tables_[m].e[node_of(m, t)]; }

void UniversalReduction::define_e(std::size_t m, std::size_t node, Nat value) {
  Machine& mc = lattice_->machine();
  Nat e = tables_[m].e[node];
  mc.define_deferred(e, const_code(value));
  trace_("deferred_defined", stage_, {e, value});
}

bool UniversalReduction::step() {
  if (halted_) return false;
  PreLattice& L = *lattice_;
  Machine& mc = L.machine();
  Nat next = stage_ + 1;
  trace_("stage_begin", next, {mc.now()});
  mc.tick();
  for (std::size_t m = 0; m < tables_.size(); ++m) {
    TriplePO now = triple_at(*relation_, m, next);
    std::size_t old = current_[m];
    if (now == tables_[m].nodes[old]) continue;
    if (!triple_leq(tables_[m].nodes[old], now))
      throw ClaimViolated("approximation of R shrank for element " + std::to_string(m));
    std::size_t fresh = node_of(m, now);
    Nat target = tables_[m].x[fresh];
    stage_ = next;
    define_e(m, old, target);
    current_[m] = fresh;
    ++transitions_;
    trace_("tau_transition", next, {m, tables_[m].nodes[old].key(), now.key()});
    auto reached = wait_for_equiv(L, f(m), target, cfg_.wait_budget);
    if (!reached)
      throw StageBudgetExceeded("f(" + std::to_string(m) + ") not certified equivalent to its new triple within " +
                                std::to_string(cfg_.wait_budget) + " ticks");
    trace_("equivalence_certified", next, {f(m), target}, "machine stage " + std::to_string(*reached));
  }
  stage_ = next;
  for (std::size_t m = 0; m < tables_.size(); ++m) check_claim(m);
  diamond_check();
  return !halted_;
}

void UniversalReduction::run() {
  while (!halted_ && stage_ < cfg_.stages) step();
}

void UniversalReduction::check_claim(std::size_t m) {
  PreLattice& L = *lattice_;
  const Table& t = tables_[m];
  std::size_t cur = current_[m];
  if (!L.equiv_now(f(m), t.x[cur])) throw ClaimViolated("f(" + std::to_string(m) + ") drifted from its triple");
  if (L.machine().is_defined(t.e[cur])) throw ClaimViolated("index of the current triple already defined");
  for (std::size_t i = 0; i <= m; ++i)
    for (std::size_t j = 0; j <= m; ++j)
      if (i != j && relation_->holds(i, j, stage_) && !L.leq_now(f(i), f(j)))
        throw ClaimViolated("order of R not preserved between " + std::to_string(i) + " and " + std::to_string(j));
}

void UniversalReduction::diamond_check() {
  PreLattice& L = *lattice_;
  std::size_t pairs = 0;
  for (std::size_t n = 0; n < tables_.size(); ++n)
    for (std::size_t m = 0; m < tables_.size(); ++m) {
      if (n == m) continue;
      ++pairs;
      if (relation_->holds(n, m, stage_) || !L.leq_now(f(n), f(m))) continue;
      trace_("diamond_fired", stage_, {n, m, f(n), f(m)});
      if (!cfg_.refutation)
        throw DiamondFired("f(" + std::to_string(n) + ") <= f(" + std::to_string(m) + ") before " + std::to_string(n) +
                           " <= " + std::to_string(m) + " at stage " + std::to_string(stage_));
      refute(n, m);
      return;
    }
  trace_("diamond_check", stage_, {pairs});
}

void UniversalReduction::refute(std::size_t n, std::size_t m) {
  PreLattice& L = *lattice_;
  Machine& mc = L.machine();
  DiamondReport rep;
  rep.stage = stage_;
  rep.n = n;
  rep.m = m;
  rep.ones.push_back(n);
  for (auto z : members(tau(n).Y, n)) rep.ones.push_back(z);
  rep.zeros.push_back(m);
  for (auto z : members(tau(m).X, m)) rep.zeros.push_back(z);
  for (auto z : rep.ones) {
    Nat e = tables_[z].e[current_[z]];
    if (mc.is_defined(e)) continue;
    define_e(z, current_[z], L.top());
    trace_("one_action", stage_, {z, e});
  }
  for (auto z : rep.zeros) {
    Nat e = tables_[z].e[current_[z]];
    if (mc.is_defined(e)) continue;
    define_e(z, current_[z], L.bottom());
    trace_("zero_action", stage_, {z, e});
  }
  auto reached = wait_for_leq(L, L.top(), L.bottom(), cfg_.wait_budget);
  if (reached) {
    rep.contradiction = true;
    rep.contradiction_stage = *reached;
    trace_("equivalence_certified", stage_, {L.top(), L.bottom()}, "1 <= 0");
  }
  diamond_ = rep;
  halted_ = true;
}

bool UniversalReduction::matches(Nat r_stage, std::vector<std::pair<std::size_t, std::size_t>>* mismatches) {
  PreLattice& L = *lattice_;
  Machine& mc = L.machine();
  std::size_t n = tables_.size();
  std::vector<char> answers(n * n);
  for (;;) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) answers[i * n + j] = L.leq_now(f(i), f(j));
    if (mc.quiescent()) break;
    settle(mc, cfg_.wait_budget * 64);
  }
  bool ok = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (relation_->holds(i, j, r_stage) == bool(answers[i * n + j])) continue;
      ok = false;
      if (mismatches) mismatches->emplace_back(i, j);
    }
  return ok;
}

std::shared_ptr<UniversalReduction> universal_reduction(LatticePtr lattice, Totalizer k,
                                                        std::shared_ptr<StagedRelation> relation,
                                                        ReductionConfig cfg, TraceSink trace) {
  return std::make_shared<UniversalReduction>(std::move(lattice), std::move(k), std::move(relation), cfg,
                                              std::move(trace));
}

LocalReduction local_universal_reduction(LatticePtr lattice, Nat a, Nat b, std::shared_ptr<StagedRelation> relation,
                                         ReductionConfig cfg, TraceSink trace) {
  if (!lattice->productive()) throw Error("local reduction needs a productive function for the bounds");
  wait_for_leq(*lattice, a, b, cfg.wait_budget);
  LocalReduction out;
  out.interval = interval_restrict(lattice, a, b, lattice->settled());
  Totalizer base = totalizer_from_ei(lattice, *lattice->productive(), trace.sub("k"));
  ProductiveFn q = productive_from_totalizer(lattice, base, a, b);
  ProductiveFn p = interval_productive(lattice, a, b, q, trace.sub("interval"));
  ProductiveFn inner = interval_space_productive(out.interval, p);
  Totalizer k = totalizer_from_ei(out.interval, inner, trace.sub("interval-k"));
  out.inner = universal_reduction(out.interval, k, std::move(relation), cfg, std::move(trace));
  return out;
}

}  // namespace prelat
