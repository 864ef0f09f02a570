#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "prelat/prelattice.hpp"

namespace prelat {

// ---------------------------------------------------------------------------
// Trace events, serialized as JSON lines.

struct TraceEvent {
  std::string kind;
  Nat stage = 0;
  std::vector<Nat> codes;
  std::string construction;
  std::string note;
  friend bool operator==(const TraceEvent& a, const TraceEvent& b) {
    return a.kind == b.kind && a.stage == b.stage && a.codes == b.codes && a.construction == b.construction &&
           a.note == b.note;
  }
};

bool valid_event_kind(const std::string& kind);

class Trace {
 public:
  void emit(TraceEvent e);
  const std::vector<TraceEvent>& events() const { return events_; }
  std::size_t count(const std::string& kind) const;
  std::vector<TraceEvent> of_kind(const std::string& kind) const;
  std::string jsonl() const;
  static std::string to_json(const TraceEvent& e);
  // Throws ScenarioParse on malformed lines or unknown event kinds.
  static std::vector<TraceEvent> parse_jsonl(const std::string& text);

 private:
  std::vector<TraceEvent> events_;
};

// A trace plus the id of the construction writing to it; a null trace drops events.
struct TraceSink {
  std::shared_ptr<Trace> trace;
  std::string id;
  void operator()(const std::string& kind, Nat stage, std::vector<Nat> codes, std::string note = {}) const {
    if (trace) trace->emit({kind, stage, std::move(codes), id, std::move(note)});
  }
  TraceSink sub(const std::string& suffix) const { return {trace, id.empty() ? suffix : id + "/" + suffix}; }
};

// Tick until x ≡ y is certified at the settled stage; the stage reached, or nullopt past the budget.
std::optional<Nat> wait_for_equiv(PreLattice& lattice, Nat x, Nat y, Nat budget);
std::optional<Nat> wait_for_leq(PreLattice& lattice, Nat x, Nat y, Nat budget);
// Tick until no machine work is left (closed world); throws StageBudgetExceeded past the budget.
Nat settle(Machine& m, Nat budget);
// Closed-world answer: query, settle the work the query created, repeat until the query adds none.
bool closed_world_leq(PreLattice& lattice, Nat x, Nat y, Nat budget = 100000);
bool closed_world_equiv(PreLattice& lattice, Nat x, Nat y, Nat budget = 100000);

// ---------------------------------------------------------------------------
// Totalizers.

// One evaluation of k(D,e,x) with its controlled enumerators.
struct TotalizerCall {
  std::vector<Nat> D;
  Nat e = 0, x = 0;
  Nat trigger = 0;             // dynamic code; converges on 0 to the index of d0 in D
  std::vector<Nat> u, v, c;    // per d in D
  Nat result = 0;
};

struct TotalizerLog {
  std::map<std::tuple<std::vector<Nat>, Nat, Nat>, TotalizerCall> calls;
  const TotalizerCall* find(const std::vector<Nat>& D, Nat e, Nat x) const;
  const TotalizerCall* by_result(Nat code) const;
};

// k(D,e,x): if phi_e(x) ≡_L d for some d in D then k(D,e,x) ≡_L phi_e(x). D is a canonical set.
struct Totalizer {
  std::function<Nat(const std::vector<Nat>& D, Nat e, Nat x)> fn;
  std::shared_ptr<TotalizerLog> log;
  Nat operator()(const std::vector<Nat>& D, Nat e, Nat x) const { return fn(canonical_set(D), e, x); }
};

// k(D,e,x) = ⋁_{d in D} d ∧ p(u_d, v_d), with u_d, v_d forced once phi_e(x) is seen ≡ d0.
Totalizer totalizer_from_ei(LatticePtr lattice, ProductiveFn p, TraceSink trace = {});

// (j(D,e,x) ∧ b) ∨ a.
Nat bounded_k(PreLattice& lattice, Nat a, Nat b, const std::vector<Nat>& D, Nat e, Nat x, const Totalizer& j);

// Productive function for ([a]_L, [b]_L) read off a totalizer: the output z = k({a,b}, e, 0)
// where phi_e(0) answers b once z shows up in W_u and a once it shows up in W_v.
ProductiveFn productive_from_totalizer(LatticePtr lattice, Totalizer k, Nat a, Nat b);

// chi(a,b,u,v) as one code on pair(pair(a,b), pair(u,v)).
struct UniformProductive {
  Nat code = 0;
};
UniformProductive uniform_from_totalizer(LatticePtr lattice, Totalizer k);

// Productive function for ([a]_L,[b]_L) whose output j = (a ∨ q(u',v')) ∧ b lies in [a,b].
ProductiveFn interval_productive(LatticePtr lattice, Nat a, Nat b, ProductiveFn q, TraceSink trace = {});

// Productive function for ([0],[1]) of the interval, from one for ([a],[b]) landing in [a,b].
ProductiveFn interval_space_productive(std::shared_ptr<IntervalLattice> interval, ProductiveFn p);

// Totalizer through the intervals [⋀D, ⋁D] and the uniform productive function.
Totalizer ufp_from_uei(LatticePtr lattice, UniformProductive chi, TraceSink trace = {});

// Totalizer for a direct sum from totalizers of the components.
Totalizer sum_totalizer(std::shared_ptr<SumLattice> sum, Totalizer first, Totalizer second);

// ---------------------------------------------------------------------------
// Pre-orders on {0..n-1} and the triples of T_n.

inline constexpr std::size_t kMaxTripleSize = 5;

// Bit i*n+j set when i <= j.
struct PreorderBits {
  std::uint8_t n = 0;
  std::uint32_t bits = 0;
  bool leq(std::size_t i, std::size_t j) const { return bits >> (i * n + j) & 1; }
  friend bool operator==(const PreorderBits& a, const PreorderBits& b) { return a.n == b.n && a.bits == b.bits; }
};

// All reflexive transitive relations on {0..n-1}, n <= 5. Counts 1, 1, 4, 29, 355, 6942.
std::vector<PreorderBits> all_preorders(std::size_t n);

struct TriplePO {
  PreorderBits order;
  std::uint8_t X = 0, Y = 0;  // bit sets
  friend bool operator==(const TriplePO& a, const TriplePO& b) {
    return a.order == b.order && a.X == b.X && a.Y == b.Y;
  }
  Nat key() const { return (Nat{order.bits} << 16) | (Nat{X} << 8) | Y; }
};

bool in_T(const TriplePO& t);
// a ⪯ b: the order, X and Y all grow.
bool triple_leq(const TriplePO& a, const TriplePO& b);
// T_n for n <= 5; sizes 1, 4, 29, 355, 6942, 209527 (the pre-orders on n+1 points). Root first.
std::vector<TriplePO> enumerate_T(std::size_t n);
// tau(m,s) read from a staged relation.
TriplePO triple_at(StagedRelation& r, std::size_t m, Nat stage);

// ---------------------------------------------------------------------------
// Universality.

struct ReductionConfig {
  std::size_t elements = 2;  // f(0..elements-1) take part in the construction
  Nat stages = 8;            // construction stages
  Nat wait_budget = 512;     // ticks allowed for a speedup wait
  bool refutation = false;   // on ◇, run One/Zero and stop instead of throwing
};

struct DiamondReport {
  Nat stage = 0;
  std::size_t n = 0, m = 0;
  std::vector<std::size_t> ones, zeros;
  bool contradiction = false;  // 1 <= 0 certified
  Nat contradiction_stage = 0;
};

class UniversalReduction {
 public:
  UniversalReduction(LatticePtr lattice, Totalizer k, std::shared_ptr<StagedRelation> relation,
                     ReductionConfig cfg, TraceSink trace = {});

  // f(n) = x_λ(n); codes never change.
  Nat f(std::size_t n);
  // One construction stage; false once halted.
  bool step();
  // Stages up to cfg.stages (or until halted).
  void run();
  Nat stage() const { return stage_; }
  bool halted() const { return halted_; }
  const std::optional<DiamondReport>& diamond() const { return diamond_; }
  const TriplePO& tau(std::size_t m) const { return tables_[m].nodes[current_[m]]; }
  Nat x_of(std::size_t m, const TriplePO& t) const;
  Nat e_of(std::size_t m, const TriplePO& t) const;
  std::size_t transitions() const { return transitions_; }
  std::size_t table_size(std::size_t m) const { return tables_[m].nodes.size(); }
  // Does f(x) <= f(y) match x <= y for all x,y < elements under the closed-world oracle, at the given R stage?
  bool matches(Nat r_stage, std::vector<std::pair<std::size_t, std::size_t>>* mismatches = nullptr);
  PreLattice& lattice() { return *lattice_; }
  const ReductionConfig& config() const { return cfg_; }

 private:
  struct Table {
    std::vector<TriplePO> nodes;
    std::map<Nat, std::size_t> index;
    std::vector<Nat> x, e, a, b;
  };
  void build(std::size_t m);
  std::size_t node_of(std::size_t m, const TriplePO& t) const;
  void check_claim(std::size_t m);
  void diamond_check();
  void refute(std::size_t n, std::size_t m);
  void define_e(std::size_t m, std::size_t node, Nat value);

  LatticePtr lattice_;
  Totalizer k_;
  std::shared_ptr<StagedRelation> relation_;
  ReductionConfig cfg_;
  TraceSink trace_;
  std::vector<Table> tables_;
  std::vector<std::size_t> current_;
  Nat stage_ = 0;
  bool halted_ = false;
  std::size_t transitions_ = 0;
  std::optional<DiamondReport> diamond_;
};

std::shared_ptr<UniversalReduction> universal_reduction(LatticePtr lattice, Totalizer k,
                                                        std::shared_ptr<StagedRelation> relation,
                                                        ReductionConfig cfg, TraceSink trace = {});

// Reduction into [a,b] of the base lattice; images are h(f(n)).
struct LocalReduction {
  std::shared_ptr<IntervalLattice> interval;
  std::shared_ptr<UniversalReduction> inner;
  Nat image(std::size_t n) { return interval->h(inner->f(n)); }
};

LocalReduction local_universal_reduction(LatticePtr lattice, Nat a, Nat b, std::shared_ptr<StagedRelation> relation,
                                         ReductionConfig cfg, TraceSink trace = {});

// ---------------------------------------------------------------------------
// Uniform density.

class UniformDensity {
 public:
  UniformDensity(LatticePtr lattice, Totalizer k, TraceSink trace = {}, Nat wait_budget = 512);
  // (a ∨ j(a,b)) ∧ b.
  Nat f(Nat a, Nat b);
  // k(D_{a,b}, e_{a,b}, 0) with D_{a,b} = {a, b} ∪ {j(a',b') : <a',b'> < <a,b>}.
  Nat j(Nat a, Nat b);
  // One construction stage followed by a machine tick.
  void step();
  void run(Nat stages);
  Nat stage() const { return stage_; }
  std::size_t merges() const { return merges_; }
  std::size_t forcings() const { return forcings_; }

 private:
  Nat j_at(Nat n);
  void define_e(Nat n, Nat value);
  LatticePtr lattice_;
  Totalizer k_;
  TraceSink trace_;
  std::vector<std::optional<Nat>> j_;  // by pair index; nullopt for pairs outside the universe
  std::vector<Nat> e_;
  std::vector<bool> defined_;
  std::vector<Nat> d_members_;  // j values so far, in pair order
  Nat stage_ = 0;
  Nat wait_budget_;
  std::size_t merges_ = 0, forcings_ = 0;
};

// ---------------------------------------------------------------------------
// Incomparable elements.

// Productive p for ([u],[v]); X an enumerator of codes, members searched below universe_bound.
// Pre-order variant returns p(u',v'); the lattice variant returns (u ∨ p(u',v')) ∧ v.
Nat incomparable_in_interval(StagedRelation& relation, Nat u, Nat v, Nat X, const ProductiveFn& p, Machine& m,
                             Nat universe_bound);
Nat incomparable_in_interval(PreLattice& lattice, Nat u, Nat v, Nat X, const ProductiveFn& p, Nat universe_bound);

// ---------------------------------------------------------------------------
// Semilattice descending chains.

struct ChainReport {
  std::size_t elements = 0, violations = 0;
  std::map<std::size_t, std::size_t> longest;  // generator count -> longest strict chain found
  std::size_t bound(std::size_t g) const { return g + 2; }
  bool ok() const { return violations == 0; }
};

// Every strictly descending chain from a non-top element with g free generators has length <= g+2.
ChainReport semilattice_nonuniversality_check(TermLattice& semilattice, const std::vector<Nat>& generators, Nat stage);

// ---------------------------------------------------------------------------
// The diagonal lattice L1.

struct DiagonalCertificate {
  std::size_t candidate = 0;
  Nat z1 = 0, target = 0;
  NormalForm z1_class, target_class;
  bool z1_irreducible = false, target_irreducible = false, target_bound = false;
  std::optional<Nat> acted_at;
  bool mismatch() const { return target_bound || z1_irreducible != target_irreducible; }
};

// Generator x_i of F(X) is store.gen(i); Y, Z1, Z2 are the ids ≡ 0, 1, 2 mod 3.
class DiagonalLattice : public PreLattice {
 public:
  DiagonalLattice(std::shared_ptr<TermLattice> l2, std::vector<Nat> candidates, TraceSink trace = {});
  Nat meet(Nat x, Nat y) override { return store_->meet(x, y); }
  Nat join(Nat x, Nat y) override { return store_->join(x, y); }
  Nat bottom() const override { return TermStore::kZero; }
  Nat top() const override { return TermStore::kOne; }
  bool valid(Nat x) const override { return store_->contains(x); }
  Machine& machine() override { return l2_->machine(); }
  std::string print(Nat x) const override { return store_->print(x); }
  bool holds(Nat x, Nat y, Nat stage) override;

  static Nat y_id(Nat i) { return 3 * i; }
  static Nat z1_id(Nat i) { return 3 * i + 1; }
  static Nat z2_id(Nat k) { return 3 * k + 2; }
  Nat z1(Nat i) { return store_->gen(z1_id(i)); }

  // Stage s+1 of the construction; advances the machine to s+1.
  void step();
  void run(Nat stages);
  Nat stage() const { return stage_; }
  Term substituted(Nat x, Nat stage);
  TermLattice& l2() { return *l2_; }
  // Mismatch certificates for every candidate converging within the budget by the current stage.
  std::vector<DiagonalCertificate> verify(Nat fuel);
  const std::map<std::size_t, std::pair<Nat, Nat>>& actions() const { return z2_pairs_; }

 private:
  std::optional<Nat> target(std::size_t i, Nat fuel);
  bool in_F(Nat code, Nat s);
  NormalForm class_in_l2(Nat code, Nat stage);

  std::shared_ptr<TermLattice> l2_;
  std::shared_ptr<TermStore> store_;
  std::vector<Nat> candidates_;
  TraceSink trace_;
  Nat stage_ = 0;
  Nat next_z2_ = 0;
  std::map<std::size_t, std::pair<Nat, Nat>> z2_pairs_;  // candidate -> (k1, k2)
  std::map<std::size_t, Nat> acted_;                     // candidate -> stage
  OrderDecider decider_{OrderKind::Distributive};
};

std::shared_ptr<DiagonalLattice> build_L1_diagonal(std::shared_ptr<TermLattice> l2, std::vector<Nat> candidates,
                                                   TraceSink trace = {});

}  // namespace prelat
