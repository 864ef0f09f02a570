#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>

#include "prelat/ce.hpp"
#include "prelat/lattice.hpp"

namespace prelat {

// Monotone stage approximation of a c.e. pre-order; stage 0 is the identity.
class StagedRelation {
 public:
  virtual ~StagedRelation() = default;
  virtual bool holds(Nat x, Nat y, Nat stage) = 0;
  bool equiv(Nat x, Nat y, Nat stage) { return holds(x, y, stage) && holds(y, x, stage); }
};

// Reflexive-transitive closure of scripted certificates {x <= y from stage}.
// Certificates scripted at stage 0 count from stage 1.
class ScriptedPreorder : public StagedRelation {
 public:
  struct Event {
    Nat x = 0, y = 0, stage = 0;
  };
  explicit ScriptedPreorder(std::vector<Event> events = {});
  void add(Event e);
  bool holds(Nat x, Nat y, Nat stage) override;
  const std::vector<Event>& events() const { return events_; }
  // Stages at which the relation changes, ascending.
  std::vector<Nat> change_stages() const;

 private:
  const std::map<Nat, std::set<Nat>>& closure(Nat stage);
  std::vector<Event> events_;  // sorted by stage
  std::map<std::size_t, std::map<Nat, std::set<Nat>>> closures_;  // keyed by events included
};

// ---------------------------------------------------------------------------
// Sources of the collapse pairs {(x_i,0): i in U} ∪ {(x_i,1): i in V}.

struct GenStatus {
  bool left = false;   // i in U by the stage
  bool right = false;  // i in V by the stage
  Nat next = kNever;   // later stage at which the answer changes, when announced
};

class PairSource {
 public:
  explicit PairSource(Machine& m) : m_(m) {}
  virtual ~PairSource() = default;
  Machine& machine() { return m_; }
  // Registers the evaluating machine entry for re-evaluation when the answer changes.
  virtual GenStatus status(Nat g, Nat stage) = 0;
  // Changes whenever earlier answers may have changed other than at announced stages.
  virtual Nat version() const = 0;
  // Re-evaluate the current machine entry on any version change.
  virtual void watch_all() = 0;
  // Is some generator on both sides by `stage`?
  virtual bool conflict(Nat stage) = 0;
  virtual std::optional<DisjointPair> pair() const { return std::nullopt; }
  virtual std::optional<ProductiveFn> productive() const { return std::nullopt; }

 protected:
  Machine& m_;
};

// U = {i : phi_i(i) = 0}, V = {i : phi_i(i) = 1}.
class CanonicalSource : public PairSource {
 public:
  CanonicalSource(Machine& m, CanonicalEi ei) : PairSource(m), ei_(ei) {}
  GenStatus status(Nat g, Nat stage) override;
  Nat version() const override { return m_.collapse_epoch(); }
  void watch_all() override { m_.watch_collapses(); }
  bool conflict(Nat) override { return false; }
  std::optional<DisjointPair> pair() const override { return ei_.pair; }
  std::optional<ProductiveFn> productive() const override { return ei_.p; }
  const CanonicalEi& ei() const { return ei_; }

 private:
  CanonicalEi ei_;
};

// Closed-world double: exactly the scripted generators, at their scripted stages.
class ScriptedSource : public PairSource {
 public:
  explicit ScriptedSource(Machine& m) : PairSource(m) {}
  void add_left(Nat g, Nat stage) { add(left_, g, stage); }
  void add_right(Nat g, Nat stage) { add(right_, g, stage); }
  GenStatus status(Nat g, Nat stage) override;
  Nat version() const override { return version_; }
  void watch_all() override;
  bool conflict(Nat stage) override;
  const std::map<Nat, Nat>& left() const { return left_; }
  const std::map<Nat, Nat>& right() const { return right_; }

 private:
  void add(std::map<Nat, Nat>& side, Nat g, Nat stage);
  std::map<Nat, Nat> left_, right_;
  Nat version_ = 0;
  std::set<std::uint32_t> watchers_;
};

// Canonical pair plus rogue scripted collapses; the result need not be disjoint or e.i.
class BrokenSource : public PairSource {
 public:
  BrokenSource(Machine& m, CanonicalEi ei) : PairSource(m), canonical_(m, ei), rogue_(m) {}
  ScriptedSource& rogue() { return rogue_; }
  GenStatus status(Nat g, Nat stage) override;
  Nat version() const override { return canonical_.version() + rogue_.version(); }
  void watch_all() override {
    canonical_.watch_all();
    rogue_.watch_all();
  }
  bool conflict(Nat stage) override;
  std::optional<DisjointPair> pair() const override { return canonical_.pair(); }
  std::optional<ProductiveFn> productive() const override { return canonical_.productive(); }

 private:
  CanonicalSource canonical_;
  ScriptedSource rogue_;
};

// ---------------------------------------------------------------------------

// Code-level pre-lattice: computable meet/join, staged order, bounds.
class PreLattice : public StagedRelation {
 public:
  virtual Nat meet(Nat x, Nat y) = 0;
  virtual Nat join(Nat x, Nat y) = 0;
  virtual Nat bottom() const = 0;
  virtual Nat top() const = 0;
  virtual bool bounded() const { return true; }
  // Is x an element of the universe built so far?
  virtual bool valid(Nat x) const = 0;
  virtual Machine& machine() = 0;
  virtual std::string print(Nat x) const { return std::to_string(x); }
  // Structural decompositions, when the code was produced by meet/join.
  virtual std::optional<std::pair<Nat, Nat>> as_meet(Nat) const { return std::nullopt; }
  virtual std::optional<std::pair<Nat, Nat>> as_join(Nat) const { return std::nullopt; }

  // Total productive function for ([bottom],[top]), taking pair(u,v) of enumerators of codes.
  const std::optional<ProductiveFn>& productive() const { return productive_; }
  void attach_productive(ProductiveFn p) { productive_ = p; }

  Nat settled() { return machine().settled_stage(); }
  bool leq_now(Nat x, Nat y) { return holds(x, y, settled()); }
  bool equiv_now(Nat x, Nat y) { return equiv(x, y, settled()); }
  Nat meet_all(const std::vector<Nat>& xs);  // top for the empty set
  Nat join_all(const std::vector<Nat>& xs);  // bottom for the empty set

 protected:
  // The stage-0 identity; an observing machine entry is re-run once stage 1 is settled.
  bool identity_stage(Nat x, Nat y);

 private:
  std::optional<ProductiveFn> productive_;
};

using LatticePtr = std::shared_ptr<PreLattice>;

// Quotient of a free bounded (distributive / non-distributive / join-semi-) lattice on
// generators x_i, i in ω, by the collapse pairs of a source. Universe: TermStore codes.
class TermLattice : public PreLattice {
 public:
  TermLattice(Machine& m, std::shared_ptr<PairSource> source, OrderKind kind,
              std::shared_ptr<TermStore> store = nullptr);

  Nat meet(Nat x, Nat y) override;
  Nat join(Nat x, Nat y) override { return store_->join(x, y); }
  Nat bottom() const override { return TermStore::kZero; }
  Nat top() const override { return TermStore::kOne; }
  bool valid(Nat x) const override { return store_->contains(x); }
  Machine& machine() override { return m_; }
  std::string print(Nat x) const override { return store_->print(x); }
  std::optional<std::pair<Nat, Nat>> as_meet(Nat c) const override;
  std::optional<std::pair<Nat, Nat>> as_join(Nat c) const override;
  bool holds(Nat x, Nat y, Nat stage) override;

  Nat gen(Nat i) { return store_->gen(i); }
  // Generator over a never-defined deferred index: free under the canonical source.
  Nat fresh_generator();
  TermStore& store() { return *store_; }
  std::shared_ptr<TermStore> store_ptr() { return store_; }
  PairSource& source() { return *source_; }
  std::shared_ptr<PairSource> source_ptr() { return source_; }
  OrderKind kind() const { return kind_; }
  // The term with collapsed generators replaced by constants.
  Term substituted(Nat x, Nat stage);
  const DecisionStats& decision_stats() const { return decider_.stats(); }

 private:
  struct Cone {
    bool computed = false, big = false, has_meet = false;
    std::vector<Nat> gens;
  };
  static constexpr std::size_t kSmallCone = 8;
  const Cone& cone(Nat code);
  FreeDag::Id subst(Nat code, Nat stage, std::vector<FreeDag::Id>& memo, bool track);
  void refresh(Nat stage);
  void register_dependencies(Nat x, Nat y, Nat stage);

  Machine& m_;
  std::shared_ptr<PairSource> source_;
  OrderKind kind_;
  std::shared_ptr<TermStore> store_;
  OrderDecider decider_;
  std::vector<Cone> cones_;
  std::vector<FreeDag::Id> memo_;
  Nat memo_version_ = kNever, memo_stage_ = 0, memo_until_ = kNever;
  std::vector<FreeDag::Id> historic_memo_;
  Nat historic_version_ = kNever, historic_stage_ = kNever;
};

std::shared_ptr<TermLattice> build_Ld01(Machine& m, std::shared_ptr<PairSource> source);
std::shared_ptr<TermLattice> build_Lnd01(Machine& m, std::shared_ptr<PairSource> source);
// Bounded join-semilattice; meets are MalformedTerm.
std::shared_ptr<TermLattice> build_Usemi01(Machine& m, std::shared_ptr<PairSource> source);

// Productive function for ([0]_L,[1]_L): the source's function pulled back along i -> x_i.
ProductiveFn ei_witness(TermLattice& lattice);

// [a,b]_L re-indexed by h(0)=a, h(1)=b, h(t+2)=(a ∨ t) ∧ b.
class IntervalLattice : public PreLattice {
 public:
  IntervalLattice(LatticePtr base, Nat a, Nat b) : base_(std::move(base)), a_(a), b_(b) {}
  Nat meet(Nat x, Nat y) override { return clamp_code(base_->meet(h(x), h(y))); }
  Nat join(Nat x, Nat y) override { return clamp_code(base_->join(h(x), h(y))); }
  Nat bottom() const override { return 0; }
  Nat top() const override { return 1; }
  bool valid(Nat x) const override { return x < 2 || base_->valid(x - 2); }
  Machine& machine() override { return base_->machine(); }
  std::string print(Nat x) const override;
  bool holds(Nat x, Nat y, Nat stage) override;

  Nat h(Nat t);
  std::optional<Nat> h_inv(Nat c) const;
  // Interval code of (a ∨ c) ∧ b.
  Nat clamp_code(Nat c) { return c + 2; }
  Nat lower() const { return a_; }
  Nat upper() const { return b_; }
  PreLattice& base() { return *base_; }
  LatticePtr base_ptr() { return base_; }

 private:
  LatticePtr base_;
  Nat a_, b_;
  std::map<Nat, Nat> inverse_;
};

// Throws NotYetComparable unless a <= b is certified at `stage`.
std::shared_ptr<IntervalLattice> interval_restrict(LatticePtr base, Nat a, Nat b, Nat stage);

// Componentwise order and operations on Cantor pairs.
class SumLattice : public PreLattice {
 public:
  SumLattice(LatticePtr first, LatticePtr second) : first_(std::move(first)), second_(std::move(second)) {}
  Nat meet(Nat x, Nat y) override;
  Nat join(Nat x, Nat y) override;
  Nat bottom() const override { return pair(first_->bottom(), second_->bottom()); }
  Nat top() const override { return pair(first_->top(), second_->top()); }
  bool bounded() const override { return first_->bounded() && second_->bounded(); }
  bool valid(Nat x) const override;
  Machine& machine() override { return first_->machine(); }
  std::string print(Nat x) const override;
  bool holds(Nat x, Nat y, Nat stage) override;
  PreLattice& first() { return *first_; }
  PreLattice& second() { return *second_; }
  LatticePtr first_ptr() { return first_; }
  LatticePtr second_ptr() { return second_; }

 private:
  LatticePtr first_, second_;
};

std::shared_ptr<SumLattice> direct_sum(LatticePtr first, LatticePtr second);

// Finitely supported ω-fold sum of one pre-lattice. Codes are lists: 0 = empty,
// pair(head, tail) + 1 otherwise; missing coordinates read as the component bottom.
class FiniteSupportSum : public PreLattice {
 public:
  explicit FiniteSupportSum(LatticePtr component) : component_(std::move(component)) {}
  Nat meet(Nat x, Nat y) override;
  Nat join(Nat x, Nat y) override;
  Nat bottom() const override { return 0; }
  Nat top() const override { throw Error("finitely supported sum has no top"); }
  bool bounded() const override { return false; }
  bool valid(Nat x) const override;
  Machine& machine() override { return component_->machine(); }
  bool holds(Nat x, Nat y, Nat stage) override;
  static Nat encode(const std::vector<Nat>& coords);
  static std::vector<Nat> decode(Nat code);
  // A strictly larger element: x with the next coordinate raised to the component top.
  Nat bump(Nat x);

 private:
  std::vector<Nat> padded(Nat code, std::size_t n) const;
  LatticePtr component_;
};

class OppositeLattice : public PreLattice {
 public:
  explicit OppositeLattice(LatticePtr inner) : inner_(std::move(inner)) {}
  Nat meet(Nat x, Nat y) override { return inner_->join(x, y); }
  Nat join(Nat x, Nat y) override { return inner_->meet(x, y); }
  Nat bottom() const override { return inner_->top(); }
  Nat top() const override { return inner_->bottom(); }
  bool bounded() const override { return inner_->bounded(); }
  bool valid(Nat x) const override { return inner_->valid(x); }
  Machine& machine() override { return inner_->machine(); }
  std::string print(Nat x) const override { return inner_->print(x); }
  bool holds(Nat x, Nat y, Nat stage) override { return inner_->holds(y, x, stage); }
  LatticePtr inner() { return inner_; }

 private:
  LatticePtr inner_;
};

// The opposite of an opposite is the original object.
LatticePtr opposite(LatticePtr lattice);

// New 0 below and new 1 above everything; inner code x becomes x + 2.
class FreshBoundsLattice : public PreLattice {
 public:
  explicit FreshBoundsLattice(LatticePtr inner) : inner_(std::move(inner)) {}
  Nat meet(Nat x, Nat y) override;
  Nat join(Nat x, Nat y) override;
  Nat bottom() const override { return 0; }
  Nat top() const override { return 1; }
  bool valid(Nat x) const override { return x < 2 || inner_->valid(x - 2); }
  Machine& machine() override { return inner_->machine(); }
  bool holds(Nat x, Nat y, Nat stage) override;
  static Nat inner_code(Nat x) { return x + 2; }

 private:
  LatticePtr inner_;
};

std::shared_ptr<FreshBoundsLattice> add_fresh_bounds(LatticePtr lattice);

// Pull-back along a surjection `to` onto the universe with right inverse `from`.
class ReindexedLattice : public PreLattice {
 public:
  ReindexedLattice(LatticePtr inner, std::function<Nat(Nat)> to, std::function<std::optional<Nat>(Nat)> from)
      : inner_(std::move(inner)), to_(std::move(to)), from_(std::move(from)) {}
  Nat meet(Nat x, Nat y) override { return back(inner_->meet(to_(x), to_(y))); }
  Nat join(Nat x, Nat y) override { return back(inner_->join(to_(x), to_(y))); }
  Nat bottom() const override { return back(inner_->bottom()); }
  Nat top() const override { return back(inner_->top()); }
  bool bounded() const override { return inner_->bounded(); }
  bool valid(Nat x) const override { return inner_->valid(to_(x)); }
  Machine& machine() override { return inner_->machine(); }
  bool holds(Nat x, Nat y, Nat stage) override { return inner_->holds(to_(x), to_(y), stage); }
  Nat to(Nat x) const { return to_(x); }

 private:
  Nat back(Nat c) const;
  LatticePtr inner_;
  std::function<Nat(Nat)> to_;
  std::function<std::optional<Nat>(Nat)> from_;
};

std::shared_ptr<ReindexedLattice> reindex(LatticePtr lattice, std::function<Nat(Nat)> to,
                                          std::function<std::optional<Nat>(Nat)> from);

}  // namespace prelat
