#pragma once

#include <array>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "prelat/common.hpp"

namespace prelat {

enum class TermKind : std::uint8_t { Zero, One, Gen, Meet, Join };

// Bounded lattice term as an immutable tree.
class Term {
 public:
  static Term zero();
  static Term one();
  static Term gen(Nat id);
  static Term meet(const Term& a, const Term& b);
  static Term join(const Term& a, const Term& b);

  TermKind kind() const { return kind_; }
  Nat id() const { return id_; }
  const Term& left() const { return *left_; }
  const Term& right() const { return *right_; }
  std::size_t size() const;

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

 private:
  TermKind kind_ = TermKind::Zero;
  Nat id_ = 0;
  std::shared_ptr<const Term> left_, right_;
};

Term parse_term(std::string_view text);
std::string print_term(const Term& t);
std::set<Nat> term_generators(const Term& t);

// Antichain-of-clauses form; each clause is the meet of its sorted ids, the form is their join.
struct NormalForm {
  enum class Kind : std::uint8_t { Zero, One, Clauses };
  Kind kind = Kind::Zero;
  std::vector<std::vector<Nat>> clauses;

  static NormalForm zero() { return {}; }
  static NormalForm one() { return {Kind::One, {}}; }
  static NormalForm gen(Nat id) { return {Kind::Clauses, {{id}}}; }
  static NormalForm from_clauses(std::vector<std::vector<Nat>> cs);

  bool is_zero() const { return kind == Kind::Zero; }
  bool is_one() const { return kind == Kind::One; }
  friend bool operator==(const NormalForm& a, const NormalForm& b) {
    return a.kind == b.kind && a.clauses == b.clauses;
  }
  friend bool operator!=(const NormalForm& a, const NormalForm& b) { return !(a == b); }
  friend bool operator<(const NormalForm& a, const NormalForm& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.clauses < b.clauses;
  }
};

NormalForm nf_meet(const NormalForm& a, const NormalForm& b);
NormalForm nf_join(const NormalForm& a, const NormalForm& b);
NormalForm normalize(const Term& t);
bool nf_leq(const NormalForm& a, const NormalForm& b);
Term nf_to_term(const NormalForm& x);
std::string print_nf(const NormalForm& x);
std::set<Nat> nf_generators(const NormalForm& x);
NormalForm nf_substitute(const NormalForm& x, const std::map<Nat, bool>& sigma);

Term substitute(const Term& t, const std::map<Nat, bool>& sigma);
Term substitute_terms(const Term& t, const std::map<Nat, Term>& sigma);

bool whitman_leq(const Term& s, const Term& t);

struct SemiNF {
  bool top = false;
  std::vector<Nat> gens;
  friend bool operator==(const SemiNF& a, const SemiNF& b) { return a.top == b.top && a.gens == b.gens; }
};
SemiNF semilattice_nf(const Term& t);
bool semilattice_leq(const SemiNF& a, const SemiNF& b);

// Boolean-assignment semantics over a finite generator context.
bool eval_boolean(const Term& t, const std::map<Nat, bool>& assignment);
struct OracleVerdict {
  bool holds = true;
  std::map<Nat, bool> witness;  // assignment with s=1, t=0 when !holds
};
OracleVerdict oracle_leq(const Term& s, const Term& t);

inline constexpr std::size_t kMaxBruteForceGenerators = 4;

// All elements of the free bounded distributive lattice on ctx, constants included.
std::vector<NormalForm> free_distributive_elements(const std::vector<Nat>& ctx);
bool meet_irreducible(const NormalForm& x, const std::vector<Nat>& ctx);
std::vector<std::pair<NormalForm, NormalForm>> meet_join_pairs(const NormalForm& a, const NormalForm& b);
std::vector<std::pair<NormalForm, NormalForm>> meet_join_pairs_brute(const NormalForm& a, const NormalForm& b,
                                                                     const std::vector<Nat>& ctx);

// All terms with at most max_size nodes over the given generators and both constants.
std::vector<Term> enumerate_terms(std::size_t max_size, const std::vector<Nat>& gens);

// Hash-consed term universe; codes are store indices, 0 = zero and 1 = one.
class TermStore {
 public:
  static constexpr Nat kZero = 0;
  static constexpr Nat kOne = 1;

  struct Node {
    TermKind kind;
    Nat a, b;
  };

  TermStore();
  Nat gen(Nat id);
  Nat meet(Nat a, Nat b);
  Nat join(Nat a, Nat b);
  Nat intern(const Term& t);
  Term to_term(Nat code) const;
  bool contains(Nat code) const { return code < nodes_.size(); }
  const Node& node(Nat code) const;
  std::size_t size() const { return nodes_.size(); }
  std::optional<Nat> find_gen(Nat id) const;
  std::optional<Nat> find_meet(Nat a, Nat b) const;
  std::string print(Nat code) const;

 private:
  Nat add(TermKind k, Nat a, Nat b);
  struct Key {
    TermKind k;
    Nat a, b;
    bool operator==(const Key& o) const { return k == o.k && a == o.a && b == o.b; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& x) const {
      return static_cast<std::size_t>(mix64(x.a * 31 + x.b * 1000003 + static_cast<Nat>(x.k)));
    }
  };
  std::vector<Node> nodes_;
  std::unordered_map<Key, Nat, KeyHash> index_;
};

// Scratch DAG used by the order decision engine. Nodes are folded (constants, idempotence,
// commutativity) and carry a random-simulation signature.
inline constexpr std::size_t kSigWords = 8;
using Signature = std::array<Nat, kSigWords>;

class FreeDag {
 public:
  using Id = std::uint32_t;
  static constexpr Id kZero = 0;
  static constexpr Id kOne = 1;
  struct Node {
    TermKind kind;
    Nat gen;
    Id a, b;
    std::uint32_t ngens;  // generators in cone, saturating
  };

  FreeDag();
  Id gen(Nat id);
  Id meet(Id a, Id b);
  Id join(Id a, Id b);
  const Node& node(Id i) const { return nodes_[i]; }
  const Signature& sig(Id i) const { return sigs_[i]; }
  std::size_t size() const { return nodes_.size(); }
  Id from_term(const Term& t);
  Term to_term(Id i) const;
  NormalForm normal_form(Id i);
  std::set<Nat> generators(Id i) const;

 private:
  Id add(TermKind k, Nat g, Id a, Id b);
  std::vector<Node> nodes_;
  std::vector<Signature> sigs_;
  std::unordered_map<Nat, Id> gens_;
  std::unordered_map<Nat, Id> binops_;
  std::unordered_map<Id, NormalForm> nf_cache_;
};

enum class OrderKind : std::uint8_t { Distributive, Free, Semilattice };

struct DecisionStats {
  std::size_t queries = 0, trivial = 0, refuted = 0, normal_form = 0, whitman = 0, sat = 0, cached = 0;
};

// Decides the free order (distributive, free non-distributive, or join-semilattice) on FreeDag
// nodes. Distributive answers always coincide with nf_leq on the normal forms.
class OrderDecider {
 public:
  explicit OrderDecider(OrderKind kind) : kind_(kind) {}
  FreeDag& dag() { return dag_; }
  bool leq(FreeDag::Id s, FreeDag::Id t);
  const DecisionStats& stats() const { return stats_; }
  OrderKind kind() const { return kind_; }

 private:
  bool refuted_by_signature(FreeDag::Id s, FreeDag::Id t) const;
  bool whitman(FreeDag::Id s, FreeDag::Id t);
  bool semilattice(FreeDag::Id s, FreeDag::Id t);
  bool sat_leq(FreeDag::Id s, FreeDag::Id t);

  OrderKind kind_;
  FreeDag dag_;
  std::unordered_map<Nat, bool> cache_;
  std::unordered_map<Nat, bool> whitman_memo_;
  DecisionStats stats_;
};

// Exact monotone-circuit check: is there an assignment with s = 1 and t = 0?
std::optional<std::map<Nat, bool>> separating_assignment(const FreeDag& dag, FreeDag::Id s, FreeDag::Id t);

}  // namespace prelat
