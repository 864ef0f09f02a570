#pragma once

#include <map>
#include <memory>
#include <variant>

#include "prelat/machine.hpp"

namespace prelat {

// Enumerator codes of two c.e. sets; disjointness is checked per inspected stage.
struct DisjointPair {
  Nat left = 0, right = 0;
};

// Code taking pair(u,v) of enumerator indices.
struct ProductiveFn {
  Nat code = 0;
  bool total = false;
};

// Membership of x in W_e by the clock stage (first convergence stamp).
bool member_by(Machine& m, Nat enumerator, Nat x, Nat stage);
// Dovetailed approximation W_{e,s}.
std::vector<Nat> approx(Machine& m, Nat enumerator, Nat stage);
// Are the stage approximations of both sides disjoint on the given elements?
bool disjoint_on(Machine& m, const DisjointPair& p, const std::vector<Nat>& elements, Nat stage);

// Closed-world double: a c.e. set that enumerates exactly its script and nothing else.
// Elements may be appended for future stages only, so approximations stay monotone.
class ScriptedSet {
 public:
  static std::shared_ptr<ScriptedSet> create(Machine& m, std::string label = {});
  Nat code() const { return code_; }
  void add(Nat x, Nat stage);
  bool contains_by(Nat x, Nat stage) const;
  std::optional<Nat> stage_of(Nat x) const;
  const std::map<Nat, Nat>& script() const { return script_; }

 private:
  explicit ScriptedSet(Machine& m) : m_(m) {}
  Machine& m_;
  Nat code_ = 0;
  std::map<Nat, Nat> script_;
};

struct CanonicalEi {
  DisjointPair pair;  // U = {e : phi_e(e) = 0}, V = {e : phi_e(e) = 1}
  ProductiveFn p;     // p(u,v) = e*, answering contrarily to W_u / W_v on itself
};

CanonicalEi canonical_ei_pair(Machine& m);

// Productive output of the canonical function without going through eval.
Nat canonical_witness(Machine& m, const CanonicalEi& ei, Nat u, Nat v);

// Patching construction: q(u,v) runs p(u,v) against p(u1,v1), where
// W_{u1} = A ∪ (W_u once p(u,v) converges), W_{v1} = B ∪ (W_v once p(u,v) converges).
ProductiveFn totalize_productive(Machine& m, const DisjointPair& base, const ProductiveFn& p);

enum class ReductionSchedule : std::uint8_t {
  Dovetail,  // emission stage of x from W_e is max(pair(e,x), steps)
  Clocked,   // emission stage is the convergence stamp
};

// Disjoint u' ⊆ u, v' ⊆ v with the same union; first emitter wins, ties go to u.
std::pair<Nat, Nat> reduction_principle(Machine& m, Nat u, Nat v,
                                        ReductionSchedule schedule = ReductionSchedule::Dovetail);

// Productive function for the target pair of a simultaneous m-reduction f (a total code).
ProductiveFn pullback_productive(Machine& m, Nat f, const ProductiveFn& p);

struct Supersets {
  DisjointPair sup;
};
struct Reduction {
  Nat f;
};
ProductiveFn pair_closure_check(Machine& m, const DisjointPair& base, const ProductiveFn& p,
                                const std::variant<Supersets, Reduction>& how);

}  // namespace prelat
