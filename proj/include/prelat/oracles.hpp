#pragma once

#include <map>
#include <vector>

#include "prelat/lattice.hpp"
#include "prelat/prelattice.hpp"

namespace prelat {

struct CollapsePair {
  Nat gen = 0;
  bool to_one = false;  // (x_gen, 1) when set, (x_gen, 0) otherwise
};

// Pairs a scripted source has produced by `stage`.
std::vector<CollapsePair> collapse_pairs(const ScriptedSource& source, Nat stage);

// Finite quotient of a free bounded lattice by the congruence generated by collapse pairs,
// computed by closing the pairs under the operations (independent of substitution).
class RelationTable {
 public:
  std::size_t size() const { return classes_.size(); }
  bool leq(std::size_t i, std::size_t j) const { return leq_[i][j]; }
  bool leq_terms(const Term& s, const Term& t) const;
  std::size_t class_of(std::size_t i) const { return classes_[i]; }
  std::size_t class_count() const;

 private:
  friend RelationTable oracle_congruence_closure(const std::vector<CollapsePair>&, const std::vector<Nat>&);
  friend RelationTable oracle_semilattice_closure(const std::vector<CollapsePair>&, const std::vector<Nat>&);
  std::size_t index_of(const Term& t) const;
  bool semilattice_ = false;
  std::vector<NormalForm> elements_;
  std::map<NormalForm, std::size_t> index_;
  std::vector<std::vector<Nat>> semi_elements_;  // sorted generator sets; top is the last element
  std::vector<std::size_t> classes_;
  std::vector<std::vector<bool>> leq_;
};

// Over the free bounded distributive lattice on ctx (at most four generators).
RelationTable oracle_congruence_closure(const std::vector<CollapsePair>& pairs, const std::vector<Nat>& ctx);
// Over the free bounded join-semilattice on ctx.
RelationTable oracle_semilattice_closure(const std::vector<CollapsePair>& pairs, const std::vector<Nat>& ctx);
// Free lattice order after substituting the collapsed generators, decided by Whitman's procedure on trees.
bool oracle_whitman_collapsed(const Term& s, const Term& t, const std::vector<CollapsePair>& pairs);

struct NfLeqVerdict {
  bool holds = true;
  std::map<Nat, bool> witness;  // falsifying assignment when !holds
};
NfLeqVerdict oracle_nf_leq(const Term& s, const Term& t);

}  // namespace prelat
