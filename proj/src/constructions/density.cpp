#include <map>

#include "prelat/constructions.hpp"

namespace prelat {

UniformDensity::UniformDensity(LatticePtr lattice, Totalizer k, TraceSink trace, Nat wait_budget)
    : lattice_(std::move(lattice)), k_(std::move(k)), trace_(std::move(trace)), wait_budget_(wait_budget) {}

Nat UniformDensity::j_at(Nat n) {
  PreLattice& L = *lattice_;
  Machine& m = L.machine();
  while (j_.size() <= n) {
    Nat i = j_.size();
    auto [a, b] = unpair(i);
    if (!L.valid(a) || !L.valid(b)) {
      j_.push_back(std::nullopt);
      e_.push_back(kNever);
      defined_.push_back(true);
      continue;
    }
    std::vector<Nat> D = d_members_;
    D.push_back(a);
    D.push_back(b);
    Nat e = m.fresh_deferred("e_ab");
    Nat value = k_(D, e, 0);
    j_.push_back(value);
    e_.push_back(e);
    defined_.push_back(false);
    d_members_.push_back(value);
  }
  if (!j_[n]) throw MalformedTerm("pair index " + std::to_string(n) + " outside the universe");
  return *j_[n];
}

Nat UniformDensity::j(Nat a, Nat b) { return j_at(pair(a, b)); }

Nat UniformDensity::f(Nat a, Nat b) {
  PreLattice& L = *lattice_;
  return L.meet(L.join(a, j(a, b)), b);
}

void UniformDensity::define_e(Nat n, Nat value) {
  lattice_->machine().define_deferred(e_[n], const_code(value));
  defined_[n] = true;
  trace_("deferred_defined", stage_, {e_[n], value});
  auto reached = wait_for_equiv(*lattice_, *j_[n], value, wait_budget_);
  if (!reached)
    throw StageBudgetExceeded("j for pair " + std::to_string(n) + " not certified within " +
                              std::to_string(wait_budget_) + " ticks");
  trace_("equivalence_certified", stage_, {*j_[n], value}, "machine stage " + std::to_string(*reached));
}

void UniformDensity::step() {
  PreLattice& L = *lattice_;
  Machine& m = L.machine();
  Nat s = stage_;
  stage_ = s + 1;
  trace_("stage_begin", stage_, {m.now()});
  // pairs with index <= s whose components are in the universe
  std::vector<Nat> live;
  for (Nat i = 0; i <= s; ++i) {
    auto [a, b] = unpair(i);
    if (!L.valid(a) || !L.valid(b)) continue;
    j_at(i);
    live.push_back(i);
  }
  std::vector<Nat> reps;
  std::map<Nat, std::size_t> cls;
  auto class_of = [&](Nat c) {
    auto it = cls.find(c);
    if (it != cls.end()) return it->second;
    std::size_t id = reps.size();
    for (std::size_t r = 0; r < reps.size(); ++r)
      if (L.equiv_now(c, reps[r])) {
        id = r;
        break;
      }
    if (id == reps.size()) reps.push_back(c);
    cls.emplace(c, id);
    return id;
  };
  std::map<std::pair<std::size_t, std::size_t>, Nat> least;
  for (Nat i : live) {
    auto [a, b] = unpair(i);
    auto key = std::make_pair(class_of(a), class_of(b));
    auto [it, fresh] = least.emplace(key, i);
    if (defined_[i]) continue;
    if (!fresh) {
      Nat target = *j_[it->second];
      define_e(i, target);
      ++merges_;
      trace_("density_merge", stage_, {i, it->second, target});
      continue;
    }
    if (!L.leq_now(a, b)) continue;
    Nat value = f(a, b);
    if (L.equiv_now(value, a)) {
      define_e(i, b);
      ++forcings_;
    } else if (L.equiv_now(value, b)) {
      define_e(i, a);
      ++forcings_;
    }
  }
  m.tick();
}

void UniformDensity::run(Nat stages) {
  for (Nat s = 0; s < stages; ++s) step();
}

}  // namespace prelat
