#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace prelat {

using Nat = std::uint64_t;
inline constexpr Nat kNever = ~Nat{0};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ArithmeticOverflow : Error { using Error::Error; };
struct DoubleDefinition : Error { using Error::Error; };
struct MalformedTerm : Error { using Error::Error; };
struct ContextTooLarge : Error { using Error::Error; };
struct NotYetComparable : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct ScenarioParse : Error { using Error::Error; };
struct BudgetExceeded : Error { using Error::Error; };
struct StageBudgetExceeded : BudgetExceeded { using BudgetExceeded::BudgetExceeded; };
struct DiamondFired : Error { using Error::Error; };
struct ClaimViolated : Error { using Error::Error; };

Nat checked_add(Nat a, Nat b);
Nat checked_mul(Nat a, Nat b);

// Cantor pairing: pair(x,y) = (x+y)(x+y+1)/2 + y.
Nat pair(Nat x, Nat y);
std::pair<Nat, Nat> unpair(Nat z);
inline Nat pi0(Nat z) { return unpair(z).first; }
inline Nat pi1(Nat z) { return unpair(z).second; }

// splitmix64, bit-exact with the reference algorithm.
class SplitMix64 {
 public:
  explicit SplitMix64(Nat seed) : state_(seed) {}
  Nat next() {
    Nat z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  Nat below(Nat n) { return n == 0 ? 0 : next() % n; }
  bool coin() { return next() & 1; }
  Nat state() const { return state_; }

 private:
  Nat state_;
};

inline Nat mix64(Nat x) {
  SplitMix64 g(x);
  return g.next();
}

// Canonical finite sets are sorted, duplicate-free vectors.
std::vector<Nat> canonical_set(std::vector<Nat> xs);

}  // namespace prelat
