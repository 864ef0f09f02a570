#include "prelat/common.hpp"

#include <algorithm>
#include <cmath>

namespace prelat {

Nat checked_add(Nat a, Nat b) {
  Nat r;
  if (__builtin_add_overflow(a, b, &r)) throw ArithmeticOverflow("natural overflow in addition");
  return r;
}

Nat checked_mul(Nat a, Nat b) {
  Nat r;
  if (__builtin_mul_overflow(a, b, &r)) throw ArithmeticOverflow("natural overflow in multiplication");
  return r;
}

Nat pair(Nat x, Nat y) {
  Nat s = checked_add(x, y);
  Nat t = s % 2 == 0 ? checked_mul(s / 2, checked_add(s, 1)) : checked_mul(s, (s + 1) / 2);
  return checked_add(t, y);
}

std::pair<Nat, Nat> unpair(Nat z) {
  // w = floor((sqrt(8z+1)-1)/2), corrected for rounding.
  long double d = std::sqrt(8.0L * static_cast<long double>(z) + 1.0L);
  Nat w = static_cast<Nat>((d - 1.0L) / 2.0L);
  auto tri = [](Nat k) -> unsigned __int128 { return static_cast<unsigned __int128>(k) * (k + 1) / 2; };
  while (tri(w) > z) --w;
  while (tri(w + 1) <= z) ++w;
  Nat y = z - static_cast<Nat>(tri(w));
  return {w - y, y};
}

std::vector<Nat> canonical_set(std::vector<Nat> xs) {
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

}  // namespace prelat
