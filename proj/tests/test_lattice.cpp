#include <algorithm>
#include <map>

#include "doctest.h"
#include "prelat/lattice.hpp"

using namespace prelat;

namespace {

NormalForm nf(const char* s) { return normalize(parse_term(s)); }

Term random_term(SplitMix64& rng, int depth, Nat ngens) {
  if (depth == 0 || rng.below(4) == 0) {
    Nat r = rng.below(ngens + 2);
    if (r == ngens) return Term::zero();
    if (r == ngens + 1) return Term::one();
    return Term::gen(r + 1);
  }
  Term a = random_term(rng, depth - 1, ngens);
  Term b = random_term(rng, depth - 1, ngens);
  return rng.coin() ? Term::meet(a, b) : Term::join(a, b);
}

// M3: 0 < a,b,c < 1 pairwise incomparable. Elements 0..4 = bottom, a, b, c, top.
int m3_meet(int x, int y) {
  if (x == y) return x;
  if (x == 4) return y;
  if (y == 4) return x;
  return 0;
}
int m3_join(int x, int y) {
  if (x == y) return x;
  if (x == 0) return y;
  if (y == 0) return x;
  return 4;
}
int m3_eval(const Term& t, const std::map<Nat, int>& val) {
  switch (t.kind()) {
    case TermKind::Zero: return 0;
    case TermKind::One: return 4;
    case TermKind::Gen: return val.at(t.id());
    case TermKind::Meet: return m3_meet(m3_eval(t.left(), val), m3_eval(t.right(), val));
    case TermKind::Join: return m3_join(m3_eval(t.left(), val), m3_eval(t.right(), val));
  }
  return 0;
}
bool m3_leq(int x, int y) { return m3_meet(x, y) == x; }

}  // namespace

TEST_CASE("normal forms of small terms") {
  CHECK(print_nf(nf("(meet (gen 1) (join (gen 2) (gen 3)))")) == "{{1,2},{1,3}}");
  CHECK(print_nf(nf("(join (gen 1) (meet (gen 1) (gen 2)))")) == "{{1}}");
  CHECK(print_nf(nf("(join zero (gen 1))")) == "{{1}}");
  CHECK(print_nf(nf("(meet (gen 1) one)")) == "{{1}}");
  CHECK(nf("zero").is_zero());
  CHECK(nf("(join one (gen 4))").is_one());
}

TEST_CASE("nf order basics") {
  CHECK(nf_leq(nf("(gen 1)"), nf("(join (gen 1) (gen 2))")));
  CHECK_FALSE(nf_leq(nf("(gen 1)"), nf("(gen 2)")));
  CHECK(nf_leq(NormalForm::zero(), nf("(gen 3)")));
  CHECK(nf_leq(nf("(gen 3)"), NormalForm::one()));
  CHECK_FALSE(nf_leq(NormalForm::one(), NormalForm::zero()));
}

TEST_CASE("parser and printer round trip") {
  SplitMix64 rng(11);
  for (int i = 0; i < 300; ++i) {
    Term t = random_term(rng, 5, 4);
    std::string s = print_term(t);
    CHECK(print_term(parse_term(s)) == s);
    CHECK(parse_term(s) == t);
  }
  CHECK_THROWS_AS(parse_term("(meet (gen 1))"), ParseError);
  CHECK_THROWS_AS(parse_term("(gen x)"), ParseError);
  CHECK_THROWS_AS(parse_term("zero zero"), ParseError);
}

TEST_CASE("normalize is idempotent through terms") {
  SplitMix64 rng(12);
  for (int i = 0; i < 300; ++i) {
    NormalForm a = normalize(random_term(rng, 5, 4));
    CHECK(normalize(nf_to_term(a)) == a);
  }
}

TEST_CASE("normalize respects meet and join") {
  SplitMix64 rng(13);
  for (int i = 0; i < 200; ++i) {
    Term s = random_term(rng, 4, 4), t = random_term(rng, 4, 4);
    CHECK(normalize(Term::meet(s, t)) == nf_meet(normalize(s), normalize(t)));
    CHECK(normalize(Term::join(s, t)) == nf_join(normalize(s), normalize(t)));
  }
}

TEST_CASE("nf_leq agrees with the boolean oracle on random terms") {
  SplitMix64 rng(14);
  for (int i = 0; i < 500; ++i) {
    Term s = random_term(rng, 4, 5), t = random_term(rng, 4, 5);
    auto v = oracle_leq(s, t);
    CHECK(v.holds == nf_leq(normalize(s), normalize(t)));
    if (!v.holds) {
      CHECK(eval_boolean(s, v.witness));
      CHECK_FALSE(eval_boolean(t, v.witness));
    }
  }
}

TEST_CASE("substitution") {
  Term t = parse_term("(meet (gen 1) (gen 2))");
  CHECK(print_nf(normalize(substitute(t, {{1, true}}))) == "{{2}}");
  CHECK(substitute(t, {}) == t);
  SplitMix64 rng(15);
  for (int i = 0; i < 300; ++i) {
    Term s = random_term(rng, 5, 4);
    std::map<Nat, bool> sigma;
    for (Nat g = 1; g <= 4; ++g)
      if (rng.below(3) == 0) sigma[g] = rng.coin();
    CHECK(normalize(substitute(s, sigma)) == nf_substitute(normalize(s), sigma));
  }
}

TEST_CASE("whitman order") {
  CHECK(whitman_leq(parse_term("(meet (gen 1) (gen 2))"), parse_term("(gen 1)")));
  CHECK_FALSE(whitman_leq(parse_term("(gen 1)"), parse_term("(join (gen 2) (gen 3))")));
  Term lhs = parse_term("(join (meet (gen 1) (gen 2)) (meet (gen 1) (gen 3)))");
  Term rhs = parse_term("(meet (gen 1) (join (gen 2) (gen 3)))");
  CHECK(whitman_leq(lhs, rhs));
  CHECK_FALSE(whitman_leq(rhs, lhs));
  // the converse fails in M3
  bool refuted = false;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b)
      for (int c = 0; c < 5; ++c) {
        std::map<Nat, int> val{{1, a}, {2, b}, {3, c}};
        if (!m3_leq(m3_eval(rhs, val), m3_eval(lhs, val))) refuted = true;
      }
  CHECK(refuted);
}

TEST_CASE("whitman order is sound for M3 and contained in the distributive order") {
  SplitMix64 rng(16);
  for (int i = 0; i < 400; ++i) {
    Term s = random_term(rng, 4, 3), t = random_term(rng, 4, 3);
    bool w = whitman_leq(s, t);
    if (w) {
      CHECK(nf_leq(normalize(s), normalize(t)));
      for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b)
          for (int c = 0; c < 5; ++c) {
            std::map<Nat, int> val{{1, a}, {2, b}, {3, c}};
            CHECK(m3_leq(m3_eval(s, val), m3_eval(t, val)));
          }
    }
  }
}

TEST_CASE("semilattice normal forms") {
  CHECK(semilattice_nf(parse_term("(join (join (gen 1) (gen 2)) (gen 1))")).gens == std::vector<Nat>{1, 2});
  CHECK(semilattice_nf(Term::zero()).gens.empty());
  CHECK_FALSE(semilattice_nf(Term::zero()).top);
  CHECK(semilattice_leq({false, {1}}, {false, {1, 2}}));
  CHECK_FALSE(semilattice_leq({false, {1}}, {false, {2}}));
  CHECK_THROWS_AS(semilattice_nf(parse_term("(meet (gen 1) (gen 2))")), MalformedTerm);
}

TEST_CASE("meet irreducibility by brute force") {
  // x1 /\ x2 = (x1 /\ x2 \/ x1 /\ x3) /\ (x1 /\ x2 \/ x2 /\ x3) is reducible over three generators.
  NormalForm x12 = nf("(meet (gen 1) (gen 2))");
  CHECK_FALSE(meet_irreducible(x12, {1, 2, 3}));
  CHECK(nf_meet(nf("(join (meet (gen 1) (gen 2)) (meet (gen 1) (gen 3)))"),
                nf("(join (meet (gen 1) (gen 2)) (meet (gen 2) (gen 3)))")) == x12);
  CHECK_FALSE(meet_irreducible(x12, {1, 2}));
  CHECK_FALSE(meet_irreducible(NormalForm::zero(), {1, 2}));
  CHECK(meet_irreducible(nf("(gen 1)"), {1, 2, 3}));
  CHECK(meet_irreducible(nf("(join (gen 1) (gen 2))"), {1, 2, 3}));
  CHECK(meet_irreducible(nf("(gen 1)"), {1, 2, 3, 4}));
  CHECK_THROWS_AS(meet_irreducible(nf("(gen 1)"), {1, 2, 3, 4, 5}), ContextTooLarge);
}

TEST_CASE("free distributive lattice sizes") {
  CHECK(free_distributive_elements({}).size() == 2);
  CHECK(free_distributive_elements({1}).size() == 3);
  CHECK(free_distributive_elements({1, 2}).size() == 6);
  CHECK(free_distributive_elements({1, 2, 3}).size() == 20);
  CHECK(free_distributive_elements({1, 2, 3, 4}).size() == 168);
}

TEST_CASE("meet join pairs") {
  NormalForm a = nf("(meet (gen 1) (gen 2))");
  NormalForm b = nf("(join (gen 1) (gen 2))");
  auto ps = meet_join_pairs(a, b);
  auto has = [&](const NormalForm& x, const NormalForm& y) {
    return std::find(ps.begin(), ps.end(), std::make_pair(x, y)) != ps.end();
  };
  CHECK(has(nf("(gen 1)"), nf("(gen 2)")));
  CHECK(has(nf("(gen 2)"), nf("(gen 1)")));
  for (auto& [x, y] : ps) {
    CHECK(nf_meet(x, y) == a);
    CHECK(nf_join(x, y) == b);
    CHECK(has(y, x));
  }
  auto same = meet_join_pairs(a, a);
  CHECK(same.size() == 1);
  CHECK(meet_join_pairs(b, a).empty());
}

TEST_CASE("order decider agrees with normal forms and the sat path") {
  SplitMix64 rng(17);
  OrderDecider d(OrderKind::Distributive);
  for (int i = 0; i < 400; ++i) {
    Term s = random_term(rng, 6, 6), t = random_term(rng, 6, 6);
    auto a = d.dag().from_term(s), b = d.dag().from_term(t);
    bool expect = nf_leq(normalize(s), normalize(t));
    CHECK(d.leq(a, b) == expect);
    auto sep = separating_assignment(d.dag(), a, b);
    CHECK(sep.has_value() == !expect);
    if (sep) {
      CHECK(eval_boolean(s, *sep));
      CHECK_FALSE(eval_boolean(t, *sep));
    }
  }
}

TEST_CASE("term store hash-consing") {
  TermStore st;
  Nat g1 = st.gen(1), g2 = st.gen(2);
  Nat m = st.meet(g1, g2);
  CHECK(st.meet(g1, g2) == m);
  CHECK(st.meet(g2, g1) != m);
  CHECK(st.print(m) == "(meet (gen 1) (gen 2))");
  CHECK(st.intern(parse_term("(meet (gen 1) (gen 2))")) == m);
  CHECK_THROWS_AS(st.meet(m, 999), MalformedTerm);
}

TEST_CASE("term enumeration counts") {
  // sizes 1 and 3 over two generators: 4 atoms, 2*4*4 binary terms
  CHECK(enumerate_terms(3, {1, 2}).size() == 4 + 32);
}
