#include <algorithm>
#include <cctype>

#include "prelat/lattice.hpp"

namespace prelat {

Term Term::zero() { return Term{}; }

Term Term::one() {
  Term t;
  t.kind_ = TermKind::One;
  return t;
}

Term Term::gen(Nat id) {
  Term t;
  t.kind_ = TermKind::Gen;
  t.id_ = id;
  return t;
}

Term Term::meet(const Term& a, const Term& b) {
  Term t;
  t.kind_ = TermKind::Meet;
  t.left_ = std::make_shared<const Term>(a);
  t.right_ = std::make_shared<const Term>(b);
  return t;
}

Term Term::join(const Term& a, const Term& b) {
  Term t;
  t.kind_ = TermKind::Join;
  t.left_ = std::make_shared<const Term>(a);
  t.right_ = std::make_shared<const Term>(b);
  return t;
}

std::size_t Term::size() const {
  if (kind_ == TermKind::Meet || kind_ == TermKind::Join) return 1 + left_->size() + right_->size();
  return 1;
}

bool operator==(const Term& a, const Term& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case TermKind::Zero:
    case TermKind::One: return true;
    case TermKind::Gen: return a.id_ == b.id_;
    default:
      if (a.left_ == b.left_ && a.right_ == b.right_) return true;
      return *a.left_ == *b.left_ && *a.right_ == *b.right_;
  }
}

namespace {

struct Parser {
  std::string_view s;
  std::size_t i = 0;

  [[noreturn]] void fail(const std::string& what) {
    throw ParseError("term parse error at offset " + std::to_string(i) + ": " + what);
  }
  void skip() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  std::string word() {
    skip();
    std::size_t j = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
    if (j == i) fail("expected a word");
    return std::string(s.substr(j, i - j));
  }
  void expect(char c) {
    skip();
    if (i >= s.size() || s[i] != c) fail(std::string("expected '") + c + "'");
    ++i;
  }
  Nat number() {
    std::string w = word();
    Nat v = 0;
    for (char c : w) {
      if (!std::isdigit(static_cast<unsigned char>(c))) fail("expected a natural number");
      v = checked_add(checked_mul(v, 10), static_cast<Nat>(c - '0'));
    }
    return v;
  }
  Term term() {
    skip();
    if (i < s.size() && s[i] == '(') {
      ++i;
      std::string head = word();
      Term out;
      if (head == "gen") {
        out = Term::gen(number());
      } else if (head == "meet" || head == "join") {
        Term a = term();
        Term b = term();
        out = head == "meet" ? Term::meet(a, b) : Term::join(a, b);
      } else {
        fail("unknown head '" + head + "'");
      }
      expect(')');
      return out;
    }
    std::string w = word();
    if (w == "zero") return Term::zero();
    if (w == "one") return Term::one();
    fail("unknown atom '" + w + "'");
  }
};

void print_into(const Term& t, std::string& out) {
  switch (t.kind()) {
    case TermKind::Zero: out += "zero"; return;
    case TermKind::One: out += "one"; return;
    case TermKind::Gen:
      out += "(gen ";
      out += std::to_string(t.id());
      out += ')';
      return;
    case TermKind::Meet:
    case TermKind::Join:
      out += t.kind() == TermKind::Meet ? "(meet " : "(join ";
      print_into(t.left(), out);
      out += ' ';
      print_into(t.right(), out);
      out += ')';
      return;
  }
}

void collect_gens(const Term& t, std::set<Nat>& out) {
  if (t.kind() == TermKind::Gen) out.insert(t.id());
  if (t.kind() == TermKind::Meet || t.kind() == TermKind::Join) {
    collect_gens(t.left(), out);
    collect_gens(t.right(), out);
  }
}

}  // namespace

Term parse_term(std::string_view text) {
  Parser p{text};
  Term t = p.term();
  p.skip();
  if (p.i != text.size()) p.fail("trailing input");
  return t;
}

std::string print_term(const Term& t) {
  std::string out;
  print_into(t, out);
  return out;
}

std::set<Nat> term_generators(const Term& t) {
  std::set<Nat> out;
  collect_gens(t, out);
  return out;
}

Term substitute_terms(const Term& t, const std::map<Nat, Term>& sigma) {
  switch (t.kind()) {
    case TermKind::Gen: {
      auto it = sigma.find(t.id());
      return it == sigma.end() ? t : it->second;
    }
    case TermKind::Meet: return Term::meet(substitute_terms(t.left(), sigma), substitute_terms(t.right(), sigma));
    case TermKind::Join: return Term::join(substitute_terms(t.left(), sigma), substitute_terms(t.right(), sigma));
    default: return t;
  }
}

Term substitute(const Term& t, const std::map<Nat, bool>& sigma) {
  std::map<Nat, Term> m;
  for (auto [g, v] : sigma) m.emplace(g, v ? Term::one() : Term::zero());
  return substitute_terms(t, m);
}

bool eval_boolean(const Term& t, const std::map<Nat, bool>& assignment) {
  switch (t.kind()) {
    case TermKind::Zero: return false;
    case TermKind::One: return true;
    case TermKind::Gen: {
      auto it = assignment.find(t.id());
      return it != assignment.end() && it->second;
    }
    case TermKind::Meet: return eval_boolean(t.left(), assignment) && eval_boolean(t.right(), assignment);
    case TermKind::Join: return eval_boolean(t.left(), assignment) || eval_boolean(t.right(), assignment);
  }
  return false;
}

OracleVerdict oracle_leq(const Term& s, const Term& t) {
  std::set<Nat> gs = term_generators(s);
  for (Nat g : term_generators(t)) gs.insert(g);
  std::vector<Nat> ctx(gs.begin(), gs.end());
  if (ctx.size() > 20) throw ContextTooLarge("boolean oracle limited to 20 generators");
  OracleVerdict v;
  for (Nat mask = 0; mask < (Nat{1} << ctx.size()); ++mask) {
    std::map<Nat, bool> a;
    for (std::size_t k = 0; k < ctx.size(); ++k) a[ctx[k]] = (mask >> k) & 1;
    if (eval_boolean(s, a) && !eval_boolean(t, a)) {
      v.holds = false;
      v.witness = a;
      return v;
    }
  }
  return v;
}

SemiNF semilattice_nf(const Term& t) {
  switch (t.kind()) {
    case TermKind::Zero: return {};
    case TermKind::One: return {true, {}};
    case TermKind::Gen: return {false, {t.id()}};
    case TermKind::Meet: throw MalformedTerm("meet node in a join-semilattice term");
    case TermKind::Join: {
      SemiNF a = semilattice_nf(t.left());
      SemiNF b = semilattice_nf(t.right());
      if (a.top || b.top) return {true, {}};
      a.gens.insert(a.gens.end(), b.gens.begin(), b.gens.end());
      return {false, canonical_set(std::move(a.gens))};
    }
  }
  return {};
}

bool semilattice_leq(const SemiNF& a, const SemiNF& b) {
  if (b.top) return true;
  if (a.top) return false;
  return std::includes(b.gens.begin(), b.gens.end(), a.gens.begin(), a.gens.end());
}

bool whitman_leq(const Term& s, const Term& t) {
  OrderDecider d(OrderKind::Free);
  auto a = d.dag().from_term(s);
  auto b = d.dag().from_term(t);
  return d.leq(a, b);
}

std::vector<Term> enumerate_terms(std::size_t max_size, const std::vector<Nat>& gens) {
  // by_size[k] holds all terms with exactly k nodes; sizes are odd.
  std::vector<std::vector<Term>> by_size(max_size + 1);
  if (max_size >= 1) {
    by_size[1].push_back(Term::zero());
    by_size[1].push_back(Term::one());
    for (Nat g : gens) by_size[1].push_back(Term::gen(g));
  }
  for (std::size_t k = 3; k <= max_size; k += 2) {
    for (std::size_t l = 1; l + 1 < k; l += 2) {
      std::size_t r = k - 1 - l;
      for (const Term& a : by_size[l])
        for (const Term& b : by_size[r]) {
          by_size[k].push_back(Term::meet(a, b));
          by_size[k].push_back(Term::join(a, b));
        }
    }
  }
  std::vector<Term> out;
  for (auto& v : by_size) out.insert(out.end(), v.begin(), v.end());
  return out;
}

}  // namespace prelat
