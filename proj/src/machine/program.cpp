#include <cctype>
#include <map>

#include "prelat/machine.hpp"

namespace prelat {

namespace {

struct OpInfo {
  const char* name;
  Op op;
  int arity;
};

constexpr OpInfo kOps[] = {
    {"var", Op::Var, -1},           {"pair", Op::Pair, 2},     {"fst", Op::Fst, 1},
    {"snd", Op::Snd, 1},            {"add", Op::Add, 2},       {"sub", Op::Sub, 2},
    {"mul", Op::Mul, 2},            {"eq", Op::Eq, 2},         {"lt", Op::Lt, 2},
    {"if", Op::If, 3},              {"call", Op::Call, 2},     {"loop", Op::Loop, 3},
    {"search", Op::Search, 1},      {"const-code", Op::ConstCode, 1}, {"smn-code", Op::SmnCode, 2},
    {"diverge", Op::Diverge, 0},
};

const OpInfo* find_op(const std::string& name) {
  for (const auto& o : kOps)
    if (name == o.name) return &o;
  return nullptr;
}

const OpInfo& op_info(Op op) {
  for (const auto& o : kOps)
    if (o.op == op) return o;
  throw Error("no such op");
}

struct ProgramParser {
  std::string_view s;
  const std::map<std::string, Nat>* names = nullptr;
  std::size_t i = 0;
  Program out;

  [[noreturn]] void fail(const std::string& what) {
    throw ParseError("program parse error at offset " + std::to_string(i) + ": " + what);
  }
  void skip() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  std::string atom() {
    skip();
    std::size_t j = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' && s[i] != ')') ++i;
    if (j == i) fail("expected an atom");
    return std::string(s.substr(j, i - j));
  }
  static bool numeric(const std::string& w) {
    for (char c : w)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return !w.empty();
  }
  Nat number(const std::string& w) {
    if (!numeric(w)) fail("expected a natural number, got '" + w + "'");
    Nat v = 0;
    for (char c : w) v = checked_add(checked_mul(v, 10), static_cast<Nat>(c - '0'));
    return v;
  }
  std::uint32_t push(Op op, Nat lit = 0, std::uint32_t a = 0, std::uint32_t b = 0, std::uint32_t c = 0) {
    out.nodes.push_back({op, lit, a, b, c});
    return static_cast<std::uint32_t>(out.nodes.size() - 1);
  }
  std::uint32_t expr() {
    skip();
    if (i >= s.size()) fail("unexpected end of input");
    if (s[i] == ')') fail("unexpected ')'");
    if (s[i] != '(') {
      std::string w = atom();
      if (w == "x") return push(Op::Var, 0);
      if (w == "diverge") return push(Op::Diverge);
      if (names && !numeric(w)) {
        auto it = names->find(w);
        if (it == names->end()) fail("unbound identifier '" + w + "'");
        return push(Op::Lit, it->second);
      }
      return push(Op::Lit, number(w));
    }
    ++i;
    std::string head = atom();
    const OpInfo* info = find_op(head);
    if (!info) fail("unknown form '" + head + "'");
    std::uint32_t r;
    if (info->op == Op::Var) {
      r = push(Op::Var, number(atom()));
    } else {
      std::uint32_t k[3] = {0, 0, 0};
      for (int n = 0; n < info->arity; ++n) k[n] = expr();
      r = push(info->op, 0, k[0], k[1], k[2]);
    }
    skip();
    if (i >= s.size() || s[i] != ')') fail("expected ')' closing '" + head + "'");
    ++i;
    return r;
  }
};

void print_node(const Program& p, std::uint32_t n, std::string& out) {
  const auto& node = p.nodes[n];
  switch (node.op) {
    case Op::Var:
      out += node.lit == 0 ? "x" : "(var " + std::to_string(node.lit) + ")";
      return;
    case Op::Lit: out += std::to_string(node.lit); return;
    case Op::Diverge: out += "diverge"; return;
    default: break;
  }
  const OpInfo& info = op_info(node.op);
  out += '(';
  out += info.name;
  std::uint32_t k[3] = {node.a, node.b, node.c};
  for (int i = 0; i < info.arity; ++i) {
    out += ' ';
    print_node(p, k[i], out);
  }
  out += ')';
}

}  // namespace

Program parse_program(std::string_view text) {
  ProgramParser p{text, nullptr, 0, {}};
  p.expr();
  p.skip();
  if (p.i != text.size()) p.fail("trailing input");
  return std::move(p.out);
}

Program parse_program(std::string_view text, const std::map<std::string, Nat>& names) {
  ProgramParser p{text, &names, 0, {}};
  p.expr();
  p.skip();
  if (p.i != text.size()) p.fail("trailing input");
  return std::move(p.out);
}

std::string print_program(const Program& p) {
  if (p.nodes.empty()) return "diverge";
  std::string out;
  print_node(p, static_cast<std::uint32_t>(p.nodes.size() - 1), out);
  return out;
}

}  // namespace prelat
