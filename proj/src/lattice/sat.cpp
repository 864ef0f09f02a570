#include <algorithm>
#include <unordered_map>

#include "prelat/lattice.hpp"

namespace prelat {

namespace {

// Compact CDCL solver: two watched literals, first-UIP learning, activity heap, phase saving.
class Cdcl {
 public:
  explicit Cdcl(int nvars)
      : n_(nvars), watches_(2 * nvars), value_(nvars, -1), level_(nvars, 0), reason_(nvars, -1),
        activity_(nvars, 0.0), phase_(nvars, 0), heap_pos_(nvars, -1), seen_(nvars, 0) {
    for (int v = 0; v < n_; ++v) heap_insert(v);
  }

  static int lit(int v, bool positive) { return 2 * v + (positive ? 0 : 1); }

  bool add_clause(std::vector<int> c) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
      if ((c[i] ^ 1) == c[i + 1]) return true;
    if (c.empty()) return ok_ = false;
    if (c.size() == 1) {
      if (lit_value(c[0]) == 0) return ok_ = false;
      if (lit_value(c[0]) == -1) assign(c[0], -1);
      return true;
    }
    attach(std::move(c));
    return true;
  }

  bool solve() {
    if (!ok_) return false;
    if (propagate() != -1) return false;
    int conflicts = 0, restart_limit = 100;
    for (;;) {
      int confl = propagate();
      if (confl != -1) {
        ++conflicts;
        if (decision_level() == 0) return false;
        std::vector<int> learnt;
        int back = analyze(confl, learnt);
        backtrack(back);
        if (learnt.size() == 1) {
          assign(learnt[0], -1);
        } else {
          int ci = attach(learnt);
          assign(learnt[0], ci);
        }
        decay();
        if (conflicts >= restart_limit) {
          conflicts = 0;
          restart_limit = restart_limit * 3 / 2;
          backtrack(0);
        }
        continue;
      }
      int v = pick();
      if (v < 0) return true;
      trail_lim_.push_back(static_cast<int>(trail_.size()));
      assign(lit(v, phase_[v]), -1);
    }
  }

  bool model(int v) const { return value_[v] == 1; }

 private:
  int lit_value(int l) const {
    int v = value_[l >> 1];
    if (v < 0) return -1;
    return (l & 1) ? 1 - v : v;
  }
  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  int attach(std::vector<int> c) {
    int ci = static_cast<int>(clauses_.size());
    watches_[c[0] ^ 1].push_back(ci);
    watches_[c[1] ^ 1].push_back(ci);
    clauses_.push_back(std::move(c));
    return ci;
  }

  void assign(int l, int why) {
    int v = l >> 1;
    value_[v] = (l & 1) ? 0 : 1;
    level_[v] = decision_level();
    reason_[v] = why;
    trail_.push_back(l);
  }

  // Returns index of a conflicting clause or -1.
  int propagate() {
    while (qhead_ < trail_.size()) {
      int p = trail_[qhead_++];  // p became true; clauses watching ~p are in watches_[p]
      auto& ws = watches_[p];
      std::size_t i = 0, j = 0;
      int confl = -1;
      while (i < ws.size()) {
        int ci = ws[i++];
        auto& c = clauses_[ci];
        int falsel = p ^ 1;
        if (c[0] == falsel) std::swap(c[0], c[1]);
        if (lit_value(c[0]) == 1) {
          ws[j++] = ci;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.size(); ++k)
          if (lit_value(c[k]) != 0) {
            std::swap(c[1], c[k]);
            watches_[c[1] ^ 1].push_back(ci);
            moved = true;
            break;
          }
        if (moved) continue;
        ws[j++] = ci;
        if (lit_value(c[0]) == 0) {
          confl = ci;
          while (i < ws.size()) ws[j++] = ws[i++];
        } else {
          assign(c[0], ci);
        }
      }
      ws.resize(j);
      if (confl != -1) return confl;
    }
    return -1;
  }

  int analyze(int confl, std::vector<int>& learnt) {
    learnt.assign(1, 0);
    int pathc = 0, p = -1;
    std::size_t idx = trail_.size();
    std::vector<int> touched;
    for (;;) {
      const auto& c = clauses_[confl];
      for (std::size_t k = (p == -1 ? 0 : 1); k < c.size(); ++k) {
        int q = c[k];
        int v = q >> 1;
        if (seen_[v] || level_[v] == 0) continue;
        seen_[v] = 1;
        touched.push_back(v);
        bump(v);
        if (level_[v] >= decision_level())
          ++pathc;
        else
          learnt.push_back(q);
      }
      do {
        --idx;
      } while (!seen_[trail_[idx] >> 1]);
      p = trail_[idx];
      confl = reason_[p >> 1];
      seen_[p >> 1] = 0;
      if (--pathc == 0) break;
      // reason clause has p at position 0
      auto& rc = clauses_[confl];
      if (rc[0] != p) {
        auto it = std::find(rc.begin(), rc.end(), p);
        std::swap(rc[0], *it);
      }
    }
    learnt[0] = p ^ 1;
    for (int v : touched) seen_[v] = 0;
    int back = 0;
    if (learnt.size() > 1) {
      std::size_t best = 1;
      for (std::size_t k = 2; k < learnt.size(); ++k)
        if (level_[learnt[k] >> 1] > level_[learnt[best] >> 1]) best = k;
      std::swap(learnt[1], learnt[best]);
      back = level_[learnt[1] >> 1];
    }
    return back;
  }

  void backtrack(int lvl) {
    if (decision_level() <= lvl) return;
    for (int k = static_cast<int>(trail_.size()) - 1; k >= trail_lim_[lvl]; --k) {
      int v = trail_[k] >> 1;
      phase_[v] = value_[v] == 1;
      value_[v] = -1;
      reason_[v] = -1;
      if (heap_pos_[v] < 0) heap_insert(v);
    }
    trail_.resize(trail_lim_[lvl]);
    trail_lim_.resize(lvl);
    qhead_ = trail_.size();
  }

  void bump(int v) {
    activity_[v] += inc_;
    if (activity_[v] > 1e100) {
      for (auto& a : activity_) a *= 1e-100;
      inc_ *= 1e-100;
    }
    if (heap_pos_[v] >= 0) sift_up(heap_pos_[v]);
  }
  void decay() { inc_ /= 0.95; }

  int pick() {
    while (!heap_.empty()) {
      int v = heap_pop();
      if (value_[v] == -1) return v;
    }
    return -1;
  }

  void heap_insert(int v) {
    heap_pos_[v] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    sift_up(heap_pos_[v]);
  }
  int heap_pop() {
    int top = heap_[0];
    heap_pos_[top] = -1;
    int last = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
      heap_[0] = last;
      heap_pos_[last] = 0;
      sift_down(0);
    }
    return top;
  }
  void sift_up(int i) {
    int v = heap_[i];
    while (i > 0) {
      int parent = (i - 1) / 2;
      if (activity_[heap_[parent]] >= activity_[v]) break;
      heap_[i] = heap_[parent];
      heap_pos_[heap_[i]] = i;
      i = parent;
    }
    heap_[i] = v;
    heap_pos_[v] = i;
  }
  void sift_down(int i) {
    int v = heap_[i];
    int n = static_cast<int>(heap_.size());
    for (;;) {
      int c = 2 * i + 1;
      if (c >= n) break;
      if (c + 1 < n && activity_[heap_[c + 1]] > activity_[heap_[c]]) ++c;
      if (activity_[heap_[c]] <= activity_[v]) break;
      heap_[i] = heap_[c];
      heap_pos_[heap_[i]] = i;
      i = c;
    }
    heap_[i] = v;
    heap_pos_[v] = i;
  }

  int n_;
  bool ok_ = true;
  std::vector<std::vector<int>> clauses_;
  std::vector<std::vector<int>> watches_;
  std::vector<int> value_, level_, reason_;
  std::vector<double> activity_;
  std::vector<char> phase_;
  std::vector<int> heap_, heap_pos_;
  std::vector<char> seen_;
  std::vector<int> trail_, trail_lim_;
  std::size_t qhead_ = 0;
  double inc_ = 1.0;
};

}  // namespace

std::optional<std::map<Nat, bool>> separating_assignment(const FreeDag& dag, FreeDag::Id s, FreeDag::Id t) {
  std::unordered_map<FreeDag::Id, int> var;
  std::vector<FreeDag::Id> order;
  std::vector<FreeDag::Id> stack{s, t};
  while (!stack.empty()) {
    FreeDag::Id x = stack.back();
    stack.pop_back();
    if (var.count(x)) continue;
    var.emplace(x, static_cast<int>(order.size()));
    order.push_back(x);
    const auto& n = dag.node(x);
    if (n.kind == TermKind::Meet || n.kind == TermKind::Join) {
      stack.push_back(n.a);
      stack.push_back(n.b);
    }
  }
  Cdcl solver(static_cast<int>(order.size()));
  auto L = [&](FreeDag::Id x, bool pos) { return Cdcl::lit(var.at(x), pos); };
  for (FreeDag::Id x : order) {
    const auto& n = dag.node(x);
    switch (n.kind) {
      case TermKind::Zero: solver.add_clause({L(x, false)}); break;
      case TermKind::One: solver.add_clause({L(x, true)}); break;
      case TermKind::Gen: break;
      case TermKind::Meet:
        solver.add_clause({L(x, false), L(n.a, true)});
        solver.add_clause({L(x, false), L(n.b, true)});
        solver.add_clause({L(x, true), L(n.a, false), L(n.b, false)});
        break;
      case TermKind::Join:
        solver.add_clause({L(x, false), L(n.a, true), L(n.b, true)});
        solver.add_clause({L(x, true), L(n.a, false)});
        solver.add_clause({L(x, true), L(n.b, false)});
        break;
    }
  }
  solver.add_clause({L(s, true)});
  solver.add_clause({L(t, false)});
  if (!solver.solve()) return std::nullopt;
  std::map<Nat, bool> out;
  for (FreeDag::Id x : order)
    if (dag.node(x).kind == TermKind::Gen) out[dag.node(x).gen] = solver.model(var.at(x));
  return out;
}

}  // namespace prelat
