#include <algorithm>

#include "prelat/prelattice.hpp"

namespace prelat {

ScriptedPreorder::ScriptedPreorder(std::vector<Event> events) {
  for (auto& e : events) add(e);
}

void ScriptedPreorder::add(Event e) {
  if (e.stage == 0) e.stage = 1;
  auto pos = std::upper_bound(events_.begin(), events_.end(), e.stage,
                              [](Nat s, const Event& ev) { return s < ev.stage; });
  std::size_t idx = pos - events_.begin();
  events_.insert(pos, e);
  closures_.erase(closures_.upper_bound(idx), closures_.end());
}

std::vector<Nat> ScriptedPreorder::change_stages() const {
  std::vector<Nat> out;
  for (auto& e : events_)
    if (out.empty() || out.back() != e.stage) out.push_back(e.stage);
  return out;
}

const std::map<Nat, std::set<Nat>>& ScriptedPreorder::closure(Nat stage) {
  std::size_t n = std::upper_bound(events_.begin(), events_.end(), stage,
                                   [](Nat s, const Event& ev) { return s < ev.stage; }) -
                  events_.begin();
  auto it = closures_.find(n);
  if (it != closures_.end()) return it->second;
  std::map<Nat, std::set<Nat>> up;
  for (std::size_t i = 0; i < n; ++i) {
    up[events_[i].x].insert(events_[i].y);
    up[events_[i].y];
  }
  // closure by repeated propagation over the touched nodes
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& [x, ys] : up) {
      std::set<Nat> add;
      for (Nat y : ys)
        for (Nat z : up[y])
          if (z != x && !ys.count(z)) add.insert(z);
      if (!add.empty()) {
        ys.insert(add.begin(), add.end());
        changed = true;
      }
    }
  }
  return closures_.emplace(n, std::move(up)).first->second;
}

bool ScriptedPreorder::holds(Nat x, Nat y, Nat stage) {
  if (x == y) return true;
  if (stage == 0) return false;
  const auto& up = closure(stage);
  auto it = up.find(x);
  return it != up.end() && it->second.count(y);
}

// ---------------------------------------------------------------------------

GenStatus CanonicalSource::status(Nat g, Nat stage) {
  GenStatus st;
  auto r = m_.value_by(g, g, stage);
  if (r && *r == 0) st.left = true;
  if (r && *r == 1) st.right = true;
  if (!r) st.next = m_.next_change(g, g, stage);
  return st;
}

void ScriptedSource::add(std::map<Nat, Nat>& side, Nat g, Nat stage) {
  if (stage <= m_.now() && m_.now() > 0) stage = m_.now() + 1;
  auto it = side.find(g);
  if (it != side.end() && it->second <= stage) return;
  side[g] = stage;
  ++version_;
  for (auto w : watchers_) m_.wake_entry(w);
  watchers_.clear();
}

GenStatus ScriptedSource::status(Nat g, Nat stage) {
  GenStatus st;
  auto read = [&](const std::map<Nat, Nat>& side, bool& flag) {
    auto it = side.find(g);
    if (it == side.end()) return;
    if (it->second <= stage)
      flag = true;
    else
      st.next = std::min(st.next, it->second);
  };
  read(left_, st.left);
  read(right_, st.right);
  if (m_.evaluating()) {
    if (st.next != kNever) m_.wake_current_at(st.next + 1);
    watch_all();
  }
  return st;
}

void ScriptedSource::watch_all() {
  if (auto id = m_.current_entry()) watchers_.insert(*id);
}

bool ScriptedSource::conflict(Nat stage) {
  Nat first = kNever;
  for (auto& [g, sl] : left_) {
    auto it = right_.find(g);
    if (it != right_.end()) first = std::min(first, std::max(sl, it->second));
  }
  if (m_.evaluating()) {
    if (first != kNever && first > stage) m_.wake_current_at(first + 1);
    watch_all();
  }
  return first <= stage;
}

GenStatus BrokenSource::status(Nat g, Nat stage) {
  GenStatus a = canonical_.status(g, stage), b = rogue_.status(g, stage);
  return {a.left || b.left, a.right || b.right, std::min(a.next, b.next)};
}

bool BrokenSource::conflict(Nat stage) {
  if (rogue_.conflict(stage)) return true;
  for (auto* side : {&rogue_.left(), &rogue_.right()})
    for (auto& [g, s] : *side) {
      (void)s;
      auto st = status(g, stage);
      if (st.left && st.right) return true;
    }
  return false;
}

}  // namespace prelat
