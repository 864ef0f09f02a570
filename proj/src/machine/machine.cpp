#include <algorithm>

#include "prelat/machine.hpp"

namespace prelat {

// Interprets arena programs against a shared fuel counter. Each node visit, loop iteration and
// search candidate costs one step.
struct Interpreter {
  Machine& m;
  const Program& p;
  Nat& fuel;
  std::size_t depth;
  std::vector<Nat> env;

  bool step() {
    if (fuel == 0) return false;
    --fuel;
    return true;
  }

  std::optional<Nat> run(std::uint32_t n) {
    if (!step()) return std::nullopt;
    const auto& node = p.nodes[n];
    switch (node.op) {
      case Op::Var:
        if (node.lit >= env.size()) return std::nullopt;
        return env[env.size() - 1 - node.lit];
      case Op::Lit: return node.lit;
      case Op::Diverge: fuel = 0; return std::nullopt;
      case Op::Fst:
      case Op::Snd: {
        auto a = run(node.a);
        if (!a) return a;
        auto [l, r] = unpair(*a);
        return node.op == Op::Fst ? l : r;
      }
      case Op::ConstCode: {
        auto a = run(node.a);
        if (!a) return a;
        return const_code(*a);
      }
      case Op::Pair:
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Eq:
      case Op::Lt:
      case Op::SmnCode: {
        auto a = run(node.a);
        if (!a) return a;
        auto b = run(node.b);
        if (!b) return b;
        switch (node.op) {
          case Op::Pair: return pair(*a, *b);
          case Op::Add: return checked_add(*a, *b);
          case Op::Sub: return *a >= *b ? *a - *b : 0;
          case Op::Mul: return checked_mul(*a, *b);
          case Op::Eq: return Nat{*a == *b};
          case Op::Lt: return Nat{*a < *b};
          default: return smn_code(*a, *b);
        }
      }
      case Op::If: {
        auto c = run(node.a);
        if (!c) return c;
        return run(*c != 0 ? node.b : node.c);
      }
      case Op::Call: {
        auto f = run(node.a);
        if (!f) return f;
        auto a = run(node.b);
        if (!a) return a;
        if (depth + 1 >= m.cfg_.max_depth) return std::nullopt;
        return m.run(*f, *a, fuel, depth + 1);
      }
      case Op::Loop: {
        auto count = run(node.a);
        if (!count) return count;
        auto acc = run(node.b);
        if (!acc) return acc;
        for (Nat i = 0; i < *count; ++i) {
          if (!step()) return std::nullopt;
          env.push_back(i);
          env.push_back(*acc);
          acc = run(node.c);
          env.resize(env.size() - 2);
          if (!acc) return acc;
        }
        return acc;
      }
      case Op::Search: {
        for (Nat y = 0;; ++y) {
          if (!step()) return std::nullopt;
          env.push_back(y);
          auto r = run(node.a);
          env.pop_back();
          if (!r) return r;
          if (*r == 0) return y;
        }
      }
    }
    return std::nullopt;
  }
};

std::optional<Nat> Ctx::value(Nat code, Nat x) { return m_.value_by(code, x, fact_stage()); }
void Ctx::wake_at(Nat stage) { m_.wake_current_at(stage); }
void Ctx::mark_volatile() { m_.mark_current_volatile(); }

Machine::Machine(MachineConfig cfg) : cfg_(cfg) {}

Nat Machine::add_program(const Program& p) {
  if (p.nodes.empty()) throw ParseError("empty program");
  std::string key = print_program(p);
  auto it = arena_index_.find(key);
  if (it != arena_index_.end()) return it->second;
  Nat code = checked_mul(arena_.size(), 4);
  arena_.push_back(p);
  arena_index_.emplace(std::move(key), code);
  return code;
}

const Program* Machine::program(Nat code) const {
  if (code % 4 != 0 || code / 4 >= arena_.size()) return nullptr;
  return &arena_[code / 4];
}

Machine::Slot* Machine::slot(Nat code) {
  if (code % 4 != 3 || code / 4 >= slots_.size()) return nullptr;
  return &slots_[code / 4];
}

const Machine::Slot* Machine::slot(Nat code) const {
  if (code % 4 != 3 || code / 4 >= slots_.size()) return nullptr;
  return &slots_[code / 4];
}

std::optional<Nat> Machine::run(Nat e, Nat x, Nat& fuel, std::size_t depth) {
  try {
    switch (e % 4) {
      case 0: {
        const Program* p = program(e);
        if (!p) {
          fuel = 0;
          return std::nullopt;
        }
        Interpreter in{*this, *p, fuel, depth, {x}};
        return in.run(static_cast<std::uint32_t>(p->nodes.size() - 1));
      }
      case 1:
        if (fuel == 0) return std::nullopt;
        --fuel;
        return (e - 1) / 4;
      case 2: {
        if (fuel == 0) return std::nullopt;
        --fuel;
        auto [p, a] = unpair((e - 2) / 4);
        return run(p, pair(a, x), fuel, depth + 1);
      }
      default: {
        if (fuel == 0) return std::nullopt;
        --fuel;
        Slot* s = slot(e);
        if (!s) {
          fuel = 0;
          return std::nullopt;
        }
        switch (s->kind) {
          case SlotKind::Undefined:
            touched_dynamic_ = true;
            if (!current_.empty()) s->watchers.push_back(current_.back());
            return std::nullopt;
          case SlotKind::Metered: {
            auto fn = s->metered;
            return (*fn)(x, fuel);
          }
          case SlotKind::Dynamic:
            return value_by(e, x, std::min(fuel, settled_stage()));
        }
      }
    }
  } catch (const ArithmeticOverflow&) {
    // values beyond 64 bits diverge
  }
  return std::nullopt;
}

EvalOutcome Machine::eval(Nat e, Nat x, Nat fuel) {
  Nat f = fuel;
  auto r = run(e, x, f, 0);
  return r ? EvalOutcome::done(*r) : EvalOutcome::out_of_fuel();
}

Nat Machine::kleene_fixpoint(Nat t) {
  // d(<y,z>) = phi_{phi_t(smn(y,y))}(z); then smn(d,d) is a fixed point of t.
  Program p = parse_program("(call (call t (smn-code (fst x) (fst x))) (snd x))", {{"t", t}});
  Nat d = add_program(p);
  return smn_code(d, d);
}

std::vector<Nat> Machine::enumerate_W(Nat e, Nat stage) {
  std::vector<Nat> out;
  for (Nat x = 0;; ++x) {
    Nat z;
    try {
      z = pair(e, x);
    } catch (const ArithmeticOverflow&) {
      break;
    }
    if (z > stage) break;
    if (eval(e, x, stage).converged) out.push_back(x);
  }
  return out;
}

bool Machine::in_W(Nat e, Nat x, Nat stage) {
  try {
    if (pair(e, x) > stage) return false;
  } catch (const ArithmeticOverflow&) {
    return false;
  }
  return eval(e, x, stage).converged;
}

Nat Machine::new_slot(std::string label) {
  Nat code = checked_add(checked_mul(slots_.size(), 4), 3);
  slots_.emplace_back();
  slots_.back().label = std::move(label);
  ++stats_.slots;
  return code;
}

Nat Machine::fresh_deferred(std::string label) { return new_slot(std::move(label)); }

void Machine::on_defined(Nat code) {
  Slot* s = slot(code);
  for (auto w : s->watchers)
    if (!entries_[w].value) enqueue(w);
  s->watchers.clear();
  s->watchers.shrink_to_fit();
  bump_collapse_epoch();
}

void Machine::define_deferred(Nat code, Nat program_code) {
  Nat at = now_;
  define_deferred(code, Metered([this, program_code, at](Nat x, Nat fuel) -> std::optional<Nat> {
    if (fuel <= at) return std::nullopt;
    Nat f = fuel - at;
    return run(program_code, x, f, 1);
  }));
}

void Machine::define_deferred(Nat code, Metered fn) {
  Slot* s = slot(code);
  if (!s) throw Error("not a deferred index: " + std::to_string(code));
  if (s->kind != SlotKind::Undefined) throw DoubleDefinition("deferred index " + std::to_string(code) + " defined twice");
  s->kind = SlotKind::Metered;
  s->metered = std::make_shared<const Metered>(std::move(fn));
  s->defined_at = now_;
  ++s->definitions;
  on_defined(code);
}

void Machine::define_deferred(Nat code, Behavior behavior) {
  Slot* s = slot(code);
  if (!s) throw Error("not a deferred index: " + std::to_string(code));
  if (s->kind != SlotKind::Undefined) throw DoubleDefinition("deferred index " + std::to_string(code) + " defined twice");
  s->kind = SlotKind::Dynamic;
  s->dynamic = std::make_shared<const Behavior>(std::move(behavior));
  s->defined_at = now_;
  ++s->definitions;
  on_defined(code);
}

Nat Machine::define_native(std::function<std::optional<Nat>(Nat)> fn, std::string label) {
  return define_metered([fn = std::move(fn)](Nat x, Nat fuel) -> std::optional<Nat> {
    if (fuel == 0) return std::nullopt;
    return fn(x);
  }, std::move(label));
}

Nat Machine::define_metered(Metered fn, std::string label) {
  Nat code = new_slot(std::move(label));
  Slot& s = slots_[code / 4];
  s.kind = SlotKind::Metered;
  s.metered = std::make_shared<const Metered>(std::move(fn));
  s.defined_at = now_;
  s.definitions = 1;
  return code;
}

Nat Machine::define_dynamic(Behavior behavior, std::string label) {
  Nat code = new_slot(std::move(label));
  Slot& s = slots_[code / 4];
  s.kind = SlotKind::Dynamic;
  s.dynamic = std::make_shared<const Behavior>(std::move(behavior));
  s.defined_at = now_;
  s.definitions = 1;
  return code;
}

bool Machine::is_deferred(Nat code) const { return slot(code) != nullptr; }

bool Machine::is_defined(Nat code) const {
  const Slot* s = slot(code);
  return s && s->kind != SlotKind::Undefined;
}

std::optional<Nat> Machine::defined_at(Nat code) const {
  const Slot* s = slot(code);
  if (!s || s->kind == SlotKind::Undefined) return std::nullopt;
  return s->defined_at;
}

const std::string& Machine::label(Nat code) const {
  static const std::string empty;
  const Slot* s = slot(code);
  return s ? s->label : empty;
}

std::size_t Machine::definition_count(Nat code) const {
  const Slot* s = slot(code);
  return s ? s->definitions : 0;
}

// ---------------------------------------------------------------------------

std::uint32_t Machine::entry(Nat code, Nat x) {
  std::uint32_t id;
  bool fits = true;
  Nat key = 0;
  try {
    key = pair(code, x);
  } catch (const ArithmeticOverflow&) {
    fits = false;
  }
  if (fits) {
    auto it = entry_index_.find(key);
    if (it != entry_index_.end()) return it->second;
  } else {
    auto it = entry_index_wide_.find({code, x});
    if (it != entry_index_wide_.end()) return it->second;
  }
  id = static_cast<std::uint32_t>(entries_.size());
  entries_.push_back(Entry{code, x, std::nullopt, kNever, 0, false, false, false, false, {}});
  entries_.back().earliest = in_tick_ ? now_ : now_ + 1;
  if (fits)
    entry_index_.emplace(key, id);
  else
    entry_index_wide_.emplace(std::make_pair(code, x), id);
  ++stats_.entries;
  if (in_tick_)
    evaluate(id);
  else
    enqueue(id);
  return id;
}

void Machine::enqueue(std::uint32_t id) {
  Entry& e = entries_[id];
  if (e.queued || e.value) return;
  e.queued = true;
  next_work_.push_back(id);
}

void Machine::depend(std::uint32_t on) {
  if (current_.empty()) return;
  std::uint32_t cur = current_.back();
  if (cur == on) return;
  auto& deps = entries_[on].dependents;
  if (!deps.empty() && deps.back() == cur) return;
  deps.push_back(cur);
}

void Machine::evaluate(std::uint32_t id) {
  {
    Entry& e = entries_[id];
    if (e.value || e.pending) return;
    e.is_volatile = false;
  }
  auto behavior = slots_[entries_[id].code / 4].dynamic;
  Nat x = entries_[id].x;
  current_.push_back(id);
  Ctx ctx(*this, now_);
  std::optional<Nat> r;
  try {
    r = (*behavior)(x, ctx);
  } catch (...) {
    current_.pop_back();
    throw;
  }
  current_.pop_back();
  ++stats_.evaluations;
  Entry& e = entries_[id];
  if (r) {
    e.pending = true;
    pending_.emplace_back(id, *r);
  } else if (e.is_volatile) {
    volatile_.push_back(id);
  }
}

void Machine::tick() {
  if (in_tick_) throw Error("tick() called from inside a tick");
  ++now_;
  ++stats_.ticks;
  in_tick_ = true;
  std::vector<std::uint32_t> work;
  work.swap(next_work_);
  work.insert(work.end(), volatile_.begin(), volatile_.end());
  volatile_.clear();
  while (!scheduled_.empty() && scheduled_.begin()->first <= now_) {
    auto& v = scheduled_.begin()->second;
    work.insert(work.end(), v.begin(), v.end());
    scheduled_.erase(scheduled_.begin());
  }
  std::sort(work.begin(), work.end());
  work.erase(std::unique(work.begin(), work.end()), work.end());
  for (auto id : work) entries_[id].queued = false;
  try {
    for (auto id : work) evaluate(id);
  } catch (...) {
    in_tick_ = false;
    throw;
  }
  in_tick_ = false;
  auto done = std::move(pending_);
  pending_.clear();
  bool self_change = false;
  for (auto [id, v] : done) {
    Entry& e = entries_[id];
    e.value = v;
    e.stamp = now_;
    e.pending = false;
    for (auto d : e.dependents) enqueue(d);
    e.dependents.clear();
    e.dependents.shrink_to_fit();
    if (e.code == e.x || collapse_codes_.count(e.code)) self_change = true;
  }
  if (self_change) bump_collapse_epoch();
}

void Machine::bump_collapse_epoch() {
  ++collapse_epoch_;
  for (auto w : collapse_watchers_) {
    entries_[w].collapse_watch = false;
    enqueue(w);
  }
  collapse_watchers_.clear();
}

void Machine::advance_to(Nat stage) {
  while (now_ < stage) {
    if (next_work_.empty() && volatile_.empty()) {
      if (scheduled_.empty() || scheduled_.begin()->first > stage) {
        now_ = stage;
        return;
      }
      Nat next = scheduled_.begin()->first;
      if (next > now_ + 1) now_ = next - 1;
    }
    tick();
  }
}

bool Machine::quiescent() const { return next_work_.empty() && volatile_.empty() && scheduled_.empty(); }

std::optional<Nat> Machine::next_scheduled() const {
  if (scheduled_.empty()) return std::nullopt;
  return scheduled_.begin()->first;
}

void Machine::poke(Nat code, Nat x) {
  std::optional<std::uint32_t> id;
  try {
    auto it = entry_index_.find(pair(code, x));
    if (it != entry_index_.end()) id = it->second;
  } catch (const ArithmeticOverflow&) {
    auto it = entry_index_wide_.find({code, x});
    if (it != entry_index_wide_.end()) id = it->second;
  }
  if (id) enqueue(*id);
}

void Machine::wake_current_at(Nat stage) {
  if (current_.empty() || stage == kNever) return;
  scheduled_[std::max(stage, now_ + 1)].push_back(current_.back());
}

void Machine::mark_current_volatile() {
  if (!current_.empty()) entries_[current_.back()].is_volatile = true;
}

void Machine::watch_collapses() {
  if (current_.empty()) return;
  auto id = current_.back();
  if (entries_[id].collapse_watch) return;
  entries_[id].collapse_watch = true;
  collapse_watchers_.push_back(id);
}

std::optional<std::uint32_t> Machine::current_entry() const {
  if (current_.empty()) return std::nullopt;
  return current_.back();
}

Nat Machine::next_change(Nat code, Nat x, Nat stage) {
  Slot* s = slot(code);
  if (s && s->kind != SlotKind::Metered) return kNever;
  bool touched = false;
  auto st = static_stamp(code, x, touched);
  if (touched) return stage + 1;
  if (st && st->first > stage) return st->first;
  return kNever;
}

std::optional<std::pair<Nat, Nat>> Machine::static_stamp(Nat code, Nat x, bool& touched) {
  Nat key = 0;
  bool keyed = true;
  try {
    key = pair(code, x);
  } catch (const ArithmeticOverflow&) {
    keyed = false;
  }
  if (keyed) {
    auto it = static_cache_.find(key);
    if (it != static_cache_.end()) {
      touched = false;
      if (it->second.first == kNever) return std::nullopt;
      return it->second;
    }
  }
  bool saved = touched_dynamic_;
  touched_dynamic_ = false;
  std::optional<std::pair<Nat, Nat>> found;
  Nat lo = 0, hi = 0;
  std::optional<Nat> hi_value;
  Nat budget = cfg_.fuel_budget + now_;
  for (Nat f = 1;; f = f * 2) {
    Nat cap = std::min(f, budget);
    Nat g = cap;
    auto r = run(code, x, g, 0);
    if (r) {
      hi = cap;
      hi_value = r;
      break;
    }
    lo = cap;
    if (cap >= budget) break;
  }
  if (hi_value) {
    while (hi - lo > 1) {
      Nat mid = lo + (hi - lo) / 2;
      Nat g = mid;
      auto r = run(code, x, g, 0);
      if (r) {
        hi = mid;
        hi_value = r;
      } else {
        lo = mid;
      }
    }
    found = std::make_pair(hi, *hi_value);
  }
  touched = touched_dynamic_;
  touched_dynamic_ = saved || touched;
  if (!touched && keyed) static_cache_.emplace(key, found ? *found : std::make_pair(kNever, Nat{0}));
  return found;
}

std::optional<Nat> Machine::value_by(Nat code, Nat x, Nat stage) {
  Slot* s = slot(code);
  if (s && s->kind == SlotKind::Dynamic) {
    touched_dynamic_ = true;
    std::uint32_t id = entry(code, x);
    depend(id);
    const Entry& e = entries_[id];
    if (e.value && e.stamp <= stage) return e.value;
    return std::nullopt;
  }
  if (s && s->kind == SlotKind::Undefined) {
    touched_dynamic_ = true;
    if (!current_.empty()) s->watchers.push_back(current_.back());
    return std::nullopt;
  }
  bool touched = false;
  auto st = static_stamp(code, x, touched);
  if (touched) {
    mark_current_volatile();
    Nat f = stage;
    return run(code, x, f, 0);
  }
  if (!st) return std::nullopt;
  if (st->first <= stage) return st->second;
  wake_current_at(st->first + 1);
  return std::nullopt;
}

std::optional<Nat> Machine::stamp(Nat code, Nat x) {
  Slot* s = slot(code);
  if (s && s->kind == SlotKind::Dynamic) {
    std::uint32_t id = entry(code, x);
    const Entry& e = entries_[id];
    if (e.value) return e.stamp;
    return std::nullopt;
  }
  if (s && s->kind == SlotKind::Undefined) return std::nullopt;
  bool touched = false;
  auto st = static_stamp(code, x, touched);
  if (!st || touched) return std::nullopt;
  return st->first;
}

}  // namespace prelat
