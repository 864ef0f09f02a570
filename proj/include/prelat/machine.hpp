#pragma once

#include <functional>
#include <memory>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "prelat/common.hpp"

namespace prelat {

// Codes are tagged by residue mod 4:
//   4k     program k of the arena (k past the arena end diverges)
//   4n+1   the constant program with value n
//   4z+2   smn(e,a) where z = pair(e,a)
//   4k+3   host slot k (deferred indices, native functions); unallocated slots diverge
inline Nat const_code(Nat n) { return checked_add(checked_mul(n, 4), 1); }
inline Nat smn_code(Nat e, Nat a) { return checked_add(checked_mul(pair(e, a), 4), 2); }

struct EvalOutcome {
  bool converged = false;
  Nat value = 0;
  static EvalOutcome out_of_fuel() { return {}; }
  static EvalOutcome done(Nat v) { return {true, v}; }
  friend bool operator==(const EvalOutcome& a, const EvalOutcome& b) {
    return a.converged == b.converged && (!a.converged || a.value == b.value);
  }
};

// Program syntax tree of the miniature language.
enum class Op : std::uint8_t {
  Var,     // de Bruijn variable; var 0 at top level is the input x
  Lit,     // natural literal
  Pair, Fst, Snd,
  Add, Sub, Mul, Eq, Lt,
  If,      // (if c t e): t when c != 0
  Call,    // (call f a): reflective application of code f to a
  Loop,    // (loop n init body): body sees var0 = acc, var1 = i; n iterations
  Search,  // (search body): least y with body(var0 = y) = 0
  ConstCode,  // (const-code a): the code of the constant program a
  SmnCode,    // (smn-code e a)
  Diverge,
};

struct Program {
  struct Node {
    Op op;
    Nat lit;
    std::uint32_t a, b, c;
  };
  std::vector<Node> nodes;  // root is the last node
};

Program parse_program(std::string_view text);
// Identifiers other than x are looked up in `names` and read as literals.
Program parse_program(std::string_view text, const std::map<std::string, Nat>& names);
std::string print_program(const Program& p);

class Machine;

// Facts visible to a dynamic behavior evaluated at stage `stage`: everything settled at stage-1.
class Ctx {
 public:
  Ctx(Machine& m, Nat stage) : m_(m), stage_(stage) {}
  Nat stage() const { return stage_; }
  Nat fact_stage() const { return stage_ == 0 ? 0 : stage_ - 1; }
  std::optional<Nat> value(Nat code, Nat x);
  void wake_at(Nat stage);
  void mark_volatile();
  Machine& machine() { return m_; }

 private:
  Machine& m_;
  Nat stage_;
};

using Behavior = std::function<std::optional<Nat>(Nat x, Ctx& ctx)>;
// Fuel-metered pure function: result at fuel f, monotone in f.
using Metered = std::function<std::optional<Nat>(Nat x, Nat fuel)>;

struct MachineConfig {
  Nat fuel_budget = 4096;  // search bound for the first converging fuel, beyond the current stage
  std::size_t max_depth = 10000;
};

struct MachineStats {
  std::size_t ticks = 0, evaluations = 0, entries = 0, slots = 0;
};

class Machine {
 public:
  explicit Machine(MachineConfig cfg = {});
  Machine(const Machine&) = delete;
  Machine& operator=(const Machine&) = delete;

  // Programs.
  Nat add_program(const Program& p);
  Nat add_program(std::string_view text) { return add_program(parse_program(text)); }
  const Program* program(Nat code) const;

  // Evaluation with a step budget. Dynamic host entries are bounded by the clock as well.
  EvalOutcome eval(Nat e, Nat x, Nat fuel);
  Nat smn(Nat e, Nat a) const { return smn_code(e, a); }
  Nat kleene_fixpoint(Nat t);
  std::vector<Nat> enumerate_W(Nat e, Nat stage);
  bool in_W(Nat e, Nat x, Nat stage);

  // Host slots and deferred indices.
  Nat fresh_deferred(std::string label = {});
  void define_deferred(Nat code, Nat program_code);
  void define_deferred(Nat code, Metered fn);
  void define_deferred(Nat code, Behavior behavior);
  Nat define_native(std::function<std::optional<Nat>(Nat)> fn, std::string label = {});
  Nat define_metered(Metered fn, std::string label = {});
  Nat define_dynamic(Behavior behavior, std::string label = {});
  bool is_deferred(Nat code) const;
  bool is_defined(Nat code) const;
  std::optional<Nat> defined_at(Nat code) const;
  const std::string& label(Nat code) const;
  std::size_t definition_count(Nat code) const;

  // Stage clock.
  Nat now() const { return now_; }
  Nat settled_stage() const { return in_tick_ ? now_ - 1 : now_; }
  bool in_tick() const { return in_tick_; }
  void tick();
  void advance_to(Nat stage);
  bool quiescent() const;
  // Earliest stage with a scheduled re-evaluation, if any.
  std::optional<Nat> next_scheduled() const;
  // Bumped by every definition and by every convergence of a self-application or of a collapse code.
  Nat collapse_epoch() const { return collapse_epoch_; }
  void mark_collapse_code(Nat code) { collapse_codes_.insert(code); }

  // Has phi_code(x) converged by `stage`? Registers dependencies of the entry being evaluated.
  std::optional<Nat> value_by(Nat code, Nat x, Nat stage);
  // First stage at which phi_code(x) converges, when it is already known.
  std::optional<Nat> stamp(Nat code, Nat x);

  // Re-evaluate the entry for (code,x) on the next tick, if it exists and has not converged.
  void poke(Nat code, Nat x);
  void wake_current_at(Nat stage);
  void mark_current_volatile();
  void watch_collapses();
  bool evaluating() const { return !current_.empty(); }
  std::optional<std::uint32_t> current_entry() const;
  void wake_entry(std::uint32_t id) { enqueue(id); }
  // Earliest stage after `stage` at which value_by(code,x,·) may change without an epoch bump:
  // the stamp for static codes, stage+1 for codes that are only approximated, kNever otherwise.
  Nat next_change(Nat code, Nat x, Nat stage);

  const MachineConfig& config() const { return cfg_; }
  const MachineStats& stats() const { return stats_; }

 private:
  friend struct Interpreter;
  enum class SlotKind : std::uint8_t { Undefined, Metered, Dynamic };
  struct Slot {
    SlotKind kind = SlotKind::Undefined;
    Nat defined_at = 0;
    std::size_t definitions = 0;
    std::shared_ptr<const Metered> metered;
    std::shared_ptr<const Behavior> dynamic;
    std::string label;
    std::vector<std::uint32_t> watchers;
  };
  struct Entry {
    Nat code, x;
    std::optional<Nat> value;
    Nat stamp = kNever;
    Nat earliest = 0;
    bool queued = false;
    bool pending = false;
    bool is_volatile = false;
    bool collapse_watch = false;
    std::vector<std::uint32_t> dependents;
  };

  Slot* slot(Nat code);
  const Slot* slot(Nat code) const;
  Nat new_slot(std::string label);
  void on_defined(Nat code);
  void bump_collapse_epoch();
  std::uint32_t entry(Nat code, Nat x);
  void evaluate(std::uint32_t id);
  void enqueue(std::uint32_t id);
  void depend(std::uint32_t on);
  std::optional<std::pair<Nat, Nat>> static_stamp(Nat code, Nat x, bool& touched_dynamic);
  std::optional<Nat> run(Nat e, Nat x, Nat& fuel, std::size_t depth);

  MachineConfig cfg_;
  std::vector<Program> arena_;
  std::unordered_map<std::string, Nat> arena_index_;
  std::vector<Slot> slots_;
  std::vector<Entry> entries_;
  std::unordered_map<Nat, std::uint32_t> entry_index_;  // keyed by pair(code,x) when it fits
  std::map<std::pair<Nat, Nat>, std::uint32_t> entry_index_wide_;
  std::unordered_map<Nat, std::pair<Nat, Nat>> static_cache_;  // pair(code,x) -> (stamp, value)
  std::vector<std::uint32_t> current_;
  std::vector<std::uint32_t> next_work_;
  std::vector<std::uint32_t> volatile_;
  std::vector<std::uint32_t> collapse_watchers_;
  std::set<Nat> collapse_codes_;
  std::map<Nat, std::vector<std::uint32_t>> scheduled_;
  std::vector<std::pair<std::uint32_t, Nat>> pending_;
  Nat now_ = 0;
  bool in_tick_ = false;
  bool touched_dynamic_ = false;
  Nat collapse_epoch_ = 0;
  MachineStats stats_;
};

}  // namespace prelat
