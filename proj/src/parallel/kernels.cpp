#include <map>

#include <omp.h>

#include "prelat/parallel.hpp"

namespace prelat {

namespace {

struct Classes {
  std::vector<NormalForm> forms;   // per term
  std::vector<std::size_t> rep;    // per term, index of its class representative term
  std::vector<std::size_t> reps;   // representative term per class
};

Classes classify(const std::vector<Term>& terms, bool parallel) {
  Classes c;
  c.forms.resize(terms.size());
  long n = static_cast<long>(terms.size());
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 256)
    for (long i = 0; i < n; ++i) c.forms[i] = normalize(terms[i]);
  } else {
    for (long i = 0; i < n; ++i) c.forms[i] = normalize(terms[i]);
  }
  std::map<NormalForm, std::size_t> first;
  c.rep.resize(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    auto [it, fresh] = first.emplace(c.forms[i], i);
    if (fresh) c.reps.push_back(i);
    c.rep[i] = it->second;
  }
  return c;
}

bool agrees(const Term& s, const Term& t, const NormalForm& a, const NormalForm& b) {
  return nf_leq(a, b) == oracle_leq(s, t).holds;
}

OracleSweep sweep(const std::vector<Term>& terms, bool parallel) {
  Classes c = classify(terms, parallel);
  OracleSweep out;
  out.terms = terms.size();
  out.classes = c.reps.size();
  long k = static_cast<long>(c.reps.size());
  long n = static_cast<long>(terms.size());
  std::size_t bad = 0;
  auto pair_check = [&](long idx) {
    std::size_t i = c.reps[idx / k], j = c.reps[idx % k];
    return agrees(terms[i], terms[j], c.forms[i], c.forms[j]) ? 0 : 1;
  };
  auto term_check = [&](long i) {
    std::size_t r = c.rep[i];
    int miss = 0;
    if (!agrees(terms[i], terms[r], c.forms[i], c.forms[r])) ++miss;
    if (!agrees(terms[r], terms[i], c.forms[r], c.forms[i])) ++miss;
    return miss;
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 512) reduction(+ : bad)
    for (long idx = 0; idx < k * k; ++idx) bad += pair_check(idx);
#pragma omp parallel for schedule(dynamic, 512) reduction(+ : bad)
    for (long i = 0; i < n; ++i) bad += term_check(i);
  } else {
    for (long idx = 0; idx < k * k; ++idx) bad += pair_check(idx);
    for (long i = 0; i < n; ++i) bad += term_check(i);
  }
  out.pairs = static_cast<std::size_t>(k * k + 2 * n);
  out.disagreements = bad;
  return out;
}

// Truth table of a normal form over ctx: bit m set when assignment m makes it true.
Nat table(const NormalForm& x, const std::vector<Nat>& ctx) {
  Term t = nf_to_term(x);
  Nat out = 0;
  for (Nat m = 0; m < (Nat{1} << ctx.size()); ++m) {
    std::map<Nat, bool> sigma;
    for (std::size_t i = 0; i < ctx.size(); ++i) sigma[ctx[i]] = m >> i & 1;
    if (eval_boolean(t, sigma)) out |= Nat{1} << m;
  }
  return out;
}

MeetJoinSweep meet_join(const std::vector<Nat>& ctx, bool parallel) {
  auto elems = free_distributive_elements(ctx);
  std::vector<Nat> tables(elems.size());
  for (std::size_t i = 0; i < elems.size(); ++i) tables[i] = table(elems[i], ctx);
  std::vector<std::pair<std::size_t, std::size_t>> intervals;
  for (std::size_t a = 0; a < elems.size(); ++a)
    for (std::size_t b = 0; b < elems.size(); ++b)
      if ((tables[a] & ~tables[b]) == 0) intervals.emplace_back(a, b);
  long n = static_cast<long>(intervals.size());
  std::vector<MeetJoinSweep> per(intervals.size());
  auto one = [&](long idx) {
    auto [a, b] = intervals[idx];
    MeetJoinSweep s;
    s.intervals = 1;
    std::map<std::pair<Nat, Nat>, int> seen;
    for (std::size_t x = 0; x < elems.size(); ++x)
      for (std::size_t y = 0; y < elems.size(); ++y)
        if ((tables[x] & tables[y]) == tables[a] && (tables[x] | tables[y]) == tables[b]) {
          ++s.brute_pairs;
          seen[{tables[x], tables[y]}] += 1;
        }
    for (auto& [x, y] : meet_join_pairs(elems[a], elems[b])) {
      ++s.pairs;
      if (--seen[{table(x, ctx), table(y, ctx)}] != 0) ++s.mismatches;
    }
    for (auto& [key, left] : seen)
      if (left > 0) ++s.mismatches;
    return s;
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (long i = 0; i < n; ++i) per[i] = one(i);
  } else {
    for (long i = 0; i < n; ++i) per[i] = one(i);
  }
  MeetJoinSweep out;
  for (auto& s : per) {
    out.intervals += s.intervals;
    out.pairs += s.pairs;
    out.brute_pairs += s.brute_pairs;
    out.mismatches += s.mismatches;
  }
  return out;
}

Report guarded_run(const Scenario& s) {
  try {
    Report r = run(s);
    r.add("completed", true);
    return r;
  } catch (const std::exception& e) {
    Report r;
    r.name = s.name;
    r.add("completed", false, e.what());
    return r;
  }
}

}  // namespace

OracleSweep nf_oracle_sweep_serial(const std::vector<Term>& terms) { return sweep(terms, false); }
OracleSweep nf_oracle_sweep_parallel(const std::vector<Term>& terms) { return sweep(terms, true); }

MeetJoinSweep meet_join_sweep_serial(const std::vector<Nat>& ctx) { return meet_join(ctx, false); }
MeetJoinSweep meet_join_sweep_parallel(const std::vector<Nat>& ctx) { return meet_join(ctx, true); }

std::vector<Report> run_batch_serial(const std::vector<Scenario>& scenarios) {
  std::vector<Report> out;
  for (auto& s : scenarios) out.push_back(guarded_run(s));
  return out;
}

std::vector<Report> run_batch_parallel(const std::vector<Scenario>& scenarios) {
  std::vector<Report> out(scenarios.size());
  long n = static_cast<long>(scenarios.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) out[i] = guarded_run(scenarios[i]);
  return out;
}

}  // namespace prelat
