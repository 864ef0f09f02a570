#pragma once

#include <vector>

#include "prelat/harness.hpp"

namespace prelat {

// OpenMP kernels; each has a serial twin computing the same result in the same order.

struct OracleSweep {
  std::size_t terms = 0, classes = 0, pairs = 0, disagreements = 0;
  friend bool operator==(const OracleSweep&, const OracleSweep&) = default;
};

// nf_leq against the boolean-assignment oracle: every pair of normal-form classes, and every
// term against its class representative in both directions.
OracleSweep nf_oracle_sweep_serial(const std::vector<Term>& terms);
OracleSweep nf_oracle_sweep_parallel(const std::vector<Term>& terms);

struct MeetJoinSweep {
  std::size_t intervals = 0, pairs = 0, brute_pairs = 0, mismatches = 0;
  friend bool operator==(const MeetJoinSweep&, const MeetJoinSweep&) = default;
};

// meet_join_pairs(a,b) for every a <= b over ctx, against truth-table brute force.
MeetJoinSweep meet_join_sweep_serial(const std::vector<Nat>& ctx);
MeetJoinSweep meet_join_sweep_parallel(const std::vector<Nat>& ctx);

// Independent scenarios; an escaping error becomes a failed "completed" verdict.
std::vector<Report> run_batch_serial(const std::vector<Scenario>& scenarios);
std::vector<Report> run_batch_parallel(const std::vector<Scenario>& scenarios);

}  // namespace prelat
