#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "prelat/harness.hpp"
#include "prelat/oracles.hpp"

using namespace prelat;

namespace {

constexpr int kPass = 0, kFail = 1, kUsage = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioParse("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string assignment_text(const std::map<Nat, bool>& sigma) {
  std::string out;
  for (auto& [g, v] : sigma) out += (out.empty() ? "" : " ") + std::string("x") + std::to_string(g) + "=" + (v ? "1" : "0");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prelat: computable pre-lattice constructions and oracles"};
  app.require_subcommand(1);

  std::string scenario_path, trace_out;
  Nat budget = 0;
  bool json_out = false;
  auto* run_cmd = app.add_subcommand("run", "run a scenario file and print its report");
  run_cmd->add_option("scenario", scenario_path, "scenario JSON")->required();
  run_cmd->add_option("--trace", trace_out, "write trace events as JSON lines");
  run_cmd->add_option("--budget", budget, "override the stage budget");
  run_cmd->add_flag("--json", json_out, "print the report as JSON");

  std::string lhs, rhs;
  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force oracles");
  oracle_cmd->require_subcommand(1);
  auto* nf_cmd = oracle_cmd->add_subcommand("nf-leq", "decide s <= t in the free distributive lattice");
  nf_cmd->add_option("s", lhs, "term, e.g. (meet (gen 1) (gen 2))")->required();
  nf_cmd->add_option("t", rhs, "term")->required();

  std::string suite = "all";
  auto* check_cmd = app.add_subcommand("check", "run a desk-scale self-check suite");
  check_cmd->add_option("--suite", suite, "lattice, ce, constructions or all")
      ->check(CLI::IsMember({"lattice", "ce", "constructions", "all"}));

  std::string trace_in, replay_scenario;
  auto* replay_cmd = app.add_subcommand("replay", "validate a trace; with --scenario, re-run and compare");
  replay_cmd->add_option("trace", trace_in, "trace JSON lines")->required();
  replay_cmd->add_option("--scenario", replay_scenario, "scenario that produced the trace");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*run_cmd) {
      Scenario s = load_scenario(scenario_path);
      RunOptions opts;
      opts.trace_path = trace_out;
      if (run_cmd->count("--budget")) opts.stage_budget = budget;
      Report r = run(s, opts);
      std::cout << (json_out ? r.json() + "\n" : r.text());
      return r.ok() ? kPass : kFail;
    }
    if (*nf_cmd) {
      Term s = parse_term(lhs), t = parse_term(rhs);
      bool fast = nf_leq(normalize(s), normalize(t));
      auto brute = oracle_nf_leq(s, t);
      std::cout << print_nf(normalize(s)) << (fast ? " <= " : " </= ") << print_nf(normalize(t)) << '\n';
      if (!brute.holds) std::cout << "witness: " << assignment_text(brute.witness) << '\n';
      if (fast != brute.holds) {
        std::cout << "normal-form order and brute force disagree\n";
        return kFail;
      }
      return kPass;
    }
    if (*check_cmd) {
      Report r = run_suite(suite);
      std::cout << r.text();
      return r.ok() ? kPass : kFail;
    }
    if (*replay_cmd) {
      std::string text = read_file(trace_in);
      ReplayResult res = replay_scenario.empty() ? replay_trace(text) : reproduce(load_scenario(replay_scenario), text);
      std::cout << res.events << " events, " << res.certified.size() << " certified equivalences\n";
      for (auto& [k, n] : res.kinds) std::cout << "  " << k << " " << n << '\n';
      for (auto& p : res.problems) std::cout << "problem: " << p << '\n';
      return res.ok() ? kPass : kFail;
    }
  } catch (const ScenarioParse& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kUsage;
  } catch (const MalformedTerm& e) {
    std::cerr << "malformed term: " << e.what() << '\n';
    return kUsage;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return kFail;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFail;
  }
  return kUsage;
}
