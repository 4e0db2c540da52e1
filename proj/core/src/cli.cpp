#include "scopf/cli.hpp"

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scopf/case.hpp"
#include "scopf/evaluation.hpp"
#include "scopf/run.hpp"
#include "scopf/screening.hpp"

namespace scopf {

namespace {

struct CliOptions {
  std::string case_path;
  RunConfig run;
  std::string coupling = "bigm";
};

void add_common(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--case", opt.case_path, "network case file (json)")->required();
  cmd->add_option("--out", opt.run.out_dir, "output directory");
}

void add_solver(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--workers", opt.run.workers, "solver threads")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--time-limit", opt.run.time_limit, "coordination budget, seconds");
  cmd->add_option("--epsilon", opt.run.eps, "smoothing width");
  cmd->add_option("--mu", opt.run.mu, "limit-detection tolerance");
  cmd->add_option("--beta0", opt.run.admm.beta0, "initial consensus penalty");
  cmd->add_option("--tau", opt.run.admm.tau, "penalty ratio rho/beta");
  cmd->add_option("--coupling", opt.coupling, "response coupling form")
      ->check(CLI::IsMember({"smoothed", "bigm"}));
  cmd->add_option("--seed", opt.run.hooks.jitter_seed, "worker timing jitter seed");
  cmd->add_option("--per-ctg-seconds", opt.run.per_ctg_seconds,
                  "stage-two time allowance per contingency");
  cmd->add_option("--crash-id", opt.run.hooks.crash_ids,
                  "contingency ids whose first solve attempt dies (testing)");
  cmd->add_option("--writer-delay-ms", opt.run.hooks.writer_delay_ms,
                  "artificial writer latency (testing)");
}

NetworkCase load_or_fail(const std::string& path) { return load_case(path); }

int do_validate(const CliOptions& opt) {
  NetworkCase nc = load_or_fail(opt.case_path);
  std::printf("ok %s buses=%zu generators=%zu branches=%zu contingencies=%zu\n",
              nc.name.c_str(), nc.buses.size(), nc.generators.size(),
              nc.lines.size() + nc.transformers.size(), nc.contingencies.size());
  return 0;
}

int do_rank(const CliOptions& opt) {
  NetworkCase nc = load_or_fail(opt.case_path);
  StateVector base = read_base_solution(out_path(opt.run.out_dir, "base_solution.txt"), nc);
  auto ranking = rank_contingencies(nc, base);
  write_ranking(out_path(opt.run.out_dir, "ranking.txt"), ranking);
  for (const auto& r : ranking)
    std::printf("%s %.17g\n", r.id.c_str(), r.severity);
  return 0;
}

int do_report(const CliOptions& opt) {
  NetworkCase nc = load_or_fail(opt.case_path);
  ReportResult rep = run_report(nc, opt.run.out_dir);
  std::printf("objective %.17g\n", rep.objective);
  std::printf("base_cost %.17g\n", rep.base_cost);
  std::printf("max_base_residual %.3g\n", rep.max_base_residual);
  std::printf("max_penalty_err %.3g\n", rep.max_penalty_err);
  std::printf("%s\n", rep.ok ? "consistent" : ("INCONSISTENT: " + rep.detail).c_str());
  return rep.ok ? 0 : 1;
}

RunConfig finish_config(CliOptions& opt) {
  opt.run.coupling =
      opt.coupling == "smoothed" ? CouplingMode::Smoothed : CouplingMode::BigM;
  return opt.run;
}

int do_phase1(CliOptions& opt) {
  NetworkCase nc = load_or_fail(opt.case_path);
  RunConfig cfg = finish_config(opt);
  RunLog log(out_path(cfg.out_dir, "run.log"));
  Phase1Result r = run_phase1(nc, cfg, log);
  std::printf("phase1 %s selected=%d rounds=%d consensus=%.3g\n",
              r.ran_admm ? (r.admm.converged ? "consensus" : "budget") : "base_only",
              r.selected, r.admm.rounds, r.admm.consensus);
  return 0;
}

int do_phase2(CliOptions& opt) {
  NetworkCase nc = load_or_fail(opt.case_path);
  RunConfig cfg = finish_config(opt);
  StateVector base = read_base_solution(out_path(cfg.out_dir, "base_solution.txt"), nc);
  RunLog log(out_path(cfg.out_dir, "run.log"));
  Phase2Result r = run_phase2(nc, base, cfg, log);
  std::printf("phase2 solved=%d fallbacks=%d requeued=%d%s\n", r.solved, r.fallbacks,
              r.requeued, r.deadline_hit ? " deadline" : "");
  return 0;
}

int do_full(CliOptions& opt) {
  NetworkCase nc = load_or_fail(opt.case_path);
  RunConfig cfg = finish_config(opt);
  RunLog log(out_path(cfg.out_dir, "run.log"));
  FullResult r = run_full(nc, cfg, log);
  std::printf("objective %.17g\n", r.objective);
  std::printf("phase1 %s selected=%d\n",
              r.p1.ran_admm ? (r.p1.admm.converged ? "consensus" : "budget")
                            : "base_only",
              r.p1.selected);
  std::printf("phase2 solved=%d fallbacks=%d requeued=%d\n", r.p2.solved,
              r.p2.fallbacks, r.p2.requeued);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"two-stage security-constrained dispatch"};
  app.require_subcommand(1);
  CliOptions opt;

  auto* validate = app.add_subcommand("validate", "load a case and check it");
  add_common(validate, opt);

  auto* rank = app.add_subcommand("rank", "order contingencies by stranded penalty");
  add_common(rank, opt);

  auto* p1 = app.add_subcommand("phase1", "base dispatch and coordination");
  add_common(p1, opt);
  add_solver(p1, opt);

  auto* p2 = app.add_subcommand("phase2", "per-contingency solutions");
  add_common(p2, opt);
  add_solver(p2, opt);

  auto* full = app.add_subcommand("full", "both stages");
  add_common(full, opt);
  add_solver(full, opt);

  auto* report = app.add_subcommand("report", "recompute and cross-check outputs");
  add_common(report, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (validate->parsed()) return do_validate(opt);
    if (rank->parsed()) return do_rank(opt);
    if (p1->parsed()) return do_phase1(opt);
    if (p2->parsed()) return do_phase2(opt);
    if (full->parsed()) return do_full(opt);
    if (report->parsed()) return do_report(opt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}

}  // namespace scopf
