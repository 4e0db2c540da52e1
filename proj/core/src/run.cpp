#include "scopf/run.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "scopf/acopf_builder.hpp"
#include "scopf/evaluation.hpp"
#include "scopf/pool.hpp"
#include "scopf/recourse.hpp"

namespace scopf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr const char* kBaseFile = "base_solution.txt";
constexpr const char* kCtgFile = "ctg_solutions.txt";
constexpr const char* kRankFile = "ranking.txt";
constexpr const char* kDiagFile = "diagnostics.jsonl";

}  // namespace

std::string out_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  if (dir.back() == '/') return dir + name;
  return dir + "/" + name;
}

Phase1Result run_phase1(const NetworkCase& nc, const RunConfig& cfg, RunLog& log) {
  const auto t0 = Clock::now();
  Phase1Result out;

  // stand-alone base dispatch to seed screening and coordination
  AcopfBuilder b(nc, 0);
  b.add_balance();
  b.add_branch_limits();
  b.add_generation_cost(1.0);
  b.add_penalty_epigraph(nc.delta_weight);
  BuiltProblem bp = b.take();
  StateVector sv0 = AcopfBuilder::flat_start(nc, bp.topo);
  Eigen::VectorXd x0 = bp.initial_point(sv0);
  auto res = nlp::solve(bp.prob, x0, cfg.nlp);
  StateVector base = (res.status != nlp::SolveStatus::NumericalFailure && res.x.allFinite())
                         ? bp.state_of(res.x)
                         : sv0;
  absorb_residuals(nc, bp.topo, base);
  write_base_solution(out_path(cfg.out_dir, kBaseFile), nc, base);
  log.event("phase1_base", {{"status", to_string(res.status)}},
            {{"objective", res.objective}, {"elapsed", seconds_since(t0)}});

  out.ranking = rank_contingencies(nc, base);
  write_ranking(out_path(cfg.out_dir, kRankFile), out.ranking);

  auto subset = select_subset(out.ranking, cfg.workers, static_cast<int>(nc.buses.size()));
  out.selected = static_cast<int>(subset.size());
  out.base = base;
  if (subset.empty()) {
    log.event("phase1_done", {{"mode", "base_only"}}, {});
    return out;
  }

  const double margin = std::min(60.0, cfg.time_limit / 2.0);
  const double budget = cfg.time_limit - margin - seconds_since(t0);
  if (budget <= 0.0) {
    log.event("phase1_done", {{"mode", "no_time_for_coordination"}}, {});
    return out;
  }

  std::vector<int> states;
  for (const auto& r : subset) states.push_back(r.contingency + 1);
  ScacopfBlocks blocks(nc, states, cfg.coupling, cfg.eps, cfg.nlp);
  AdmmConfig acfg = cfg.admm;
  acfg.time_limit = budget;
  TwoLevelAdmm admm(blocks, acfg);

  Eigen::VectorXd xinit(blocks.dim());
  blocks.base_problem().layout.pack(base, xinit.data());
  admm.init(xinit);

  if (cfg.workers > 1) {
    const int W = cfg.workers;
    admm.set_parallel([W](int n, const std::function<void(int)>& f) {
      std::atomic<int> next{0};
      std::vector<std::thread> ts;
      const int T = std::min(W, n);
      for (int t = 0; t < T; ++t)
        ts.emplace_back([&] {
          for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
        });
      for (auto& t : ts) t.join();
    });
  }

  const std::string diag = out_path(cfg.out_dir, kDiagFile);
  size_t diag_at = 0;
  auto round_cb = [&](const TwoLevelAdmm& a) {
    StateVector sv = blocks.base_state(a.x0());
    absorb_residuals(nc, blocks.base_problem().topo, sv);
    write_base_solution(out_path(cfg.out_dir, kBaseFile), nc, sv);
    append_diagnostics(diag, a.records(), diag_at);
    diag_at = a.records().size();
    log.event("round", {},
              {{"r", a.round_index()},
               {"consensus", a.consensus_residual()},
               {"L", a.alr_value()},
               {"beta", a.beta()},
               {"inner_total", a.total_inner()}});
  };
  out.admm = admm.run(round_cb);
  out.ran_admm = true;

  out.base = blocks.base_state(admm.x0());
  absorb_residuals(nc, blocks.base_problem().topo, out.base);
  write_base_solution(out_path(cfg.out_dir, kBaseFile), nc, out.base);
  log.event("phase1_done", {{"mode", out.admm.converged ? "consensus" : "budget"}},
            {{"rounds", out.admm.rounds},
             {"inner", out.admm.total_inner},
             {"consensus", out.admm.consensus},
             {"elapsed", seconds_since(t0)}});
  return out;
}

Phase2Result run_phase2(const NetworkCase& nc, const StateVector& base,
                        const RunConfig& cfg, RunLog& log) {
  const auto t0 = Clock::now();
  Phase2Result out;
  auto ranking = rank_contingencies(nc, base);
  write_ranking(out_path(cfg.out_dir, kRankFile), ranking);

  const int K = static_cast<int>(ranking.size());
  const std::string ctg_path = out_path(cfg.out_dir, kCtgFile);
  out.records.resize(K);
  std::vector<int> slot_of(nc.contingencies.size(), -1);
  for (int s = 0; s < K; ++s) {
    const int ci = ranking[s].contingency;
    slot_of[ci] = s;
    CtgRecord rec;
    rec.contingency = ci;
    rec.id = ranking[s].id;
    rec.sv = restrict_to_state(nc, base, ci + 1);
    rec.penalty = state_penalty(nc, StateTopology::make(nc, ci + 1), rec.sv);
    rec.path = "fallback";
    rec.ok = false;
    out.records[s] = std::move(rec);
  }
  write_ctg_solutions(ctg_path, nc, out.records);
  log.event("phase2_prewrite", {}, {{"contingencies", K}});
  if (K == 0) return out;

  // The writer owns the record array between here and finish().
  auto& records = out.records;
  SolutionWriter writer(
      [&](std::vector<CtgRecord>&& batch) {
        for (auto& rec : batch) records[slot_of[rec.contingency]] = std::move(rec);
        write_ctg_solutions(ctg_path, nc, records);
      },
      cfg.hooks.writer_delay_ms);

  RecourseOptions ro;
  ro.eps = cfg.eps;
  ro.mu = cfg.mu;
  ro.nlp = cfg.nlp;
  ro.nlp.time_limit = cfg.per_ctg_seconds * cfg.workers;

  WorkerPool pool(std::max(1, cfg.workers), [&](const TaskMessage& task, int) {
    ResultMessage res;
    if (cfg.hooks.jitter_seed != 0) {
      std::mt19937 rng(cfg.hooks.jitter_seed ^
                       (static_cast<unsigned>(task.seq) * 2654435761u + task.attempt));
      std::this_thread::sleep_for(
          std::chrono::microseconds(std::uniform_int_distribution<int>(0, 5000)(rng)));
    }
    const std::string& id = nc.contingencies[task.contingency].id;
    if (task.attempt == 0 &&
        std::find(cfg.hooks.crash_ids.begin(), cfg.hooks.crash_ids.end(), id) !=
            cfg.hooks.crash_ids.end()) {
      res.crashed = true;
      return res;
    }
    const auto ts = Clock::now();
    RecourseResult rr = solve_contingency(nc, base, task.contingency + 1, ro);
    res.record.contingency = task.contingency;
    res.record.id = id;
    res.record.sv = std::move(rr.sv);
    res.record.penalty = rr.penalty;
    res.record.path = rr.path;
    res.record.ok = rr.ok;
    res.wall = seconds_since(ts);
    return res;
  });

  for (int s = 0; s < K; ++s) {
    pool.submit({s, ranking[s].contingency, 0});
    log.event("dispatch", {{"ctg", ranking[s].id}}, {{"seq", s}});
  }

  const double deadline = cfg.per_ctg_seconds * K;
  int remaining = K;
  while (remaining > 0) {
    const double left = deadline - seconds_since(t0);
    if (left <= 0.0) {
      out.deadline_hit = true;
      log.event("phase2_deadline", {}, {{"unfinished", remaining}});
      break;
    }
    auto r = pool.wait_result(left);
    if (!r) {
      out.deadline_hit = true;
      log.event("phase2_deadline", {}, {{"unfinished", remaining}});
      break;
    }
    const std::string& id = nc.contingencies[r->contingency].id;
    if (r->crashed) {
      if (r->attempt == 0) {
        ++out.requeued;
        log.event("requeue", {{"ctg", id}}, {});
        pool.submit({r->seq, r->contingency, 1});
        continue;
      }
      --remaining;
      ++out.fallbacks;
      log.event("crash_fallback", {{"ctg", id}}, {});
      continue;
    }
    --remaining;
    ++out.solved;
    log.event("result", {{"ctg", id}, {"path", r->record.path}},
              {{"penalty", r->record.penalty}, {"wall", r->wall}});
    writer.offer(std::move(r->record));
  }
  pool.stop();
  writer.finish();
  out.fallbacks += remaining;  // deadline leftovers keep their fallback records

  write_ctg_solutions(ctg_path, nc, records);  // canonical final form
  log.event("phase2_done", {},
            {{"solved", out.solved},
             {"fallbacks", out.fallbacks},
             {"requeued", out.requeued},
             {"writer_cycles", writer.cycles()},
             {"elapsed", seconds_since(t0)}});
  return out;
}

FullResult run_full(const NetworkCase& nc, const RunConfig& cfg, RunLog& log) {
  FullResult out;
  out.p1 = run_phase1(nc, cfg, log);
  out.p2 = run_phase2(nc, out.p1.base, cfg, log);
  std::vector<double> pens(nc.contingencies.size(), 0.0);
  for (const auto& rec : out.p2.records) pens[rec.contingency] = rec.penalty;
  out.objective = objective(nc, out.p1.base, pens);
  log.event("run_done", {}, {{"objective", out.objective}});
  return out;
}

ReportResult run_report(const NetworkCase& nc, const std::string& out_dir) {
  ReportResult rep;
  std::ostringstream detail;
  StateVector base = read_base_solution(out_path(out_dir, kBaseFile), nc);
  StateTopology topo0 = StateTopology::make(nc, 0);

  NodalResiduals nr = nodal_residuals(nc, topo0, base);
  for (size_t i = 0; i < nr.p.size(); ++i) {
    rep.max_base_residual = std::max(rep.max_base_residual, std::abs(nr.p[i]));
    rep.max_base_residual = std::max(rep.max_base_residual, std::abs(nr.q[i]));
  }
  auto bres = branch_limit_residuals(nc, topo0, base);
  for (const auto& v : bres)
    rep.max_base_residual = std::max({rep.max_base_residual, v.o, v.d});
  rep.base_cost = generation_cost(nc, topo0, base);

  auto records = read_ctg_solutions(out_path(out_dir, kCtgFile), nc);
  std::vector<int> seen(nc.contingencies.size(), 0);
  std::vector<double> pens(nc.contingencies.size(), 0.0);
  for (const auto& rec : records) {
    ++seen[rec.contingency];
    StateTopology topo = StateTopology::make(nc, rec.contingency + 1);
    const double recomputed = state_penalty(nc, topo, rec.sv);
    const double err =
        std::abs(recomputed - rec.penalty) / std::max(1.0, std::abs(rec.penalty));
    rep.max_penalty_err = std::max(rep.max_penalty_err, err);
    pens[rec.contingency] = recomputed;
  }
  for (size_t i = 0; i < seen.size(); ++i)
    if (seen[i] != 1) {
      rep.ok = false;
      detail << "contingency " << nc.contingencies[i].id << " has " << seen[i]
             << " records; ";
    }
  if (rep.max_penalty_err > 1e-9) {
    rep.ok = false;
    detail << "stored penalties drift from recomputation; ";
  }
  if (rep.max_base_residual > 1e-6) {
    rep.ok = false;
    detail << "base point does not satisfy the network equations; ";
  }
  rep.objective = objective(nc, base, pens);
  rep.detail = detail.str();
  return rep;
}

}  // namespace scopf
