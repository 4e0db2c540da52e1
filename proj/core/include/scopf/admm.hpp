#pragma once

#include <Eigen/Core>
#include <chrono>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "scopf/acopf_builder.hpp"
#include "scopf/case.hpp"
#include "scopf/nlp/solver.hpp"

namespace scopf {

struct AdmmConfig {
  double tau = 2.0;     // rho = tau * beta
  double beta0 = 2000.0;
  double beta_growth = 2.0;        // geometric factor when not adaptive
  bool adaptive_beta = true;       // grow x8 when consensus stalls
  double adaptive_factor = 8.0;
  double adaptive_threshold = 0.5; // stall = residual > threshold * previous
  double lambda_lo = -1e7, lambda_hi = 1e7;
  double inner_tol_base = 0.1;     // round r stops at max_k |s_k|_inf <= base/r
  double consensus_tol = 1e-4;
  int max_outer = 50;
  int max_inner_total = 1000;
  int max_inner_per_round = 200;
  double gamma_min = 1e-3;         // floor when evaluating iteration bounds
  double time_limit = 0.0;         // seconds; 0 disables
};

// Dual state and local base-copy for one coupled block.
struct CouplingBlock {
  Eigen::VectorXd z, y, lambda;
  Eigen::VectorXd xb;
  double fk = 0.0;
  bool solve_ok = true;
};

struct AdmmIterRecord {
  int t = 0, r = 0;
  double L = 0.0;
  double max_s_inf = 0.0, max_s_2 = 0.0;
  double max_r_inf = 0.0, max_r_2 = 0.0;
  double d0_2 = 0.0, max_dk_2 = 0.0;
  double beta = 0.0, rho = 0.0;
  double wall = 0.0;
  bool descent_base = true, descent_blocks = true;
  double gamma_iter = std::numeric_limits<double>::infinity();
  double identity_max = 0.0;  // |lambda + beta z + y|_inf over blocks
  double sdz_max = 0.0;       // |s - (beta/rho)(z_prev - z)|_inf over blocks
};

struct AdmmRoundSummary {
  int r = 0;
  double beta = 0.0, rho = 0.0;
  double L_hi = 0.0, L_lo = 0.0;
  int inner_iters = 0;
  double eps_best = std::numeric_limits<double>::infinity();
  double t_bound = 0.0;
  double gamma_measured = std::numeric_limits<double>::infinity();
  bool certs_ok = true;
  double consensus_end = 0.0;
};

// Closed-form pieces of the iteration/round bounds.
struct ComplexityBounds {
  double eta = 0.0;  // min(gamma, (tau+1)/2 - 1/tau)
  double T = 0.0;    // inner iterations to reach eps_inner stationarity
  double R = 0.0;    // outer rounds to reach eps_outer consensus
};
ComplexityBounds complexity_bounds(double tau, double beta, double growth,
                                   double beta0, int num_blocks, double gamma,
                                   double L_hi, double L_lo, double eps_inner,
                                   double delta_L, double eps_outer);

// Block subproblems behind the consensus loop. Implementations must allow
// concurrent solve_block calls on distinct k.
class BlockProblemSet {
public:
  virtual ~BlockProblemSet() = default;
  virtual int dim() const = 0;
  virtual int blocks() const = 0;
  virtual double f0(const Eigen::VectorXd& x0) = 0;
  virtual double f0_min() const = 0;
  virtual void init_blocks(const Eigen::VectorXd& x0, std::vector<Eigen::VectorXd>& xb,
                           std::vector<double>& fk) = 0;
  virtual bool solve_base(const Eigen::VectorXd& y_sum,
                          const std::vector<Eigen::VectorXd>& targets, double rho,
                          Eigen::VectorXd& x0, double& f0_value, double& sub_before,
                          double& sub_after) = 0;
  virtual bool solve_block(int k, const Eigen::VectorXd& x0, const Eigen::VectorXd& z,
                           const Eigen::VectorXd& y, double rho, Eigen::VectorXd& xb,
                           double& fk_value, double& sub_before, double& sub_after) = 0;
};

// Two-level consensus loop: inner passes over (base, blocks, z, y) under a
// fixed penalty beta, outer multiplier/penalty updates between rounds.
class TwoLevelAdmm {
public:
  TwoLevelAdmm(BlockProblemSet& set, const AdmmConfig& cfg);

  void init(const Eigen::VectorXd& x0);
  bool inner_iterate();
  bool inner_should_stop() const;
  void outer_update();

  double consensus_residual() const;
  bool consensus_reached() const { return consensus_residual() <= cfg_.consensus_tol; }

  struct RunResult {
    bool converged = false;
    int rounds = 0;
    int total_inner = 0;
    double consensus = std::numeric_limits<double>::infinity();
  };
  RunResult run(const std::function<void(const TwoLevelAdmm&)>& round_cb = {});

  double alr_value() const;
  double lower_bound() const;
  double round_t_bound() const;
  double eta() const;

  const Eigen::VectorXd& x0() const { return x0_; }
  const std::vector<CouplingBlock>& coupling() const { return blocks_; }
  const std::vector<AdmmIterRecord>& records() const { return records_; }
  const std::vector<AdmmRoundSummary>& rounds() const { return rounds_; }
  double beta() const { return beta_; }
  double rho() const { return rho_; }
  int round_index() const { return r_; }
  int total_inner() const { return t_; }
  double f0_value() const { return f0_val_; }

  void set_parallel(std::function<void(int, const std::function<void(int)>&)> par) {
    parallel_ = std::move(par);
  }

private:
  void round_begin();
  double elapsed() const;

  BlockProblemSet& set_;
  AdmmConfig cfg_;
  Eigen::VectorXd x0_;
  std::vector<CouplingBlock> blocks_;
  std::vector<AdmmIterRecord> records_;
  std::vector<AdmmRoundSummary> rounds_;
  std::function<void(int, const std::function<void(int)>&)> parallel_;
  double beta_ = 0.0, rho_ = 0.0;
  int r_ = 1, t_ = 0, round_inner_ = 0;
  double f0_val_ = 0.0;
  double last_s_inf_ = std::numeric_limits<double>::infinity();
  double prev_round_consensus_ = std::numeric_limits<double>::infinity();
  double round_eps_best_ = std::numeric_limits<double>::infinity();
  double round_gamma_ = std::numeric_limits<double>::infinity();
  bool round_certs_ok_ = true;
  double round_L_hi_ = 0.0;
  std::chrono::steady_clock::time_point t0_;
  bool initialized_ = false;
};

// SC-ACOPF block set: base dispatch block plus one coordination block per
// selected contingency, built once and re-solved warm as the loop progresses.
class ScacopfBlocks : public BlockProblemSet {
public:
  ScacopfBlocks(const NetworkCase& nc, std::vector<int> contingencies,
                CouplingMode mode, double eps, nlp::SolveOptions nlp_opt = {});

  int dim() const override { return base_.layout.size; }
  int blocks() const override { return static_cast<int>(ctg_.size()); }
  double f0(const Eigen::VectorXd& x0) override;
  double f0_min() const override;
  void init_blocks(const Eigen::VectorXd& x0, std::vector<Eigen::VectorXd>& xb,
                   std::vector<double>& fk) override;
  bool solve_base(const Eigen::VectorXd& y_sum,
                  const std::vector<Eigen::VectorXd>& targets, double rho,
                  Eigen::VectorXd& x0, double& f0_value, double& sub_before,
                  double& sub_after) override;
  bool solve_block(int k, const Eigen::VectorXd& x0, const Eigen::VectorXd& z,
                   const Eigen::VectorXd& y, double rho, Eigen::VectorXd& xb,
                   double& fk_value, double& sub_before, double& sub_after) override;

  const std::vector<int>& contingency_states() const { return ctg_; }
  StateVector base_state(const Eigen::VectorXd& x0) const;
  StateVector block_state(int k) const;
  const BuiltProblem& base_problem() const { return base_; }
  const BuiltProblem& block_problem(int k) const { return blks_[k].bp; }

private:
  struct Blk {
    BuiltProblem bp;
    std::unique_ptr<ProxTermRefs> prox;
    Eigen::VectorXd xfull;
    nlp::WarmState warm;
    int state = 0;  // contingency state index (1-based)
    double weight = 0.0;
  };

  const NetworkCase& nc_;
  std::vector<int> ctg_;  // state indices (k >= 1)
  BuiltProblem base_;
  std::unique_ptr<ProxTermRefs> base_prox_;
  Eigen::VectorXd base_xfull_;
  nlp::WarmState base_warm_;
  std::vector<Blk> blks_;
  nlp::SolveOptions nlp_opt_;
  double delta_weight_ = 0.5;
};

}  // namespace scopf
