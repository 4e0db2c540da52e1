#include "scopf/admm.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "scopf/evaluation.hpp"

namespace scopf {

using Eigen::VectorXd;

ComplexityBounds complexity_bounds(double tau, double beta, double growth,
                                   double beta0, int num_blocks, double gamma,
                                   double L_hi, double L_lo, double eps_inner,
                                   double delta_L, double eps_outer) {
  ComplexityBounds out;
  const double eta2 = (tau + 1.0) / 2.0 - 1.0 / tau;
  out.eta = std::min(gamma, eta2);
  const double rho = tau * beta;
  const double denom_min = std::min(gamma * beta, (beta + rho) / 2.0 - beta * beta / rho);
  if (eps_inner > 0.0 && denom_min > 0.0 && L_hi > L_lo)
    out.T = std::ceil(2.0 * rho * rho * num_blocks * (L_hi - L_lo) /
                      (eps_inner * eps_inner * denom_min));
  if (eps_outer > 0.0 && delta_L > 0.0 && growth > 1.0)
    out.R = std::ceil(std::log(4.0 * delta_L / (beta0 * eps_outer * eps_outer)) /
                      std::log(growth));
  return out;
}

TwoLevelAdmm::TwoLevelAdmm(BlockProblemSet& set, const AdmmConfig& cfg)
    : set_(set), cfg_(cfg) {}

double TwoLevelAdmm::elapsed() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
}

void TwoLevelAdmm::init(const VectorXd& x0) {
  t0_ = std::chrono::steady_clock::now();
  x0_ = x0;
  beta_ = cfg_.beta0;
  rho_ = cfg_.tau * beta_;
  const int n = set_.dim();
  const int K = set_.blocks();
  blocks_.assign(K, {});
  std::vector<VectorXd> xb;
  std::vector<double> fk;
  set_.init_blocks(x0_, xb, fk);
  assert(static_cast<int>(xb.size()) == K);
  for (int k = 0; k < K; ++k) {
    auto& b = blocks_[k];
    b.lambda = VectorXd::Zero(n);
    b.z = VectorXd::Zero(n);
    b.y = -b.lambda - beta_ * b.z;  // multiplier identity at entry
    b.xb = xb[k];
    b.fk = fk[k];
  }
  f0_val_ = set_.f0(x0_);
  r_ = 1;
  t_ = 0;
  round_inner_ = 0;
  prev_round_consensus_ = std::numeric_limits<double>::infinity();
  round_begin();
  initialized_ = true;
}

void TwoLevelAdmm::round_begin() {
  round_eps_best_ = std::numeric_limits<double>::infinity();
  round_gamma_ = std::numeric_limits<double>::infinity();
  round_certs_ok_ = true;
  round_L_hi_ = alr_value();
  last_s_inf_ = std::numeric_limits<double>::infinity();
}

double TwoLevelAdmm::alr_value() const {
  double L = f0_val_;
  for (const auto& b : blocks_) {
    const VectorXd s = x0_ - b.xb + b.z;
    L += b.fk + b.lambda.dot(b.z) + 0.5 * beta_ * b.z.squaredNorm() + b.y.dot(s) +
         0.5 * rho_ * s.squaredNorm();
  }
  return L;
}

double TwoLevelAdmm::lower_bound() const {
  double lam_sq = 0.0;
  for (const auto& b : blocks_) lam_sq += b.lambda.squaredNorm();
  return set_.f0_min() - lam_sq / beta_;
}

double TwoLevelAdmm::consensus_residual() const {
  double v = 0.0;
  for (const auto& b : blocks_)
    v = std::max(v, (x0_ - b.xb).lpNorm<Eigen::Infinity>());
  return v;
}

bool TwoLevelAdmm::inner_iterate() {
  assert(initialized_);
  const int K = set_.blocks();
  AdmmIterRecord rec;
  rec.r = r_;
  rec.beta = beta_;
  rec.rho = rho_;

  // base block
  VectorXd y_sum = VectorXd::Zero(set_.dim());
  std::vector<VectorXd> targets(K);
  for (int k = 0; k < K; ++k) {
    y_sum += blocks_[k].y;
    targets[k] = blocks_[k].xb - blocks_[k].z;
  }
  double f0v = f0_val_, bef = 0.0, aft = 0.0;
  bool ok = set_.solve_base(y_sum, targets, rho_, x0_, f0v, bef, aft);
  if (ok) {
    f0_val_ = f0v;
    rec.descent_base = nlp::check_descent(bef, aft);
  } else {
    rec.descent_base = false;  // retained previous base iterate
  }
  round_certs_ok_ = round_certs_ok_ && rec.descent_base;

  // coupled blocks, independently solvable
  std::vector<VectorXd> xb_old(K), z_old(K);
  std::vector<double> g_meas(K, std::numeric_limits<double>::infinity());
  std::vector<bool> desc(K, true);
  for (int k = 0; k < K; ++k) {
    xb_old[k] = blocks_[k].xb;
    z_old[k] = blocks_[k].z;
  }
  auto solve_one = [&](int k) {
    auto& b = blocks_[k];
    double fkv = b.fk, kb = 0.0, ka = 0.0;
    VectorXd xb = b.xb;
    bool bok = set_.solve_block(k, x0_, b.z, b.y, rho_, xb, fkv, kb, ka);
    if (bok) {
      b.xb = xb;
      b.fk = fkv;
      desc[k] = nlp::check_descent(kb, ka);
      const double dxb = (b.xb - xb_old[k]).squaredNorm();
      if (dxb > 1e-16) g_meas[k] = (kb - ka) / (beta_ * dxb);
    } else {
      b.solve_ok = false;
      desc[k] = false;
    }
  };
  if (parallel_)
    parallel_(K, solve_one);
  else
    for (int k = 0; k < K; ++k) solve_one(k);

  rec.descent_blocks = true;
  for (int k = 0; k < K; ++k) {
    rec.descent_blocks = rec.descent_blocks && desc[k];
    rec.gamma_iter = std::min(rec.gamma_iter, g_meas[k]);
  }
  round_certs_ok_ = round_certs_ok_ && rec.descent_blocks;
  round_gamma_ = std::min(round_gamma_, rec.gamma_iter);

  // z and y passes, then the residual bookkeeping
  VectorXd d0 = VectorXd::Zero(set_.dim());
  for (int k = 0; k < K; ++k) {
    auto& b = blocks_[k];
    b.z = (rho_ * (b.xb - x0_) - b.lambda - b.y) / (beta_ + rho_);
    const VectorXd s = x0_ - b.xb + b.z;
    b.y += rho_ * s;

    rec.max_s_inf = std::max(rec.max_s_inf, s.lpNorm<Eigen::Infinity>());
    rec.max_s_2 = std::max(rec.max_s_2, s.norm());
    const VectorXd rk = x0_ - b.xb;
    rec.max_r_inf = std::max(rec.max_r_inf, rk.lpNorm<Eigen::Infinity>());
    rec.max_r_2 = std::max(rec.max_r_2, rk.norm());
    const VectorXd dz = b.z - z_old[k];
    rec.max_dk_2 = std::max(rec.max_dk_2, rho_ * dz.norm());
    d0 += rho_ * (xb_old[k] - b.xb + dz);
    rec.identity_max = std::max(
        rec.identity_max, (b.lambda + beta_ * b.z + b.y).lpNorm<Eigen::Infinity>());
    rec.sdz_max = std::max(
        rec.sdz_max, (s - (beta_ / rho_) * (z_old[k] - b.z)).lpNorm<Eigen::Infinity>());
  }
  rec.d0_2 = d0.norm();

  ++t_;
  ++round_inner_;
  rec.t = t_;
  rec.L = alr_value();
  rec.wall = elapsed();
  last_s_inf_ = rec.max_s_inf;
  round_eps_best_ =
      std::min(round_eps_best_, std::max({rec.d0_2, rec.max_dk_2, rec.max_s_2}));
  records_.push_back(rec);
  return ok;
}

bool TwoLevelAdmm::inner_should_stop() const {
  if (round_inner_ >= cfg_.max_inner_per_round) return true;
  if (t_ >= cfg_.max_inner_total) return true;
  if (cfg_.time_limit > 0.0 && elapsed() > cfg_.time_limit) return true;
  return last_s_inf_ <= cfg_.inner_tol_base / static_cast<double>(r_);
}

void TwoLevelAdmm::outer_update() {
  AdmmRoundSummary rs;
  rs.r = r_;
  rs.beta = beta_;
  rs.rho = rho_;
  rs.L_hi = round_L_hi_;
  rs.L_lo = lower_bound();
  rs.inner_iters = round_inner_;
  rs.eps_best = round_eps_best_;
  rs.gamma_measured = round_gamma_;
  rs.certs_ok = round_certs_ok_;
  rs.t_bound = round_t_bound();
  rs.consensus_end = consensus_residual();
  rounds_.push_back(rs);

  for (auto& b : blocks_) {
    b.lambda = (b.lambda + beta_ * b.z)
                   .cwiseMax(cfg_.lambda_lo)
                   .cwiseMin(cfg_.lambda_hi);
  }
  const double resid = rs.consensus_end;
  if (cfg_.adaptive_beta) {
    if (resid > cfg_.adaptive_threshold * prev_round_consensus_)
      beta_ *= cfg_.adaptive_factor;
  } else {
    beta_ *= cfg_.beta_growth;
  }
  prev_round_consensus_ = resid;
  rho_ = cfg_.tau * beta_;
  for (auto& b : blocks_) b.y = -b.lambda - beta_ * b.z;
  ++r_;
  round_inner_ = 0;
  round_begin();
}

double TwoLevelAdmm::round_t_bound() const {
  double gamma = round_gamma_;
  if (!std::isfinite(gamma) || gamma < cfg_.gamma_min) gamma = cfg_.gamma_min;
  const double eps = std::isfinite(round_eps_best_) ? round_eps_best_ : 0.0;
  return complexity_bounds(cfg_.tau, beta_, cfg_.beta_growth, cfg_.beta0,
                           set_.blocks(), gamma, round_L_hi_, lower_bound(), eps,
                           0.0, 0.0)
      .T;
}

double TwoLevelAdmm::eta() const {
  double gamma = round_gamma_;
  if (!std::isfinite(gamma)) gamma = std::numeric_limits<double>::infinity();
  return complexity_bounds(cfg_.tau, beta_, cfg_.beta_growth, cfg_.beta0,
                           set_.blocks(), gamma, 0.0, 0.0, 0.0, 0.0, 0.0)
      .eta;
}

TwoLevelAdmm::RunResult TwoLevelAdmm::run(
    const std::function<void(const TwoLevelAdmm&)>& round_cb) {
  assert(initialized_);
  RunResult out;
  while (true) {
    do {
      inner_iterate();
    } while (!inner_should_stop());
    if (round_cb) round_cb(*this);
    out.rounds = r_;
    out.total_inner = t_;
    out.consensus = consensus_residual();
    if (out.consensus <= cfg_.consensus_tol) {
      out.converged = true;
      // keep the completed round's summary for reporting
      AdmmRoundSummary rs;
      rs.r = r_;
      rs.beta = beta_;
      rs.rho = rho_;
      rs.L_hi = round_L_hi_;
      rs.L_lo = lower_bound();
      rs.inner_iters = round_inner_;
      rs.eps_best = round_eps_best_;
      rs.gamma_measured = round_gamma_;
      rs.certs_ok = round_certs_ok_;
      rs.t_bound = round_t_bound();
      rs.consensus_end = out.consensus;
      rounds_.push_back(rs);
      return out;
    }
    if (r_ >= cfg_.max_outer || t_ >= cfg_.max_inner_total ||
        (cfg_.time_limit > 0.0 && elapsed() > cfg_.time_limit))
      return out;
    outer_update();
  }
}

// ---------------------------------------------------------------------------

ScacopfBlocks::ScacopfBlocks(const NetworkCase& nc, std::vector<int> contingencies,
                             CouplingMode mode, double eps, nlp::SolveOptions nlp_opt)
    : nc_(nc), ctg_(std::move(contingencies)), nlp_opt_(nlp_opt) {
  delta_weight_ = nc.delta_weight;
  {
    AcopfBuilder b(nc, 0);
    b.add_balance();
    b.add_branch_limits();
    b.add_generation_cost(1.0);
    b.add_penalty_epigraph(delta_weight_);
    base_prox_ = std::make_unique<ProxTermRefs>();
    base_prox_->lin = VectorXd::Zero(b.layout().size);
    base_prox_->target = VectorXd::Zero(b.layout().size);
    b.add_prox_term(0, b.layout().size, base_prox_.get());
    base_ = b.take();
  }
  const double wk = nc.contingencies.empty()
                        ? 0.0
                        : (1.0 - delta_weight_) / static_cast<double>(nc.contingencies.size());
  for (int state : ctg_) {
    Blk blk;
    blk.state = state;
    blk.weight = wk;
    AcopfBuilder b(nc, state);
    b.add_balance();
    b.add_branch_limits();
    b.add_penalty_epigraph(wk);
    const int coff = b.add_copy_block();
    if (mode == CouplingMode::Smoothed)
      b.add_smoothed_coupling(eps);
    else
      b.add_bigm_coupling();
    b.add_copy_voltage_link();
    blk.prox = std::make_unique<ProxTermRefs>();
    const int cdim = base_.layout.size;
    blk.prox->lin = VectorXd::Zero(cdim);
    blk.prox->target = VectorXd::Zero(cdim);
    blk.prox->kmult = 1.0;
    b.add_prox_term(coff, cdim, blk.prox.get());
    blk.bp = b.take();
    blks_.push_back(std::move(blk));
  }
}

double ScacopfBlocks::f0(const VectorXd& x0) {
  StateVector sv = base_.layout.unpack(x0.data());
  return generation_cost(nc_, base_.topo, sv) +
         delta_weight_ * state_penalty(nc_, base_.topo, sv);
}

double ScacopfBlocks::f0_min() const {
  double c = 0.0;
  for (const auto& g : nc_.generators) c += g.cost.eval(g.p_lo);
  return c;
}

StateVector ScacopfBlocks::base_state(const VectorXd& x0) const {
  return base_.layout.unpack(x0.data());
}

StateVector ScacopfBlocks::block_state(int k) const {
  return blks_[k].bp.state_of(blks_[k].xfull);
}

void ScacopfBlocks::init_blocks(const VectorXd& x0, std::vector<VectorXd>& xb,
                                std::vector<double>& fk) {
  StateVector sv0 = base_.layout.unpack(x0.data());
  base_xfull_ = base_.initial_point(sv0);
  base_warm_ = {};
  xb.clear();
  fk.clear();
  for (auto& blk : blks_) {
    StateVector svk = restrict_to_state(nc_, sv0, blk.state);
    blk.xfull = blk.bp.initial_point(svk, &sv0);
    blk.warm = {};
    xb.push_back(x0);
    fk.push_back(blk.weight * state_penalty(nc_, blk.bp.topo, svk));
  }
}

namespace {
double prox_value(const ProxTermRefs& r, const double* x, int len) {
  double val = r.rho * 0.5 * r.csq;
  for (int i = 0; i < len; ++i)
    val += r.lin[i] * x[i] + r.rho * (0.5 * r.kmult * x[i] * x[i] - r.target[i] * x[i]);
  return val;
}
}  // namespace

bool ScacopfBlocks::solve_base(const VectorXd& y_sum,
                               const std::vector<VectorXd>& targets, double rho,
                               VectorXd& x0, double& f0_value, double& sub_before,
                               double& sub_after) {
  const int n = base_.layout.size;
  base_prox_->lin = y_sum;
  base_prox_->rho = rho;
  base_prox_->kmult = static_cast<double>(targets.size());
  base_prox_->target.setZero(n);
  base_prox_->csq = 0.0;
  for (const auto& t : targets) {
    base_prox_->target += t;
    base_prox_->csq += t.squaredNorm();
  }
  sub_before = f0(base_xfull_.head(n)) + prox_value(*base_prox_, base_xfull_.data(), n);

  auto res = nlp::solve(base_.prob, base_xfull_, nlp_opt_, &base_warm_);
  if (res.status == nlp::SolveStatus::NumericalFailure || !res.x.allFinite()) {
    sub_after = sub_before;
    return false;
  }
  base_xfull_ = res.x;
  x0 = res.x.head(n);
  f0_value = f0(x0);
  sub_after = f0_value + prox_value(*base_prox_, base_xfull_.data(), n);
  return true;
}

bool ScacopfBlocks::solve_block(int k, const VectorXd& x0, const VectorXd& z,
                                const VectorXd& y, double rho, VectorXd& xb,
                                double& fk_value, double& sub_before,
                                double& sub_after) {
  auto& blk = blks_[k];
  const int n = base_.layout.size;
  const int coff = blk.bp.copy_offset;
  blk.prox->lin = -y;
  blk.prox->rho = rho;
  blk.prox->kmult = 1.0;
  blk.prox->target = x0 + z;
  blk.prox->csq = blk.prox->target.squaredNorm();

  auto fk_exact = [&](const VectorXd& xfull) {
    StateVector sv = blk.bp.state_of(xfull);
    return blk.weight * state_penalty(nc_, blk.bp.topo, sv);
  };
  sub_before = fk_exact(blk.xfull) + prox_value(*blk.prox, blk.xfull.data() + coff, n);

  auto res = nlp::solve(blk.bp.prob, blk.xfull, nlp_opt_, &blk.warm);
  if (res.status == nlp::SolveStatus::NumericalFailure || !res.x.allFinite()) {
    sub_after = sub_before;
    return false;
  }
  blk.xfull = res.x;
  xb = res.x.segment(coff, n);
  fk_value = fk_exact(res.x);
  sub_after = fk_value + prox_value(*blk.prox, res.x.data() + coff, n);
  return true;
}

}  // namespace scopf
