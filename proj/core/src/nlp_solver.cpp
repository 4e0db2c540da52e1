#include "scopf/nlp/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>

namespace scopf::nlp {

namespace {

using Eigen::VectorXd;
using clock_type = std::chrono::steady_clock;

bool finite(double v) { return std::isfinite(v); }

bool all_finite(const VectorXd& v) { return v.allFinite(); }

// Flattened constraints with per-row scaling fixed at the start point.
struct ConsWork {
  const NlpProblem& prob;
  int m_eq = 0, m_ineq = 0;
  VectorXd scale_eq, scale_ineq;
  VectorXd c_eq, c_ineq;  // scaled values at last eval
  std::vector<JacEntry> jac_eq, jac_ineq;
  std::vector<double> buf;

  explicit ConsWork(const NlpProblem& p) : prob(p) {
    m_eq = p.num_eq();
    m_ineq = p.num_ineq();
    scale_eq = VectorXd::Ones(m_eq);
    scale_ineq = VectorXd::Ones(m_ineq);
    c_eq.resize(m_eq);
    c_ineq.resize(m_ineq);
  }

  void compute_scales(const double* x) {
    auto scan = [&](const std::vector<ConstraintBlock>& blocks, VectorXd& scale) {
      int row0 = 0;
      std::vector<JacEntry> ent;
      for (const auto& b : blocks) {
        ent.clear();
        b.jac(x, ent);
        std::vector<double> mx(b.m, 0.0);
        for (const auto& e : ent)
          if (finite(e.val)) mx[e.row] = std::max(mx[e.row], std::fabs(e.val));
        for (int i = 0; i < b.m; ++i)
          scale[row0 + i] = 1.0 / std::max(1.0, mx[i]);
        row0 += b.m;
      }
    };
    scan(prob.eq, scale_eq);
    scan(prob.ineq, scale_ineq);
  }

  // Scaled constraint values; false if anything non-finite.
  bool values(const double* x) {
    auto run = [&](const std::vector<ConstraintBlock>& blocks, VectorXd& c,
                   const VectorXd& scale) {
      int row0 = 0;
      for (const auto& b : blocks) {
        buf.assign(b.m, 0.0);
        b.eval(x, buf.data());
        for (int i = 0; i < b.m; ++i) {
          if (!finite(buf[i])) return false;
          c[row0 + i] = scale[row0 + i] * buf[i];
        }
        row0 += b.m;
      }
      return true;
    };
    return run(prob.eq, c_eq, scale_eq) && run(prob.ineq, c_ineq, scale_ineq);
  }

  bool jacobians(const double* x) {
    auto run = [&](const std::vector<ConstraintBlock>& blocks,
                   std::vector<JacEntry>& out, const VectorXd& scale) {
      out.clear();
      int row0 = 0;
      std::vector<JacEntry> ent;
      for (const auto& b : blocks) {
        ent.clear();
        b.jac(x, ent);
        for (auto e : ent) {
          if (!finite(e.val)) return false;
          e.val *= scale[row0 + e.row];
          e.row += row0;
          out.push_back(e);
        }
        row0 += b.m;
      }
      return true;
    };
    return run(prob.eq, jac_eq, scale_eq) && run(prob.ineq, jac_ineq, scale_ineq);
  }

  double max_violation_unscaled() const {
    double v = 0.0;
    for (int i = 0; i < m_eq; ++i) v = std::max(v, std::fabs(c_eq[i]) / scale_eq[i]);
    for (int i = 0; i < m_ineq; ++i) v = std::max(v, c_ineq[i] / scale_ineq[i]);
    return v;
  }
};

struct AlParams {
  VectorXd lam, w;  // multipliers for scaled eq / ineq rows
  double nu = 1e3;
};

class AlEval {
public:
  AlEval(const NlpProblem& p, ConsWork& cons) : prob_(p), cons_(cons) {}

  // Value only (line search probes).
  bool phi(const VectorXd& x, const AlParams& al, double& out) {
    double f = prob_.f(x.data(), nullptr);
    if (!finite(f)) return false;
    if (!cons_.values(x.data())) return false;
    out = f + penalty_terms(al);
    return finite(out);
  }

  // Value and gradient at an accepted point.
  bool phi_grad(const VectorXd& x, const AlParams& al, double& out, VectorXd& g,
                double* f_raw = nullptr, double* grad_f_inf = nullptr) {
    g.setZero(prob_.n);
    double f = prob_.f(x.data(), g.data());
    if (!finite(f) || !all_finite(g)) return false;
    if (grad_f_inf) *grad_f_inf = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
    if (f_raw) *f_raw = f;
    if (!cons_.values(x.data()) || !cons_.jacobians(x.data())) return false;
    for (const auto& e : cons_.jac_eq)
      g[e.col] += e.val * (al.lam[e.row] + al.nu * cons_.c_eq[e.row]);
    for (const auto& e : cons_.jac_ineq) {
      const double t = std::max(0.0, al.w[e.row] / al.nu + cons_.c_ineq[e.row]);
      g[e.col] += e.val * (al.nu * t);
    }
    if (!all_finite(g)) return false;
    out = f + penalty_terms(al);
    return finite(out);
  }

private:
  double penalty_terms(const AlParams& al) const {
    double s = 0.0;
    for (int i = 0; i < cons_.m_eq; ++i)
      s += al.lam[i] * cons_.c_eq[i] + 0.5 * al.nu * cons_.c_eq[i] * cons_.c_eq[i];
    for (int i = 0; i < cons_.m_ineq; ++i) {
      const double t = std::max(0.0, al.w[i] / al.nu + cons_.c_ineq[i]);
      s += 0.5 * al.nu * (t * t - (al.w[i] / al.nu) * (al.w[i] / al.nu));
    }
    return s;
  }

  const NlpProblem& prob_;
  ConsWork& cons_;
};

VectorXd clamp_box(const VectorXd& x, const VectorXd& lo, const VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

double proj_residual(const VectorXd& x, const VectorXd& g, const VectorXd& lo,
                     const VectorXd& hi) {
  double r = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    double step = std::clamp(x[i] - g[i], lo[i], hi[i]);
    r = std::max(r, std::fabs(x[i] - step));
  }
  return r;
}

struct LbfgsMemory {
  struct Pair {
    VectorXd s, y;
    double rho;
  };
  std::deque<Pair> pairs;
  static constexpr size_t kMax = 10;

  void clear() { pairs.clear(); }

  void push(const VectorXd& s, const VectorXd& y) {
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      pairs.push_back({s, y, 1.0 / sy});
      if (pairs.size() > kMax) pairs.pop_front();
    }
  }

  VectorXd direction(const VectorXd& g) const {
    VectorXd q = -g;
    if (pairs.empty()) return q;
    std::vector<double> a(pairs.size());
    for (int i = static_cast<int>(pairs.size()) - 1; i >= 0; --i) {
      a[i] = pairs[i].rho * pairs[i].s.dot(q);
      q -= a[i] * pairs[i].y;
    }
    const auto& last = pairs.back();
    q *= last.s.dot(last.y) / last.y.dot(last.y);
    for (size_t i = 0; i < pairs.size(); ++i) {
      const double b = pairs[i].rho * pairs[i].y.dot(q);
      q += (a[i] - b) * pairs[i].s;
    }
    return q;
  }
};

// Least-squares multiplier estimate at x for near-active rows, free coords only.
void estimate_multipliers(const NlpProblem& prob, ConsWork& cons, const VectorXd& x,
                          AlParams& al) {
  VectorXd gf = VectorXd::Zero(prob.n);
  double f = prob.f(x.data(), gf.data());
  if (!finite(f) || !all_finite(gf)) return;
  if (!cons.values(x.data()) || !cons.jacobians(x.data())) return;

  std::vector<int> free_idx;
  for (int i = 0; i < prob.n; ++i)
    if (x[i] > prob.lo[i] + 1e-9 && x[i] < prob.hi[i] - 1e-9) free_idx.push_back(i);
  if (free_idx.empty()) return;
  std::vector<int> col_of(prob.n, -1);
  for (size_t i = 0; i < free_idx.size(); ++i) col_of[free_idx[i]] = static_cast<int>(i);

  std::vector<int> act;  // active inequality rows
  for (int i = 0; i < cons.m_ineq; ++i)
    if (cons.c_ineq[i] > -1e-6) act.push_back(i);
  std::vector<int> ineq_col(cons.m_ineq, -1);
  for (size_t i = 0; i < act.size(); ++i) ineq_col[act[i]] = static_cast<int>(i);

  const int m = cons.m_eq + static_cast<int>(act.size());
  if (m == 0) return;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(free_idx.size(), m);
  for (const auto& e : cons.jac_eq)
    if (col_of[e.col] >= 0) A(col_of[e.col], e.row) += e.val;
  for (const auto& e : cons.jac_ineq)
    if (col_of[e.col] >= 0 && ineq_col[e.row] >= 0)
      A(col_of[e.col], cons.m_eq + ineq_col[e.row]) += e.val;
  VectorXd rhs(free_idx.size());
  for (size_t i = 0; i < free_idx.size(); ++i) rhs[i] = -gf[free_idx[i]];

  VectorXd mu = A.colPivHouseholderQr().solve(rhs);
  if (!all_finite(mu)) return;
  const double cap = 1e10;
  for (int i = 0; i < cons.m_eq; ++i) al.lam[i] = std::clamp(mu[i], -cap, cap);
  for (size_t i = 0; i < act.size(); ++i)
    al.w[act[i]] = std::clamp(std::max(0.0, mu[cons.m_eq + i]), 0.0, cap);
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::IterationLimit: return "iteration_limit";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

bool check_descent(double before, double after) {
  return after <= before + 1e-10 * (1.0 + std::fabs(before));
}

NlpResult solve(const NlpProblem& prob, const Eigen::VectorXd& x0,
                const SolveOptions& opt, WarmState* warm) {
  const auto t0 = clock_type::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
  };
  auto out_of_time = [&] { return opt.time_limit > 0.0 && elapsed() > opt.time_limit; };

  NlpResult res;
  VectorXd x = clamp_box(x0, prob.lo, prob.hi);
  res.x = x;

  ConsWork cons(prob);
  cons.compute_scales(x.data());
  AlEval al_eval(prob, cons);

  AlParams al;
  al.lam = VectorXd::Zero(cons.m_eq);
  al.w = VectorXd::Zero(cons.m_ineq);
  al.nu = 1e3;
  const bool have_warm = warm && warm->valid &&
                         warm->eq_mult.size() == cons.m_eq &&
                         warm->ineq_mult.size() == cons.m_ineq;
  if (have_warm) {
    al.lam = warm->eq_mult;
    al.w = warm->ineq_mult.cwiseMax(0.0);
    if (warm->penalty > 0.0) al.nu = warm->penalty;
  } else {
    estimate_multipliers(prob, cons, x, al);
  }

  double phi = 0.0, f_raw = 0.0, gf_inf = 1.0;
  VectorXd g(prob.n);
  if (!al_eval.phi_grad(x, al, phi, g, &f_raw, &gf_inf)) {
    res.status = SolveStatus::NumericalFailure;
    res.objective = std::numeric_limits<double>::quiet_NaN();
    res.wall_seconds = elapsed();
    return res;
  }

  auto gscale = [&] { return std::max(1.0, gf_inf); };
  double stat = proj_residual(x, g, prob.lo, prob.hi);
  double feas = cons.max_violation_unscaled();

  // Entry check: multipliers already optimal (warm or estimated).
  if (stat <= opt.tol * gscale() && feas <= opt.feas_tol) {
    res.x = x;
    res.objective = f_raw;
    res.stationarity = stat;
    res.feasibility = feas;
    res.status = SolveStatus::Converged;
    res.iterations = 0;
    res.wall_seconds = elapsed();
    if (warm) {
      warm->eq_mult = al.lam;
      warm->ineq_mult = al.w;
      warm->penalty = al.nu;
      warm->valid = true;
    }
    return res;
  }

  LbfgsMemory mem;
  int it = 0, stall_rounds = 0;
  double omega = std::max(opt.tol * gscale(), std::min(1e-2, 0.1 * stat));
  double feas_prev = std::numeric_limits<double>::infinity();
  bool failed = false, timed_out = false;

  while (it < opt.max_iter && !failed && !timed_out) {
    // Inner: projected L-BFGS on the AL with fixed multipliers.
    bool stalled = false;
    while (it < opt.max_iter) {
      if (out_of_time()) {
        timed_out = true;
        break;
      }
      stat = proj_residual(x, g, prob.lo, prob.hi);
      if (stat <= omega) break;

      VectorXd d = mem.direction(g);
      if (d.dot(g) > -1e-12 * d.norm() * g.norm()) {
        mem.clear();
        d = -g;
      }
      double alpha = 1.0;
      VectorXd xt;
      double phit = 0.0;
      bool accepted = false;
      for (int ls = 0; ls < 50; ++ls) {
        xt = clamp_box(x + alpha * d, prob.lo, prob.hi);
        const double dec = g.dot(xt - x);
        if ((xt - x).lpNorm<Eigen::Infinity>() < 1e-16) break;
        if (al_eval.phi(xt, al, phit) && phit <= phi + 1e-4 * dec && dec < 0.0) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        if (!mem.pairs.empty()) {
          mem.clear();
          continue;  // retry from steepest descent
        }
        stalled = true;  // cannot improve the AL further at this precision
        break;
      }
      VectorXd g_new(prob.n);
      double phi_new = 0.0;
      if (!al_eval.phi_grad(xt, al, phi_new, g_new, &f_raw, &gf_inf)) {
        failed = true;
        break;
      }
      mem.push(xt - x, g_new - g);
      x = xt;
      phi = phi_new;
      g = g_new;
      ++it;
    }
    if (failed || timed_out) break;

    // Multiplier update; the AL gradient at the old multipliers equals the
    // Lagrangian gradient at the new ones, so 'stat' doubles as the KKT residual.
    feas = cons.max_violation_unscaled();
    for (int i = 0; i < cons.m_eq; ++i)
      al.lam[i] = std::clamp(al.lam[i] + al.nu * cons.c_eq[i], -1e10, 1e10);
    for (int i = 0; i < cons.m_ineq; ++i)
      al.w[i] = std::clamp(std::max(0.0, al.w[i] + al.nu * cons.c_ineq[i]), 0.0, 1e10);

    stat = proj_residual(x, g, prob.lo, prob.hi);
    if (stat <= opt.tol * gscale() && feas <= opt.feas_tol) {
      res.status = SolveStatus::Converged;
      break;
    }
    if (stalled && feas <= opt.feas_tol) {
      // AL minimization cannot push further; accept what we have.
      res.status = stat <= 10.0 * opt.tol * gscale() ? SolveStatus::Converged
                                                     : SolveStatus::IterationLimit;
      break;
    }
    stall_rounds = stalled ? stall_rounds + 1 : 0;
    if (stall_rounds > 12) {
      res.status = SolveStatus::IterationLimit;
      break;
    }
    if (feas > 0.25 * feas_prev) al.nu = std::min(al.nu * 10.0, 1e12);
    feas_prev = feas;
    omega = std::max(0.3 * opt.tol * gscale(), 0.1 * omega);

    // Refresh AL value/gradient under the new multipliers.
    if (!al_eval.phi_grad(x, al, phi, g, &f_raw, &gf_inf)) {
      failed = true;
      break;
    }
    mem.clear();
    if (it >= opt.max_iter) {
      res.status = SolveStatus::IterationLimit;
      break;
    }
  }

  if (failed)
    res.status = SolveStatus::NumericalFailure;
  else if (timed_out)
    res.status = SolveStatus::TimeLimit;
  else if (it >= opt.max_iter && res.status != SolveStatus::Converged)
    res.status = SolveStatus::IterationLimit;

  cons.values(x.data());
  res.x = x;
  res.objective = prob.f(x.data(), nullptr);
  res.stationarity = stat;
  res.feasibility = cons.max_violation_unscaled();
  res.iterations = it;
  res.wall_seconds = elapsed();
  if (warm) {
    warm->eq_mult = al.lam;
    warm->ineq_mult = al.w;
    warm->penalty = al.nu;
    warm->valid = true;
  }
  return res;
}

}  // namespace scopf::nlp
