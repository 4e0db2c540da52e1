#include <cmath>
#include <random>

#include "doctest.h"
#include "scopf/acopf_builder.hpp"
#include "scopf/evaluation.hpp"
#include "test_support.hpp"

using namespace scopf;
using Eigen::VectorXd;

namespace {

// Random point strictly inside the box; unbounded coordinates get a small range.
VectorXd random_point(const nlp::NlpProblem& prob, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  VectorXd x(prob.n);
  for (int i = 0; i < prob.n; ++i) {
    double lo = prob.lo[i], hi = prob.hi[i];
    if (hi >= kInf) hi = lo + 1.5;
    if (lo <= -kInf) lo = hi - 1.5;
    x[i] = lo + u(rng) * (hi - lo);
  }
  return x;
}

void check_block_jacobian(const nlp::ConstraintBlock& blk, const VectorXd& x,
                          double tol, std::mt19937& rng) {
  const int n = static_cast<int>(x.size());
  std::vector<nlp::JacEntry> entries;
  blk.jac(x.data(), entries);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(blk.m, n);
  for (const auto& e : entries) J(e.row, e.col) += e.val;

  if (blk.linear) {
    // c(x + d) - c(x) = J d holds exactly for linear rows; check it with a
    // random step, allowing only rounding at the magnitude of the row values.
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    VectorXd d = VectorXd::NullaryExpr(n, [&](int) { return u(rng); });
    VectorXd c0(blk.m), c1(blk.m);
    blk.eval(x.data(), c0.data());
    VectorXd xd = x + d;
    blk.eval(xd.data(), c1.data());
    VectorXd pred = J * d;
    for (int r = 0; r < blk.m; ++r) {
      const double round_scale =
          std::max({1.0, std::abs(c0[r]), std::abs(c1[r]), pred.cwiseAbs().maxCoeff()});
      INFO("linear block ", blk.label, " row ", r);
      CHECK(std::abs((c1[r] - c0[r]) - pred[r]) <= 1e-9 * round_scale);
    }
    return;
  }

  VectorXd xp = x, xm = x;
  std::vector<double> cp(blk.m), cm(blk.m);
  for (int i = 0; i < n; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    blk.eval(xp.data(), cp.data());
    blk.eval(xm.data(), cm.data());
    for (int r = 0; r < blk.m; ++r) {
      const double fd = (cp[r] - cm[r]) / (2.0 * h);
      const double scale = std::max({1.0, std::abs(fd), std::abs(J(r, i))});
      // allowance for cancellation when the row value dwarfs the derivative
      const double fd_noise =
          5e-15 * std::max(std::abs(cp[r]), std::abs(cm[r])) / h;
      INFO("block ", blk.label, " row ", r, " col ", i);
      CHECK(std::abs(J(r, i) - fd) <= tol * scale + fd_noise);
    }
    xp[i] = x[i];
    xm[i] = x[i];
  }
}

void check_objective_gradient(const nlp::NlpProblem& prob, const VectorXd& x,
                              double tol) {
  VectorXd g = VectorXd::Zero(prob.n);
  prob.f(x.data(), g.data());
  VectorXd xp = x, xm = x;
  for (int i = 0; i < prob.n; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    const double fp = prob.f(xp.data(), nullptr);
    const double fm = prob.f(xm.data(), nullptr);
    const double fd = (fp - fm) / (2.0 * h);
    const double scale = std::max({1.0, std::abs(fd), std::abs(g[i])});
    const double fd_noise = 5e-15 * std::max(std::abs(fp), std::abs(fm)) / h;
    INFO("objective col ", i);
    CHECK(std::abs(g[i] - fd) <= tol * scale + fd_noise);
    xp[i] = x[i];
    xm[i] = x[i];
  }
}

void check_problem(const BuiltProblem& bp, unsigned seed, int points, double tol) {
  std::mt19937 rng(seed);
  for (int t = 0; t < points; ++t) {
    VectorXd x = random_point(bp.prob, rng);
    check_objective_gradient(bp.prob, x, tol);
    for (const auto& blk : bp.prob.eq) check_block_jacobian(blk, x, tol, rng);
    for (const auto& blk : bp.prob.ineq) check_block_jacobian(blk, x, tol, rng);
  }
}

}  // namespace

TEST_CASE("base dispatch problem derivatives match central differences") {
  NetworkCase nc = load_case5();
  AcopfBuilder b(nc, 0);
  b.add_balance();
  b.add_branch_limits();
  b.add_generation_cost(1.0);
  b.add_penalty_epigraph(nc.delta_weight);
  BuiltProblem bp = b.take();
  check_problem(bp, 42, 25, 1e-5);
}

TEST_CASE("smoothed coordination problem derivatives match central differences") {
  NetworkCase nc = load_case5();
  AcopfBuilder b(nc, 1);
  b.add_balance();
  b.add_branch_limits();
  b.add_penalty_epigraph(0.25);
  b.add_copy_block();
  b.add_smoothed_coupling(1e-3);
  b.add_copy_voltage_link();
  BuiltProblem bp = b.take();
  check_problem(bp, 43, 25, 1e-5);
}

TEST_CASE("big-M coordination problem derivatives match central differences") {
  NetworkCase nc = load_case5();
  AcopfBuilder b(nc, 2);
  b.add_balance();
  b.add_branch_limits();
  b.add_penalty_epigraph(0.25);
  b.add_copy_block();
  b.add_bigm_coupling();
  b.add_copy_voltage_link();
  BuiltProblem bp = b.take();
  check_problem(bp, 44, 25, 1e-5);
}

TEST_CASE("recourse problem derivatives match central differences") {
  NetworkCase nc = load_case5();
  StateTopology topo0 = StateTopology::make(nc, 0);
  StateVector base = AcopfBuilder::flat_start(nc, topo0);
  AcopfBuilder b(nc, 1);
  b.add_balance();
  b.add_branch_limits();
  b.add_penalty_epigraph(1.0);
  b.add_smoothed_response_const(base, 1e-3);
  b.add_reactive_relaxation(base, 1e-3);
  BuiltProblem bp = b.take();
  check_problem(bp, 45, 25, 1e-5);
}

TEST_CASE("proximal objective derivatives match central differences") {
  NetworkCase nc = load_case3();
  AcopfBuilder b(nc, 0);
  b.add_balance();
  b.add_generation_cost(1.0);
  ProxTermRefs refs;
  const int n0 = b.layout().size;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  refs.lin = VectorXd::NullaryExpr(n0, [&](int) { return u(rng); });
  refs.target = VectorXd::NullaryExpr(n0, [&](int) { return u(rng); });
  refs.rho = 37.5;
  refs.kmult = 3.0;
  refs.csq = 11.25;
  b.add_prox_term(0, n0, &refs);
  BuiltProblem bp = b.take();
  check_problem(bp, 46, 25, 1e-5);
}
