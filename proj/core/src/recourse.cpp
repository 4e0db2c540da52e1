#include "scopf/recourse.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "scopf/acopf_builder.hpp"
#include "scopf/evaluation.hpp"

namespace scopf {

namespace {

double clampd(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

// Warm start: spread the lost injection across the surviving participation.
StateVector response_start(const NetworkCase& nc, const StateVector& base, int k) {
  StateVector sv = restrict_to_state(nc, base, k);
  const Contingency& ctg = nc.contingencies[k - 1];
  double lost = 0.0;
  if (ctg.kind == OutageKind::Generator) lost = base.p[ctg.element];
  StateTopology topo = StateTopology::make(nc, k);
  double alpha_sum = 0.0;
  for (int gi : topo.gens) alpha_sum += nc.generators[gi].alpha;
  const double dws = alpha_sum > 0.0 ? lost / alpha_sum : 0.0;
  sv.delta = dws;
  for (size_t j = 0; j < topo.gens.size(); ++j) {
    const Generator& g = nc.generators[topo.gens[j]];
    sv.p[j] = clampd(base.p[topo.gens[j]] + g.alpha * dws, g.p_lo, g.p_hi);
  }
  absorb_residuals(nc, topo, sv);
  return sv;
}

bool run_nlp(const nlp::NlpProblem& prob, const Eigen::VectorXd& x0,
             const nlp::SolveOptions& opt, Eigen::VectorXd& x,
             nlp::SolveStatus* status) {
  auto res = nlp::solve(prob, x0, opt);
  if (status) *status = res.status;
  if (res.status == nlp::SolveStatus::NumericalFailure || !res.x.allFinite())
    return false;
  x = res.x;
  return true;
}

}  // namespace

StateVector solve_smoothed_recourse(const NetworkCase& nc, const StateVector& base,
                                    int k, const RecourseOptions& opt, bool* ok,
                                    nlp::SolveStatus* status) {
  AcopfBuilder b(nc, k);
  b.add_balance();
  b.add_branch_limits();
  b.add_penalty_epigraph(1.0);
  b.add_smoothed_response_const(base, opt.eps);
  b.add_reactive_relaxation(base, opt.eps);
  BuiltProblem bp = b.take();

  StateVector start = response_start(nc, base, k);
  Eigen::VectorXd x0 = bp.initial_point(start);
  Eigen::VectorXd x;
  const bool good = run_nlp(bp.prob, x0, opt.nlp, x, status);
  if (ok) *ok = good;
  return good ? bp.state_of(x) : start;
}

RestrictionSets detect_restrictions(const NetworkCase& nc, const StateVector& base,
                                    int k, const StateVector& relaxed, double mu) {
  RestrictionSets sets;
  StateTopology topo = StateTopology::make(nc, k);
  for (size_t j = 0; j < topo.gens.size(); ++j) {
    const int gi = topo.gens[j];
    const Generator& g = nc.generators[gi];
    if (g.alpha > 0.0) {
      const double resp = base.p[gi] + g.alpha * relaxed.delta;
      const bool hi = resp >= g.p_hi - mu;
      const bool lo = resp <= g.p_lo + mu;
      if (hi && lo) {
        // degenerate range: closer bound wins, upper on ties
        if (g.p_hi - resp <= resp - g.p_lo)
          sets.p_upper.push_back(gi);
        else
          sets.p_lower.push_back(gi);
      } else if (hi) {
        sets.p_upper.push_back(gi);
      } else if (lo) {
        sets.p_lower.push_back(gi);
      }
    }
    const double q = relaxed.q[j];
    const bool qhi = q >= g.q_hi - mu;
    const bool qlo = q <= g.q_lo + mu;
    if (qhi && qlo) {
      if (g.q_hi - q <= q - g.q_lo)
        sets.q_upper.push_back(gi);
      else
        sets.q_lower.push_back(gi);
    } else if (qhi) {
      sets.q_upper.push_back(gi);
    } else if (qlo) {
      sets.q_lower.push_back(gi);
    }
  }
  return sets;
}

StateVector solve_restricted_recourse(const NetworkCase& nc, const StateVector& base,
                                      int k, const RestrictionSets& sets,
                                      const StateVector& start,
                                      const RecourseOptions& opt, bool* ok,
                                      nlp::SolveStatus* status) {
  AcopfBuilder b(nc, k);
  b.add_balance();
  b.add_branch_limits();
  b.add_penalty_epigraph(1.0);

  const StateLayout& lay = b.layout();
  const StateTopology& topo = b.topo();
  auto in = [](const std::vector<int>& v, int x) {
    return std::find(v.begin(), v.end(), x) != v.end();
  };

  // Active power: pinned generators sit on the bound and constrain delta;
  // everyone else tracks the response line exactly.
  for (size_t j = 0; j < topo.gens.size(); ++j) {
    const int gi = topo.gens[j];
    const Generator& g = nc.generators[gi];
    const int pj = lay.p + static_cast<int>(j);
    const double p0 = base.p[gi];
    if (in(sets.p_upper, gi)) {
      b.set_bounds(pj, g.p_hi, g.p_hi);
      // delta >= (p_hi - p0) / alpha
      b.add_linear_constraint(nlp::ConstraintBlock::Kind::Inequality,
                              {{lay.delta, -1.0}}, (g.p_hi - p0) / g.alpha,
                              "response_floor");
    } else if (in(sets.p_lower, gi)) {
      b.set_bounds(pj, g.p_lo, g.p_lo);
      // delta <= (p_lo - p0) / alpha
      b.add_linear_constraint(nlp::ConstraintBlock::Kind::Inequality,
                              {{lay.delta, 1.0}}, -(g.p_lo - p0) / g.alpha,
                              "response_ceil");
    } else {
      b.add_linear_constraint(nlp::ConstraintBlock::Kind::Equality,
                              {{pj, 1.0}, {lay.delta, -g.alpha}}, -p0,
                              "response_line");
    }
  }

  // Reactive power and generator-bus voltage: a pinned reactive output frees
  // the voltage on one side of the base value only; unpinned buses hold the
  // base voltage.
  std::map<int, std::pair<bool, bool>> bus_dir;  // bus -> (allow below, allow above)
  for (size_t j = 0; j < topo.gens.size(); ++j) {
    const int gi = topo.gens[j];
    const Generator& g = nc.generators[gi];
    const int qj = lay.q + static_cast<int>(j);
    const int bus = g.bus;
    auto& dir = bus_dir[bus];
    if (in(sets.q_upper, gi)) {
      b.set_bounds(qj, g.q_hi, g.q_hi);
      dir.first = true;  // voltage may sag below the base value
    } else if (in(sets.q_lower, gi)) {
      b.set_bounds(qj, g.q_lo, g.q_lo);
      dir.second = true;  // voltage may rise above the base value
    }
  }
  for (const auto& [bus, dir] : bus_dir) {
    const Bus& bu = nc.buses[bus];
    const double v0 = clampd(base.v[bus], bu.v_lo, bu.v_hi);
    double lo = v0, hi = v0;
    if (dir.first) lo = bu.v_lo;
    if (dir.second) hi = bu.v_hi;
    b.set_bounds(lay.v + bus, std::min(lo, hi), std::max(lo, hi));
  }

  BuiltProblem bp = b.take();
  Eigen::VectorXd x0 = bp.initial_point(start);
  Eigen::VectorXd x;
  const bool good = run_nlp(bp.prob, x0, opt.nlp, x, status);
  if (ok) *ok = good;
  return good ? bp.state_of(x) : start;
}

void polish_solution(const NetworkCase& nc, const StateVector& base, int k,
                     StateVector& sv) {
  constexpr double kVoltTol = 1e-5;
  StateTopology topo = StateTopology::make(nc, k);
  for (size_t j = 0; j < topo.gens.size(); ++j) {
    const int gi = topo.gens[j];
    const Generator& g = nc.generators[gi];
    sv.p[j] = clampd(base.p[gi] + g.alpha * sv.delta, g.p_lo, g.p_hi);
  }
  // settle each generator bus onto the switching set
  std::map<int, std::vector<size_t>> bus_gens;
  for (size_t j = 0; j < topo.gens.size(); ++j)
    bus_gens[nc.generators[topo.gens[j]].bus].push_back(j);
  for (const auto& [bus, gens] : bus_gens) {
    const double dv = sv.v[bus] - base.v[bus];
    if (std::abs(dv) <= kVoltTol) {
      sv.v[bus] = base.v[bus];
    } else if (dv < 0.0) {
      for (size_t j : gens) sv.q[j] = nc.generators[topo.gens[j]].q_hi;
    } else {
      for (size_t j : gens) sv.q[j] = nc.generators[topo.gens[j]].q_lo;
    }
  }
  absorb_residuals(nc, topo, sv);
}

RecourseResult solve_contingency(const NetworkCase& nc, const StateVector& base,
                                 int k, const RecourseOptions& opt) {
  RecourseResult out;
  StateTopology topo = StateTopology::make(nc, k);

  bool ok = false;
  nlp::SolveStatus st = nlp::SolveStatus::Converged;
  StateVector relaxed = solve_smoothed_recourse(nc, base, k, opt, &ok, &st);
  if (!ok) {
    out.sv = restrict_to_state(nc, base, k);
    out.penalty = state_penalty(nc, topo, out.sv);
    out.path = "fallback";
    out.ok = false;
    out.status = st;
    return out;
  }

  DisjunctionGap gap = disjunction_violation(nc, k, base, relaxed);
  if (gap.active <= opt.mu && gap.reactive <= opt.mu) {
    out.sv = relaxed;
    out.path = "smoothed";
    out.ok = true;
    out.status = st;
  } else {
    RestrictionSets sets = detect_restrictions(nc, base, k, relaxed, opt.mu);
    bool rok = false;
    nlp::SolveStatus rst = nlp::SolveStatus::Converged;
    StateVector restricted =
        solve_restricted_recourse(nc, base, k, sets, relaxed, opt, &rok, &rst);
    out.sv = rok ? restricted : relaxed;
    out.path = "restricted";
    out.ok = rok;
    out.status = rst;
  }
  polish_solution(nc, base, k, out.sv);
  out.penalty = state_penalty(nc, topo, out.sv);
  return out;
}

}  // namespace scopf
