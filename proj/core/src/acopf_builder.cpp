#include "scopf/acopf_builder.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <set>

#include "scopf/evaluation.hpp"
#include "scopf/flows.hpp"
#include "scopf/smoothing.hpp"

namespace scopf {

using nlp::ConstraintBlock;
using nlp::JacEntry;
using nlp::ObjectiveTerm;
using Eigen::VectorXd;

namespace {
constexpr double kThetaBound = 3.2;
}

Eigen::VectorXd BuiltProblem::initial_point(const StateVector& sv,
                                            const StateVector* copy) const {
  VectorXd x = VectorXd::Zero(prob.n);
  layout.pack(sv, x.data());
  if (copy_offset >= 0) {
    assert(copy);
    copy_layout.pack(*copy, x.data() + copy_offset);
  }
  for (const auto& fn : extra_init) fn(x);
  // keep strictly inside the box
  for (int i = 0; i < prob.n; ++i) x[i] = std::clamp(x[i], prob.lo[i], prob.hi[i]);
  return x;
}

StateVector BuiltProblem::state_of(const Eigen::VectorXd& x) const {
  return layout.unpack(x.data());
}

StateVector BuiltProblem::copy_of(const Eigen::VectorXd& x) const {
  assert(copy_offset >= 0);
  return copy_layout.unpack(x.data() + copy_offset);
}

AcopfBuilder::AcopfBuilder(const NetworkCase& nc, int state)
    : nc_(nc), topo_(StateTopology::make(nc, state)) {
  layout_ = StateLayout(static_cast<int>(nc.buses.size()),
                        static_cast<int>(topo_.gens.size()), topo_.num_branches());
  out_.topo = topo_;
  out_.layout = layout_;
  out_.prob.n = 0;
  add_state_vars();
}

int AcopfBuilder::add_var(double lo, double hi) {
  const int idx = out_.prob.n++;
  out_.prob.lo.conservativeResize(out_.prob.n);
  out_.prob.hi.conservativeResize(out_.prob.n);
  out_.prob.lo[idx] = lo;
  out_.prob.hi[idx] = hi;
  return idx;
}

void AcopfBuilder::set_bounds(int idx, double lo, double hi) {
  out_.prob.lo[idx] = lo;
  out_.prob.hi[idx] = hi;
}

double AcopfBuilder::delta_bound(const NetworkCase& nc) {
  double cap = 0.0, amin = 0.0;
  for (const auto& g : nc.generators) {
    cap += g.p_hi;
    if (g.alpha > 0.0) amin = amin == 0.0 ? g.alpha : std::min(amin, g.alpha);
  }
  return amin > 0.0 ? cap / amin : 0.0;
}

void AcopfBuilder::add_state_vars() {
  const int nb = layout_.nb;
  for (int i = 0; i < nb; ++i) add_var(nc_.buses[i].v_lo, nc_.buses[i].v_hi);
  // first bus is the angle reference; otherwise a uniform shift is a null direction
  add_var(0.0, 0.0);
  for (int i = 1; i < nb; ++i) add_var(-kThetaBound, kThetaBound);
  for (int s = 0; s < 4; ++s)
    for (int i = 0; i < nb; ++i) add_var(0.0, kInf);
  for (int gi : topo_.gens) add_var(nc_.generators[gi].p_lo, nc_.generators[gi].p_hi);
  for (int gi : topo_.gens) add_var(nc_.generators[gi].q_lo, nc_.generators[gi].q_hi);
  for (int b = 0; b < layout_.nbr; ++b) add_var(0.0, kInf);
  if (topo_.state == 0) {
    add_var(0.0, 0.0);
  } else {
    const double d = delta_bound(nc_);
    add_var(-d, d);
  }
  assert(out_.prob.n == layout_.size);
}

int AcopfBuilder::add_copy_block() {
  copy_layout_ = StateLayout(static_cast<int>(nc_.buses.size()),
                             static_cast<int>(nc_.generators.size()),
                             static_cast<int>(nc_.lines.size() + nc_.transformers.size()));
  copy_offset_ = out_.prob.n;
  const int nb = copy_layout_.nb;
  for (int i = 0; i < nb; ++i) add_var(nc_.buses[i].v_lo, nc_.buses[i].v_hi);
  add_var(0.0, 0.0);
  for (int i = 1; i < nb; ++i) add_var(-kThetaBound, kThetaBound);
  for (int s = 0; s < 4; ++s)
    for (int i = 0; i < nb; ++i) add_var(0.0, kInf);
  for (const auto& g : nc_.generators) add_var(g.p_lo, g.p_hi);
  for (const auto& g : nc_.generators) add_var(g.q_lo, g.q_hi);
  for (int b = 0; b < copy_layout_.nbr; ++b) add_var(0.0, kInf);
  add_var(0.0, 0.0);  // the base response scalar is pinned at zero
  out_.copy_layout = copy_layout_;
  out_.copy_offset = copy_offset_;
  return copy_offset_;
}

void AcopfBuilder::register_init(std::function<void(Eigen::VectorXd&)> fn) {
  out_.extra_init.push_back(std::move(fn));
}

void AcopfBuilder::add_balance() {
  const NetworkCase* nc = &nc_;
  StateTopology topo = topo_;
  StateLayout L = layout_;
  const int nb = L.nb;

  ConstraintBlock blk;
  blk.kind = ConstraintBlock::Kind::Equality;
  blk.m = 2 * nb;
  blk.linear = false;
  blk.label = "balance";
  blk.eval = [nc, topo, L, nb](const double* x, double* out) {
    for (int i = 0; i < nb; ++i) {
      out[i] = -nc->buses[i].load_p - x[L.sig_pp + i] + x[L.sig_pm + i];
      out[nb + i] = -nc->buses[i].load_q - x[L.sig_qp + i] + x[L.sig_qm + i];
    }
    for (size_t gp = 0; gp < topo.gens.size(); ++gp) {
      const auto& g = nc->generators[topo.gens[gp]];
      out[g.bus] += x[L.p + gp];
      out[nb + g.bus] += x[L.q + gp];
    }
    for (int ei : topo.lines) {
      const auto& e = nc->lines[ei];
      auto f = line_flow(e, x[L.v + e.from], x[L.v + e.to], x[L.theta + e.from],
                         x[L.theta + e.to]);
      out[e.from] -= f.p_o;
      out[nb + e.from] -= f.q_o;
      out[e.to] -= f.p_d;
      out[nb + e.to] -= f.q_d;
    }
    for (int fi : topo.xfmrs) {
      const auto& t = nc->transformers[fi];
      auto f = transformer_flow(t, x[L.v + t.from], x[L.v + t.to],
                                x[L.theta + t.from], x[L.theta + t.to]);
      out[t.from] -= f.p_o;
      out[nb + t.from] -= f.q_o;
      out[t.to] -= f.p_d;
      out[nb + t.to] -= f.q_d;
    }
  };
  blk.jac = [nc, topo, L, nb](const double* x, std::vector<JacEntry>& out) {
    for (int i = 0; i < nb; ++i) {
      out.push_back({i, L.sig_pp + i, -1.0});
      out.push_back({i, L.sig_pm + i, 1.0});
      out.push_back({nb + i, L.sig_qp + i, -1.0});
      out.push_back({nb + i, L.sig_qm + i, 1.0});
    }
    for (size_t gp = 0; gp < topo.gens.size(); ++gp) {
      const auto& g = nc->generators[topo.gens[gp]];
      out.push_back({g.bus, static_cast<int>(L.p + gp), 1.0});
      out.push_back({nb + g.bus, static_cast<int>(L.q + gp), 1.0});
    }
    auto branch_rows = [&](int o, int d, const BranchFlowJac& J) {
      const int cols[4] = {L.v + o, L.v + d, L.theta + o, L.theta + d};
      const int rows[4] = {o, nb + o, d, nb + d};
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
          out.push_back({rows[r], cols[c], -J.d[r][c]});
    };
    BranchFlowJac J;
    for (int ei : topo.lines) {
      const auto& e = nc->lines[ei];
      line_flow_jac(e, x[L.v + e.from], x[L.v + e.to], x[L.theta + e.from],
                    x[L.theta + e.to], J);
      branch_rows(e.from, e.to, J);
    }
    for (int fi : topo.xfmrs) {
      const auto& t = nc->transformers[fi];
      transformer_flow_jac(t, x[L.v + t.from], x[L.v + t.to], x[L.theta + t.from],
                           x[L.theta + t.to], J);
      branch_rows(t.from, t.to, J);
    }
  };
  out_.prob.eq.push_back(std::move(blk));
}

void AcopfBuilder::add_branch_limits() {
  const NetworkCase* nc = &nc_;
  StateTopology topo = topo_;
  StateLayout L = layout_;
  const bool ctg = topo.state > 0;

  ConstraintBlock blk;
  blk.kind = ConstraintBlock::Kind::Inequality;
  blk.m = 2 * topo.num_branches();
  blk.linear = false;
  blk.label = "branch_limits";
  blk.eval = [nc, topo, L, ctg](const double* x, double* out) {
    int at = 0;
    for (int ei : topo.lines) {
      const auto& e = nc->lines[ei];
      auto f = line_flow(e, x[L.v + e.from], x[L.v + e.to], x[L.theta + e.from],
                         x[L.theta + e.to]);
      const double r = ctg ? e.r_max_ctg : e.r_max_base;
      const double s = x[L.sig_s + at / 2];
      const double lo = r * x[L.v + e.from] + s, ld = r * x[L.v + e.to] + s;
      out[at++] = f.p_o * f.p_o + f.q_o * f.q_o - lo * lo;
      out[at++] = f.p_d * f.p_d + f.q_d * f.q_d - ld * ld;
    }
    for (int fi : topo.xfmrs) {
      const auto& t = nc->transformers[fi];
      auto f = transformer_flow(t, x[L.v + t.from], x[L.v + t.to],
                                x[L.theta + t.from], x[L.theta + t.to]);
      const double r = ctg ? t.s_max_ctg : t.s_max_base;
      const double s = x[L.sig_s + at / 2];
      const double lim = r + s;
      out[at++] = f.p_o * f.p_o + f.q_o * f.q_o - lim * lim;
      out[at++] = f.p_d * f.p_d + f.q_d * f.q_d - lim * lim;
    }
  };
  blk.jac = [nc, topo, L, ctg](const double* x, std::vector<JacEntry>& out) {
    BranchFlowJac J;
    int br = 0;
    auto emit = [&](int o, int d, double po, double qo, double pd, double qd,
                    double lim_o, double lim_d, double dlim_dvo, double dlim_dvd) {
      const int cols[4] = {L.v + o, L.v + d, L.theta + o, L.theta + d};
      const int row_o = 2 * br, row_d = 2 * br + 1;
      for (int c = 0; c < 4; ++c) {
        out.push_back({row_o, cols[c], 2 * po * J.d[0][c] + 2 * qo * J.d[1][c]});
        out.push_back({row_d, cols[c], 2 * pd * J.d[2][c] + 2 * qd * J.d[3][c]});
      }
      // limit side: d/dv terms and the shared slack
      if (dlim_dvo != 0.0) out.push_back({row_o, L.v + o, -2 * lim_o * dlim_dvo});
      if (dlim_dvd != 0.0) out.push_back({row_d, L.v + d, -2 * lim_d * dlim_dvd});
      out.push_back({row_o, L.sig_s + br, -2 * lim_o});
      out.push_back({row_d, L.sig_s + br, -2 * lim_d});
    };
    for (int ei : topo.lines) {
      const auto& e = nc->lines[ei];
      auto f = line_flow_jac(e, x[L.v + e.from], x[L.v + e.to], x[L.theta + e.from],
                             x[L.theta + e.to], J);
      const double r = ctg ? e.r_max_ctg : e.r_max_base;
      const double s = x[L.sig_s + br];
      emit(e.from, e.to, f.p_o, f.q_o, f.p_d, f.q_d, r * x[L.v + e.from] + s,
           r * x[L.v + e.to] + s, r, r);
      ++br;
    }
    for (int fi : topo.xfmrs) {
      const auto& t = nc->transformers[fi];
      auto f = transformer_flow_jac(t, x[L.v + t.from], x[L.v + t.to],
                                    x[L.theta + t.from], x[L.theta + t.to], J);
      const double r = ctg ? t.s_max_ctg : t.s_max_base;
      const double s = x[L.sig_s + br];
      emit(t.from, t.to, f.p_o, f.q_o, f.p_d, f.q_d, r + s, r + s, 0.0, 0.0);
      ++br;
    }
  };
  out_.prob.ineq.push_back(std::move(blk));
}

// Exact split of a convex increasing piecewise-linear cost: one bounded
// variable per piece, a unit-coefficient row tying their sum to the metered
// quantity, and the slopes straight in the objective. Increasing slopes make
// the minimizer fill cheap pieces first, so no epigraph rows are needed and
// every coefficient stays O(1).
int AcopfBuilder::add_pwl_cost(const PwlCost& cost, std::vector<int> vars,
                               double weight) {
  const std::vector<double> lens = cost.lengths();
  const std::vector<double> slps = cost.slopes();
  const int np = static_cast<int>(slps.size());
  const int u0 = out_.prob.n;
  for (int j = 0; j < np; ++j)
    add_var(0.0, std::isfinite(lens[j]) ? lens[j] : kInf);

  ConstraintBlock blk;
  blk.kind = ConstraintBlock::Kind::Equality;
  blk.m = 1;
  blk.linear = true;
  blk.label = "cost_link";
  std::vector<int> vs = vars;
  blk.eval = [vs, u0, np](const double* x, double* out) {
    double s = 0.0;
    for (int j = 0; j < np; ++j) s += x[u0 + j];
    for (int v : vs) s -= x[v];
    out[0] = s;
  };
  blk.jac = [vs, u0, np](const double*, std::vector<JacEntry>& out) {
    for (int j = 0; j < np; ++j) out.push_back({0, u0 + j, 1.0});
    for (int v : vs) out.push_back({0, v, -1.0});
  };
  out_.prob.eq.push_back(std::move(blk));

  std::vector<double> wslope(np);
  for (int j = 0; j < np; ++j) wslope[j] = weight * slps[j];
  ObjectiveTerm term;
  term.eval = [u0, np, wslope](const double* x, double* g) {
    double v = 0.0;
    for (int j = 0; j < np; ++j) {
      v += wslope[j] * x[u0 + j];
      if (g) g[u0 + j] += wslope[j];
    }
    return v;
  };
  out_.prob.objective.push_back(std::move(term));

  register_init([vs, u0, np, lens](VectorXd& x) {
    double s = 0.0;
    for (int v : vs) s += std::max(0.0, x[v]);
    for (int j = 0; j < np; ++j) {
      const double take = std::min(s, lens[j]);
      x[u0 + j] = take;
      s -= take;
    }
  });
  return u0;
}

void AcopfBuilder::add_penalty_epigraph(double weight) {
  const int nb = layout_.nb;
  for (int i = 0; i < nb; ++i)
    add_pwl_epigraph(nc_.penalties.bus_p, {layout_.sig_pp + i, layout_.sig_pm + i}, weight);
  for (int i = 0; i < nb; ++i)
    add_pwl_epigraph(nc_.penalties.bus_q, {layout_.sig_qp + i, layout_.sig_qm + i}, weight);
  for (int b = 0; b < layout_.nbr; ++b)
    add_pwl_epigraph(nc_.penalties.branch_s, {layout_.sig_s + b}, weight);
}

void AcopfBuilder::add_generation_cost(double weight) {
  for (size_t gp = 0; gp < topo_.gens.size(); ++gp)
    add_pwl_epigraph(nc_.generators[topo_.gens[gp]].cost,
                     {static_cast<int>(layout_.p + gp)}, weight);
}

void AcopfBuilder::add_linear_constraint(nlp::ConstraintBlock::Kind kind,
                                         std::vector<std::pair<int, double>> terms,
                                         double constant, const std::string& label) {
  ConstraintBlock blk;
  blk.kind = kind;
  blk.m = 1;
  blk.linear = true;
  blk.label = label;
  blk.eval = [terms, constant](const double* x, double* out) {
    double s = constant;
    for (const auto& [idx, coef] : terms) s += coef * x[idx];
    out[0] = s;
  };
  blk.jac = [terms](const double*, std::vector<JacEntry>& out) {
    for (const auto& [idx, coef] : terms) out.push_back({0, idx, coef});
  };
  if (kind == ConstraintBlock::Kind::Equality)
    out_.prob.eq.push_back(std::move(blk));
  else
    out_.prob.ineq.push_back(std::move(blk));
}

void AcopfBuilder::add_prox_term(int offset, int len, const ProxTermRefs* refs) {
  ObjectiveTerm term;
  term.eval = [offset, len, refs](const double* x, double* g) {
    double val = refs->rho * 0.5 * refs->csq;
    for (int i = 0; i < len; ++i) {
      const double xi = x[offset + i];
      val += refs->lin[i] * xi +
             refs->rho * (0.5 * refs->kmult * xi * xi - refs->target[i] * xi);
      if (g)
        g[offset + i] +=
            refs->lin[i] + refs->rho * (refs->kmult * xi - refs->target[i]);
    }
    return val;
  };
  out_.prob.objective.push_back(std::move(term));
}

void AcopfBuilder::add_smoothed_coupling(double eps) {
  assert(copy_offset_ >= 0);
  for (size_t gp = 0; gp < topo_.gens.size(); ++gp) {
    const int gi = topo_.gens[gp];
    const auto& g = nc_.generators[gi];
    const int ip = static_cast<int>(layout_.p + gp);
    const int ip0 = copy_offset_ + copy_layout_.p + gi;
    const int id = layout_.delta;
    const double alpha = g.alpha, plo = g.p_lo, phi = g.p_hi;
    ConstraintBlock blk;
    blk.kind = ConstraintBlock::Kind::Equality;
    blk.m = 1;
    blk.linear = false;
    blk.label = "response_smoothed";
    blk.eval = [=](const double* x, double* out) {
      auto r = smooth_response_full(x[ip0], alpha, x[id], plo, phi, eps);
      out[0] = x[ip] - r.value;
    };
    blk.jac = [=](const double* x, std::vector<JacEntry>& out) {
      auto r = smooth_response_full(x[ip0], alpha, x[id], plo, phi, eps);
      out.push_back({0, ip, 1.0});
      out.push_back({0, ip0, -r.d_p0});
      out.push_back({0, id, -r.d_delta});
    };
    out_.prob.eq.push_back(std::move(blk));
  }
}

void AcopfBuilder::add_bigm_coupling() {
  assert(copy_offset_ >= 0);
  const double dbound = delta_bound(nc_);
  for (size_t gp = 0; gp < topo_.gens.size(); ++gp) {
    const int gi = topo_.gens[gp];
    const auto& g = nc_.generators[gi];
    const int ip = static_cast<int>(layout_.p + gp);
    const int ip0 = copy_offset_ + copy_layout_.p + gi;
    const int id = layout_.delta;
    const int up = add_var(0.0, 1.0);
    const int um = add_var(0.0, 1.0);
    const double range = g.p_hi - g.p_lo;
    const double big = range + g.alpha * dbound;
    using K = ConstraintBlock::Kind;
    // w := p0 + alpha*delta; u flags select the clipped branch exactly
    add_linear_constraint(
        K::Inequality, {{ip0, 1.0}, {id, g.alpha}, {ip, -1.0}, {up, -big}}, 0.0,
        "response_bigm");
    add_linear_constraint(
        K::Inequality, {{ip, 1.0}, {ip0, -1.0}, {id, -g.alpha}, {um, -big}}, 0.0,
        "response_bigm");
    add_linear_constraint(K::Inequality, {{ip, -1.0}, {up, range}}, g.p_hi - range,
                          "response_bigm");
    add_linear_constraint(K::Inequality, {{ip, 1.0}, {um, range}}, -g.p_lo - range,
                          "response_bigm");
    add_linear_constraint(K::Inequality, {{up, 1.0}, {um, 1.0}}, -1.0,
                          "response_bigm");
    register_init([up, um](VectorXd& x) {
      x[up] = 0.0;
      x[um] = 0.0;
    });
  }
}

void AcopfBuilder::add_copy_voltage_link() {
  assert(copy_offset_ >= 0);
  std::set<int> buses;
  for (int gi : topo_.gens) buses.insert(nc_.generators[gi].bus);
  for (int i : buses)
    add_linear_constraint(ConstraintBlock::Kind::Equality,
                          {{layout_.v + i, 1.0}, {copy_offset_ + copy_layout_.v + i, -1.0}},
                          0.0, "voltage_link");
}

void AcopfBuilder::add_smoothed_response_const(const StateVector& base, double eps) {
  auto topo0 = StateTopology::make(nc_, 0);
  for (size_t gp = 0; gp < topo_.gens.size(); ++gp) {
    const int gi = topo_.gens[gp];
    const auto& g = nc_.generators[gi];
    const double p0 = base.p[topo0.pos_gen[gi]];
    const int ip = static_cast<int>(layout_.p + gp);
    const int id = layout_.delta;
    const double alpha = g.alpha, plo = g.p_lo, phi = g.p_hi;
    ConstraintBlock blk;
    blk.kind = ConstraintBlock::Kind::Equality;
    blk.m = 1;
    blk.linear = false;
    blk.label = "response_smoothed";
    blk.eval = [=](const double* x, double* out) {
      auto r = smooth_response_full(p0, alpha, x[id], plo, phi, eps);
      out[0] = x[ip] - r.value;
    };
    blk.jac = [=](const double* x, std::vector<JacEntry>& out) {
      auto r = smooth_response_full(p0, alpha, x[id], plo, phi, eps);
      out.push_back({0, ip, 1.0});
      out.push_back({0, id, -r.d_delta});
    };
    out_.prob.eq.push_back(std::move(blk));
  }
}

void AcopfBuilder::add_reactive_relaxation(const StateVector& base, double eps) {
  for (size_t gp = 0; gp < topo_.gens.size(); ++gp) {
    const int gi = topo_.gens[gp];
    const auto& g = nc_.generators[gi];
    const auto& bus = nc_.buses[g.bus];
    const double v0 = base.v[g.bus];
    const double span = bus.v_hi - bus.v_lo;
    const int vp = add_var(0.0, span);
    const int vm = add_var(0.0, span);
    const int iv = layout_.v + g.bus;
    const int iq = static_cast<int>(layout_.q + gp);
    add_linear_constraint(ConstraintBlock::Kind::Equality,
                          {{iv, 1.0}, {vp, -1.0}, {vm, 1.0}}, -v0, "voltage_split");
    const double qlo = g.q_lo, qhi = g.q_hi;
    ConstraintBlock blk;
    blk.kind = ConstraintBlock::Kind::Inequality;
    blk.m = 2;
    blk.linear = false;
    blk.label = "reactive_relaxed";
    blk.eval = [=](const double* x, double* out) {
      auto r = reactive_relaxation_residuals(x[iq], x[vp], x[vm], qlo, qhi, eps);
      out[0] = r.r1;
      out[1] = r.r2;
    };
    blk.jac = [=](const double* x, std::vector<JacEntry>& out) {
      auto r = reactive_relaxation_residuals(x[iq], x[vp], x[vm], qlo, qhi, eps);
      out.push_back({0, iq, r.d_r1_dq});
      out.push_back({0, vp, r.d_r1_dvp});
      out.push_back({1, iq, r.d_r2_dq});
      out.push_back({1, vm, r.d_r2_dvm});
    };
    out_.prob.ineq.push_back(std::move(blk));
    register_init([vp, vm, iv, v0](VectorXd& x) {
      x[vp] = std::max(0.0, x[iv] - v0);
      x[vm] = std::max(0.0, v0 - x[iv]);
    });
  }
}

void AcopfBuilder::fix_delta(double value) {
  set_bounds(layout_.delta, value, value);
}

BuiltProblem AcopfBuilder::take() { return std::move(out_); }

StateVector AcopfBuilder::flat_start(const NetworkCase& nc, const StateTopology& topo) {
  StateVector sv = StateVector::zeros(nc, topo);
  double load = 0.0, cap = 0.0;
  for (const auto& b : nc.buses) load += b.load_p;
  for (int gi : topo.gens) cap += nc.generators[gi].p_hi;
  for (size_t gp = 0; gp < topo.gens.size(); ++gp) {
    const auto& g = nc.generators[topo.gens[gp]];
    const double share = cap > 0.0 ? load * g.p_hi / cap : 0.0;
    sv.p[gp] = std::clamp(share, g.p_lo, g.p_hi);
    sv.q[gp] = std::clamp(0.0, g.q_lo, g.q_hi);
  }
  for (size_t i = 0; i < nc.buses.size(); ++i)
    sv.v[i] = std::clamp(1.0, nc.buses[i].v_lo, nc.buses[i].v_hi);
  return sv;
}

}  // namespace scopf
