#include "scopf/state.hpp"

#include <cassert>

namespace scopf {

StateTopology StateTopology::make(const NetworkCase& nc, int state) {
  StateTopology t;
  t.state = state;
  int out_gen = -1, out_line = -1, out_xfmr = -1;
  if (state > 0) {
    const auto& c = nc.contingencies.at(state - 1);
    switch (c.kind) {
      case OutageKind::Generator: out_gen = c.element; break;
      case OutageKind::Line: out_line = c.element; break;
      case OutageKind::Transformer: out_xfmr = c.element; break;
    }
  }
  t.pos_gen.assign(nc.generators.size(), -1);
  t.pos_line.assign(nc.lines.size(), -1);
  t.pos_xfmr.assign(nc.transformers.size(), -1);
  for (int i = 0; i < static_cast<int>(nc.generators.size()); ++i)
    if (i != out_gen) {
      t.pos_gen[i] = static_cast<int>(t.gens.size());
      t.gens.push_back(i);
    }
  for (int i = 0; i < static_cast<int>(nc.lines.size()); ++i)
    if (i != out_line) {
      t.pos_line[i] = static_cast<int>(t.lines.size());
      t.lines.push_back(i);
    }
  for (int i = 0; i < static_cast<int>(nc.transformers.size()); ++i)
    if (i != out_xfmr) {
      t.pos_xfmr[i] = static_cast<int>(t.xfmrs.size());
      t.xfmrs.push_back(i);
    }
  return t;
}

StateVector StateVector::zeros(const NetworkCase& nc, const StateTopology& topo) {
  StateVector sv;
  size_t nb = nc.buses.size();
  sv.v.assign(nb, 1.0);
  sv.theta.assign(nb, 0.0);
  sv.sig_pp.assign(nb, 0.0);
  sv.sig_pm.assign(nb, 0.0);
  sv.sig_qp.assign(nb, 0.0);
  sv.sig_qm.assign(nb, 0.0);
  sv.p.assign(topo.gens.size(), 0.0);
  sv.q.assign(topo.gens.size(), 0.0);
  sv.sig_s.assign(topo.num_branches(), 0.0);
  sv.delta = 0.0;
  return sv;
}

StateLayout::StateLayout(int num_buses, int num_gens, int num_branches)
    : nb(num_buses), ng(num_gens), nbr(num_branches) {
  int at = 0;
  v = at; at += nb;
  theta = at; at += nb;
  sig_pp = at; at += nb;
  sig_pm = at; at += nb;
  sig_qp = at; at += nb;
  sig_qm = at; at += nb;
  p = at; at += ng;
  q = at; at += ng;
  sig_s = at; at += nbr;
  delta = at; at += 1;
  size = at;
}

void StateLayout::pack(const StateVector& sv, double* out) const {
  assert(static_cast<int>(sv.v.size()) == nb);
  assert(static_cast<int>(sv.p.size()) == ng);
  assert(static_cast<int>(sv.sig_s.size()) == nbr);
  auto put = [&](int off, const std::vector<double>& src) {
    for (size_t i = 0; i < src.size(); ++i) out[off + i] = src[i];
  };
  put(v, sv.v);
  put(theta, sv.theta);
  put(sig_pp, sv.sig_pp);
  put(sig_pm, sv.sig_pm);
  put(sig_qp, sv.sig_qp);
  put(sig_qm, sv.sig_qm);
  put(p, sv.p);
  put(q, sv.q);
  put(sig_s, sv.sig_s);
  out[delta] = sv.delta;
}

StateVector StateLayout::unpack(const double* x) const {
  StateVector sv;
  auto get = [&](int off, int n) { return std::vector<double>(x + off, x + off + n); };
  sv.v = get(v, nb);
  sv.theta = get(theta, nb);
  sv.sig_pp = get(sig_pp, nb);
  sv.sig_pm = get(sig_pm, nb);
  sv.sig_qp = get(sig_qp, nb);
  sv.sig_qm = get(sig_qm, nb);
  sv.p = get(p, ng);
  sv.q = get(q, ng);
  sv.sig_s = get(sig_s, nbr);
  sv.delta = x[delta];
  return sv;
}

}  // namespace scopf
