#pragma once

#include <vector>

#include "scopf/case.hpp"

namespace scopf {

// Surviving equipment for one system state. State 0 is the base case;
// state k >= 1 removes the single element of contingency k-1.
struct StateTopology {
  int state = 0;  // 0 = base, k>=1 = contingency index k-1
  std::vector<int> gens;   // indices into case.generators
  std::vector<int> lines;  // indices into case.lines
  std::vector<int> xfmrs;  // indices into case.transformers

  // Dense positions: pos_*[case index] = position within the active list, -1 if out.
  std::vector<int> pos_gen, pos_line, pos_xfmr;

  static StateTopology make(const NetworkCase& nc, int state);
  int num_branches() const { return static_cast<int>(lines.size() + xfmrs.size()); }
};

// One operating point. Bus quantities cover every bus; equipment quantities
// cover the state's surviving equipment, in StateTopology order. Branch
// overload slacks are lines first, then transformers.
struct StateVector {
  std::vector<double> v, theta;                  // per bus
  std::vector<double> sig_pp, sig_pm, sig_qp, sig_qm;  // nodal slacks, per bus
  std::vector<double> p, q;                      // per active generator
  std::vector<double> sig_s;                     // per active branch
  double delta = 0.0;                            // system response scalar

  static StateVector zeros(const NetworkCase& nc, const StateTopology& topo);
};

// Flat packing of a StateVector, used for consensus algebra and NLP variables:
// [v | theta | sig_pp | sig_pm | sig_qp | sig_qm | p | q | sig_s | delta].
struct StateLayout {
  int nb = 0, ng = 0, nbr = 0;
  int v = 0, theta = 0, sig_pp = 0, sig_pm = 0, sig_qp = 0, sig_qm = 0;
  int p = 0, q = 0, sig_s = 0, delta = 0;
  int size = 0;

  StateLayout() = default;
  StateLayout(int num_buses, int num_gens, int num_branches);

  void pack(const StateVector& sv, double* out) const;
  StateVector unpack(const double* x) const;
};

}  // namespace scopf
