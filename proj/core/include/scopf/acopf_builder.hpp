#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>

#include "scopf/case.hpp"
#include "scopf/nlp/problem.hpp"
#include "scopf/state.hpp"

namespace scopf {

inline constexpr double kInf = 1e20;

enum class CouplingMode { Smoothed, BigM };

// Shared constants read by proximal objective terms. The coordination loop
// rewrites these between solves; the problem structure is built once.
//   value = <lin, x_seg> + rho/2 * (kmult*|x_seg|^2 - 2*<target, x_seg> + csq)
struct ProxTermRefs {
  Eigen::VectorXd lin, target;
  double rho = 0.0;
  double kmult = 1.0;
  double csq = 0.0;
};

struct BuiltProblem {
  nlp::NlpProblem prob;
  StateTopology topo;
  StateLayout layout;  // state block lives at offset 0
  StateLayout copy_layout;
  int copy_offset = -1;
  std::vector<std::function<void(Eigen::VectorXd&)>> extra_init;

  // Pack a state (and optional base copy) and initialize auxiliary variables.
  Eigen::VectorXd initial_point(const StateVector& sv,
                                const StateVector* copy = nullptr) const;
  StateVector state_of(const Eigen::VectorXd& x) const;
  StateVector copy_of(const Eigen::VectorXd& x) const;
};

// Assembles NLPs over one state block: base dispatch, coordination blocks,
// and the two recourse variants share the same bricks.
class AcopfBuilder {
public:
  AcopfBuilder(const NetworkCase& nc, int state);

  const StateTopology& topo() const { return topo_; }
  const StateLayout& layout() const { return layout_; }
  int copy_offset() const { return copy_offset_; }

  int add_var(double lo, double hi);
  void set_bounds(int idx, double lo, double hi);

  int add_copy_block();  // base-shaped copy of the base state variables

  void add_balance();
  void add_branch_limits();
  void add_penalty_epigraph(double weight);
  void add_generation_cost(double weight);

  // Single linear row: sum coef_i * x_i + constant (= or <=) 0.
  void add_linear_constraint(nlp::ConstraintBlock::Kind kind,
                             std::vector<std::pair<int, double>> terms,
                             double constant, const std::string& label);

  void add_prox_term(int offset, int len, const ProxTermRefs* refs);

  // Response coupling against the base copy block (coordination problems).
  void add_smoothed_coupling(double eps);
  void add_bigm_coupling();
  void add_copy_voltage_link();

  // Response against a fixed base point (recourse problems).
  void add_smoothed_response_const(const StateVector& base, double eps);
  void add_reactive_relaxation(const StateVector& base, double eps);

  void fix_delta(double value);

  BuiltProblem take();

  // Capacity-proportional dispatch start with flat voltages.
  static StateVector flat_start(const NetworkCase& nc, const StateTopology& topo);
  // System response bound from total capacity and the smallest participation.
  static double delta_bound(const NetworkCase& nc);

private:
  void add_state_vars();
  void register_init(std::function<void(Eigen::VectorXd&)> fn);
  int add_pwl_epigraph(const PwlCost& cost, std::vector<int> vars, double weight);

  const NetworkCase& nc_;
  StateTopology topo_;
  StateLayout layout_;
  StateLayout copy_layout_;
  int copy_offset_ = -1;
  BuiltProblem out_;
};

}  // namespace scopf
