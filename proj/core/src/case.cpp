#include "scopf/case.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace scopf {

PenaltyTables PenaltyTables::defaults(double s_base) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> len = {2.0 / s_base, 50.0 / s_base, inf};
  std::vector<double> slp = {s_base * 1e3, 5.0 * s_base * 1e3, s_base * 1e6};
  PenaltyTables t;
  t.bus_p = PwlCost(len, slp);
  t.bus_q = PwlCost(len, slp);
  t.branch_s = PwlCost(len, slp);
  return t;
}

void NetworkCase::validate() const {
  std::ostringstream bad;
  int nerr = 0;
  auto err = [&](const std::string& m) {
    bad << (nerr ? "; " : "") << m;
    ++nerr;
  };

  if (!(s_base > 0.0)) err("s_base must be positive");
  if (delta_weight < 0.0 || delta_weight > 1.0) err("delta_weight outside [0,1]");
  if (buses.empty()) err("case has no buses");
  if (penalties.bus_p.empty() || penalties.bus_q.empty() || penalties.branch_s.empty())
    err("penalty tables missing");

  std::set<std::string> seen;
  for (const auto& b : buses) {
    if (!seen.insert(b.id).second) err("duplicate bus id " + b.id);
    if (!(b.v_lo > 0.0) || !(b.v_hi >= b.v_lo))
      err("bus " + b.id + ": need 0 < v_lo <= v_hi");
  }
  const int nb = static_cast<int>(buses.size());

  seen.clear();
  for (const auto& g : generators) {
    if (!seen.insert(g.id).second) err("duplicate generator id " + g.id);
    if (g.bus < 0 || g.bus >= nb) err("generator " + g.id + ": bad bus ref");
    if (!(g.p_lo <= g.p_hi)) err("generator " + g.id + ": p_lo > p_hi");
    if (g.p_lo < 0.0) err("generator " + g.id + ": negative p_lo unsupported");
    if (!(g.q_lo <= g.q_hi)) err("generator " + g.id + ": q_lo > q_hi");
    if (g.alpha < 0.0) err("generator " + g.id + ": alpha < 0");
    if (g.cost.empty()) err("generator " + g.id + ": no cost table");
  }

  seen.clear();
  auto check_branch = [&](const std::string& id, int from, int to, double r0,
                          double r1, const char* what) {
    if (!seen.insert(id).second) err(std::string("duplicate ") + what + " id " + id);
    if (from < 0 || from >= nb || to < 0 || to >= nb)
      err(std::string(what) + " " + id + ": bad bus ref");
    if (from == to) err(std::string(what) + " " + id + ": self loop");
    if (!(r0 > 0.0) || !(r1 > 0.0)) err(std::string(what) + " " + id + ": ratings must be positive");
  };
  for (const auto& e : lines) {
    check_branch(e.id, e.from, e.to, e.r_max_base, e.r_max_ctg, "line");
    if (e.g == 0.0 && e.b == 0.0) err("line " + e.id + ": zero admittance");
  }
  for (const auto& f : transformers) {
    check_branch(f.id, f.from, f.to, f.s_max_base, f.s_max_ctg, "transformer");
    if (!(f.tap > 0.0)) err("transformer " + f.id + ": tap must be positive");
    if (f.g == 0.0 && f.b == 0.0) err("transformer " + f.id + ": zero admittance");
  }

  seen.clear();
  for (const auto& c : contingencies) {
    if (!seen.insert(c.id).second) err("duplicate contingency id " + c.id);
    int n = 0;
    switch (c.kind) {
      case OutageKind::Generator: n = static_cast<int>(generators.size()); break;
      case OutageKind::Line: n = static_cast<int>(lines.size()); break;
      case OutageKind::Transformer: n = static_cast<int>(transformers.size()); break;
    }
    if (c.element < 0 || c.element >= n)
      err("contingency " + c.id + ": bad element ref");
  }

  if (nerr) throw CaseError(bad.str());
}

}  // namespace scopf
