#include "scopf/screening.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "scopf/flows.hpp"

namespace scopf {

double contingency_severity(const NetworkCase& nc, const StateTopology& topo,
                            const StateVector& base, const Contingency& ctg) {
  const auto& pen = nc.penalties;
  auto ends = [&](double p_o, double q_o, double p_d, double q_d) {
    return pen.bus_p.eval(std::abs(p_o)) + pen.bus_q.eval(std::abs(q_o)) +
           pen.bus_p.eval(std::abs(p_d)) + pen.bus_q.eval(std::abs(q_d));
  };
  switch (ctg.kind) {
    case OutageKind::Generator: {
      const int pos = topo.pos_gen[ctg.element];
      const double p = pos >= 0 ? base.p[pos] : 0.0;
      const double q = pos >= 0 ? base.q[pos] : 0.0;
      return pen.bus_p.eval(std::abs(p)) + pen.bus_q.eval(std::abs(q));
    }
    case OutageKind::Line: {
      const int pos = topo.pos_line[ctg.element];
      if (pos < 0) return 0.0;
      const Line& ln = nc.lines[ctg.element];
      const int o = ln.from, d = ln.to;
      BranchFlow f = line_flow(ln, base.v[o], base.v[d], base.theta[o], base.theta[d]);
      return ends(f.p_o, f.q_o, f.p_d, f.q_d);
    }
    case OutageKind::Transformer: {
      const int pos = topo.pos_xfmr[ctg.element];
      if (pos < 0) return 0.0;
      const Transformer& tr = nc.transformers[ctg.element];
      const int o = tr.from, d = tr.to;
      BranchFlow f =
          transformer_flow(tr, base.v[o], base.v[d], base.theta[o], base.theta[d]);
      return ends(f.p_o, f.q_o, f.p_d, f.q_d);
    }
  }
  return 0.0;
}

std::vector<SeverityRecord> rank_contingencies(const NetworkCase& nc,
                                               const StateVector& base) {
  StateTopology topo = StateTopology::make(nc, 0);
  std::vector<SeverityRecord> out;
  out.reserve(nc.contingencies.size());
  for (size_t i = 0; i < nc.contingencies.size(); ++i) {
    SeverityRecord r;
    r.contingency = static_cast<int>(i);
    r.id = nc.contingencies[i].id;
    r.severity = contingency_severity(nc, topo, base, nc.contingencies[i]);
    out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SeverityRecord& a, const SeverityRecord& b) {
                     if (a.severity != b.severity) return a.severity > b.severity;
                     return a.id < b.id;
                   });
  return out;
}

int select_width(int num_buses) {
  if (num_buses <= 1000) return 20;
  if (num_buses <= 5000) return 15;
  if (num_buses <= 10000) return 10;
  return 5;
}

std::vector<SeverityRecord> select_subset(const std::vector<SeverityRecord>& ranked,
                                          int workers, int num_buses) {
  const size_t want = static_cast<size_t>(std::max(workers, 1)) *
                      static_cast<size_t>(select_width(num_buses));
  const size_t n = std::min(want, ranked.size());
  return {ranked.begin(), ranked.begin() + n};
}

void write_ranking(const std::string& path, const std::vector<SeverityRecord>& ranked) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  char buf[64];
  for (const auto& r : ranked) {
    std::snprintf(buf, sizeof buf, "%.17g", r.severity);
    out << r.id << ' ' << buf << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<SeverityRecord> read_ranking(const NetworkCase& nc, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::map<std::string, int> by_id;
  for (size_t i = 0; i < nc.contingencies.size(); ++i)
    by_id[nc.contingencies[i].id] = static_cast<int>(i);
  std::vector<SeverityRecord> out;
  std::string id;
  double sev;
  while (in >> id >> sev) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw std::runtime_error("unknown contingency in ranking: " + id);
    out.push_back({it->second, id, sev});
  }
  return out;
}

}  // namespace scopf
