#pragma once

#include <string>
#include <vector>

#include "scopf/case.hpp"
#include "scopf/state.hpp"

namespace scopf {

struct SeverityRecord {
  int contingency = 0;  // index into nc.contingencies
  std::string id;
  double severity = 0.0;
};

// Penalty mass a contingency would strand if nothing responded: the outaged
// element's base-case injections run through the shed/spill cost tables.
double contingency_severity(const NetworkCase& nc, const StateTopology& topo,
                            const StateVector& base, const Contingency& ctg);

// All contingencies, sorted by severity descending, ties by id ascending.
std::vector<SeverityRecord> rank_contingencies(const NetworkCase& nc,
                                               const StateVector& base);

// Per-worker batch width as a function of system size.
int select_width(int num_buses);

// Top slice of a ranking: min(workers * width, all).
std::vector<SeverityRecord> select_subset(const std::vector<SeverityRecord>& ranked,
                                          int workers, int num_buses);

void write_ranking(const std::string& path, const std::vector<SeverityRecord>& ranked);
std::vector<SeverityRecord> read_ranking(const NetworkCase& nc, const std::string& path);

}  // namespace scopf
