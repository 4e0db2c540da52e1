#pragma once

#include <string>
#include <vector>

#include "scopf/admm.hpp"
#include "scopf/case.hpp"
#include "scopf/state.hpp"

namespace scopf {

// One post-contingency operating point as it appears in the solutions file.
struct CtgRecord {
  int contingency = 0;  // index into nc.contingencies
  std::string id;
  StateVector sv;
  double penalty = 0.0;
  std::string path = "fallback";  // smoothed | restricted | fallback
  bool ok = false;
};

// Text round-trip with full double precision; writes go through a temp file
// and a rename so readers never see a torn file.
void write_base_solution(const std::string& path, const NetworkCase& nc,
                         const StateVector& sv);
StateVector read_base_solution(const std::string& path, const NetworkCase& nc);

void write_ctg_solutions(const std::string& path, const NetworkCase& nc,
                         const std::vector<CtgRecord>& records);
std::vector<CtgRecord> read_ctg_solutions(const std::string& path,
                                          const NetworkCase& nc);

// One JSON object per consensus iteration, appended as the loop runs.
void append_diagnostics(const std::string& path,
                        const std::vector<AdmmIterRecord>& records,
                        size_t from_index);

// Structured append-only event log. Timing fields are welcome here and
// nowhere else.
class RunLog {
public:
  RunLog() = default;
  explicit RunLog(const std::string& path);
  void event(const std::string& name,
             const std::vector<std::pair<std::string, std::string>>& str_fields = {},
             const std::vector<std::pair<std::string, double>>& num_fields = {});
  bool open() const { return !path_.empty(); }

private:
  std::string path_;
  double t0_ = 0.0;
};

}  // namespace scopf
