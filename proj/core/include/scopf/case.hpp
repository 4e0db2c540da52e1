#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scopf/pwl.hpp"

namespace scopf {

struct Bus {
  std::string id;
  double v_lo = 0.9, v_hi = 1.1;  // p.u. magnitude bounds
  double load_p = 0.0, load_q = 0.0;
};

struct Generator {
  std::string id;
  int bus = -1;
  double p_lo = 0.0, p_hi = 0.0;
  double q_lo = 0.0, q_hi = 0.0;
  double alpha = 0.0;  // active-power response participation factor
  PwlCost cost;
};

struct Line {
  std::string id;
  int from = -1, to = -1;
  double g = 0.0, b = 0.0;  // series admittance
  double b_ch = 0.0;        // total charging susceptance
  double r_max_base = 0.0, r_max_ctg = 0.0;  // current ratings (p.u. at v=1)
};

struct Transformer {
  std::string id;
  int from = -1, to = -1;  // from = tapped winding
  double g = 0.0, b = 0.0;
  double b_ch = 0.0;
  double tap = 1.0;    // off-nominal turns ratio
  double shift = 0.0;  // phase shift, radians
  double s_max_base = 0.0, s_max_ctg = 0.0;  // apparent-power ratings
};

enum class OutageKind { Generator, Line, Transformer };

struct Contingency {
  std::string id;
  OutageKind kind = OutageKind::Generator;
  int element = -1;  // index into the matching equipment vector
};

struct PenaltyTables {
  PwlCost bus_p;    // nodal active-power imbalance
  PwlCost bus_q;    // nodal reactive-power imbalance
  PwlCost branch_s; // branch overload
  // Defaults in per-unit given the MVA base.
  static PenaltyTables defaults(double s_base);
};

struct NetworkCase {
  std::string name;
  double s_base = 100.0;
  double delta_weight = 0.5;  // objective weight on the base-state penalty
  std::vector<Bus> buses;
  std::vector<Generator> generators;
  std::vector<Line> lines;
  std::vector<Transformer> transformers;
  std::vector<Contingency> contingencies;
  PenaltyTables penalties;

  std::map<std::string, int> bus_index;  // id -> index

  // Structural checks; throws CaseError describing every violation found.
  void validate() const;
};

class CaseError : public std::runtime_error {
public:
  explicit CaseError(const std::string& what) : std::runtime_error(what) {}
};

// Load and validate a case from a JSON file; throws CaseError on any problem.
NetworkCase load_case(const std::string& path);
NetworkCase case_from_json_text(const std::string& text);

}  // namespace scopf
