#include "scopf/solution_io.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace scopf {

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_state_lines(std::ostream& out, const NetworkCase& nc,
                       const StateTopology& topo, const StateVector& sv) {
  for (size_t i = 0; i < nc.buses.size(); ++i)
    out << "bus " << nc.buses[i].id << ' ' << fmt(sv.v[i]) << ' ' << fmt(sv.theta[i])
        << ' ' << fmt(sv.sig_pp[i]) << ' ' << fmt(sv.sig_pm[i]) << ' '
        << fmt(sv.sig_qp[i]) << ' ' << fmt(sv.sig_qm[i]) << '\n';
  for (size_t j = 0; j < topo.gens.size(); ++j)
    out << "gen " << nc.generators[topo.gens[j]].id << ' ' << fmt(sv.p[j]) << ' '
        << fmt(sv.q[j]) << '\n';
  size_t br = 0;
  for (int li : topo.lines) out << "branch " << nc.lines[li].id << ' ' << fmt(sv.sig_s[br++]) << '\n';
  for (int xi : topo.xfmrs)
    out << "branch " << nc.transformers[xi].id << ' ' << fmt(sv.sig_s[br++]) << '\n';
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed: " + path);
}

// Tokenized reader for the solution formats; keeps position across records.
struct Tokens {
  std::ifstream in;
  explicit Tokens(const std::string& path) : in(path) {
    if (!in) throw std::runtime_error("cannot open " + path);
  }
  bool next(std::string& tok) { return static_cast<bool>(in >> tok); }
  std::string expect() {
    std::string tok;
    if (!next(tok)) throw std::runtime_error("truncated solution file");
    return tok;
  }
  double number() {
    const std::string tok = expect();
    try {
      size_t pos = 0;
      double v = std::stod(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error("bad number in solution file: " + tok);
    }
  }
};

StateVector read_state_lines(Tokens& tk, const NetworkCase& nc,
                             const StateTopology& topo, bool ctg_form) {
  StateVector sv = StateVector::zeros(nc, topo);
  for (size_t i = 0; i < nc.buses.size(); ++i) {
    if (tk.expect() != "bus") throw std::runtime_error("expected bus line");
    const std::string id = tk.expect();
    auto it = nc.bus_index.find(id);
    if (it == nc.bus_index.end()) throw std::runtime_error("unknown bus " + id);
    const int b = it->second;
    sv.v[b] = tk.number();
    sv.theta[b] = tk.number();
    sv.sig_pp[b] = tk.number();
    sv.sig_pm[b] = tk.number();
    sv.sig_qp[b] = tk.number();
    sv.sig_qm[b] = tk.number();
  }
  for (size_t j = 0; j < topo.gens.size(); ++j) {
    if (tk.expect() != "gen") throw std::runtime_error("expected gen line");
    const std::string id = tk.expect();
    if (id != nc.generators[topo.gens[j]].id)
      throw std::runtime_error("generator order mismatch at " + id);
    sv.p[j] = tk.number();
    sv.q[j] = tk.number();
  }
  for (int n = 0; n < topo.num_branches(); ++n) {
    if (tk.expect() != "branch") throw std::runtime_error("expected branch line");
    tk.expect();  // id, fixed order
    sv.sig_s[n] = tk.number();
  }
  if (ctg_form && tk.expect() != "end") throw std::runtime_error("expected end marker");
  return sv;
}

}  // namespace

void write_base_solution(const std::string& path, const NetworkCase& nc,
                         const StateVector& sv) {
  StateTopology topo = StateTopology::make(nc, 0);
  std::ostringstream out;
  write_state_lines(out, nc, topo, sv);
  atomic_write(path, out.str());
}

StateVector read_base_solution(const std::string& path, const NetworkCase& nc) {
  Tokens tk(path);
  StateTopology topo = StateTopology::make(nc, 0);
  return read_state_lines(tk, nc, topo, false);
}

void write_ctg_solutions(const std::string& path, const NetworkCase& nc,
                         const std::vector<CtgRecord>& records) {
  std::ostringstream out;
  for (const auto& rec : records) {
    StateTopology topo = StateTopology::make(nc, rec.contingency + 1);
    out << "ctg " << rec.id << " delta " << fmt(rec.sv.delta) << " penalty "
        << fmt(rec.penalty) << " path " << rec.path << " status "
        << (rec.ok ? "ok" : "fallback") << '\n';
    write_state_lines(out, nc, topo, rec.sv);
    out << "end\n";
  }
  atomic_write(path, out.str());
}

std::vector<CtgRecord> read_ctg_solutions(const std::string& path,
                                          const NetworkCase& nc) {
  Tokens tk(path);
  std::vector<CtgRecord> out;
  std::string tok;
  while (tk.next(tok)) {
    if (tok != "ctg") throw std::runtime_error("expected ctg header");
    CtgRecord rec;
    rec.id = tk.expect();
    rec.contingency = -1;
    for (size_t i = 0; i < nc.contingencies.size(); ++i)
      if (nc.contingencies[i].id == rec.id) rec.contingency = static_cast<int>(i);
    if (rec.contingency < 0) throw std::runtime_error("unknown contingency " + rec.id);
    if (tk.expect() != "delta") throw std::runtime_error("expected delta");
    const double delta = tk.number();
    if (tk.expect() != "penalty") throw std::runtime_error("expected penalty");
    rec.penalty = tk.number();
    if (tk.expect() != "path") throw std::runtime_error("expected path");
    rec.path = tk.expect();
    if (tk.expect() != "status") throw std::runtime_error("expected status");
    rec.ok = tk.expect() == "ok";
    StateTopology topo = StateTopology::make(nc, rec.contingency + 1);
    rec.sv = read_state_lines(tk, nc, topo, true);
    rec.sv.delta = delta;
    out.push_back(std::move(rec));
  }
  return out;
}

void append_diagnostics(const std::string& path,
                        const std::vector<AdmmIterRecord>& records,
                        size_t from_index) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (size_t i = from_index; i < records.size(); ++i) {
    const auto& r = records[i];
    nlohmann::json j{{"t", r.t},
                     {"r", r.r},
                     {"L", r.L},
                     {"s_inf", r.max_s_inf},
                     {"s_2", r.max_s_2},
                     {"r_inf", r.max_r_inf},
                     {"r_2", r.max_r_2},
                     {"d0_2", r.d0_2},
                     {"dk_2", r.max_dk_2},
                     {"beta", r.beta},
                     {"rho", r.rho},
                     {"wall", r.wall},
                     {"descent_base", r.descent_base},
                     {"descent_blocks", r.descent_blocks},
                     {"identity_max", r.identity_max}};
    out << j.dump() << '\n';
  }
}

RunLog::RunLog(const std::string& path) : path_(path) {
  t0_ = std::chrono::duration<double>(
            std::chrono::steady_clock::now().time_since_epoch())
            .count();
  std::ofstream out(path_, std::ios::trunc);  // start fresh per run
  if (!out) throw std::runtime_error("cannot open " + path_);
}

void RunLog::event(const std::string& name,
                   const std::vector<std::pair<std::string, std::string>>& str_fields,
                   const std::vector<std::pair<std::string, double>>& num_fields) {
  if (path_.empty()) return;
  nlohmann::json j;
  j["event"] = name;
  const double now = std::chrono::duration<double>(
                         std::chrono::steady_clock::now().time_since_epoch())
                         .count();
  j["elapsed"] = now - t0_;
  for (const auto& [k, v] : str_fields) j[k] = v;
  for (const auto& [k, v] : num_fields) j[k] = v;
  std::ofstream out(path_, std::ios::app);
  out << j.dump() << '\n';
}

}  // namespace scopf
