#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "scopf/case.hpp"

namespace scopf {

using nlohmann::json;

namespace {

double num(const json& j, const char* key, std::optional<double> dflt = {}) {
  if (!j.contains(key)) {
    if (dflt) return *dflt;
    throw CaseError(std::string("missing field ") + key);
  }
  if (!j[key].is_number()) throw CaseError(std::string("field ") + key + " must be a number");
  return j[key].get<double>();
}

std::string str(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string())
    throw CaseError(std::string("missing string field ") + key);
  return j[key].get<std::string>();
}

PwlCost pwl_from_json(const json& j, double s_base) {
  if (!j.contains("lengths_mw") || !j.contains("slopes_per_mw"))
    throw CaseError("cost table needs lengths_mw and slopes_per_mw");
  std::vector<double> len, slp;
  for (const auto& v : j["lengths_mw"])
    len.push_back(v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>());
  for (const auto& v : j["slopes_per_mw"]) slp.push_back(v.get<double>());
  return PwlCost::from_natural_units(len, slp, s_base);
}

void series_admittance(const json& j, double& g, double& b) {
  if (j.contains("r") || j.contains("x")) {
    double r = num(j, "r", 0.0), x = num(j, "x");
    double d = r * r + x * x;
    if (!(d > 0.0)) throw CaseError("branch impedance is zero");
    g = r / d;
    b = -x / d;
  } else {
    g = num(j, "g", 0.0);
    b = num(j, "b");
  }
}

}  // namespace

NetworkCase case_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw CaseError(std::string("json parse: ") + e.what());
  }

  NetworkCase nc;
  try {
    nc.name = j.value("name", "unnamed");
    nc.s_base = num(j, "s_base", 100.0);
    nc.delta_weight = num(j, "delta_weight", 0.5);
    if (!(nc.s_base > 0.0)) throw CaseError("s_base must be positive");
    const double sb = nc.s_base;

    if (!j.contains("buses") || !j["buses"].is_array() || j["buses"].empty())
      throw CaseError("buses array missing or empty");
    for (const auto& jb : j["buses"]) {
      Bus b;
      b.id = str(jb, "id");
      b.v_lo = num(jb, "v_lo", 0.9);
      b.v_hi = num(jb, "v_hi", 1.1);
      b.load_p = num(jb, "load_p_mw", 0.0) / sb;
      b.load_q = num(jb, "load_q_mvar", 0.0) / sb;
      nc.bus_index.emplace(b.id, static_cast<int>(nc.buses.size()));
      nc.buses.push_back(std::move(b));
    }
    auto bus_ref = [&](const json& je, const char* key) {
      auto id = str(je, key);
      auto it = nc.bus_index.find(id);
      if (it == nc.bus_index.end()) throw CaseError("unknown bus " + id);
      return it->second;
    };

    for (const auto& jg : j.value("generators", json::array())) {
      Generator g;
      g.id = str(jg, "id");
      g.bus = bus_ref(jg, "bus");
      g.p_lo = num(jg, "p_lo_mw") / sb;
      g.p_hi = num(jg, "p_hi_mw") / sb;
      g.q_lo = num(jg, "q_lo_mvar") / sb;
      g.q_hi = num(jg, "q_hi_mvar") / sb;
      g.alpha = num(jg, "alpha", 0.0);
      if (!jg.contains("cost")) throw CaseError("generator " + g.id + ": missing cost");
      g.cost = pwl_from_json(jg["cost"], sb);
      nc.generators.push_back(std::move(g));
    }

    for (const auto& je : j.value("lines", json::array())) {
      Line e;
      e.id = str(je, "id");
      e.from = bus_ref(je, "from");
      e.to = bus_ref(je, "to");
      series_admittance(je, e.g, e.b);
      e.b_ch = num(je, "b_ch", 0.0);
      e.r_max_base = num(je, "r_max_base_mva") / sb;
      e.r_max_ctg = num(je, "r_max_ctg_mva", e.r_max_base * sb) / sb;
      nc.lines.push_back(std::move(e));
    }

    for (const auto& jf : j.value("transformers", json::array())) {
      Transformer f;
      f.id = str(jf, "id");
      f.from = bus_ref(jf, "from");
      f.to = bus_ref(jf, "to");
      series_admittance(jf, f.g, f.b);
      f.b_ch = num(jf, "b_ch", 0.0);
      f.tap = num(jf, "tap", 1.0);
      f.shift = num(jf, "shift_deg", 0.0) * M_PI / 180.0;
      f.s_max_base = num(jf, "s_max_base_mva") / sb;
      f.s_max_ctg = num(jf, "s_max_ctg_mva", f.s_max_base * sb) / sb;
      nc.transformers.push_back(std::move(f));
    }

    for (const auto& jc : j.value("contingencies", json::array())) {
      Contingency c;
      c.id = str(jc, "id");
      auto type = str(jc, "type");
      auto elem = str(jc, "element");
      auto find_in = [&](const auto& vec) {
        for (size_t i = 0; i < vec.size(); ++i)
          if (vec[i].id == elem) return static_cast<int>(i);
        throw CaseError("contingency " + c.id + ": unknown element " + elem);
      };
      if (type == "generator") {
        c.kind = OutageKind::Generator;
        c.element = find_in(nc.generators);
      } else if (type == "line") {
        c.kind = OutageKind::Line;
        c.element = find_in(nc.lines);
      } else if (type == "transformer") {
        c.kind = OutageKind::Transformer;
        c.element = find_in(nc.transformers);
      } else {
        throw CaseError("contingency " + c.id + ": bad type " + type +
                        " (single-element outages only)");
      }
      nc.contingencies.push_back(std::move(c));
    }

    if (j.contains("penalties")) {
      const auto& jp = j["penalties"];
      nc.penalties.bus_p = pwl_from_json(jp.at("bus_p"), sb);
      nc.penalties.bus_q = pwl_from_json(jp.at("bus_q"), sb);
      nc.penalties.branch_s = pwl_from_json(jp.at("branch_s"), sb);
    } else {
      nc.penalties = PenaltyTables::defaults(sb);
    }
  } catch (const json::exception& e) {
    throw CaseError(std::string("case json: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CaseError(std::string("case json: ") + e.what());
  }

  nc.validate();
  return nc;
}

NetworkCase load_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CaseError("cannot open case file " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return case_from_json_text(text);
}

}  // namespace scopf
