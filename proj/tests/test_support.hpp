#pragma once

#include <string>

#include "scopf/case.hpp"

#ifndef SCOPF_CASE_DIR
#define SCOPF_CASE_DIR "cases"
#endif

inline std::string case_path(const std::string& name) {
  return std::string(SCOPF_CASE_DIR) + "/" + name;
}

inline scopf::NetworkCase load_case5() { return scopf::load_case(case_path("case5.json")); }
inline scopf::NetworkCase load_case3() { return scopf::load_case(case_path("case3.json")); }
