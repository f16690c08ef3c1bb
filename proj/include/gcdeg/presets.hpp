#pragma once

// Named example inputs: the two SO(4) moment polytopes in both the drawn
// vertex form and the listed-inequality form, and two SL(2) intervals.

#include <string>
#include <vector>

#include "gcdeg/error.hpp"
#include "gcdeg/io.hpp"

namespace gcdeg {

struct Preset {
  std::string name;
  std::string description;
  Json input;
};

namespace detail {

inline Json so4_root_system() { return Json{{"catalog_name", "A1xA1"}}; }

inline Json ineq(std::vector<std::string> normal, std::string offset, std::string label) {
  return Json{{"normal", normal}, {"offset", offset}, {"label", label}};
}

/// {y>-x, x>y, 2-x>0, 2+y>0, 3-x+y>0} written as <n, y> <= c
inline Json so4_case1_inequalities() {
  return Json::array({ineq({"-1", "-1"}, "0", "y>-x"), ineq({"-1", "1"}, "0", "x>y"),
                      ineq({"1", "0"}, "2", "2-x>0"), ineq({"0", "-1"}, "2", "2+y>0"),
                      ineq({"1", "-1"}, "3", "3-x+y>0")});
}

}  // namespace detail

inline std::vector<Preset> presets() {
  std::vector<Preset> out;
  {
    Json in;
    in["root_system"] = detail::so4_root_system();
    in["polytope"] = Json{{"vertices", Json::array({{"0", "0"}, {"3", "3"}, {"3", "0"}, {"3/2", "-3/2"}})}};
    out.push_back({"so4-case1", "SO(4), case (1) polytope, drawn vertices", in});
  }
  {
    Json in;
    in["root_system"] = detail::so4_root_system();
    in["polytope"] = Json{
        {"vertices", Json::array({{"0", "0"}, {"3", "3"}, {"3", "1"}, {"2", "-1"}, {"3/2", "-3/2"}})}};
    in["notes"] = Json::array({"the claimed minimizer for this polytope is read as an interior point "
                               "(empty active set)"});
    out.push_back({"so4-case2", "SO(4), case (2) polytope, drawn vertices", in});
  }
  {
    Json in;
    in["root_system"] = detail::so4_root_system();
    in["polytope"] = Json{{"inequalities", detail::so4_case1_inequalities()}};
    out.push_back({"so4-case1-ineqlist", "SO(4), case (1) polytope, listed inequalities", in});
  }
  {
    Json in;
    in["root_system"] = detail::so4_root_system();
    Json hs = detail::so4_case1_inequalities();
    hs.push_back(detail::ineq({"2", "-1"}, "5", "5-2x+y>0"));
    in["polytope"] = Json{{"inequalities", hs}};
    in["notes"] = Json::array({"the claimed minimizer for this polytope is read as an interior point "
                               "(empty active set)"});
    out.push_back({"so4-case2-ineqlist", "SO(4), case (2) polytope, listed inequalities", in});
  }
  {
    Json in;
    in["root_system"] = Json{{"catalog_name", "A1"}};
    in["polytope"] = Json{{"vertices", Json::array({{"0"}, {"3"}})}};
    out.push_back({"sl2", "SL(2), P+ = [0, 3]", in});
  }
  {
    Json in;
    in["root_system"] = Json{{"catalog_name", "A1"}};
    in["polytope"] = Json{{"vertices", Json::array({{"0"}, {"8/3"}})}};
    out.push_back({"sl2-balanced", "SL(2), P+ = [0, 8/3] with b(0) = 2 rho", in});
  }
  return out;
}

inline Preset preset(const std::string& name) {
  for (auto& p : presets())
    if (p.name == name) return p;
  throw Error(ErrorKind::InvalidArgument, "unknown preset '" + name + "'");
}

}  // namespace gcdeg
