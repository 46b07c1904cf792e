#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "../decomp.hpp"
#include "record.hpp"

namespace martkit {

using Json = nlohmann::json;

// Non-finite doubles travel as strings so reports stay valid JSON.
inline Json number_to_json(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw std::invalid_argument("expected a number, got " + j.dump());
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

// ---- trees

// {branching: [...], depth: N, measure: "uniform" | "nondoubling" | {leaf_masses: [...]}}
inline Json tree_to_json(const FiltrationTree& t) {
  Json j;
  j["depth"] = t.depth();
  j["branching"] = t.branching();
  switch (t.measure_kind()) {
    case MeasureKind::uniform: j["measure"] = "uniform"; break;
    case MeasureKind::nondoubling: j["measure"] = "nondoubling"; break;
    case MeasureKind::explicit_masses: {
      auto lm = t.leaf_masses();
      j["measure"] = Json{{"leaf_masses", std::vector<double>(lm.begin(), lm.end())}};
      break;
    }
  }
  return j;
}

inline TreePtr tree_from_json(const Json& j, std::size_t max_leaves = kDefaultMaxLeaves) {
  if (!j.is_object()) throw std::invalid_argument("tree: expected an object");
  std::vector<std::size_t> branching;
  if (j.contains("branching")) {
    for (const auto& b : j.at("branching")) {
      if (!b.is_number_integer() || b.get<long long>() < 2) throw std::invalid_argument("tree: branching factor < 2");
      branching.push_back(b.get<std::size_t>());
    }
  }
  if (j.contains("depth")) {
    const auto d = j.at("depth").get<long long>();
    if (d < 1) throw std::invalid_argument("tree: depth must be >= 1");
    if (branching.empty()) branching.assign(static_cast<std::size_t>(d), 2);
    if (branching.size() != static_cast<std::size_t>(d)) throw std::invalid_argument("tree: depth != branching length");
  }
  if (branching.empty()) throw std::invalid_argument("tree: need branching or depth");
  const Json measure = j.value("measure", Json("uniform"));
  if (measure.is_string()) {
    const auto m = measure.get<std::string>();
    if (m == "uniform") return build_pk_filtration(branching, UniformMeasure{}, max_leaves);
    if (m == "nondoubling") {
      for (auto b : branching)
        if (b != 2) throw std::invalid_argument("tree: nondoubling measure needs binary branching");
      return build_nondoubling_measure(branching.size(), max_leaves);
    }
    throw std::invalid_argument("tree: unknown measure " + m);
  }
  if (!measure.is_object() || !measure.contains("leaf_masses")) throw std::invalid_argument("tree: bad measure");
  LeafMasses lm;
  for (const auto& x : measure.at("leaf_masses")) lm.push_back(number_from_json(x));
  return build_pk_filtration(branching, lm, max_leaves);
}

// Interval endpoints as numerator/denominator pairs.
inline Json interval_to_json(const FiltrationTree& t, CellRef c) {
  auto [lo, hi] = t.interval(c);
  return Json::array({Json::array({lo.num, lo.den}), Json::array({hi.num, hi.den})});
}

// ---- step functions: {values: [...]} or a bare array

inline Json step_function_to_json(const StepFunction& f) {
  auto v = f.values();
  return Json{{"values", std::vector<double>(v.begin(), v.end())}};
}

inline StepFunction step_function_from_json(const TreePtr& tree, const Json& j) {
  const Json& arr = j.is_object() ? j.at("values") : j;
  if (!arr.is_array()) throw std::invalid_argument("step function: expected an array of values");
  std::vector<double> v;
  v.reserve(arr.size());
  for (const auto& x : arr) v.push_back(number_from_json(x));
  return StepFunction(tree, std::move(v));
}

// ---- atoms

inline Json atom_to_json(const AtomCertificate& a) {
  Json j;
  j["kind"] = to_string(a.kind);
  j["level"] = a.level;
  j["cells"] = a.cells;
  j["coefficient"] = a.coefficient;
  j["fallback"] = a.fallback;
  j["values"] = step_function_to_json(a.a)["values"];
  return j;
}

inline AtomCertificate atom_from_json(const TreePtr& tree, const Json& j) {
  AtomCertificate a;
  a.kind = atom_kind_from_string(j.at("kind").get<std::string>());
  a.level = j.at("level").get<std::size_t>();
  if (a.level > tree->depth()) throw std::invalid_argument("atom: level out of range");
  a.cells = j.at("cells").get<std::vector<std::size_t>>();
  const std::size_t cl = a.kind == AtomKind::jump ? (a.level == 0 ? 0 : a.level - 1) : a.level;
  for (auto c : a.cells)
    if (c >= tree->cells(cl)) throw std::invalid_argument("atom: cell index out of range");
  a.coefficient = j.value("coefficient", 1.0);
  a.fallback = j.value("fallback", false);
  a.a = step_function_from_json(tree, j.at("values"));
  return a;
}

// ---- records

inline Json record_to_json(const VerificationRecord& r) {
  Json j;
  j["suite"] = r.suite;
  j["anchor"] = r.anchor;
  j["check"] = r.check;
  j["lhs"] = number_to_json(r.lhs);
  j["rhs"] = number_to_json(r.rhs);
  j["ratio"] = number_to_json(r.ratio);
  j["claimed"] = r.claimed ? number_to_json(*r.claimed) : Json(nullptr);
  j["slack"] = r.slack;
  j["pass"] = r.pass;
  j["seed"] = r.seed;
  j["depth"] = r.depth;
  j["ms"] = r.ms;
  return j;
}

inline VerificationRecord record_from_json(const Json& j) {
  VerificationRecord r;
  r.suite = j.at("suite").get<std::string>();
  r.anchor = j.at("anchor").get<std::string>();
  r.check = j.value("check", std::string{});
  r.lhs = number_from_json(j.at("lhs"));
  r.rhs = number_from_json(j.at("rhs"));
  r.ratio = number_from_json(j.at("ratio"));
  if (j.contains("claimed") && !j.at("claimed").is_null()) r.claimed = number_from_json(j.at("claimed"));
  r.slack = j.value("slack", 0.0);
  r.pass = j.at("pass").get<bool>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.depth = j.value("depth", std::size_t{0});
  r.ms = j.value("ms", 0.0);
  return r;
}

}  // namespace martkit
