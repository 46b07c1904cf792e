#pragma once

#include <cstdlib>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "../generators.hpp"
#include "../sublinear.hpp"
#include "io.hpp"

namespace martkit {

// Smallest tolerance a config may ask for.
inline constexpr double kMinTolerance = 1e-13;

struct CorpusConfig {
  std::vector<std::size_t> depths{6, 8, 10, 12};
  // tree builders for the generic suites: random-binary, uniform-dyadic, nondoubling
  std::vector<std::string> builders{"random-binary"};
  std::optional<std::size_t> samples;  // overrides every suite default
  std::map<std::string, std::size_t> suite_samples;
  std::uint64_t seed{1};
  std::vector<BmoProfile> bmo_profiles{BmoProfile::haar_mix, BmoProfile::log_spike, BmoProfile::bounded_random};
  std::vector<AtomKind> atom_kinds{AtomKind::simple_s_inf, AtomKind::simple_inf, AtomKind::b_atom};
  std::vector<std::string> operators{"maximal", "square", "transform", "maximal-transform",
                                     "hilbert", "cesaro",  "fractional"};
  std::map<std::string, double> tolerances;
  double alpha{0.5};
  std::size_t workers{1};
  bool timing{false};

  std::size_t samples_for(const std::string& suite, std::size_t fallback) const {
    if (auto it = suite_samples.find(suite); it != suite_samples.end()) return it->second;
    return samples ? *samples : fallback;
  }

  double tolerance(const std::string& key, double fallback) const {
    auto it = tolerances.find(key);
    return it == tolerances.end() ? fallback : it->second;
  }

  BmoProfile bmo_profile(std::uint64_t pick) const { return bmo_profiles[pick % bmo_profiles.size()]; }

  void validate() const {
    if (depths.empty()) throw std::invalid_argument("config: no depths");
    for (auto d : depths)
      if (d < 1 || d > 14) throw std::invalid_argument("config: depth out of range [1, 14]");
    if (builders.empty()) throw std::invalid_argument("config: no tree builders");
    for (auto& b : builders)
      if (b != "random-binary" && b != "uniform-dyadic" && b != "nondoubling")
        throw std::invalid_argument("config: unknown tree builder " + b);
    if (samples && *samples < 1) throw std::invalid_argument("config: sample count must be >= 1");
    for (auto& [k, v] : suite_samples)
      if (v < 1) throw std::invalid_argument("config: sample count for " + k + " must be >= 1");
    if (bmo_profiles.empty()) throw std::invalid_argument("config: no BMO profiles");
    if (atom_kinds.empty()) throw std::invalid_argument("config: no atom kinds");
    for (auto& op : operators)
      if (std::find(operator_names().begin(), operator_names().end(), op) == operator_names().end())
        throw std::invalid_argument("config: unknown operator " + op);
    for (auto& [k, v] : tolerances)
      if (!(v >= kMinTolerance)) throw std::invalid_argument("config: tolerance for " + k + " below 1e-13");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("config: alpha must lie in [0, 1)");
    if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
  }
};

// Tree for a generic sample; the builder cycles with the sample index.
inline TreePtr corpus_tree(const CorpusConfig& cfg, std::size_t depth, std::uint64_t pick, Rng& rng) {
  const auto& b = cfg.builders[pick % cfg.builders.size()];
  if (b == "uniform-dyadic") return build_uniform_dyadic(depth);
  if (b == "nondoubling") return build_nondoubling_measure(depth);
  return random_binary_tree(depth, rng);
}

inline Json config_to_json(const CorpusConfig& c) {
  Json j;
  j["depths"] = c.depths;
  j["builders"] = c.builders;
  if (c.samples) j["samples"] = *c.samples;
  j["suite_samples"] = c.suite_samples;
  j["seed"] = c.seed;
  Json prof = Json::array();
  for (auto p : c.bmo_profiles) prof.push_back(to_string(p));
  j["bmo_profiles"] = prof;
  Json kinds = Json::array();
  for (auto k : c.atom_kinds) kinds.push_back(to_string(k));
  j["atom_kinds"] = kinds;
  j["operators"] = c.operators;
  j["tolerances"] = c.tolerances;
  j["alpha"] = c.alpha;
  j["workers"] = c.workers;
  j["timing"] = c.timing;
  return j;
}

inline CorpusConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected an object");
  static const std::vector<std::string> known{"depths",    "builders",   "samples",   "suite_samples",
                                              "seed",      "bmo_profiles", "atom_kinds", "operators",
                                              "tolerances", "alpha",     "workers",   "timing"};
  for (auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) throw std::invalid_argument("config: unknown key " + k);
  CorpusConfig c;
  try {
    if (j.contains("depths")) c.depths = j.at("depths").get<std::vector<std::size_t>>();
    if (j.contains("builders")) c.builders = j.at("builders").get<std::vector<std::string>>();
    if (j.contains("samples")) {
      if (j.at("samples").get<long long>() < 1) throw std::invalid_argument("config: sample count must be >= 1");
      c.samples = j.at("samples").get<std::size_t>();
    }
    if (j.contains("suite_samples")) c.suite_samples = j.at("suite_samples").get<std::map<std::string, std::size_t>>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("bmo_profiles")) {
      c.bmo_profiles.clear();
      for (auto& p : j.at("bmo_profiles")) c.bmo_profiles.push_back(bmo_profile_from_string(p.get<std::string>()));
    }
    if (j.contains("atom_kinds")) {
      c.atom_kinds.clear();
      for (auto& k : j.at("atom_kinds")) c.atom_kinds.push_back(atom_kind_from_string(k.get<std::string>()));
    }
    if (j.contains("operators")) c.operators = j.at("operators").get<std::vector<std::string>>();
    if (j.contains("tolerances")) c.tolerances = j.at("tolerances").get<std::map<std::string, double>>();
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("workers")) c.workers = j.at("workers").get<std::size_t>();
    if (j.contains("timing")) c.timing = j.at("timing").get<bool>();
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

// MARTKIT_WORKERS, else 1.
inline std::size_t workers_from_env() {
  if (const char* s = std::getenv("MARTKIT_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end != s && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
    if (std::string(s) == "auto") return std::max(1u, std::thread::hardware_concurrency());
    throw std::invalid_argument("MARTKIT_WORKERS must be a positive integer or auto");
  }
  return 1;
}

}  // namespace martkit
