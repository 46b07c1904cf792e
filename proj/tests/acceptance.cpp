// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cstdio>
#include <functional>

#include <martkit/harness/suites.hpp>

using namespace martkit;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass{true};
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::size_t failures(const std::vector<VerificationRecord>& recs) {
  std::size_t n = 0;
  for (auto& r : recs) n += !r.pass;
  return n;
}

std::string fmt(const char* f, auto... xs) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

std::string depth_list(const std::vector<std::pair<std::size_t, double>>& v) {
  std::string s;
  for (auto& [d, x] : v) s += fmt(" %zu:%.4g", d, x);
  return s;
}

CorpusConfig corpus(std::size_t samples) {
  CorpusConfig cfg;
  cfg.seed = 2024;
  cfg.samples = samples;
  cfg.workers = workers_from_env();
  return cfg;
}

// all claimed checks pass across the given suites
Outcome all_claims(const std::vector<std::string>& suites, const CorpusConfig& cfg) {
  Outcome o;
  std::size_t total = 0, failed = 0;
  for (auto& s : suites) {
    auto recs = run_suite(s, cfg);
    total += recs.size();
    const auto f = failures(recs);
    failed += f;
    if (f) {
      for (auto& r : recs)
        if (!r.pass) {
          o.detail += fmt(" [%s %s ratio %.6g seed %llu]", s.c_str(), r.check.c_str(), r.ratio,
                          static_cast<unsigned long long>(r.seed));
          break;
        }
    }
  }
  o.pass = failed == 0;
  o.detail = fmt("%zu records, %zu failed", total, failed) + o.detail;
  return o;
}

// finite per-depth maxima within +-tol of their median
bool stable(const std::vector<VerificationRecord>& recs, const std::string& check, double tol, std::string& detail) {
  auto by = max_by_depth(recs, check);
  const bool ok = depth_stable(by, tol);
  detail += " " + check + (ok ? "" : " UNSTABLE") + ":" + depth_list(by);
  return ok;
}

Outcome identity(const CorpusConfig& base) {
  auto cfg = base;
  cfg.samples = 1000;
  const auto t0 = Clock::now();
  auto o = all_claims({"product-identity"}, cfg);
  const double secs = seconds_since(t0);
  o.detail += fmt(", %.1f s (limit 30)", secs);
  o.pass = o.pass && secs < 30.0;
  return o;
}

Outcome davis(const CorpusConfig& base) {
  auto cfg = base;
  cfg.samples = 100;
  auto recs = run_suite("davis-atomic", cfg);
  Outcome o;
  o.pass = failures(recs) == 0;
  o.detail = fmt("%zu records, %zu failed;", recs.size(), failures(recs));
  for (const char* c : {"f1 in h1", "fd in h1d", "atomic coefficients"}) o.pass = stable(recs, c, 0.3, o.detail) && o.pass;
  return o;
}

Outcome walsh(const CorpusConfig& base) {
  const auto t0 = Clock::now();
  auto o = all_claims({"walsh-dirichlet", "walsh-partial-sums", "walsh-fwht", "cesaro-means"}, base);
  const double secs = seconds_since(t0);
  o.detail += fmt(", %.1f s (limit 60)", secs);
  o.pass = o.pass && secs < 60.0;
  return o;
}

Outcome kq(const CorpusConfig& base) {
  auto cfg = base;
  cfg.samples = 200;
  Outcome o{true, "per operator, max ratio by depth:"};
  for (auto& op : cfg.operators) {
    auto recs = run_suite("kq-" + op, cfg);
    const auto f = failures(recs);
    o.detail += fmt("\n    %s: %zu failed;", op.c_str(), f);
    bool ok = f == 0;
    for (const char* c : {"h1-lq", "l1-weak", "atom", "jump"}) ok = stable(recs, c, 0.5, o.detail) && ok;
    if (op == "maximal") o.detail += fmt(" atom max %.4g jump max %.4g", max_ratio(recs, "atom"), max_ratio(recs, "jump"));
    o.pass = o.pass && ok;
  }
  return o;
}

Outcome endpoint(const CorpusConfig& base) {
  auto cfg = base;
  cfg.samples = 200;
  Outcome o{true, "per operator, max ratio by depth:"};
  for (auto& op : cfg.operators) {
    auto recs = run_suite("endpoint-" + op, cfg);
    const auto f = failures(recs);
    o.detail += fmt("\n    %s: %zu failed;", op.c_str(), f);
    bool ok = f == 0;
    for (const char* c : {"weak", "strong", "atom-h1b"}) ok = stable(recs, c, 0.5, o.detail) && ok;
    o.pass = o.pass && ok;
  }
  return o;
}

Outcome cesaro_atoms(const CorpusConfig& base) {
  auto cfg = base;
  cfg.samples = 125;
  auto recs = run_suite("cesaro-atom-bmo", cfg);
  Outcome o;
  o.pass = failures(recs) == 0;
  const auto by = max_by_depth(recs, "(b - b_parent) sigma(a)");
  o.detail = fmt("%zu atoms, max %.4g, by depth", recs.size(), max_ratio(recs, "(b - b_parent) sigma(a)")) + depth_list(by);
  o.pass = o.pass && depth_stable(by, 0.5);
  return o;
}

}  // namespace

int main() {
  const auto cfg = corpus(200);
  auto with = [&](std::size_t n) {
    auto c = cfg;
    c.samples = n;
    return c;
  };
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"product identity", [&] { return identity(cfg); }},
      {"diagonal term constant sqrt(2)", [&] { return all_claims({"diagonal-bound"}, with(1000)); }},
      {"maximal, square and conditional square functions of atoms", [&] { return all_claims({"maximal-atoms"}, with(250)); }},
      {"paraproducts of atoms", [&] { return all_claims({"atom-paraproducts"}, with(250)); }},
      {"paraproduct of a jump", [&] { return all_claims({"jump-paraproduct"}, with(250)); }},
      {"pointwise S(Pi2) <= M(g) S(f)", [&] { return all_claims({"paraproduct-pointwise"}, with(1000)); }},
      {"scalar logarithmic inequality", [&] { return all_claims({"log-scalar-grid"}, cfg); }},
      {"Davis and atomic decompositions", [&] { return davis(cfg); }},
      {"dyadic Hilbert transform",
       [&] {
         auto c = cfg;
         c.samples.reset();
         return all_claims({"hilbert-L2-norm", "haar-system", "hilbert-jumps"}, c);
       }},
      {"Walsh and Fejer kernels", [&] { return walsh(with(20)); }},
      {"commutator sandwich", [&] { return all_claims({"sandwich"}, with(20)); }},
      {"K_q certification", [&] { return kq(cfg); }},
      {"endpoint commutator bounds", [&] { return endpoint(cfg); }},
      {"Cesaro means of atoms against BMO", [&] { return cesaro_atoms(cfg); }},
  };

  std::size_t failed = 0, k = 0;
  for (auto& [name, run] : criteria) {
    ++k;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu  %s  (%.1f s)\n    %s\n", o.pass ? "PASS" : "FAIL", k, name, seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu of %zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
