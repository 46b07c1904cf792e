#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace martkit {

struct VerificationRecord {
  std::string suite;
  std::string anchor;
  std::string check;
  double lhs{0.0};
  double rhs{0.0};
  double ratio{0.0};
  std::optional<double> claimed;
  double slack{0.0};
  bool pass{false};
  std::uint64_t seed{0};
  std::size_t depth{0};
  double ms{0.0};

  friend bool operator==(const VerificationRecord&, const VerificationRecord&) = default;
};

// lhs <= claimed * rhs (+ slack) when a constant is claimed; otherwise a finite ratio.
inline VerificationRecord make_record(std::string suite, std::string anchor, std::string check, double lhs, double rhs,
                                      std::optional<double> claimed, double slack, std::uint64_t seed,
                                      std::size_t depth) {
  VerificationRecord r;
  r.suite = std::move(suite);
  r.anchor = std::move(anchor);
  r.check = std::move(check);
  r.lhs = lhs;
  r.rhs = rhs;
  if (rhs != 0.0)
    r.ratio = lhs / rhs;
  else
    r.ratio = lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  r.claimed = claimed;
  r.slack = slack;
  r.pass = std::isfinite(r.ratio) && (!claimed || r.ratio <= *claimed + slack);
  r.seed = seed;
  r.depth = depth;
  return r;
}

// Per-depth maxima all within [1 - tol, 1 + tol] times their median.
inline bool depth_stable(const std::vector<std::pair<std::size_t, double>>& by_depth, double tol) {
  if (by_depth.empty()) return false;
  std::vector<double> v;
  for (auto& [d, x] : by_depth) {
    if (!std::isfinite(x)) return false;
    v.push_back(x);
  }
  std::sort(v.begin(), v.end());
  const double med = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  for (double x : v)
    if (x < (1 - tol) * med || x > (1 + tol) * med) return false;
  return true;
}

}  // namespace martkit
