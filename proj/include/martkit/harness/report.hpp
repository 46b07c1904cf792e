#pragma once

#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "io.hpp"
#include "record.hpp"

namespace martkit {

enum class ReportFormat { json, csv, markdown };

inline ReportFormat report_format_from_string(const std::string& s) {
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  if (s == "md" || s == "markdown" || s == "markdown-summary") return ReportFormat::markdown;
  throw std::invalid_argument("unknown report format: " + s);
}

namespace detail {

inline std::string fmt_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string fmt_short(double x) {
  if (!std::isfinite(x)) return fmt_double(x);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline std::string report_json(const std::vector<VerificationRecord>& recs) {
  Json arr = Json::array();
  for (auto& r : recs) arr.push_back(record_to_json(r));
  return Json{{"records", arr}}.dump(1) + "\n";
}

inline std::vector<VerificationRecord> parse_report_json(const std::string& text) {
  auto j = Json::parse(text);
  std::vector<VerificationRecord> out;
  for (auto& r : j.at("records")) out.push_back(record_from_json(r));
  return out;
}

inline std::string report_csv(const std::vector<VerificationRecord>& recs) {
  std::string out = "suite,anchor,lhs,rhs,ratio,claimed,pass,seed,ms\n";
  for (auto& r : recs) {
    out += detail::csv_field(r.suite) + ',' + detail::csv_field(r.anchor) + ',' + detail::fmt_double(r.lhs) + ',' +
           detail::fmt_double(r.rhs) + ',' + detail::fmt_double(r.ratio) + ',' +
           (r.claimed ? detail::fmt_double(*r.claimed) : std::string{}) + ',' + (r.pass ? "true" : "false") + ',' +
           std::to_string(r.seed) + ',' + detail::fmt_double(r.ms) + '\n';
  }
  return out;
}

// One table per anchor: each (suite, check) with its sample count, worst ratio and failures.
inline std::string report_markdown(const std::vector<VerificationRecord>& recs) {
  struct Row {
    std::size_t n{0}, failed{0};
    double worst{0.0};
    std::optional<double> claimed;
  };
  std::map<std::string, std::map<std::pair<std::string, std::string>, Row>> groups;
  for (auto& r : recs) {
    auto& row = groups[r.anchor][{r.suite, r.check}];
    ++row.n;
    if (!r.pass) ++row.failed;
    row.worst = std::isnan(r.ratio) || std::isnan(row.worst) ? r.ratio : std::max(row.worst, r.ratio);
    if (r.claimed) row.claimed = *r.claimed;
  }
  std::ostringstream os;
  os << "# Verification summary\n\n";
  std::size_t total = 0, failed = 0;
  for (auto& [anchor, rows] : groups) {
    os << "## " << anchor << "\n\n| suite | check | samples | max ratio | claimed | failed |\n|---|---|---|---|---|---|\n";
    for (auto& [key, row] : rows) {
      os << "| " << key.first << " | " << key.second << " | " << row.n << " | " << detail::fmt_short(row.worst) << " | "
         << (row.claimed ? detail::fmt_short(*row.claimed) : "-") << " | " << row.failed << " |\n";
      total += row.n;
      failed += row.failed;
    }
    os << "\n";
  }
  os << total << " records, " << failed << " failed\n";
  return os.str();
}

inline std::string emit_report(const std::vector<VerificationRecord>& recs, ReportFormat format) {
  switch (format) {
    case ReportFormat::json: return report_json(recs);
    case ReportFormat::csv: return report_csv(recs);
    case ReportFormat::markdown: return report_markdown(recs);
  }
  return {};
}

inline void write_report(const std::vector<VerificationRecord>& recs, ReportFormat format, const std::string& path) {
  write_text_file(path, emit_report(recs, format));
}

}  // namespace martkit
