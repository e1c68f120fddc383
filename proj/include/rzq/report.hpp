#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rzq/fit.hpp"
#include "rzq/spectral.hpp"

namespace rzq {

inline constexpr const char* code_version = "rzq 1.0.0";

/// One point of a parameter sweep.
struct SweepRecord {
  std::string parameter;  // "n", "eps", "s", ...
  double value = 0.0;
  std::vector<std::pair<std::string, double>> measurements;
  bool divergent = false;
  std::string note;

  SweepRecord& set(std::string name, double v) {
    for (auto& [k, x] : measurements)
      if (k == name) {
        x = v;
        return *this;
      }
    measurements.emplace_back(std::move(name), v);
    return *this;
  }
  std::optional<double> get(const std::string& name) const {
    for (const auto& [k, x] : measurements)
      if (k == name) return x;
    return std::nullopt;
  }
};

struct SlopeEntry {
  std::string name;
  LinearFit fit;
  std::optional<double> predicted;
};

struct Verdict {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  std::string threshold;  // human readable, e.g. "<= -1.4"
};

struct ExperimentReport {
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> config;
  std::uint64_t seed = 0;
  std::vector<SweepRecord> records;
  std::vector<SlopeEntry> slopes;
  std::vector<Verdict> verdicts;
  std::vector<std::string> notes;

  bool all_pass() const {
    for (const auto& v : verdicts)
      if (!v.pass) return false;
    return true;
  }

  const SlopeEntry* slope(const std::string& name) const {
    for (const auto& s : slopes)
      if (s.name == name) return &s;
    return nullptr;
  }
  const Verdict* verdict(const std::string& name) const {
    for (const auto& v : verdicts)
      if (v.name == name) return &v;
    return nullptr;
  }

  void add_verdict(std::string name, bool pass, double measured, std::string threshold) {
    verdicts.push_back({std::move(name), pass, measured, std::move(threshold)});
  }

  /// Slope verdict: fitted slope on the right side of `bound`, at least four
  /// points, stderr below 25% of |slope|.
  void add_slope_verdict(const std::string& name, const LinearFit& fit, double bound, bool upper = true) {
    const bool precise = fit.points >= 4 && fit.stderr_slope < 0.25 * std::abs(fit.slope);
    const bool ok = upper ? fit.slope <= bound : fit.slope >= bound;
    add_verdict(name, precise && ok, fit.slope,
                std::string(upper ? "<= " : ">= ") + detail::format_double(bound) +
                    ", >= 4 points, stderr < 25% of |slope|");
  }
  /// As add_slope_verdict, but the slope must lie within tol of target.
  void add_slope_window_verdict(const std::string& name, const LinearFit& fit, double target, double tol) {
    const bool precise = fit.points >= 4 && fit.stderr_slope < 0.25 * std::abs(fit.slope);
    add_verdict(name, precise && std::abs(fit.slope - target) <= tol, fit.slope,
                detail::format_double(target) + " +- " + detail::format_double(tol) +
                    ", >= 4 points, stderr < 25% of |slope|");
  }
};

namespace detail {
inline nlohmann::ordered_json number_or_tag(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

// RFC 4180: quote fields holding separators, quotes or line breaks.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}
}  // namespace detail

inline nlohmann::ordered_json to_json(const ExperimentReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["experiment"] = r.experiment;
  j["code_version"] = code_version;
  j["seed"] = r.seed;
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : r.config) cfg[k] = v;
  j["config"] = cfg;
  ordered_json recs = ordered_json::array();
  for (const auto& rec : r.records) {
    ordered_json m = ordered_json::object();
    for (const auto& [k, v] : rec.measurements) m[k] = detail::number_or_tag(v);
    ordered_json e;
    e["parameter"] = rec.parameter;
    e["value"] = detail::number_or_tag(rec.value);
    e["divergent"] = rec.divergent;
    if (!rec.note.empty()) e["note"] = rec.note;
    e["measurements"] = m;
    recs.push_back(e);
  }
  j["records"] = recs;
  ordered_json slopes = ordered_json::object();
  for (const auto& s : r.slopes) {
    ordered_json e;
    e["slope"] = detail::number_or_tag(s.fit.slope);
    e["stderr"] = detail::number_or_tag(s.fit.stderr_slope);
    e["points"] = s.fit.points;
    e["dropped_first"] = s.fit.dropped_first;
    if (s.predicted) e["predicted"] = *s.predicted;
    slopes[s.name] = e;
  }
  j["fitted_slopes"] = slopes;
  ordered_json verdicts = ordered_json::object();
  for (const auto& v : r.verdicts) {
    ordered_json e;
    e["pass"] = v.pass;
    e["measured"] = detail::number_or_tag(v.measured);
    e["threshold"] = v.threshold;
    verdicts[v.name] = e;
  }
  j["verdicts"] = verdicts;
  j["notes"] = r.notes;
  return j;
}

inline void write_report_json(std::ostream& os, const ExperimentReport& r) { os << to_json(r).dump(2) << '\n'; }

/// One row per record; measurement columns in first-seen order, blank where absent.
inline void write_report_csv(std::ostream& os, const ExperimentReport& r) {
  std::vector<std::string> cols;
  for (const auto& rec : r.records)
    for (const auto& [k, v] : rec.measurements)
      if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
  os << "parameter,value,divergent";
  for (const auto& c : cols) os << ',' << detail::csv_field(c);
  os << '\n';
  for (const auto& rec : r.records) {
    os << detail::csv_field(rec.parameter) << ',' << detail::format_double(rec.value) << ','
       << (rec.divergent ? "true" : "false");
    for (const auto& c : cols) {
      os << ',';
      if (auto v = rec.get(c)) os << detail::format_double(*v);
    }
    os << '\n';
  }
}

inline void write_verdict_summary(std::ostream& os, const ExperimentReport& r) {
  for (const auto& v : r.verdicts)
    os << (v.pass ? "PASS " : "FAIL ") << v.name << ": measured " << detail::format_double(v.measured)
       << " (required " << v.threshold << ")\n";
}

}  // namespace rzq
