#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "swnu/errors.hpp"

namespace swnu {

inline constexpr int kReportSchemaVersion = 1;

/// One recorded number: quantity at (n, t, sigma); unused coordinates are NaN or -1.
struct Measurement {
  std::string quantity;
  int n = -1;
  double t = std::numeric_limits<double>::quiet_NaN();
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;

};

/// Least-squares rate of log2(quantity) in n (or in log2 t) with its acceptance check.
struct RateFit {
  std::string quantity;
  std::string variable;  // "n" or "log2_t"
  double at = std::numeric_limits<double>::quiet_NaN();  // fixed t or sigma of the fit
  std::vector<double> xs;
  double rate = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string comparison;  // "within" (|rate - expected| <= tol) or "at_least" (rate >= expected - tol)
  bool pass = false;

};

struct Verdict {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;

};

struct ExperimentReport {
  int schema_version = kReportSchemaVersion;
  std::string experiment;
  nlohmann::json config = nlohmann::json::object();
  std::vector<Measurement> measurements;
  std::vector<RateFit> fits;
  std::vector<Verdict> verdicts;

  bool all_pass() const {
    for (const auto& f : fits)
      if (!f.pass) return false;
    for (const auto& v : verdicts)
      if (!v.pass) return false;
    return true;
  }

  void add(const std::string& quantity, int n, double t, double sigma, double value) {
    measurements.push_back({quantity, n, t, sigma, value});
  }

  void merge(const ExperimentReport& other) {
    measurements.insert(measurements.end(), other.measurements.begin(), other.measurements.end());
    fits.insert(fits.end(), other.fits.begin(), other.fits.end());
    verdicts.insert(verdicts.end(), other.verdicts.begin(), other.verdicts.end());
  }
};

namespace detail {

// NaN has no JSON spelling; it is written as null and read back as NaN.
inline nlohmann::json num(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }
inline double num(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

// Defaulted == compares NaN != NaN; reports compare coordinates bitwise through this.
inline bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace detail

inline bool same_measurement(const Measurement& a, const Measurement& b) {
  return a.quantity == b.quantity && a.n == b.n && detail::same(a.t, b.t) && detail::same(a.sigma, b.sigma) &&
         detail::same(a.value, b.value);
}

inline bool same_fit(const RateFit& x, const RateFit& y) {
  return x.quantity == y.quantity && x.variable == y.variable && detail::same(x.at, y.at) && x.xs == y.xs &&
         detail::same(x.rate, y.rate) && detail::same(x.intercept, y.intercept) &&
         detail::same(x.residual, y.residual) && x.expected == y.expected && x.tolerance == y.tolerance &&
         x.comparison == y.comparison && x.pass == y.pass;
}

inline bool same_verdict(const Verdict& a, const Verdict& b) {
  return a.name == b.name && a.pass == b.pass && detail::same(a.value, b.value) &&
         detail::same(a.threshold, b.threshold) && a.detail == b.detail;
}

/// Field-by-field equality, treating NaN coordinates as equal to each other.
inline bool same_report(const ExperimentReport& a, const ExperimentReport& b) {
  auto all = [](const auto& x, const auto& y, auto eq) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!eq(x[i], y[i])) return false;
    return true;
  };
  return a.schema_version == b.schema_version && a.experiment == b.experiment && a.config == b.config &&
         all(a.measurements, b.measurements, same_measurement) && all(a.fits, b.fits, same_fit) &&
         all(a.verdicts, b.verdicts, same_verdict);
}

inline nlohmann::json to_json(const ExperimentReport& r) {
  using nlohmann::json;
  json j;
  j["schema"] = "swnu-report";
  j["schema_version"] = r.schema_version;
  j["experiment"] = r.experiment;
  j["config"] = r.config;
  j["measurements"] = json::array();
  for (const auto& m : r.measurements)
    j["measurements"].push_back(
        {{"quantity", m.quantity}, {"n", m.n}, {"t", detail::num(m.t)}, {"sigma", detail::num(m.sigma)},
         {"value", detail::num(m.value)}});
  j["fits"] = json::array();
  for (const auto& f : r.fits)
    j["fits"].push_back({{"quantity", f.quantity},
                         {"variable", f.variable},
                         {"at", detail::num(f.at)},
                         {"xs", f.xs},
                         {"rate", detail::num(f.rate)},
                         {"intercept", detail::num(f.intercept)},
                         {"residual", detail::num(f.residual)},
                         {"expected", f.expected},
                         {"tolerance", f.tolerance},
                         {"comparison", f.comparison},
                         {"pass", f.pass}});
  j["verdicts"] = json::array();
  for (const auto& v : r.verdicts)
    j["verdicts"].push_back({{"name", v.name},
                             {"pass", v.pass},
                             {"value", detail::num(v.value)},
                             {"threshold", detail::num(v.threshold)},
                             {"detail", v.detail}});
  j["all_pass"] = r.all_pass();
  return j;
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != "swnu-report") throw Error("not a report document");
  ExperimentReport r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != kReportSchemaVersion) {
    throw Error("unsupported report schema version " + std::to_string(r.schema_version));
  }
  r.experiment = j.at("experiment").get<std::string>();
  r.config = j.at("config");
  for (const auto& m : j.at("measurements"))
    r.measurements.push_back({m.at("quantity").get<std::string>(), m.at("n").get<int>(), detail::num(m.at("t")),
                              detail::num(m.at("sigma")), detail::num(m.at("value"))});
  for (const auto& f : j.at("fits")) {
    RateFit x;
    x.quantity = f.at("quantity").get<std::string>();
    x.variable = f.at("variable").get<std::string>();
    x.at = detail::num(f.at("at"));
    x.xs = f.at("xs").get<std::vector<double>>();
    x.rate = detail::num(f.at("rate"));
    x.intercept = detail::num(f.at("intercept"));
    x.residual = detail::num(f.at("residual"));
    x.expected = f.at("expected").get<double>();
    x.tolerance = f.at("tolerance").get<double>();
    x.comparison = f.at("comparison").get<std::string>();
    x.pass = f.at("pass").get<bool>();
    r.fits.push_back(std::move(x));
  }
  for (const auto& v : j.at("verdicts"))
    r.verdicts.push_back({v.at("name").get<std::string>(), v.at("pass").get<bool>(), detail::num(v.at("value")),
                          detail::num(v.at("threshold")), v.at("detail").get<std::string>()});
  return r;
}

inline std::string report_json_text(const ExperimentReport& r) { return to_json(r).dump(2) + "\n"; }

/// Plot-ready rows: kind,quantity,n,t,sigma,value,aux.
///   kind=measurement: aux empty.
///   kind=fit:         quantity/variable, value = rate, aux = residual, t = fixed coordinate.
///   kind=verdict:     value = measured value, aux = threshold, quantity = verdict name with PASS/FAIL.
inline std::string report_csv_text(const ExperimentReport& r) {
  std::ostringstream os;
  os << std::setprecision(17);
  auto cell = [&](double v) {
    if (!std::isnan(v)) os << v;
  };
  os << "# swnu-report schema_version=" << r.schema_version << " experiment=" << r.experiment << "\n";
  os << "kind,quantity,n,t,sigma,value,aux\n";
  for (const auto& m : r.measurements) {
    os << "measurement," << m.quantity << ',';
    if (m.n >= 0) os << m.n;
    os << ',';
    cell(m.t);
    os << ',';
    cell(m.sigma);
    os << ',';
    cell(m.value);
    os << ",\n";
  }
  for (const auto& f : r.fits) {
    // A fit over n at fixed t puts t in the t column; a fit over log2 t at fixed n puts n there.
    os << "fit," << f.quantity << '/' << f.variable << ",,";
    cell(f.at);
    os << ",,";
    cell(f.rate);
    os << ',';
    cell(f.residual);
    os << '\n';
  }
  for (const auto& v : r.verdicts) {
    os << "verdict," << v.name << ':' << (v.pass ? "PASS" : "FAIL") << ",,,,";
    cell(v.value);
    os << ',';
    cell(v.threshold);
    os << '\n';
  }
  return os.str();
}

/// Writes <dir>/<experiment>.<json|csv>; returns the path.
inline std::filesystem::path emit_report(const ExperimentReport& r, const std::filesystem::path& dir,
                                         const std::string& format) {
  if (format != "json" && format != "csv") throw Error("unknown report format '" + format + "'");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), ec.message());
  const auto path = dir / (r.experiment + "." + format);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path.string(), "cannot open for writing");
  os << (format == "json" ? report_json_text(r) : report_csv_text(r));
  if (!os) throw IoError(path.string(), "write failed");
  return path;
}

inline ExperimentReport load_report(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path.string(), "cannot open for reading");
  try {
    return report_from_json(nlohmann::json::parse(is));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string(), e.what());
  }
}

}  // namespace swnu
