#include "spdeftle/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "spdeftle/stats.hpp"

namespace spdeftle {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }
std::string opt(const std::optional<bool>& v) { return v ? (*v ? "true" : "false") : std::string(); }

}  // namespace

void write_samples_csv(std::ostream& out, const RegimeReport& rep) {
  out << kSamplesVersion << '\n' << kSamplesHeader << '\n';
  for (const auto& s : rep.samples) {
    out << s.sample_index << ',' << s.seed << ',' << opt(s.lambda) << ',' << opt(s.event_omega0) << ','
        << opt(s.attractor_value) << ',' << opt(s.error_sup) << ',' << (s.excluded ? "true" : "false") << ','
        << s.subset << ',' << opt(s.epsilon) << ',' << opt(s.stable_sup) << ',' << opt(s.tilde_x4_integral) << ','
        << opt(s.amplitude_sup) << ',' << opt(s.stable_l2_half) << ',' << opt(s.birkhoff_average) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const RegimeReport& rep) {
  out << kSummaryVersion << '\n' << kSummaryHeader << '\n';
  for (const auto& r : rep.summary) {
    out << r.metric << ',' << format_real(r.value) << ',' << opt(r.ci_low) << ',' << opt(r.ci_high) << ','
        << (r.pass ? (*r.pass ? "pass" : "fail") : "") << '\n';
  }
  out << "overall," << (rep.passed ? 1 : 0) << ",,," << (rep.passed ? "pass" : "fail") << '\n';
}

int CsvTable::column(std::string_view name) const {
  auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : int(it - header.begin());
}

namespace {
std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}
}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      t.header = split(line);
      have_header = true;
    } else {
      auto cells = split(line);
      cells.resize(t.header.size());
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

namespace {

std::vector<double> numeric_column(const CsvTable& t, std::string_view name, bool main_only = true) {
  std::vector<double> out;
  int c = t.column(name);
  if (c < 0) return out;
  int sub = t.column("subset");
  int ex = t.column("excluded");
  for (const auto& r : t.rows) {
    if (main_only && sub >= 0 && !r[std::size_t(sub)].empty() && r[std::size_t(sub)] != "main") continue;
    if (ex >= 0 && r[std::size_t(ex)] == "true") continue;
    const std::string& s = r[std::size_t(c)];
    if (s.empty()) continue;
    double v = std::strtod(s.c_str(), nullptr);
    if (std::isfinite(v)) out.push_back(v);
  }
  return out;
}

void histogram(const std::vector<double>& v, std::ostream& out) {
  out << "bin_low,bin_high,count\n";
  if (v.empty()) return;
  constexpr int bins = 20;
  double lo = *std::min_element(v.begin(), v.end());
  double hi = *std::max_element(v.begin(), v.end());
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<std::size_t> count(bins, 0);
  double w = (hi - lo) / bins;
  for (double x : v) {
    int b = int((x - lo) / w);
    count[std::size_t(std::clamp(b, 0, bins - 1))]++;
  }
  for (int b = 0; b < bins; ++b)
    out << format_real(lo + w * b) << ',' << format_real(b == bins - 1 ? hi : lo + w * (b + 1)) << ','
        << count[std::size_t(b)] << '\n';
}

}  // namespace

void plotdata(const CsvTable& t, std::string_view kind, std::ostream& out) {
  if (kind == "lambda-histogram") {
    histogram(numeric_column(t, "lambda"), out);
  } else if (kind == "attractor-histogram") {
    histogram(numeric_column(t, "attractor_value"), out);
  } else if (kind == "approx-order") {
    out << "epsilon,log_epsilon,median_error_sup,log_median_error_sup,samples\n";
    int ce = t.column("epsilon"), cr = t.column("error_sup"), ex = t.column("excluded");
    if (ce < 0 || cr < 0) return;
    std::map<double, std::vector<double>> groups;
    for (const auto& r : t.rows) {
      if (ex >= 0 && r[std::size_t(ex)] == "true") continue;
      if (r[std::size_t(ce)].empty() || r[std::size_t(cr)].empty()) continue;
      groups[std::strtod(r[std::size_t(ce)].c_str(), nullptr)].push_back(std::strtod(r[std::size_t(cr)].c_str(), nullptr));
    }
    for (const auto& [e, errs] : groups) {
      double m = median(errs);
      out << format_real(e) << ',' << format_real(std::log(e)) << ',' << format_real(m) << ','
          << format_real(std::log(m)) << ',' << errs.size() << '\n';
    }
  } else {
    throw std::invalid_argument("unknown plot kind '" + std::string(kind) +
                                "' (lambda-histogram, attractor-histogram, approx-order)");
  }
}

}  // namespace spdeftle
