#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include "spdeftle/config.hpp"
#include "spdeftle/experiments.hpp"
#include "spdeftle/report_io.hpp"

namespace fs = std::filesystem;
using namespace spdeftle;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitPredicate = 2;

ConfigResult load_or_report(const std::string& path) {
  ConfigResult r = load_config(path);
  for (const auto& e : r.errors) std::cerr << path << ": " << e << '\n';
  return r;
}

fs::path output_stem(const Campaign& c) {
  fs::path stem(c.output_path);
  if (const char* dir = std::getenv("SPDEFTLE_OUTPUT_DIR"); dir && *dir) stem = fs::path(dir) / stem.filename();
  return stem;
}

void write_file(const fs::path& p, const auto& writer) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  writer(out);
  out.flush();
  if (!out) throw std::runtime_error("write to " + p.string() + " failed");
}

int cmd_run(const std::string& config_path) {
  ConfigResult cfg = load_or_report(config_path);
  if (!cfg.ok()) return kExitError;
  const Campaign& c = *cfg.campaign;
  try {
    RegimeReport rep = run_campaign(c);
    fs::path stem = output_stem(rep.campaign);
    fs::path samples = stem.string() + "_samples.csv";
    fs::path summary = stem.string() + "_summary.csv";
    write_file(samples, [&](std::ostream& o) { write_samples_csv(o, rep); });
    write_file(summary, [&](std::ostream& o) { write_summary_csv(o, rep); });
    for (const auto& row : rep.summary) {
      std::cout << row.metric << " = " << format_real(row.value);
      if (row.ci_low && row.ci_high) std::cout << " [" << *row.ci_low << ", " << *row.ci_high << "]";
      if (row.pass) std::cout << (*row.pass ? "  pass" : "  FAIL");
      std::cout << '\n';
    }
    std::cout << "wrote " << samples.string() << " and " << summary.string() << '\n';
    return rep.passed ? kExitOk : kExitPredicate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}

int cmd_validate(const std::string& config_path) {
  ConfigResult cfg = load_or_report(config_path);
  if (!cfg.ok()) return kExitError;
  const Campaign& c = *cfg.campaign;
  std::cout << "ok: regime " << regime_name(c.regime) << ", model " << c.model << ", N=" << c.n_modes
            << ", dt=" << format_real(c.dt) << ", slow_horizon=" << format_real(c.slow_horizon)
            << ", samples=" << c.samples << ", seed=" << c.seed << '\n';
  return kExitOk;
}

int cmd_plotdata(const std::string& csv_path, const std::string& kind, const std::string& out_path) {
  try {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("cannot open " + csv_path);
    CsvTable t = read_csv(in);
    if (out_path.empty()) {
      plotdata(t, kind, std::cout);
    } else {
      write_file(out_path, [&](std::ostream& o) { plotdata(t, kind, o); });
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-time Lyapunov exponents of SPDEs near a change of stability"};
  app.require_subcommand(1);

  std::string run_cfg, validate_cfg, csv, kind, out;
  auto* run = app.add_subcommand("run", "run a campaign and write <output_path>_samples.csv / _summary.csv");
  run->add_option("config", run_cfg, "campaign config (INI)")->required();
  auto* validate = app.add_subcommand("validate", "parse and gate-check a config without running it");
  validate->add_option("config", validate_cfg, "campaign config (INI)")->required();
  auto* plot = app.add_subcommand("plotdata", "plot-ready series from a per-sample CSV");
  plot->add_option("csv", csv, "per-sample CSV")->required();
  plot->add_option("--kind", kind, "lambda-histogram | attractor-histogram | approx-order")->required();
  plot->add_option("--out", out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }
  if (*run) return cmd_run(run_cfg);
  if (*validate) return cmd_validate(validate_cfg);
  return cmd_plotdata(csv, kind, out);
}
