#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using namespace noonsim;

std::set<std::string> split_formats(const std::vector<std::string>& raw) {
  std::set<std::string> out;
  for (const auto& item : raw) {
    std::istringstream in(item);
    std::string f;
    while (std::getline(in, f, ','))
      if (!f.empty()) out.insert(f);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NOON-state NMR magnetometer and thermometer simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::string> presets;
  std::vector<std::string> formats;
  std::vector<std::string> overrides;
  std::optional<long long> seed;
  app.add_option("--config", config_path, "flat key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "noise seed");
  app.add_option("--preset", presets, "spin system preset (repeatable)")->check(CLI::IsMember({"tmp", "pf6"}));
  app.add_option("--format", formats, "output formats: csv, json, svg (comma separated or repeated)");
  app.add_option("--set", overrides, "override a configuration key, KEY=VALUE (repeatable)");

  std::vector<std::string> inputs;
  std::string t_max_list;
  std::string calibration;
  auto* simulate = app.add_subcommand("simulate", "peak amplitudes versus encoding time");
  auto* estimate = app.add_subcommand("estimate", "field spectra, field estimates and advantage ratio");
  estimate->add_option("--input", inputs, "peak-series JSON written by simulate (repeatable)")
      ->check(CLI::ExistingFile);
  auto* scan = app.add_subcommand("scan", "advantage ratio over a list of T_max values");
  scan->add_option("--t-max-list", t_max_list, "comma separated T_max values in seconds");
  auto* thermo = app.add_subcommand("thermometer", "calibrate and sweep the NOON thermometer");
  thermo->add_option("--calibration", calibration, "reuse a stored calibration JSON")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::ok : cli::usage_error;
  }

  try {
    cli::RunContext ctx;
    if (!config_path.empty()) ctx.config = KeyValueConfig::parse(io::read_text(config_path));
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
      ctx.config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) ctx.config.set("seed", std::to_string(*seed));
    if (!t_max_list.empty()) ctx.config.set("t_max_list", t_max_list);
    ctx.presets = presets;
    ctx.out_dir = out_dir;
    if (!formats.empty()) {
      ctx.formats = split_formats(formats);
      for (const auto& f : ctx.formats)
        if (f != "csv" && f != "json" && f != "svg") throw ConfigError("unknown format '" + f + "'");
    }
    for (const auto& in : inputs) ctx.inputs.emplace_back(in);
    if (!calibration.empty()) ctx.calibration_file = calibration;

    if (*simulate) return cli::cmd_simulate(ctx);
    if (*estimate) return cli::cmd_estimate(ctx);
    if (*scan) return cli::cmd_scan(ctx);
    if (*thermo) return cli::cmd_thermometer(ctx);
  } catch (const FitError& e) {
    std::cerr << "numerical failure: " << e.what() << " (best residual " << e.best_residual() << ")\n";
    return cli::numerical_failure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::usage_error;
  }
  return cli::usage_error;
}
