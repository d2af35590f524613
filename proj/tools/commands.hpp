#ifndef NOONSIM_TOOLS_COMMANDS_HPP
#define NOONSIM_TOOLS_COMMANDS_HPP

#include <cctype>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "noonsim/io.hpp"
#include "noonsim/noonsim.hpp"
#include "noonsim/svg.hpp"

namespace noonsim::cli {

namespace fs = std::filesystem;

enum ExitCode : int { ok = 0, usage_error = 1, numerical_failure = 2 };

/// Everything a subcommand needs, resolved from flags and the config file.
struct RunContext {
  KeyValueConfig config;
  std::vector<std::string> presets;  // empty: config preset or the default system
  std::vector<fs::path> inputs;      // estimate: existing peak-series JSON files
  std::optional<fs::path> calibration_file;
  fs::path out_dir = "out";
  std::set<std::string> formats = {"csv", "json", "svg"};
  std::ostream* log = &std::cout;

  bool wants(const std::string& f) const { return formats.count(f) != 0; }
};

inline std::string system_key(const SpinSystem& s) {
  if (s.name == "TMP") return "tmp";
  if (s.name == "hexafluorophosphate") return "pf6";
  std::string k;
  for (char c : s.name) k += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(c)) : '_';
  return k.empty() ? "system" : k;
}

inline std::vector<SpinSystem> systems_for(const RunContext& ctx) {
  if (ctx.presets.empty()) return {spin_system_from(ctx.config)};
  std::vector<SpinSystem> out;
  for (const auto& p : ctx.presets) {
    KeyValueConfig c = ctx.config;
    c.set("preset", p);
    out.push_back(spin_system_from(c));
  }
  return out;
}

inline void emit(const RunContext& ctx, const std::string& name, const std::string& text) {
  io::write_text(ctx.out_dir / name, text);
  *ctx.log << "wrote " << (ctx.out_dir / name).string() << '\n';
}

inline std::string evolution_plot(const PeakSeries& ps, const SpinSystem& sys) {
  svg::Plot p;
  p.title = sys.name + ": line amplitudes versus encoding time";
  p.xlabel = "encoding time (ms)";
  p.ylabel = "Re amplitude";
  for (std::size_t i = 0; i < ps.l_values.size(); ++i) {
    svg::Trace t;
    t.label = "l = " + std::to_string(ps.l_values[i]);
    for (std::size_t k = 0; k < ps.times.size(); ++k) {
      t.xs.push_back(ps.times[k] * 1e3);
      t.ys.push_back(ps.amplitudes[i][k].real());
    }
    p.traces.push_back(std::move(t));
  }
  return svg::render(p);
}

inline std::string line_spectrum_plot(const LineSpectrum& ls, const SpinSystem& sys) {
  svg::Plot p;
  p.title = sys.name + ": central-spin spectrum";
  p.xlabel = "frequency offset (Hz)";
  p.ylabel = "intensity";
  p.traces.push_back({"multiplet", ls.frequencies, ls.intensities, false});
  return svg::render(p);
}

/// simulate: peak evolution per line plus the central-spin multiplet.
inline int cmd_simulate(const RunContext& ctx) {
  for (const auto& sys : systems_for(ctx)) {
    const EncodingConfig cfg = encoding_config_from(ctx.config);
    const PeakSeries ps = run_protocol(sys, cfg);
    const std::string key = system_key(sys);
    if (ctx.wants("csv")) emit(ctx, key + "_peak_series.csv", io::peak_series_csv(ps));
    if (ctx.wants("json")) emit(ctx, key + "_peak_series.json", io::dump(io::to_json(ps, sys)));
    if (ctx.wants("svg")) emit(ctx, key + "_peak_evolution.svg", evolution_plot(ps, sys));

    const double linewidth = ctx.config.number("linewidth_hz").value_or(sys.j_coupling / 20.0);
    const LineSpectrum ls = synthesize_line_spectrum(sys, sector_line_amplitudes(sys), linewidth);
    if (ctx.wants("csv")) emit(ctx, key + "_line_spectrum.csv", io::line_spectrum_csv(ls));
    if (ctx.wants("json")) emit(ctx, key + "_line_spectrum.json", io::dump(io::to_json(ls)));
    if (ctx.wants("svg")) emit(ctx, key + "_line_spectrum.svg", line_spectrum_plot(ls, sys));
  }
  return ok;
}

/// estimate: field spectra, fitted field per line and the advantage ratio.
inline int cmd_estimate(const RunContext& ctx) {
  std::vector<io::LoadedSeries> runs;
  if (!ctx.inputs.empty()) {
    for (const auto& path : ctx.inputs) runs.push_back(io::peak_series_from_json(io::json::parse(io::read_text(path))));
  } else {
    const EncodingConfig cfg = encoding_config_from(ctx.config);
    for (const auto& sys : systems_for(ctx)) runs.push_back({sys, run_protocol(sys, cfg)});
  }
  const AnalysisOptions opt = analysis_options_from(ctx.config);

  std::vector<io::EstimateRow> rows;
  svg::Plot spectra;
  spectra.title = "Normalised field spectra";
  spectra.xlabel = "field (uT)";
  spectra.ylabel = "normalised magnitude";
  svg::Plot ratio;
  ratio.title = "Advantage ratio versus coherence order";
  ratio.xlabel = "l";
  ratio.ylabel = "R";

  for (const auto& run : runs) {
    const std::string key = system_key(run.system);
    const auto lines = analyze_series(run.series, run.system, opt);
    const auto r = advantage_ratios(lines);
    svg::Trace rtrace{run.system.name, {}, {}, true};
    for (const auto& a : lines) {
      const int l = a.estimate.l;
      rows.push_back({run.system.name, a.estimate, r.at(l), a.fit.residual});
      const std::string stem = key + "_field_spectrum_l" + std::to_string(l);
      if (ctx.wants("csv")) emit(ctx, stem + ".csv", io::field_spectrum_csv(a.spectrum));
      if (ctx.wants("json")) emit(ctx, stem + ".json", io::dump(io::to_json(a.spectrum)));

      // Plot only the neighbourhood of the line, in field units.
      svg::Trace t;
      t.label = key + " l = " + std::to_string(l);
      const double per_hz = two_pi / (l * run.system.gamma_satellite) * 1e6;
      const double half = 4.0 * std::max(a.fit.fwhm_hz, a.spectrum.bin_width);
      for (std::size_t i = 0; i < a.spectrum.frequencies.size(); ++i) {
        const double f = a.spectrum.frequencies[i];
        if (std::abs(f - a.fit.center_hz) > half) continue;
        t.xs.push_back(f * per_hz);
        t.ys.push_back(a.spectrum.magnitudes[i]);
      }
      spectra.traces.push_back(std::move(t));
    }
    for (auto it = r.begin(); it != r.end(); ++it) {
      rtrace.xs.push_back(it->first);
      rtrace.ys.push_back(it->second);
    }
    ratio.traces.push_back(std::move(rtrace));
  }
  if (ctx.wants("csv")) {
    emit(ctx, "field_estimates.csv", io::estimates_csv(rows));
    emit(ctx, "advantage.csv", io::ratios_csv(rows));
  }
  if (ctx.wants("json")) emit(ctx, "field_estimates.json", io::dump(io::to_json(rows)));
  if (ctx.wants("svg")) {
    emit(ctx, "field_spectra.svg", svg::render(spectra));
    emit(ctx, "advantage.svg", svg::render(ratio));
  }
  for (const auto& row : rows)
    *ctx.log << row.system << " l=" << row.estimate.l << " delta=" << io::num(row.estimate.delta_hat)
             << " T +/- " << io::num(row.estimate.delta_err) << " T  R=" << io::num(row.r) << '\n';
  return ok;
}

/// scan: R(l) over a list of T_max values and the best T_max per line.
inline int cmd_scan(const RunContext& ctx) {
  const auto list = ctx.config.number_list("t_max_list");
  if (!list || list->empty()) throw ConfigError("scan needs a nonempty t_max_list");
  const EncodingConfig cfg = encoding_config_from(ctx.config);
  const AnalysisOptions opt = analysis_options_from(ctx.config);
  for (const auto& sys : systems_for(ctx)) {
    const ScanResult res = time_scan(sys, cfg.delta, *list, cfg, opt);
    const std::string key = system_key(sys);
    if (ctx.wants("csv")) {
      emit(ctx, key + "_scan.csv", io::scan_csv(res));
      emit(ctx, key + "_scan_optimum.csv", io::scan_optimum_csv(res));
    }
    if (ctx.wants("json")) emit(ctx, key + "_scan.json", io::dump(io::to_json(res)));
    if (ctx.wants("svg")) {
      svg::Plot p;
      p.title = sys.name + ": advantage ratio versus T_max";
      p.xlabel = "T_max (ms)";
      p.ylabel = "R";
      std::map<int, svg::Trace> by_l;
      for (const auto& row : res.rows) {
        auto& t = by_l[row.l];
        t.label = "l = " + std::to_string(row.l);
        t.markers = true;
        t.xs.push_back(row.t_max * 1e3);
        t.ys.push_back(row.r);
      }
      for (auto it = by_l.rbegin(); it != by_l.rend(); ++it) p.traces.push_back(it->second);
      emit(ctx, key + "_scan.svg", svg::render(p));
    }
    for (const auto& o : res.optima)
      *ctx.log << sys.name << " l=" << o.l << " best T_max=" << io::num(o.t_max) << " s R=" << io::num(o.r) << '\n';
  }
  return ok;
}

/// thermometer: two-point calibration followed by the temperature sweep.
inline int cmd_thermometer(const RunContext& ctx) {
  const SpinSystem sys = systems_for(ctx).front();
  const EncodingConfig cfg = encoding_config_from(ctx.config, default_thermometer_config());
  const ThermometerSettings set = thermometer_settings_from(ctx.config);
  const auto temps = temperature_sweep(ctx.config.number("sweep_start").value_or(22.0),
                                       ctx.config.number("sweep_stop").value_or(30.0),
                                       ctx.config.number("sweep_step").value_or(1.0));

  const Calibration cal = ctx.calibration_file
                              ? io::calibration_from_json(io::json::parse(io::read_text(*ctx.calibration_file)))
                              : calibrate_thermometer(sys, set, cfg);
  emit(ctx, "calibration.json", io::dump(io::to_json(cal)));

  const ThermometerResult res = run_thermometer_experiment(sys, cal, set, temps, cfg);
  if (ctx.wants("csv")) emit(ctx, "thermometer.csv", io::thermometer_csv(res));
  if (ctx.wants("json")) emit(ctx, "thermometer.json", io::dump(io::to_json(res)));
  if (ctx.wants("svg")) {
    svg::Plot p;
    p.title = sys.name + ": offset field versus temperature";
    p.xlabel = "temperature (C)";
    p.ylabel = "field (nT)";
    svg::Trace measured{"measured", {}, {}, true}, truth{"true shift", {}, {}, false};
    for (const auto& row : res.rows) {
      measured.xs.push_back(row.set_temp);
      measured.ys.push_back(row.delta_hat * 1e9);
      truth.xs.push_back(row.set_temp);
      truth.ys.push_back(row.true_field * 1e9);
    }
    p.traces = {measured, truth};
    emit(ctx, "thermometer.svg", svg::render(p));
  }
  *ctx.log << "calibrated sensitivity " << io::num(cal.model.sensitivity * 1e9) << " nT/C, refit slope "
           << io::num(res.refit_slope * 1e9) << " nT/C over " << res.rows.size() << " set points\n";
  return ok;
}

}  // namespace noonsim::cli

#endif
