#ifndef NOONSIM_IO_HPP
#define NOONSIM_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "protocol.hpp"
#include "spin_model.hpp"
#include "thermometry.hpp"

namespace noonsim::io {

using nlohmann::json;

/// Decimal text with 12 significant digits.
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Rounds through the 12-digit text form so JSON and CSV carry the same value.
inline double rounded(double v) { return std::stod(num(v)); }

inline json rounded_array(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(rounded(x));
  return a;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- spin systems -------------------------------------------------------

inline json to_json(const SpinSystem& s) {
  return {{"name", s.name},
          {"n_satellites", s.n_satellites},
          {"gamma_central", rounded(s.gamma_central)},
          {"gamma_satellite", rounded(s.gamma_satellite)},
          {"j_coupling", rounded(s.j_coupling)},
          {"t2_collective", rounded(s.t2_collective)},
          {"t2_independent", rounded(s.t2_independent)},
          {"t2_central", rounded(s.t2_central)},
          {"isolated_fraction", rounded(s.isolated_fraction)}};
}

inline SpinSystem spin_system_from_json(const json& j) {
  SpinSystem s;
  s.name = j.at("name").get<std::string>();
  s.n_satellites = j.at("n_satellites").get<int>();
  s.gamma_central = j.at("gamma_central").get<double>();
  s.gamma_satellite = j.at("gamma_satellite").get<double>();
  s.j_coupling = j.at("j_coupling").get<double>();
  s.t2_collective = j.at("t2_collective").get<double>();
  s.t2_independent = j.at("t2_independent").get<double>();
  s.t2_central = j.at("t2_central").get<double>();
  s.isolated_fraction = j.at("isolated_fraction").get<double>();
  validate(s);
  return s;
}

// ---- peak series --------------------------------------------------------

/// Columns: time_s, then re_l<l>, im_l<l> for each line.
inline std::string peak_series_csv(const PeakSeries& ps) {
  std::string out = "time_s";
  for (int l : ps.l_values) out += ",re_l" + std::to_string(l) + ",im_l" + std::to_string(l);
  out += '\n';
  for (std::size_t k = 0; k < ps.times.size(); ++k) {
    out += num(ps.times[k]);
    for (const auto& line : ps.amplitudes) out += ',' + num(line[k].real()) + ',' + num(line[k].imag());
    out += '\n';
  }
  return out;
}

inline json to_json(const PeakSeries& ps, const SpinSystem& sys) {
  json lines = json::array();
  for (std::size_t i = 0; i < ps.l_values.size(); ++i) {
    std::vector<double> re, im;
    for (const auto& v : ps.amplitudes[i]) re.push_back(v.real()), im.push_back(v.imag());
    lines.push_back({{"l", ps.l_values[i]}, {"re", rounded_array(re)}, {"im", rounded_array(im)}});
  }
  return {{"system", to_json(sys)}, {"times", rounded_array(ps.times)}, {"lines", lines}};
}

struct LoadedSeries {
  SpinSystem system;
  PeakSeries series;
};

inline LoadedSeries peak_series_from_json(const json& j) {
  LoadedSeries out;
  out.system = spin_system_from_json(j.at("system"));
  out.series.times = j.at("times").get<std::vector<double>>();
  for (const auto& line : j.at("lines")) {
    const auto re = line.at("re").get<std::vector<double>>();
    const auto im = line.at("im").get<std::vector<double>>();
    if (re.size() != out.series.times.size() || im.size() != re.size())
      throw std::runtime_error("peak series line length does not match the time grid");
    std::vector<cplx> v(re.size());
    for (std::size_t k = 0; k < re.size(); ++k) v[k] = {re[k], im[k]};
    out.series.l_values.push_back(line.at("l").get<int>());
    out.series.amplitudes.push_back(std::move(v));
  }
  return out;
}

// ---- analysis outputs ---------------------------------------------------

inline std::string field_spectrum_csv(const FieldSpectrum& fs) {
  std::string out = "frequency_hz,magnitude\n";
  for (std::size_t i = 0; i < fs.frequencies.size(); ++i)
    out += num(fs.frequencies[i]) + ',' + num(fs.magnitudes[i]) + '\n';
  return out;
}

inline json to_json(const FieldSpectrum& fs) {
  return {{"l", fs.l},
          {"bin_width_hz", rounded(fs.bin_width)},
          {"scale", rounded(fs.scale)},
          {"frequencies_hz", rounded_array(fs.frequencies)},
          {"magnitudes", rounded_array(fs.magnitudes)}};
}

inline json to_json(const FieldEstimate& e) {
  return {{"l", e.l},
          {"center_hz", rounded(e.center_hz)},
          {"fwhm_hz", rounded(e.fwhm_hz)},
          {"delta_hat_t", rounded(e.delta_hat)},
          {"delta_err_t", rounded(e.delta_err)}};
}

struct EstimateRow {
  std::string system;
  FieldEstimate estimate;
  double r = 0.0;
  double residual = 0.0;
};

inline std::string estimates_csv(const std::vector<EstimateRow>& rows) {
  std::string out = "system,l,center_hz,fwhm_hz,delta_hat_t,delta_err_t,fit_residual\n";
  for (const auto& r : rows) {
    const auto& e = r.estimate;
    out += r.system + ',' + std::to_string(e.l) + ',' + num(e.center_hz) + ',' + num(e.fwhm_hz) + ',' +
           num(e.delta_hat) + ',' + num(e.delta_err) + ',' + num(r.residual) + '\n';
  }
  return out;
}

inline std::string ratios_csv(const std::vector<EstimateRow>& rows) {
  std::string out = "system,l,r_ratio\n";
  for (const auto& r : rows) out += r.system + ',' + std::to_string(r.estimate.l) + ',' + num(r.r) + '\n';
  return out;
}

inline json to_json(const std::vector<EstimateRow>& rows) {
  json a = json::array();
  for (const auto& r : rows) {
    json e = to_json(r.estimate);
    e["system"] = r.system;
    e["r_ratio"] = rounded(r.r);
    e["fit_residual"] = rounded(r.residual);
    a.push_back(e);
  }
  return a;
}

inline std::string scan_csv(const ScanResult& s) {
  std::string out = "t_max_s,l,r_ratio\n";
  for (const auto& r : s.rows) out += num(r.t_max) + ',' + std::to_string(r.l) + ',' + num(r.r) + '\n';
  return out;
}

inline std::string scan_optimum_csv(const ScanResult& s) {
  std::string out = "l,t_max_s,r_ratio\n";
  for (const auto& o : s.optima) out += std::to_string(o.l) + ',' + num(o.t_max) + ',' + num(o.r) + '\n';
  return out;
}

inline json to_json(const ScanResult& s) {
  json rows = json::array(), optima = json::array();
  for (const auto& r : s.rows) rows.push_back({{"t_max_s", rounded(r.t_max)}, {"l", r.l}, {"r_ratio", rounded(r.r)}});
  for (const auto& o : s.optima)
    optima.push_back({{"l", o.l}, {"t_max_s", rounded(o.t_max)}, {"r_ratio", rounded(o.r)}});
  return {{"rows", rows}, {"optima", optima}};
}

inline std::string line_spectrum_csv(const LineSpectrum& ls) {
  std::string out = "frequency_hz,intensity\n";
  for (std::size_t i = 0; i < ls.frequencies.size(); ++i)
    out += num(ls.frequencies[i]) + ',' + num(ls.intensities[i]) + '\n';
  return out;
}

inline json to_json(const LineSpectrum& ls) {
  json lines = json::array();
  for (const auto& l : ls.lines)
    lines.push_back({{"l", l.l}, {"frequency_hz", rounded(l.frequency)}, {"amplitude", rounded(l.amplitude)}});
  return {{"lines", lines}, {"frequencies_hz", rounded_array(ls.frequencies)},
          {"intensities", rounded_array(ls.intensities)}};
}

// ---- thermometry --------------------------------------------------------

inline json to_json(const Calibration& c) {
  return {{"anchor_temp_c", rounded(c.model.anchor_temp)},
          {"anchor_field_t", rounded(c.model.anchor_field)},
          {"sensitivity_t_per_c", rounded(c.model.sensitivity)},
          {"residual_t", rounded(c.residual)}};
}

inline Calibration calibration_from_json(const json& j) {
  Calibration c;
  c.model.anchor_temp = j.at("anchor_temp_c").get<double>();
  c.model.anchor_field = j.at("anchor_field_t").get<double>();
  c.model.sensitivity = j.at("sensitivity_t_per_c").get<double>();
  c.residual = j.value("residual_t", 0.0);
  if (c.model.sensitivity == 0.0) throw std::runtime_error("calibration has zero sensitivity");
  return c;
}

inline std::string thermometer_csv(const ThermometerResult& r) {
  std::string out = "set_temp_c,delta_hat_t,est_temp_c,temp_err_c\n";
  for (const auto& row : r.rows)
    out += num(row.set_temp) + ',' + num(row.delta_hat) + ',' + num(row.est_temp) + ',' + num(row.temp_err) + '\n';
  return out;
}

inline json to_json(const ThermometerResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"set_temp_c", rounded(row.set_temp)},
                    {"true_field_t", rounded(row.true_field)},
                    {"delta_hat_t", rounded(row.delta_hat)},
                    {"delta_err_t", rounded(row.delta_err)},
                    {"est_temp_c", rounded(row.est_temp)},
                    {"temp_err_c", rounded(row.temp_err)}});
  json j = {{"rows", rows}};
  j["refit_slope_t_per_c"] = std::isfinite(r.refit_slope) ? json(rounded(r.refit_slope)) : json(nullptr);
  j["refit_intercept_t"] = std::isfinite(r.refit_intercept) ? json(rounded(r.refit_intercept)) : json(nullptr);
  return j;
}

inline std::string dump(const json& j) { return j.dump(2) + '\n'; }

}  // namespace noonsim::io

#endif
