#ifndef NOONSIM_THERMOMETRY_HPP
#define NOONSIM_THERMOMETRY_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "analysis.hpp"
#include "protocol.hpp"
#include "spin_model.hpp"

namespace noonsim {

/// Linear chemical-shift response: effective offset field versus temperature.
struct ChemicalShiftModel {
  double anchor_temp = 22.0;   // deg C
  double anchor_field = 0.0;   // T
  double sensitivity = 85e-9;  // T per deg C
};

inline double shift_at_temperature(const ChemicalShiftModel& model, double temp) {
  return model.anchor_field + model.sensitivity * (temp - model.anchor_temp);
}

struct Calibration {
  ChemicalShiftModel model;
  double residual = 0.0;  // T
};

struct CalibrationPoint {
  double temp = 0.0;
  FieldEstimate estimate;
};

/// Two-point calibration anchored at the colder measurement.
inline Calibration calibrate(const CalibrationPoint& p1, const CalibrationPoint& p2) {
  if (p1.temp == p2.temp) throw std::domain_error("calibrate: calibration temperatures must differ");
  const auto& lo = p1.temp < p2.temp ? p1 : p2;
  const auto& hi = p1.temp < p2.temp ? p2 : p1;
  const double slope = (hi.estimate.delta_hat - lo.estimate.delta_hat) / (hi.temp - lo.temp);
  if (slope == 0.0) throw std::domain_error("calibrate: degenerate calibration, field does not change with temperature");
  Calibration cal;
  cal.model = {lo.temp, lo.estimate.delta_hat, slope};
  cal.residual = 0.0;
  return cal;
}

struct TemperatureReading {
  double temp = 0.0;      // deg C
  double temp_err = 0.0;  // deg C
};

inline TemperatureReading temperature_from_field(const Calibration& cal, const FieldEstimate& est) {
  const auto& m = cal.model;
  return {m.anchor_temp + (est.delta_hat - m.anchor_field) / m.sensitivity, est.delta_err / std::abs(m.sensitivity)};
}

/// Noise level the thermometer experiment runs with unless told otherwise,
/// in units of the bare central-spin signal.
inline constexpr double default_thermometer_noise = 2e-3;

struct ThermometerSettings {
  ChemicalShiftModel truth{22.0, 0.0, 85e-9};
  double instrument_offset = 0.0;  // T, added to the true field everywhere
  double cal_temp_low = 22.0;
  double cal_temp_high = 30.0;
  int line_l = 0;  // 0 selects l = N
  AnalysisOptions analysis;

  int line_for(const SpinSystem& s) const { return line_l > 0 ? line_l : s.n_satellites; }
  double true_field(double temp) const { return shift_at_temperature(truth, temp) + instrument_offset; }
};

/// Encoding configuration for the temperature experiment: 53 ms encoding
/// window with decoherence and the default noise level.
inline EncodingConfig default_thermometer_config() {
  EncodingConfig cfg;
  cfg.t_max = 0.053;
  cfg.noise_sigma = default_thermometer_noise;
  return cfg;
}

namespace detail {

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// One protocol run at the given field, analysed on line l only.
inline FieldEstimate measure_field(const SpinSystem& sys, EncodingConfig cfg, double field, int l,
                                   const AnalysisOptions& opt) {
  cfg.delta = field;
  const PeakSeries series = run_protocol(sys, cfg);
  const FieldSpectrum spec = time_series_transform(series, l, opt.zero_pad_factor);
  return estimate_field(fit_line(spec, opt.window_bins, opt.shape), l, sys);
}

/// Measures at the two calibration temperatures and builds the calibration.
inline Calibration calibrate_thermometer(const SpinSystem& sys, const ThermometerSettings& set,
                                         const EncodingConfig& cfg) {
  const int l = set.line_for(sys);
  auto point = [&](double temp, std::uint64_t stream) {
    EncodingConfig c = cfg;
    c.seed = detail::stream_seed(cfg.seed, stream);
    return CalibrationPoint{temp, measure_field(sys, c, set.true_field(temp), l, set.analysis)};
  };
  return calibrate(point(set.cal_temp_low, 0), point(set.cal_temp_high, 1));
}

struct ThermometerRow {
  double set_temp = 0.0;
  double true_field = 0.0;
  double delta_hat = 0.0;
  double delta_err = 0.0;
  double est_temp = 0.0;
  double temp_err = 0.0;
};

struct ThermometerResult {
  std::vector<ThermometerRow> rows;
  double refit_slope = std::numeric_limits<double>::quiet_NaN();      // T per deg C
  double refit_intercept = std::numeric_limits<double>::quiet_NaN();  // T at 0 deg C
};

/// Ordinary least-squares line through (x, y).
inline std::pair<double, double> fit_straight_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  if (sxx == 0.0) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

/// Sweeps the set temperatures, measures each field with the protocol and
/// converts it back to a temperature through the calibration.
inline ThermometerResult run_thermometer_experiment(const SpinSystem& sys, const Calibration& cal,
                                                    const ThermometerSettings& set, const std::vector<double>& temps,
                                                    const EncodingConfig& cfg) {
  const int l = set.line_for(sys);
  ThermometerResult res;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < temps.size(); ++i) {
    EncodingConfig c = cfg;
    c.seed = detail::stream_seed(cfg.seed, 2 + i);
    ThermometerRow row;
    row.set_temp = temps[i];
    row.true_field = set.true_field(temps[i]);
    const FieldEstimate est = measure_field(sys, c, row.true_field, l, set.analysis);
    const TemperatureReading t = temperature_from_field(cal, est);
    row.delta_hat = est.delta_hat;
    row.delta_err = est.delta_err;
    row.est_temp = t.temp;
    row.temp_err = t.temp_err;
    res.rows.push_back(row);
    xs.push_back(row.set_temp);
    ys.push_back(row.delta_hat);
  }
  std::tie(res.refit_slope, res.refit_intercept) = fit_straight_line(xs, ys);
  return res;
}

/// Set points from start to stop inclusive in steps of step.
inline std::vector<double> temperature_sweep(double start, double stop, double step) {
  if (!(step > 0.0)) throw std::domain_error("temperature_sweep: step must be > 0");
  std::vector<double> t;
  for (int i = 0;; ++i) {
    const double v = start + i * step;
    if (v > stop + 1e-9 * step) break;
    t.push_back(v);
  }
  return t;
}

}  // namespace noonsim

#endif
