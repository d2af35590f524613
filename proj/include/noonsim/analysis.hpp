#ifndef NOONSIM_ANALYSIS_HPP
#define NOONSIM_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "protocol.hpp"
#include "spin_model.hpp"

namespace noonsim {

/// Two-sided magnitude spectrum of one line's encoding-time series.
struct FieldSpectrum {
  int l = 0;
  std::vector<double> frequencies;  // Hz, ascending
  std::vector<double> magnitudes;   // normalised to unit maximum
  double scale = 0.0;               // unnormalised maximum magnitude
  double bin_width = 0.0;           // Hz (after zero padding)
};

/// Discrete Fourier transform of line l over the encoding time, zero padded
/// to zero_pad_factor times the sample count.
inline FieldSpectrum time_series_transform(const PeakSeries& series, int l, int zero_pad_factor) {
  if (zero_pad_factor < 1) throw std::domain_error("time_series_transform: zero_pad_factor must be >= 1");
  const auto& x = series.line(l);
  const std::size_t n = x.size();
  if (n < 2) throw std::domain_error("time_series_transform: need at least two samples");
  const std::size_t np = n * static_cast<std::size_t>(zero_pad_factor);

  std::vector<cplx> padded(np, cplx{});
  std::copy(x.begin(), x.end(), padded.begin());
  std::vector<cplx> out;
  Eigen::FFT<double> fft;
  fft.fwd(out, padded);

  FieldSpectrum fs;
  fs.l = l;
  fs.bin_width = 1.0 / (static_cast<double>(np) * series.dt());
  fs.frequencies.resize(np);
  fs.magnitudes.resize(np);
  // Reorder to ascending frequency: bins [ceil(np/2), np) are negative.
  const std::size_t neg = np / 2;
  const std::size_t first_neg = np - neg;
  for (std::size_t j = 0; j < np; ++j) {
    const std::size_t k = j < neg ? first_neg + j : j - neg;
    const long signed_k = k >= first_neg ? static_cast<long>(k) - static_cast<long>(np) : static_cast<long>(k);
    fs.frequencies[j] = signed_k * fs.bin_width;
    fs.magnitudes[j] = std::abs(out[k]);
  }
  fs.scale = *std::max_element(fs.magnitudes.begin(), fs.magnitudes.end());
  if (fs.scale > 0.0)
    for (auto& v : fs.magnitudes) v /= fs.scale;
  return fs;
}

enum class LineShape { lorentzian, gaussian };

inline std::string to_string(LineShape s) { return s == LineShape::lorentzian ? "lorentzian" : "gaussian"; }

inline LineShape line_shape_from_string(const std::string& s) {
  if (s == "lorentzian") return LineShape::lorentzian;
  if (s == "gaussian") return LineShape::gaussian;
  throw std::invalid_argument("unknown line shape '" + s + "'");
}

struct LineFit {
  double center_hz = 0.0;
  double fwhm_hz = 0.0;
  double amplitude = 0.0;
  double residual = 0.0;  // RMS over the fit window
  LineShape shape = LineShape::lorentzian;
};

/// Raised when a line fit cannot produce a usable result.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

inline double line_model(LineShape shape, double f, double center, double fwhm, double amplitude) {
  const double u = f - center;
  if (shape == LineShape::lorentzian) {
    const double h = 0.5 * fwhm;
    return amplitude * h * h / (u * u + h * h);
  }
  return amplitude * std::exp(-4.0 * std::log(2.0) * u * u / (fwhm * fwhm));
}

namespace detail {

// Parameters (amplitude, centre, half width), abscissa in bins relative to the peak.
struct LineFunctor : Eigen::DenseFunctor<double> {
  LineFunctor(LineShape shape, std::vector<double> u, std::vector<double> y)
      : Eigen::DenseFunctor<double>(3, static_cast<int>(u.size())), shape(shape), u(std::move(u)), y(std::move(y)) {}

  int operator()(const InputType& p, ValueType& r) const {
    for (int i = 0; i < values(); ++i) r[i] = eval(p, u[i]) - y[i];
    return 0;
  }

  int df(const InputType& p, JacobianType& jac) const {
    const double a = p[0], c = p[1], w = p[2];
    for (int i = 0; i < values(); ++i) {
      const double d = u[i] - c;
      if (shape == LineShape::lorentzian) {
        const double den = d * d + w * w;
        const double g = w * w / den;
        jac(i, 0) = g;
        jac(i, 1) = a * w * w * 2.0 * d / (den * den);
        jac(i, 2) = a * 2.0 * w * d * d / (den * den);
      } else {
        // exp(-ln2 d^2 / w^2): w is the half width at half maximum.
        const double k = std::log(2.0);
        const double g = std::exp(-k * d * d / (w * w));
        jac(i, 0) = g;
        jac(i, 1) = a * g * 2.0 * k * d / (w * w);
        jac(i, 2) = a * g * 2.0 * k * d * d / (w * w * w);
      }
    }
    return 0;
  }

  double eval(const InputType& p, double x) const {
    const double d = x - p[1];
    if (shape == LineShape::lorentzian) return p[0] * p[2] * p[2] / (d * d + p[2] * p[2]);
    return p[0] * std::exp(-std::log(2.0) * d * d / (p[2] * p[2]));
  }

  LineShape shape;
  std::vector<double> u, y;
};

/// Index of the global maximum; ties go to the smaller |frequency|.
inline std::size_t peak_index(const FieldSpectrum& s) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.magnitudes.size(); ++i) {
    const double v = s.magnitudes[i], b = s.magnitudes[best];
    if (v > b || (v == b && std::abs(s.frequencies[i]) < std::abs(s.frequencies[best]))) best = i;
  }
  return best;
}

}  // namespace detail

/// Least-squares fit of a single line over window_bins bins centred on the
/// spectrum's global maximum.
inline LineFit fit_line(const FieldSpectrum& spectrum, int window_bins, LineShape shape) {
  if (window_bins < 5) throw std::domain_error("fit: window_bins must be >= 5");
  const auto& mag = spectrum.magnitudes;
  if (mag.size() < 5) throw FitError("fit: spectrum too short", 0.0);
  const auto [lo_it, hi_it] = std::minmax_element(mag.begin(), mag.end());
  if (!(*hi_it > 0.0) || *hi_it - *lo_it <= 1e-12 * *hi_it) throw FitError("fit: spectrum is flat", 0.0);

  const std::size_t peak = detail::peak_index(spectrum);
  const long half = window_bins / 2;
  const long first = std::max(0L, static_cast<long>(peak) - half);
  const long last = std::min(static_cast<long>(mag.size()) - 1, static_cast<long>(peak) + half);
  if (last - first + 1 < 5) throw FitError("fit: window clipped below five bins", 0.0);

  const double df = spectrum.bin_width > 0.0 ? spectrum.bin_width
                                             : spectrum.frequencies[1] - spectrum.frequencies[0];
  const double f_peak = spectrum.frequencies[peak];
  std::vector<double> u, y;
  for (long i = first; i <= last; ++i) {
    u.push_back((spectrum.frequencies[i] - f_peak) / df);
    y.push_back(mag[i]);
  }

  // Half width at half maximum from the first crossings either side of the peak.
  const double peak_val = mag[peak];
  double left = 0.0, right = 0.0;
  for (long i = static_cast<long>(peak); i > first; --i)
    if (mag[i - 1] < 0.5 * peak_val) {
      left = (static_cast<double>(peak) - (i - 1)) - (0.5 * peak_val - mag[i - 1]) / (mag[i] - mag[i - 1]);
      break;
    }
  for (long i = static_cast<long>(peak); i < last; ++i)
    if (mag[i + 1] < 0.5 * peak_val) {
      right = (i - static_cast<double>(peak)) + (mag[i] - 0.5 * peak_val) / (mag[i] - mag[i + 1]);
      break;
    }
  double hw = left > 0.0 && right > 0.0 ? 0.5 * (left + right) : std::max(left, right);
  if (!(hw > 0.0)) hw = 0.25 * static_cast<double>(last - first);

  detail::LineFunctor functor(shape, u, y);
  Eigen::VectorXd p(3);
  p << peak_val, 0.0, hw;
  Eigen::LevenbergMarquardt<detail::LineFunctor> lm(functor);
  lm.setMaxfev(4000);
  lm.setXtol(1e-15);
  lm.setFtol(1e-15);
  lm.setGtol(0.0);
  const auto status = lm.minimize(p);

  Eigen::VectorXd r(functor.values());
  functor(p, r);
  const double rms = std::sqrt(r.squaredNorm() / r.size());
  if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters ||
      status == Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation)
    throw FitError("fit: least squares did not converge", rms);
  if (!p.allFinite() || p[2] == 0.0) throw FitError("fit: non-finite or zero-width solution", rms);

  LineFit fit;
  fit.shape = shape;
  fit.center_hz = f_peak + p[1] * df;
  fit.fwhm_hz = 2.0 * std::abs(p[2]) * df;
  fit.amplitude = p[0];
  fit.residual = rms;
  return fit;
}

inline LineFit fit_lorentzian(const FieldSpectrum& spectrum, int window_bins) {
  return fit_line(spectrum, window_bins, LineShape::lorentzian);
}

inline LineFit fit_gaussian(const FieldSpectrum& spectrum, int window_bins) {
  return fit_line(spectrum, window_bins, LineShape::gaussian);
}

struct FieldEstimate {
  int l = 0;
  double center_hz = 0.0;
  double fwhm_hz = 0.0;
  double delta_hat = 0.0;  // T
  double delta_err = 0.0;  // T
};

/// Converts a fitted line into a field value: the line oscillates at
/// l * gamma_satellite * delta / 2pi.
inline FieldEstimate estimate_field(const LineFit& fit, int l, const SpinSystem& sys) {
  if (l < 1) throw std::domain_error("estimate_field: l must be >= 1");
  FieldEstimate e;
  e.l = l;
  e.center_hz = fit.center_hz;
  e.fwhm_hz = fit.fwhm_hz;
  const double per_hz = two_pi / (l * sys.gamma_satellite);
  e.delta_hat = fit.center_hz * per_hz;
  e.delta_err = std::abs(fit.fwhm_hz * per_hz);
  return e;
}

inline double advantage_ratio(const FieldEstimate& classical, const FieldEstimate& quantum) {
  if (classical.l != 1) throw std::domain_error("advantage_ratio: classical estimate must come from l = 1");
  if (!(quantum.delta_err > 0.0)) throw std::domain_error("advantage_ratio: quantum error must be > 0");
  return classical.delta_err / quantum.delta_err;
}

struct AnalysisOptions {
  int zero_pad_factor = 8;
  int window_bins = 17;
  LineShape shape = LineShape::lorentzian;
};

struct LineAnalysis {
  FieldSpectrum spectrum;
  LineFit fit;
  FieldEstimate estimate;
};

/// Transform, fit and convert every line of a series.
inline std::vector<LineAnalysis> analyze_series(const PeakSeries& series, const SpinSystem& sys,
                                                const AnalysisOptions& opt = {}) {
  std::vector<LineAnalysis> out;
  for (int l : series.l_values) {
    LineAnalysis a;
    a.spectrum = time_series_transform(series, l, opt.zero_pad_factor);
    a.fit = fit_line(a.spectrum, opt.window_bins, opt.shape);
    a.estimate = estimate_field(a.fit, l, sys);
    out.push_back(std::move(a));
  }
  return out;
}

/// R(l) for every line of an analysed series, keyed by l; R(1) = 1.
inline std::map<int, double> advantage_ratios(const std::vector<LineAnalysis>& lines) {
  const FieldEstimate* classical = nullptr;
  for (const auto& a : lines)
    if (a.estimate.l == 1) classical = &a.estimate;
  if (!classical) throw std::domain_error("advantage_ratios: no l = 1 line to compare against");
  std::map<int, double> r;
  for (const auto& a : lines) r[a.estimate.l] = a.estimate.l == 1 ? 1.0 : advantage_ratio(*classical, a.estimate);
  return r;
}

struct ScanRow {
  double t_max = 0.0;
  int l = 0;
  double r = 0.0;
};

struct ScanOptimum {
  int l = 0;
  double t_max = 0.0;
  double r = 0.0;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  std::vector<ScanOptimum> optima;  // per l, descending l
};

/// Runs the full pipeline at each T_max and reports R(l) and its argmax.
inline ScanResult time_scan(const SpinSystem& sys, double delta, const std::vector<double>& t_max_list,
                            EncodingConfig cfg, const AnalysisOptions& opt = {}) {
  if (t_max_list.empty()) throw std::domain_error("time_scan: empty T_max list");
  cfg.delta = delta;
  ScanResult res;
  std::map<int, ScanOptimum> best;
  for (double t_max : t_max_list) {
    cfg.t_max = t_max;
    const auto ratios = advantage_ratios(analyze_series(run_protocol(sys, cfg), sys, opt));
    for (auto it = ratios.rbegin(); it != ratios.rend(); ++it) {
      res.rows.push_back({t_max, it->first, it->second});
      auto [slot, inserted] = best.try_emplace(it->first, ScanOptimum{it->first, t_max, it->second});
      if (!inserted && it->second > slot->second.r) slot->second = {it->first, t_max, it->second};
    }
  }
  for (auto it = best.rbegin(); it != best.rend(); ++it) res.optima.push_back(it->second);
  return res;
}

struct SpectralLine {
  int l = 0;
  double frequency = 0.0;  // Hz
  double amplitude = 0.0;
};

struct LineSpectrum {
  std::vector<SpectralLine> lines;
  std::vector<double> frequencies;
  std::vector<double> intensities;
};

/// Central-spin multiplet as a sum of Lorentzians at +/- l J / 2.
inline LineSpectrum synthesize_line_spectrum(const SpinSystem& sys, const std::vector<std::pair<int, double>>& amps,
                                             double linewidth_hz, int n_points = 4096) {
  if (!(linewidth_hz > 0.0)) throw std::domain_error("synthesize_line_spectrum: linewidth must be > 0");
  if (n_points < 2) throw std::domain_error("synthesize_line_spectrum: need at least two points");
  LineSpectrum out;
  int l_max = 0;
  for (const auto& [l, a] : amps) {
    if (l < 0) throw std::domain_error("synthesize_line_spectrum: l must be >= 0");
    l_max = std::max(l_max, l);
    const double f = 0.5 * l * sys.j_coupling;
    out.lines.push_back({l, f, a});
    if (l > 0) out.lines.push_back({l, -f, a});
  }
  const double span = 0.5 * l_max * sys.j_coupling + 10.0 * linewidth_hz;
  out.frequencies.resize(n_points);
  out.intensities.assign(n_points, 0.0);
  for (int i = 0; i < n_points; ++i) {
    const double f = -span + 2.0 * span * i / (n_points - 1);
    out.frequencies[i] = f;
    for (const auto& line : out.lines)
      out.intensities[i] += line_model(LineShape::lorentzian, f, line.frequency, linewidth_hz, line.amplitude);
  }
  return out;
}

/// Sector amplitudes of a system for display: binomial weights of each |N-2m|.
inline std::vector<std::pair<int, double>> sector_line_amplitudes(const SpinSystem& sys) {
  std::map<int, double> acc;
  for (const auto& e : sector_weights(sys).entries) acc[e.l] = e.weight;  // +/- partners share a weight
  return {acc.rbegin(), acc.rend()};
}

}  // namespace noonsim

#endif
