#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "noonsim/analysis.hpp"

using namespace noonsim;

namespace {

PeakSeries single_line(const std::vector<cplx>& samples, double t_max) {
  PeakSeries ps;
  ps.l_values = {1};
  ps.times = encoding_times(t_max, static_cast<int>(samples.size()));
  ps.amplitudes = {samples};
  return ps;
}

FieldSpectrum synthetic(LineShape shape, double center, double fwhm, double f_lo, double f_hi, double df) {
  FieldSpectrum s;
  s.bin_width = df;
  for (double f = f_lo; f <= f_hi + 1e-9; f += df) {
    s.frequencies.push_back(f);
    s.magnitudes.push_back(line_model(shape, f, center, fwhm, 1.0));
  }
  s.scale = 1.0;
  return s;
}

EncodingConfig clean(double t_max) {
  EncodingConfig c;
  c.t_max = t_max;
  c.decoherence_on = false;
  return c;
}

}  // namespace

TEST(Transform, on_grid_tone_occupies_one_bin) {
  const int n = 64;
  const double t_max = 63e-3;  // dt = 1 ms, bin = 15.625 Hz
  const double f0 = 5 * 15.625;
  std::vector<cplx> x(n);
  for (int k = 0; k < n; ++k) x[k] = std::polar(1.0, two_pi * f0 * k * 1e-3);
  const auto fs = time_series_transform(single_line(x, t_max), 1, 1);
  EXPECT_NEAR(fs.bin_width, 15.625, 1e-9);
  EXPECT_NEAR(fs.scale, n, 1e-9);
  for (std::size_t j = 0; j < fs.frequencies.size(); ++j) {
    if (std::abs(fs.frequencies[j] - f0) < 1e-9)
      EXPECT_NEAR(fs.magnitudes[j], 1.0, 1e-12);
    else
      EXPECT_LT(fs.magnitudes[j], 1e-12) << fs.frequencies[j];
  }
}

TEST(Transform, matches_direct_dft) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int n : {16, 37}) {
    std::vector<cplx> x(n);
    for (auto& v : x) v = {g(rng), g(rng)};
    const double t_max = 0.01;
    const auto ps = single_line(x, t_max);
    const auto fs = time_series_transform(ps, 1, 3);
    ASSERT_EQ(fs.frequencies.size(), static_cast<std::size_t>(3 * n));
    for (std::size_t j = 1; j < fs.frequencies.size(); ++j) ASSERT_GT(fs.frequencies[j], fs.frequencies[j - 1]);
    for (std::size_t j = 0; j < fs.frequencies.size(); ++j) {
      cplx acc{};
      for (int k = 0; k < n; ++k) acc += x[k] * std::polar(1.0, -two_pi * fs.frequencies[j] * ps.times[k]);
      EXPECT_NEAR(fs.magnitudes[j] * fs.scale, std::abs(acc), 1e-9);
    }
  }
}

TEST(Transform, satisfies_parseval) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<cplx> x(100);
  double energy = 0.0;
  for (auto& v : x) v = {g(rng), g(rng)}, energy += std::norm(v);
  for (int pad : {1, 4}) {
    const auto fs = time_series_transform(single_line(x, 1.0), 1, pad);
    double spec = 0.0;
    for (double m : fs.magnitudes) spec += (m * fs.scale) * (m * fs.scale);
    EXPECT_NEAR(spec / (100.0 * pad), energy, 1e-9 * energy);
  }
}

TEST(Transform, constant_series_peaks_at_zero) {
  const auto fs = time_series_transform(single_line(std::vector<cplx>(128, cplx{0.3, 0.0}), 0.02), 1, 8);
  EXPECT_EQ(fs.frequencies[detail::peak_index(fs)], 0.0);
}

TEST(Transform, rejects_bad_arguments) {
  const auto ps = single_line(std::vector<cplx>(8, 1.0), 1.0);
  EXPECT_THROW(time_series_transform(ps, 1, 0), std::domain_error);
  EXPECT_THROW(time_series_transform(ps, 3, 8), std::domain_error);
}

TEST(Transform, clean_noon_line_lands_on_its_frequency) {
  const auto ps = run_protocol(presets::hexafluorophosphate(), clean(2e-3));
  const auto fs = time_series_transform(ps, 6, 8);
  EXPECT_NEAR(fs.frequencies[detail::peak_index(fs)], 2818.8, fs.bin_width);
}

TEST(Fit, recovers_exact_lorentzian) {
  const auto s = synthetic(LineShape::lorentzian, 100.3, 20.0, 0.0, 400.0, 1.0);
  const auto fit = fit_lorentzian(s, 81);
  EXPECT_NEAR(fit.center_hz, 100.3, 100.3 * 1e-6);
  EXPECT_NEAR(fit.fwhm_hz, 20.0, 20.0 * 1e-6);
  EXPECT_NEAR(fit.amplitude, 1.0, 1e-6);
  EXPECT_LT(fit.residual, 1e-9);
}

TEST(Fit, recovers_exact_gaussian) {
  const auto s = synthetic(LineShape::gaussian, -41.7, 12.0, -200.0, 200.0, 0.5);
  const auto fit = fit_gaussian(s, 81);
  EXPECT_NEAR(fit.center_hz, -41.7, 41.7 * 1e-6);
  EXPECT_NEAR(fit.fwhm_hz, 12.0, 12.0 * 1e-6);
  EXPECT_EQ(fit.shape, LineShape::gaussian);
}

TEST(Fit, noisy_lorentzian_centre_within_twentieth_of_width) {
  const double f0 = 100.3, gamma = 20.0;
  const auto clean_spec = synthetic(LineShape::lorentzian, f0, gamma, 0.0, 400.0, 1.0);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.01);
    auto s = clean_spec;
    for (auto& m : s.magnitudes) m += g(rng);
    const auto fit = fit_lorentzian(s, 81);
    ASSERT_NEAR(fit.center_hz, f0, gamma / 20.0) << "seed " << seed;
  }
}

TEST(Fit, width_grows_as_collective_t2_shrinks) {
  double previous = 0.0;
  for (double t2c : {1.0, 0.3, 0.1}) {
    SpinSystem sys = presets::hexafluorophosphate();
    sys.t2_collective = t2c;
    sys.t2_independent = 1e6;
    sys.t2_central = 1e6;
    EncodingConfig c;
    c.t_max = 0.053;
    const auto fit = fit_lorentzian(time_series_transform(run_protocol(sys, c), 6, 8), 17);
    EXPECT_GT(fit.fwhm_hz, previous) << "t2c " << t2c;
    previous = fit.fwhm_hz;
  }
}

TEST(Fit, refit_of_own_model_is_self_consistent) {
  EncodingConfig c;
  c.t_max = 0.02;
  const auto spec = time_series_transform(run_protocol(presets::hexafluorophosphate(), c), 6, 8);
  const auto first = fit_lorentzian(spec, 17);
  auto model = spec;
  for (std::size_t i = 0; i < model.frequencies.size(); ++i)
    model.magnitudes[i] =
        line_model(LineShape::lorentzian, model.frequencies[i], first.center_hz, first.fwhm_hz, first.amplitude);
  const auto second = fit_lorentzian(model, 17);
  EXPECT_NEAR(second.center_hz, first.center_hz, 1e-9 * std::abs(first.center_hz));
  EXPECT_NEAR(second.fwhm_hz, first.fwhm_hz, 1e-9 * first.fwhm_hz);
  EXPECT_NEAR(second.amplitude, first.amplitude, 1e-9 * first.amplitude);
}

TEST(Fit, equal_maxima_pick_smaller_frequency) {
  FieldSpectrum s;
  s.bin_width = 1.0;
  for (int f = -100; f <= 100; ++f) {
    s.frequencies.push_back(f);
    s.magnitudes.push_back(line_model(LineShape::lorentzian, f, -50, 6, 1) +
                           line_model(LineShape::lorentzian, f, 30, 6, 1));
  }
  EXPECT_EQ(s.frequencies[detail::peak_index(s)], 30.0);
  EXPECT_NEAR(fit_lorentzian(s, 17).center_hz, 30.0, 0.1);
}

TEST(Fit, flat_spectrum_raises_fit_error) {
  FieldSpectrum s;
  s.bin_width = 1.0;
  for (int f = 0; f < 64; ++f) s.frequencies.push_back(f), s.magnitudes.push_back(0.5);
  try {
    fit_lorentzian(s, 17);
    FAIL() << "expected FitError";
  } catch (const FitError& e) {
    EXPECT_EQ(e.best_residual(), 0.0);
  }
}

TEST(Fit, clipped_window_raises_fit_error) {
  FieldSpectrum s;
  s.bin_width = 1.0;
  for (int f = 0; f < 64; ++f) s.frequencies.push_back(f), s.magnitudes.push_back(1.0 / (1 + f));
  EXPECT_THROW(fit_lorentzian(s, 5), FitError);
}

TEST(Fit, rejects_tiny_window) {
  const auto s = synthetic(LineShape::lorentzian, 0.0, 10.0, -50.0, 50.0, 1.0);
  EXPECT_THROW(fit_lorentzian(s, 4), std::domain_error);
}

TEST(LineShapeNames, round_trip) {
  EXPECT_EQ(line_shape_from_string(to_string(LineShape::gaussian)), LineShape::gaussian);
  EXPECT_EQ(line_shape_from_string("lorentzian"), LineShape::lorentzian);
  EXPECT_THROW(line_shape_from_string("voigt"), std::invalid_argument);
}

TEST(EstimateField, converts_line_frequency_to_field) {
  const auto pf6 = presets::hexafluorophosphate();
  LineFit f;
  f.center_hz = 2818.8;
  f.fwhm_hz = 600.0;
  auto e = estimate_field(f, 6, pf6);
  EXPECT_NEAR(e.delta_hat, 11.73e-6, 11.73e-6 * 1e-3);
  EXPECT_NEAR(e.delta_err, two_pi * 600.0 / (6 * pf6.gamma_satellite), 1e-18);
  f.center_hz = 469.8;
  EXPECT_NEAR(estimate_field(f, 1, pf6).delta_hat, 11.73e-6, 11.73e-6 * 1e-3);
  f.center_hz = 0.0;
  EXPECT_EQ(estimate_field(f, 6, pf6).delta_hat, 0.0);
  EXPECT_THROW(estimate_field(f, 0, pf6), std::domain_error);
}

TEST(AdvantageRatio, examples_and_errors) {
  FieldEstimate c{1, 0, 0, 0, 2e-6}, q{6, 0, 0, 0, 2e-6};
  EXPECT_DOUBLE_EQ(advantage_ratio(c, q), 1.0);
  q.delta_err = 0.5e-6;
  EXPECT_DOUBLE_EQ(advantage_ratio(c, q), 4.0);
  q.delta_err = 0.0;
  EXPECT_THROW(advantage_ratio(c, q), std::domain_error);
  q.delta_err = 1e-6;
  c.l = 2;
  EXPECT_THROW(advantage_ratio(c, q), std::domain_error);
}

TEST(Pipeline, clean_runs_recover_field_and_heisenberg_ratio) {
  for (const auto& sys : {presets::tmp(), presets::hexafluorophosphate()}) {
    const auto lines = analyze_series(run_protocol(sys, clean(2e-3)), sys);
    const auto r = advantage_ratios(lines);
    for (const auto& a : lines) {
      const int l = a.estimate.l;
      const double bin_field = two_pi * a.spectrum.bin_width / (l * sys.gamma_satellite);
      EXPECT_NEAR(a.estimate.delta_hat, 11.73e-6, bin_field) << sys.name << " l=" << l;
      EXPECT_NEAR(r.at(l), l, 0.03 * l) << sys.name << " l=" << l;
    }
  }
}

TEST(Pipeline, decoherence_pulls_noon_ratio_below_order) {
  EncodingConfig c;
  c.t_max = 0.02;
  const auto sys = presets::hexafluorophosphate();
  const auto r = advantage_ratios(analyze_series(run_protocol(sys, c), sys));
  EXPECT_LT(r.at(6), 6.0);
  EXPECT_GT(r.at(6), 1.0);
}

TEST(TimeScan, without_decoherence_ratio_tracks_order) {
  const auto sys = presets::hexafluorophosphate();
  const auto res = time_scan(sys, 11.73e-6, {2e-3, 20e-3}, clean(2e-3));
  ASSERT_EQ(res.rows.size(), 8u);
  for (const auto& row : res.rows) EXPECT_NEAR(row.r, row.l, 0.03 * row.l);
}

TEST(TimeScan, optimum_is_argmax_of_rows) {
  const auto sys = presets::hexafluorophosphate();
  EncodingConfig c;
  const auto res = time_scan(sys, 11.73e-6, {2e-3, 10e-3, 20e-3}, c);
  ASSERT_EQ(res.optima.size(), 4u);
  for (const auto& o : res.optima) {
    double best = -1.0;
    for (const auto& row : res.rows)
      if (row.l == o.l) best = std::max(best, row.r);
    EXPECT_EQ(o.r, best);
  }
}

TEST(TimeScan, single_entry_is_its_own_optimum) {
  const auto sys = presets::hexafluorophosphate();
  const auto res = time_scan(sys, 11.73e-6, {5e-3}, EncodingConfig{});
  for (const auto& o : res.optima) EXPECT_EQ(o.t_max, 5e-3);
}

TEST(TimeScan, empty_grid_is_rejected) {
  EXPECT_THROW(time_scan(presets::tmp(), 11.73e-6, {}, EncodingConfig{}), std::domain_error);
}

TEST(LineSpectrum, outermost_lines_sit_at_half_order_times_coupling) {
  const auto pf6 = presets::hexafluorophosphate();
  const auto ls = synthesize_line_spectrum(pf6, sector_line_amplitudes(pf6), 20.0);
  double outer = 0.0;
  for (const auto& l : ls.lines) outer = std::max(outer, std::abs(l.frequency));
  EXPECT_DOUBLE_EQ(outer, 2121.0);

  const auto tmp = presets::tmp();
  const auto lt = synthesize_line_spectrum(tmp, sector_line_amplitudes(tmp), 0.5);
  outer = 0.0;
  for (const auto& l : lt.lines) outer = std::max(outer, std::abs(l.frequency));
  EXPECT_DOUBLE_EQ(outer, 49.5);
}

TEST(LineSpectrum, single_line_peaks_at_its_frequency) {
  const auto pf6 = presets::hexafluorophosphate();
  const auto ls = synthesize_line_spectrum(pf6, {{2, 1.0}}, 10.0, 8001);
  std::size_t best = 0;
  for (std::size_t i = 0; i < ls.intensities.size(); ++i)
    if (ls.intensities[i] > ls.intensities[best]) best = i;
  EXPECT_NEAR(std::abs(ls.frequencies[best]), 707.0, ls.frequencies[1] - ls.frequencies[0]);
  EXPECT_THROW(synthesize_line_spectrum(pf6, {{2, 1.0}}, 0.0), std::domain_error);
}

TEST(LineSpectrum, sector_amplitudes_follow_binomial_weights) {
  const auto amps = sector_line_amplitudes(presets::hexafluorophosphate());
  ASSERT_EQ(amps.size(), 4u);
  EXPECT_EQ(amps.front().first, 6);
  EXPECT_NEAR(amps.front().second, 1.0 / 64.0, 1e-15);
  EXPECT_EQ(amps.back().first, 0);
  EXPECT_NEAR(amps.back().second, 20.0 / 64.0, 1e-15);
}
