#ifndef NOONSIM_PROTOCOL_HPP
#define NOONSIM_PROTOCOL_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "spin_model.hpp"

namespace noonsim {

struct EncodingConfig {
  double delta = 11.73e-6;  // offset field, T
  double t_max = 2e-3;      // longest encoding time, s
  int n_times = 512;
  bool decoherence_on = true;
  bool encode_central = false;
  std::optional<double> inept_gain;  // unset: gamma_satellite / gamma_central
  double noise_sigma = 0.0;          // per real/imaginary component
  std::uint64_t seed = 0;
  double epsilon = 1e-5;  // thermal polarization per spin

  double gain_for(const SpinSystem& s) const {
    return inept_gain ? *inept_gain : s.gamma_satellite / s.gamma_central;
  }
};

inline void validate(const EncodingConfig& c) {
  if (!(c.t_max > 0.0)) throw std::invalid_argument("t_max must be > 0");
  if (c.n_times < 2) throw std::invalid_argument("n_times must be >= 2");
  if (!(c.noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be >= 0");
  if (!std::isfinite(c.delta)) throw std::invalid_argument("delta must be finite");
  if (!(std::abs(c.epsilon) < 1.0) || c.epsilon == 0.0)
    throw std::invalid_argument("epsilon must be nonzero with |epsilon| < 1");
}

/// Complex amplitude of each resonance line sampled on the encoding-time grid.
/// Amplitudes are in units of the thermal transverse signal of a single bare
/// central spin (epsilon / 4).
struct PeakSeries {
  std::vector<int> l_values;
  std::vector<double> times;
  std::vector<std::vector<cplx>> amplitudes;  // [line][time]

  std::size_t line_index(int l) const {
    for (std::size_t i = 0; i < l_values.size(); ++i)
      if (l_values[i] == l) return i;
    throw std::domain_error("PeakSeries has no line with l = " + std::to_string(l));
  }
  const std::vector<cplx>& line(int l) const { return amplitudes[line_index(l)]; }
  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

/// Uniform grid from 0 to t_max inclusive.
inline std::vector<double> encoding_times(double t_max, int n_times) {
  std::vector<double> t(n_times);
  for (int k = 0; k < n_times; ++k) t[k] = t_max * k / (n_times - 1);
  return t;
}

/// Hadamard on the central spin, identity on the satellite count.
inline CollectiveState hadamard_central(const CollectiveState& in) {
  if (in.complemented())
    throw std::logic_error("hadamard_central: state is in the complemented satellite frame");
  const int n = in.n_satellites();
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(in.dim(), in.dim());
  for (int m = 0; m <= n; ++m) {
    u(in.index(0, m), in.index(0, m)) = r;
    u(in.index(0, m), in.index(1, m)) = r;
    u(in.index(1, m), in.index(0, m)) = r;
    u(in.index(1, m), in.index(1, m)) = -r;
  }
  CollectiveState out = in;
  out.matrix() = u * in.matrix() * u.adjoint();
  return out;
}

/// CNOT from the central spin onto every satellite: |1,m> -> |1,N-m>.
inline CollectiveState collective_cnot(const CollectiveState& in) {
  const int n = in.n_satellites();
  const int d = in.dim();
  std::vector<int> perm(d);
  for (int i = 0; i < d; ++i) {
    const int a = in.central_of(i);
    const int m = in.count_of(i);
    perm[i] = a == 0 ? i : in.index(1, n - m);
  }
  CollectiveState out = in;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out.matrix()(perm[i], perm[j]) = in.matrix()(i, j);
  out.set_complemented(!in.complemented());
  return out;
}

/// Free precession in the offset field for time t, with optional dephasing.
inline CollectiveState encode(const CollectiveState& in, const SpinSystem& sys, const EncodingConfig& cfg,
                              double t) {
  if (!(t >= 0.0)) throw std::domain_error("encode: t must be >= 0");
  const int n = in.n_satellites();
  const int d = in.dim();
  const double sat_rate = sys.gamma_satellite * cfg.delta * t;
  const double cen_rate = cfg.encode_central ? sys.gamma_central * cfg.delta * t : 0.0;
  CollectiveState out = in;
  for (int i = 0; i < d; ++i) {
    const int a = in.central_of(i);
    const int m = in.count_of(i);
    for (int j = 0; j < d; ++j) {
      const int a2 = in.central_of(j);
      const int m2 = in.count_of(j);
      const double phase = sat_rate * (m2 - m) + cen_rate * (a2 - a);
      double factor = 1.0;
      if (cfg.decoherence_on) {
        const int l_eff = std::abs(m - m2);
        const int hamming = (in.complemented() && a != a2) ? n : l_eff;
        const double rate = double(l_eff) * l_eff / sys.t2_collective + double(hamming) / sys.t2_independent +
                            double(std::abs(a - a2)) / sys.t2_central;
        factor = std::exp(-rate * t);
      }
      out.matrix()(i, j) = in.matrix()(i, j) * std::polar(factor, phase);
    }
  }
  return out;
}

/// Central-spin single-quantum coherence per satellite class m, summed over
/// the C(N,m) patterns of the class.
inline std::vector<cplx> central_coherences(const CollectiveState& st) {
  if (st.complemented()) throw std::logic_error("central_coherences: read out only after the closing CNOT");
  const int n = st.n_satellites();
  std::vector<cplx> c(n + 1);
  for (int m = 0; m <= n; ++m) c[m] = st.weight(m) * st(0, m, 1, m);
  return c;
}

/// Positive-frequency line orders of the main species, then l = 1 for the
/// isolated species when it is present and not already covered.
inline std::vector<int> line_orders(const SpinSystem& s) {
  std::vector<int> ls;
  for (int m = 0; 2 * m < s.n_satellites; ++m) ls.push_back(s.n_satellites - 2 * m);
  if (s.isolated_fraction > 0.0 && ls.back() != 1) ls.push_back(1);
  return ls;
}

inline PeakSeries add_noise(const PeakSeries& series, double sigma, std::uint64_t seed);

namespace detail {

/// Per-m line amplitudes for one species across the time grid.
inline std::vector<std::vector<cplx>> species_amplitudes(const SpinSystem& s, const EncodingConfig& cfg,
                                                         const std::vector<double>& times) {
  const CollectiveState prepared = collective_cnot(hadamard_central(thermal_state(s, cfg.epsilon)));
  const double scale = cfg.gain_for(s) / (0.25 * cfg.epsilon);
  std::vector<std::vector<cplx>> out(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    auto c = central_coherences(collective_cnot(encode(prepared, s, cfg, times[k])));
    for (auto& v : c) v *= scale;
    out[k] = std::move(c);
  }
  return out;
}

}  // namespace detail

/// Full circuit: thermal state, Hadamard, CNOT, encoding, CNOT, readout.
inline PeakSeries run_protocol(const SpinSystem& sys, const EncodingConfig& cfg) {
  validate(sys);
  validate(cfg);
  PeakSeries ps;
  ps.l_values = line_orders(sys);
  ps.times = encoding_times(cfg.t_max, cfg.n_times);
  ps.amplitudes.assign(ps.l_values.size(), std::vector<cplx>(ps.times.size()));

  const int n = sys.n_satellites;
  const double f_iso = sys.isolated_fraction;
  const auto main = detail::species_amplitudes(sys, cfg, ps.times);
  std::vector<std::vector<cplx>> iso;
  if (f_iso > 0.0) {
    SpinSystem single = sys;
    single.n_satellites = 1;
    single.isolated_fraction = 0.0;
    iso = detail::species_amplitudes(single, cfg, ps.times);
  }

  for (std::size_t i = 0; i < ps.l_values.size(); ++i) {
    const int l = ps.l_values[i];
    const bool native = (n - l) % 2 == 0 && l <= n;
    const int m = (n - l) / 2;
    for (std::size_t k = 0; k < ps.times.size(); ++k) {
      cplx v = native ? (1.0 - f_iso) * main[k][m] : cplx{};
      if (l == 1 && f_iso > 0.0) v += f_iso * iso[k][0];
      ps.amplitudes[i][k] = v;
    }
  }
  if (cfg.noise_sigma > 0.0) return add_noise(ps, cfg.noise_sigma, cfg.seed);
  return ps;
}

/// Independent complex Gaussian noise, std sigma on each component. Every
/// sample draws from its own stream keyed by (seed, line index, time index).
inline PeakSeries add_noise(const PeakSeries& series, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw std::domain_error("add_noise: sigma must be >= 0");
  PeakSeries out = series;
  if (sigma == 0.0) return out;
  for (std::size_t i = 0; i < out.amplitudes.size(); ++i) {
    for (std::size_t k = 0; k < out.amplitudes[i].size(); ++k) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> normal(0.0, sigma);
      const double re = normal(rng);
      const double im = normal(rng);
      out.amplitudes[i][k] += cplx(re, im);
    }
  }
  return out;
}

}  // namespace noonsim

#endif
