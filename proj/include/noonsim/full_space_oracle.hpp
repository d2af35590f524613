#ifndef NOONSIM_FULL_SPACE_ORACLE_HPP
#define NOONSIM_FULL_SPACE_ORACLE_HPP

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "protocol.hpp"
#include "spin_model.hpp"

namespace noonsim {

/// Uncompressed 2^(N+1) density matrix of an AX_N molecule, for validating the
/// collective representation. Basis index = a * 2^N + p, where bit j of p is
/// the state of satellite j and a is the central spin.
class FullSpaceOracle {
 public:
  static constexpr int max_satellites = 6;

  FullSpaceOracle(const SpinSystem& sys, double epsilon) : sys_(sys) {
    validate(sys);
    if (sys.n_satellites > max_satellites)
      throw std::domain_error("full_space_oracle: N = " + std::to_string(sys.n_satellites) +
                              " exceeds 6; the dense 2^(N+1) matrix is only built for small systems");
    if (!(std::abs(epsilon) < 1.0)) throw std::domain_error("full_space_oracle: |epsilon| must be < 1");
    n_ = sys.n_satellites;
    dim_ = 1 << (n_ + 1);
    rho_ = Eigen::MatrixXcd::Zero(dim_, dim_);
    const double up = 0.5 * (1.0 + 0.5 * epsilon);
    const double down = 0.5 * (1.0 - 0.5 * epsilon);
    for (int x = 0; x < dim_; ++x) {
      double p = 1.0;
      for (int b = 0; b <= n_; ++b) p *= ((x >> b) & 1) ? down : up;
      rho_(x, x) = p;
    }
  }

  int dim() const { return dim_; }
  const Eigen::MatrixXcd& density() const { return rho_; }

  void hadamard_central() {
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(dim_, dim_);
    const int bit = 1 << n_;
    for (int x = 0; x < dim_; ++x) {
      const int a = (x & bit) ? 1 : 0;
      u(x, x) = a ? -r : r;
      u(x ^ bit, x) = r;
    }
    rho_ = u * rho_ * u.adjoint();
  }

  /// One CNOT per satellite, all controlled by the central spin.
  void cnot_all() {
    for (int j = 0; j < n_; ++j) {
      Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(dim_, dim_);
      for (int x = 0; x < dim_; ++x) {
        const int y = (x >> n_) & 1 ? x ^ (1 << j) : x;
        u(y, x) = 1.0;
      }
      rho_ = u * rho_ * u.adjoint();
    }
  }

  void encode(const EncodingConfig& cfg, double t) {
    const int mask = (1 << n_) - 1;
    for (int x = 0; x < dim_; ++x) {
      for (int y = 0; y < dim_; ++y) {
        const int px = x & mask, py = y & mask;
        const int ax = x >> n_, ay = y >> n_;
        const int mx = std::popcount(static_cast<unsigned>(px));
        const int my = std::popcount(static_cast<unsigned>(py));
        double phase = sys_.gamma_satellite * cfg.delta * t * (my - mx);
        if (cfg.encode_central) phase += sys_.gamma_central * cfg.delta * t * (ay - ax);
        double amp = 1.0;
        if (cfg.decoherence_on) {
          const double dm = mx - my;
          const int hamming = std::popcount(static_cast<unsigned>(px ^ py));
          amp = std::exp(-t * (dm * dm / sys_.t2_collective + hamming / sys_.t2_independent +
                               std::abs(ax - ay) / sys_.t2_central));
        }
        rho_(x, y) *= std::polar(amp, phase);
      }
    }
  }

  /// Sum over satellite patterns with m ones of <0,p|rho|1,p>.
  std::vector<cplx> central_coherences() const {
    std::vector<cplx> c(n_ + 1);
    for (int p = 0; p < (1 << n_); ++p)
      c[std::popcount(static_cast<unsigned>(p))] += rho_(p, p | (1 << n_));
    return c;
  }

 private:
  SpinSystem sys_;
  int n_ = 0;
  int dim_ = 0;
  Eigen::MatrixXcd rho_;
};

inline FullSpaceOracle full_space_oracle(const SpinSystem& sys, double epsilon) {
  return FullSpaceOracle(sys, epsilon);
}

/// Brute-force counterpart of run_protocol (no noise), line by line.
inline PeakSeries oracle_run_protocol(const SpinSystem& sys, const EncodingConfig& cfg) {
  auto species = [&](const SpinSystem& s) {
    const auto times = encoding_times(cfg.t_max, cfg.n_times);
    std::vector<std::vector<cplx>> per_time;
    const double scale = cfg.gain_for(s) / (0.25 * cfg.epsilon);
    for (double t : times) {
      FullSpaceOracle o(s, cfg.epsilon);
      o.hadamard_central();
      o.cnot_all();
      o.encode(cfg, t);
      o.cnot_all();
      auto c = o.central_coherences();
      for (auto& v : c) v *= scale;
      per_time.push_back(std::move(c));
    }
    return per_time;
  };

  PeakSeries ps;
  ps.times = encoding_times(cfg.t_max, cfg.n_times);
  const int n = sys.n_satellites;
  const auto main = species(sys);
  SpinSystem single = sys;
  single.n_satellites = 1;
  single.isolated_fraction = 0.0;
  const auto iso = species(single);
  for (int l = n; l > 0; l -= 2) ps.l_values.push_back(l);
  if (sys.isolated_fraction > 0.0 && n % 2 == 0) ps.l_values.push_back(1);
  for (int l : ps.l_values) {
    std::vector<cplx> line(ps.times.size());
    for (std::size_t k = 0; k < ps.times.size(); ++k) {
      if ((n - l) % 2 == 0) line[k] = (1.0 - sys.isolated_fraction) * main[k][(n - l) / 2];
      if (l == 1) line[k] += sys.isolated_fraction * iso[k][0];
    }
    ps.amplitudes.push_back(std::move(line));
  }
  return ps;
}

}  // namespace noonsim

#endif
