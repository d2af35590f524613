#ifndef NOONSIM_SPIN_MODEL_HPP
#define NOONSIM_SPIN_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "constants.hpp"

namespace noonsim {

using cplx = std::complex<double>;

/// Static description of an AX_N star-topology molecule: one central spin A
/// J-coupled to N magnetically equivalent satellites X.
struct SpinSystem {
  std::string name;
  int n_satellites = 1;
  double gamma_central = gamma::phosphorus;  // rad/s/T
  double gamma_satellite = gamma::hydrogen;  // rad/s/T
  double j_coupling = 1.0;                   // Hz
  double t2_collective = 1.0;                // s, rate contribution l^2 / t2_collective
  double t2_independent = 1.0;               // s, rate contribution d / t2_independent
  double t2_central = 1.0;                   // s
  double isolated_fraction = 0.0;            // satellites in uncoupled molecules
};

inline void validate(const SpinSystem& s) {
  if (s.n_satellites < 1) throw std::invalid_argument("n_satellites must be >= 1");
  if (s.gamma_central == 0.0 || s.gamma_satellite == 0.0)
    throw std::invalid_argument("gyromagnetic ratios must be nonzero");
  if (!(s.j_coupling > 0.0)) throw std::invalid_argument("j_coupling must be > 0");
  if (!(s.t2_collective > 0.0) || !(s.t2_independent > 0.0) || !(s.t2_central > 0.0))
    throw std::invalid_argument("relaxation time constants must be > 0");
  if (!(s.isolated_fraction >= 0.0 && s.isolated_fraction <= 1.0))
    throw std::invalid_argument("isolated_fraction must lie in [0, 1]");
}

namespace presets {

// The collective constant is scaled by N^2 so that the NOON coherence (l = N)
// dephases with a 60 ms collective time.
inline constexpr double noon_collective_t2 = 0.060;

/// Trimethylphosphite: 31P centre, nine equivalent protons.
inline SpinSystem tmp() {
  SpinSystem s;
  s.name = "TMP";
  s.n_satellites = 9;
  s.gamma_central = gamma::phosphorus;
  s.gamma_satellite = gamma::hydrogen;
  s.j_coupling = 11.0;
  s.t2_collective = 81.0 * noon_collective_t2;
  s.t2_independent = 1.0;
  s.t2_central = 0.3;
  s.isolated_fraction = 0.2;
  return s;
}

/// Hexafluorophosphate: 31P centre, six equivalent fluorines.
inline SpinSystem hexafluorophosphate() {
  SpinSystem s;
  s.name = "hexafluorophosphate";
  s.n_satellites = 6;
  s.gamma_central = gamma::phosphorus;
  s.gamma_satellite = gamma::fluorine;
  s.j_coupling = 707.0;
  s.t2_collective = 36.0 * noon_collective_t2;
  s.t2_independent = 1.0;
  s.t2_central = 0.3;
  s.isolated_fraction = 0.5;
  return s;
}

/// Accepts "tmp" or "pf6"/"hexafluorophosphate".
inline SpinSystem by_name(const std::string& key) {
  if (key == "tmp" || key == "TMP") return tmp();
  if (key == "pf6" || key == "hexafluorophosphate") return hexafluorophosphate();
  throw std::invalid_argument("unknown preset '" + key + "' (expected tmp or pf6)");
}

}  // namespace presets

/// Binomial coefficient C(n, m), exact for n <= 64.
inline std::uint64_t sector_multiplicity(int n, int m) {
  if (n < 0 || n > 64) throw std::domain_error("sector_multiplicity: n must lie in [0, 64]");
  if (m < 0 || m > n) throw std::domain_error("sector_multiplicity: m must lie in [0, n]");
  m = std::min(m, n - m);
  std::uint64_t c = 1;
  for (int i = 1; i <= m; ++i) {
    // c * (n - m + i) is divisible by i; split to stay inside 64 bits.
    const std::uint64_t num = static_cast<std::uint64_t>(n - m + i);
    const std::uint64_t g = std::gcd(c, static_cast<std::uint64_t>(i));
    c = (c / g) * (num / (static_cast<std::uint64_t>(i) / g));
  }
  return c;
}

/// Coherence order of the satellite sector with m satellites in |1>.
inline int coherence_order(int n, int m) { return std::abs(n - 2 * m); }

struct SectorEntry {
  int m = 0;
  int l = 0;
  double weight = 0.0;
  double line_frequency = 0.0;  // Hz, (N - 2m) J / 2
};

struct SectorWeights {
  std::vector<SectorEntry> entries;
};

/// Binomial sector weights C(N,m)/2^N and central-spin line positions.
inline SectorWeights sector_weights(const SpinSystem& s) {
  validate(s);
  const int n = s.n_satellites;
  SectorWeights w;
  const double norm = std::ldexp(1.0, -n);
  for (int m = 0; m <= n; ++m) {
    SectorEntry e;
    e.m = m;
    e.l = coherence_order(n, m);
    e.weight = static_cast<double>(sector_multiplicity(n, m)) * norm;
    e.line_frequency = 0.5 * (n - 2 * m) * s.j_coupling;
    w.entries.push_back(e);
  }
  return w;
}

/// Density operator of an AX_N ensemble in the permutation-collective basis
/// (a, m): a is the central-spin state, m the number of satellites in |1>.
///
/// Entry ((a,m),(a',m')) is the density-operator element between one pair of
/// pattern representatives; each class carries C(N,m) patterns. When
/// `complemented` is set, the satellite pattern paired with central |1> is the
/// bitwise complement of the one paired with central |0>, which is the frame a
/// collective CNOT produces.
class CollectiveState {
 public:
  CollectiveState() = default;

  explicit CollectiveState(int n_satellites)
      : n_(n_satellites),
        matrix_(Eigen::MatrixXcd::Zero(2 * (n_satellites + 1), 2 * (n_satellites + 1))),
        weights_(n_satellites + 1) {
    if (n_satellites < 1 || n_satellites > 64)
      throw std::domain_error("CollectiveState: n_satellites must lie in [1, 64]");
    for (int m = 0; m <= n_; ++m) weights_[m] = static_cast<double>(sector_multiplicity(n_, m));
  }

  int n_satellites() const { return n_; }
  int dim() const { return 2 * (n_ + 1); }
  int index(int a, int m) const { return a * (n_ + 1) + m; }
  int central_of(int idx) const { return idx / (n_ + 1); }
  int count_of(int idx) const { return idx % (n_ + 1); }

  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  Eigen::MatrixXcd& matrix() { return matrix_; }
  cplx operator()(int a, int m, int a2, int m2) const { return matrix_(index(a, m), index(a2, m2)); }
  cplx& operator()(int a, int m, int a2, int m2) { return matrix_(index(a, m), index(a2, m2)); }

  const std::vector<double>& weights() const { return weights_; }
  double weight(int m) const { return weights_[m]; }

  bool complemented() const { return complemented_; }
  void set_complemented(bool c) { complemented_ = c; }

  double weighted_trace() const {
    double tr = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int m = 0; m <= n_; ++m) tr += weights_[m] * matrix_(index(a, m), index(a, m)).real();
    return tr;
  }

  double hermiticity_error() const { return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff(); }

  Eigen::VectorXd eigenvalues() const {
    const Eigen::MatrixXcd h = 0.5 * (matrix_ + matrix_.adjoint());
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(h, Eigen::EigenvaluesOnly).eigenvalues();
  }

  /// Throws std::logic_error when any density-operator invariant is broken.
  void check_invariants(double herm_tol = 1e-12, double trace_tol = 1e-10, double psd_tol = -1e-10) const {
    if (hermiticity_error() > herm_tol) throw std::logic_error("CollectiveState is not Hermitian");
    if (std::abs(weighted_trace() - 1.0) > trace_tol)
      throw std::logic_error("CollectiveState weighted trace differs from 1");
    if (eigenvalues().minCoeff() < psd_tol) throw std::logic_error("CollectiveState is not positive semidefinite");
  }

 private:
  int n_ = 0;
  Eigen::MatrixXcd matrix_;
  std::vector<double> weights_;
  bool complemented_ = false;
};

/// High-temperature equilibrium state. Every spin carries the linearised
/// Boltzmann factor (1 +/- epsilon/2)/2, |0> being the lower level.
inline CollectiveState thermal_state(const SpinSystem& s, double epsilon) {
  validate(s);
  if (!(std::abs(epsilon) < 1.0)) throw std::domain_error("thermal_state: |epsilon| must be < 1");
  const int n = s.n_satellites;
  CollectiveState st(n);
  const double up = 0.5 * (1.0 + 0.5 * epsilon);
  const double down = 0.5 * (1.0 - 0.5 * epsilon);
  for (int a = 0; a < 2; ++a) {
    const double central = a == 0 ? up : down;
    for (int m = 0; m <= n; ++m) {
      st(a, m, a, m) = central * std::pow(up, n - m) * std::pow(down, m);
    }
  }
  return st;
}

}  // namespace noonsim

#endif
