#pragma once

// Exact coherent-state propagator <z''| exp(-i H T / hbar) |z'>.
//
// FockEngine1D diagonalizes H in the harmonic-oscillator basis whose width
// matches the coherent states. GridEngine evolves the position-space
// wavefunction with a Strang-split Fourier method (one or two dimensions).

#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "csprop/coherent.hpp"
#include "csprop/systems.hpp"

namespace csprop {

class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, int suggested_n_max = 0)
      : std::runtime_error(what), suggested_(suggested_n_max) {}
  int suggested_n_max() const { return suggested_; }

 private:
  int suggested_;
};

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FockEngine1D {
 public:
  FockEngine1D(std::shared_ptr<const PolynomialSystem> system, int n_max);

  int n_max() const { return n_max_; }
  const Eigen::VectorXd& eigenvalues() const { return energies_; }
  const Eigen::MatrixXcd& eigenvectors() const { return vectors_; }

  // K(T) for normalized coherent states.
  cplx propagate(const PhaseVec& z_initial, const PhaseVec& z_final, double T) const;
  std::vector<cplx> propagate(const PhaseVec& z_initial, const PhaseVec& z_final,
                              const std::vector<double>& times) const;

  // Largest eigenvalue shift, among states carrying weight above `weight_tol`
  // in either coherent state, when the basis grows by `extra`. Eigenstates
  // near the truncation edge are never converged, but their rounding-level
  // overlaps (1e-12 and below) move K by far less than the shift suggests.
  double spectrum_shift(const PhaseVec& z_initial, const PhaseVec& z_final, int extra = 20,
                        double weight_tol = 1e-10) const;

  // Throws AccuracyError when spectrum_shift exceeds `tol`.
  void require_converged(const PhaseVec& z_initial, const PhaseVec& z_final,
                         double tol = 1e-10) const;

  // <n|z> = exp(-|z|^2/2) z^n / sqrt(n!) for n = 0..n_max.
  static Eigen::VectorXcd fock_amplitudes(cplx z, int n_max);

 private:
  std::shared_ptr<const PolynomialSystem> system_;
  int n_max_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXcd vectors_;
};

cplx exact_k_fock(const FockEngine1D& engine, const PhaseVec& z_initial, const PhaseVec& z_final,
                  double T);

class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridSpec {
  // One entry per degree of freedom.
  std::vector<double> lo, hi;
  std::vector<int> points;
  double dt = 5e-4;
  // coherent_wavefunction requires >= 8 points per width and a box covering
  // q +- 8b; coarse smoke grids switch this off and rely on the diagnostics.
  bool enforce_resolution = true;
};

struct GridDiagnostics {
  double max_norm_drift = 0.0;
  // Largest |psi|^2 on the box edges relative to the peak, over the evolution.
  double max_edge_density = 0.0;
};

class GridEngine {
 public:
  GridEngine(std::shared_ptr<const PolynomialSystem> system, GridSpec spec);
  ~GridEngine();
  GridEngine(const GridEngine&) = delete;
  GridEngine& operator=(const GridEngine&) = delete;

  int dof() const { return static_cast<int>(spec_.points.size()); }
  std::size_t size() const { return size_; }
  double cell_volume() const { return cell_; }
  const GridSpec& spec() const { return spec_; }
  double coordinate(int axis, int index) const;

  std::vector<cplx> coherent_wavefunction(const CoherentLabel& label) const;
  // Discrete <a|b> = sum conj(a) b dV.
  cplx overlap(const std::vector<cplx>& a, const std::vector<cplx>& b) const;
  double norm(const std::vector<cplx>& psi) const;

  // K at each of the (ascending) times from one evolution of |z'>.
  std::vector<cplx> sweep(const CoherentLabel& initial, const CoherentLabel& final_label,
                          const std::vector<double>& times, GridDiagnostics* diag = nullptr) const;

  // Evolves psi in place by `steps` Strang steps of size `dt`.
  void evolve(std::vector<cplx>& psi, double dt, long steps) const;

  // Throws DomainError when drift or edge density exceed the tolerances.
  static void check(const GridDiagnostics& d, double norm_tol = 1e-8, double edge_tol = 1e-10);

 private:
  struct Plans;
  std::shared_ptr<const PolynomialSystem> system_;
  GridSpec spec_;
  std::size_t size_ = 0;
  double cell_ = 1.0;
  std::vector<double> potential_;
  std::vector<double> k2_;  // |k|^2 / 2 per grid point
  std::unique_ptr<Plans> plans_;
};

using GridEngine2D = GridEngine;

cplx exact_k_grid(const GridEngine& engine, const CoherentLabel& initial,
                  const CoherentLabel& final_label, double T);

}  // namespace csprop
