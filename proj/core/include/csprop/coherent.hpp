#pragma once

// Coherent-state labels, complex phase-space points and overlaps.
//
// Conventions used throughout the library:
//   z = (q/b + i p/c) / sqrt(2),  b c = hbar,
//   u = (Q/b + i P/c) / sqrt(2),  v = (Q/b - i P/c) / sqrt(2).
// Every conversion between real labels and complex coordinates goes through
// the functions declared here.

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace csprop {

using cplx = std::complex<double>;

inline constexpr int kMaxDof = 2;

// Complex vector with at most kMaxDof entries; storage is inline.
using PhaseVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, kMaxDof, 1>;
using DofMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDof, kMaxDof>;
using TangentMat =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, 2 * kMaxDof, 2 * kMaxDof>;
using RealVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDof, 1>;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Constants {
  double hbar = 1.0;
  int dof = 1;

  void validate() const;
};

// Real phase-space label of a coherent state, one entry per degree of freedom.
struct CoherentLabel {
  std::vector<double> q;
  std::vector<double> p;
  std::vector<double> b;
  std::vector<double> c;

  int dof() const { return static_cast<int>(q.size()); }

  // Builds a label with c_k = hbar / b_k.
  static CoherentLabel from_widths(std::vector<double> q, std::vector<double> p,
                                   std::vector<double> b, double hbar);

  // Throws ConfigError unless sizes agree, widths are positive and
  // b_k c_k = hbar to 1e-12 relative.
  void validate(double hbar) const;
};

struct ComplexPhasePoint {
  PhaseVec u;
  PhaseVec v;

  int dof() const { return static_cast<int>(u.size()); }
};

PhaseVec label_to_z(const CoherentLabel& label, double hbar);
// v = conj(z) of the label, i.e. (q/b - i p/c)/sqrt(2).
PhaseVec label_to_zbar(const CoherentLabel& label, double hbar);

// Inverse map: real (q, p) recovered from z for the widths carried by `like`.
CoherentLabel z_to_label(const PhaseVec& z, const CoherentLabel& like);

// Phase-space point of a real (q, p); v = conj(u).
ComplexPhasePoint real_point(const CoherentLabel& label, double hbar);

// Complex (Q, P) of a complex phase-space point.
void point_to_qp(const ComplexPhasePoint& x, const std::vector<double>& b,
                 const std::vector<double>& c, PhaseVec& Q, PhaseVec& P);
ComplexPhasePoint qp_to_point(const PhaseVec& Q, const PhaseVec& P,
                              const std::vector<double>& b, const std::vector<double>& c);

// <z1|z2> for normalized coherent states.
cplx overlap_normalized(const PhaseVec& z1, const PhaseVec& z2);
// (z1|z2) = exp(conj(z1) . z2) for Bargmann states.
cplx overlap_bargmann(const PhaseVec& z1, const PhaseVec& z2);
// K = k exp(-|z1|^2/2 - |z2|^2/2).
cplx normalize_propagator(cplx k, const PhaseVec& z1, const PhaseVec& z2);

}  // namespace csprop
