#include "csprop/coherent.hpp"

#include <cmath>

namespace csprop {

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

void Constants::validate() const {
  if (!(hbar > 0.0)) throw ConfigError("hbar must be positive");
  if (dof < 1 || dof > kMaxDof) throw ConfigError("dof must be 1 or 2");
}

CoherentLabel CoherentLabel::from_widths(std::vector<double> q, std::vector<double> p,
                                         std::vector<double> b, double hbar) {
  CoherentLabel l;
  l.c.reserve(b.size());
  for (double bk : b) l.c.push_back(hbar / bk);
  l.q = std::move(q);
  l.p = std::move(p);
  l.b = std::move(b);
  return l;
}

void CoherentLabel::validate(double hbar) const {
  const auto n = q.size();
  if (n == 0 || n > static_cast<std::size_t>(kMaxDof))
    throw ConfigError("label must have 1 or 2 degrees of freedom");
  if (p.size() != n || b.size() != n || c.size() != n)
    throw ConfigError("label fields q, p, b, c must have equal length");
  for (std::size_t k = 0; k < n; ++k) {
    if (!(b[k] > 0.0) || !(c[k] > 0.0)) throw ConfigError("label widths must be positive");
    if (std::abs(b[k] * c[k] - hbar) > 1e-12 * hbar)
      throw ConfigError("label widths violate b*c = hbar");
  }
}

PhaseVec label_to_z(const CoherentLabel& label, double hbar) {
  label.validate(hbar);
  const int n = label.dof();
  PhaseVec z(n);
  for (int k = 0; k < n; ++k) z[k] = cplx(label.q[k] / label.b[k], label.p[k] / label.c[k]) / kSqrt2;
  return z;
}

PhaseVec label_to_zbar(const CoherentLabel& label, double hbar) {
  return label_to_z(label, hbar).conjugate();
}

CoherentLabel z_to_label(const PhaseVec& z, const CoherentLabel& like) {
  CoherentLabel out = like;
  for (int k = 0; k < z.size(); ++k) {
    out.q[k] = kSqrt2 * like.b[k] * z[k].real();
    out.p[k] = kSqrt2 * like.c[k] * z[k].imag();
  }
  return out;
}

ComplexPhasePoint real_point(const CoherentLabel& label, double hbar) {
  ComplexPhasePoint x;
  x.u = label_to_z(label, hbar);
  x.v = x.u.conjugate();
  return x;
}

void point_to_qp(const ComplexPhasePoint& x, const std::vector<double>& b,
                 const std::vector<double>& c, PhaseVec& Q, PhaseVec& P) {
  const int n = x.dof();
  Q.resize(n);
  P.resize(n);
  for (int k = 0; k < n; ++k) {
    Q[k] = b[k] * (x.u[k] + x.v[k]) / kSqrt2;
    P[k] = c[k] * (x.u[k] - x.v[k]) / cplx(0.0, kSqrt2);
  }
}

ComplexPhasePoint qp_to_point(const PhaseVec& Q, const PhaseVec& P,
                              const std::vector<double>& b, const std::vector<double>& c) {
  const int n = static_cast<int>(Q.size());
  ComplexPhasePoint x;
  x.u.resize(n);
  x.v.resize(n);
  const cplx i(0.0, 1.0);
  for (int k = 0; k < n; ++k) {
    x.u[k] = (Q[k] / b[k] + i * P[k] / c[k]) / kSqrt2;
    x.v[k] = (Q[k] / b[k] - i * P[k] / c[k]) / kSqrt2;
  }
  return x;
}

cplx overlap_normalized(const PhaseVec& z1, const PhaseVec& z2) {
  if (z1.size() != z2.size()) throw std::invalid_argument("overlap: dimension mismatch");
  cplx e = -0.5 * z1.squaredNorm() - 0.5 * z2.squaredNorm();
  for (int k = 0; k < z1.size(); ++k) e += std::conj(z1[k]) * z2[k];
  return std::exp(e);
}

cplx overlap_bargmann(const PhaseVec& z1, const PhaseVec& z2) {
  if (z1.size() != z2.size()) throw std::invalid_argument("overlap: dimension mismatch");
  cplx e = 0.0;
  for (int k = 0; k < z1.size(); ++k) e += std::conj(z1[k]) * z2[k];
  return std::exp(e);
}

cplx normalize_propagator(cplx k, const PhaseVec& z1, const PhaseVec& z2) {
  return k * std::exp(-0.5 * z1.squaredNorm() - 0.5 * z2.squaredNorm());
}

}  // namespace csprop
