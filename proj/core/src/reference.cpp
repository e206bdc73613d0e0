#include "csprop/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <fftw3.h>

namespace csprop {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

Eigen::MatrixXcd fock_hamiltonian(const PolynomialSystem& sys, int n_max) {
  if (sys.dof() != 1) throw std::invalid_argument("Fock engine handles one degree of freedom");
  const int deg = std::max(1, sys.max_degree());
  // Padding keeps the truncated matrix equal to the projection of the full operator.
  const int dim = n_max + 1 + deg;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
  for (int m = 1; m < dim; ++m) a(m - 1, m) = std::sqrt(double(m));
  const Eigen::MatrixXcd ad = a.adjoint();
  const Eigen::MatrixXcd Q = (sys.b()[0] / kSqrt2) * (a + ad);
  const Eigen::MatrixXcd P = (sys.c()[0] / cplx(0.0, kSqrt2)) * (a - ad);

  std::vector<Eigen::MatrixXcd> qp(deg + 1), pp(deg + 1);
  qp[0] = pp[0] = Eigen::MatrixXcd::Identity(dim, dim);
  for (int e = 1; e <= deg; ++e) {
    qp[e] = qp[e - 1] * Q;
    pp[e] = pp[e - 1] * P;
  }
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : sys.terms()) {
    if (t.qpow[0] && t.ppow[0]) throw std::invalid_argument("mixed Q P monomials unsupported");
    H += t.coef * (t.ppow[0] ? pp[t.ppow[0]] : qp[t.qpow[0]]);
  }
  Eigen::MatrixXcd Hn = H.topLeftCorner(n_max + 1, n_max + 1);
  return 0.5 * (Hn + Hn.adjoint());
}

}  // namespace

FockEngine1D::FockEngine1D(std::shared_ptr<const PolynomialSystem> system, int n_max)
    : system_(std::move(system)), n_max_(n_max) {
  if (n_max_ < 2) throw std::invalid_argument("n_max must be at least 2");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(fock_hamiltonian(*system_, n_max_));
  if (es.info() != Eigen::Success) throw std::runtime_error("Fock diagonalization failed");
  energies_ = es.eigenvalues();
  vectors_ = es.eigenvectors();
}

Eigen::VectorXcd FockEngine1D::fock_amplitudes(cplx z, int n_max) {
  Eigen::VectorXcd c(n_max + 1);
  c[0] = std::exp(-0.5 * std::norm(z));
  for (int m = 1; m <= n_max; ++m) c[m] = c[m - 1] * z / std::sqrt(double(m));
  return c;
}

std::vector<cplx> FockEngine1D::propagate(const PhaseVec& z_initial, const PhaseVec& z_final,
                                          const std::vector<double>& times) const {
  if (z_initial.size() != 1 || z_final.size() != 1)
    throw std::invalid_argument("Fock engine handles one degree of freedom");
  const Eigen::VectorXcd ci = vectors_.adjoint() * fock_amplitudes(z_initial[0], n_max_);
  const Eigen::VectorXcd cf = vectors_.adjoint() * fock_amplitudes(z_final[0], n_max_);
  const double hbar = system_->hbar();
  std::vector<cplx> out;
  out.reserve(times.size());
  for (double T : times) {
    cplx k = 0.0;
    for (int n = 0; n <= n_max_; ++n)
      k += std::conj(cf[n]) * std::polar(1.0, -energies_[n] * T / hbar) * ci[n];
    out.push_back(k);
  }
  return out;
}

cplx FockEngine1D::propagate(const PhaseVec& z_initial, const PhaseVec& z_final,
                             double T) const {
  return propagate(z_initial, z_final, std::vector<double>{T})[0];
}

double FockEngine1D::spectrum_shift(const PhaseVec& z_initial, const PhaseVec& z_final,
                                    int extra, double weight_tol) const {
  FockEngine1D bigger(system_, n_max_ + extra);
  const Eigen::VectorXcd ci = vectors_.adjoint() * fock_amplitudes(z_initial[0], n_max_);
  const Eigen::VectorXcd cf = vectors_.adjoint() * fock_amplitudes(z_final[0], n_max_);
  double shift = 0.0;
  for (int n = 0; n <= n_max_; ++n) {
    if (std::norm(ci[n]) < weight_tol && std::norm(cf[n]) < weight_tol) continue;
    const double e = energies_[n];
    shift = std::max(shift, std::abs(bigger.energies_[n] - e) / std::max(1.0, std::abs(e)));
  }
  // Weight left in the highest basis states also signals truncation.
  const Eigen::VectorXcd ai = fock_amplitudes(z_initial[0], n_max_);
  const Eigen::VectorXcd af = fock_amplitudes(z_final[0], n_max_);
  shift = std::max({shift, std::norm(ai[n_max_]), std::norm(af[n_max_])});
  return shift;
}

void FockEngine1D::require_converged(const PhaseVec& z_initial, const PhaseVec& z_final,
                                     double tol) const {
  const double s = spectrum_shift(z_initial, z_final);
  if (s > tol)
    throw AccuracyError("Fock spectrum not converged (shift " + std::to_string(s) +
                            "); increase n_max",
                        n_max_ + std::max(40, n_max_ / 2));
}

cplx exact_k_fock(const FockEngine1D& engine, const PhaseVec& z_initial, const PhaseVec& z_final,
                  double T) {
  return engine.propagate(z_initial, z_final, T);
}

// ---------------------------------------------------------------------------

struct GridEngine::Plans {
  fftw_complex* buf = nullptr;
  fftw_plan fwd = nullptr, bwd = nullptr;
  ~Plans() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (buf) fftw_free(buf);
  }
};

GridEngine::GridEngine(std::shared_ptr<const PolynomialSystem> system, GridSpec spec)
    : system_(std::move(system)), spec_(std::move(spec)) {
  const int n = system_->dof();
  if (int(spec_.lo.size()) != n || int(spec_.hi.size()) != n || int(spec_.points.size()) != n)
    throw ConfigError("grid dimensions do not match the system");
  if (!(spec_.dt > 0.0)) throw ConfigError("grid time step must be positive");
  if (!system_->unit_mass_kinetic())
    throw ConfigError("grid engine requires kinetic energy sum P_k^2 / 2");
  size_ = 1;
  cell_ = 1.0;
  for (int k = 0; k < n; ++k) {
    if (spec_.points[k] < 4 || !(spec_.hi[k] > spec_.lo[k]))
      throw ConfigError("invalid grid extent");
    size_ *= std::size_t(spec_.points[k]);
    cell_ *= (spec_.hi[k] - spec_.lo[k]) / spec_.points[k];
  }

  const double hbar = system_->hbar();
  potential_.resize(size_);
  k2_.resize(size_);
  std::vector<int> idx(n, 0);
  for (std::size_t flat = 0; flat < size_; ++flat) {
    // Last axis varies fastest (FFTW row-major).
    std::size_t rem = flat;
    for (int k = n - 1; k >= 0; --k) {
      idx[k] = int(rem % spec_.points[k]);
      rem /= spec_.points[k];
    }
    double x[kMaxDof];
    double kin = 0.0;
    for (int k = 0; k < n; ++k) {
      x[k] = coordinate(k, idx[k]);
      const int N = spec_.points[k];
      const int j = idx[k] < (N + 1) / 2 ? idx[k] : idx[k] - N;
      const double kk = 2.0 * std::numbers::pi * j / (spec_.hi[k] - spec_.lo[k]);
      kin += 0.5 * hbar * hbar * kk * kk;
    }
    potential_[flat] = system_->potential(x);
    k2_[flat] = kin;
  }

  plans_ = std::make_unique<Plans>();
  plans_->buf = fftw_alloc_complex(size_);
  std::vector<int> dims(spec_.points.begin(), spec_.points.end());
  plans_->fwd = fftw_plan_dft(n, dims.data(), plans_->buf, plans_->buf, FFTW_FORWARD,
                              FFTW_MEASURE);
  plans_->bwd = fftw_plan_dft(n, dims.data(), plans_->buf, plans_->buf, FFTW_BACKWARD,
                              FFTW_MEASURE);
  if (!plans_->fwd || !plans_->bwd) throw std::runtime_error("FFTW planning failed");
}

GridEngine::~GridEngine() = default;

double GridEngine::coordinate(int axis, int index) const {
  return spec_.lo[axis] + (spec_.hi[axis] - spec_.lo[axis]) * index / spec_.points[axis];
}

std::vector<cplx> GridEngine::coherent_wavefunction(const CoherentLabel& label) const {
  const int n = dof();
  label.validate(system_->hbar());
  if (label.dof() != n) throw ConfigError("label dimension does not match the grid");
  const double hbar = system_->hbar();
  std::vector<std::vector<cplx>> axes(n);
  for (int k = 0; k < n; ++k) {
    const double b = label.b[k], q = label.q[k], p = label.p[k];
    if (spec_.enforce_resolution) {
      const double dx = (spec_.hi[k] - spec_.lo[k]) / spec_.points[k];
      if (dx > b / 8.0)
        throw ResolutionError("grid too coarse on axis " + std::to_string(k) + ": " +
                              std::to_string(b / dx) + " points per width, need 8");
      if (q - 8.0 * b < spec_.lo[k] || q + 8.0 * b > spec_.hi[k])
        throw DomainError("grid does not cover q +- 8b on axis " + std::to_string(k));
    }
    const double pref = std::pow(std::numbers::pi * b * b, -0.25);
    for (int j = 0; j < spec_.points[k]; ++j) {
      const double x = coordinate(k, j);
      axes[k].push_back(pref * std::exp(cplx(-(x - q) * (x - q) / (2.0 * b * b),
                                             p * (x - 0.5 * q) / hbar)));
    }
  }
  std::vector<cplx> psi(size_);
  for (std::size_t flat = 0; flat < size_; ++flat) {
    std::size_t rem = flat;
    cplx val = 1.0;
    for (int k = n - 1; k >= 0; --k) {
      val *= axes[k][rem % spec_.points[k]];
      rem /= spec_.points[k];
    }
    psi[flat] = val;
  }
  return psi;
}

cplx GridEngine::overlap(const std::vector<cplx>& a, const std::vector<cplx>& b) const {
  cplx s = 0.0;
  for (std::size_t i = 0; i < size_; ++i) s += std::conj(a[i]) * b[i];
  return s * cell_;
}

double GridEngine::norm(const std::vector<cplx>& psi) const {
  double s = 0.0;
  for (const cplx& x : psi) s += std::norm(x);
  return s * cell_;
}

void GridEngine::evolve(std::vector<cplx>& psi, double dt, long steps) const {
  if (steps <= 0) return;
  if (psi.size() != size_) throw std::invalid_argument("wavefunction size mismatch");
  const double hbar = system_->hbar();
  const double inv_n = 1.0 / double(size_);
  std::vector<cplx> half(size_), full(size_), kin(size_);
  for (std::size_t i = 0; i < size_; ++i) {
    half[i] = std::polar(1.0, -0.5 * potential_[i] * dt / hbar);
    full[i] = half[i] * half[i];
    kin[i] = std::polar(inv_n, -k2_[i] * dt / hbar);
  }
  auto* buf = reinterpret_cast<cplx*>(plans_->buf);
  for (std::size_t i = 0; i < size_; ++i) buf[i] = psi[i] * half[i];
  for (long s = 0; s < steps; ++s) {
    fftw_execute(plans_->fwd);
    for (std::size_t i = 0; i < size_; ++i) buf[i] *= kin[i];
    fftw_execute(plans_->bwd);
    const auto& pot = s + 1 < steps ? full : half;
    for (std::size_t i = 0; i < size_; ++i) buf[i] *= pot[i];
  }
  std::copy(buf, buf + size_, psi.begin());
}

namespace {

double edge_density(const std::vector<cplx>& psi, const GridSpec& spec) {
  const int n = int(spec.points.size());
  double peak = 0.0, edge = 0.0;
  for (std::size_t flat = 0; flat < psi.size(); ++flat) {
    const double d = std::norm(psi[flat]);
    peak = std::max(peak, d);
    std::size_t rem = flat;
    bool on_edge = false;
    for (int k = n - 1; k >= 0; --k) {
      const int j = int(rem % spec.points[k]);
      rem /= spec.points[k];
      on_edge = on_edge || j == 0 || j == spec.points[k] - 1;
    }
    if (on_edge) edge = std::max(edge, d);
  }
  return peak > 0.0 ? edge / peak : 0.0;
}

}  // namespace

std::vector<cplx> GridEngine::sweep(const CoherentLabel& initial, const CoherentLabel& final_label,
                                    const std::vector<double>& times,
                                    GridDiagnostics* diag) const {
  if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0.0))
    throw std::invalid_argument("sweep times must be ascending and non-negative");
  std::vector<cplx> psi = coherent_wavefunction(initial);
  const std::vector<cplx> target = coherent_wavefunction(final_label);
  const double norm0 = norm(psi);
  GridDiagnostics d;
  d.max_edge_density = edge_density(psi, spec_);
  const double dt = spec_.dt;
  double t = 0.0;
  std::vector<cplx> out;
  out.reserve(times.size());
  for (double tk : times) {
    const long n = long(std::floor((tk - t) / dt + 1e-9));
    // Chunks bound the interval between edge-density checks.
    for (long done = 0; done < n;) {
      const long chunk = std::min<long>(n - done, 200);
      evolve(psi, dt, chunk);
      done += chunk;
      d.max_edge_density = std::max(d.max_edge_density, edge_density(psi, spec_));
    }
    t += n * dt;
    const double rest = tk - t;
    if (rest > 1e-12) {
      std::vector<cplx> tmp = psi;
      evolve(tmp, rest, 1);
      out.push_back(overlap(target, tmp));
    } else {
      out.push_back(overlap(target, psi));
    }
    d.max_norm_drift = std::max(d.max_norm_drift, std::abs(norm(psi) - norm0));
  }
  if (diag) *diag = d;
  return out;
}

void GridEngine::check(const GridDiagnostics& d, double norm_tol, double edge_tol) {
  if (d.max_norm_drift > norm_tol)
    throw DomainError("grid norm drift " + std::to_string(d.max_norm_drift) +
                      " exceeds tolerance");
  if (d.max_edge_density > edge_tol)
    throw DomainError("wavefunction reaches the grid boundary (relative density " +
                      std::to_string(d.max_edge_density) + "); enlarge the box");
}

cplx exact_k_grid(const GridEngine& engine, const CoherentLabel& initial,
                  const CoherentLabel& final_label, double T) {
  std::vector<cplx> psi = engine.coherent_wavefunction(initial);
  const long n = std::max<long>(1, long(std::ceil(T / engine.spec().dt - 1e-9)));
  if (T > 0.0) engine.evolve(psi, T / n, n);
  return engine.overlap(engine.coherent_wavefunction(final_label), psi);
}

}  // namespace csprop
