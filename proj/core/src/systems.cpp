#include "csprop/systems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csprop {

namespace {

const double kSqrt2 = std::sqrt(2.0);

double param_or(const std::map<std::string, double>& params, const std::string& key,
                double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::map<std::string, double>& params,
                    std::initializer_list<const char*> allowed, const std::string& system) {
  for (const auto& [key, value] : params) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown parameter '" + key + "' for system " + system);
  }
}

}  // namespace

SmoothedSystem::SmoothedSystem(std::string name, double hbar, std::vector<double> b,
                               std::map<std::string, double> params)
    : name_(std::move(name)), hbar_(hbar), b_(std::move(b)), params_(std::move(params)) {
  if (!(hbar_ > 0.0)) throw ConfigError("hbar must be positive");
  if (b_.empty() || b_.size() > static_cast<std::size_t>(kMaxDof))
    throw ConfigError("system must have 1 or 2 degrees of freedom");
  for (double bk : b_) {
    if (!(bk > 0.0)) throw ConfigError("widths must be positive");
    c_.push_back(hbar_ / bk);
  }
}

void SmoothedSystem::check_dim(const ComplexPhasePoint& x) const {
  if (x.u.size() != dof() || x.v.size() != dof())
    throw std::invalid_argument("phase point dimension does not match system " + name_);
}

cplx smoothed_moment(int n, cplx x, double s) {
  if (n == 0) return 1.0;
  cplx prev = 1.0, cur = x;
  for (int k = 1; k < n; ++k) {
    cplx next = x * cur + double(k) * s * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

PolynomialSystem::PolynomialSystem(std::string name, double hbar, std::vector<double> b,
                                   std::map<std::string, double> params,
                                   std::vector<Monomial> terms)
    : SmoothedSystem(std::move(name), hbar, std::move(b), std::move(params)),
      terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    int deg = 0;
    for (int k = 0; k < kMaxDof; ++k) {
      if (k >= dof() && (t.qpow[k] != 0 || t.ppow[k] != 0))
        throw std::invalid_argument("monomial uses a degree of freedom the system lacks");
      if (t.qpow[k] != 0 && t.ppow[k] != 0)
        throw std::invalid_argument("monomial mixes Q and P on one degree of freedom");
      deg = std::max({deg, t.qpow[k], t.ppow[k]});
    }
    max_degree_ = std::max(max_degree_, deg);
  }
}

cplx PolynomialSystem::H(const ComplexPhasePoint& x) const {
  check_dim(x);
  const int n = dof();
  PhaseVec Q, P;
  point_to_qp(x, b(), c(), Q, P);
  cplx total = 0.0;
  for (const auto& t : terms_) {
    cplx term = t.coef;
    for (int k = 0; k < n; ++k) {
      if (t.qpow[k]) term *= smoothed_moment(t.qpow[k], Q[k], 0.5 * b()[k] * b()[k]);
      if (t.ppow[k]) term *= smoothed_moment(t.ppow[k], P[k], 0.5 * c()[k] * c()[k]);
    }
    total += term;
  }
  return total;
}

SmoothedDerivs PolynomialSystem::derivatives(const ComplexPhasePoint& x, bool hessian) const {
  check_dim(x);
  const int n = dof();
  const int nv = 2 * n;  // variables y = (Q_1..Q_n, P_1..P_n)
  PhaseVec Q, P;
  point_to_qp(x, b(), c(), Q, P);

  // moments[j][k] = smoothed moment of order k for variable j
  constexpr int kMaxDeg = 8;
  if (max_degree_ > kMaxDeg) throw std::logic_error("polynomial degree too high");
  std::array<std::array<cplx, kMaxDeg + 1>, 2 * kMaxDof> mom{};
  for (int j = 0; j < nv; ++j) {
    const int k = j % n;
    const cplx y = j < n ? Q[k] : P[k];
    const double s = j < n ? 0.5 * b()[k] * b()[k] : 0.5 * c()[k] * c()[k];
    mom[j][0] = 1.0;
    if (max_degree_ >= 1) mom[j][1] = y;
    for (int d = 1; d < max_degree_; ++d) mom[j][d + 1] = y * mom[j][d] + double(d) * s * mom[j][d - 1];
  }

  cplx Hval = 0.0;
  Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, 2 * kMaxDof, 1> gy =
      Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, 2 * kMaxDof, 1>::Zero(nv);
  TangentMat hy = TangentMat::Zero(nv, nv);

  for (const auto& t : terms_) {
    std::array<int, 2 * kMaxDof> pw{};
    for (int k = 0; k < n; ++k) {
      pw[k] = t.qpow[k];
      pw[n + k] = t.ppow[k];
    }
    std::array<cplx, 2 * kMaxDof> f{}, d1{}, d2{};
    for (int j = 0; j < nv; ++j) {
      const int e = pw[j];
      f[j] = mom[j][e];
      d1[j] = e >= 1 ? double(e) * mom[j][e - 1] : cplx(0.0);
      d2[j] = e >= 2 ? double(e) * double(e - 1) * mom[j][e - 2] : cplx(0.0);
    }
    auto prod_except = [&](int a, int b2) {
      cplx r = t.coef;
      for (int j = 0; j < nv; ++j)
        if (j != a && j != b2) r *= f[j];
      return r;
    };
    Hval += prod_except(-1, -1);
    for (int j = 0; j < nv; ++j) {
      if (pw[j] == 0) continue;
      gy[j] += d1[j] * prod_except(j, -1);
      if (!hessian) continue;
      hy(j, j) += d2[j] * prod_except(j, -1);
      for (int l = j + 1; l < nv; ++l) {
        if (pw[l] == 0) continue;
        const cplx v = d1[j] * d1[l] * prod_except(j, l);
        hy(j, l) += v;
        hy(l, j) += v;
      }
    }
  }

  // Chain rule to (u, v): Q_k = a_k (u_k + v_k), P_k = g_k (u_k - v_k).
  TangentMat J = TangentMat::Zero(nv, nv);
  for (int k = 0; k < n; ++k) {
    const cplx a = b()[k] / kSqrt2;
    const cplx g = cplx(0.0, -c()[k] / kSqrt2);
    J(k, k) = a;
    J(k, n + k) = a;
    J(n + k, k) = g;
    J(n + k, n + k) = -g;
  }
  SmoothedDerivs out;
  out.H = Hval;
  const auto guv = (J.transpose() * gy).eval();
  out.Hu = guv.head(n);
  out.Hv = guv.tail(n);
  if (hessian) {
    const TangentMat huv = J.transpose() * hy * J;
    out.Huu = huv.topLeftCorner(n, n);
    out.Huv = huv.topRightCorner(n, n);
    out.Hvv = huv.bottomRightCorner(n, n);
  }
  return out;
}

cplx PolynomialSystem::classical(const PhaseVec& Q, const PhaseVec& P) const {
  cplx total = 0.0;
  for (const auto& t : terms_) {
    cplx term = t.coef;
    for (int k = 0; k < dof(); ++k) term *= std::pow(Q[k], t.qpow[k]) * std::pow(P[k], t.ppow[k]);
    total += term;
  }
  return total;
}

double PolynomialSystem::potential(const double* x) const {
  double total = 0.0;
  for (const auto& t : terms_) {
    bool has_p = false;
    for (int k = 0; k < dof(); ++k) has_p = has_p || t.ppow[k] != 0;
    if (has_p) continue;
    double term = t.coef;
    for (int k = 0; k < dof(); ++k) term *= std::pow(x[k], t.qpow[k]);
    total += term;
  }
  return total;
}

bool PolynomialSystem::unit_mass_kinetic() const {
  std::array<double, kMaxDof> p2{};
  for (const auto& t : terms_) {
    int npow = 0, which = -1;
    bool has_q = false;
    for (int k = 0; k < dof(); ++k) {
      if (t.ppow[k]) {
        ++npow;
        which = k;
      }
      has_q = has_q || t.qpow[k] != 0;
    }
    if (npow == 0) continue;
    if (npow > 1 || has_q || t.ppow[which] != 2) return false;
    p2[which] += t.coef;
  }
  for (int k = 0; k < dof(); ++k)
    if (std::abs(p2[k] - 0.5) > 1e-15) return false;
  return true;
}

FiniteDifferenceSystem::FiniteDifferenceSystem(std::string name, double hbar,
                                               std::vector<double> b, Fn fn, double step)
    : SmoothedSystem(std::move(name), hbar, std::move(b), {}), fn_(std::move(fn)), step_(step) {}

SmoothedDerivs FiniteDifferenceSystem::derivatives(const ComplexPhasePoint& x,
                                                   bool hessian) const {
  check_dim(x);
  const int n = dof();
  const double h = step_;
  auto shifted = [&](int i, cplx di, int j, cplx dj) {
    ComplexPhasePoint y = x;
    auto bump = [&](int idx, cplx d) {
      if (idx < 0) return;
      if (idx < n) y.u[idx] += d;
      else y.v[idx - n] += d;
    };
    bump(i, di);
    bump(j, dj);
    return fn_(y);
  };
  SmoothedDerivs out;
  out.H = fn_(x);
  out.Hu.resize(n);
  out.Hv.resize(n);
  for (int i = 0; i < 2 * n; ++i) {
    const cplx d = (shifted(i, h, -1, 0.0) - shifted(i, -h, -1, 0.0)) / (2.0 * h);
    if (i < n) out.Hu[i] = d;
    else out.Hv[i - n] = d;
  }
  if (!hessian) return out;
  TangentMat hm(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i) {
    for (int j = i; j < 2 * n; ++j) {
      cplx val;
      if (i == j) {
        val = (shifted(i, h, -1, 0.0) - 2.0 * out.H + shifted(i, -h, -1, 0.0)) / (h * h);
      } else {
        val = (shifted(i, h, j, h) - shifted(i, h, j, -h) - shifted(i, -h, j, h) +
               shifted(i, -h, j, -h)) /
              (4.0 * h * h);
      }
      hm(i, j) = val;
      hm(j, i) = val;
    }
  }
  out.Huu = hm.topLeftCorner(n, n);
  out.Huv = hm.topRightCorner(n, n);
  out.Hvv = hm.bottomRightCorner(n, n);
  return out;
}

std::vector<std::string> registered_systems() { return {"harmonic", "quartic", "nelson", "free"}; }

std::shared_ptr<const PolynomialSystem> make_system(const std::string& name,
                                                    const std::map<std::string, double>& params,
                                                    double hbar, const std::vector<double>& b) {
  const int n = static_cast<int>(b.size());
  std::vector<Monomial> terms;
  auto kinetic = [&] {
    for (int k = 0; k < n; ++k) {
      Monomial m;
      m.coef = 0.5;
      m.ppow[k] = 2;
      terms.push_back(m);
    }
  };
  std::map<std::string, double> resolved;
  if (name == "harmonic") {
    reject_unknown(params, {"omega"}, name);
    const double omega = param_or(params, "omega", 1.0);
    resolved = {{"omega", omega}};
    kinetic();
    for (int k = 0; k < n; ++k) {
      Monomial m;
      m.coef = 0.5 * omega * omega;
      m.qpow[k] = 2;
      terms.push_back(m);
    }
  } else if (name == "quartic") {
    reject_unknown(params, {"B", "omega"}, name);
    if (n != 1) throw ConfigError("quartic system is one-dimensional");
    const double B = param_or(params, "B", 0.1);
    const double omega = param_or(params, "omega", 1.0);
    resolved = {{"B", B}, {"omega", omega}};
    kinetic();
    Monomial q2;
    q2.coef = 0.5 * omega * omega;
    q2.qpow[0] = 2;
    Monomial q4;
    q4.coef = B;
    q4.qpow[0] = 4;
    terms.push_back(q2);
    terms.push_back(q4);
  } else if (name == "nelson") {
    reject_unknown(params, {"mu"}, name);
    if (n != 2) throw ConfigError("nelson system is two-dimensional");
    const double mu = param_or(params, "mu", 0.05);
    resolved = {{"mu", mu}};
    kinetic();
    // (y - x^2/2)^2 + mu x^2 = y^2 - x^2 y + x^4/4 + mu x^2
    Monomial y2;
    y2.coef = 1.0;
    y2.qpow = {0, 2};
    Monomial x2y;
    x2y.coef = -1.0;
    x2y.qpow = {2, 1};
    Monomial x4;
    x4.coef = 0.25;
    x4.qpow = {4, 0};
    Monomial x2;
    x2.coef = mu;
    x2.qpow = {2, 0};
    terms.insert(terms.end(), {y2, x2y, x4, x2});
  } else if (name == "free") {
    reject_unknown(params, {}, name);
    kinetic();
  } else {
    throw ConfigError("unknown system '" + name + "'");
  }
  return std::make_shared<const PolynomialSystem>(name, hbar, b, resolved, std::move(terms));
}

FockOracle::FockOracle(std::shared_ptr<const PolynomialSystem> system, int n_max)
    : system_(std::move(system)), n_max_(n_max) {
  if (n_max_ < 1) throw std::invalid_argument("n_max must be positive");
  const int deg = std::max(1, system_->max_degree());
  const int dim = n_max_ + 1 + deg;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
  for (int m = 1; m < dim; ++m) a(m - 1, m) = std::sqrt(double(m));
  const Eigen::MatrixXcd ad = a.adjoint();
  for (int k = 0; k < system_->dof(); ++k) {
    const Eigen::MatrixXcd Q = (system_->b()[k] / kSqrt2) * (a + ad);
    const Eigen::MatrixXcd P = (system_->c()[k] / cplx(0.0, kSqrt2)) * (a - ad);
    std::array<std::vector<Eigen::MatrixXcd>, 2> pw;
    for (int which = 0; which < 2; ++which) {
      const Eigen::MatrixXcd& base = which == 0 ? Q : P;
      Eigen::MatrixXcd cur = Eigen::MatrixXcd::Identity(dim, dim);
      for (int e = 0; e <= deg; ++e) {
        pw[which].push_back(cur.topLeftCorner(n_max_ + 1, n_max_ + 1));
        cur = cur * base;
      }
    }
    powers_.push_back(std::move(pw));
  }
}

FockOracle::Result FockOracle::evaluate(const ComplexPhasePoint& x) const {
  const int n = system_->dof();
  if (x.dof() != n) throw std::invalid_argument("fock oracle: dimension mismatch");
  std::vector<Eigen::VectorXcd> bu(n), bv(n);
  double tail = 0.0;
  for (int k = 0; k < n; ++k) {
    bu[k].resize(n_max_ + 1);
    bv[k].resize(n_max_ + 1);
    bu[k][0] = 1.0;
    bv[k][0] = 1.0;
    for (int m = 1; m <= n_max_; ++m) {
      bu[k][m] = bu[k][m - 1] * x.u[k] / std::sqrt(double(m));
      bv[k][m] = bv[k][m - 1] * x.v[k] / std::sqrt(double(m));
    }
    tail = std::max({tail, std::norm(bu[k][n_max_]), std::norm(bv[k][n_max_])});
  }
  cplx num = 0.0;
  for (const auto& t : system_->terms()) {
    cplx term = t.coef;
    for (int k = 0; k < n; ++k) {
      const bool momentum = t.ppow[k] != 0;
      const int e = momentum ? t.ppow[k] : t.qpow[k];
      const Eigen::MatrixXcd& A = powers_[k][momentum ? 1 : 0][e];
      term *= (bv[k].transpose() * A * bu[k]).value();
    }
    num += term;
  }
  cplx vu = 0.0;
  for (int k = 0; k < n; ++k) vu += x.v[k] * x.u[k];
  return {num / std::exp(vu), tail};
}

cplx fock_oracle(std::shared_ptr<const PolynomialSystem> system, const ComplexPhasePoint& x,
                 int n_max, double tail_tol) {
  FockOracle oracle(std::move(system), n_max);
  auto r = oracle.evaluate(x);
  if (r.tail > tail_tol)
    throw std::runtime_error("fock oracle: truncation tail " + std::to_string(r.tail) +
                             " exceeds tolerance; increase n_max");
  return r.value;
}

}  // namespace csprop
