#pragma once

// Smoothed Hamiltonians H(u, v) = <v|H|u> / <v|u> and their derivatives.
//
// Bundled systems are polynomial in position and momentum. Their smoothed
// form follows from normal ordering: for an operator A = alpha a + beta a^+
// one has <v|A^n|u>/<v|u> = sum_j C(n,2j) (2j-1)!! s^j x^(n-2j) with
// x = alpha u + beta v and s = alpha beta. For Q this gives s = b^2/2 and for
// P it gives s = c^2/2.

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "csprop/coherent.hpp"

namespace csprop {

struct SmoothedDerivs {
  cplx H;
  PhaseVec Hu;  // dH/du_k
  PhaseVec Hv;  // dH/dv_k
  DofMat Huu;   // d2H/du_j du_k
  DofMat Huv;   // d2H/du_j dv_k
  DofMat Hvv;   // d2H/dv_j dv_k
};

class SmoothedSystem {
 public:
  SmoothedSystem(std::string name, double hbar, std::vector<double> b,
                 std::map<std::string, double> params);
  virtual ~SmoothedSystem() = default;

  const std::string& name() const { return name_; }
  int dof() const { return static_cast<int>(b_.size()); }
  double hbar() const { return hbar_; }
  const std::vector<double>& b() const { return b_; }
  const std::vector<double>& c() const { return c_; }
  const std::map<std::string, double>& params() const { return params_; }

  virtual cplx H(const ComplexPhasePoint& x) const = 0;
  // Hessian blocks are left empty when `hessian` is false.
  virtual SmoothedDerivs derivatives(const ComplexPhasePoint& x, bool hessian = true) const = 0;
  // False when derivatives come from finite differences.
  virtual bool analytic_derivatives() const { return true; }

 protected:
  void check_dim(const ComplexPhasePoint& x) const;

 private:
  std::string name_;
  double hbar_;
  std::vector<double> b_;
  std::vector<double> c_;
  std::map<std::string, double> params_;
};

// coef * prod_k Q_k^qpow[k] P_k^ppow[k]; a degree of freedom may carry
// powers of Q or of P but not both.
struct Monomial {
  double coef = 0.0;
  std::array<int, kMaxDof> qpow{};
  std::array<int, kMaxDof> ppow{};
};

class PolynomialSystem : public SmoothedSystem {
 public:
  PolynomialSystem(std::string name, double hbar, std::vector<double> b,
                   std::map<std::string, double> params, std::vector<Monomial> terms);

  const std::vector<Monomial>& terms() const { return terms_; }
  int max_degree() const { return max_degree_; }

  cplx H(const ComplexPhasePoint& x) const override;
  SmoothedDerivs derivatives(const ComplexPhasePoint& x, bool hessian = true) const override;

  // Classical H(Q, P) without smoothing.
  cplx classical(const PhaseVec& Q, const PhaseVec& P) const;
  // Potential part (terms without momentum) at a real position.
  double potential(const double* x) const;
  // True when the momentum terms are exactly sum_k P_k^2 / 2.
  bool unit_mass_kinetic() const;

 private:
  std::vector<Monomial> terms_;
  int max_degree_ = 0;
};

// Wraps a user-supplied H(u, v); derivatives use central differences.
class FiniteDifferenceSystem : public SmoothedSystem {
 public:
  using Fn = std::function<cplx(const ComplexPhasePoint&)>;
  FiniteDifferenceSystem(std::string name, double hbar, std::vector<double> b, Fn fn,
                         double step = 1e-4);

  cplx H(const ComplexPhasePoint& x) const override { return fn_(x); }
  SmoothedDerivs derivatives(const ComplexPhasePoint& x, bool hessian = true) const override;
  bool analytic_derivatives() const override { return false; }

 private:
  Fn fn_;
  double step_;
};

// Registered systems:
//   harmonic  H = sum_k (P_k^2 + omega^2 Q_k^2)/2      params: omega (1)
//   quartic   H = P^2/2 + omega^2 Q^2/2 + B Q^4         params: B (0.1), omega (1)
//   nelson    H = (Px^2+Py^2)/2 + (y - x^2/2)^2 + mu x^2 params: mu (0.05)
//   free      H = sum_k P_k^2/2
// The number of degrees of freedom is the length of `b`.
std::shared_ptr<const PolynomialSystem> make_system(const std::string& name,
                                                    const std::map<std::string, double>& params,
                                                    double hbar, const std::vector<double>& b);

std::vector<std::string> registered_systems();

// Normal-ordered moment <v|A^n|u>/<v|u> for x = alpha u + beta v, s = alpha beta.
cplx smoothed_moment(int n, cplx x, double s);

// Truncated-Fock-basis evaluation of <v|H|u>/<v|u>, independent of the
// closed forms above. Matrices are built once at construction.
class FockOracle {
 public:
  FockOracle(std::shared_ptr<const PolynomialSystem> system, int n_max);

  struct Result {
    cplx value;
    // Largest |z|^(2 n_max) / n_max! over the Bargmann vectors involved.
    double tail;
  };

  Result evaluate(const ComplexPhasePoint& x) const;
  int n_max() const { return n_max_; }

 private:
  std::shared_ptr<const PolynomialSystem> system_;
  int n_max_;
  // powers_[k][0 or 1][n]: (Q_k)^n or (P_k)^n truncated to (n_max+1)^2.
  std::vector<std::array<std::vector<Eigen::MatrixXcd>, 2>> powers_;
};

// Convenience form of the oracle; tail mass above `tail_tol` throws.
cplx fock_oracle(std::shared_ptr<const PolynomialSystem> system, const ComplexPhasePoint& x,
                 int n_max, double tail_tol = 1e-14);

}  // namespace csprop
