#include "csprop/airy.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace csprop {

namespace {

constexpr double kPi = std::numbers::pi;

// The series loses about exp(|zeta| + Re zeta) to cancellation, the
// asymptotic expansion is good to about exp(-2 |zeta|); the switch balances the
// two against long-double rounding.
constexpr double kSwitch = 43.5;

using lcplx = std::complex<long double>;

AiryPair series(cplx zd) {
  const lcplx z(zd.real(), zd.imag());
  const lcplx z3 = z * z * z;
  lcplx f = 1.0L, g = z, fp = 0.0L, gp = 1.0L;
  lcplx a = 1.0L, b = z;  // current terms of f and g
  for (int k = 1; k < 400; ++k) {
    const long double dk = k;
    a *= z3 / ((3 * dk - 1) * (3 * dk));
    b *= z3 / ((3 * dk) * (3 * dk + 1));
    f += a;
    g += b;
    // d/dz z^(3k) = 3k z^(3k-1); use a / z only when z != 0.
    if (z != 0.0L) {
      fp += a * (3 * dk) / z;
      gp += b * (3 * dk + 1) / z;
    }
    if (std::abs(a) + std::abs(b) < 1e-21L * (std::abs(f) + std::abs(g)) &&
        std::abs(a) * 3 * dk + std::abs(b) * (3 * dk + 1) <
            1e-21L * std::abs(z) * (std::abs(fp) + std::abs(gp)))
      break;
  }
  const long double c1 = 0.355028053887817239260L, c2 = 0.258819403792806798405L;
  const lcplx v = c1 * f - c2 * g, d = c1 * fp - c2 * gp;
  return {cplx(double(v.real()), double(v.imag())), cplx(double(d.real()), double(d.imag()))};
}

// Asymptotic expansion, valid for |arg z| <= 2 pi / 3 here.
AiryPair asymptotic(cplx z) {
  const cplx sq = std::sqrt(z);
  const cplx zeta = (2.0 / 3.0) * z * sq;
  if (-zeta.real() > 700.0)
    throw AiryOverflow("Airy function overflows at |z| = " + std::to_string(std::abs(z)));
  const cplx q = std::sqrt(sq);  // z^(1/4)
  cplx su = 1.0, sv = 1.0;
  double u = 1.0;
  cplx zp = 1.0;
  double last = 1e300;
  for (int k = 1; k < 60; ++k) {
    const double dk = k;
    u *= (6 * dk - 5) * (6 * dk - 3) * (6 * dk - 1) / ((2 * dk - 1) * 216.0 * dk);
    const double v = -(6 * dk + 1) / (6 * dk - 1) * u;
    zp *= -1.0 / zeta;
    const double size = std::abs(u * zp);
    if (size > last) break;  // optimal truncation
    su += u * zp;
    sv += v * zp;
    last = size;
    if (size < 1e-17) break;
  }
  const cplx e = std::exp(-zeta) / (2.0 * std::sqrt(kPi));
  return {e / q * su, -e * q * sv};
}

}  // namespace

AiryPair airy_ai(cplx z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw std::invalid_argument("Airy function of a non-finite argument");
  const double ang = std::abs(std::arg(z));
  const cplx zeta = (2.0 / 3.0) * z * std::sqrt(z);
  if (3.0 * std::abs(zeta) + zeta.real() < kSwitch) return series(z);
  if (ang <= 2.0 * kPi / 3.0) return asymptotic(z);
  // Ai(z) = -w Ai(w z) - w^2 Ai(w^2 z); both rotated arguments lie inside
  // |arg| <= 2 pi / 3.
  const cplx w = std::polar(1.0, 2.0 * kPi / 3.0);
  const cplx w2 = std::conj(w);
  const AiryPair a = airy_ai(w * z);
  const AiryPair b = airy_ai(w2 * z);
  return {-w * a.value - w2 * b.value, -w * w * a.derivative - w2 * w2 * b.derivative};
}

cplx airy_rotation(int contour) {
  switch (contour) {
    case 1:
      return 1.0;
    case 2:
      return std::polar(1.0, -2.0 * kPi / 3.0);
    case 3:
      return std::polar(1.0, 2.0 * kPi / 3.0);
    default:
      throw std::invalid_argument("Airy contour index must be 1, 2 or 3");
  }
}

AiryPair airy_F(int contour, cplx W) {
  const cplx w = airy_rotation(contour);
  const AiryPair a = airy_ai(w * W);
  return {w * a.value, w * w * a.derivative};
}

}  // namespace csprop
