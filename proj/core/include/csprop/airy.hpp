#pragma once

// Airy function of complex argument and the three contour integrals
//   F_i(W) = (1/2pi) int_{C_i} exp{i (W t + t^3/3)} dt,
// with F_1 = Ai (real-axis contour) and F_i(W) = w_i Ai(w_i W) for
// w_1 = 1, w_2 = exp(-2 pi i/3), w_3 = exp(2 pi i/3). The rotated contours close
// on each other, so F_1 + F_2 + F_3 = 0.

#include <complex>
#include <stdexcept>

namespace csprop {

using cplx = std::complex<double>;

class AiryOverflow : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

struct AiryPair {
  cplx value;
  cplx derivative;
};

// Ai(z) and Ai'(z). Maclaurin series near the origin and in the sectors where
// Ai grows; asymptotic expansion (with the connection formula beyond
// |arg z| = 2 pi / 3) elsewhere. Throws AiryOverflow when |exp(zeta)| would
// overflow a double.
AiryPair airy_ai(cplx z);

// w_i for contour index 1, 2 or 3.
cplx airy_rotation(int contour);

// F_i(W) and dF_i/dW.
AiryPair airy_F(int contour, cplx W);

}  // namespace csprop
