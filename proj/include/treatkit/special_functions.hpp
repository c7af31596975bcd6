#pragma once

namespace treatkit {

// Log of the gamma function for x > 0 (Lanczos approximation, g=7, n=9).
// Self-contained so significance values do not depend on the platform libm.
double log_gamma(double x);

// Regularized incomplete beta I_x(a, b) for a, b > 0, 0 <= x <= 1, evaluated
// with the Lentz continued fraction; absolute error well below 1e-12 over the
// parameter ranges used by the F-test. Domain violations throw.
double reg_incomplete_beta(double a, double b, double x);

// Regularized incomplete gamma functions, P(s, x) + Q(s, x) = 1, for s > 0,
// x >= 0. Series for x < s + 1, continued fraction otherwise.
double reg_lower_gamma_p(double s, double x);
double reg_upper_gamma_q(double s, double x);

}  // namespace treatkit
