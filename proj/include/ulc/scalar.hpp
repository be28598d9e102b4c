#pragma once

#include <complex>
#include <string>

namespace ulc {

using Scalar = std::complex<double>;

// Comparison tolerance. Defaults to 1e-9 and can be overridden with the
// ULC_EPSILON environment variable (read once, on first use).
double epsilon();
void set_epsilon(double eps);

bool near(Scalar a, Scalar b, double tol);
inline bool near(Scalar a, Scalar b) { return near(a, b, epsilon()); }
inline bool near_zero(Scalar a) { return near(a, Scalar{0.0, 0.0}); }

// -1, 0 or 1. Values within epsilon compare equal, otherwise real part
// first, then imaginary part.
int compare_scalars(Scalar a, Scalar b);

bool is_finite(Scalar a);

// 8 significant digits, e.g. "0.70710678", "-1", "0.5+0.5i", "i".
std::string format_scalar(Scalar a, int digits = 8);

}  // namespace ulc
