#pragma once

#include <complex>

namespace relnet {

// Complete elliptic integral K(m) with parameter m = k^2, by the AGM.
double elliptic_K(double m);

// Jacobi sn(u, m) for complex u and real parameter m in [0,1), via theta
// functions with the nome q(m).
std::complex<double> jacobi_sn(std::complex<double> u, double m);

// Conformal map from the interior of an origin-centred axis-aligned ellipse
// with semi-axes (a along the real axis, b along the imaginary axis) onto the
// unit disc, fixing 0 with positive derivative.  The special case a == b is a
// plain scaling.
struct EllipseDiscMap {
    double a = 1.0, b = 1.0;
    double q = 0.0;         // nome ((a-b)/(a+b))^2 for the wide orientation
    double k_product = 0.0; // 16 q prod((1+q^2n)/(1+q^(2n-1)))^8  (= modulus^2)
    double modulus = 0.0;   // sn modulus k
    double K = 0.0;         // quarter period K(k^2)
    double focal = 0.0;     // sqrt(|a^2-b^2|)
    bool rotated = false;   // major axis along the imaginary direction

    std::complex<double> map(std::complex<double> x) const;
};

EllipseDiscMap ellipse_disc_map(double a, double b);

}  // namespace relnet
