#include "relnet/elliptic.hpp"

#include <cmath>
#include <stdexcept>

namespace relnet {

namespace {

constexpr double kPi = 3.14159265358979323846;

double agm(double a, double b) {
    for (int i = 0; i < 64 && std::abs(a - b) > 1e-16 * a; ++i) {
        const double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    return a;
}

// nome q = exp(-pi K(1-m)/K(m))
double nome(double m) {
    if (m <= 0.0) return 0.0;
    return std::exp(-kPi * elliptic_K(1.0 - m) / elliptic_K(m));
}

}  // namespace

double elliptic_K(double m) {
    if (m < 0.0 || m >= 1.0) throw std::domain_error("elliptic_K needs 0 <= m < 1");
    return kPi / (2.0 * agm(1.0, std::sqrt(1.0 - m)));
}

std::complex<double> jacobi_sn(std::complex<double> u, double m) {
    if (m < 0.0 || m >= 1.0) throw std::domain_error("jacobi_sn needs 0 <= m < 1");
    if (m < 1e-14) return std::sin(u);
    const double K = elliptic_K(m);
    const double q = nome(m);
    const std::complex<double> v = u * (kPi / (2.0 * K));
    // theta_1(v) = 2 sum (-1)^n q^{(n+1/2)^2} sin((2n+1)v)
    // theta_4(v) = 1 + 2 sum (-1)^n q^{n^2} cos(2nv)
    std::complex<double> th1{0.0, 0.0}, th4{1.0, 0.0};
    double th2_0 = 0.0, th3_0 = 1.0;
    double sgn = 1.0;
    for (int n = 0; n < 64; ++n) {
        const double e1 = std::pow(q, (n + 0.5) * (n + 0.5));
        th1 += 2.0 * sgn * e1 * std::sin((2.0 * n + 1.0) * v);
        th2_0 += 2.0 * e1;
        if (n >= 1) {
            const double e2 = std::pow(q, double(n) * double(n));
            th4 += 2.0 * sgn * e2 * std::cos(2.0 * double(n) * v);
            th3_0 += 2.0 * e2;
            if (e2 < 1e-18 && e1 < 1e-18) break;
        }
        sgn = -sgn;
    }
    return (th3_0 / th2_0) * th1 / th4;
}

std::complex<double> EllipseDiscMap::map(std::complex<double> x) const {
    if (focal == 0.0) return x / a;
    std::complex<double> z = rotated ? std::complex<double>(0, -1) * x : x;
    const std::complex<double> w = std::asin(z / focal) * (2.0 * K / kPi);
    std::complex<double> val = std::sqrt(modulus) * jacobi_sn(w, modulus * modulus);
    return rotated ? std::complex<double>(0, 1) * val : val;
}

EllipseDiscMap ellipse_disc_map(double a, double b) {
    if (a <= 0.0 || b <= 0.0) throw std::domain_error("ellipse semi-axes must be positive");
    EllipseDiscMap e;
    e.a = a;
    e.b = b;
    e.rotated = b > a;
    const double big = std::max(a, b), small = std::min(a, b);
    e.focal = (a == b) ? 0.0 : std::sqrt(big * big - small * small);
    e.q = ((big - small) / (big + small)) * ((big - small) / (big + small));
    // truncated infinite product, stopped when a factor is within 1e-15 of 1
    double prod = 1.0;
    for (int n = 1; n < 200; ++n) {
        const double f = (1.0 + std::pow(e.q, 2.0 * n)) / (1.0 + std::pow(e.q, 2.0 * n - 1.0));
        const double f8 = std::pow(f, 8.0);
        prod *= f8;
        if (std::abs(f8 - 1.0) < 1e-15) break;
    }
    e.k_product = 16.0 * e.q * prod;
    e.modulus = std::sqrt(e.k_product);
    e.K = (e.modulus > 0.0) ? elliptic_K(e.modulus * e.modulus) : kPi / 2.0;
    return e;
}

}  // namespace relnet
