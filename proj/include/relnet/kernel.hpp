#pragma once

#include <array>
#include <complex>
#include <vector>

#include "relnet/model.hpp"

namespace relnet {

using cplx = std::complex<double>;

// The stationary functional equation's kernel in polynomial form,
//   Rpoly(x,y) = x y R(x,y) = a(x) y^2 + b(x) y + c(x)
//              = ahat(y) x^2 + bhat(y) x + chat(y),
// with coefficient polynomials stored in monomial order (index = power).
struct KernelPolynomials {
    double lh1 = 0, lh2 = 0, L1 = 0, L2 = 0, L3 = 0, tb = 0, h1 = 0, h2 = 0;
    std::array<double, 3> a{}, b{}, c{};        // in x
    std::array<double, 3> ah{}, bh{}, ch{};     // in y

    cplx eval_a(cplx x) const { return (a[0] + (a[1] + a[2] * x) * x); }
    cplx eval_b(cplx x) const { return (b[0] + (b[1] + b[2] * x) * x); }
    cplx eval_c(cplx x) const { return (c[0] + (c[1] + c[2] * x) * x); }
    cplx eval_ah(cplx y) const { return (ah[0] + (ah[1] + ah[2] * y) * y); }
    cplx eval_bh(cplx y) const { return (bh[0] + (bh[1] + bh[2] * y) * y); }
    cplx eval_ch(cplx y) const { return (ch[0] + (ch[1] + ch[2] * y) * y); }

    cplx R(cplx x, cplx y) const { return (eval_a(x) * y + eval_b(x)) * y + eval_c(x); }
    cplx R_hat(cplx x, cplx y) const { return (eval_ah(y) * x + eval_bh(y)) * x + eval_ch(y); }

    // Generating-function factorisation pieces: Rpoly = (x y - Psi) / Z.
    cplx Z(cplx x, cplx y) const;
    cplx Psi(cplx x, cplx y) const;

    KernelPolynomials swapped() const;
};

KernelPolynomials build_kernel(const DerivedCoefficients& c);

// Root of Rpoly(., y) = 0 with the smallest modulus (branch-stable quadratic
// evaluation); root_Y0 is the y-side analogue.
cplx root_X0(const KernelPolynomials& k, cplx y);
cplx root_Y0(const KernelPolynomials& k, cplx x);
cplx root_X1(const KernelPolynomials& k, cplx y);
cplx root_Y1(const KernelPolynomials& k, cplx x);

struct BranchPoints {
    std::array<double, 4> x{};  // 0 < x1 < x2 <= 1 < x3 < x4
    std::array<double, 4> y{};
};

// Real roots of the discriminants D_x = b^2 - 4ac and D_y, bracketed between
// the critical points of the quartic and polished by Newton.  Throws
// std::runtime_error when the expected branch-point ordering does not hold.
BranchPoints branch_points(const KernelPolynomials& k);

enum class ContourSide { M, L };

// Closed contour traced by the small root as the other variable runs over its
// first branch cut, in polar form rho(phi) on a uniform angle grid.  An
// analytic axis-aligned ellipse can stand in for the kernel egg, mainly for
// validating the conformal-map machinery.
struct Contour {
    ContourSide side = ContourSide::M;
    KernelPolynomials kern;      // already swapped for side L
    double y1 = 0, y2 = 0;       // generating cut
    double beta0 = 0, beta1 = 0; // extreme right/left points
    std::vector<double> phi, rho;
    bool analytic_ellipse = false;
    double ell_a = 0, ell_b = 0;

    // |x|^2 = m(Re x) for x on the contour (the two-valued fold near the real
    // axis is resolved through the cut parametrisation below).
    double m_of_delta(double delta) const;
    double zeta_of_delta(double delta) const;

    // Cut parametrisation: x(y) = X0(y) with Im >= 0 for y in [y1, y2].
    cplx x_of_y(double y) const;
    // Inverse of y -> arg x(y) on [0, pi] (arg runs from pi at y1 to 0 at y2).
    double y_of_angle(double angle) const;
    // Contour point at any angle, conjugate-symmetric across the real axis.
    cplx point_at_angle(double angle) const;
    double rho_of_angle(double angle) const { return std::abs(point_at_angle(angle)); }
    double delta_of_angle(double angle) const { return point_at_angle(angle).real(); }

    cplx point(std::size_t k) const { return std::polar(rho[k], phi[k]); }
};

Contour contour(const KernelPolynomials& k, ContourSide side, int grid_size = 512);
Contour ellipse_contour(double a, double b, int grid_size = 512);

}  // namespace relnet
