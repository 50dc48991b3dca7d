#include "relnet/bvp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace relnet {

namespace {

constexpr double kPi = 3.14159265358979323846;

cplx A_of(const DerivedCoefficients& c, cplx x, cplx y) {
    return c.tb * (c.d1 * (1.0 - 1.0 / x) + c.h2 * (1.0 - 1.0 / y));
}
cplx B_of(const DerivedCoefficients& c, cplx x, cplx y) {
    return c.tb * (c.d2 * (1.0 - 1.0 / y) + c.h1 * (1.0 - 1.0 / x));
}
cplx C_of(const DerivedCoefficients& c, cplx x, cplx y) {
    return c.tb * (c.d1 * (1.0 / x - 1.0) + c.d2 * (1.0 / y - 1.0));
}

std::vector<double> quadratic_real_roots(const std::array<double, 3>& p) {
    std::vector<double> roots;
    const double a = p[2], b = p[1], c = p[0];
    if (std::abs(a) < 1e-14 * std::max(std::abs(b), std::abs(c))) {
        if (b != 0.0) roots.push_back(-c / b);
        return roots;
    }
    const double disc = b * b - 4 * a * c;
    if (disc < 0.0) return roots;
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + (b >= 0 ? sq : -sq));
    roots.push_back(q / a);
    if (q != 0.0) roots.push_back(c / q);
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace

// ---------------------------------------------------------------------------
// Conformal map
// ---------------------------------------------------------------------------

cplx ConformalMap::gamma0(cplx z) const {
    cplx s{0.0, 0.0};
    for (int j = 0; j < grid; ++j) {
        const std::size_t k = std::size_t(j);
        s += std::log(rho_psi[k]) * (unit[k] + z) / (unit[k] - z);
    }
    return z * std::exp(s / double(grid));
}

cplx ConformalMap::gamma0_prime(cplx z) const {
    cplx s{0.0, 0.0}, sp{0.0, 0.0};
    for (int j = 0; j < grid; ++j) {
        const std::size_t k = std::size_t(j);
        const double u = std::log(rho_psi[k]);
        s += u * (unit[k] + z) / (unit[k] - z);
        sp += u * 2.0 * unit[k] / ((unit[k] - z) * (unit[k] - z));
    }
    s /= double(grid);
    sp /= double(grid);
    return std::exp(s) * (1.0 + z * sp);
}

double ConformalMap::gamma_real(double x) const {
    // gamma_0 restricted to (-1,1) is real and increasing
    double lo = -1.0 + 1e-12, hi = 1.0 - 1e-12;
    if (x == 0.0) return 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (gamma0(cplx(mid, 0.0)).real() < x) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

cplx ConformalMap::gamma(cplx x) const {
    if (std::abs(x.imag()) < 1e-300) return cplx(gamma_real(x.real()), 0.0);
    const double c0 = gamma0_prime(cplx(0.0, 0.0)).real();  // capacity-like scale
    cplx z = x / c0;
    if (std::abs(z) > 0.9) z *= 0.9 / std::abs(z);
    for (int it = 0; it < 100; ++it) {
        const cplx f = gamma0(z) - x;
        if (std::abs(f) < 1e-13) return z;
        const cplx d = gamma0_prime(z);
        cplx zn = z - f / d;
        if (std::abs(zn) >= 1.0) zn = zn / std::abs(zn) * 0.999999;
        if (std::abs(zn - z) < 1e-16) return zn;
        z = zn;
    }
    // grid-assisted restart: begin from the closest boundary image scaled in
    std::size_t best = 0;
    double bestd = 1e300;
    for (std::size_t k = 0; k < boundary.size(); ++k) {
        const double d = std::abs(boundary[k] - x);
        if (d < bestd) {
            bestd = d;
            best = k;
        }
    }
    z = 0.95 * unit[best];
    for (int it = 0; it < 200; ++it) {
        const cplx f = gamma0(z) - x;
        if (std::abs(f) < 1e-12) return z;
        cplx zn = z - f / gamma0_prime(z);
        if (std::abs(zn) >= 1.0) zn = zn / std::abs(zn) * 0.999999;
        z = zn;
    }
    throw std::runtime_error("inverse conformal map did not converge");
}

ConformalMap theodorsen_solve(const Contour& contour, const TheodorsenOptions& opt) {
    const int M = int(contour.phi.size());
    ConformalMap map;
    map.grid = M;
    map.phi = contour.phi;
    map.psi = contour.phi;  // psi_0 = phi
    map.unit.resize(static_cast<std::size_t>(M));
    for (int k = 0; k < M; ++k) map.unit[std::size_t(k)] = std::polar(1.0, map.phi[std::size_t(k)]);

    auto rho_of_psi = [&](double ps) { return contour.rho_of_angle(ps); };

    // Wittich conjugation: odd offsets only, exact for trigonometric
    // polynomials of degree < M/2.
    std::vector<int> odd;
    std::vector<double> cot_odd;
    for (int m = 1; m < M; m += 2) {
        odd.push_back(m);
        cot_odd.push_back(2.0 / std::tan(kPi * m / M));
    }

    std::vector<double> u(static_cast<std::size_t>(M));
    std::vector<double> next(static_cast<std::size_t>(M));
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        for (int k = 0; k < M; ++k) u[std::size_t(k)] = std::log(rho_of_psi(map.psi[std::size_t(k)]));
        double err = 0.0;
        for (int k = 0; k < M; ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < odd.size(); ++j)
                s += u[std::size_t((k + odd[j]) % M)] * cot_odd[j];
            next[std::size_t(k)] = map.phi[std::size_t(k)] - s / double(M);
        }
        // keep the conjugate symmetry psi(2 pi - phi) = 2 pi - psi(phi)
        next[0] = 0.0;
        for (int k = 1; k < M / 2; ++k) {
            const double sym = 0.5 * (next[std::size_t(k)] + 2.0 * kPi - next[std::size_t(M - k)]);
            next[std::size_t(k)] = sym;
            next[std::size_t(M - k)] = 2.0 * kPi - sym;
        }
        for (int k = 0; k < M; ++k)
            err = std::max(err, std::abs(next[std::size_t(k)] - map.psi[std::size_t(k)]));
        map.psi.swap(next);
        if (err < opt.stop_tol) break;
    }
    if (it >= opt.max_iterations)
        throw std::runtime_error(
            "Theodorsen iteration did not reach the stopping criterion; increase the grid "
            "or fall back to the ellipse approximation");
    map.iterations = it + 1;

    map.rho_psi.resize(static_cast<std::size_t>(M));
    map.boundary.resize(static_cast<std::size_t>(M));
    for (int k = 0; k < M; ++k) {
        map.rho_psi[std::size_t(k)] = rho_of_psi(map.psi[std::size_t(k)]);
        map.boundary[std::size_t(k)] = std::polar(map.rho_psi[std::size_t(k)], map.psi[std::size_t(k)]);
    }

    // gamma(1): gamma_0(z1) = 1 with z1 in (0,1); requires beta0 > 1
    if (contour.beta0 <= 1.0)
        throw std::runtime_error("x = 1 lies outside the contour; cannot normalise the map");
    double z = 0.5;
    double lo = 0.0, hi = 1.0 - 1e-12;
    for (int k = 0; k < 100; ++k) {
        const double f = map.gamma0(cplx(z, 0.0)).real() - 1.0;
        if (std::abs(f) < 1e-14) break;
        if (f > 0) hi = z; else lo = z;
        const double d = map.gamma0_prime(cplx(z, 0.0)).real();
        double zn = z - f / d;
        if (!(zn > lo && zn < hi)) zn = 0.5 * (lo + hi);
        if (std::abs(zn - z) < 1e-16) {
            z = zn;
            break;
        }
        z = zn;
    }
    map.z1 = z;
    map.gprime1 = 1.0 / map.gamma0_prime(cplx(z, 0.0)).real();
    return map;
}

EllipseDiscMap elliptic_approx(const Contour& contour) {
    const std::size_t M = contour.phi.size();
    return ellipse_disc_map(contour.rho[0], contour.rho[M / 4]);
}

// ---------------------------------------------------------------------------
// Resultant-based pole analysis
// ---------------------------------------------------------------------------

PoleData pole_scan(const KernelPolynomials& kern, const DerivedCoefficients& c,
                   const Contour& contour) {
    PoleData p;
    const double l1 = c.lambda_hat1, l2 = c.lambda_hat2;
    // Q(y):  Res_x(R, A; y) = tb^2 y (y-1) Q(y)
    p.Q = {c.tb * c.sstar * c.h2 * c.h2,
           c.h2 * (c.d1 * (c.lam1 + l2 * (1.0 + l1) + c.L2) - c.tb * c.sstar * (c.h2 + c.d1)),
           -c.d1 * (c.lam2 * c.d1 + c.h2 * (l2 * (1.0 + l1) + c.L2))};
    // Qt(x): Res_y(R, A; x) = tb^2 h2 x (x-1) Qt(x)
    p.Qt = {-c.sstar * c.d1 * c.tb,
            (l1 * (1.0 + l2) + c.lam2 + c.L1) * c.d1 + (c.h2 + c.d1) * c.sstar * c.tb,
            -(c.h2 * c.lam1 + (l1 * (1.0 + l2) + c.L1) * c.d1)};
    // T(y):  Res_x(R, B; y) = tb^2 y (y-1) T(y)
    p.T = {-c.wstar * c.d2 * c.tb,
           (l2 * (1.0 + l1) + c.lam1 + c.L2) * c.d2 + (c.h1 + c.d2) * c.wstar * c.tb,
           -(c.h1 * c.lam2 + (l2 * (1.0 + l1) + c.L2) * c.d2)};

    if (p.Qt[0] <= 0.0 && c.d1 < 0.0)
        throw std::runtime_error("pole scan: Qt(0) <= 0 contradicts d1 < 0");
    const double Qt1 = p.Qt[0] + p.Qt[1] + p.Qt[2];
    if (Qt1 <= 0.0)
        throw std::runtime_error("pole scan: Qt(1) <= 0 contradicts the stability conditions");

    p.qt_roots = quadratic_real_roots(p.Qt);
    for (double x : p.qt_roots) {
        if (x > 1.0 && x < contour.beta0) {
            const cplx y0 = root_Y0(kern, cplx(x, 0.0));
            if (std::abs(y0) <= 1.0) {
                p.candidates.push_back(x);
                // pole of H(x,0) only when A vanishes on the Y0 branch
                const double aval = std::abs(A_of(c, cplx(x, 0.0), y0));
                if (aval < 1e-8) {
                    p.r = 1;
                    p.xbar = x;
                }
            }
        }
    }

    double minB = 1e300;
    for (std::size_t k = 0; k < contour.phi.size(); ++k) {
        const cplx x = contour.point(k);
        const cplx y = root_Y0(contour.kern, x);
        minB = std::min(minB, std::abs(B_of(c, x, y)));
    }
    p.min_abs_B_on_contour = minB;
    if (minB < 1e-10)
        throw std::runtime_error("pole scan: B(x, Y0(x)) vanishes on the contour");
    return p;
}

// ---------------------------------------------------------------------------
// Index
// ---------------------------------------------------------------------------

namespace {

// Winding number of f along the closed grid (cyclic), by accumulated argument.
std::pair<int, double> winding(const std::vector<cplx>& f) {
    double total = 0.0;
    const std::size_t n = f.size();
    for (std::size_t j = 0; j < n; ++j) {
        const cplx ratio = f[(j + 1) % n] / f[j];
        total += std::arg(ratio);
    }
    const int w = int(std::lround(total / (2.0 * kPi)));
    return {w, std::abs(total - 2.0 * kPi * w)};
}

std::vector<cplx> u_values(const DerivedCoefficients& c, const KernelPolynomials& kern,
                           const Contour& contour, int pole_r, double xbar) {
    std::vector<cplx> U(contour.phi.size());
    for (std::size_t k = 0; k < U.size(); ++k) {
        const cplx x = contour.point(k);
        const cplx y = root_Y0(kern, x);
        cplx v = A_of(c, x, y) / B_of(c, x, y);
        if (pole_r == 1) v /= (x - xbar);
        U[k] = v;
    }
    return U;
}

}  // namespace

IndexReport index_chi(const DerivedCoefficients& c, const KernelPolynomials& kern, int grid_size) {
    IndexReport rep;
    rep.sloped_bound_1 = c.lam1 < c.tb * (c.sstar + c.d1 * c.lam2 / (c.tb * c.h2));
    rep.sloped_bound_2 = c.lam2 < c.tb * (c.wstar + c.d2 * c.lam1 / (c.tb * c.h1));
    for (int attempt = 0; attempt < 2; ++attempt) {
        const int g = grid_size << attempt;
        const Contour m = contour(kern, ContourSide::M, g);
        const PoleData poles = pole_scan(kern, c, m);
        const auto U = u_values(c, kern, m, poles.r, poles.xbar);
        const auto [w, resid] = winding(U);
        rep.chi = w;
        rep.closure_residual = resid;
        rep.consistent = (w == 0) == (rep.sloped_bound_1 && rep.sloped_bound_2);
        if (resid < 1e-6 && rep.consistent) return rep;
    }
    if (!rep.consistent)
        throw std::runtime_error(
            "index computation disagrees with the sloped stability conditions even after grid refinement");
    return rep;
}

// ---------------------------------------------------------------------------
// Boundary-value solutions
// ---------------------------------------------------------------------------

struct BvpSolution::Side {
    CaseKind kind = CaseKind::riemann_hilbert;
    ConformalMap map;
    KernelPolynomials kern;
    DerivedCoefficients coeffs;
    int pole_r = 0;
    double xbar = 0.0;
    // RH pieces
    std::vector<cplx> logJ;
    double c1 = 0.0;          // N/(tb (h1 h2 - d1 d2))
    double shift = 0.0;       // s* d2 H00 / (h1 h2 - d1 d2)
    // Dirichlet pieces
    std::vector<double> f;    // boundary data Im(C/A)
    double one_minus_rho = 0.0;
    double pole_residue = 0.0;  // residue coefficient of the z-plane pole term
    double zp = 0.0;            // gamma(xbar)

    cplx hx0(cplx x) const;
};

namespace {

// (1/2 pi i) contour integral of logJ/(t - z) dt divided appropriately:
// trapezoid forms used by the Riemann-Hilbert solution.
cplx integral_log_over(const std::vector<cplx>& logJ, const std::vector<cplx>& t, cplx z) {
    // (1/2 pi i) \oint logJ(t)/(t(t-z)) dt = (1/M) sum logJ_j / (t_j - z)
    cplx s{0, 0};
    for (std::size_t j = 0; j < t.size(); ++j) s += logJ[j] / (t[j] - z);
    return s / double(t.size());
}

cplx integral_log_sq(const std::vector<cplx>& logJ, const std::vector<cplx>& t, cplx z) {
    // (1/2 pi i) \oint logJ(t)/(t-z)^2 dt = (1/M) sum logJ_j t_j/(t_j - z)^2
    cplx s{0, 0};
    for (std::size_t j = 0; j < t.size(); ++j) s += logJ[j] * t[j] / ((t[j] - z) * (t[j] - z));
    return s / double(t.size());
}

cplx integral_log_two_poles(const std::vector<cplx>& logJ, const std::vector<cplx>& t, cplx z,
                            double z1) {
    // (1/2 pi i) \oint logJ(t)/((t-z)(t-z1)) dt
    cplx s{0, 0};
    for (std::size_t j = 0; j < t.size(); ++j) s += logJ[j] * t[j] / ((t[j] - z) * (t[j] - z1));
    return s / double(t.size());
}

}  // namespace

cplx BvpSolution::Side::hx0(cplx x) const {
    const cplx z = map.gamma(x);
    if (kind == CaseKind::riemann_hilbert) {
        cplx val = std::exp((z - map.z1) * integral_log_two_poles(logJ, map.unit, z, map.z1));
        if (pole_r == 1) val *= (xbar - 1.0) / (xbar - x);
        return c1 * val + shift;
    }
    // Dirichlet
    cplx s{0, 0};
    for (std::size_t j = 0; j < map.unit.size(); ++j)
        s += f[j] * (map.unit[j] + z) / (map.unit[j] - z);
    s /= double(map.unit.size());
    cplx val = one_minus_rho * (1.0 - cplx(0, 1) * s);
    if (pole_r == 1) {
        val += pole_residue * (1.0 / (z - zp) + z / (1.0 - zp * z) + 1.0 / zp);
    }
    return val;
}

cplx BvpSolution::hx0(cplx x) const {
    if (!side) throw std::logic_error("solution has no x-side data");
    return side->hx0(x);
}

SideSolution solve_rh(const ConformalMap& map, const DerivedCoefficients& c,
                      const KernelPolynomials& kern, const PoleData& poles) {
    auto side = std::make_shared<BvpSolution::Side>();
    side->kind = CaseKind::riemann_hilbert;
    side->map = map;
    side->kern = kern;
    side->coeffs = c;
    side->pole_r = poles.r;
    side->xbar = poles.xbar;

    const int M = map.grid;
    // U on the boundary and its continuously unwrapped argument; the anchor
    // t=1 maps to the real point beta0 where U is real, so J(1) = 1.
    std::vector<cplx> U(static_cast<std::size_t>(M));
    for (int k = 0; k < M; ++k) {
        const cplx x = map.boundary[std::size_t(k)];
        const cplx y = root_Y0(kern, x);
        cplx v = A_of(c, x, y) / B_of(c, x, y);
        if (poles.r == 1) v /= (x - poles.xbar);
        U[std::size_t(k)] = v;
    }
    std::vector<double> theta(static_cast<std::size_t>(M));
    theta[0] = std::arg(U[0]);
    if (std::abs(theta[0]) > 1e-6 && std::abs(std::abs(theta[0]) - kPi) > 1e-6)
        throw std::runtime_error("U is not real at the contour anchor point");
    for (int k = 1; k < M; ++k)
        theta[std::size_t(k)] = theta[std::size_t(k - 1)] +
                                std::arg(U[std::size_t(k)] / U[std::size_t(k - 1)]);
    const double closure = theta[std::size_t(M - 1)] + std::arg(U[0] / U[std::size_t(M - 1)]) -
                           theta[0];
    const int chi = int(std::lround(closure / (2.0 * kPi)));
    if (chi != 0) {
        std::ostringstream os;
        os << "Riemann-Hilbert index chi = " << chi << " is unsupported (only chi = 0 is solved)";
        throw std::runtime_error(os.str());
    }
    side->logJ.resize(static_cast<std::size_t>(M));
    const double base = theta[0];
    for (int k = 0; k < M; ++k)
        side->logJ[std::size_t(k)] = cplx(0.0, -2.0 * (theta[std::size_t(k)] - base));

    const double det = c.h1 * c.h2 - c.d1 * c.d2;
    const double N = c.lam1 * c.d2 + c.h1 * (c.tb * c.wstar - c.lam2);
    side->c1 = N / (c.tb * det);

    const cplx E0 = std::exp(-map.z1 * integral_log_over(side->logJ, map.unit, map.z1));
    if (std::abs(E0.imag()) > 1e-6)
        throw std::runtime_error("boundary integral E0 is not real; index bookkeeping failed");
    double h00 = N * E0.real() / (c.tb * c.h1 * c.wstar);
    if (poles.r == 1) h00 *= std::pow(poles.xbar - 1.0, 1) / poles.xbar;
    side->shift = c.sstar * c.d2 * h00 / det;

    SideSolution out;
    out.pole_r = poles.r;
    out.xbar = poles.xbar;
    out.chi = chi;
    out.H00 = h00;
    out.Hb0 = side->c1 + side->shift;  // value of H(x,0) at x = 1
    const cplx I2 = integral_log_sq(side->logJ, map.unit, map.z1);
    double h110 = side->c1 * (map.gprime1 * I2.real());
    if (poles.r == 1) h110 += side->c1 / (poles.xbar - 1.0);
    out.H1_10 = h110;
    const auto [E, D] = moments_and_delay(c.lam1, c.tb, c.d1, c.h1, h110);
    (void)D;
    out.E = E;
    out.detail = side;
    return out;
}

SideSolution solve_dirichlet(const ConformalMap& map, const DerivedCoefficients& c,
                             const KernelPolynomials& kern, const PoleData& poles) {
    if (c.rho >= 1.0) throw std::domain_error("Dirichlet case requires rho < 1");
    auto side = std::make_shared<BvpSolution::Side>();
    side->kind = CaseKind::dirichlet;
    side->map = map;
    side->kern = kern;
    side->coeffs = c;
    side->pole_r = poles.r;
    side->xbar = poles.xbar;
    side->one_minus_rho = 1.0 - c.rho;

    const int M = map.grid;
    side->f.resize(static_cast<std::size_t>(M));
    for (int k = 0; k < M; ++k) {
        const cplx x = map.boundary[std::size_t(k)];
        const cplx y = root_Y0(kern, x);
        side->f[std::size_t(k)] = (C_of(c, x, y) / A_of(c, x, y)).imag();
    }
    // f must be odd: f(2 pi - phi) = -f(phi); its mean vanishes and the
    // Dirichlet constant is exactly 1 - rho.
    double odd_defect = std::abs(side->f[0]);
    for (int k = 1; k < M; ++k)
        odd_defect = std::max(odd_defect,
                              std::abs(side->f[std::size_t(k)] + side->f[std::size_t(M - k)]));
    if (odd_defect > 1e-6)
        throw std::runtime_error("Dirichlet boundary data is not odd; case classification failed");

    if (poles.r == 1) {
        // analytic continuation carries a simple pole at xbar: add the
        // reflected pole term with the residue forced by the boundary relation
        side->zp = map.gamma_real(poles.xbar);
        const double h = 1e-6;
        const auto dA = [&](double x) {
            const cplx y = root_Y0(kern, cplx(x, 0));
            return A_of(c, cplx(x, 0), y).real();
        };
        const double Aprime = (dA(poles.xbar + h) - dA(poles.xbar - h)) / (2.0 * h);
        const cplx ybar = root_Y0(kern, cplx(poles.xbar, 0));
        const double resH =
            -side->one_minus_rho * (C_of(c, cplx(poles.xbar, 0), ybar).real() / Aprime);
        side->pole_residue = resH / map.gamma0_prime(cplx(side->zp, 0)).real();
    }

    SideSolution out;
    out.pole_r = poles.r;
    out.xbar = poles.xbar;
    out.H00 = side->hx0(cplx(0.0, 0.0)).real();
    out.Hb0 = side->hx0(cplx(1.0, 0.0)).real();
    // derivative of the Schwarz integral at z1
    cplx ds{0, 0};
    for (int j = 0; j < M; ++j)
        ds += side->f[std::size_t(j)] * 2.0 * map.unit[std::size_t(j)] /
              ((map.unit[std::size_t(j)] - map.z1) * (map.unit[std::size_t(j)] - map.z1));
    ds /= double(M);
    double dHdz = (side->one_minus_rho * (-cplx(0, 1) * ds)).real();
    if (poles.r == 1) {
        const double zp = side->zp, z1 = map.z1;
        dHdz += side->pole_residue *
                (-1.0 / ((z1 - zp) * (z1 - zp)) + 1.0 / ((1.0 - zp * z1) * (1.0 - zp * z1)));
    }
    out.H1_10 = dHdz * map.gprime1;
    const auto [E, D] = moments_and_delay(c.lam1, c.tb, c.d1, c.h1, out.H1_10);
    (void)D;
    out.E = E;
    out.detail = side;
    return out;
}

std::pair<double, double> moments_and_delay(double lam, double tb, double d, double h,
                                            double H1_boundary) {
    const double denom = tb * h - lam;
    if (denom <= 0.0) throw std::domain_error("moment formula requires lam < tb h (stability)");
    const double E = (lam + tb * d * H1_boundary) / denom;
    const double D = (lam > 0.0) ? E / lam : std::nan("");
    return {E, D};
}

void dump_solution_artifacts(const BvpSolution& sol, const std::string& dir) {
    if (!sol.side) throw std::logic_error("solution has no x-side data to dump");
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const ConformalMap& map = sol.side->map;
    auto open = [&](const char* name) {
        std::ofstream out(fs::path(dir) / name);
        if (!out) throw std::runtime_error(std::string("cannot write ") + name);
        return out;
    };
    {
        auto out = open("contour.csv");
        out << "phi,rho,re_x,im_x\n";
        char buf[160];
        for (int k = 0; k < map.grid; ++k) {
            const cplx x = map.boundary[std::size_t(k)];
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", map.psi[std::size_t(k)],
                          map.rho_psi[std::size_t(k)], x.real(), x.imag());
            out << buf;
        }
    }
    {
        auto out = open("psi_grid.csv");
        out << "phi,psi,rho_psi\n";
        char buf[120];
        for (int k = 0; k < map.grid; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", map.phi[std::size_t(k)],
                          map.psi[std::size_t(k)], map.rho_psi[std::size_t(k)]);
            out << buf;
        }
    }
    if (!sol.side->logJ.empty()) {
        auto out = open("j_samples.csv");
        out << "phi,re_logJ,im_logJ\n";
        char buf[120];
        for (int k = 0; k < map.grid; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", map.phi[std::size_t(k)],
                          sol.side->logJ[std::size_t(k)].real(),
                          sol.side->logJ[std::size_t(k)].imag());
            out << buf;
        }
    }
}

BvpSolution solve_bvp(const SystemParams& params, const SuccessProbabilities& probs,
                      const BvpOptions& opt) {
    const DerivedCoefficients c = derive_coefficients(params, probs);
    const CaseInfo info = classify_case(c, opt.case_tol);

    auto run_side = [&](const DerivedCoefficients& cs) {
        const KernelPolynomials kern = build_kernel(cs);
        const Contour m = contour(kern, ContourSide::M, opt.grid);
        const ConformalMap map = theodorsen_solve(m, {opt.theodorsen_tol, 10000});
        const PoleData poles = pole_scan(kern, cs, m);
        if (info.kind == CaseKind::dirichlet) return solve_dirichlet(map, cs, kern, poles);
        return solve_rh(map, cs, kern, poles);
    };

    const SideSolution sx = run_side(c);
    const DerivedCoefficients cy = c.swapped();
    const SideSolution sy = run_side(cy);

    BvpSolution sol;
    sol.kind = info.kind;
    sol.chi = sx.chi;
    sol.pole_r = sx.pole_r;
    if (sx.pole_r == 1) sol.xbar = sx.xbar;
    sol.H00 = sx.H00;
    sol.H00_swapped = sy.H00;
    sol.H10 = sx.Hb0;   // H(1,0)
    sol.H01 = sy.Hb0;   // H(0,1) = swapped H(1,0)
    sol.E1 = sx.E;
    sol.E2 = sy.E;
    sol.D1 = (c.lam1 > 0.0) ? sol.E1 / c.lam1 : std::nan("");
    sol.D2 = (c.lam2 > 0.0) ? sol.E2 / c.lam2 : std::nan("");
    sol.side = sx.detail;
    sol.side_y = sy.detail;
    // conservation-of-flow residuals with the independently computed unknowns
    sol.consv_r1 = c.lam1 - c.tb * (c.h1 * (1.0 - sol.H01) - c.d1 * (sol.H10 - sol.H00));
    sol.consv_r2 = c.lam2 - c.tb * (c.h2 * (1.0 - sol.H10) - c.d2 * (sol.H01 - sol.H00));
    return sol;
}

}  // namespace relnet
