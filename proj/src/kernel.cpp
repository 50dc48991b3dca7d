#include "relnet/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace relnet {

namespace {

// Smaller-modulus root of A z^2 + B z + C, avoiding cancellation by forming
// q = -(B + sign(Re conj(B) sqrt(D)) sqrt(D))/2 and using the root pair
// (q/A, C/q).
cplx smallest_quadratic_root(cplx A, cplx B, cplx C) {
    if (std::abs(A) < 1e-300) {
        if (std::abs(B) < 1e-300) throw std::domain_error("degenerate quadratic");
        return -C / B;
    }
    const cplx D = B * B - 4.0 * A * C;
    cplx sq = std::sqrt(D);
    if ((std::conj(B) * sq).real() < 0.0) sq = -sq;
    const cplx q = -0.5 * (B + sq);
    cplx r1, r2;
    if (std::abs(q) > 0.0) {
        r1 = q / A;
        r2 = C / q;
    } else {
        r1 = std::sqrt(C / A);
        r2 = -r1;
    }
    return std::abs(r1) <= std::abs(r2) ? r1 : r2;
}

cplx largest_quadratic_root(cplx A, cplx B, cplx C) {
    const cplx small = smallest_quadratic_root(A, B, C);
    if (std::abs(A) < 1e-300) return small;
    // product of roots = C/A
    if (std::abs(small) < 1e-300) return -B / A;
    return (C / A) / small;
}

using Poly = std::vector<double>;  // monomial order

Poly mul(const Poly& p, const Poly& q) {
    Poly r(p.size() + q.size() - 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
    return r;
}

Poly axpy(double s, const Poly& p, const Poly& q) {  // s*p + q
    Poly r = q;
    if (r.size() < p.size()) r.resize(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) r[i] += s * p[i];
    return r;
}

double eval(const Poly& p, double x) {
    double v = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) v = v * x + p[i];
    return v;
}

Poly deriv(const Poly& p) {
    Poly r(p.size() > 1 ? p.size() - 1 : 1, 0.0);
    for (std::size_t i = 1; i < p.size(); ++i) r[i - 1] = p[i] * double(i);
    return r;
}

// Real roots of a cubic by the trigonometric/Cardano method.
std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0) {
    std::vector<double> roots;
    if (std::abs(c3) < 1e-14 * std::max({std::abs(c2), std::abs(c1), std::abs(c0)})) {
        if (std::abs(c2) < 1e-300) {
            if (std::abs(c1) > 0) roots.push_back(-c0 / c1);
            return roots;
        }
        const double disc = c1 * c1 - 4 * c2 * c0;
        if (disc >= 0) {
            roots.push_back((-c1 + std::sqrt(disc)) / (2 * c2));
            roots.push_back((-c1 - std::sqrt(disc)) / (2 * c2));
        }
        return roots;
    }
    const double a = c2 / c3, b = c1 / c3, c = c0 / c3;
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double off = -a / 3.0;
    const double disc = q * q / 4.0 + p * p * p / 27.0;
    if (disc > 0) {
        const double s = std::sqrt(disc);
        const double u = std::cbrt(-q / 2.0 + s), v = std::cbrt(-q / 2.0 - s);
        roots.push_back(u + v + off);
    } else {
        const double r = std::sqrt(std::max(0.0, -p * p * p / 27.0));
        const double phi = std::acos(std::clamp(-q / (2.0 * r), -1.0, 1.0));
        const double m = 2.0 * std::sqrt(std::max(0.0, -p / 3.0));
        for (int k = 0; k < 3; ++k) roots.push_back(m * std::cos((phi + 2.0 * M_PI * k) / 3.0) + off);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

double polish(const Poly& p, const Poly& dp, double lo, double hi) {
    double flo = eval(p, lo), fhi = eval(p, hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = eval(p, x), d = eval(dp, x);
        double xn = (d != 0.0) ? x - f / d : x;
        if (!(xn > lo && xn < hi)) {
            if ((f > 0) == (flo > 0)) {
                lo = x;
            } else {
                hi = x;
            }
            xn = 0.5 * (lo + hi);
        } else {
            if ((f > 0) == (flo > 0)) lo = x; else hi = x;
        }
        if (std::abs(xn - x) < 1e-15 * std::max(1.0, std::abs(x))) return xn;
        x = xn;
    }
    return x;
}

// All real roots of a quartic with four real roots, bracketed by the critical
// points of the polynomial.
std::array<double, 4> quartic_real_roots(const Poly& p) {
    if (p.size() != 5 || std::abs(p[4]) < 1e-13 * std::max({std::abs(p[0]), std::abs(p[1]),
                                                            std::abs(p[2]), std::abs(p[3])}))
        throw std::runtime_error("discriminant is not a proper quartic (degenerate parameters)");
    const Poly dp = deriv(p);
    auto crit = cubic_real_roots(dp[3], dp[2], dp[1], dp[0]);
    if (crit.size() != 3)
        throw std::runtime_error("discriminant quartic lacks three critical points");
    // outer brackets: expand until sign matches the leading coefficient
    double left = crit.front() - 1.0, right = crit.back() + 1.0;
    const double lead = p[4];
    for (int i = 0; i < 200 && eval(p, left) * lead <= 0.0; ++i) left -= std::abs(left) + 1.0;
    for (int i = 0; i < 200 && eval(p, right) * lead <= 0.0; ++i) right += std::abs(right) + 1.0;
    const std::array<std::pair<double, double>, 4> brackets{
        std::pair{left, crit[0]}, std::pair{crit[0], crit[1]}, std::pair{crit[1], crit[2]},
        std::pair{crit[2], right}};
    std::array<double, 4> roots{};
    for (int i = 0; i < 4; ++i) {
        const auto [lo, hi] = brackets[std::size_t(i)];
        if (eval(p, lo) * eval(p, hi) > 0.0) {
            // tangency: a double root sitting at a critical point
            const double span = std::max({1.0, std::abs(lo), std::abs(hi)});
            double scale = 0.0;
            for (double coef : p) scale = scale * span + std::abs(coef);
            const double at_lo = std::abs(eval(p, lo)), at_hi = std::abs(eval(p, hi));
            const double best = std::min(at_lo, at_hi);
            if (best < 1e-9 * scale) {
                roots[std::size_t(i)] = at_lo <= at_hi ? lo : hi;
                continue;
            }
            throw std::runtime_error("discriminant quartic does not have four real roots");
        }
        roots[std::size_t(i)] = polish(p, dp, lo, hi);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

Poly discriminant_in_x(const KernelPolynomials& k) {
    const Poly a{k.a[0], k.a[1], k.a[2]}, b{k.b[0], k.b[1], k.b[2]}, c{k.c[0], k.c[1], k.c[2]};
    return axpy(-4.0, mul(a, c), mul(b, b));
}

}  // namespace

cplx KernelPolynomials::Z(cplx x, cplx y) const {
    return 1.0 / ((1.0 + lh1 * (1.0 - x)) * (1.0 + lh2 * (1.0 - y)));
}

cplx KernelPolynomials::Psi(cplx x, cplx y) const {
    return Z(x, y) * (x * y * (1.0 + L3 * (x * y - 1.0)) + y * (1.0 - x) * (tb * h1 - L1 * x) +
                      x * (1.0 - y) * (tb * h2 - L2 * y));
}

KernelPolynomials KernelPolynomials::swapped() const {
    KernelPolynomials s;
    s.lh1 = lh2;
    s.lh2 = lh1;
    s.L1 = L2;
    s.L2 = L1;
    s.L3 = L3;
    s.tb = tb;
    s.h1 = h2;
    s.h2 = h1;
    s.a = ah;
    s.b = bh;
    s.c = ch;
    s.ah = a;
    s.bh = b;
    s.ch = c;
    return s;
}

KernelPolynomials build_kernel(const DerivedCoefficients& c) {
    KernelPolynomials k;
    k.lh1 = c.lambda_hat1;
    k.lh2 = c.lambda_hat2;
    k.L1 = c.L1;
    k.L2 = c.L2;
    k.L3 = c.L3;
    k.tb = c.tb;
    k.h1 = c.h1;
    k.h2 = c.h2;
    const double l1 = k.lh1, l2 = k.lh2;
    const double S = l1 + l2 + l1 * l2 + k.tb * (k.h1 + k.h2) + k.L1 + k.L2 + k.L3;
    k.a = {0.0, -(l2 * (1.0 + l1) + k.L2), l1 * l2 - k.L3};
    k.b = {-k.tb * k.h1, S, -(l1 * (1.0 + l2) + k.L1)};
    k.c = {0.0, -k.tb * k.h2, 0.0};
    k.ah = {0.0, -(l1 * (1.0 + l2) + k.L1), l1 * l2 - k.L3};
    k.bh = {-k.tb * k.h2, S, -(l2 * (1.0 + l1) + k.L2)};
    k.ch = {0.0, -k.tb * k.h1, 0.0};
    return k;
}

cplx root_X0(const KernelPolynomials& k, cplx y) {
    return smallest_quadratic_root(k.eval_ah(y), k.eval_bh(y), k.eval_ch(y));
}
cplx root_Y0(const KernelPolynomials& k, cplx x) {
    return smallest_quadratic_root(k.eval_a(x), k.eval_b(x), k.eval_c(x));
}
cplx root_X1(const KernelPolynomials& k, cplx y) {
    return largest_quadratic_root(k.eval_ah(y), k.eval_bh(y), k.eval_ch(y));
}
cplx root_Y1(const KernelPolynomials& k, cplx x) {
    return largest_quadratic_root(k.eval_a(x), k.eval_b(x), k.eval_c(x));
}

BranchPoints branch_points(const KernelPolynomials& k) {
    BranchPoints bp;
    bp.x = quartic_real_roots(discriminant_in_x(k));
    bp.y = quartic_real_roots(discriminant_in_x(k.swapped()));
    auto check = [](const std::array<double, 4>& r, const char* side) {
        if (!(0.0 < r[0] && r[0] < r[1] && r[1] <= 1.0 + 1e-9 && 1.0 - 1e-12 < r[2] &&
              r[2] < r[3])) {
            std::ostringstream os;
            os << "branch points violate the expected ordering on the " << side << " side: " << r[0]
               << ", " << r[1] << ", " << r[2] << ", " << r[3]
               << " (parameters outside the stable regime)";
            throw std::runtime_error(os.str());
        }
    };
    check(bp.x, "x");
    check(bp.y, "y");
    return bp;
}

double Contour::zeta_of_delta(double delta) const {
    const KernelPolynomials& k = kern;
    const double l1 = k.lh1, l2 = k.lh2;
    const double S = l1 + l2 + l1 * l2 + k.tb * (k.h1 + k.h2) + k.L1 + k.L2 + k.L3;
    const double k1 = l2 * (1.0 + l1) + k.L2 + 2.0 * delta * (k.L3 - l1 * l2);
    const double k2 = S - 2.0 * delta * (l1 * (1.0 + l2) + k.L1);
    const double disc = k2 * k2 - 4.0 * k.tb * k.h2 * k1;
    if (std::abs(k1) < 1e-14) return k.tb * k.h2 / k2;
    return (k2 - std::sqrt(std::max(disc, 0.0))) / (2.0 * k1);
}

double Contour::m_of_delta(double delta) const {
    if (analytic_ellipse) {
        const double ratio = ell_b / ell_a;
        return delta * delta * (1.0 - ratio * ratio) + ell_b * ell_b;
    }
    const double z = zeta_of_delta(delta);
    const cplx m = kern.eval_ch(z) / kern.eval_ah(z);
    return m.real();
}

cplx Contour::x_of_y(double y) const {
    if (analytic_ellipse) {
        // parametrised directly by the angle in [0, pi] stored as "y"
        return cplx(ell_a * std::cos(y), ell_b * std::sin(y));
    }
    cplx x = root_X0(kern, cplx(y, 0.0));
    if (x.imag() < 0.0) x = std::conj(x);
    return x;
}

double Contour::y_of_angle(double angle) const {
    // angle in [0, pi]; arg x(y) falls monotonically from pi at y1 to 0 at y2
    double lo, hi;  // arg(lo side) >= angle >= arg(hi side)
    if (analytic_ellipse) {
        lo = M_PI;
        hi = 0.0;
    } else {
        lo = y1;
        hi = y2;
    }
    if (angle <= 0.0) return hi;
    if (angle >= M_PI) return lo;
    auto arg_at = [&](double y) { return std::arg(x_of_y(y)); };
    // safeguarded Newton with bisection fallback on the bracket
    double y = 0.5 * (lo + hi);
    for (int it = 0; it < 64; ++it) {
        const double f = arg_at(y) - angle;
        if (f > 0.0) lo = y; else hi = y;
        const double h = 1e-8 * std::max(1.0, std::abs(y));
        const double fp = (arg_at(y + h) - arg_at(y - h)) / (2.0 * h);
        double yn = (fp != 0.0) ? y - f / fp : 0.5 * (lo + hi);
        const double a = std::min(lo, hi), b = std::max(lo, hi);
        if (!(yn > a && yn < b)) yn = 0.5 * (lo + hi);
        if (std::abs(yn - y) < 1e-15 * std::max(1.0, std::abs(y))) return yn;
        y = yn;
    }
    for (int it = 0; it < 100; ++it) {
        y = 0.5 * (lo + hi);
        if (arg_at(y) - angle > 0.0) lo = y; else hi = y;
    }
    return y;
}

cplx Contour::point_at_angle(double angle) const {
    double a = std::fmod(angle, 2.0 * M_PI);
    if (a < 0.0) a += 2.0 * M_PI;
    const bool lower = a > M_PI;
    if (lower) a = 2.0 * M_PI - a;
    cplx x;
    if (a <= 0.0) x = cplx(beta0, 0.0);
    else if (a >= M_PI) x = cplx(beta1, 0.0);
    else x = x_of_y(y_of_angle(a));
    return lower ? std::conj(x) : x;
}

Contour ellipse_contour(double a, double b, int grid_size) {
    if (a <= 0.0 || b <= 0.0) throw std::domain_error("ellipse semi-axes must be positive");
    Contour m;
    m.analytic_ellipse = true;
    m.ell_a = a;
    m.ell_b = b;
    m.beta0 = a;
    m.beta1 = -a;
    m.phi.resize(static_cast<std::size_t>(grid_size));
    m.rho.resize(static_cast<std::size_t>(grid_size));
    for (int i = 0; i < grid_size; ++i) {
        const double angle = 2.0 * M_PI * i / grid_size;
        m.phi[std::size_t(i)] = angle;
        const double c = std::cos(angle), s = std::sin(angle);
        m.rho[std::size_t(i)] = a * b / std::hypot(b * c, a * s);
    }
    return m;
}

Contour contour(const KernelPolynomials& k, ContourSide side, int grid_size) {
    if (grid_size < 8 || grid_size % 2 != 0)
        throw std::domain_error("contour grid size must be even and >= 8");
    Contour m;
    m.side = side;
    m.kern = (side == ContourSide::M) ? k : k.swapped();
    const BranchPoints bp = branch_points(m.kern);
    m.y1 = bp.y[0];
    m.y2 = bp.y[1];
    const double g2 = (m.kern.eval_ch(m.y2) / m.kern.eval_ah(m.y2)).real();
    const double g1 = (m.kern.eval_ch(m.y1) / m.kern.eval_ah(m.y1)).real();
    if (g1 < 0.0 || g2 < 0.0) throw std::runtime_error("contour modulus relation is negative");
    m.beta0 = std::sqrt(g2);
    m.beta1 = -std::sqrt(g1);
    m.phi.resize(static_cast<std::size_t>(grid_size));
    m.rho.resize(static_cast<std::size_t>(grid_size));
    for (int i = 0; i < grid_size; ++i) {
        const double angle = 2.0 * M_PI * i / grid_size;
        m.phi[std::size_t(i)] = angle;
        m.rho[std::size_t(i)] = m.rho_of_angle(angle);
    }
    return m;
}

}  // namespace relnet
