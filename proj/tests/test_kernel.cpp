#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "relnet/kernel.hpp"
#include "util.hpp"

using namespace relnet;
using relnet::testutil::asym_example_params;
using relnet::testutil::asym_example_probs;
using relnet::testutil::sym_capture_probs;
using relnet::testutil::sym_params;

namespace {

KernelPolynomials sym_kernel() {
    return build_kernel(derive_coefficients(sym_params(), sym_capture_probs()));
}

KernelPolynomials asym_example_kernel() {
    return build_kernel(derive_coefficients(asym_example_params(), asym_example_probs()));
}

}  // namespace

TEST_CASE("kernel polynomial identities") {
    const auto k = sym_kernel();
    SUBCASE("kernel vanishes at (1,1)") {
        CHECK(std::abs(k.R(1.0, 1.0)) < 1e-15);
        CHECK(std::abs(k.R_hat(1.0, 1.0)) < 1e-15);
    }
    SUBCASE("y = 1 slice factors as (1-x)(lam1 x - tb h1)") {
        const auto c = derive_coefficients(sym_params(), sym_capture_probs());
        for (double x : {0.3, 0.8, 1.5}) {
            const cplx expect = (1.0 - x) * (c.lam1 * x - c.tb * c.h1);
            CHECK(std::abs(k.R(x, 1.0) - expect) < 1e-13);
        }
    }
    SUBCASE("both factorisations and the probabilistic form agree") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (const auto& kern : {sym_kernel(), asym_example_kernel()}) {
            for (int i = 0; i < 300; ++i) {
                const cplx x{u(rng), u(rng)}, y{u(rng), u(rng)};
                const cplx r1 = kern.R(x, y);
                const cplx r2 = kern.R_hat(x, y);
                CHECK(std::abs(r1 - r2) < 1e-12);
                const cplx viapsi = (x * y - kern.Psi(x, y)) / kern.Z(x, y);
                CHECK(std::abs(r1 - viapsi) < 1e-12);
            }
        }
    }
}

TEST_CASE("smallest-modulus roots") {
    const auto k = sym_kernel();
    const auto c = derive_coefficients(sym_params(), sym_capture_probs());
    SUBCASE("X0(1) = 1 under the drift condition") {
        REQUIRE(c.lam1 < c.tb * c.h1);
        CHECK(std::abs(root_X0(k, 1.0) - 1.0) < 1e-10);
        CHECK(std::abs(root_Y0(k, 1.0) - 1.0) < 1e-10);
    }
    SUBCASE("unit circle: exactly the small root stays inside") {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 50; ++trial) {
            const auto set = relnet::testutil::random_stable_set(rng);
            const auto kern = build_kernel(set.coeffs);
            for (int j = 1; j < 720; ++j) {
                const double phi = 2.0 * M_PI * j / 720;
                const cplx y = std::polar(1.0, phi);
                const cplx x0 = root_X0(kern, y);
                CHECK(std::abs(x0) < 1.0);
                CHECK(std::abs(kern.R_hat(x0, y)) < 1e-10);
            }
        }
    }
    SUBCASE("defining property at random arguments") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(-1.2, 1.2);
        for (int i = 0; i < 200; ++i) {
            const cplx y{u(rng), u(rng)};
            const cplx x0 = root_X0(k, y);
            CHECK(std::abs(k.R_hat(x0, y)) < 1e-10);
            const cplx x1 = root_X1(k, y);
            CHECK(std::abs(x0) <= std::abs(x1) + 1e-12);
        }
    }
}

TEST_CASE("branch points") {
    SUBCASE("ordering for the canonical sets") {
        for (const auto& kern : {sym_kernel(), asym_example_kernel()}) {
            const auto bp = branch_points(kern);
            CHECK(0.0 < bp.x[0]);
            CHECK(bp.x[0] < bp.x[1]);
            CHECK(bp.x[1] <= 1.0);
            CHECK(1.0 < bp.x[2]);
            CHECK(bp.x[2] < bp.x[3]);
            CHECK(0.0 < bp.y[0]);
            CHECK(bp.y[1] <= 1.0);
        }
    }
    SUBCASE("discriminant sign pattern of the four intervals") {
        const auto kern = asym_example_kernel();
        const auto bp = branch_points(kern);
        auto Dx = [&](double x) {
            const cplx a = kern.eval_a(x), b = kern.eval_b(x), cc = kern.eval_c(x);
            return (b * b - 4.0 * a * cc).real();
        };
        std::mt19937_64 rng(23);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 10000; ++i) {
            const double span = bp.x[3] + 1.0;
            const double x = u(rng) * span;
            const bool inside = (x > bp.x[0] && x < bp.x[1]) || (x > bp.x[2] && x < bp.x[3]);
            const double d = Dx(x);
            if (std::abs(x - bp.x[0]) < 1e-9 || std::abs(x - bp.x[1]) < 1e-9 ||
                std::abs(x - bp.x[2]) < 1e-9 || std::abs(x - bp.x[3]) < 1e-9)
                continue;
            CHECK((inside ? d < 0.0 : d > 0.0));
        }
    }
    SUBCASE("x2 touches 1 exactly at the drift boundary") {
        // D_x(1) = (tb h2 - lam2)^2: the inner branch points pinch at x = 1
        // when lam2 hits its service bound and separate again beyond it.
        auto p = sym_params();
        const auto probs = sym_capture_probs();
        auto coeffs_for = [&](double lh) {
            p.lambda_hat1 = p.lambda_hat2 = lh;
            return derive_coefficients(p, probs);
        };
        const auto c0 = coeffs_for(0.05);
        const double boundary = c0.tb * c0.h2 - (c0.lam2 - c0.lambda_hat2);
        double x2_at_boundary = 0.0;
        for (double off : {-1e-3, 0.0, 1e-3}) {
            const auto c = coeffs_for(boundary + off);
            const auto kern = build_kernel(c);
            const auto bp = branch_points(kern);
            CHECK(bp.x[1] <= 1.0 + 1e-9);
            CHECK(bp.x[2] >= 1.0 - 1e-9);
            if (off == 0.0) x2_at_boundary = bp.x[1];
            const cplx a = kern.eval_a(1.0), b = kern.eval_b(1.0), cc = kern.eval_c(1.0);
            const double dx1 = (b * b - 4.0 * a * cc).real();
            CHECK(dx1 == doctest::Approx(std::pow(c.tb * c.h2 - c.lam2, 2)).epsilon(1e-8));
        }
        CHECK(std::abs(x2_at_boundary - 1.0) < 1e-6);
        // off the boundary the touch point moves strictly inside
        const auto bp_in = branch_points(build_kernel(coeffs_for(boundary - 1e-3)));
        CHECK(bp_in.x[1] < 1.0 - 1e-5);
    }
}

TEST_CASE("contours") {
    const auto kern = sym_kernel();
    const auto m = contour(kern, ContourSide::M, 512);
    SUBCASE("extreme points") {
        CHECK(m.rho[0] == doctest::Approx(m.beta0).epsilon(1e-9));
        CHECK(m.rho[256] == doctest::Approx(-m.beta1).epsilon(1e-9));
    }
    SUBCASE("modulus-real-part relation and symmetry") {
        for (std::size_t k = 0; k < m.phi.size(); ++k) {
            const cplx x = m.point(k);
            CHECK(relnet::testutil::contour_relation_defect(kern, x) < 1e-8);
            CHECK(std::abs(std::norm(x) - m.m_of_delta(x.real())) < 1e-8);  // unfolded egg
        }
        for (std::size_t k = 1; k < m.phi.size() / 2; ++k)
            CHECK(m.rho[k] == doctest::Approx(m.rho[m.phi.size() - k]).epsilon(1e-9));
    }
    SUBCASE("round trip through the algebraic root") {
        const auto bp = branch_points(kern);
        for (std::size_t k = 0; k < m.phi.size(); k += 17) {
            const cplx x = m.point(k);
            const cplx y = root_Y0(kern, x);
            CHECK(y.real() >= bp.y[0] - 1e-6);
            CHECK(y.real() <= bp.y[1] + 1e-6);
            CHECK(std::abs(y.imag()) < 1e-7);
            const cplx back = root_X0(kern, y.real());
            CHECK(std::abs(back.real() - x.real()) < 1e-6);
            CHECK(std::abs(std::abs(back.imag()) - std::abs(x.imag())) < 1e-6);
        }
    }
    SUBCASE("involution on the first branch cut") {
        const auto bp = branch_points(kern);
        for (double x = bp.x[0] + 1e-4; x < bp.x[1]; x += (bp.x[1] - bp.x[0]) / 7) {
            const cplx y = root_Y0(kern, x);
            const cplx back = root_X0(kern, y);
            CHECK(std::abs(back - x) < 1e-8);
        }
    }
    SUBCASE("L contour equals the M contour of the swapped kernel") {
        const auto l = contour(kern, ContourSide::L, 128);
        const auto msw = contour(kern.swapped(), ContourSide::M, 128);
        for (std::size_t k = 0; k < l.rho.size(); ++k)
            CHECK(l.rho[k] == doctest::Approx(msw.rho[k]).epsilon(1e-12));
    }
}
