#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "relnet/elliptic.hpp"
#include "relnet/kernel.hpp"

namespace relnet {

// Boundary correspondence of the conformal map gamma_0 : unit disc -> G_M,
// gamma_0(0) = 0, gamma_0'(0) > 0, from the Theodorsen integral equation.
struct ConformalMap {
    int grid = 0;
    int iterations = 0;
    std::vector<double> phi;       // phi_k = 2 pi k / M
    std::vector<double> psi;       // boundary correspondence psi(phi_k)
    std::vector<double> rho_psi;   // rho(psi(phi_k))
    std::vector<cplx> unit;        // e^{i phi_k}
    std::vector<cplx> boundary;    // gamma_0(e^{i phi_k}) on the contour
    double z1 = 0.0;               // gamma(1): gamma_0(z1) = 1
    double gprime1 = 0.0;          // gamma'(1) = 1/gamma_0'(z1)

    cplx gamma0(cplx z) const;
    cplx gamma0_prime(cplx z) const;
    // Inverse map x -> z by Newton; per-call, no caching.
    cplx gamma(cplx x) const;
    double gamma_real(double x) const;
};

struct TheodorsenOptions {
    double stop_tol = 1e-6;
    int max_iterations = 10000;
};

ConformalMap theodorsen_solve(const Contour& contour, const TheodorsenOptions& opt = {});

// Ellipse substitute for the exact map: semi-axes rho(0), rho(pi/2).
EllipseDiscMap elliptic_approx(const Contour& contour);

// Resultant-based pole analysis: resultant polynomials and the possible pole xbar
// of H(x,0) in S_x = G_M \ closed unit disc.
struct PoleData {
    std::array<double, 3> Q{};    // Res_x(R,A;y) / (tb^2 y (y-1))
    std::array<double, 3> Qt{};   // Res_y(R,A;x) / (tb^2 h2 x (x-1))
    std::array<double, 3> T{};    // Res_x(R,B;y) / (tb^2 y (y-1))
    std::vector<double> qt_roots;           // real roots of Qt
    std::vector<double> candidates;         // roots in (1, beta0) with |Y0|<=1
    int r = 0;                              // pole multiplicity flag
    double xbar = 0.0;                      // valid when r == 1
    double min_abs_B_on_contour = 0.0;      // B(x, Y0(x)) over the grid
};

PoleData pole_scan(const KernelPolynomials& kern, const DerivedCoefficients& coeffs,
                   const Contour& contour);

struct IndexReport {
    int chi = 0;                  // winding number of U around M
    double closure_residual = 0;  // |arg increment - 2 pi chi|
    bool sloped_bound_1 = false;       // lam1 < tb (s* + d1 lam2/(tb h2))
    bool sloped_bound_2 = false;       // lam2 < tb (w* + d2 lam1/(tb h1))
    bool consistent = false;      // chi == 0 iff both conditions hold
};

IndexReport index_chi(const DerivedCoefficients& coeffs, const KernelPolynomials& kern,
                      int grid_size = 512);

struct BvpSolution {
    CaseKind kind = CaseKind::riemann_hilbert;
    int chi = 0;
    int pole_r = 0;
    std::optional<double> xbar;
    double H00 = 0, H10 = 0, H01 = 0;
    double E1 = 0, E2 = 0;
    double D1 = 0, D2 = 0;          // NaN when the matching arrival rate is 0
    double consv_r1 = 0, consv_r2 = 0;
    double H00_swapped = 0;          // independent value from the y-side run

    // Evaluator for H(x,0) inside the contour (needs the x-side machinery).
    cplx hx0(cplx x) const;

    struct Side;                    // solver internals, immutable
    std::shared_ptr<const Side> side;     // x-side
    std::shared_ptr<const Side> side_y;   // swapped run
};

struct BvpOptions {
    int grid = 512;
    double theodorsen_tol = 1e-6;
    double case_tol = 1e-9;
};

// Full driver: contours, Theodorsen maps, pole scan and index on both sides,
// Dirichlet or Riemann-Hilbert solution, boundary unknowns, moments, delays.
BvpSolution solve_bvp(const SystemParams& params, const SuccessProbabilities& probs,
                      const BvpOptions& opt = {});

// Debug artifacts as CSV: the contour in polar form (phi, rho, Re x, Im x),
// the boundary correspondence psi grid, and the J(t) samples of the
// Riemann-Hilbert symbol.  Writes contour.csv, psi_grid.csv, j_samples.csv.
void dump_solution_artifacts(const BvpSolution& sol, const std::string& dir);

// Single-side solvers (x-side of the given coefficients).
struct SideSolution {
    double H00 = 0;        // value pinned by this side
    double Hb0 = 0;        // boundary unknown at x=1 for this side: H(1,0)
    double H1_10 = 0;      // d/dx H(x,0) at x = 1
    double E = 0;          // mean queue length of this side's relay
    int pole_r = 0;
    double xbar = 0;
    int chi = 0;
    std::shared_ptr<const BvpSolution::Side> detail;
};

SideSolution solve_dirichlet(const ConformalMap& map, const DerivedCoefficients& coeffs,
                             const KernelPolynomials& kern, const PoleData& poles);
SideSolution solve_rh(const ConformalMap& map, const DerivedCoefficients& coeffs,
                      const KernelPolynomials& kern, const PoleData& poles);

// E_i and D_i from the boundary derivative (Little's law); D is NaN when the
// arrival rate vanishes.
std::pair<double, double> moments_and_delay(double lam, double tb, double d, double h,
                                            double H1_boundary);

}  // namespace relnet
