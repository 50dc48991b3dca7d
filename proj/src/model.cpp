#include "relnet/model.hpp"

#include <cmath>

namespace relnet {

SystemParams SystemParams::swapped() const {
    SystemParams s = *this;
    std::swap(s.t1, s.t2);
    std::swap(s.alpha1, s.alpha2);
    std::swap(s.alpha1_star, s.alpha2_star);
    std::swap(s.lambda_hat1, s.lambda_hat2);
    for (int u = 0; u < 2; ++u)
        for (int i = 0; i < 2; ++i) s.pa[u][i] = pa[1 - u][1 - i];
    return s;
}

void SystemParams::validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(t1) || !prob(t2) || !prob(alpha1) || !prob(alpha2) || !prob(alpha1_star) ||
        !prob(alpha2_star))
        throw std::domain_error("transmission probabilities must lie in [0,1]");
    if (alpha1_star < alpha1 || alpha2_star < alpha2)
        throw std::domain_error("adaptive probabilities require alpha*_i >= alpha_i");
    for (int u = 0; u < 2; ++u) {
        if (!prob(pa[u][0]) || !prob(pa[u][1]))
            throw std::domain_error("storage probabilities must lie in [0,1]");
        if (storage == StorageMode::exclusive && pa[u][0] + pa[u][1] > 1.0 + 1e-12)
            throw std::domain_error("exclusive storage requires pa(i,1)+pa(i,2) <= 1");
    }
    if (lambda_hat1 < 0.0 || lambda_hat2 < 0.0)
        throw std::domain_error("exogenous arrival rates must be >= 0");
    if (n_users < 1) throw std::domain_error("n_users must be >= 1");
}

DerivedCoefficients DerivedCoefficients::swapped() const {
    DerivedCoefficients s = *this;
    std::swap(s.delta1, s.delta2);
    std::swap(s.halpha1, s.halpha2);
    std::swap(s.h1, s.h2);
    std::swap(s.sstar, s.wstar);
    std::swap(s.d1, s.d2);
    std::swap(s.L1, s.L2);
    std::swap(s.lambda_hat1, s.lambda_hat2);
    std::swap(s.lam1, s.lam2);
    std::swap(s.lam11, s.lam22);
    std::swap(s.lam12, s.lam21);
    s.rho = s.lam1 / (s.tb * s.sstar) + s.lam2 / (s.tb * s.wstar);
    s.sigma = s.h1 / s.sstar + s.h2 / s.wstar;
    return s;
}

DerivedCoefficients derive_coefficients(const SystemParams& p, const SuccessProbabilities& s) {
    p.validate();
    DerivedCoefficients c;
    c.tb = p.tbar();
    c.delta1 = s.ps_rd_both[0] - s.ps_rd_single[0];
    c.delta2 = s.ps_rd_both[1] - s.ps_rd_single[1];
    c.halpha1 = (1.0 - p.alpha1) * s.ps_rd_single[0] + p.alpha1 * s.ps_rd_both[0];
    c.halpha2 = (1.0 - p.alpha2) * s.ps_rd_single[1] + p.alpha2 * s.ps_rd_both[1];
    c.h1 = p.alpha1 * c.halpha2;
    c.h2 = p.alpha2 * c.halpha1;
    c.sstar = p.alpha1_star * s.ps_rd_alone[0];
    c.wstar = p.alpha2_star * s.ps_rd_alone[1];
    c.d1 = c.h1 - c.sstar;
    c.d2 = c.h2 - c.wstar;

    const double t1 = p.t1, t2 = p.t2;
    const double q1b = 1.0 - s.ps_d_only[0], q2b = 1.0 - s.ps_d_only[1];
    const double q0b = s.ps_d_none;
    const double r11 = s.ps_r_single[0][0], r12 = s.ps_r_single[0][1];
    const double r21 = s.ps_r_single[1][0], r22 = s.ps_r_single[1][1];
    const double w1R1 = s.ps_r_bothfail[0][0] + s.ps_r_bothfail[1][0];  // decoded one at R1
    const double w1R2 = s.ps_r_bothfail[0][1] + s.ps_r_bothfail[1][1];
    // L1: failed source packet stored at R1 only; L2 at R2 only; L3 at both.
    const double t1o = t1 * (1.0 - t2), t2o = t2 * (1.0 - t1), tb2 = t1 * t2;
    c.L1 = t1o * q1b * (1.0 - r12) * r11 + t2o * q2b * (1.0 - r22) * r21 +
           tb2 * (q0b * s.ps_r_bothfail_none[1] * w1R1 +
                  s.ps_d_both[0] * (1.0 - s.ps_r_capture[1][1]) * s.ps_r_capture[1][0] +
                  s.ps_d_both[1] * (1.0 - s.ps_r_capture[0][1]) * s.ps_r_capture[0][0]);
    c.L2 = t1o * q1b * (1.0 - r11) * r12 + t2o * q2b * (1.0 - r21) * r22 +
           tb2 * (q0b * s.ps_r_bothfail_none[0] * w1R2 +
                  s.ps_d_both[0] * (1.0 - s.ps_r_capture[1][0]) * s.ps_r_capture[1][1] +
                  s.ps_d_both[1] * (1.0 - s.ps_r_capture[0][0]) * s.ps_r_capture[0][1]);
    c.L3 = t1o * q1b * r11 * r12 + t2o * q2b * r21 * r22 +
           tb2 * (q0b * w1R1 * w1R2 +
                  s.ps_d_both[0] * s.ps_r_capture[1][0] * s.ps_r_capture[1][1] +
                  s.ps_d_both[1] * s.ps_r_capture[0][0] * s.ps_r_capture[0][1]);

    const auto lam = endogenous_arrivals_two_user(p, s, ArrivalConvention::delay_section);
    c.lam11 = lam[0];
    c.lam12 = lam[1];
    c.lam21 = lam[2];
    c.lam22 = lam[3];
    c.lambda_hat1 = p.lambda_hat1;
    c.lambda_hat2 = p.lambda_hat2;
    c.lam1 = p.lambda_hat1 + c.lam11 + c.lam21;
    c.lam2 = p.lambda_hat2 + c.lam12 + c.lam22;
    c.rho = c.lam1 / (c.tb * c.sstar) + c.lam2 / (c.tb * c.wstar);
    c.sigma = c.h1 / c.sstar + c.h2 / c.wstar;
    return c;
}

std::array<double, 4> endogenous_arrivals_two_user(const SystemParams& p,
                                                   const SuccessProbabilities& s,
                                                   ArrivalConvention convention) {
    if (p.n_users != 2) throw std::domain_error("two-user arrival rates need n_users == 2");
    const double t1 = p.t1, t2 = p.t2;
    const double t1o = t1 * (1.0 - t2), t2o = t2 * (1.0 - t1), tb2 = t1 * t2;
    std::array<double, 4> lam{};
    if (convention == ArrivalConvention::stability_section) {
        // Eqs. for lambda_{i,j}: single-decode mass is kept, both-decode mass
        // is split with pa.  Probabilities are the general-MPR marginals.
        const double f1b = 1.0 - s.ps_d_both[0];  // user-1 fails at D, both transmitting
        const double f2b = 1.0 - s.ps_d_both[1];
        const double q1b = 1.0 - s.ps_d_only[0], q2b = 1.0 - s.ps_d_only[1];
        auto one = [&](int u, int i) {
            const double to = (u == 0) ? t1o : t2o;
            const double qb = (u == 0) ? q1b : q2b;
            const double fb = (u == 0) ? f1b : f2b;
            const double rs_i = s.ps_r_single[u][i], rs_o = s.ps_r_single[u][1 - i];
            const double rb_i = s.ps_r_bothfail[u][i], rb_o = s.ps_r_bothfail[u][1 - i];
            return to * qb * (rs_i * (1.0 - rs_o) + rs_i * rs_o * p.pa[u][i]) +
                   tb2 * fb * (rb_i * (1.0 - rb_o) + rb_i * rb_o * p.pa[u][i]);
        };
        lam = {one(0, 0), one(0, 1), one(1, 0), one(1, 1)};
    } else {
        // Delay-section (capture channel, duplicate storage): the relay-decode
        // law already admits at most one packet per relay per slot.
        const double q1b = 1.0 - s.ps_d_only[0], q2b = 1.0 - s.ps_d_only[1];
        const double q0b = s.ps_d_none;
        auto one = [&](int u, int i) {
            const double to = (u == 0) ? t1o : t2o;
            const double qb = (u == 0) ? q1b : q2b;
            const double succ_other = s.ps_d_both[1 - u];
            return to * qb * s.ps_r_single[u][i] +
                   tb2 * (q0b * s.ps_r_bothfail[u][i] + succ_other * s.ps_r_capture[u][i]);
        };
        lam = {one(0, 0), one(0, 1), one(1, 0), one(1, 1)};
    }
    return lam;
}

std::pair<double, double> service_rates(const SystemParams& p, const SuccessProbabilities& s,
                                        std::pair<double, double> pr_empty) {
    const auto [e1, e2] = pr_empty;
    if (e1 < 0.0 || e1 > 1.0 || e2 < 0.0 || e2 > 1.0)
        throw std::domain_error("empty probabilities must lie in [0,1]");
    const double tb = p.tbar();
    const double mu1 =
        tb * (e2 * p.alpha1_star * s.ps_rd_alone[0] +
              (1.0 - e2) * p.alpha1 *
                  (p.alpha2 * s.ps_rd_both[0] + (1.0 - p.alpha2) * s.ps_rd_single[0]));
    const double mu2 =
        tb * (e1 * p.alpha2_star * s.ps_rd_alone[1] +
              (1.0 - e1) * p.alpha2 *
                  (p.alpha1 * s.ps_rd_both[1] + (1.0 - p.alpha1) * s.ps_rd_single[1]));
    return {mu1, mu2};
}

CaseInfo classify_case(const DerivedCoefficients& c, double tol) {
    CaseInfo info;
    info.sigma = c.sigma;
    if (std::abs(c.sigma - 1.0) <= tol) {
        info.kind = CaseKind::dirichlet;
        info.h00_dirichlet = 1.0 - c.rho;
        return info;
    }
    info.kind = CaseKind::riemann_hilbert;
    const double det = c.h1 * c.h2 - c.d1 * c.d2;
    const double n10 = c.d2 * c.lam1 + c.h1 * (c.tb * c.wstar - c.lam2);
    const double n01 = c.d1 * c.lam2 + c.h2 * (c.tb * c.sstar - c.lam1);
    info.rd10_const = n10 / (c.tb * det);
    info.rd10_slope = c.d2 * c.sstar / det;
    info.rd01_const = n01 / (c.tb * det);
    info.rd01_slope = c.d1 * c.wstar / det;
    return info;
}

}  // namespace relnet
