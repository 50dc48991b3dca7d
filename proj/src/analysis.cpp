#include "relnet/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace relnet {

namespace {

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double v = 1.0;
    for (int i = 1; i <= k; ++i) v = v * double(n - k + i) / double(i);
    return v;
}

}  // namespace

bool StabilityRegion::contains_sub1(double lam1, double lam2) const {
    if (B2 <= 0.0) return false;
    return lam2 < B2 && lam1 < A1 - lam2 * (A1 - A2) / B2;
}

bool StabilityRegion::contains_sub2(double lam1, double lam2) const {
    if (A2 <= 0.0) return false;
    return lam1 < A2 && lam2 < B1 - lam1 * (B1 - B2) / A2;
}

double StabilityRegion::boundary_radius(double dir1, double dir2) const {
    if (dir1 < 0.0 || dir2 < 0.0 || (dir1 == 0.0 && dir2 == 0.0))
        throw std::domain_error("direction must be nonnegative and nonzero");
    const double n = std::hypot(dir1, dir2);
    const double u1 = dir1 / n, u2 = dir2 / n;
    double lo = 0.0, hi = std::max({A1, B1, 1.0});
    while (contains(hi * u1, hi * u2)) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (contains(mid * u1, mid * u2)) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<std::pair<double, double>> StabilityRegion::polygon() const {
    if (convex && A2 / A1 + B2 / B1 <= 1.0 + 1e-12) {
        // triangle (time-sharing) case
        return {{0, 0}, {A1, 0}, {0, B1}};
    }
    return {{0, 0}, {A1, 0}, {A2, B2}, {0, B1}};
}

StabilityRegion stability_region_two_user(const DerivedCoefficients& c) {
    StabilityRegion r;
    r.A1 = c.tb * c.sstar;
    r.A2 = c.tb * c.h1;  // tb a1 (a2 D1 + P_1) = tb a1 hatalpha2
    r.B1 = c.tb * c.wstar;
    r.B2 = c.tb * c.h2;
    r.convex = is_convex(c);
    return r;
}

bool is_convex(const DerivedCoefficients& c) {
    return c.h1 / c.sstar + c.h2 / c.wstar >= 1.0;
}

ThroughputReport throughput_two_user(const SystemParams& p, const SuccessProbabilities& s) {
    p.validate();
    ThroughputReport rep;
    const double t1 = p.t1, t2 = p.t2;
    const double t1o = t1 * (1.0 - t2), t2o = t2 * (1.0 - t1), tb2 = t1 * t2;
    rep.T1_D = t1o * s.ps_d_only[0] + tb2 * s.ps_d_both[0];
    rep.T2_D = t2o * s.ps_d_only[1] + tb2 * s.ps_d_both[1];
    auto relayed = [&](int u) {
        const double to = (u == 0) ? t1o : t2o;
        const double qb = 1.0 - s.ps_d_only[u];
        const double fb = 1.0 - s.ps_d_both[u];
        const double r1 = s.ps_r_single[u][0], r2 = s.ps_r_single[u][1];
        const double b1 = s.ps_r_bothfail[u][0], b2 = s.ps_r_bothfail[u][1];
        return to * qb * (r1 * (1.0 - r2) + (1.0 - r1) * r2 + r1 * r2) +
               tb2 * fb * (b1 * (1.0 - b2) + (1.0 - b1) * b2 + b1 * b2);
    };
    rep.T1_R = relayed(0);
    rep.T2_R = relayed(1);
    rep.T1 = rep.T1_D + rep.T1_R;
    rep.T2 = rep.T2_D + rep.T2_R;
    rep.T_aggregate = rep.T1 + rep.T2 + p.lambda_hat1 + p.lambda_hat2;

    const auto lam = endogenous_arrivals_two_user(p, s, ArrivalConvention::stability_section);
    const auto c = derive_coefficients(p, s);
    const auto region = stability_region_two_user(c);
    rep.inside_stability_region = region.contains(p.lambda_hat1 + lam[0] + lam[2],
                                                  p.lambda_hat2 + lam[1] + lam[3]);
    return rep;
}

NUserReport symmetric_n_user(const NUserInputs& in) {
    const int N = in.n_users;
    if (N < 1) throw std::domain_error("n_users must be >= 1");
    if (int(in.ps_d.size()) < N || int(in.ps_r1.size()) < N || int(in.ps_r2.size()) < N)
        throw std::domain_error("need P_s(D,i), P_s(R_j,i) for i = 1..N");
    const double t = in.t;
    NUserReport rep;
    rep.r_k1.assign(std::size_t(N), 0.0);
    rep.r_k2.assign(std::size_t(N), 0.0);
    for (int i = 1; i <= N; ++i) {
        rep.T_D += binom(N - 1, i - 1) * std::pow(t, i) * std::pow(1.0 - t, N - i) *
                   in.ps_d[std::size_t(i - 1)];
    }
    auto arrivals = [&](const std::vector<double>& pr_self, const std::vector<double>& pr_other,
                        double pa, std::vector<double>& rk) {
        double lam = 0.0;
        for (int i = 1; i <= N; ++i) {
            const double w = binom(N, i) * std::pow(t, i) * std::pow(1.0 - t, N - i);
            const double pd = in.ps_d[std::size_t(i - 1)];
            const double pr = pr_self[std::size_t(i - 1)];
            const double po = pr_other[std::size_t(i - 1)];
            const double cand = (1.0 - pd) * pr;             // failed at D, decoded here
            const double keep = (1.0 - po) + po * pa;        // not at other relay, or kept
            const double admit = cand * keep;
            const double miss = (in.arrivals == NUserArrivalModel::paper_series)
                                    ? 1.0 - cand
                                    : 1.0 - admit;
            for (int k = 1; k <= i; ++k) {
                const double pk = binom(i, k) * std::pow(admit, k) * std::pow(miss, i - k);
                rk[std::size_t(k - 1)] += w * pk;
                lam += w * double(k) * pk;
            }
        }
        return lam;
    };
    rep.lam_1u = arrivals(in.ps_r1, in.ps_r2, in.pa1, rep.r_k1);
    rep.lam_2u = arrivals(in.ps_r2, in.ps_r1, in.pa2, rep.r_k2);
    rep.per_user_total = rep.T_D + (rep.lam_1u + rep.lam_2u) / double(N);
    rep.aggregate = double(N) * rep.T_D + rep.lam_1u + rep.lam_2u + in.relay.lambda_hat1 +
                    in.relay.lambda_hat2;

    // region with t1bar t2bar replaced by (1-t)^N
    SystemParams rp = in.relay;
    rp.n_users = 2;
    auto c = derive_coefficients(rp, in.relay_probs);
    const double tbN = std::pow(1.0 - t, N);
    c.tb = tbN;
    rep.region = stability_region_two_user(c);
    rep.relays_stable = rep.region.contains(in.relay.lambda_hat1 + rep.lam_1u,
                                            in.relay.lambda_hat2 + rep.lam_2u);
    return rep;
}

SymmetricDelay symmetric_delay_closed_form(const SymmetricParams& p) {
    if (p.s_tilde < p.s_bar || p.s_bar < p.s12)
        throw std::domain_error("need s~ >= s_bar >= s12");
    if (p.alpha_star < p.alpha) throw std::domain_error("need alpha* >= alpha");
    SymmetricDelay out;
    const double tbar = 1.0 - p.t, qbar = 1.0 - p.q;
    const double halpha = (1.0 - p.alpha) * p.s_bar + p.alpha * p.s12;
    const double aha = p.alpha * halpha;
    const double d = aha - p.alpha_star * p.s_tilde;
    const double L = p.t * (p.t + 2.0 * tbar * qbar);  // blocked-transmission mass
    out.lambda = p.lambda_hat + L * p.r;
    out.service = tbar * tbar * aha;
    if (out.service <= out.lambda)
        throw std::domain_error("unstable symmetric configuration: tbar^2 a ha <= lambda");
    const double num = p.lambda_hat * p.lambda_hat * d + 2.0 * p.lambda_hat * aha +
                       L * p.r * (2.0 * aha - p.r * d);
    out.E = num / (2.0 * p.alpha_star * p.s_tilde * (out.service - out.lambda));
    out.D = (out.lambda > 0.0) ? out.E / out.lambda : 0.0;
    return out;
}

}  // namespace relnet
