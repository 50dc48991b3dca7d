#pragma once

// Shared helpers for the test suites: canonical parameter sets and a random
// generator of stable capture-channel configurations.

#include <optional>
#include <random>

#include "relnet/analysis.hpp"
#include "relnet/kernel.hpp"
#include "relnet/model.hpp"

namespace relnet::testutil {

// |x|^2 - chat(y)/ahat(y) at the contour point's own preimage y = Y0(x); the
// branch-correct form of the contour modulus relation.
inline double contour_relation_defect(const KernelPolynomials& k, cplx x) {
    const cplx y = root_Y0(k, x);
    return std::abs(std::norm(x) - (k.eval_ch(y) / k.eval_ah(y)).real());
}

inline SuccessProbabilities sym_capture_probs(double q = 0.5, double qt = 0.2, double r = 0.9,
                                              double sb = 0.8, double st = 0.9, double s12 = 0.4) {
    return SuccessProbabilities::symmetric_capture(q, qt, r, sb, st, s12);
}

inline SystemParams sym_params(double t = 0.1, double a = 0.7, double as = 1.0, double lh = 0.1) {
    SystemParams p;
    p.t1 = p.t2 = t;
    p.alpha1 = p.alpha2 = a;
    p.alpha1_star = p.alpha2_star = as;
    p.lambda_hat1 = p.lambda_hat2 = lh;
    p.pa[0][0] = p.pa[0][1] = 0.5;
    p.pa[1][0] = p.pa[1][1] = 0.5;
    p.storage = StorageMode::duplicate;
    return p;
}

// The asymmetric capture example: alpha1=0.7 alpha2=0.6 alpha*=0.9 P*=0.9
// P=0.8 P(pair)=0.4, t1=0.2 t2=0.3; exogenous-only relay traffic.
inline SuccessProbabilities asym_example_probs() {
    SuccessProbabilities s;
    s.channel = ChannelModel::capture;
    for (int k = 0; k < 2; ++k) {
        s.ps_d_only[k] = 0.5;
        s.ps_d_both[k] = 0.2;
    }
    s.ps_d_none = 0.6;
    for (int i = 0; i < 2; ++i) {
        s.ps_rd_single[i] = 0.8;
        s.ps_rd_alone[i] = 0.9;
        s.ps_rd_both[i] = 0.4;
        s.ps_r_bothfail_none[i] = 1.0;
    }
    return s;
}

inline SystemParams asym_example_params(double lh1 = 0.10, double lh2 = 0.08) {
    SystemParams p;
    p.t1 = 0.2;
    p.t2 = 0.3;
    p.alpha1 = 0.7;
    p.alpha2 = 0.6;
    p.alpha1_star = 0.9;
    p.alpha2_star = 0.9;
    p.lambda_hat1 = lh1;
    p.lambda_hat2 = lh2;
    p.storage = StorageMode::duplicate;
    return p;
}

struct RandomSet {
    SystemParams params;
    SuccessProbabilities probs;
    DerivedCoefficients coeffs;
};

// Random capture-channel configuration inside the stability region and the
// index-zero regime (both sloped and both box constraints, margin kept).
inline std::optional<RandomSet> try_random_stable_set(std::mt19937_64& rng,
                                                      bool require_rh_case = true) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RandomSet out;
    SystemParams& p = out.params;
    p.t1 = 0.03 + 0.3 * u(rng);
    p.t2 = 0.03 + 0.3 * u(rng);
    p.alpha1 = 0.25 + 0.65 * u(rng);
    p.alpha2 = 0.25 + 0.65 * u(rng);
    p.alpha1_star = std::min(1.0, p.alpha1 + 0.02 + 0.5 * u(rng));
    p.alpha2_star = std::min(1.0, p.alpha2 + 0.02 + 0.5 * u(rng));
    p.lambda_hat1 = 0.01 + 0.1 * u(rng);
    p.lambda_hat2 = 0.01 + 0.1 * u(rng);
    p.storage = StorageMode::duplicate;

    SuccessProbabilities& s = out.probs;
    s.channel = ChannelModel::capture;
    const double q1 = 0.2 + 0.6 * u(rng), q2 = 0.2 + 0.6 * u(rng);
    const double qt1 = 0.03 + 0.4 * u(rng);
    const double qt2 = 0.03 + std::min(0.4, 0.9 - qt1) * u(rng);
    const double r1 = 0.1 + 0.8 * u(rng), r2 = 0.1 + 0.8 * u(rng);
    const double sb1 = 0.45 + 0.5 * u(rng), sb2 = 0.45 + 0.5 * u(rng);
    const double st1 = std::min(1.0, sb1 + 0.3 * u(rng));
    const double st2 = std::min(1.0, sb2 + 0.3 * u(rng));
    const double cap = std::min(0.49, std::min(sb1, sb2) - 0.03);
    if (cap <= 0.06) return std::nullopt;
    const double s12a = 0.05 + (cap - 0.05) * u(rng);
    const double s12b = 0.05 + (cap - 0.05) * u(rng);
    s.ps_d_only[0] = q1;
    s.ps_d_only[1] = q2;
    s.ps_d_both[0] = qt1;
    s.ps_d_both[1] = qt2;
    s.ps_d_none = 1.0 - qt1 - qt2;
    for (int i = 0; i < 2; ++i) {
        s.ps_r_single[0][i] = r1;
        s.ps_r_single[1][i] = r2;
        s.ps_r_bothfail[0][i] = 0.5 * r1;
        s.ps_r_bothfail[1][i] = 0.5 * r2;
        s.ps_r_bothfail_none[i] = 1.0 - 0.5 * r1 - 0.5 * r2;
        if (s.ps_r_bothfail_none[i] < 0.0) return std::nullopt;
        s.ps_r_capture[0][i] = r1;
        s.ps_r_capture[1][i] = r2;
    }
    s.ps_rd_single[0] = sb1;
    s.ps_rd_single[1] = sb2;
    s.ps_rd_alone[0] = st1;
    s.ps_rd_alone[1] = st2;
    s.ps_rd_both[0] = s12a;
    s.ps_rd_both[1] = s12b;
    if (s12a + s12b > 1.0) return std::nullopt;

    out.coeffs = derive_coefficients(p, s);
    const DerivedCoefficients& c = out.coeffs;
    if (require_rh_case && std::abs(c.sigma - 1.0) < 1e-3) return std::nullopt;
    const double margin = 0.97;
    if (!(c.lam1 < margin * c.tb * c.h1 && c.lam2 < margin * c.tb * c.h2)) return std::nullopt;
    if (!(c.lam1 < margin * c.tb * (c.sstar + c.d1 * c.lam2 / (c.tb * c.h2)))) return std::nullopt;
    if (!(c.lam2 < margin * c.tb * (c.wstar + c.d2 * c.lam1 / (c.tb * c.h1)))) return std::nullopt;
    return out;
}

inline RandomSet random_stable_set(std::mt19937_64& rng, bool require_rh_case = true) {
    for (int i = 0; i < 10000; ++i) {
        auto s = try_random_stable_set(rng, require_rh_case);
        if (s) return *s;
    }
    throw std::runtime_error("could not sample a stable configuration");
}

}  // namespace relnet::testutil
