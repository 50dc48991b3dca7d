#include "relnet/phy.hpp"

#include <algorithm>
#include <cmath>

namespace relnet {

namespace {

void check_link(const LinkSpec& link) {
    if (link.tx_power_w <= 0.0) throw std::domain_error("link tx power must be > 0");
    if (link.distance_m <= 0.0) throw std::domain_error("link distance must be > 0");
    if (link.pathloss_exponent <= 0.0) throw std::domain_error("pathloss exponent must be > 0");
    for (const auto& j : link.interferers) {
        if (j.tx_power_w <= 0.0 || j.distance_m <= 0.0)
            throw std::domain_error("interferer power/distance must be > 0");
    }
}

// Splits the independent joint law of two decode events into a capture law:
// "both" mass goes half to each single-decode outcome.
struct CaptureSplit {
    double only_a, only_b, none;
};

CaptureSplit capture_split(double pa, double pb) {
    const double both = pa * pb;
    return {pa * (1.0 - pb) + 0.5 * both, pb * (1.0 - pa) + 0.5 * both, (1.0 - pa) * (1.0 - pb)};
}

}  // namespace

double rayleigh_success(const LinkSpec& link, const PhyEnvironment& env) {
    check_link(link);
    if (env.noise_power_w < 0.0) throw std::domain_error("noise power must be >= 0");
    if (env.sinr_threshold < 0.0) throw std::domain_error("sinr threshold must be >= 0");
    const double g = env.sinr_threshold;
    const double a = link.pathloss_exponent;
    const double rx = link.tx_power_w * std::pow(link.distance_m, -a);
    double p = std::exp(-g * env.noise_power_w / rx);
    for (const auto& j : link.interferers) {
        const double rxj = j.tx_power_w * std::pow(j.distance_m, -a);
        p /= 1.0 + g * rxj / rx;
    }
    return p;
}

double calibrate_noise(double target, const LinkSpec& link, double sinr_threshold) {
    check_link(link);
    if (!(target > 0.0 && target < 1.0)) throw std::domain_error("calibration target must be in (0,1)");
    if (!link.interferers.empty()) throw std::domain_error("calibration link must be interferer-free");
    if (sinr_threshold <= 0.0) throw std::domain_error("sinr threshold must be > 0");
    const double rx = link.tx_power_w * std::pow(link.distance_m, -link.pathloss_exponent);
    return -std::log(target) * rx / sinr_threshold;
}

SuccessProbabilities SuccessProbabilities::swapped() const {
    SuccessProbabilities s = *this;
    std::swap(s.ps_d_only[0], s.ps_d_only[1]);
    std::swap(s.ps_d_both[0], s.ps_d_both[1]);
    // [user][relay]: swap both indices
    for (int u = 0; u < 2; ++u)
        for (int i = 0; i < 2; ++i) {
            s.ps_r_single[u][i] = ps_r_single[1 - u][1 - i];
            s.ps_r_bothfail[u][i] = ps_r_bothfail[1 - u][1 - i];
            s.ps_r_capture[u][i] = ps_r_capture[1 - u][1 - i];
        }
    std::swap(s.ps_r_bothfail_none[0], s.ps_r_bothfail_none[1]);
    std::swap(s.ps_rd_single[0], s.ps_rd_single[1]);
    std::swap(s.ps_rd_alone[0], s.ps_rd_alone[1]);
    std::swap(s.ps_rd_both[0], s.ps_rd_both[1]);
    return s;
}

SuccessProbabilities SuccessProbabilities::symmetric_capture(double q, double q_tilde, double r,
                                                             double s_bar, double s_tilde,
                                                             double s12) {
    SuccessProbabilities s;
    s.channel = ChannelModel::capture;
    for (int k = 0; k < 2; ++k) {
        s.ps_d_only[k] = q;
        s.ps_d_both[k] = q_tilde;
        for (int i = 0; i < 2; ++i) {
            s.ps_r_single[k][i] = r;
            s.ps_r_bothfail[k][i] = 0.5 * r;
            s.ps_r_capture[k][i] = r;
        }
    }
    s.ps_d_none = 1.0 - 2.0 * q_tilde;
    s.ps_r_bothfail_none[0] = s.ps_r_bothfail_none[1] = 1.0 - r;
    for (int i = 0; i < 2; ++i) {
        s.ps_rd_single[i] = s_bar;
        s.ps_rd_alone[i] = s_tilde;
        s.ps_rd_both[i] = s12;
    }
    s.validate();
    return s;
}

void SuccessProbabilities::validate() const {
    auto in01 = [](double p) { return p >= 0.0 && p <= 1.0 + 1e-12; };
    const double* all[] = {&ps_d_only[0], &ps_d_only[1], &ps_d_both[0], &ps_d_both[1],
                           &ps_d_none,    &ps_rd_single[0], &ps_rd_single[1],
                           &ps_rd_alone[0], &ps_rd_alone[1], &ps_rd_both[0], &ps_rd_both[1]};
    for (const double* p : all)
        if (!in01(*p)) throw std::domain_error("success probability outside [0,1]");
    for (int u = 0; u < 2; ++u)
        for (int i = 0; i < 2; ++i)
            if (!in01(ps_r_single[u][i]) || !in01(ps_r_bothfail[u][i]) || !in01(ps_r_capture[u][i]))
                throw std::domain_error("success probability outside [0,1]");
    for (int i = 0; i < 2; ++i)
        if (ps_rd_alone[i] + 1e-12 < ps_rd_single[i] || ps_rd_single[i] + 1e-12 < ps_rd_both[i])
            throw std::domain_error("expected P*_s(R_i,D) >= P_s(R_i,D) >= P_s(R_i,D,{R1,R2})");
    if (channel == ChannelModel::capture) {
        const double dsum = ps_d_both[0] + ps_d_both[1] + ps_d_none;
        if (std::abs(dsum - 1.0) > 1e-9)
            throw std::domain_error("capture law at destination must sum to 1");
        for (int i = 0; i < 2; ++i) {
            const double rsum = ps_r_bothfail[0][i] + ps_r_bothfail[1][i] + ps_r_bothfail_none[i];
            if (std::abs(rsum - 1.0) > 1e-9)
                throw std::domain_error("capture law at relay must sum to 1");
        }
        if (ps_rd_both[0] + ps_rd_both[1] > 1.0 + 1e-9)
            throw std::domain_error("capture law for relay pair exceeds 1");
    }
}

SuccessProbabilities build_success_matrix(const PhyGeometry& geom, const PhyEnvironment& env,
                                          ChannelModel channel) {
    const double a = geom.pathloss_exponent;
    auto link = [&](double p, double d, std::vector<Interferer> intf = {}) {
        LinkSpec l;
        l.tx_power_w = p;
        l.distance_m = d;
        l.pathloss_exponent = a;
        l.interferers = std::move(intf);
        return l;
    };
    const Interferer other_user{geom.user_tx_power_w, geom.user_dest_distance_m};
    const Interferer other_user_at_relay{geom.user_tx_power_w, geom.user_relay_distance_m};
    const Interferer other_relay{geom.relay_tx_power_w, geom.relay_dest_distance_m};

    const double pd1 = rayleigh_success(link(geom.user_tx_power_w, geom.user_dest_distance_m), env);
    const double pd2 =
        rayleigh_success(link(geom.user_tx_power_w, geom.user_dest_distance_m, {other_user}), env);
    const double pr1 = rayleigh_success(link(geom.user_tx_power_w, geom.user_relay_distance_m), env);
    const double pr2 = rayleigh_success(
        link(geom.user_tx_power_w, geom.user_relay_distance_m, {other_user_at_relay}), env);
    const double prd = rayleigh_success(link(geom.relay_tx_power_w, geom.relay_dest_distance_m), env);
    double prd_pair;
    if (geom.interference_limited_relay_pair) {
        PhyEnvironment no_noise{0.0, env.sinr_threshold};
        prd_pair = rayleigh_success(
            link(geom.relay_tx_power_w, geom.relay_dest_distance_m, {other_relay}), no_noise);
    } else {
        prd_pair = rayleigh_success(
            link(geom.relay_tx_power_w, geom.relay_dest_distance_m, {other_relay}), env);
    }

    SuccessProbabilities s;
    s.channel = channel;
    for (int k = 0; k < 2; ++k) {
        s.ps_d_only[k] = pd1;
        for (int i = 0; i < 2; ++i) {
            s.ps_r_single[k][i] = pr1;
            s.ps_r_capture[k][i] = pr2;  // concurrent transmission: interference present
        }
    }
    if (channel == ChannelModel::capture) {
        const auto d = capture_split(pd2, pd2);
        s.ps_d_both[0] = d.only_a;
        s.ps_d_both[1] = d.only_b;
        s.ps_d_none = d.none;
        const auto r = capture_split(pr2, pr2);
        for (int i = 0; i < 2; ++i) {
            s.ps_r_bothfail[0][i] = r.only_a;
            s.ps_r_bothfail[1][i] = r.only_b;
            s.ps_r_bothfail_none[i] = r.none;
        }
        const auto rd = capture_split(prd_pair, prd_pair);
        s.ps_rd_both[0] = rd.only_a;
        s.ps_rd_both[1] = rd.only_b;
    } else {
        s.ps_d_both[0] = s.ps_d_both[1] = pd2;
        s.ps_d_none = (1.0 - pd2) * (1.0 - pd2);
        for (int i = 0; i < 2; ++i) {
            s.ps_r_bothfail[0][i] = pr2;
            s.ps_r_bothfail[1][i] = pr2;
            s.ps_r_bothfail_none[i] = (1.0 - pr2) * (1.0 - pr2);
        }
        s.ps_rd_both[0] = s.ps_rd_both[1] = prd_pair;
    }
    for (int i = 0; i < 2; ++i) {
        s.ps_rd_single[i] = prd;
        s.ps_rd_alone[i] = prd;  // same link, same power when alone
    }
    return s;
}

}  // namespace relnet
