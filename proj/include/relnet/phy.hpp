#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace relnet {

// Channel semantics for a success-probability table.
//
// mpr:     receivers decode concurrent packets independently (general MPR,
//          used by the throughput/stability formulas).
// capture: at most one packet per receiver per slot; joint "decoded both"
//          mass from independent fades is split equally between the two
//          "decoded one" outcomes (used by the delay model).
enum class ChannelModel { mpr, capture };

struct Interferer {
    double tx_power_w;
    double distance_m;
};

struct LinkSpec {
    double tx_power_w = 0.0;
    double distance_m = 0.0;
    double pathloss_exponent = 4.0;
    std::vector<Interferer> interferers;
};

struct PhyEnvironment {
    double noise_power_w = 0.0;
    double sinr_threshold = 0.0;
};

struct PhyGeometry {
    double user_tx_power_w = 1e-3;
    double relay_tx_power_w = 1e-2;
    double user_dest_distance_m = 110.0;
    double user_relay_distance_m = 80.0;
    double relay_dest_distance_m = 80.0;
    double pathloss_exponent = 4.0;
    // Entries whose active set contains an interferer are computed in the
    // interference-limited regime (noise dropped) for the relay->D pair;
    // this is what reproduces the published probability table.
    bool interference_limited_relay_pair = true;
};

// Every reception probability the two-user model consumes.  Index [k][i] is
// user k's packet at relay R_i (0-based).  In capture tables the both-transmit
// destination and per-relay entries satisfy the capture normalisations
//   ps_d_both[0] + ps_d_both[1] + ps_d_none = 1
//   ps_r_bothfail[0][i] + ps_r_bothfail[1][i] + ps_r_bothfail_none[i] = 1.
struct SuccessProbabilities {
    double ps_d_only[2] = {0, 0};        // P_s(k,D,{k})
    double ps_d_both[2] = {0, 0};        // P_s(k,D,{1,2})
    double ps_d_none = 1.0;              // Pbar_s(0,D,{1,2})
    double ps_r_single[2][2] = {{0, 0}, {0, 0}};    // P_s(k,R_i,{k})
    double ps_r_bothfail[2][2] = {{0, 0}, {0, 0}};  // P_s(k,R_i,{1,2})
    double ps_r_bothfail_none[2] = {1, 1};          // Pbar_s(0,R_i,{1,2})
    double ps_r_capture[2][2] = {{0, 0}, {0, 0}};   // P_{s,k}(k,R_i,{1,2})
    double ps_rd_single[2] = {0, 0};     // P_s(R_i,D,{R_i})
    double ps_rd_alone[2] = {0, 0};      // P*_s(R_i,D,{R_i})
    double ps_rd_both[2] = {0, 0};       // P_s(R_i,D,{R_1,R_2})
    ChannelModel channel = ChannelModel::mpr;

    // Swaps user and relay labels 1 <-> 2.
    SuccessProbabilities swapped() const;

    // Builds a capture-model table from the symmetric notation of the
    // closed-form delay analysis: q, q~, r, s-bar, s~, s_12.  The
    // both-transmit relay decode mass r is split evenly between the two
    // packets; q~ appears once per user.
    static SuccessProbabilities symmetric_capture(double q, double q_tilde, double r,
                                                  double s_bar, double s_tilde, double s12);

    void validate() const;
};

// P(SINR >= threshold) for a Rayleigh-faded link with independent Rayleigh
// interferers:
//   p = exp(-g nu d^a / P) * prod_j 1 / (1 + g (P_j d_j^-a) / (P d^-a)).
double rayleigh_success(const LinkSpec& link, const PhyEnvironment& env);

// Closed-form inversion nu = -ln(target) P / (g d^a) for an interferer-free
// link; rayleigh_success(link, {nu, g}) == target.
double calibrate_noise(double target, const LinkSpec& link, double sinr_threshold);

// Populates the full matrix from the symmetric two-user geometry.  Noise is a
// single global scalar, calibrated by the caller (see calibrate_noise).  The
// relay->D pair entries are interference-limited when the geometry says so.
SuccessProbabilities build_success_matrix(const PhyGeometry& geom, const PhyEnvironment& env,
                                          ChannelModel channel);

}  // namespace relnet
