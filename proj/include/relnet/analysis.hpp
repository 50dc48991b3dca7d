#pragma once

#include <optional>
#include <vector>

#include "relnet/model.hpp"

namespace relnet {

// R = R1 u R2, each sub-region a sloped constraint plus a box constraint.
// Corner values:
//   A1 = tb a1* P*_1           A2 = tb a1 (a2 D1 + P_1)
//   B1 = tb a2* P*_2           B2 = tb a2 (a1 D2 + P_2)
struct StabilityRegion {
    double A1 = 0, A2 = 0, B1 = 0, B2 = 0;
    bool convex = false;

    // sub-region 1: lam1 < A1 - lam2 (A1 - A2)/B2,  lam2 < B2
    bool contains_sub1(double lam1, double lam2) const;
    // sub-region 2: lam2 < B1 - lam1 (B1 - B2)/A2,  lam1 < A2
    bool contains_sub2(double lam1, double lam2) const;
    bool contains(double lam1, double lam2) const {
        return contains_sub1(lam1, lam2) || contains_sub2(lam1, lam2);
    }
    // Outer boundary radius along a direction (unit not required); the
    // largest s with s*(d1,d2) inside the closure of R.
    double boundary_radius(double dir1, double dir2) const;
    // Vertices of the closed region polygon, counters-clockwise from (A1,0).
    std::vector<std::pair<double, double>> polygon() const;
};

StabilityRegion stability_region_two_user(const DerivedCoefficients& c);

// Convexity condition of the union region (equality degenerates to the
// time-sharing triangle): A2/A1 + B2/B1 >= 1.
bool is_convex(const DerivedCoefficients& c);

struct ThroughputReport {
    double T1_D = 0, T1_R = 0, T1 = 0;
    double T2_D = 0, T2_R = 0, T2 = 0;
    double T_aggregate = 0;
    bool inside_stability_region = true;  // formulas are invalid outside
};

ThroughputReport throughput_two_user(const SystemParams& params,
                                     const SuccessProbabilities& probs);

// --- symmetric N-user mode -------------------------------------------------

// How the per-slot relay arrival distribution r_{k,j} is evaluated. The
// paper_series variant follows the printed series, whose complement term
// drops the candidates diverted to the other relay; per_packet_binomial uses
// the exact per-packet admission probability (consistent with the two-user
// rates for every pa and with the slot simulation).
enum class NUserArrivalModel { paper_series, per_packet_binomial };

struct NUserInputs {
    int n_users = 1;
    double t = 0.0;
    std::vector<double> ps_d;   // P_s(D,i), i = 1..N transmitters
    std::vector<double> ps_r1;  // P_s(R_1,i)
    std::vector<double> ps_r2;  // P_s(R_2,i)
    double pa1 = 0.5, pa2 = 0.5;
    // relay-side parameters for the region
    SystemParams relay;         // alpha/alpha*/lambda_hat fields are used
    SuccessProbabilities relay_probs;  // ps_rd_* entries are used
    NUserArrivalModel arrivals = NUserArrivalModel::paper_series;
};

struct NUserReport {
    double T_D = 0;                     // direct throughput per user
    std::vector<double> r_k1, r_k2;     // arrival batch distribution, k = 1..N
    double lam_1u = 0, lam_2u = 0;      // endogenous arrival rates
    double per_user_total = 0;          // T_D + (lam_1u + lam_2u)/N
    double aggregate = 0;               // N T_D + lam_1u + lam_2u + lhat1 + lhat2
    StabilityRegion region;             // with tb = (1-t)^N
    bool relays_stable = false;         // (lam_hat + lam_u) inside region
};

NUserReport symmetric_n_user(const NUserInputs& in);

// --- symmetric closed-form delay --------------------------------------------

struct SymmetricParams {
    double lambda_hat = 0;
    double t = 0;
    double alpha = 0, alpha_star = 0;
    double q = 0;       // P_s(k,D,{k})
    double r = 0;       // relay reception probability of a blocked packet
    double s_bar = 0;   // P_s(R_i,D,{R_i})
    double s_tilde = 0; // P*_s(R_i,D,{R_i})
    double s12 = 0;     // P_s(R_i,D,{R_1,R_2})
};

struct SymmetricDelay {
    double E = 0;       // mean relay queue length (packets)
    double D = 0;       // mean delay (slots)
    double lambda = 0;  // total arrival rate per relay
    double service = 0; // tbar^2 alpha halpha
};

// Closed form for the symmetric capture-channel system; throws
// std::domain_error when the stability condition tbar^2 a ha > lambda fails.
SymmetricDelay symmetric_delay_closed_form(const SymmetricParams& p);

}  // namespace relnet
