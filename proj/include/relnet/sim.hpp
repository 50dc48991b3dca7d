#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "relnet/model.hpp"

namespace relnet {

// Deterministic, portable RNG: mt19937_64 outputs converted to doubles with a
// fixed mantissa rule, so identical seeds give bit-identical runs everywhere.
class SlotRng {
public:
    explicit SlotRng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }
    std::uint64_t geometric(double mean);   // Pr(A=k) = (1/(1+m))(m/(1+m))^k
    static std::uint64_t substream(std::uint64_t seed, std::uint64_t index);

private:
    std::mt19937_64 eng_;
};

enum class SimMode { two_user_asymmetric, n_user_symmetric };

struct SimConfig {
    SystemParams params;
    SuccessProbabilities probs;
    SimMode mode = SimMode::two_user_asymmetric;
    // symmetric N-user tables, index i-1 = number of transmitters i
    std::vector<double> nuser_ps_d, nuser_ps_r1, nuser_ps_r2;
    std::uint64_t horizon = 1'000'000;
    std::uint64_t warmup = 10'000;
    int replications = 1;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SimState {
    std::uint64_t n1 = 0, n2 = 0;
};

struct SlotCounters {
    std::uint64_t arrivals[2] = {0, 0};     // accepted (exogenous + endogenous)
    std::uint64_t departures[2] = {0, 0};
    std::uint64_t joint_store = 0;          // slots where both queues stored a source packet
    std::uint64_t direct_success[2] = {0, 0};
    std::uint64_t relayed_accept[2] = {0, 0};      // per source user
    std::uint64_t accepted_at[2][2] = {{0, 0}, {0, 0}};  // [user][relay]
};

// One slot of the two-user chain: sources, destination, relay decoding and
// storage, relay transmissions, then exogenous arrivals.  Channel semantics
// follow probs.channel, storage follows params.storage (capture tables always
// store duplicates, matching the delay model).
void step(SimState& st, const SystemParams& params, const SuccessProbabilities& probs,
          SlotRng& rng, SlotCounters* counters = nullptr);

struct EstimateCI {
    double value = 0.0;
    double half_width = 0.0;  // 95% confidence
};

struct SimStats {
    EstimateCI mean_queue[2];
    EstimateCI delay[2];           // Little: mean queue / accepted arrival rate
    EstimateCI pr_empty[2];        // Pr(N_i = 0)
    EstimateCI pr_both_empty;
    EstimateCI arrival_rate[2];
    EstimateCI throughput_direct[2];
    EstimateCI throughput_relayed[2];
    EstimateCI throughput_total[2];
    double drift_slope[2] = {0, 0};  // packets/slot over the second half
    bool unstable = false;           // max drift slope > 1e-3
    bool conservation_ok = true;     // arrivals = departures + final queue, each replication
    std::uint64_t slots_counted = 0;
};

SimStats run(const SimConfig& config);

// Scales lambda_hat along the given direction and bisects the drift-based
// stable/unstable classification; returns the boundary radius.
double region_probe(const SimConfig& config, double dir1, double dir2);

}  // namespace relnet
