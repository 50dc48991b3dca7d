#include "relnet/sim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

namespace relnet {

namespace {

// two-sided 97.5% Student quantiles, df = 1..30
constexpr double kT975[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                            2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                            2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                            2.060,  2.056, 2.052, 2.048, 2.045, 2.042};

double t975(int df) {
    if (df < 1) return 0.0;
    if (df <= 30) return kT975[df - 1];
    return 1.96;
}

struct KahanSum {
    double sum = 0.0, comp = 0.0;
    void add(double v) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

struct RepResult {
    double mean_queue[2] = {0, 0};
    double pr_empty[2] = {0, 0};
    double pr_both_empty = 0;
    double arrival_rate[2] = {0, 0};
    double delay[2] = {0, 0};
    double direct[2] = {0, 0};
    double relayed[2] = {0, 0};
    double drift_slope[2] = {0, 0};
    bool conservation_ok = true;
};

}  // namespace

std::uint64_t SlotRng::geometric(double mean) {
    if (mean <= 0.0) return 0;
    const double p = mean / (1.0 + mean);   // Pr(A=k) = (1-p) p^k
    const double u = uniform();
    if (u <= 0.0) return 0;
    return std::uint64_t(std::floor(std::log1p(-u) / std::log(p)));
}

std::uint64_t SlotRng::substream(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 over seed + index
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

void SimConfig::validate() const {
    params.validate();
    if (horizon <= warmup) throw std::domain_error("horizon must exceed warmup");
    if (replications < 1) throw std::domain_error("replications must be >= 1");
    if (mode == SimMode::n_user_symmetric) {
        const std::size_t n = std::size_t(params.n_users);
        if (nuser_ps_d.size() < n || nuser_ps_r1.size() < n || nuser_ps_r2.size() < n)
            throw std::domain_error("n-user tables must cover 1..N transmitters");
    }
}

void step(SimState& st, const SystemParams& p, const SuccessProbabilities& s, SlotRng& rng,
          SlotCounters* counters) {
    const bool capture = s.channel == ChannelModel::capture;
    bool store1 = false, store2 = false;  // a source packet enters R1/R2 this slot
    std::uint64_t inc1 = 0, inc2 = 0;
    const bool tx1 = rng.uniform() < p.t1;
    const bool tx2 = rng.uniform() < p.t2;

    auto accept = [&](int user, int relay) {
        if (relay == 0) {
            ++inc1;
            store1 = true;
        } else {
            ++inc2;
            store2 = true;
        }
        if (counters) {
            ++counters->relayed_accept[user];
            ++counters->accepted_at[user][relay];
        }
    };
    // single decoded packet of `user`: relay decode draws d1/d2, storage rules
    auto store_single_tx = [&](int user) {
        const bool dec1 = rng.uniform() < s.ps_r_single[user][0];
        const bool dec2 = rng.uniform() < s.ps_r_single[user][1];
        if (capture || p.storage == StorageMode::duplicate) {
            if (dec1) accept(user, 0);
            if (dec2) accept(user, 1);
        } else {
            if (dec1 && dec2) {
                const double u = rng.uniform();
                if (u < p.pa[user][0]) accept(user, 0);
                else if (u < p.pa[user][0] + p.pa[user][1]) accept(user, 1);
                // otherwise lost (stability-mode semantics)
            } else if (dec1) {
                accept(user, 0);
            } else if (dec2) {
                accept(user, 1);
            }
        }
    };

    if (tx1 || tx2) {
        if (tx1 && tx2) {
            if (capture) {
                const double u = rng.uniform();
                int winner = -1;
                if (u < s.ps_d_both[0]) winner = 0;
                else if (u < s.ps_d_both[0] + s.ps_d_both[1]) winner = 1;
                if (winner >= 0 && counters) ++counters->direct_success[winner];
                if (winner < 0) {
                    // both failed: each relay captures at most one packet
                    for (int i = 0; i < 2; ++i) {
                        const double v = rng.uniform();
                        if (v < s.ps_r_bothfail[0][i]) accept(0, i);
                        else if (v < s.ps_r_bothfail[0][i] + s.ps_r_bothfail[1][i]) accept(1, i);
                    }
                } else {
                    const int loser = 1 - winner;
                    for (int i = 0; i < 2; ++i)
                        if (rng.uniform() < s.ps_r_capture[loser][i]) accept(loser, i);
                }
            } else {
                // general MPR: independent destination decoding
                const bool ok1 = rng.uniform() < s.ps_d_both[0];
                const bool ok2 = rng.uniform() < s.ps_d_both[1];
                if (counters) {
                    if (ok1) ++counters->direct_success[0];
                    if (ok2) ++counters->direct_success[1];
                }
                auto store_bothtx = [&](int user) {
                    const bool dec1 = rng.uniform() < s.ps_r_bothfail[user][0];
                    const bool dec2 = rng.uniform() < s.ps_r_bothfail[user][1];
                    if (p.storage == StorageMode::duplicate) {
                        if (dec1) accept(user, 0);
                        if (dec2) accept(user, 1);
                    } else if (dec1 && dec2) {
                        const double u = rng.uniform();
                        if (u < p.pa[user][0]) accept(user, 0);
                        else if (u < p.pa[user][0] + p.pa[user][1]) accept(user, 1);
                    } else if (dec1) {
                        accept(user, 0);
                    } else if (dec2) {
                        accept(user, 1);
                    }
                };
                if (!ok1) store_bothtx(0);
                if (!ok2) store_bothtx(1);
            }
        } else {
            const int user = tx1 ? 0 : 1;
            if (rng.uniform() < s.ps_d_only[user]) {
                if (counters) ++counters->direct_success[user];
            } else {
                store_single_tx(user);
            }
        }
    } else {
        // relays own the slot
        const bool ne1 = st.n1 > 0, ne2 = st.n2 > 0;
        bool dep1 = false, dep2 = false;
        if (ne1 && ne2) {
            const bool rtx1 = rng.uniform() < p.alpha1;
            const bool rtx2 = rng.uniform() < p.alpha2;
            if (rtx1 && rtx2) {
                if (capture) {
                    const double u = rng.uniform();
                    if (u < s.ps_rd_both[0]) dep1 = true;
                    else if (u < s.ps_rd_both[0] + s.ps_rd_both[1]) dep2 = true;
                } else {
                    dep1 = rng.uniform() < s.ps_rd_both[0];
                    dep2 = rng.uniform() < s.ps_rd_both[1];
                }
            } else if (rtx1) {
                dep1 = rng.uniform() < s.ps_rd_single[0];
            } else if (rtx2) {
                dep2 = rng.uniform() < s.ps_rd_single[1];
            }
        } else if (ne1) {
            if (rng.uniform() < p.alpha1_star) dep1 = rng.uniform() < s.ps_rd_alone[0];
        } else if (ne2) {
            if (rng.uniform() < p.alpha2_star) dep2 = rng.uniform() < s.ps_rd_alone[1];
        }
        if (dep1) {
            --st.n1;
            if (counters) ++counters->departures[0];
        }
        if (dep2) {
            --st.n2;
            if (counters) ++counters->departures[1];
        }
    }

    const std::uint64_t a1 = rng.geometric(p.lambda_hat1);
    const std::uint64_t a2 = rng.geometric(p.lambda_hat2);
    st.n1 += inc1 + a1;
    st.n2 += inc2 + a2;
    if (counters) {
        counters->arrivals[0] += inc1 + a1;
        counters->arrivals[1] += inc2 + a2;
        if (store1 && store2) ++counters->joint_store;
    }
}

namespace {

// One slot of the symmetric N-user chain (general MPR, exclusive storage).
void step_nuser(SimState& st, const SimConfig& cfg, SlotRng& rng, SlotCounters* counters) {
    const SystemParams& p = cfg.params;
    const int N = p.n_users;
    int transmitters = 0;
    for (int u = 0; u < N; ++u)
        if (rng.uniform() < p.t1) ++transmitters;
    std::uint64_t inc1 = 0, inc2 = 0;
    if (transmitters > 0) {
        const std::size_t i = std::size_t(transmitters - 1);
        const double pd = cfg.nuser_ps_d[i];
        const double pr1 = cfg.nuser_ps_r1[i];
        const double pr2 = cfg.nuser_ps_r2[i];
        for (int m = 0; m < transmitters; ++m) {
            if (rng.uniform() < pd) {
                if (counters) ++counters->direct_success[0];
                continue;
            }
            const bool dec1 = rng.uniform() < pr1;
            const bool dec2 = rng.uniform() < pr2;
            if (dec1 && dec2) {
                const double u = rng.uniform();
                if (u < p.pa[0][0]) ++inc1;
                else if (u < p.pa[0][0] + p.pa[0][1]) ++inc2;
            } else if (dec1) {
                ++inc1;
            } else if (dec2) {
                ++inc2;
            }
        }
    } else {
        const bool ne1 = st.n1 > 0, ne2 = st.n2 > 0;
        bool dep1 = false, dep2 = false;
        const SuccessProbabilities& s = cfg.probs;
        if (ne1 && ne2) {
            const bool rtx1 = rng.uniform() < p.alpha1;
            const bool rtx2 = rng.uniform() < p.alpha2;
            if (rtx1 && rtx2) {
                dep1 = rng.uniform() < s.ps_rd_both[0];
                dep2 = rng.uniform() < s.ps_rd_both[1];
            } else if (rtx1) {
                dep1 = rng.uniform() < s.ps_rd_single[0];
            } else if (rtx2) {
                dep2 = rng.uniform() < s.ps_rd_single[1];
            }
        } else if (ne1) {
            if (rng.uniform() < p.alpha1_star) dep1 = rng.uniform() < s.ps_rd_alone[0];
        } else if (ne2) {
            if (rng.uniform() < p.alpha2_star) dep2 = rng.uniform() < s.ps_rd_alone[1];
        }
        if (dep1) {
            --st.n1;
            if (counters) ++counters->departures[0];
        }
        if (dep2) {
            --st.n2;
            if (counters) ++counters->departures[1];
        }
    }
    const std::uint64_t a1 = rng.geometric(p.lambda_hat1);
    const std::uint64_t a2 = rng.geometric(p.lambda_hat2);
    st.n1 += inc1 + a1;
    st.n2 += inc2 + a2;
    if (counters) {
        counters->arrivals[0] += inc1 + a1;
        counters->arrivals[1] += inc2 + a2;
        if (inc1 > 0 && inc2 > 0) ++counters->joint_store;
        counters->relayed_accept[0] += inc1 + inc2;
    }
}

RepResult run_replication(const SimConfig& cfg, std::uint64_t seed) {
    SlotRng rng(seed);
    SimState st;
    SlotCounters counters;
    const std::uint64_t measured = cfg.horizon - cfg.warmup;
    KahanSum sumN[2];
    std::uint64_t empty[2] = {0, 0}, both_empty = 0;
    // least-squares accumulators over the second half of the measured window
    const std::uint64_t half_start = cfg.warmup + measured / 2;
    double sw = 0, sww = 0;
    KahanSum swn[2];
    KahanSum sn_half[2];
    std::uint64_t nhalf = 0;

    SimState warm_state;
    for (std::uint64_t slot = 0; slot < cfg.horizon; ++slot) {
        if (slot == cfg.warmup) {
            counters = SlotCounters{};
            warm_state = st;
        }
        if (slot >= cfg.warmup) {
            sumN[0].add(double(st.n1));
            sumN[1].add(double(st.n2));
            empty[0] += (st.n1 == 0);
            empty[1] += (st.n2 == 0);
            both_empty += (st.n1 == 0 && st.n2 == 0);
            if (slot >= half_start) {
                const double w = double(slot - half_start);
                sw += w;
                sww += w * w;
                swn[0].add(w * double(st.n1));
                swn[1].add(w * double(st.n2));
                sn_half[0].add(double(st.n1));
                sn_half[1].add(double(st.n2));
                ++nhalf;
            }
        }
        if (cfg.mode == SimMode::n_user_symmetric)
            step_nuser(st, cfg, rng, slot >= cfg.warmup ? &counters : nullptr);
        else
            step(st, cfg.params, cfg.probs, rng, slot >= cfg.warmup ? &counters : nullptr);
    }

    RepResult r;
    const double n = double(measured);
    for (int i = 0; i < 2; ++i) {
        r.mean_queue[i] = sumN[i].sum / n;
        r.pr_empty[i] = double(empty[i]) / n;
        r.arrival_rate[i] = double(counters.arrivals[i]) / n;
        r.delay[i] = r.arrival_rate[i] > 0.0 ? r.mean_queue[i] / r.arrival_rate[i]
                                             : std::nan("");
        const double denom = double(nhalf) * sww - sw * sw;
        r.drift_slope[i] =
            denom > 0.0 ? (double(nhalf) * swn[i].sum - sw * sn_half[i].sum) / denom : 0.0;
    }
    r.pr_both_empty = double(both_empty) / n;
    const double nu = (cfg.mode == SimMode::n_user_symmetric) ? double(cfg.params.n_users) : 1.0;
    r.direct[0] = double(counters.direct_success[0]) / n / nu;
    r.direct[1] = double(counters.direct_success[1]) / n;
    r.relayed[0] = double(counters.relayed_accept[0]) / n / nu;
    r.relayed[1] = double(counters.relayed_accept[1]) / n;
    // exact integer identity per queue over the measured window:
    // content(warmup) + arrivals = departures + content(end)
    r.conservation_ok =
        warm_state.n1 + counters.arrivals[0] == counters.departures[0] + st.n1 &&
        warm_state.n2 + counters.arrivals[1] == counters.departures[1] + st.n2;
    return r;
}

EstimateCI combine(const std::vector<double>& xs) {
    EstimateCI e;
    KahanSum s;
    int n = 0;
    for (double v : xs)
        if (!std::isnan(v)) {
            s.add(v);
            ++n;
        }
    if (n == 0) {
        e.value = std::nan("");
        return e;
    }
    e.value = s.sum / n;
    if (n >= 2) {
        KahanSum q;
        for (double v : xs)
            if (!std::isnan(v)) q.add((v - e.value) * (v - e.value));
        const double sd = std::sqrt(q.sum / (n - 1));
        e.half_width = t975(n - 1) * sd / std::sqrt(double(n));
    }
    return e;
}

}  // namespace

SimStats run(const SimConfig& cfg) {
    cfg.validate();
    const int R = cfg.replications;
    std::vector<RepResult> reps(static_cast<std::size_t>(R));
    std::vector<std::future<RepResult>> futs;
    futs.reserve(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r) {
        const std::uint64_t s = SlotRng::substream(cfg.seed, std::uint64_t(r));
        futs.push_back(std::async(std::launch::async, [&cfg, s] { return run_replication(cfg, s); }));
    }
    for (int r = 0; r < R; ++r) reps[std::size_t(r)] = futs[std::size_t(r)].get();

    SimStats out;
    auto gather = [&](auto&& get) {
        std::vector<double> xs(static_cast<std::size_t>(R));
        for (int r = 0; r < R; ++r) xs[std::size_t(r)] = get(reps[std::size_t(r)]);
        return combine(xs);
    };
    for (int i = 0; i < 2; ++i) {
        out.mean_queue[i] = gather([i](const RepResult& r) { return r.mean_queue[i]; });
        out.delay[i] = gather([i](const RepResult& r) { return r.delay[i]; });
        out.pr_empty[i] = gather([i](const RepResult& r) { return r.pr_empty[i]; });
        out.arrival_rate[i] = gather([i](const RepResult& r) { return r.arrival_rate[i]; });
        out.throughput_direct[i] = gather([i](const RepResult& r) { return r.direct[i]; });
        out.throughput_relayed[i] = gather([i](const RepResult& r) { return r.relayed[i]; });
        out.throughput_total[i] = EstimateCI{
            out.throughput_direct[i].value + out.throughput_relayed[i].value,
            out.throughput_direct[i].half_width + out.throughput_relayed[i].half_width};
        double worst = 0.0;
        for (const auto& r : reps) worst = std::max(worst, r.drift_slope[i]);
        out.drift_slope[i] = worst;
    }
    out.pr_both_empty = gather([](const RepResult& r) { return r.pr_both_empty; });
    out.unstable = std::max(out.drift_slope[0], out.drift_slope[1]) > 1e-3;
    out.conservation_ok = true;
    for (const auto& r : reps) out.conservation_ok = out.conservation_ok && r.conservation_ok;
    out.slots_counted = (cfg.horizon - cfg.warmup) * std::uint64_t(R);
    return out;
}

double region_probe(const SimConfig& cfg, double dir1, double dir2) {
    if (dir1 < 0.0 || dir2 < 0.0 || (dir1 == 0.0 && dir2 == 0.0))
        throw std::domain_error("probe direction must be nonnegative and nonzero");
    const double nrm = std::hypot(dir1, dir2);
    const double u1 = dir1 / nrm, u2 = dir2 / nrm;
    auto stable_at = [&](double scale) {
        SimConfig c = cfg;
        c.params.lambda_hat1 = scale * u1;
        c.params.lambda_hat2 = scale * u2;
        return !run(c).unstable;
    };
    double hi = 0.05;
    while (stable_at(hi) && hi < 4.0) hi *= 2.0;
    if (hi >= 4.0) return hi;
    double lo = hi / 2.0;
    if (!stable_at(lo)) lo = 0.0;
    while ((hi - lo) / std::max(hi, 1e-9) > 0.02) {
        const double mid = 0.5 * (lo + hi);
        if (stable_at(mid)) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace relnet
