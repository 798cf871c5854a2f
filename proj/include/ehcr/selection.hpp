#pragma once

#include <span>
#include <vector>

#include "ehcr/belief.hpp"
#include "ehcr/occupancy.hpp"
#include "ehcr/phy.hpp"
#include "ehcr/rng.hpp"

namespace ehcr {

/// Energy and time already committed in the slot when a transmission on one
/// channel is considered.
struct SlotBudget
{
    double e_est_total = 0.0; ///< estimation energy of all estimated channels
    double e_s = 0.0;         ///< sensing energy spent so far, this channel included
    double t_tr = 0.0;        ///< airtime left for the transmission
};

/// A transmission candidate on one channel.
struct TxPlan
{
    double eta = 0.0; ///< bits/s/Hz; 0 means the channel is not usable
    int region = 1;
    int constellation = 1;
    double p_tr = 0.0;
    phy::TxEnergies energies;
    bool energy_limited = false; ///< region allowed a rate but the battery did not
};

/// Adaptive-rate plan: rate of g's region, gated by
/// e_s + e_ckt + e_tr <= e - e_est_total.
TxPlan plan_adaptive(double g, double e, const SlotBudget& budget, const phy::RateTable& rt,
                     const phy::PowerParams& pp);

/// Energy-constrained spectral efficiency of a channel (eta of plan_adaptive).
double spectral_efficiency(double g, double e, const SlotBudget& budget,
                           const phy::RateTable& rt, const phy::PowerParams& pp);

/// Fixed-constellation plan, power set by the actual gain.
TxPlan plan_constant_rate(double g, double e, int fixed_m, const SlotBudget& budget,
                          const phy::PowerParams& pp);

double baseline_constant_rate(double g, double e, int fixed_m, const SlotBudget& budget,
                              const phy::PowerParams& pp);

/// (pi beta + (1 - pi) alpha) * eta.
double myopic_expected_reward(double pi, const ChannelChain& chain, double eta);

/// Channels with positive value, by descending predicted-idle * value,
/// truncated to `limit`. Ties go to the lower index.
std::vector<int> rank_channels_myopic(const BeliefFactored& beliefs, std::span<const double> values,
                                      std::span<const ChannelChain> chains, int limit);

/// Gain- and energy-blind ranking by predicted-idle * bandwidth over the
/// given candidate channels.
std::vector<int> baseline_belief_bandwidth(const BeliefFactored& beliefs,
                                           std::span<const double> bandwidths,
                                           std::span<const ChannelChain> chains,
                                           std::span<const int> candidates, int limit);

/// Uniformly random order of the candidates, truncated to `limit`.
std::vector<int> baseline_random(std::span<const int> candidates, int limit, Rng& rng);

/// d = I{o = 1}.
constexpr int access_decision(int o) { return o == 1 ? 1 : 0; }

}  // namespace ehcr
