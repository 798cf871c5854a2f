#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ehcr/belief.hpp"
#include "ehcr/occupancy.hpp"
#include "ehcr/optimal.hpp"
#include "ehcr/phy.hpp"
#include "ehcr/rng.hpp"

namespace ehcr {

enum class PolicyKind
{
    optimal,
    myopic,
    belief_bandwidth,
    random,
    constant_rate,
};

enum class SensingChannel
{
    awgn,     ///< |h| = 1
    rayleigh, ///< |h| ~ Exp(1) per channel per slot
};

std::string_view to_string(PolicyKind p);
std::string_view to_string(SensingChannel c);
std::optional<PolicyKind> parse_policy(std::string_view s);
std::optional<SensingChannel> parse_sensing_channel(std::string_view s);

/// |Lambda_0|, |Lambda_1|, |Lambda_2|.
struct ActionSets
{
    int estimate = 5;
    int sense = 1;
    int access = 1;

    bool operator==(const ActionSets&) const = default;
};

struct SimConfig
{
    int n_channels = 5;
    ActionSets actions;
    std::vector<ChannelChain> chains = std::vector<ChannelChain>(5);

    double p_col = 0.1; ///< sets P_D = 1 - P_col
    double p_f = 0.1;
    double snr_db = 0.0;
    double f_s = 2e5;
    double e_s_sample = 0.11e-6;
    std::optional<std::int64_t> fixed_samples; ///< bypasses the sample-count formula
    SensingChannel sensing_channel = SensingChannel::awgn;

    phy::PowerParams power;     ///< p_est / t_est derived in derive()
    double est_power_fraction = 0.2;
    int pbar_constellation = 16;
    int pilot_symbols = 14;

    int regions = 4;
    std::vector<double> boundaries; ///< empty: equal-probability exponential split

    double slot_s = 1e-3;
    int horizon = 5;

    double p_eh = 0.06;   ///< mean harvesting power [J/s]
    double e_h = 200e-6;  ///< harvest quantum [J]
    double e_max_factor = 10.0;
    double init_lo = 0.5; ///< initial battery drawn uniformly in
    double init_hi = 0.5; ///< [init_lo, init_hi] * e_max

    PolicyKind policy = PolicyKind::myopic;
    int constant_m = 4;
    std::vector<double> bandwidths; ///< belief-bandwidth weights; empty = equal

    bool airtime_reward = true; ///< reward eta * t_tr / T instead of eta

    int slots = 1000;       ///< episode length
    int iterations = 10000; ///< Monte Carlo replications
    std::uint64_t seed = 1;
    int threads = 0;        ///< 0 = hardware concurrency

    double p_d() const { return 1.0 - p_col; }
    double e_max() const { return e_max_factor * e_h; }
    double p_h() const { return p_eh * slot_s / e_h; }

    /// Throws ConfigError naming the offending key.
    void validate() const;

    bool operator==(const SimConfig&) const = default;
};

/// Constants computed once per configuration.
struct DerivedModel
{
    phy::SensingSpec sensing;
    phy::PowerParams power;
    phy::RateTable rates;
    double e_est = 0.0;   ///< per channel
    double t_est = 0.0;   ///< per channel
    double e_est_total = 0.0;
    double t_est_total = 0.0;
    double p_h = 0.0;
    double e_max = 0.0;
    double q_inv_pf = 0.0;
    double q_inv_pd = 0.0;
    std::optional<std::int64_t> awgn_samples; ///< sample count at |h| = 1
    std::vector<double> bandwidths;

    static DerivedModel from(const SimConfig& cfg);

    /// Samples needed at sensing gain h; nullopt when unsensable.
    std::optional<std::int64_t> samples(const SimConfig& cfg, double h) const;
};

/// Why a slot ended the way it did. Every slot has exactly one kind.
enum class SlotKind
{
    success,     ///< accessed a truly idle channel, ACK = 1
    collision,   ///< accessed a busy channel after a missed detection
    sensed_busy, ///< every sensed channel returned o = 0
    deferred,    ///< sensed idle but nothing sent (gain-blind baseline, eta = 0)
    no_gain,     ///< no usable gain region on any channel
    policy_idle, ///< the planner chose to wait
    outage,      ///< battery too low to estimate, or rates priced out by energy
    unsensable,  ///< usable rates blocked by sensing time, none by energy
};

std::string_view to_string(SlotKind k);

struct EnergyLedger
{
    double e_est_total = 0.0;
    double e_s_total = 0.0;
    double e_ckt = 0.0;
    double e_tr = 0.0;
    double harvested = 0.0;

    double consumed() const { return e_est_total + e_s_total + e_ckt + e_tr; }
};

struct SlotOutcome
{
    int slot = 0;
    SlotKind kind = SlotKind::outage;
    bool estimated = false;
    std::vector<int> sensed;         ///< in sensing order
    std::vector<int> observations;   ///< o per sensed channel
    int accessed = -1;
    int d = 0;                       ///< access decision on the last sensed channel
    Occupancy accessed_state = Occupancy::busy;
    int ack = 0;
    double eta = 0.0;                ///< rate used for the transmission
    double t_tr = 0.0;
    double reward = 0.0;
    EnergyLedger energy;
    double battery_before = 0.0;
    double battery_after = 0.0;
    PnState truth;                   ///< PN state during the slot
};

struct RunMetrics
{
    std::uint64_t slots = 0;
    double reward_sum = 0.0;
    std::uint64_t successes = 0;
    std::uint64_t collisions = 0;
    std::uint64_t sensed_busy = 0;
    std::uint64_t deferred = 0;
    std::uint64_t idle = 0; ///< no_gain + policy_idle
    std::uint64_t outages = 0;
    std::uint64_t unsensable = 0;
    std::vector<SlotOutcome> trace;

    double mean_efficiency() const { return slots ? reward_sum / static_cast<double>(slots) : 0.0; }
    std::uint64_t accounted() const
    {
        return successes + collisions + sensed_busy + deferred + idle + outages + unsensable;
    }
    void add(const SlotOutcome& o);
};

struct MonteCarloResult
{
    std::uint64_t iterations = 0;
    double mean_efficiency = 0.0;
    double stderr_efficiency = 0.0;
    RunMetrics totals; ///< summed over replications, no trace
    std::vector<double> replication_means;

    double rate(std::uint64_t count) const
    {
        return totals.slots ? static_cast<double>(count) / static_cast<double>(totals.slots) : 0.0;
    }
};

/// Harvested energy this slot from uniform draw u.
double harvest_draw(double p_h, double e_h, double u);
double harvest_draw(double p_h, double e_h, Rng& rng);

/// Battery update; throws InvariantViolation if e_c > e.
double energy_transition(double e, double e_c, double harvested, double e_max);

enum class ConsumptionCase
{
    sensed_idle, ///< a_hat != 0, o = 1
    sensed_busy, ///< a_hat != 0, o = 0
    not_sensed,  ///< estimated only
    idle,        ///< nothing done, e_i = 0
};

struct EnergyComponents
{
    double e_est_total = 0.0;
    double e_s = 0.0;
    double e_ckt = 0.0;
    double e_tr = 0.0;
};

double consumed_energy(ConsumptionCase c, const EnergyComponents& parts);

/// Uniform draws consumed by one slot, in a fixed layout so that policies
/// compared under one seed share the environment.
struct SlotDraws
{
    std::vector<double> traffic;  ///< PN transition per channel
    std::vector<double> gain;     ///< SU-pair power gain per channel
    std::vector<double> sense_gain; ///< PU-SU sensing gain per channel
    std::vector<double> detector; ///< observation noise per channel
    double harvest = 0.0;

    static SlotDraws draw(int n, Rng& env);
};

/// Mutable per-replication state.
struct SuState
{
    int slot = 0;
    double battery = 0.0;
    PnState truth;
    BeliefFactored beliefs;
    std::optional<BeliefJoint> joint; ///< maintained for the optimal policy
};

class Simulator
{
  public:
    explicit Simulator(SimConfig cfg);

    const SimConfig& config() const { return cfg_; }
    const DerivedModel& model() const { return model_; }

    /// Stationary PN start and matching belief; battery per init range.
    SuState initial_state(Rng& env) const;

    /// One slot. `remaining` is the number of slots left in the episode
    /// including this one (caps the optimal horizon).
    /// `planner` carries the optimal-policy cache between calls; a null
    /// planner means a fresh one per decision.
    SlotOutcome run_slot(SuState& state, const SlotDraws& draws, Rng& policy_rng, int remaining,
                         OptimalPlanner* planner = nullptr) const;

    SlotOutcome run_slot(SuState& state, Rng& env, Rng& policy_rng, int remaining,
                         OptimalPlanner* planner = nullptr) const;

    /// One episode of cfg.slots slots from (env, policy) streams of `seed`.
    RunMetrics run_episode(std::uint64_t replication,
                           const std::function<void(const SlotOutcome&)>& observer = {},
                           bool keep_trace = false, OptimalPlanner* planner = nullptr) const;

    /// Planning model for the optimal policy (future slots at |h| = 1).
    PlanningModel planning_model() const;

  private:
    SimConfig cfg_;
    DerivedModel model_;
    std::optional<PlanningModel> planning_;
};

RunMetrics run_episode(const SimConfig& cfg, std::uint64_t replication);

/// Replications per unit of parallel work. The optimal-policy cache is shared
/// inside a block and never across blocks.
inline constexpr std::size_t replication_block = 256;

/// cfg.iterations replications, replication r seeded from
/// derive_stream_seed(cfg.seed, 2r) and (.., 2r + 1). Results are reduced
/// in replication order, so thread count never changes the output.
MonteCarloResult monte_carlo(const SimConfig& cfg);

}  // namespace ehcr
