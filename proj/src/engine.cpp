#include "ehcr/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <numeric>
#include <thread>

#include "ehcr/error.hpp"
#include "ehcr/selection.hpp"

namespace ehcr {

std::string_view to_string(PolicyKind p)
{
    switch (p)
    {
    case PolicyKind::optimal: return "optimal";
    case PolicyKind::myopic: return "myopic";
    case PolicyKind::belief_bandwidth: return "belief-bandwidth";
    case PolicyKind::random: return "random";
    case PolicyKind::constant_rate: return "constant-rate";
    }
    return "?";
}

std::string_view to_string(SensingChannel c)
{
    return c == SensingChannel::awgn ? "awgn" : "rayleigh";
}

std::optional<PolicyKind> parse_policy(std::string_view s)
{
    for (auto p : {PolicyKind::optimal, PolicyKind::myopic, PolicyKind::belief_bandwidth,
                   PolicyKind::random, PolicyKind::constant_rate})
        if (to_string(p) == s)
            return p;
    return std::nullopt;
}

std::optional<SensingChannel> parse_sensing_channel(std::string_view s)
{
    if (s == "awgn")
        return SensingChannel::awgn;
    if (s == "rayleigh")
        return SensingChannel::rayleigh;
    return std::nullopt;
}

std::string_view to_string(SlotKind k)
{
    switch (k)
    {
    case SlotKind::success: return "success";
    case SlotKind::collision: return "collision";
    case SlotKind::sensed_busy: return "sensed_busy";
    case SlotKind::deferred: return "deferred";
    case SlotKind::no_gain: return "no_gain";
    case SlotKind::policy_idle: return "policy_idle";
    case SlotKind::outage: return "outage";
    case SlotKind::unsensable: return "unsensable";
    }
    return "?";
}

void SimConfig::validate() const
{
    auto fail = [](const char* key, const std::string& what) { throw ConfigError(key, what); };

    if (n_channels < 1 || n_channels > 64)
        fail("channels.n", "must be in [1, 64]");
    if (static_cast<int>(chains.size()) != n_channels)
        fail("channels.alpha", "need one (alpha, beta) pair per channel");
    for (const auto& c : chains)
    {
        if (!(c.alpha >= 0.0 && c.alpha <= 1.0))
            fail("channels.alpha", "must lie in [0, 1]");
        if (!(c.beta >= 0.0 && c.beta <= 1.0))
            fail("channels.beta", "must lie in [0, 1]");
        if (c.alpha == 0.0 && c.beta == 1.0)
            fail("channels.alpha", "alpha = 0 with beta = 1 has no stationary start");
    }
    if (actions.access != 1)
        fail("actions.access", "exactly one channel is accessed per slot");
    if (actions.estimate < 1 || actions.estimate > n_channels)
        fail("actions.estimate", "must be in [1, channels.n]");
    if (actions.sense < 1 || actions.sense > actions.estimate)
        fail("actions.sense", "must be in [1, actions.estimate]");

    if (fixed_samples)
    {
        if (*fixed_samples < 1)
            fail("sensing.samples", "must be >= 1");
        if (!(p_col >= 0.0 && p_col < 1.0))
            fail("sensing.p_col", "must lie in [0, 1)");
        if (!(p_f >= 0.0 && p_f < p_d()))
            fail("sensing.p_f", "must lie in [0, 1 - p_col)");
    }
    else
    {
        if (!(p_col > 0.0 && p_col < 1.0))
            fail("sensing.p_col", "must lie in (0, 1)");
        if (!(p_f > 0.0 && p_f < p_d()))
            fail("sensing.p_f", "must lie in (0, 1 - p_col)");
    }
    if (!std::isfinite(snr_db))
        fail("sensing.snr_db", "must be finite");
    if (!(f_s > 0.0))
        fail("sensing.f_s_hz", "must be positive");
    if (!(e_s_sample >= 0.0))
        fail("sensing.e_sample_j", "must be non-negative");

    try
    {
        phy::PowerParams probe = power;
        probe.t_est = 1.0;
        probe.p_est = 0.0;
        probe.validate();
    }
    catch (const std::invalid_argument& e)
    {
        fail("power", e.what());
    }
    if (!(est_power_fraction >= 0.0))
        fail("power.est_fraction", "must be non-negative");
    if (pbar_constellation < 1)
        fail("power.pbar_m", "must be >= 1");
    if (pilot_symbols < 1)
        fail("power.pilot_symbols", "must be >= 1");

    if (regions < 2 || regions > 16)
        fail("rates.k", "must be in [2, 16]");
    if (!boundaries.empty())
    {
        if (static_cast<int>(boundaries.size()) != regions - 1)
            fail("rates.boundaries", "need rates.k - 1 thresholds");
        for (std::size_t j = 0; j < boundaries.size(); ++j)
            if (!(boundaries[j] > 0.0) || (j > 0 && !(boundaries[j] > boundaries[j - 1])))
                fail("rates.boundaries", "must be positive and strictly ascending");
    }

    if (!(slot_s > 0.0))
        fail("slot.duration_s", "must be positive");
    if (pilot_symbols * actions.estimate / power.b >= slot_s)
        fail("actions.estimate", "estimation time fills the whole slot");
    if (horizon < 1)
        fail("policy.horizon", "must be >= 1");

    if (!(p_eh >= 0.0) || !std::isfinite(p_eh))
        fail("harvest.p_eh_mj_s", "must be non-negative");
    if (!(e_h > 0.0))
        fail("harvest.e_h_j", "must be positive");
    if (p_h() > 1.0)
        fail("harvest.p_eh_mj_s", "harvest probability p_eh * T / e_h exceeds 1; raise harvest.e_h_j");
    if (!(e_max_factor > 0.0))
        fail("battery.e_max_factor", "must be positive");
    if (!(init_lo >= 0.0 && init_lo <= init_hi && init_hi <= 1.0))
        fail("battery.init_lo", "need 0 <= init_lo <= init_hi <= 1");

    if (policy == PolicyKind::optimal)
    {
        if (actions.estimate > max_optimal_channels)
            fail("actions.estimate", "optimal policy supports at most 4 estimated channels");
        if (actions.sense != 1)
            fail("actions.sense", "optimal policy senses exactly one channel");
        if (horizon > max_optimal_horizon)
            fail("policy.horizon", "optimal policy supports horizons up to 6");
    }
    if (constant_m < 2 || (constant_m & (constant_m - 1)) != 0)
        fail("policy.constant_m", "must be a power of two >= 2");
    if (!bandwidths.empty())
    {
        if (static_cast<int>(bandwidths.size()) != n_channels)
            fail("policy.bandwidths_hz", "need one bandwidth per channel");
        for (double b : bandwidths)
            if (!(b > 0.0))
                fail("policy.bandwidths_hz", "must be positive");
    }

    if (slots < 1)
        fail("sim.slots", "must be >= 1");
    if (iterations < 1)
        fail("sim.iterations", "must be >= 1");
    if (threads < 0)
        fail("sim.threads", "must be >= 0");
}

DerivedModel DerivedModel::from(const SimConfig& cfg)
{
    cfg.validate();
    DerivedModel m;
    m.sensing = {cfg.p_d(), cfg.p_f, std::pow(10.0, cfg.snr_db / 10.0), cfg.f_s, cfg.e_s_sample};
    m.power = cfg.power;
    m.power.t_est = cfg.pilot_symbols / m.power.b;
    m.power.p_est = 0.0;
    m.power.p_est = cfg.est_power_fraction * phy::transmit_power(1.0, cfg.pbar_constellation, m.power);
    m.rates = cfg.boundaries.empty() ? phy::RateTable::exponential_equiprobable(cfg.regions)
                                     : phy::RateTable::from_boundaries(cfg.boundaries);
    m.e_est = phy::estimation_energy(m.power);
    m.t_est = m.power.t_est;
    m.e_est_total = cfg.actions.estimate * m.e_est;
    m.t_est_total = cfg.actions.estimate * m.t_est;
    m.p_h = cfg.p_h();
    m.e_max = cfg.e_max();
    if (!cfg.fixed_samples)
    {
        m.q_inv_pf = phy::q_inverse(m.sensing.p_f);
        m.q_inv_pd = phy::q_inverse(m.sensing.p_d);
    }
    m.awgn_samples = m.samples(cfg, 1.0);
    m.bandwidths = cfg.bandwidths.empty() ? std::vector<double>(cfg.n_channels, m.power.b)
                                          : cfg.bandwidths;
    return m;
}

std::optional<std::int64_t> DerivedModel::samples(const SimConfig& cfg, double h) const
{
    if (cfg.fixed_samples)
        return cfg.fixed_samples;
    try
    {
        return phy::min_sensing_samples(q_inv_pf, q_inv_pd, sensing.gamma * h);
    }
    catch (const UnsensableChannel&)
    {
        return std::nullopt;
    }
}

void RunMetrics::add(const SlotOutcome& o)
{
    ++slots;
    reward_sum += o.reward;
    switch (o.kind)
    {
    case SlotKind::success: ++successes; break;
    case SlotKind::collision: ++collisions; break;
    case SlotKind::sensed_busy: ++sensed_busy; break;
    case SlotKind::deferred: ++deferred; break;
    case SlotKind::no_gain:
    case SlotKind::policy_idle: ++idle; break;
    case SlotKind::outage: ++outages; break;
    case SlotKind::unsensable: ++unsensable; break;
    }
}

double harvest_draw(double p_h, double e_h, double u) { return u < p_h ? e_h : 0.0; }

double harvest_draw(double p_h, double e_h, Rng& rng) { return harvest_draw(p_h, e_h, rng.uniform()); }

double energy_transition(double e, double e_c, double harvested, double e_max)
{
    // Sums of the gated components may overshoot e by rounding only.
    if (e_c > e + 1e-12 * std::max(e, e_c))
        throw InvariantViolation("energy consumed exceeds battery content");
    const double left = std::max(0.0, e - e_c);
    return harvested > 0.0 ? std::min(left + harvested, e_max) : left;
}

double consumed_energy(ConsumptionCase c, const EnergyComponents& parts)
{
    switch (c)
    {
    case ConsumptionCase::sensed_idle: return parts.e_est_total + parts.e_s + parts.e_ckt + parts.e_tr;
    case ConsumptionCase::sensed_busy: return parts.e_est_total + parts.e_s;
    case ConsumptionCase::not_sensed: return parts.e_est_total;
    case ConsumptionCase::idle: return 0.0;
    }
    return 0.0;
}

SlotDraws SlotDraws::draw(int n, Rng& env)
{
    SlotDraws d;
    d.traffic.resize(n);
    d.gain.resize(n);
    d.sense_gain.resize(n);
    d.detector.resize(n);
    for (int i = 0; i < n; ++i)
    {
        d.traffic[i] = env.uniform();
        d.gain[i] = env.exponential();
        d.sense_gain[i] = env.exponential();
        d.detector[i] = env.uniform();
    }
    d.harvest = env.uniform();
    return d;
}

Simulator::Simulator(SimConfig cfg) : cfg_(std::move(cfg)), model_(DerivedModel::from(cfg_))
{
    if (cfg_.policy == PolicyKind::optimal)
        planning_ = planning_model();
}

PlanningModel Simulator::planning_model() const
{
    const int n = cfg_.actions.estimate;
    std::vector<ChannelChain> chains(cfg_.chains.begin(), cfg_.chains.begin() + n);
    PlanningModel pm{.transition = JointTransition(std::move(chains)),
                     .p_d = model_.sensing.p_d,
                     .p_f = model_.sensing.p_f,
                     .region_probs = model_.rates.region_probs,
                     .future = {},
                     .e_est_total = model_.e_est_total,
                     .p_h = model_.p_h,
                     .e_h = cfg_.e_h,
                     .e_max = model_.e_max};

    const double time_left = cfg_.slot_s - model_.t_est_total;
    std::vector<SensingOption> row(static_cast<std::size_t>(model_.rates.k));
    if (model_.awgn_samples)
    {
        const double t_s = phy::min_sensing_time(*model_.awgn_samples, cfg_.f_s);
        const double e_s = phy::sensing_energy(*model_.awgn_samples, cfg_.e_s_sample);
        const double t_tr = time_left - t_s;
        for (int r = 2; r <= model_.rates.k && t_tr > 0.0; ++r)
        {
            const double g = model_.rates.region_rep_gain[r - 1];
            const double p_tr = phy::transmit_power(g, model_.rates.constellation(r), model_.power);
            const auto tx = phy::transmission_energies(p_tr, t_tr, model_.power);
            auto& opt = row[r - 1];
            opt.available = true;
            opt.reward = model_.rates.efficiency(r) * (cfg_.airtime_reward ? t_tr / cfg_.slot_s : 1.0);
            opt.sense_cost = e_s;
            opt.access_cost = tx.total();
        }
    }
    pm.future.assign(static_cast<std::size_t>(n), row);
    return pm;
}

SuState Simulator::initial_state(Rng& env) const
{
    SuState st;
    st.truth.resize(cfg_.n_channels);
    st.beliefs.pi.resize(cfg_.n_channels);
    for (int i = 0; i < cfg_.n_channels; ++i)
    {
        const double pi = stationary_idle_prob(cfg_.chains[i]);
        st.beliefs.pi[i] = pi;
        st.truth[i] = env.uniform() < pi ? Occupancy::idle : Occupancy::busy;
    }
    st.battery = model_.e_max * (cfg_.init_lo + (cfg_.init_hi - cfg_.init_lo) * env.uniform());
    if (cfg_.policy == PolicyKind::optimal)
        st.joint = BeliefJoint::from_marginals(
            std::span<const double>(st.beliefs.pi.data(), static_cast<std::size_t>(cfg_.actions.estimate)));
    return st;
}

namespace {

enum class Block
{
    none,
    no_gain,
    unsensable,
    energy,
};

struct ChannelView
{
    double g = 0.0;
    double h = 1.0;
    std::optional<std::int64_t> samples;
    double t_s = 0.0;
    double e_s = 0.0;
};

}  // namespace

SlotOutcome Simulator::run_slot(SuState& st, Rng& env, Rng& policy_rng, int remaining,
                                OptimalPlanner* planner) const
{
    return run_slot(st, SlotDraws::draw(cfg_.n_channels, env), policy_rng, remaining, planner);
}

SlotOutcome Simulator::run_slot(SuState& st, const SlotDraws& draws, Rng& policy_rng, int remaining,
                                OptimalPlanner* planner) const
{
    const int n = cfg_.n_channels;
    const int n_est = cfg_.actions.estimate;
    const double p_d = model_.sensing.p_d;
    const double p_f = model_.sensing.p_f;

    SlotOutcome out;
    out.slot = st.slot;
    out.battery_before = st.battery;

    for (int i = 0; i < n; ++i)
        st.truth[i] = step_channel(st.truth[i], cfg_.chains[i], draws.traffic[i]);
    out.truth = st.truth;
    out.energy.harvested = harvest_draw(model_.p_h, cfg_.e_h, draws.harvest);

    std::vector<SenseOutcome> outcome(n, SenseOutcome::not_sensed);
    ConsumptionCase consumption = ConsumptionCase::idle;
    EnergyComponents parts;

    if (st.battery < model_.e_est_total)
    {
        out.kind = SlotKind::outage;
    }
    else
    {
        out.estimated = true;
        consumption = ConsumptionCase::not_sensed;
        parts.e_est_total = model_.e_est_total;
        const double e = st.battery;
        const double time_left = cfg_.slot_s - model_.t_est_total;

        std::vector<ChannelView> ch(n_est);
        for (int i = 0; i < n_est; ++i)
        {
            auto& c = ch[i];
            c.g = draws.gain[i];
            c.h = cfg_.sensing_channel == SensingChannel::awgn ? 1.0 : draws.sense_gain[i];
            c.samples = cfg_.sensing_channel == SensingChannel::awgn ? model_.awgn_samples
                                                                      : model_.samples(cfg_, c.h);
            if (c.samples)
            {
                c.t_s = phy::min_sensing_time(*c.samples, cfg_.f_s);
                c.e_s = phy::sensing_energy(*c.samples, cfg_.e_s_sample);
            }
        }

        double spent_e = 0.0;
        double spent_t = 0.0;
        const bool adaptive = cfg_.policy != PolicyKind::constant_rate;

        auto sensable_now = [&](int i) {
            return ch[i].samples && ch[i].t_s < time_left - spent_t;
        };
        auto plan_for = [&](int i, Block& why) {
            why = Block::none;
            TxPlan plan;
            if (adaptive && phy::gain_region(ch[i].g, model_.rates) == 1)
            {
                why = Block::no_gain;
                return plan;
            }
            if (!sensable_now(i))
            {
                why = Block::unsensable;
                return plan;
            }
            const SlotBudget budget{model_.e_est_total, spent_e + ch[i].e_s,
                                    time_left - spent_t - ch[i].t_s};
            plan = adaptive ? plan_adaptive(ch[i].g, e, budget, model_.rates, model_.power)
                            : plan_constant_rate(ch[i].g, e, cfg_.constant_m, budget, model_.power);
            if (plan.eta <= 0.0)
                why = plan.energy_limited || !adaptive ? Block::energy : Block::no_gain;
            return plan;
        };
        auto weight = [&](double t_tr) { return cfg_.airtime_reward ? t_tr / cfg_.slot_s : 1.0; };

        // Reason shown when nothing gets sensed.
        Block strongest = Block::no_gain;
        auto note_block = [&](Block b) {
            if (b == Block::energy || (b == Block::unsensable && strongest == Block::no_gain))
                strongest = b;
        };

        std::vector<int> order;
        bool gain_aware = true;
        bool planner_idle = false;

        switch (cfg_.policy)
        {
        case PolicyKind::myopic:
        case PolicyKind::constant_rate:
        {
            std::vector<double> values(n_est, 0.0);
            for (int i = 0; i < n_est; ++i)
            {
                Block why;
                const TxPlan p = plan_for(i, why);
                note_block(why);
                values[i] = p.eta * weight(time_left - ch[i].t_s);
            }
            order = rank_channels_myopic(st.beliefs, values, cfg_.chains, cfg_.actions.sense);
            break;
        }
        case PolicyKind::belief_bandwidth:
        case PolicyKind::random:
        {
            gain_aware = false;
            std::vector<int> candidates;
            for (int i = 0; i < n_est; ++i)
            {
                if (!sensable_now(i))
                    note_block(Block::unsensable);
                else if (ch[i].e_s > e - model_.e_est_total)
                    note_block(Block::energy);
                else
                    candidates.push_back(i);
            }
            order = cfg_.policy == PolicyKind::random
                        ? baseline_random(candidates, cfg_.actions.sense, policy_rng)
                        : baseline_belief_bandwidth(st.beliefs, model_.bandwidths, cfg_.chains,
                                                    candidates, cfg_.actions.sense);
            break;
        }
        case PolicyKind::optimal:
        {
            std::vector<SensingOption> options(n_est);
            bool any = false;
            for (int i = 0; i < n_est; ++i)
            {
                Block why;
                const TxPlan p = plan_for(i, why);
                note_block(why);
                if (p.eta > 0.0)
                {
                    const double t_tr = time_left - ch[i].t_s;
                    options[i] = {true, p.eta * weight(t_tr), ch[i].e_s, p.energies.total()};
                    any = true;
                }
            }
            if (any)
            {
                const int h = std::min(cfg_.horizon, std::max(remaining, 1));
                const auto decision = planner ? planner->decide(*st.joint, e, options, h)
                                              : optimal_value(*st.joint, e, options, h, *planning_);
                if (decision.channel >= 0)
                    order.push_back(decision.channel);
                else
                    planner_idle = true;
            }
            break;
        }
        }

        bool finished = false;
        for (int c : order)
        {
            TxPlan plan;
            if (gain_aware)
            {
                Block why;
                plan = plan_for(c, why);
                if (plan.eta <= 0.0)
                    continue;
            }
            else if (!sensable_now(c) || spent_e + ch[c].e_s > e - model_.e_est_total)
            {
                continue;
            }

            const int o = draws.detector[c] < observation_prob(0, st.truth[c], p_d, p_f) ? 0 : 1;
            out.sensed.push_back(c);
            out.observations.push_back(o);
            consumption = o == 1 ? ConsumptionCase::sensed_idle : ConsumptionCase::sensed_busy;
            spent_e += ch[c].e_s;
            spent_t += ch[c].t_s;
            parts.e_s = spent_e;
            if (o == 0)
            {
                outcome[c] = SenseOutcome::busy;
                out.kind = SlotKind::sensed_busy;
                continue;
            }

            if (!gain_aware)
            {
                const SlotBudget budget{model_.e_est_total, spent_e, time_left - spent_t};
                plan = plan_adaptive(ch[c].g, e, budget, model_.rates, model_.power);
            }
            out.d = plan.eta > 0.0 ? access_decision(o) : 0;
            if (out.d == 0)
            {
                outcome[c] = SenseOutcome::idle_no_access;
                out.kind = SlotKind::deferred;
                consumption = ConsumptionCase::sensed_busy;
                finished = true;
                break;
            }
            out.accessed = c;
            out.accessed_state = st.truth[c];
            out.eta = plan.eta;
            out.t_tr = time_left - spent_t;
            parts.e_ckt = plan.energies.e_ckt;
            parts.e_tr = plan.energies.e_tr;
            out.ack = st.truth[c] == Occupancy::idle ? 1 : 0;
            out.reward = out.ack ? plan.eta * weight(out.t_tr) : 0.0;
            out.kind = out.ack ? SlotKind::success : SlotKind::collision;
            outcome[c] = out.ack ? SenseOutcome::ack : SenseOutcome::collision;
            finished = true;
            break;
        }
        if (!finished && out.sensed.empty())
        {
            if (planner_idle)
                out.kind = SlotKind::policy_idle;
            else if (strongest == Block::energy)
                out.kind = SlotKind::outage;
            else if (strongest == Block::unsensable)
                out.kind = SlotKind::unsensable;
            else
                out.kind = SlotKind::no_gain;
        }
    }

    out.energy.e_est_total = parts.e_est_total;
    out.energy.e_s_total = parts.e_s;
    out.energy.e_ckt = parts.e_ckt;
    out.energy.e_tr = parts.e_tr;

    const double e_c = consumed_energy(consumption, parts);
    st.battery = energy_transition(st.battery, e_c, out.energy.harvested, model_.e_max);
    out.battery_after = st.battery;

    for (int i = 0; i < n; ++i)
    {
        try
        {
            st.beliefs.pi[i] = update_belief_myopic(st.beliefs.pi[i], outcome[i], cfg_.chains[i], p_d, p_f);
        }
        catch (const InconsistentObservation&)
        {
            st.beliefs.pi[i] = cfg_.chains[i].predict(st.beliefs.pi[i]);
        }
    }
    if (st.joint)
    {
        const int c = out.sensed.empty() ? -1 : out.sensed.back();
        const SenseOutcome oc = c >= 0 ? outcome[c] : SenseOutcome::not_sensed;
        try
        {
            st.joint = update_belief_joint(*st.joint, c, oc, planning_->transition, p_d, p_f);
        }
        catch (const InconsistentObservation&)
        {
            st.joint = propagate_belief(*st.joint, planning_->transition);
        }
    }

    if (out.reward > 0.0 && out.ack != 1)
        throw InvariantViolation("reward without ACK");
    if (out.ack == 1 && !(out.d == 1 && out.accessed_state == Occupancy::idle))
        throw InvariantViolation("ACK without access to an idle channel");
    if (!(st.battery >= 0.0 && st.battery <= model_.e_max))
        throw InvariantViolation("battery outside [0, e_max]");

    ++st.slot;
    return out;
}

RunMetrics Simulator::run_episode(std::uint64_t replication,
                                  const std::function<void(const SlotOutcome&)>& observer,
                                  bool keep_trace, OptimalPlanner* planner) const
{
    Rng env(derive_stream_seed(cfg_.seed, 2 * replication));
    Rng pol(derive_stream_seed(cfg_.seed, 2 * replication + 1));
    SuState st = initial_state(env);
    RunMetrics m;
    for (int j = 0; j < cfg_.slots; ++j)
    {
        SlotOutcome o = run_slot(st, env, pol, cfg_.slots - j, planner);
        m.add(o);
        if (observer)
            observer(o);
        if (keep_trace)
            m.trace.push_back(std::move(o));
    }
    return m;
}

RunMetrics run_episode(const SimConfig& cfg, std::uint64_t replication)
{
    return Simulator(cfg).run_episode(replication);
}

MonteCarloResult monte_carlo(const SimConfig& cfg)
{
    const Simulator sim(cfg);
    const auto iters = static_cast<std::size_t>(cfg.iterations);
    std::vector<RunMetrics> runs(iters);

    unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                       : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(iters));

    const std::size_t blocks = (iters + replication_block - 1) / replication_block;
    workers = std::min<unsigned>(workers, static_cast<unsigned>(blocks));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto work = [&] {
        try
        {
            for (std::size_t blk = next++; blk < blocks && !failed; blk = next++)
            {
                std::unique_ptr<OptimalPlanner> planner;
                if (cfg.policy == PolicyKind::optimal)
                    planner = std::make_unique<OptimalPlanner>(sim.planning_model());
                const std::size_t end = std::min(iters, (blk + 1) * replication_block);
                for (std::size_t r = blk * replication_block; r < end; ++r)
                    runs[r] = sim.run_episode(r, {}, false, planner.get());
            }
        }
        catch (...)
        {
            if (!failed.exchange(true))
                failure = std::current_exception();
        }
    };
    if (workers <= 1)
    {
        work();
    }
    else
    {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(work);
        for (auto& t : pool)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    MonteCarloResult res;
    res.iterations = iters;
    res.replication_means.reserve(iters);
    double sum = 0.0;
    for (const auto& r : runs)
    {
        const double m = r.mean_efficiency();
        res.replication_means.push_back(m);
        sum += m;
        res.totals.slots += r.slots;
        res.totals.reward_sum += r.reward_sum;
        res.totals.successes += r.successes;
        res.totals.collisions += r.collisions;
        res.totals.sensed_busy += r.sensed_busy;
        res.totals.deferred += r.deferred;
        res.totals.idle += r.idle;
        res.totals.outages += r.outages;
        res.totals.unsensable += r.unsensable;
    }
    res.mean_efficiency = sum / static_cast<double>(iters);
    if (iters > 1)
    {
        double ss = 0.0;
        for (double m : res.replication_means)
            ss += (m - res.mean_efficiency) * (m - res.mean_efficiency);
        res.stderr_efficiency = std::sqrt(ss / static_cast<double>(iters - 1) / static_cast<double>(iters));
    }
    return res;
}

}  // namespace ehcr
