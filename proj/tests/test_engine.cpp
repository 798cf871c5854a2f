#include "doctest.h"

#include <cmath>

#include "ehcr/engine.hpp"
#include "ehcr/error.hpp"

using namespace ehcr;

namespace {

// One always-idle channel, detector forced perfect.
SimConfig perfect_single()
{
    SimConfig c;
    c.n_channels = 1;
    c.chains = {{1.0, 1.0}};
    c.actions = {1, 1, 1};
    c.p_col = 0.0;
    c.p_f = 0.0;
    c.fixed_samples = 1;
    c.slots = 50;
    c.iterations = 10;
    return c;
}

SlotDraws draws_for(int n, double gain, double detector)
{
    SlotDraws d;
    d.traffic.assign(n, 0.5);
    d.gain.assign(n, gain);
    d.sense_gain.assign(n, 1.0);
    d.detector.assign(n, detector);
    d.harvest = 0.99;
    return d;
}

}  // namespace

TEST_CASE("harvest draws")
{
    Rng rng(1);
    for (int i = 0; i < 1000; ++i)
    {
        CHECK(harvest_draw(1.0, 30e-6, rng) == 30e-6);
        CHECK(harvest_draw(0.0, 30e-6, rng) == 0.0);
    }
    const int n = 100000;
    double sum = 0;
    for (int i = 0; i < n; ++i)
        sum += harvest_draw(0.5, 30e-6, rng);
    const double se = 30e-6 * std::sqrt(0.25 / n);
    CHECK(std::abs(sum / n - 15e-6) <= 3 * se);
}

TEST_CASE("energy transition")
{
    CHECK(energy_transition(5, 2, 4, 6) == 6);
    CHECK(energy_transition(5, 2, 0, 6) == 3);
    CHECK(energy_transition(6, 0, 1, 6) == 6);
    CHECK_THROWS_AS(energy_transition(1, 2, 0, 6), InvariantViolation);
}

TEST_CASE("consumed energy cases")
{
    const EnergyComponents p{1.0, 2.0, 3.0, 4.0};
    CHECK(consumed_energy(ConsumptionCase::idle, p) == 0.0);
    CHECK(consumed_energy(ConsumptionCase::not_sensed, p) == 1.0);
    CHECK(consumed_energy(ConsumptionCase::sensed_busy, p) == 3.0);
    CHECK(consumed_energy(ConsumptionCase::sensed_idle, p) == 10.0);
}

TEST_CASE("perfect sensing on an idle channel")
{
    const Simulator sim(perfect_single());
    Rng env(1), pol(2);
    auto st = sim.initial_state(env);
    const auto o = sim.run_slot(st, draws_for(1, 3.0, 0.5), pol, 10);
    CHECK(o.kind == SlotKind::success);
    CHECK(o.ack == 1);
    CHECK(o.d == 1);
    CHECK(o.eta == 6.0);
    CHECK(o.reward > 0.0);
    CHECK(o.reward == doctest::Approx(6.0 * o.t_tr / 1e-3));
    CHECK(o.t_tr == doctest::Approx(1e-3 - 7e-5 - 1 / 2e5));
    CHECK(o.battery_after == doctest::Approx(o.battery_before - o.energy.e_est_total - o.energy.e_s_total
                                             - o.energy.e_ckt - o.energy.e_tr));
}

TEST_CASE("missed detection")
{
    auto c = perfect_single();
    c.chains = {{0.0, 0.0}};
    c.p_col = 0.1;
    c.p_f = 0.1;
    const Simulator sim(c);
    Rng env(1), pol(2);
    auto st = sim.initial_state(env);
    REQUIRE(st.truth[0] == Occupancy::busy);
    const auto o = sim.run_slot(st, draws_for(1, 3.0, 0.95), pol, 10);
    CHECK(o.kind == SlotKind::collision);
    CHECK(o.observations == std::vector<int>{1});
    CHECK(o.d == 1);
    CHECK(o.ack == 0);
    CHECK(o.reward == 0.0);
    CHECK(o.energy.e_tr > 0.0);
    CHECK(o.battery_after < o.battery_before - o.energy.e_ckt * 0.999);

    Rng env2(1);
    auto st2 = sim.initial_state(env2);
    const auto busy = sim.run_slot(st2, draws_for(1, 3.0, 0.5), pol, 10);
    CHECK(busy.kind == SlotKind::sensed_busy);
    CHECK(busy.d == 0);
    CHECK(busy.energy.e_tr == 0.0);
    CHECK(busy.energy.e_ckt == 0.0);
}

TEST_CASE("empty battery idles the slot")
{
    auto c = perfect_single();
    c.init_lo = c.init_hi = 0.0;
    c.p_eh = 0.0;
    const Simulator sim(c);
    Rng env(1), pol(2);
    auto st = sim.initial_state(env);
    const auto o = sim.run_slot(st, draws_for(1, 3.0, 0.5), pol, 10);
    CHECK(o.kind == SlotKind::outage);
    CHECK_FALSE(o.estimated);
    CHECK(o.reward == 0.0);
    CHECK(o.battery_after == 0.0);

    const auto m = run_episode(c, 0);
    CHECK(m.mean_efficiency() == 0.0);
    CHECK(m.outages == m.slots);
}

TEST_CASE("gain-blind baseline defers without a usable rate")
{
    auto c = perfect_single();
    c.policy = PolicyKind::random;
    const Simulator sim(c);
    Rng env(1), pol(2);
    auto st = sim.initial_state(env);
    const auto o = sim.run_slot(st, draws_for(1, 0.01, 0.5), pol, 10);
    CHECK(o.kind == SlotKind::deferred);
    CHECK(o.d == 0);
    CHECK(o.energy.e_s_total > 0.0);
    CHECK(o.energy.e_ckt == 0.0);
}

TEST_CASE("rayleigh sensing leaves unsensable slots")
{
    SimConfig c;
    c.sensing_channel = SensingChannel::rayleigh;
    c.p_eh = 0.18;
    c.slots = 200;
    c.iterations = 20;
    const auto r = monte_carlo(c);
    CHECK(r.totals.unsensable > 0);
    CHECK(r.totals.accounted() == r.totals.slots);
}

TEST_CASE("always-idle channel earns the fading expectation")
{
    auto c = perfect_single();
    c.airtime_reward = false;
    c.e_h = 1e-3;
    c.p_eh = 1.0;
    c.init_lo = c.init_hi = 1.0;
    c.slots = 1000;
    c.iterations = 40;
    const auto r = monte_carlo(c);
    const auto rt = phy::RateTable::exponential_equiprobable(4);
    double mean = 0, sq = 0;
    for (int k = 0; k < 4; ++k)
    {
        mean += rt.region_probs[k] * rt.efficiency(k + 1);
        sq += rt.region_probs[k] * rt.efficiency(k + 1) * rt.efficiency(k + 1);
    }
    const double n = static_cast<double>(r.totals.slots);
    CHECK(std::abs(r.mean_efficiency - mean) <= 3 * std::sqrt((sq - mean * mean) / n));
    CHECK(r.totals.outages == 0);
}

TEST_CASE("episodes are deterministic")
{
    SimConfig c;
    c.slots = 300;
    const Simulator sim(c);
    const auto a = sim.run_episode(5, {}, true);
    const auto b = sim.run_episode(5, {}, true);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i)
    {
        CHECK(a.trace[i].kind == b.trace[i].kind);
        CHECK(a.trace[i].reward == b.trace[i].reward);
        CHECK(a.trace[i].battery_after == b.trace[i].battery_after);
        CHECK(a.trace[i].sensed == b.trace[i].sensed);
    }
    CHECK(a.accounted() == a.slots);
}

TEST_CASE("collision protection lowers throughput when energy is scarce")
{
    SimConfig c;
    c.p_eh = 0.015;
    c.slots = 500;
    c.iterations = 200;
    c.threads = 1;
    const auto lo = monte_carlo(c);
    c.p_col = 0.8;
    const auto hi = monte_carlo(c);
    CHECK(hi.mean_efficiency < lo.mean_efficiency);
}

TEST_CASE("monte carlo aggregation")
{
    SimConfig c;
    c.slots = 20;
    c.iterations = 1;
    const auto one = monte_carlo(c);
    CHECK(one.mean_efficiency == run_episode(c, 0).mean_efficiency());

    c.iterations = 10000;
    const auto a = monte_carlo(c);
    c.iterations = 20000;
    const auto b = monte_carlo(c);
    CHECK(b.stderr_efficiency / a.stderr_efficiency == doctest::Approx(1 / std::sqrt(2.0)).epsilon(0.2));

    c.iterations = 1500;
    c.threads = 1;
    const auto serial = monte_carlo(c);
    c.threads = 4;
    const auto parallel = monte_carlo(c);
    CHECK(serial.mean_efficiency == parallel.mean_efficiency);
    CHECK(serial.stderr_efficiency == parallel.stderr_efficiency);
    CHECK(serial.totals.collisions == parallel.totals.collisions);
    CHECK(serial.replication_means == parallel.replication_means);
}

TEST_CASE("optimal policy runs and respects the horizon")
{
    SimConfig c;
    c.n_channels = 3;
    c.chains.assign(3, {0.5, 0.7});
    c.actions = {3, 1, 1};
    c.policy = PolicyKind::optimal;
    c.slots = 5;
    c.iterations = 300;
    c.init_lo = 0.0;
    c.init_hi = 0.2;
    c.threads = 1;
    const auto opt = monte_carlo(c);
    c.policy = PolicyKind::myopic;
    const auto myo = monte_carlo(c);
    CHECK(opt.totals.accounted() == opt.totals.slots);
    CHECK(opt.mean_efficiency >= myo.mean_efficiency - 3 * myo.stderr_efficiency);
}

TEST_CASE("config validation")
{
    SimConfig c;
    CHECK_NOTHROW(c.validate());
    c.p_col = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.actions = {2, 3, 1};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.policy = PolicyKind::optimal;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.actions.estimate = 4;
    CHECK_NOTHROW(c.validate());
    c = {};
    c.p_eh = 1.0;
    try
    {
        c.validate();
        FAIL("expected rejection");
    }
    catch (const ConfigError& e)
    {
        CHECK(e.key() == "harvest.p_eh_mj_s");
    }
}

TEST_CASE("optimal, myopic and random ordering on short episodes")
{
    SimConfig c;
    c.n_channels = 2;
    c.chains = {{0.3, 0.8}, {0.5, 0.6}};
    c.actions = {2, 1, 1};
    c.slots = 3;
    c.horizon = 3;
    c.iterations = 10000;
    c.init_lo = 0.0;
    c.init_hi = 0.2;
    c.threads = 1;
    c.policy = PolicyKind::optimal;
    const auto opt = monte_carlo(c);
    c.policy = PolicyKind::myopic;
    const auto myo = monte_carlo(c);
    c.policy = PolicyKind::random;
    const auto rnd = monte_carlo(c);

    // Same environment streams, so compare replication by replication.
    auto paired = [](const MonteCarloResult& a, const MonteCarloResult& b) {
        const std::size_t n = a.replication_means.size();
        double m = 0, ss = 0;
        for (std::size_t i = 0; i < n; ++i)
            m += a.replication_means[i] - b.replication_means[i];
        m /= n;
        for (std::size_t i = 0; i < n; ++i)
        {
            const double d = a.replication_means[i] - b.replication_means[i] - m;
            ss += d * d;
        }
        return m / std::sqrt(ss / (n - 1) / n);
    };
    CHECK(paired(opt, myo) >= -1.645);
    CHECK(paired(myo, rnd) >= -1.645);
    CHECK(myo.mean_efficiency > rnd.mean_efficiency);
}
