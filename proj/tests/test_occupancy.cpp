#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "ehcr/error.hpp"
#include "ehcr/occupancy.hpp"
#include "ehcr/rng.hpp"
#include "oracles.hpp"

using namespace ehcr;

TEST_CASE("absorbing chains")
{
    Rng rng(3);
    for (int i = 0; i < 1000; ++i)
    {
        const double u = rng.uniform();
        CHECK(step_channel(Occupancy::idle, {0.4, 1.0}, u) == Occupancy::idle);
        CHECK(step_channel(Occupancy::busy, {0.0, 0.3}, u) == Occupancy::busy);
    }
}

TEST_CASE("single channel matrix")
{
    JointTransition jt({{0.5, 0.7}});
    const auto m = jt.matrix();
    REQUIRE(m.size() == 4);
    CHECK(m[0] == doctest::Approx(0.5));
    CHECK(m[1] == doctest::Approx(0.5));
    CHECK(m[2] == doctest::Approx(0.3));
    CHECK(m[3] == doctest::Approx(0.7));
}

TEST_CASE("two channel matrix is the tensor product")
{
    const ChannelChain a{0.3, 0.8}, b{0.45, 0.65};
    JointTransition jt({a, b});
    const auto m = jt.matrix();
    for (int from = 0; from < 4; ++from)
        for (int to = 0; to < 4; ++to)
        {
            const double want = oracle::chain_p(a, from & 1, to & 1) * oracle::chain_p(b, from >> 1, to >> 1);
            CHECK(m[from * 4 + to] == doctest::Approx(want).epsilon(1e-15));
        }
}

TEST_CASE("rows sum to one and marginals recover each chain")
{
    Rng rng(5);
    for (int rep = 0; rep < 20; ++rep)
    {
        std::vector<ChannelChain> chains;
        const int n = 1 + static_cast<int>(rng.below(5));
        for (int i = 0; i < n; ++i)
            chains.push_back({rng.uniform(), rng.uniform()});
        JointTransition jt(chains);
        const auto m = jt.matrix();
        const std::size_t s = jt.states();
        for (std::size_t from = 0; from < s; ++from)
        {
            double row = 0;
            for (std::size_t to = 0; to < s; ++to)
                row += m[from * s + to];
            CHECK(std::abs(row - 1.0) <= 1e-12);
        }
        for (int i = 0; i < n; ++i)
            for (std::size_t from = 0; from < s; ++from)
            {
                double to_idle = 0;
                for (std::size_t to = 0; to < s; ++to)
                    if ((to >> i) & 1u)
                        to_idle += m[from * s + to];
                CHECK(to_idle == doctest::Approx(chains[i].idle_next((from >> i) & 1u ? Occupancy::idle : Occupancy::busy)).epsilon(1e-13));
            }
    }
}

TEST_CASE("propagate matches the dense matrix")
{
    JointTransition jt({{0.3, 0.8}, {0.4, 0.7}, {0.6, 0.5}});
    Rng rng(9);
    std::vector<double> b(8);
    double z = 0;
    for (auto& x : b)
        z += x = rng.uniform();
    for (auto& x : b)
        x /= z;
    std::vector<double> out(8);
    jt.propagate(b, out);
    const auto m = jt.matrix();
    for (int to = 0; to < 8; ++to)
    {
        double want = 0;
        for (int from = 0; from < 8; ++from)
            want += b[from] * m[from * 8 + to];
        CHECK(out[to] == doctest::Approx(want).epsilon(1e-14));
    }
}

TEST_CASE("joint model size limits")
{
    CHECK_THROWS_AS(JointTransition(std::vector<ChannelChain>{}), InfeasibleModel);
    CHECK_THROWS_AS(JointTransition(std::vector<ChannelChain>(JointTransition::max_channels + 1)), InfeasibleModel);
}

TEST_CASE("stationary idle probability")
{
    // Power iteration on the 2x2 chain.
    auto power = [](ChannelChain c) {
        double pi = 0.5;
        for (int i = 0; i < 100000; ++i)
        {
            const double next = c.predict(pi);
            if (std::abs(next - pi) < 1e-15)
                break;
            pi = next;
        }
        return pi;
    };
    CHECK(stationary_idle_prob({0.5, 0.7}) == doctest::Approx(0.625).epsilon(1e-12));
    CHECK(stationary_idle_prob({0.5, 0.7}) == doctest::Approx(power({0.5, 0.7})).epsilon(1e-12));
    CHECK(stationary_idle_prob({0.5, 0.5}) == doctest::Approx(0.5));
    CHECK(stationary_idle_prob({1.0, 1.0}) == 1.0);
    CHECK(stationary_idle_prob({0.3, 0.8}) == doctest::Approx(power({0.3, 0.8})).epsilon(1e-12));
    CHECK_THROWS_AS(stationary_idle_prob({0.0, 1.0}), std::domain_error);
}

TEST_CASE("long chain occupancy")
{
    const ChannelChain c{0.3, 0.8};
    const double pi = stationary_idle_prob(c);
    Rng rng(77);
    Occupancy s = rng.uniform() < pi ? Occupancy::idle : Occupancy::busy;
    const int n = 1000000;
    int idle = 0;
    for (int i = 0; i < n; ++i)
    {
        s = step_channel(s, c, rng.uniform());
        idle += s == Occupancy::idle;
    }
    // Correlated samples: variance inflated by (1 + rho) / (1 - rho), rho = beta - alpha.
    const double rho = c.beta - c.alpha;
    const double se = std::sqrt(pi * (1 - pi) / n * (1 + rho) / (1 - rho));
    CHECK(std::abs(idle / double(n) - pi) <= 3 * se);
}

TEST_CASE("seeded chains are reproducible")
{
    auto run = [] {
        Rng rng(123);
        Occupancy s = Occupancy::busy;
        std::vector<Occupancy> path;
        for (int i = 0; i < 500; ++i)
            path.push_back(s = step_channel(s, {0.4, 0.6}, rng.uniform()));
        return path;
    };
    CHECK(run() == run());
}
