#include "ehcr/occupancy.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "ehcr/error.hpp"

namespace ehcr {

void ChannelChain::validate() const
{
    if (!(alpha >= 0.0 && alpha <= 1.0) || !(beta >= 0.0 && beta <= 1.0))
        throw std::invalid_argument("channel transition probabilities must lie in [0, 1]");
}

Occupancy step_channel(Occupancy s, const ChannelChain& chain, double u)
{
    return u < chain.idle_next(s) ? Occupancy::idle : Occupancy::busy;
}

double stationary_idle_prob(const ChannelChain& chain)
{
    const double leave = chain.alpha + (1.0 - chain.beta);
    if (!(leave > 0.0))
        throw std::domain_error("chain with alpha = 0, beta = 1 has no unique stationary law");
    return chain.alpha / leave;
}

JointTransition::JointTransition(std::vector<ChannelChain> chains) : chains_(std::move(chains))
{
    if (chains_.empty() || static_cast<int>(chains_.size()) > max_channels)
        throw InfeasibleModel("joint model over " + std::to_string(chains_.size())
                              + " channels infeasible, use the factored belief");
    for (const auto& c : chains_)
        c.validate();
}

double JointTransition::operator()(std::size_t from, std::size_t to) const
{
    double p = 1.0;
    for (std::size_t i = 0; i < chains_.size(); ++i)
    {
        const bool was_idle = (from >> i) & 1u;
        const bool is_idle = (to >> i) & 1u;
        const double q = chains_[i].idle_next(was_idle ? Occupancy::idle : Occupancy::busy);
        p *= is_idle ? q : 1.0 - q;
    }
    return p;
}

std::vector<double> JointTransition::matrix() const
{
    const std::size_t n = states();
    std::vector<double> m(n * n);
    for (std::size_t from = 0; from < n; ++from)
        for (std::size_t to = 0; to < n; ++to)
            m[from * n + to] = (*this)(from, to);
    return m;
}

void JointTransition::propagate(std::span<const double> in, std::span<double> out) const
{
    const std::size_t n = states();
    if (in.size() != n || out.size() != n)
        throw std::invalid_argument("belief size does not match joint chain");
    std::copy(in.begin(), in.end(), out.begin());
    for (std::size_t i = 0; i < chains_.size(); ++i)
    {
        const std::size_t bit = std::size_t{1} << i;
        const double a = chains_[i].alpha;
        const double b = chains_[i].beta;
        for (std::size_t s = 0; s < n; ++s)
        {
            if (s & bit)
                continue;
            const double busy = out[s];
            const double idle = out[s | bit];
            out[s] = busy * (1.0 - a) + idle * (1.0 - b);
            out[s | bit] = busy * a + idle * b;
        }
    }
}

}  // namespace ehcr
