#include "ehcr/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ehcr {

namespace {

bool affordable(double e, const SlotBudget& budget, const phy::TxEnergies& tx)
{
    return budget.e_s + tx.e_ckt + tx.e_tr <= e - budget.e_est_total;
}

std::vector<int> order_by_score(std::vector<std::pair<int, double>> scored, int limit)
{
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second)
            return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<int> order;
    for (const auto& [ch, score] : scored)
    {
        if (static_cast<int>(order.size()) >= limit)
            break;
        order.push_back(ch);
    }
    return order;
}

}  // namespace

TxPlan plan_adaptive(double g, double e, const SlotBudget& budget, const phy::RateTable& rt,
                     const phy::PowerParams& pp)
{
    TxPlan plan;
    plan.region = phy::gain_region(g, rt);
    if (plan.region == 1 || !(budget.t_tr > 0.0))
        return plan;
    const int m = rt.constellation(plan.region);
    const double p_tr = phy::transmit_power(g, m, pp);
    const auto tx = phy::transmission_energies(p_tr, budget.t_tr, pp);
    if (!affordable(e, budget, tx))
    {
        plan.energy_limited = true;
        return plan;
    }
    plan.eta = rt.efficiency(plan.region);
    plan.constellation = m;
    plan.p_tr = p_tr;
    plan.energies = tx;
    return plan;
}

double spectral_efficiency(double g, double e, const SlotBudget& budget,
                           const phy::RateTable& rt, const phy::PowerParams& pp)
{
    return plan_adaptive(g, e, budget, rt, pp).eta;
}

TxPlan plan_constant_rate(double g, double e, int fixed_m, const SlotBudget& budget,
                          const phy::PowerParams& pp)
{
    TxPlan plan;
    if (fixed_m < 2)
        throw std::invalid_argument("constant-rate constellation must be >= 2");
    if (!(g > 0.0) || !(budget.t_tr > 0.0))
        return plan;
    const double p_tr = phy::transmit_power(g, fixed_m, pp);
    const auto tx = phy::transmission_energies(p_tr, budget.t_tr, pp);
    if (!std::isfinite(tx.total()) || !affordable(e, budget, tx))
    {
        plan.energy_limited = true;
        return plan;
    }
    plan.eta = std::log2(static_cast<double>(fixed_m));
    plan.constellation = fixed_m;
    plan.p_tr = p_tr;
    plan.energies = tx;
    return plan;
}

double baseline_constant_rate(double g, double e, int fixed_m, const SlotBudget& budget,
                              const phy::PowerParams& pp)
{
    return plan_constant_rate(g, e, fixed_m, budget, pp).eta;
}

double myopic_expected_reward(double pi, const ChannelChain& chain, double eta)
{
    return chain.predict(pi) * eta;
}

std::vector<int> rank_channels_myopic(const BeliefFactored& beliefs, std::span<const double> values,
                                      std::span<const ChannelChain> chains, int limit)
{
    std::vector<std::pair<int, double>> scored;
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        if (values[i] > 0.0)
            scored.emplace_back(static_cast<int>(i),
                                myopic_expected_reward(beliefs.pi.at(i), chains[i], values[i]));
    }
    return order_by_score(std::move(scored), limit);
}

std::vector<int> baseline_belief_bandwidth(const BeliefFactored& beliefs,
                                           std::span<const double> bandwidths,
                                           std::span<const ChannelChain> chains,
                                           std::span<const int> candidates, int limit)
{
    std::vector<std::pair<int, double>> scored;
    for (int ch : candidates)
        scored.emplace_back(ch, chains[ch].predict(beliefs.pi.at(ch)) * bandwidths[ch]);
    return order_by_score(std::move(scored), limit);
}

std::vector<int> baseline_random(std::span<const int> candidates, int limit, Rng& rng)
{
    std::vector<int> order(candidates.begin(), candidates.end());
    for (std::size_t i = order.size(); i > 1; --i)
    {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(order[i - 1], order[j]);
    }
    if (static_cast<int>(order.size()) > limit)
        order.resize(static_cast<std::size_t>(std::max(limit, 0)));
    return order;
}

}  // namespace ehcr
