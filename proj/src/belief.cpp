#include "ehcr/belief.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "ehcr/error.hpp"

namespace ehcr {

double observation_prob(int o, Occupancy s, double p_d, double p_f)
{
    const double p_zero = s == Occupancy::busy ? p_d : p_f;
    if (o == 0)
        return p_zero;
    if (o == 1)
        return 1.0 - p_zero;
    throw std::invalid_argument("observation must be 0 or 1");
}

BeliefJoint::BeliefJoint(std::vector<double> b) : b_(std::move(b))
{
    if (b_.empty() || !std::has_single_bit(b_.size()))
        throw std::invalid_argument("joint belief size must be a power of two");
    double sum = 0.0;
    for (double p : b_)
    {
        if (!(p >= 0.0))
            throw std::invalid_argument("joint belief entries must be non-negative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("joint belief must sum to 1");
}

BeliefJoint BeliefJoint::from_marginals(std::span<const double> idle_probs)
{
    const std::size_t n = std::size_t{1} << idle_probs.size();
    std::vector<double> b(n, 1.0);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t i = 0; i < idle_probs.size(); ++i)
            b[s] *= ((s >> i) & 1u) ? idle_probs[i] : 1.0 - idle_probs[i];
    return BeliefJoint(std::move(b));
}

int BeliefJoint::channels() const { return std::countr_zero(b_.size()); }

double BeliefJoint::idle_prob(int i) const
{
    double p = 0.0;
    for (std::size_t s = 0; s < b_.size(); ++s)
        if ((s >> i) & 1u)
            p += b_[s];
    return p;
}

BeliefJoint propagate_belief(const BeliefJoint& b, const JointTransition& jt)
{
    std::vector<double> out(b.size());
    jt.propagate(b.probs(), out);
    return BeliefJoint(std::move(out));
}

void condition_belief(std::span<double> pred, int sensed, SenseOutcome outcome, double p_d, double p_f)
{
    if (outcome == SenseOutcome::not_sensed)
        return;
    if (sensed < 0 || (std::size_t{1} << sensed) >= pred.size())
        throw std::invalid_argument("sensed channel out of range");

    // Likelihood of the outcome given the sensed channel's occupancy.
    double like_busy = 0.0;
    double like_idle = 0.0;
    switch (outcome)
    {
    case SenseOutcome::ack:
        like_idle = 1.0;
        break;
    case SenseOutcome::collision:
        like_busy = 1.0;
        break;
    case SenseOutcome::busy:
        like_busy = p_d;
        like_idle = p_f;
        break;
    case SenseOutcome::idle_no_access:
        like_busy = 1.0 - p_d;
        like_idle = 1.0 - p_f;
        break;
    case SenseOutcome::not_sensed:
        break;
    }

    double norm = 0.0;
    for (std::size_t s = 0; s < pred.size(); ++s)
    {
        pred[s] *= ((s >> sensed) & 1u) ? like_idle : like_busy;
        norm += pred[s];
    }
    if (!(norm > 0.0))
        throw InconsistentObservation("observation has zero probability under the belief");
    for (double& p : pred)
        p /= norm;
}

BeliefJoint update_belief_joint(const BeliefJoint& b, int sensed, SenseOutcome outcome,
                                const JointTransition& jt, double p_d, double p_f)
{
    if (outcome != SenseOutcome::not_sensed && (sensed < 0 || sensed >= b.channels()))
        throw std::invalid_argument("sensed channel out of range");
    std::vector<double> pred(b.size());
    jt.propagate(b.probs(), pred);
    condition_belief(pred, sensed, outcome, p_d, p_f);
    return BeliefJoint(std::move(pred));
}

double update_belief_myopic(double pi, SenseOutcome outcome, const ChannelChain& chain,
                            double p_d, double p_f)
{
    if (!(pi >= 0.0 && pi <= 1.0))
        throw std::invalid_argument("idle belief must lie in [0, 1]");
    const double x = chain.predict(pi);
    const double y = pi * (1.0 - chain.beta) + (1.0 - pi) * (1.0 - chain.alpha);
    switch (outcome)
    {
    case SenseOutcome::not_sensed:
        return x;
    case SenseOutcome::ack:
        return 1.0;
    case SenseOutcome::collision:
        return 0.0;
    case SenseOutcome::busy:
    {
        const double den = x * p_f + y * p_d;
        if (!(den > 0.0))
            throw InconsistentObservation("o = 0 impossible under the belief");
        return x * p_f / den;
    }
    case SenseOutcome::idle_no_access:
    {
        const double den = x * (1.0 - p_f) + y * (1.0 - p_d);
        if (!(den > 0.0))
            throw InconsistentObservation("o = 1 impossible under the belief");
        return x * (1.0 - p_f) / den;
    }
    }
    return x;
}

}  // namespace ehcr
