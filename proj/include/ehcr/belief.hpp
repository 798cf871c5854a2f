#pragma once

#include <span>
#include <vector>

#include "ehcr/occupancy.hpp"

namespace ehcr {

/// What the SU learned about the sensed channel at the end of a slot.
enum class SenseOutcome
{
    not_sensed,      ///< channel estimated but not sensed (or SU idle)
    busy,            ///< o = 0
    ack,             ///< o = 1, transmitted, ACK = 1
    collision,       ///< o = 1, transmitted, no ACK
    idle_no_access,  ///< o = 1 but nothing was sent (baseline with eta = 0)
};

/// P(o | s) of the energy detector.
double observation_prob(int o, Occupancy s, double p_d, double p_f);

/// Probability vector over the 2^N joint occupancy states, held as the
/// posterior at the end of a slot (before the next transition).
class BeliefJoint
{
  public:
    explicit BeliefJoint(std::vector<double> b);

    /// Product belief from per-channel idle probabilities.
    static BeliefJoint from_marginals(std::span<const double> idle_probs);

    std::size_t size() const { return b_.size(); }
    int channels() const;
    double operator[](std::size_t s) const { return b_[s]; }
    const std::vector<double>& probs() const { return b_; }

    /// Marginal idle probability of channel i.
    double idle_prob(int i) const;

  private:
    std::vector<double> b_;
};

/// Per-channel idle probabilities pi_i.
struct BeliefFactored
{
    std::vector<double> pi;

    /// Predicted idle probability of channel i for the coming slot.
    double predicted(int i, const ChannelChain& chain) const { return chain.predict(pi.at(i)); }
};

/// Joint Bayes update: predict with the product chain, then condition on
/// the outcome observed on channel `sensed`. Throws InconsistentObservation
/// when the outcome has zero probability under the predicted belief.
BeliefJoint update_belief_joint(const BeliefJoint& b, int sensed, SenseOutcome outcome,
                                const JointTransition& jt, double p_d, double p_f);

/// Conditioning step of update_belief_joint, in place on a predicted belief.
void condition_belief(std::span<double> pred, int sensed, SenseOutcome outcome, double p_d, double p_f);

/// Prediction step alone.
BeliefJoint propagate_belief(const BeliefJoint& b, const JointTransition& jt);

/// Factored (per-channel) update of one idle probability.
double update_belief_myopic(double pi, SenseOutcome outcome, const ChannelChain& chain,
                            double p_d, double p_f);

}  // namespace ehcr
