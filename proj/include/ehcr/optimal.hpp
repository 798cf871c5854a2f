#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "ehcr/belief.hpp"
#include "ehcr/occupancy.hpp"

namespace ehcr {

/// A channel the SU may sense in a slot, with the consequences of doing so.
struct SensingOption
{
    bool available = false;  ///< rate > 0 and the channel can be sensed in time
    double reward = 0.0;     ///< reward collected on ACK
    double sense_cost = 0.0; ///< e_s [J]
    double access_cost = 0.0;///< e_ckt + e_tr [J], charged whenever o = 1
};

/// Everything the finite-horizon recursion needs about future slots.
///
/// Future gains are summarized per region: `future[i][k]` is the option of
/// channel i when its gain falls in region k + 1, evaluated at that region's
/// representative gain. Regions are i.i.d. across channels and slots with
/// probabilities `region_probs`.
struct PlanningModel
{
    JointTransition transition;
    double p_d = 0.9;
    double p_f = 0.1;
    std::vector<double> region_probs;
    std::vector<std::vector<SensingOption>> future;
    double e_est_total = 0.0; ///< estimation energy charged in every active slot
    double p_h = 0.0;
    double e_h = 0.0;
    double e_max = 0.0;

    void validate() const;
};

struct OptimalDecision
{
    double value = 0.0;
    int channel = -1; ///< 0-based sensed channel, -1 = stay idle
};

/// Caps that keep the exact recursion tractable.
inline constexpr int max_optimal_horizon = 6;
inline constexpr int max_optimal_channels = 4;

/// Best action and its value with `horizon` slots to go, given the options
/// realized in the current slot. Throws InfeasibleModel beyond the caps.
OptimalDecision optimal_value(const BeliefJoint& b, double e, std::span<const SensingOption> current,
                              int horizon, const PlanningModel& model);

namespace detail {
class Solver;
}

/// Recursion state that can be reused across decisions under one planning
/// model. Not thread-safe; give each worker its own.
class OptimalPlanner
{
  public:
    explicit OptimalPlanner(const PlanningModel& model);
    ~OptimalPlanner();
    OptimalPlanner(const OptimalPlanner&) = delete;
    OptimalPlanner& operator=(const OptimalPlanner&) = delete;

    OptimalDecision decide(const BeliefJoint& b, double e, std::span<const SensingOption> current,
                           int horizon);
    double expected(const BeliefJoint& b, double e, int horizon);

    const PlanningModel& model() const { return model_; }
    std::size_t cached_beliefs() const;

  private:
    PlanningModel model_;
    std::unique_ptr<detail::Solver> solver_;
};

/// Same, with the current slot described by per-channel gain regions
/// (1-based) and evaluated like a future slot.
OptimalDecision optimal_value(const BeliefJoint& b, double e, std::span<const int> regions,
                              int horizon, const PlanningModel& model);

/// Value before the current gains are revealed: expectation of the above
/// over the region law.
double expected_optimal_value(const BeliefJoint& b, double e, int horizon,
                              const PlanningModel& model);

}  // namespace ehcr
