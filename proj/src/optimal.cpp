#include "ehcr/optimal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "ehcr/error.hpp"

namespace ehcr {

void PlanningModel::validate() const
{
    const int n = transition.channels();
    if (n > max_optimal_channels)
        throw InfeasibleModel("optimal recursion supports at most "
                              + std::to_string(max_optimal_channels)
                              + " estimated channels, use the myopic policy");
    if (static_cast<int>(future.size()) != n)
        throw std::invalid_argument("planning model needs one option row per channel");
    for (const auto& row : future)
        if (row.size() != region_probs.size())
            throw std::invalid_argument("planning model needs one option per gain region");
    double sum = 0.0;
    for (double p : region_probs)
        sum += p;
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("region probabilities must sum to 1");
    if (!(p_h >= 0.0 && p_h <= 1.0) || !(e_h >= 0.0) || !(e_max >= 0.0) || !(e_est_total >= 0.0))
        throw std::invalid_argument("invalid harvesting or battery parameters");
}

namespace {

enum Child : std::size_t
{
    child_ack = 0,
    child_collision = 1,
    child_busy = 2,
};

struct BeliefNode
{
    std::vector<double> probs;
    std::vector<double> pred;      // after the transition
    std::vector<double> pred_idle; // per-channel idle marginal after prediction
    int propagated = -1;
    std::vector<std::array<int, 3>> children;
    std::vector<std::map<double, std::pair<double, double>>> pieces; // per horizon
};

using BeliefKey = std::array<std::int64_t, std::size_t{1} << max_optimal_channels>;

struct KeyHash
{
    std::size_t operator()(const BeliefKey& v) const noexcept
    {
        std::uint64_t h = 0xCBF29CE484222325ull;
        for (auto x : v)
            h = (h ^ static_cast<std::uint64_t>(x)) * 0x100000001B3ull;
        return static_cast<std::size_t>(h);
    }
};

constexpr int unset = -1;
constexpr int impossible = -2;
constexpr double inf = std::numeric_limits<double>::infinity();

// A value together with the battery interval [lo, hi) on which it holds.
struct Val
{
    double v = 0.0;
    double lo = -inf;
    double hi = inf;

    void clip(double a, double b)
    {
        lo = std::max(lo, a);
        hi = std::min(hi, b);
    }
    void clip(const Val& o, double shift)
    {
        clip(o.lo + shift, o.hi + shift);
    }
};

// Value pieces of one (horizon, belief) pair, keyed by interval start.
// Stored intervals are disjoint.
using Pieces = std::map<double, std::pair<double, double>>; // lo -> (hi, value)

}  // namespace

namespace detail {

// Memo and belief cache of the recursion; valid for one planning model.
//
// Rewards depend on the battery only through affordability thresholds, and
// the battery moves by translations and clamps, so every V_t(b, .) is a step
// function of e. Each memo entry records the interval around the queried
// energy on which its value is constant, and later queries anywhere inside it
// are answered without recursion.
class Solver
{
  public:
    explicit Solver(const PlanningModel& model) : m_(model), n_(model.transition.channels())
    {
        double worst = 0.0;
        for (const auto& row : m_.future)
            for (const auto& opt : row)
                if (opt.available)
                    worst = std::max(worst, opt.sense_cost + opt.access_cost);
        step_cost_max_ = m_.e_est_total + worst;
    }

    int intern(std::vector<double> probs)
    {
        BeliefKey key{};
        for (std::size_t s = 0; s < probs.size(); ++s)
            key[s] = static_cast<std::int64_t>(probs[s] * 0x1.0p44 + 0.5);
        auto [it, inserted] = belief_ids_.try_emplace(key, static_cast<int>(nodes_.size()));
        if (inserted)
        {
            BeliefNode node;
            node.probs = std::move(probs);
            node.pred.resize(node.probs.size());
            m_.transition.propagate(node.probs, node.pred);
            node.pred_idle.assign(n_, 0.0);
            for (std::size_t s = 0; s < node.pred.size(); ++s)
                for (int i = 0; i < n_; ++i)
                    if ((s >> i) & 1u)
                        node.pred_idle[i] += node.pred[s];
            node.children.assign(n_, {unset, unset, unset});
            node.pieces.resize(max_optimal_horizon + 1);
            nodes_.push_back(std::move(node));
        }
        return it->second;
    }

    // Expected value over the current slot's gain regions, `t` slots to go.
    Val expected(int t, int belief, double e)
    {
        if (t <= 0)
            return {};
        if (saturates(t) && e >= saturation(t))
        {
            Val r = lookup(t, belief, saturation(t));
            r.hi = inf;
            return r;
        }
        return lookup(t, belief, e);
    }

    // Value of skipping sensing this slot (estimation still charged if
    // affordable).
    Val idle_value(int t, int belief, double e)
    {
        Val r;
        if (e >= m_.e_est_total)
        {
            r.clip(m_.e_est_total, inf);
            if (t > 1)
            {
                const double after = std::max(0.0, e - m_.e_est_total);
                const Val next = harvest_then(t - 1, propagated(belief), after);
                r.v = next.v;
                r.clip(next, e - after);
            }
        }
        else
        {
            r.clip(-inf, m_.e_est_total);
            if (t > 1)
            {
                const Val next = harvest_then(t - 1, propagated(belief), e);
                r.v = next.v;
                r.clip(next, 0.0);
            }
        }
        return r;
    }

    std::size_t beliefs() const { return nodes_.size(); }

    double threshold(const SensingOption& opt) const
    {
        return m_.e_est_total + opt.sense_cost + opt.access_cost;
    }

    bool usable(const SensingOption& opt, double e) const
    {
        return opt.available && e >= m_.e_est_total
               && opt.sense_cost + opt.access_cost <= e - m_.e_est_total;
    }

    Val option_value(int t, int belief, double e, int ch, const SensingOption& opt)
    {
        const double p1 = nodes_[belief].pred_idle[ch];
        const double q_ack = p1 * (1.0 - m_.p_f);
        const double q_col = (1.0 - p1) * (1.0 - m_.p_d);
        const double q_busy = p1 * m_.p_f + (1.0 - p1) * m_.p_d;

        Val r{q_ack * opt.reward};
        if (t <= 1)
            return r;
        const double e_access = std::max(0.0, e - m_.e_est_total - opt.sense_cost - opt.access_cost);
        const double e_busy = std::max(0.0, e - m_.e_est_total - opt.sense_cost);
        auto branch = [&](double q, Child which, double after) {
            if (q <= 0.0)
                return;
            const Val next = harvest_then(t - 1, child(belief, ch, which), after);
            r.v += q * next.v;
            r.clip(next, e - after);
        };
        branch(q_ack, child_ack, e_access);
        branch(q_col, child_collision, e_access);
        branch(q_busy, child_busy, e_busy);
        return r;
    }

  private:
    bool saturates(int t) const { return m_.e_max >= (t - 1) * step_cost_max_; }
    double saturation(int t) const { return t * step_cost_max_; }

    Val lookup(int t, int belief, double e)
    {
        {
            const Pieces& pieces = nodes_[belief].pieces[t];
            auto it = pieces.upper_bound(e);
            if (it != pieces.begin())
            {
                --it;
                if (e < it->second.first)
                    return {it->second.second, it->first, it->second.first};
            }
        }
        const Val r = expected_uncached(t, belief, e);
        store(nodes_[belief].pieces[t], r);
        return r;
    }

    static void store(Pieces& pieces, const Val& r)
    {
        double lo = r.lo;
        double hi = r.hi;
        // Overlapping pieces with one value lie in one constant stretch and
        // are merged. Boundaries reached along different paths can differ in
        // the last bit; such slivers are trimmed off the new piece.
        auto same = [&](double v) { return std::abs(v - r.v) <= 1e-12 * std::max(1.0, std::abs(r.v)); };
        auto it = pieces.upper_bound(lo);
        if (it != pieces.begin() && std::prev(it)->second.first > lo)
            --it;
        while (it != pieces.end() && it->first < hi)
        {
            if (same(it->second.second))
            {
                lo = std::min(lo, it->first);
                hi = std::max(hi, it->second.first);
                it = pieces.erase(it);
            }
            else if (it->first <= lo)
            {
                lo = it->second.first;
                ++it;
            }
            else
            {
                hi = it->first;
                break;
            }
        }
        if (lo < hi)
            pieces.emplace(lo, std::make_pair(hi, r.v));
    }

    Val harvest_then(int t, int belief, double e)
    {
        if (t <= 0)
            return {};
        Val r{0.0};
        if (m_.p_h > 0.0)
        {
            const double cap = m_.e_max - m_.e_h;
            if (e + m_.e_h >= m_.e_max)
            {
                r.v += m_.p_h * expected(t, belief, m_.e_max).v;
                r.clip(cap, inf);
            }
            else
            {
                const Val up = expected(t, belief, e + m_.e_h);
                r.v += m_.p_h * up.v;
                r.clip(up, -m_.e_h);
                r.clip(-inf, cap);
            }
        }
        if (m_.p_h < 1.0)
        {
            const Val stay = expected(t, belief, e);
            r.v += (1.0 - m_.p_h) * stay.v;
            r.clip(stay, 0.0);
        }
        return r;
    }

    int propagated(int belief)
    {
        if (nodes_[belief].propagated == unset)
        {
            const int id = intern(nodes_[belief].pred);
            nodes_[belief].propagated = id;
        }
        return nodes_[belief].propagated;
    }

    int child(int belief, int ch, Child which)
    {
        int id = nodes_[belief].children[ch][which];
        if (id == unset)
        {
            static constexpr SenseOutcome outcome_of[] = {SenseOutcome::ack, SenseOutcome::collision,
                                                          SenseOutcome::busy};
            try
            {
                std::vector<double> next = nodes_[belief].pred;
                condition_belief(next, ch, outcome_of[which], m_.p_d, m_.p_f);
                id = intern(std::move(next));
            }
            catch (const InconsistentObservation&)
            {
                id = impossible;
            }
            nodes_[belief].children[ch][which] = id;
        }
        if (id == impossible)
            throw InconsistentObservation("recursion reached a zero-probability branch");
        return id;
    }

    Val expected_uncached(int t, int belief, double e)
    {
        Val r = idle_value(t, belief, e);
        if (e < m_.e_est_total)
            return r;
        const double idle = r.v;

        // Option values depend on a channel's own region only, so the
        // expectation of the maximum over the independent regions follows
        // from the product of per-channel CDFs.
        const std::size_t k = m_.region_probs.size();
        std::array<double, max_optimal_channels * 16> q;
        std::array<double, max_optimal_channels * 16> levels;
        std::size_t n_levels = 0;
        for (int i = 0; i < n_; ++i)
            for (std::size_t r_ = 0; r_ < k; ++r_)
            {
                const auto& opt = m_.future[i][r_];
                q[i * k + r_] = -inf;
                if (!opt.available || !(m_.region_probs[r_] > 0.0))
                    continue;
                const double thr = threshold(opt);
                if (usable(opt, e))
                {
                    r.clip(thr, inf);
                    const Val v = option_value(t, belief, e, i, opt);
                    r.clip(v, 0.0);
                    q[i * k + r_] = v.v;
                    if (v.v > idle)
                        levels[n_levels++] = v.v;
                }
                else
                {
                    r.clip(-inf, thr);
                }
            }
        if (n_levels == 0)
            return r;

        std::sort(levels.begin(), levels.begin() + n_levels);
        n_levels = std::unique(levels.begin(), levels.begin() + n_levels) - levels.begin();

        // E[max(idle, Y)] = idle + sum_j (v_j - v_{j-1}) P(Y > v_{j-1}), v_0 = idle.
        double result = idle;
        double prev = idle;
        for (std::size_t j = 0; j < n_levels; ++j)
        {
            double cdf = 1.0;
            for (int i = 0; i < n_; ++i)
            {
                double below = 0.0;
                for (std::size_t r_ = 0; r_ < k; ++r_)
                    if (q[i * k + r_] <= prev)
                        below += m_.region_probs[r_];
                cdf *= std::min(below, 1.0);
            }
            result += (levels[j] - prev) * (1.0 - cdf);
            prev = levels[j];
        }
        r.v = result;
        return r;
    }

    const PlanningModel& m_;
    int n_;
    double step_cost_max_ = 0.0;
    std::vector<BeliefNode> nodes_;
    std::unordered_map<BeliefKey, int, KeyHash> belief_ids_;
};

}  // namespace detail

namespace {

void check_sizes(const BeliefJoint& b, int horizon, const PlanningModel& model)
{
    model.validate();
    if (horizon < 1 || horizon > max_optimal_horizon)
        throw InfeasibleModel("optimal recursion supports horizons 1.."
                              + std::to_string(max_optimal_horizon) + ", use the myopic policy");
    if (b.channels() != model.transition.channels())
        throw std::invalid_argument("belief and planning model disagree on channel count");
}

}  // namespace

OptimalPlanner::OptimalPlanner(const PlanningModel& model) : model_(model)
{
    model_.validate();
    solver_ = std::make_unique<detail::Solver>(model_);
}

OptimalPlanner::~OptimalPlanner() = default;

std::size_t OptimalPlanner::cached_beliefs() const { return solver_->beliefs(); }

OptimalDecision OptimalPlanner::decide(const BeliefJoint& b, double e, std::span<const SensingOption> current,
                                       int horizon)
{
    check_sizes(b, horizon, model_);
    if (static_cast<int>(current.size()) != model_.transition.channels())
        throw std::invalid_argument("need one current option per channel");

    const int root = solver_->intern(b.probs());
    OptimalDecision best{solver_->idle_value(horizon, root, e).v, -1};
    for (int i = 0; i < static_cast<int>(current.size()); ++i)
    {
        if (!solver_->usable(current[i], e))
            continue;
        const double v = solver_->option_value(horizon, root, e, i, current[i]).v;
        // Sensing wins ties against idling; earlier channels win ties among
        // channels. Values equal up to rounding count as ties.
        const double tol = 1e-12 * std::max(1.0, std::abs(best.value));
        if (best.channel < 0 ? v >= best.value - tol : v > best.value + tol)
            best = {v, i};
    }
    return best;
}

double OptimalPlanner::expected(const BeliefJoint& b, double e, int horizon)
{
    check_sizes(b, horizon, model_);
    return solver_->expected(horizon, solver_->intern(b.probs()), e).v;
}

OptimalDecision optimal_value(const BeliefJoint& b, double e, std::span<const SensingOption> current,
                              int horizon, const PlanningModel& model)
{
    return OptimalPlanner(model).decide(b, e, current, horizon);
}

OptimalDecision optimal_value(const BeliefJoint& b, double e, std::span<const int> regions,
                              int horizon, const PlanningModel& model)
{
    check_sizes(b, horizon, model);
    if (static_cast<int>(regions.size()) != model.transition.channels())
        throw std::invalid_argument("need one gain region per channel");
    std::vector<SensingOption> current;
    for (std::size_t i = 0; i < regions.size(); ++i)
    {
        const int r = regions[i];
        if (r < 1 || r > static_cast<int>(model.region_probs.size()))
            throw std::invalid_argument("gain region out of range");
        current.push_back(model.future[i][static_cast<std::size_t>(r - 1)]);
    }
    return optimal_value(b, e, std::span<const SensingOption>(current), horizon, model);
}

double expected_optimal_value(const BeliefJoint& b, double e, int horizon, const PlanningModel& model)
{
    return OptimalPlanner(model).expected(b, e, horizon);
}

}  // namespace ehcr
