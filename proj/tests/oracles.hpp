#pragma once

// Reference implementations used by the unit and acceptance tests. They are
// written from the model equations directly and share no code with the
// library beyond plain data types.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ehcr/belief.hpp"
#include "ehcr/occupancy.hpp"
#include "ehcr/optimal.hpp"
#include "ehcr/selection.hpp"

namespace oracle {

// Gaussian tail 1/2 - int_0^x phi, composite Simpson in long double.
inline long double q_tail(long double x)
{
    const bool neg = x < 0;
    const long double a = neg ? -x : x;
    const int n = 4000;
    const long double h = a / n;
    auto phi = [](long double t) { return expl(-t * t / 2) / sqrtl(2 * 3.14159265358979323846264338327950288L); };
    long double s = phi(0) + phi(a);
    for (int i = 1; i < n; ++i)
        s += (i % 2 ? 4 : 2) * phi(i * h);
    const long double area = s * h / 3;
    return neg ? 0.5L + area : 0.5L - area;
}

// Q^-1 by bisection on the tail integral.
inline long double q_inverse(long double p)
{
    long double lo = -40, hi = 40;
    for (int it = 0; it < 90; ++it)
    {
        const long double mid = (lo + hi) / 2;
        if (q_tail(mid) > p)
            lo = mid;
        else
            hi = mid;
    }
    return (lo + hi) / 2;
}

// Energy-detector sample count evaluated directly in long double.
inline std::int64_t sensing_samples(long double p_d, long double p_f, long double snr)
{
    const long double r = powl(1 + snr, -1.0L / 3);
    const long double p = (r * q_inverse(p_f) - q_inverse(p_d)) / (1 - r);
    const long double root = p + sqrtl(p * p + 4);
    return static_cast<std::int64_t>(ceill(root * root / 36));
}

// One-channel 2x2 transition entry P(from -> to), 1 = idle.
inline double chain_p(const ehcr::ChannelChain& c, int from, int to)
{
    const double p_idle = from ? c.beta : c.alpha;
    return to ? p_idle : 1.0 - p_idle;
}

// Likelihood of a slot outcome given the sensed channel's state.
inline double likelihood(ehcr::SenseOutcome o, int idle, double p_d, double p_f)
{
    using ehcr::SenseOutcome;
    switch (o)
    {
    case SenseOutcome::not_sensed: return 1.0;
    case SenseOutcome::busy: return idle ? p_f : p_d;
    case SenseOutcome::ack: return idle ? 1.0 - p_f : 0.0;
    case SenseOutcome::collision: return idle ? 0.0 : 1.0 - p_d;
    case SenseOutcome::idle_no_access: return idle ? 1.0 - p_f : 1.0 - p_d;
    }
    return 0.0;
}

// Brute-force Bayes over all 2^N joint states: prior x transition x
// likelihood, normalized. Returns an empty vector when the outcome is
// impossible.
inline std::vector<double> bayes(const std::vector<double>& prior, const std::vector<ehcr::ChannelChain>& chains,
                                 int sensed, ehcr::SenseOutcome o, double p_d, double p_f)
{
    const int n = static_cast<int>(chains.size());
    const int states = 1 << n;
    std::vector<double> post(states, 0.0);
    for (int to = 0; to < states; ++to)
    {
        double mass = 0.0;
        for (int from = 0; from < states; ++from)
        {
            double p = prior[from];
            for (int i = 0; i < n; ++i)
                p *= chain_p(chains[i], (from >> i) & 1, (to >> i) & 1);
            mass += p;
        }
        const double like = sensed >= 0 ? likelihood(o, (to >> sensed) & 1, p_d, p_f) : 1.0;
        post[to] = mass * like;
    }
    double z = 0.0;
    for (double p : post)
        z += p;
    if (!(z > 0.0))
        return {};
    for (double& p : post)
        p /= z;
    return post;
}

inline double idle_marginal(const std::vector<double>& b, int ch)
{
    double p = 0.0;
    for (std::size_t s = 0; s < b.size(); ++s)
        if ((s >> ch) & 1u)
            p += b[s];
    return p;
}

// Expectimax over the full history tree of a planning model: every node is a
// (belief, battery, slots left) triple reached by one history of regions,
// actions, outcomes and harvests. No memo, no belief sharing. Maximizing at
// every node is the same as maximizing over whole policy trees because the
// subtrees are independent choices.
class TreeSearch
{
  public:
    // chooser(belief, e, options) picks a channel or -1; null = maximize.
    using Chooser = int (*)(const std::vector<double>&, double, const std::vector<ehcr::SensingOption>&,
                            const ehcr::PlanningModel&);

    TreeSearch(const ehcr::PlanningModel& m, Chooser chooser = nullptr) : m_(m), choose_(chooser) {}

    // Value before the slot's regions are drawn.
    double expected(const std::vector<double>& b, double e, int t) const
    {
        if (t <= 0)
            return 0.0;
        const int n = m_.transition.channels();
        const int k = static_cast<int>(m_.region_probs.size());
        int combos = 1;
        for (int i = 0; i < n; ++i)
            combos *= k;
        double v = 0.0;
        std::vector<int> regions(n);
        for (int c = 0; c < combos; ++c)
        {
            double p = 1.0;
            int rest = c;
            for (int i = 0; i < n; ++i)
            {
                regions[i] = rest % k;
                rest /= k;
                p *= m_.region_probs[regions[i]];
            }
            if (p == 0.0)
                continue;
            v += p * given_regions(b, e, t, regions);
        }
        return v;
    }

    // Value once the regions (0-based) of this slot are known.
    double given_regions(const std::vector<double>& b, double e, int t, const std::vector<int>& regions) const
    {
        std::vector<ehcr::SensingOption> opts;
        for (std::size_t i = 0; i < regions.size(); ++i)
            opts.push_back(m_.future[i][regions[i]]);
        return given_options(b, e, t, opts);
    }

    double given_options(const std::vector<double>& b, double e, int t,
                         const std::vector<ehcr::SensingOption>& opts) const
    {
        if (choose_)
        {
            const int c = choose_(b, e, opts, m_);
            return c < 0 ? idle(b, e, t) : sense(b, e, t, c, opts[c]);
        }
        double best = idle(b, e, t);
        for (std::size_t i = 0; i < opts.size(); ++i)
            if (usable(opts[i], e))
                best = std::max(best, sense(b, e, t, static_cast<int>(i), opts[i]));
        return best;
    }

    bool usable(const ehcr::SensingOption& o, double e) const
    {
        return o.available && e >= m_.e_est_total && m_.e_est_total + o.sense_cost + o.access_cost <= e;
    }

    double idle(const std::vector<double>& b, double e, int t) const
    {
        const double after = e >= m_.e_est_total ? e - m_.e_est_total : e;
        return t > 1 ? harvest(bayes(b, chains(), -1, ehcr::SenseOutcome::not_sensed, 0, 0), after, t - 1) : 0.0;
    }

    double sense(const std::vector<double>& b, double e, int t, int ch, const ehcr::SensingOption& o) const
    {
        const auto pred = bayes(b, chains(), -1, ehcr::SenseOutcome::not_sensed, 0, 0);
        const double pi = idle_marginal(pred, ch);
        const double q_ack = pi * (1 - m_.p_f);
        const double q_col = (1 - pi) * (1 - m_.p_d);
        const double q_busy = pi * m_.p_f + (1 - pi) * m_.p_d;
        double v = q_ack * o.reward;
        if (t <= 1)
            return v;
        const double e_tx = e - m_.e_est_total - o.sense_cost - o.access_cost;
        const double e_busy = e - m_.e_est_total - o.sense_cost;
        auto branch = [&](double q, ehcr::SenseOutcome oc, double after) {
            if (q <= 0.0)
                return;
            v += q * harvest(bayes(b, chains(), ch, oc, m_.p_d, m_.p_f), after, t - 1);
        };
        branch(q_ack, ehcr::SenseOutcome::ack, e_tx);
        branch(q_col, ehcr::SenseOutcome::collision, e_tx);
        branch(q_busy, ehcr::SenseOutcome::busy, e_busy);
        return v;
    }

  private:
    double harvest(const std::vector<double>& b, double e, int t) const
    {
        double v = 0.0;
        if (m_.p_h > 0)
            v += m_.p_h * expected(b, std::min(e + m_.e_h, m_.e_max), t);
        if (m_.p_h < 1)
            v += (1 - m_.p_h) * expected(b, e, t);
        return v;
    }

    const std::vector<ehcr::ChannelChain>& chains() const { return m_.transition.chains(); }

    const ehcr::PlanningModel& m_;
    Chooser choose_;
};

// Two channels, four regions, integer energies 0..6 and unit harvests of 2.
inline ehcr::PlanningModel toy_model()
{
    using ehcr::SensingOption;
    ehcr::PlanningModel m{.transition = ehcr::JointTransition({{0.3, 0.8}, {0.5, 0.6}}),
                          .p_d = 0.85,
                          .p_f = 0.15,
                          .region_probs = {0.1, 0.3, 0.4, 0.2},
                          .future = {},
                          .e_est_total = 1.0,
                          .p_h = 0.4,
                          .e_h = 2.0,
                          .e_max = 6.0};
    m.future.push_back({SensingOption{}, {true, 2.0, 1.0, 1.0}, {true, 4.0, 1.0, 2.0}, {true, 6.0, 1.0, 4.0}});
    m.future.push_back({SensingOption{}, {true, 2.0, 1.0, 0.0}, {true, 4.0, 1.0, 3.0}, {true, 6.0, 2.0, 3.0}});
    return m;
}

// Greedy one-slot choice through the library's myopic ranking.
inline int myopic_choice(const std::vector<double>& b, double e, const std::vector<ehcr::SensingOption>& opts,
                         const ehcr::PlanningModel& m)
{
    ehcr::BeliefFactored f;
    std::vector<double> values;
    for (std::size_t i = 0; i < opts.size(); ++i)
    {
        f.pi.push_back(idle_marginal(b, static_cast<int>(i)));
        const bool ok = opts[i].available && m.e_est_total + opts[i].sense_cost + opts[i].access_cost <= e;
        values.push_back(ok ? opts[i].reward : 0.0);
    }
    const auto order = ehcr::rank_channels_myopic(f, values, m.transition.chains(), 1);
    return order.empty() ? -1 : order.front();
}

}  // namespace oracle
