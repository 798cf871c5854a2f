#include "ehcr/presets.hpp"

#include <string>

#include "ehcr/error.hpp"

namespace ehcr {

namespace {

constexpr std::string_view pcol_grid = "[0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5]";
constexpr std::string_view peh_grid = "[15, 48, 81, 114, 147, 180]";

// Finite-horizon episodes for the optimal policy: T_F slots from a battery
// drawn low enough that energy binds.
constexpr std::string_view short_episodes = R"(sim.slots = 5
policy.horizon = 5
battery.init_lo = 0
battery.init_hi = 0.2
)";

std::string fig1a()
{
    return std::string(R"(# optimal vs myopic over the number of channels
sensing.p_f = 0.1
channels.alpha = 0.5
channels.beta = 0.7
actions.sense = 1
harvest.p_eh_mj_s = 60
)") + std::string(short_episodes)
           + "sweep.channels.n = [2, 3, 4]\n"
             "sweep.policy.name = [optimal, myopic]\n"
             "sweep.sensing.p_col = " + std::string(pcol_grid) + "\n";
}

std::string fig1b()
{
    return R"(# myopic policy, collision probability vs harvesting rate
policy.name = myopic
channels.n = 5
channels.alpha = 0.5
channels.beta = 0.7
sensing.p_f = 0.1
actions.sense = 1
sweep.harvest.p_eh_mj_s = [15, 60, 120, 180]
sweep.sensing.p_col = )" + std::string(pcol_grid) + "\n";
}

std::string fig2()
{
    return R"(# number of channels sensed per slot
channels.n = 5
channels.alpha = [0.3, 0.4, 0.45, 0.5, 0.6]
channels.beta = [0.8, 0.7, 0.65, 0.6, 0.5]
sensing.p_col = 0.1
sensing.p_f = 0.1
sweep.policy.name = [myopic, constant-rate]
sweep.actions.sense = [1, 3]
sweep.harvest.p_eh_mj_s = )" + std::string(peh_grid) + "\n";
}

std::string fig3()
{
    return R"(# channel selection criteria
channels.n = 6
channels.alpha = 0.3
channels.beta = 0.7
sensing.p_col = 0.1
sensing.p_f = 0.1
actions.sense = 3
sweep.policy.name = [myopic, belief-bandwidth, random]
sweep.harvest.p_eh_mj_s = )" + std::string(peh_grid) + "\n";
}

std::string fig4()
{
    return std::string(R"(# sensing-channel fading under the optimal policy
policy.name = optimal
channels.n = 4
channels.alpha = [0.3, 0.4, 0.45, 0.5]
channels.beta = [0.8, 0.7, 0.65, 0.6]
sensing.p_col = 0.1
sensing.p_f = 0.1
actions.sense = 1
)") + std::string(short_episodes)
           + "sweep.sensing.channel = [awgn, rayleigh]\n"
             "sweep.harvest.p_eh_mj_s = " + std::string(peh_grid) + "\n";
}

}  // namespace

const std::vector<std::string_view>& preset_names()
{
    static const std::vector<std::string_view> names = {"fig1a", "fig1b", "fig2", "fig3", "fig4"};
    return names;
}

SweepSpec emit_figure_preset(std::string_view name)
{
    if (name == "fig1a")
        return parse_sweep(fig1a());
    if (name == "fig1b")
        return parse_sweep(fig1b());
    if (name == "fig2")
        return parse_sweep(fig2());
    if (name == "fig3")
        return parse_sweep(fig3());
    if (name == "fig4")
        return parse_sweep(fig4());
    std::string valid;
    for (auto n : preset_names())
        valid += (valid.empty() ? "" : ", ") + std::string(n);
    throw ConfigError("preset", "unknown preset '" + std::string(name) + "'; valid names: " + valid);
}

}  // namespace ehcr
