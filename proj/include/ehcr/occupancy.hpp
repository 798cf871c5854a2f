#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ehcr {

enum class Occupancy : std::uint8_t
{
    busy = 0,
    idle = 1,
};

/// Two-state Markov chain of one PU channel.
struct ChannelChain
{
    double alpha = 0.5; ///< P(busy -> idle)
    double beta = 0.7;  ///< P(idle -> idle)

    void validate() const;
    bool operator==(const ChannelChain&) const = default;

    /// Probability the channel is idle next slot given its state now.
    double idle_next(Occupancy s) const { return s == Occupancy::idle ? beta : alpha; }

    /// Idle probability next slot given idle probability `pi` now.
    double predict(double pi) const { return pi * beta + (1.0 - pi) * alpha; }
};

using PnState = std::vector<Occupancy>;

/// Advances one channel by one slot; `u` is a uniform draw on [0, 1).
Occupancy step_channel(Occupancy s, const ChannelChain& chain, double u);

/// Stationary idle probability. Throws std::domain_error for the
/// degenerate chain alpha = 0, beta = 1.
double stationary_idle_prob(const ChannelChain& chain);

/// Product chain over N independent channels. Joint state index bit i is
/// the occupancy of channel i (1 = idle).
class JointTransition
{
  public:
    static constexpr int max_channels = 12;

    /// Throws InfeasibleModel for N outside [1, max_channels].
    explicit JointTransition(std::vector<ChannelChain> chains);

    int channels() const { return static_cast<int>(chains_.size()); }
    std::size_t states() const { return std::size_t{1} << chains_.size(); }
    const std::vector<ChannelChain>& chains() const { return chains_; }

    /// P(next = to | now = from) as the product of per-channel factors.
    double operator()(std::size_t from, std::size_t to) const;

    /// Dense row-major 2^N x 2^N matrix.
    std::vector<double> matrix() const;

    /// out(s) = sum_r in(r) P(r -> s), one channel axis at a time.
    void propagate(std::span<const double> in, std::span<double> out) const;

  private:
    std::vector<ChannelChain> chains_;
};

}  // namespace ehcr
