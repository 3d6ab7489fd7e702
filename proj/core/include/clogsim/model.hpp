// model.hpp - the one-dimensional clogging process: parameters, cluster
// state, the per-visit transition law and the literal (naive) walker.
//
// Sites are integers. Particle 1 sits at site 0 before anything moves.
// Particle j > 1 starts at j + 2, steps to j + 1, and from then on every
// visit to a site k either freezes it there with probability f(k-1)/n or
// moves it one site left or right. The naive walker here is the reference
// implementation; fast_engine.hpp must reproduce its outcome distribution.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "clogsim/rng.hpp"

namespace clogsim {

using Site = std::int64_t;

struct ModelParams {
    int n = 2;                                   // per-site capacity
    std::map<Site, int> initial_occupancy{{0, 1}};
    double left_step_prob = 0.5;                 // P(left | move); 1/2 is the plain process
    std::uint64_t max_particles = 1'000'000;     // arriving-particle budget per run
    bool stop_on_blockage = true;

    bool symmetric() const noexcept { return left_step_prob == 0.5; }

    // Throws std::invalid_argument naming the offending field.
    void validate() const;

    // Sum of the initial counts; also the index of the last initial particle.
    std::uint64_t initial_particles() const noexcept;
};

// Occupancy {0:1}, the formal starting configuration.
ModelParams formal_params(int n);
// Occupancy {0:1, 1:1}, the informal starting configuration.
ModelParams informal_params(int n);

// Frozen counts f(k) for the current particle prefix.
class ClusterState {
public:
    ClusterState() = default;

    int capacity() const noexcept { return n_; }
    // f(k); zero outside [0, R].
    int count(Site k) const noexcept {
        return (k < 0 || k >= static_cast<Site>(counts_.size())) ? 0 : counts_[static_cast<std::size_t>(k)];
    }
    // R, the rightmost site with a positive count.
    Site frontier() const noexcept { return frontier_; }
    std::uint64_t particles_placed() const noexcept { return placed_; }
    std::optional<Site> blockage_site() const noexcept { return blockage_; }
    bool blocked() const noexcept { return blockage_.has_value(); }
    // Dense counts for sites 0..R+1 (the last entry is always zero).
    std::span<const int> counts() const noexcept { return counts_; }

    friend ClusterState init_cluster(const ModelParams& params);
    friend void apply_freeze_at(ClusterState& cluster, Site site);

private:
    int n_ = 1;
    std::vector<int> counts_;
    Site frontier_ = -1;
    std::uint64_t placed_ = 0;
    std::optional<Site> blockage_;
};

enum class Fate : std::uint8_t { Frozen, Escaped, Truncated };

struct ParticleOutcome {
    std::uint64_t index = 0;
    Fate fate = Fate::Frozen;
    Site freeze_site = 0;          // meaningful when fate == Frozen
    bool froze_upon_arrival = false;
    // Minimum site of the trajectory, clamped to -1 once the path went below 0.
    Site min_site = 0;
    bool below_zero = false;
    std::uint64_t visits = 0;

    bool frozen() const noexcept { return fate == Fate::Frozen; }
    bool escaped() const noexcept { return fate == Fate::Escaped; }
    bool truncated() const noexcept { return fate == Fate::Truncated; }
};

struct WalkerState {
    Site position = 0;
    Site previous_position = 0;
    bool frozen = false;
    Site min_site = 0;            // minimum over all positions so far, current included
    bool at_new_minimum = false;  // current position is strictly below every earlier one
    std::uint64_t step_count = 0;
};

ClusterState init_cluster(const ModelParams& params);

// Increments f(site); sets the blockage when the count reaches n. Throws
// std::logic_error if the count would pass n.
void apply_freeze_at(ClusterState& cluster, Site site);
// Applies a frozen outcome. Escaped outcomes leave the cluster unchanged;
// truncated ones are rejected with std::logic_error.
void apply_freeze(ClusterState& cluster, const ParticleOutcome& outcome);

// Result of one visit draw at a site whose left neighbour holds `count`.
enum class VisitMove : std::uint8_t { Freeze, Left, Right };

// Per-visit law. Symmetric mode consumes one draw below(2n): values below 2c
// freeze, the next n - c step left, the rest step right. Biased mode draws
// below(n) for the freeze and, if moving, one uniform() against
// left_step_prob.
VisitMove draw_visit(int count, int n, double left_step_prob, Rng& rng);

// One step of the literal recursion. Precondition: !walker.frozen.
WalkerState transition_step(const WalkerState& walker, const ClusterState& cluster,
                            const ModelParams& params, Rng& rng);

// True iff freeze_site is strictly below every earlier entry of the trace.
// The trace ends with the visit at which the freeze happened.
bool freeze_upon_arrival_of(std::span<const Site> trace, Site freeze_site);

// Exact escape shortcuts for walks through freeze-free regions. Each returns
// true when the walker comes back (to the boundary it left), false when it
// drifts off to infinity. Symmetric walks always come back and consume no
// randomness.
//   return_from_right: left a boundary b for b + 1; P(back at b) = min(1, p / (1 - p)).
//   return_from_left:  left a boundary b for b - 1; P(back at b) = min(1, (1 - p) / p).
//   descend:           at distance d above a target; P(reach it) = min(1, p / (1 - p))^d.
bool return_from_right(double left_step_prob, Rng& rng);
bool return_from_left(double left_step_prob, Rng& rng);
bool descend(Site distance, double left_step_prob, Rng& rng);

inline constexpr Site kDefaultMargin = 32;
inline constexpr std::uint64_t kDefaultStepCap = 50'000'000;

// Literal step-by-step walk of particle `index` inside the window
// [-margin, R + margin]; outside the window the exact return/escape shortcut
// applies. Exceeding step_cap returns a truncated outcome.
ParticleOutcome run_particle_naive(std::uint64_t index, const ClusterState& cluster,
                                   const ModelParams& params, Rng& rng,
                                   std::uint64_t step_cap = kDefaultStepCap,
                                   Site margin = kDefaultMargin);

}  // namespace clogsim
