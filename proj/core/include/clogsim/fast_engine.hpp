// fast_engine.hpp - exact collapsed sampler for one particle's fate.
//
// Left of site 1 and right of R + 1 the freeze probability is zero, so the
// walk there only matters through where it comes back. The collapsed walker
// lives on [0, R + 1]: a right step from R + 1 returns to R + 1, a left step
// from 0 returns to 0 (marking the path as having gone below zero), and in
// biased mode either excursion may escape with its gambler's-ruin
// probability. The freeze-site / upon-arrival distribution is identical to
// run_particle_naive for every margin.
#pragma once

#include <cstdint>
#include <optional>

#include "clogsim/model.hpp"

namespace clogsim {

// R + 1: the first site an arriving particle sees with positive exposure.
Site entry_site(const ClusterState& cluster) noexcept;

struct CollapsedWalker {
    Site position = 0;
    Site min_site = 0;
    bool below_zero = false;
    bool at_new_minimum = false;
    std::uint64_t visits = 0;
};

// Right step taken at R + 1. Returns the walker back at R + 1 with one more
// visit, or nullopt if the excursion escaped.
std::optional<CollapsedWalker> collapse_right(const CollapsedWalker& walker, double left_step_prob, Rng& rng);
// Left step taken at 0. Returns the walker back at 0 with the below-zero
// flag set, or nullopt if the excursion escaped.
std::optional<CollapsedWalker> collapse_left(const CollapsedWalker& walker, double left_step_prob, Rng& rng);

// Samples the fate of particle `index` arriving at the current cluster.
// Precondition: the cluster is not blocked unless params.stop_on_blockage is
// false. Uses the same per-visit draw schema as transition_step.
ParticleOutcome run_particle_fast(std::uint64_t index, const ClusterState& cluster,
                                  const ModelParams& params, Rng& rng);

}  // namespace clogsim
