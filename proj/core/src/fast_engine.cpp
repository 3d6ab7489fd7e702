#include "clogsim/fast_engine.hpp"

#include <stdexcept>

namespace clogsim {

Site entry_site(const ClusterState& cluster) noexcept { return cluster.frontier() + 1; }

std::optional<CollapsedWalker> collapse_right(const CollapsedWalker& walker, double p, Rng& rng) {
    if (!return_from_right(p, rng)) return std::nullopt;
    CollapsedWalker next = walker;
    next.at_new_minimum = false;
    ++next.visits;
    return next;
}

std::optional<CollapsedWalker> collapse_left(const CollapsedWalker& walker, double p, Rng& rng) {
    CollapsedWalker next = walker;
    next.below_zero = true;
    next.min_site = -1;
    if (!return_from_left(p, rng)) return std::nullopt;
    next.at_new_minimum = false;
    ++next.visits;
    return next;
}

ParticleOutcome run_particle_fast(std::uint64_t index, const ClusterState& cluster,
                                  const ModelParams& params, Rng& rng) {
    if (cluster.blocked() && params.stop_on_blockage)
        throw std::logic_error("run_particle_fast: cluster already blocked");
    const double p = params.left_step_prob;
    const int n = params.n;
    const Site right_edge = entry_site(cluster);

    ParticleOutcome out;
    out.index = index;

    // From w(j,2) = j + 1 down to R + 1 nothing can freeze.
    if (!descend(static_cast<Site>(index) + 1 - right_edge, p, rng)) {
        out.fate = Fate::Escaped;
        out.min_site = right_edge + 1;
        return out;
    }

    CollapsedWalker w{right_edge, right_edge, false, true, 1};
    const auto counts = cluster.counts();

    for (;;) {
        // counts() covers 0..R+1, so f(position - 1) is in range for position >= 1.
        const int c = w.position >= 1 ? counts[static_cast<std::size_t>(w.position - 1)] : 0;
        switch (draw_visit(c, n, p, rng)) {
            case VisitMove::Freeze:
                out.fate = Fate::Frozen;
                out.freeze_site = w.position;
                out.froze_upon_arrival = w.at_new_minimum;
                out.min_site = w.min_site;
                out.below_zero = w.below_zero;
                out.visits = w.visits;
                return out;
            case VisitMove::Left:
                if (w.position == 0) {
                    auto back = collapse_left(w, p, rng);
                    if (!back) {
                        out.fate = Fate::Escaped;
                        out.min_site = -1;
                        out.below_zero = true;
                        out.visits = w.visits;
                        return out;
                    }
                    w = *back;
                } else {
                    --w.position;
                    w.at_new_minimum = w.position < w.min_site;
                    if (w.at_new_minimum) w.min_site = w.position;
                    ++w.visits;
                }
                break;
            case VisitMove::Right:
                if (w.position == right_edge) {
                    auto back = collapse_right(w, p, rng);
                    if (!back) {
                        out.fate = Fate::Escaped;
                        out.min_site = w.min_site;
                        out.below_zero = w.below_zero;
                        out.visits = w.visits;
                        return out;
                    }
                    w = *back;
                } else {
                    ++w.position;
                    w.at_new_minimum = false;
                    ++w.visits;
                }
                break;
        }
    }
}

}  // namespace clogsim
