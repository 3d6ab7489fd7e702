#include "clogsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace clogsim {

void ModelParams::validate() const {
    if (n < 1) throw std::invalid_argument("n must be >= 1, got " + std::to_string(n));
    if (initial_occupancy.empty()) throw std::invalid_argument("initial_occupancy must not be empty");
    for (const auto& [site, count] : initial_occupancy) {
        if (site < 0)
            throw std::invalid_argument("initial_occupancy: negative site " + std::to_string(site));
        if (count < 1 || count > n)
            throw std::invalid_argument("initial_occupancy: count " + std::to_string(count) + " at site " +
                                        std::to_string(site) + " outside [1, n]");
    }
    // The first arrival starts at (initial + 1) + 1 and must lie right of R + 1.
    const Site rightmost = initial_occupancy.rbegin()->first;
    if (static_cast<std::uint64_t>(rightmost) > initial_particles())
        throw std::invalid_argument("initial_occupancy: rightmost site " + std::to_string(rightmost) +
                                    " exceeds the number of initial particles");
    if (!(left_step_prob > 0.0 && left_step_prob <= 1.0))
        throw std::invalid_argument("left_step_prob must be in (0, 1]");
}

std::uint64_t ModelParams::initial_particles() const noexcept {
    std::uint64_t total = 0;
    for (const auto& [site, count] : initial_occupancy) total += static_cast<std::uint64_t>(count);
    return total;
}

ModelParams formal_params(int n) {
    ModelParams p;
    p.n = n;
    p.initial_occupancy = {{0, 1}};
    return p;
}

ModelParams informal_params(int n) {
    ModelParams p;
    p.n = n;
    p.initial_occupancy = {{0, 1}, {1, 1}};
    return p;
}

ClusterState init_cluster(const ModelParams& params) {
    params.validate();
    ClusterState c;
    c.n_ = params.n;
    const Site rightmost = params.initial_occupancy.rbegin()->first;
    c.counts_.assign(static_cast<std::size_t>(rightmost) + 2, 0);
    for (const auto& [site, count] : params.initial_occupancy) {
        c.counts_[static_cast<std::size_t>(site)] = count;
        c.placed_ += static_cast<std::uint64_t>(count);
        if (count == params.n && !c.blockage_) c.blockage_ = site;
    }
    c.frontier_ = rightmost;
    return c;
}

void apply_freeze_at(ClusterState& cluster, Site site) {
    if (site < 0) throw std::logic_error("apply_freeze: negative site");
    if (site > cluster.frontier_ + 1) throw std::logic_error("apply_freeze: site beyond R + 1");
    auto& slot = cluster.counts_[static_cast<std::size_t>(site)];
    if (slot >= cluster.n_) throw std::logic_error("apply_freeze: count would exceed n at site " + std::to_string(site));
    const int updated = ++slot;
    ++cluster.placed_;
    if (updated == cluster.n_ && !cluster.blockage_) cluster.blockage_ = site;
    if (site > cluster.frontier_) {
        cluster.frontier_ = site;
        cluster.counts_.push_back(0);
    }
}

void apply_freeze(ClusterState& cluster, const ParticleOutcome& outcome) {
    switch (outcome.fate) {
        case Fate::Frozen: apply_freeze_at(cluster, outcome.freeze_site); return;
        case Fate::Escaped: return;
        case Fate::Truncated: throw std::logic_error("apply_freeze: truncated outcome");
    }
}

VisitMove draw_visit(int count, int n, double left_step_prob, Rng& rng) {
    if (left_step_prob == 0.5) {
        const auto u = rng.below(2 * static_cast<std::uint64_t>(n));
        const auto c = static_cast<std::uint64_t>(count);
        if (u < 2 * c) return VisitMove::Freeze;
        if (u < 2 * c + (static_cast<std::uint64_t>(n) - c)) return VisitMove::Left;
        return VisitMove::Right;
    }
    if (rng.below(static_cast<std::uint64_t>(n)) < static_cast<std::uint64_t>(count)) return VisitMove::Freeze;
    return rng.uniform() < left_step_prob ? VisitMove::Left : VisitMove::Right;
}

WalkerState transition_step(const WalkerState& walker, const ClusterState& cluster,
                            const ModelParams& params, Rng& rng) {
    WalkerState next = walker;
    next.previous_position = walker.position;
    ++next.step_count;
    switch (draw_visit(cluster.count(walker.position - 1), params.n, params.left_step_prob, rng)) {
        case VisitMove::Freeze:
            next.frozen = true;
            return next;
        case VisitMove::Left: --next.position; break;
        case VisitMove::Right: ++next.position; break;
    }
    next.at_new_minimum = next.position < walker.min_site;
    next.min_site = std::min(walker.min_site, next.position);
    return next;
}

bool freeze_upon_arrival_of(std::span<const Site> trace, Site freeze_site) {
    if (trace.empty()) return false;
    const auto earlier = trace.first(trace.size() - 1);
    return std::all_of(earlier.begin(), earlier.end(), [&](Site s) { return freeze_site < s; });
}

bool return_from_right(double p, Rng& rng) {
    if (p >= 0.5) return true;
    return rng.uniform() < p / (1.0 - p);
}

bool return_from_left(double p, Rng& rng) {
    if (p <= 0.5) return true;
    return rng.uniform() < (1.0 - p) / p;
}

bool descend(Site distance, double p, Rng& rng) {
    if (p >= 0.5 || distance <= 0) return true;
    return rng.uniform() < std::pow(p / (1.0 - p), static_cast<double>(distance));
}

ParticleOutcome run_particle_naive(std::uint64_t index, const ClusterState& cluster,
                                   const ModelParams& params, Rng& rng,
                                   std::uint64_t step_cap, Site margin) {
    if (margin < 1) throw std::invalid_argument("run_particle_naive: margin must be >= 1");
    const Site lo = -margin;
    const Site hi = cluster.frontier() + margin;
    const double p = params.left_step_prob;

    ParticleOutcome out;
    out.index = index;

    // w(j,1) = j + 2, w(j,2) = j + 1.
    WalkerState w;
    w.previous_position = static_cast<Site>(index) + 2;
    w.position = static_cast<Site>(index) + 1;
    w.min_site = w.position;
    w.at_new_minimum = true;

    auto finish = [&](Fate fate) {
        out.fate = fate;
        out.below_zero = w.min_site < 0;
        out.min_site = std::max<Site>(w.min_site, -1);
        out.visits = w.step_count;
        return out;
    };

    if (w.position > hi) {
        if (!descend(w.position - hi, p, rng)) return finish(Fate::Escaped);
        w.previous_position = hi + 1;
        w.position = hi;
        w.min_site = hi;
        w.at_new_minimum = true;
    }

    for (;;) {
        if (w.step_count >= step_cap) return finish(Fate::Truncated);
        w = transition_step(w, cluster, params, rng);
        if (w.frozen) {
            out.freeze_site = w.position;
            out.froze_upon_arrival = w.at_new_minimum;
            return finish(Fate::Frozen);
        }
        if (w.position > hi) {
            if (!return_from_right(p, rng)) return finish(Fate::Escaped);
            w.previous_position = w.position;
            w.position = hi;
            w.at_new_minimum = false;
            ++w.step_count;
        } else if (w.position < lo) {
            if (!return_from_left(p, rng)) return finish(Fate::Escaped);
            w.previous_position = w.position;
            w.position = lo;
            w.at_new_minimum = false;
            ++w.step_count;
        }
    }
}

}  // namespace clogsim
