// literal_walk_oracle.hpp - test-only exact enumeration of the literal walk.
//
// Propagates probability mass step by step over the unmodified recursion
// (start at j + 2, then j + 1, then freeze/left/right with the per-visit law
// on every visit). No excursion shortcut is used: mass that has not frozen
// after `max_steps` steps, or that leaves a wide window, is reported as
// uncaptured. Each outcome's true probability therefore lies in
// [captured(outcome), captured(outcome) + uncaptured].
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace clogsim::testing {

struct LiteralEnumeration {
    // (freeze site, froze upon arrival) -> probability of that outcome within the horizon.
    std::map<std::pair<std::int64_t, bool>, double> absorbed;
    double captured = 0.0;
    std::size_t steps = 0;

    double uncaptured() const { return std::max(0.0, 1.0 - captured); }
    double at(std::int64_t site, bool upon) const {
        const auto it = absorbed.find({site, upon});
        return it == absorbed.end() ? 0.0 : it->second;
    }
};

// counts: f(0..R). Symmetric walk only.
inline LiteralEnumeration enumerate_literal_walk(const std::vector<int>& counts, int n, std::uint64_t index,
                                                 double target_mass, std::size_t max_steps) {
    const auto R = static_cast<std::int64_t>(counts.size()) - 1;
    const std::int64_t start = static_cast<std::int64_t>(index) + 1;
    const auto spread = static_cast<std::int64_t>(6.0 * std::sqrt(static_cast<double>(max_steps))) + 10;
    const std::int64_t lo = -spread;
    const std::int64_t hi = start + spread;
    const std::int64_t width = hi - lo + 1;
    const std::int64_t classes = R + 3;   // clamp(min, 0, R + 2)

    auto f = [&](std::int64_t k) -> int { return (k < 0 || k > R) ? 0 : counts[static_cast<std::size_t>(k)]; };
    auto clamp_min = [&](std::int64_t m) { return std::clamp<std::int64_t>(m, 0, R + 2); };
    auto slot = [&](std::int64_t x, std::int64_t mc) { return static_cast<std::size_t>((x - lo) * classes + mc); };

    // settled[x][mc]: at x with clamped minimum mc, not a fresh minimum.
    // fresh[x]: at x, and x is strictly below every earlier position.
    std::vector<double> settled(static_cast<std::size_t>(width * classes), 0.0), next_settled(settled.size());
    std::vector<double> fresh(static_cast<std::size_t>(width), 0.0), next_fresh(fresh.size());

    LiteralEnumeration out;
    // w(j,2) = j + 1 is below w(j,1) = j + 2, so it is a fresh minimum.
    fresh[static_cast<std::size_t>(start - lo)] = 1.0;

    auto move_to = [&](std::int64_t y, std::int64_t mc_before, double mass) {
        if (mass == 0.0) return;
        if (y < lo || y > hi) return;   // lost: counted as uncaptured
        if (y < mc_before || (mc_before == R + 2 && y <= R + 1)) {
            // y is a new minimum; only sites that can freeze need the fresh state.
            if (y >= 1 && y <= R + 1) {
                next_fresh[static_cast<std::size_t>(y - lo)] += mass;
                return;
            }
            next_settled[slot(y, clamp_min(y))] += mass;
            return;
        }
        next_settled[slot(y, mc_before)] += mass;
    };

    for (std::size_t step = 0; step < max_steps && out.captured < target_mass; ++step) {
        std::fill(next_settled.begin(), next_settled.end(), 0.0);
        std::fill(next_fresh.begin(), next_fresh.end(), 0.0);
        for (std::int64_t x = lo; x <= hi; ++x) {
            const int c = f(x - 1);
            const double p_freeze = static_cast<double>(c) / n;
            const double p_move = (1.0 - p_freeze) / 2;
            const double fm = fresh[static_cast<std::size_t>(x - lo)];
            if (fm != 0.0) {
                if (c > 0) out.absorbed[{x, true}] += fm * p_freeze;
                // Fresh at x: the minimum is x itself.
                move_to(x - 1, clamp_min(x), fm * p_move);
                move_to(x + 1, clamp_min(x), fm * p_move);
            }
            for (std::int64_t mc = 0; mc < classes; ++mc) {
                const double m = settled[slot(x, mc)];
                if (m == 0.0) continue;
                if (c > 0) out.absorbed[{x, false}] += m * p_freeze;
                move_to(x - 1, mc, m * p_move);
                move_to(x + 1, mc, m * p_move);
            }
        }
        settled.swap(next_settled);
        fresh.swap(next_fresh);
        out.captured = 0.0;
        for (const auto& [key, p] : out.absorbed) out.captured += p;
        out.steps = step + 1;
    }
    return out;
}

}  // namespace clogsim::testing
