#include "clogsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace clogsim::stats {

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

Proportion proportion(std::uint64_t successes, std::uint64_t trials, double z) {
    Proportion p;
    p.successes = successes;
    p.trials = trials;
    if (trials == 0) return p;
    const double n = static_cast<double>(trials);
    const double est = static_cast<double>(successes) / n;
    p.estimate = est;
    p.standard_error = std::sqrt(est * (1.0 - est) / n);
    const double z2 = z * z;
    const double centre = (est + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z * std::sqrt(est * (1 - est) / n + z2 / (4 * n * n)) / (1 + z2 / n);
    p.ci_low = successes == 0 ? 0.0 : std::max(0.0, centre - half);
    p.ci_high = successes == trials ? 1.0 : std::min(1.0, centre + half);
    return p;
}

namespace {

double chi_square_sf(double statistic, int df) {
    if (df <= 0) return 1.0;
    boost::math::chi_squared dist(static_cast<double>(df));
    return boost::math::cdf(boost::math::complement(dist, statistic));
}

}  // namespace

ChiSquareResult chi_square_homogeneity(const Histogram& a, const Histogram& b, double min_expected) {
    std::vector<std::string> keys;
    for (const auto& [k, v] : a) keys.push_back(k);
    for (const auto& [k, v] : b)
        if (!a.contains(k)) keys.push_back(k);

    auto get = [](const Histogram& h, const std::string& k) -> double {
        const auto it = h.find(k);
        return it == h.end() ? 0.0 : static_cast<double>(it->second);
    };
    double total_a = 0, total_b = 0;
    for (const auto& [k, v] : a) total_a += static_cast<double>(v);
    for (const auto& [k, v] : b) total_b += static_cast<double>(v);
    ChiSquareResult r;
    if (total_a == 0 || total_b == 0) return r;
    const double total = total_a + total_b;

    std::vector<std::pair<double, double>> cells;
    double small_a = 0, small_b = 0;
    for (const auto& k : keys) {
        const double ca = get(a, k), cb = get(b, k);
        const double pooled = ca + cb;
        if (pooled * std::min(total_a, total_b) / total < min_expected) {
            small_a += ca;
            small_b += cb;
            ++r.merged_categories;
        } else {
            cells.emplace_back(ca, cb);
        }
    }
    if (small_a + small_b > 0) cells.emplace_back(small_a, small_b);

    for (const auto& [ca, cb] : cells) {
        const double pooled = ca + cb;
        const double ea = pooled * total_a / total;
        const double eb = pooled * total_b / total;
        r.statistic += (ca - ea) * (ca - ea) / ea + (cb - eb) * (cb - eb) / eb;
    }
    r.degrees_of_freedom = static_cast<int>(cells.size()) - 1;
    r.p_value = chi_square_sf(r.statistic, r.degrees_of_freedom);
    return r;
}

double total_variation(const Histogram& a, const Histogram& b) {
    double total_a = 0, total_b = 0;
    for (const auto& [k, v] : a) total_a += static_cast<double>(v);
    for (const auto& [k, v] : b) total_b += static_cast<double>(v);
    if (total_a == 0 || total_b == 0) return 1.0;
    double sum = 0;
    for (const auto& [k, v] : a) {
        const auto it = b.find(k);
        const double pb = it == b.end() ? 0.0 : static_cast<double>(it->second) / total_b;
        sum += std::abs(static_cast<double>(v) / total_a - pb);
    }
    for (const auto& [k, v] : b)
        if (!a.contains(k)) sum += static_cast<double>(v) / total_b;
    return sum / 2;
}

ChiSquareResult chi_square_goodness_of_fit(std::span<const std::uint64_t> observed,
                                           std::span<const double> probabilities) {
    if (observed.size() != probabilities.size())
        throw std::invalid_argument("chi_square_goodness_of_fit: size mismatch");
    const double total = std::accumulate(observed.begin(), observed.end(), 0.0,
                                         [](double s, std::uint64_t v) { return s + static_cast<double>(v); });
    ChiSquareResult r;
    int cells = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double expected = total * probabilities[i];
        if (expected <= 0) {
            if (observed[i] > 0) {
                r.statistic = std::numeric_limits<double>::infinity();
                r.p_value = 0.0;
                return r;
            }
            continue;
        }
        const double d = static_cast<double>(observed[i]) - expected;
        r.statistic += d * d / expected;
        ++cells;
    }
    r.degrees_of_freedom = cells - 1;
    r.p_value = chi_square_sf(r.statistic, r.degrees_of_freedom);
    return r;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y, double confidence) {
    if (x.size() != y.size()) throw std::invalid_argument("least_squares: size mismatch");
    if (x.size() < 2) throw std::invalid_argument("least_squares: need at least two points");
    const double m = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / m;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / m;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) throw std::invalid_argument("least_squares: x values are all equal");
    LinearFit fit;
    fit.points = x.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (x.size() >= 3) {
        double sse = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - (fit.intercept + fit.slope * x[i]);
            sse += r * r;
        }
        const double df = m - 2;
        const double se = std::sqrt(sse / df / sxx);
        boost::math::students_t t(df);
        const double tq = boost::math::quantile(t, 0.5 + confidence / 2);
        fit.slope_stderr = se;
        fit.slope_ci_low = fit.slope - tq * se;
        fit.slope_ci_high = fit.slope + tq * se;
    }
    return fit;
}

}  // namespace clogsim::stats
