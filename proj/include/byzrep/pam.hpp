#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace byzrep {

/// Dense symmetric distance matrix over points 0..n-1.
template <typename T>
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n, T init = T{}) : n_(n), data_(n * n, init) {}

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    T& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

private:
    std::size_t n_ = 0;
    std::vector<T> data_;
};

/// Builds the matrix d(i, j) = dist(i, j) for i < j and mirrors it.
template <typename T, typename Dist>
SquareMatrix<T> make_distance_matrix(std::size_t n, Dist&& dist) {
    SquareMatrix<T> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const T v = static_cast<T>(dist(i, j));
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

struct PamResult {
    std::vector<std::size_t> medoids;  ///< point indices, ascending
    std::vector<std::size_t> labels;   ///< per point: position in `medoids`
    double cost = 0.0;                 ///< sum of distances to assigned medoid
    std::vector<double> cost_trace;    ///< cost after BUILD, then after each swap
};

/// Total distance of every point to its nearest medoid.
template <typename T>
double medoid_cost(const SquareMatrix<T>& d, const std::vector<std::size_t>& medoids) {
    double total = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (auto m : medoids) best = std::min(best, static_cast<double>(d(j, m)));
        total += best;
    }
    return total;
}

namespace detail {

template <typename T>
constexpr double swap_tolerance(double cost) {
    if constexpr (std::is_floating_point_v<T>) {
        return 1e-12 * (1.0 + std::abs(cost));
    } else {
        return 0.0;
    }
}

}  // namespace detail

/**
 * Partitioning Around Medoids (BUILD + SWAP).
 *
 * BUILD picks the point with the smallest total distance, then greedily adds
 * the point with the largest cost reduction. SWAP evaluates every
 * (medoid, non-medoid) exchange and applies the best strictly improving one
 * until none is left. All ties go to the lowest index. With n <= k every
 * point becomes its own medoid.
 */
template <typename T>
PamResult pam(const SquareMatrix<T>& d, std::size_t k) {
    const std::size_t n = d.size();
    if (k == 0) throw std::invalid_argument("pam: k must be positive");

    PamResult res;
    if (n == 0) return res;
    if (n <= k) {
        res.medoids.resize(n);
        std::iota(res.medoids.begin(), res.medoids.end(), std::size_t{0});
        res.labels = res.medoids;
        res.cost_trace.push_back(0.0);
        return res;
    }

    constexpr double inf = std::numeric_limits<double>::infinity();
    auto dist = [&](std::size_t i, std::size_t j) { return static_cast<double>(d(i, j)); };

    std::vector<std::size_t> medoids;
    std::vector<char> is_medoid(n, 0);
    std::vector<double> nearest(n, inf);

    // BUILD
    {
        std::size_t first = 0;
        double best = inf;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += dist(i, j);
            if (s < best) {
                best = s;
                first = i;
            }
        }
        medoids.push_back(first);
        is_medoid[first] = 1;
        for (std::size_t j = 0; j < n; ++j) nearest[j] = dist(j, first);
    }
    while (medoids.size() < k) {
        std::size_t pick = n;
        double best_gain = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (is_medoid[i]) continue;
            double gain = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (!is_medoid[j] && j != i) gain += std::max(nearest[j] - dist(j, i), 0.0);
            }
            if (gain > best_gain) {
                best_gain = gain;
                pick = i;
            }
        }
        medoids.push_back(pick);
        is_medoid[pick] = 1;
        for (std::size_t j = 0; j < n; ++j) nearest[j] = std::min(nearest[j], dist(j, pick));
    }

    // SWAP
    std::vector<std::size_t> owner(n);
    std::vector<double> second(n);
    auto refresh = [&] {
        std::sort(medoids.begin(), medoids.end());
        double cost = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double b1 = inf, b2 = inf;
            std::size_t o = 0;
            for (std::size_t s = 0; s < medoids.size(); ++s) {
                const double v = dist(j, medoids[s]);
                if (v < b1) {
                    b2 = b1;
                    b1 = v;
                    o = s;
                } else if (v < b2) {
                    b2 = v;
                }
            }
            nearest[j] = b1;
            second[j] = b2;
            owner[j] = o;
            cost += b1;
        }
        return cost;
    };

    double cost = refresh();
    res.cost_trace.push_back(cost);
    for (;;) {
        double best_delta = 0.0;
        std::size_t best_slot = 0, best_h = n;
        for (std::size_t s = 0; s < medoids.size(); ++s) {
            for (std::size_t h = 0; h < n; ++h) {
                if (is_medoid[h]) continue;
                double delta = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double djh = dist(j, h);
                    if (owner[j] == s) {
                        delta += std::min(djh, second[j]) - nearest[j];
                    } else if (djh < nearest[j]) {
                        delta += djh - nearest[j];
                    }
                }
                if (delta < best_delta - detail::swap_tolerance<T>(cost)) {
                    best_delta = delta;
                    best_slot = s;
                    best_h = h;
                }
            }
        }
        if (best_h == n) break;
        is_medoid[medoids[best_slot]] = 0;
        is_medoid[best_h] = 1;
        medoids[best_slot] = best_h;
        cost = refresh();
        res.cost_trace.push_back(cost);
    }

    res.medoids = medoids;  // sorted by refresh()
    res.labels.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        if (is_medoid[j]) {
            res.labels[j] = static_cast<std::size_t>(
                std::find(medoids.begin(), medoids.end(), j) - medoids.begin());
            continue;
        }
        double best = inf;
        for (std::size_t s = 0; s < medoids.size(); ++s) {
            const double v = dist(j, medoids[s]);
            if (v < best) {
                best = v;
                res.labels[j] = s;
            }
        }
    }
    res.cost = cost;
    return res;
}

}  // namespace byzrep
