#include "intonarank/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "intonarank/features.hpp"
#include "intonarank/kernels.hpp"

namespace intonarank {

namespace {

constexpr int kClusters = 2;

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    return kernels::active().sumsqdiff(a.data(), b.data(), a.size());
}

std::vector<std::vector<double>> kmeanspp_init(
    const std::vector<std::vector<double>>& points, std::mt19937_64& rng) {
    const std::size_t n = points.size();
    std::vector<std::vector<double>> centers;
    std::uniform_int_distribution<std::size_t> uniform_idx(0, n - 1);
    centers.push_back(points[uniform_idx(rng)]);

    std::vector<double> d2(n);
    while (centers.size() < kClusters) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            for (const auto& c : centers) best = std::min(best, sq_dist(points[i], c));
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            centers.push_back(points[uniform_idx(rng)]);
            continue;
        }
        std::uniform_real_distribution<double> pick(0.0, total);
        double target = pick(rng);
        std::size_t chosen = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            target -= d2[i];
            if (target <= 0.0) {
                chosen = i;
                break;
            }
        }
        centers.push_back(points[chosen]);
    }
    return centers;
}

KMeansResult lloyd_run(const std::vector<std::vector<double>>& points,
                       std::mt19937_64& rng, int max_iters) {
    const std::size_t n = points.size();
    const std::size_t dim = points.front().size();

    KMeansResult res;
    res.centroids = kmeanspp_init(points, rng);
    res.assignments.assign(n, -1);

    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = sq_dist(points[i], res.centroids[0]);
            for (int k = 1; k < kClusters; ++k) {
                const double d = sq_dist(points[i], res.centroids[static_cast<std::size_t>(k)]);
                if (d < best_d) {
                    best_d = d;
                    best = k;
                }
            }
            sse += best_d;
            if (res.assignments[i] != best) {
                res.assignments[i] = best;
                changed = true;
            }
        }
        res.objective_history.push_back(sse);
        res.iterations = iter + 1;
        if (!changed) {
            res.converged = true;
            break;
        }

        for (int k = 0; k < kClusters; ++k) {
            std::vector<double> mean(dim, 0.0);
            std::size_t count = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (res.assignments[i] == k) {
                    kernels::active().axpy(1.0, points[i].data(), mean.data(), dim);
                    ++count;
                }
            }
            if (count == 0) continue;  // keep the previous centroid
            for (double& m : mean) m /= static_cast<double>(count);
            res.centroids[static_cast<std::size_t>(k)] = std::move(mean);
        }
    }
    return res;
}

}  // namespace

KMeansResult kmeans2(const std::vector<std::vector<double>>& points,
                     std::uint64_t seed, int n_restarts, int max_iters) {
    if (points.size() < kClusters) {
        throw std::invalid_argument("kmeans2: need at least 2 points");
    }
    const std::size_t dim = points.front().size();
    for (const auto& p : points) {
        if (p.size() != dim) {
            throw std::invalid_argument("kmeans2: dimension mismatch");
        }
    }

    std::mt19937_64 master(seed);
    KMeansResult best;
    double best_sse = std::numeric_limits<double>::max();
    for (int r = 0; r < n_restarts; ++r) {
        std::mt19937_64 rng(master());
        KMeansResult run = lloyd_run(points, rng, max_iters);
        const double sse = run.objective_history.back();
        if (sse < best_sse) {
            best_sse = sse;
            best = std::move(run);
        }
    }
    return best;
}

std::vector<Intonation> kmeans_label(const std::vector<std::vector<double>>& features,
                                     std::uint64_t seed) {
    if (features.size() < 2) {
        throw std::invalid_argument("kmeans_label: need at least 2 feature vectors");
    }
    if (features.front().size() <= kTerminalSlopeIndex) {
        throw std::invalid_argument("kmeans_label: vectors lack a terminal-slope feature");
    }

    // Clamped z-scores: one clip with a slightly unusual near-constant feature
    // (voiced_ratio, say) must not become its own cluster.
    const Standardizer scaler = Standardizer::fit(features);
    std::vector<std::vector<double>> scaled;
    scaled.reserve(features.size());
    for (const auto& f : features) {
        std::vector<double> z = scaler.apply(f);
        for (double& v : z) v = std::clamp(v, -3.0, 3.0);
        scaled.push_back(std::move(z));
    }

    const KMeansResult res = kmeans2(scaled, seed);
    if (sq_dist(res.centroids[0], res.centroids[1]) == 0.0) {
        throw std::runtime_error("kmeans_label: degenerate clusters (identical centroids)");
    }

    // Cluster naming: higher mean raw terminal slope means "question".
    double slope_sum[kClusters] = {0.0, 0.0};
    std::size_t counts[kClusters] = {0, 0};
    for (std::size_t i = 0; i < features.size(); ++i) {
        const int k = res.assignments[i];
        slope_sum[k] += features[i][kTerminalSlopeIndex];
        ++counts[k];
    }
    if (counts[0] == 0 || counts[1] == 0) {
        throw std::runtime_error("kmeans_label: degenerate clusters (empty cluster)");
    }
    const double mean0 = slope_sum[0] / static_cast<double>(counts[0]);
    const double mean1 = slope_sum[1] / static_cast<double>(counts[1]);
    if (mean0 == mean1) {
        throw std::runtime_error("kmeans_label: degenerate clusters (equal slope means)");
    }
    const int question_cluster = (mean1 > mean0) ? 1 : 0;

    std::vector<Intonation> labels(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        labels[i] = (res.assignments[i] == question_cluster) ? Intonation::question
                                                             : Intonation::statement;
    }
    return labels;
}

}  // namespace intonarank
