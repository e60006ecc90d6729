#pragma once

#include <cstdint>
#include <vector>

#include "intonarank/intonation.hpp"

namespace intonarank {

struct KMeansResult {
    std::vector<int> assignments;
    std::vector<std::vector<double>> centroids;  // k rows
    std::vector<double> objective_history;       // SSE per iteration, best restart
    int iterations = 0;
    bool converged = false;
};

// Lloyd's algorithm with seeded k-means++ init, run n_restarts times keeping
// the lowest final SSE. Stops when assignments stabilize or after max_iters.
KMeansResult kmeans2(const std::vector<std::vector<double>>& points,
                     std::uint64_t seed, int n_restarts = 10, int max_iters = 100);

// Clusters prosody feature vectors (internally z-scored with clamped scores so
// near-constant features cannot dominate) and names the cluster whose mean
// terminal-slope feature is higher "question". Throws std::runtime_error when
// the clustering degenerates (identical centroids or equal slope means).
std::vector<Intonation> kmeans_label(const std::vector<std::vector<double>>& features,
                                     std::uint64_t seed);

}  // namespace intonarank
