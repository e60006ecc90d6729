#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "intonarank/features.hpp"
#include "intonarank/intonation.hpp"

namespace intonarank {

// Ordered pairs cross question x statement (the question side must score
// higher); similar pairs stay within one class (scores should match).
struct PairConstraints {
    std::vector<std::pair<int, int>> ordered;  // (question idx, statement idx)
    std::vector<std::pair<int, int>> similar;
};

struct RankerConfig {
    double C = 0.1;                 // trade-off between margin and slack
    int max_iters = 10000;
    double grad_tol = 1e-8;
    int max_similar_pairs = 5000;   // seeded subsample above this
    std::uint64_t seed = 0;
};

// Linear ranking model plus everything needed to score raw feature vectors:
// the fitted standardizer and the training-score extremes used for [0, 1]
// normalization.
struct RankerModel {
    std::vector<double> w;
    RankerConfig config;
    Standardizer standardizer;
    double score_min = 0.0;
    double score_max = 0.0;
};

struct TrainDiagnostics {
    std::vector<double> objective_history;  // J after each accepted step
    double objective = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

PairConstraints build_constraints(const std::vector<Intonation>& labels,
                                  const RankerConfig& config);

// J(w) = 0.5*|w|^2 + C * (sum_ordered max(0, 1 - w.(xa-xb))^2
//                         + sum_similar (w.(xa-xb))^2)
double ranker_objective(const std::vector<double>& w,
                        const std::vector<std::vector<double>>& features,
                        const PairConstraints& constraints, double C);

// Minimizes the squared-slack objective by monotone gradient descent
// (Barzilai-Borwein step seeding, Armijo backtracking) from w = 0. The
// returned model carries an identity standardizer and score extremes taken
// over the given features; train_on_labeled installs the fitted standardizer.
RankerModel train_ranker(const std::vector<std::vector<double>>& features,
                         const PairConstraints& constraints,
                         const RankerConfig& config,
                         TrainDiagnostics* diagnostics = nullptr);

struct TrainOutcome {
    RankerModel model;
    TrainDiagnostics diagnostics;
    double pair_accuracy = 0.0;  // fraction of ordered pairs ranked correctly
};

// Full pipeline on raw feature vectors: standardize, build constraints, train.
TrainOutcome train_on_labeled(const std::vector<std::vector<double>>& raw_features,
                              const std::vector<Intonation>& labels,
                              const RankerConfig& config);

// w . standardize(x)
double score(const RankerModel& model, const std::vector<double>& raw_features);

// Min-max over the training scores, clamped; 0.5 when the range collapses.
double normalize_intensity(const RankerModel& model, double raw_score);

double pair_order_accuracy(const RankerModel& model,
                           const std::vector<std::vector<double>>& raw_features,
                           const std::vector<Intonation>& labels);

struct GridSpec {
    double lo = -2.0;
    double hi = 2.0;
    int steps = 401;  // per axis, >= 100
};

// Exhaustive grid minimization of the same objective; dimension must be 1 or 2.
std::pair<std::vector<double>, double> brute_force_oracle(
    const std::vector<std::vector<double>>& features,
    const PairConstraints& constraints, const RankerConfig& config,
    const GridSpec& grid);

// JSON persistence. The loader rejects unknown schema versions and any
// dimension other than kFeatureDim.
void save_model(const RankerModel& model, const std::string& path);
RankerModel load_model(const std::string& path);

}  // namespace intonarank
