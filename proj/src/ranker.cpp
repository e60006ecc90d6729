#include "intonarank/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include "intonarank/audio.hpp"
#include "intonarank/kernels.hpp"
#include "nlohmann/json.hpp"

namespace intonarank {

namespace {

using nlohmann::json;

// Pair difference rows x_a - x_b, flattened row-major.
struct DiffMatrix {
    std::vector<double> data;
    std::size_t rows = 0;
    std::size_t dim = 0;

    const double* row(std::size_t r) const { return data.data() + r * dim; }
};

DiffMatrix make_diffs(const std::vector<std::vector<double>>& features,
                      const std::vector<std::pair<int, int>>& pairs) {
    DiffMatrix m;
    m.rows = pairs.size();
    m.dim = features.empty() ? 0 : features.front().size();
    m.data.resize(m.rows * m.dim);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const auto& a = features[static_cast<std::size_t>(pairs[r].first)];
        const auto& b = features[static_cast<std::size_t>(pairs[r].second)];
        for (std::size_t j = 0; j < m.dim; ++j) {
            m.data[r * m.dim + j] = a[j] - b[j];
        }
    }
    return m;
}

double objective_from_diffs(const double* w, std::size_t dim,
                            const DiffMatrix& ordered, const DiffMatrix& similar,
                            double C) {
    const auto& k = kernels::active();
    double hinge = 0.0;
    for (std::size_t r = 0; r < ordered.rows; ++r) {
        const double margin = 1.0 - k.dot(w, ordered.row(r), dim);
        if (margin > 0.0) hinge += margin * margin;
    }
    double tie = 0.0;
    for (std::size_t r = 0; r < similar.rows; ++r) {
        const double v = k.dot(w, similar.row(r), dim);
        tie += v * v;
    }
    return 0.5 * k.sumsq(w, dim) + C * (hinge + tie);
}

void check_features(const std::vector<std::vector<double>>& features,
                    const PairConstraints& constraints) {
    if (features.empty()) throw std::invalid_argument("ranker: no features");
    const std::size_t dim = features.front().size();
    for (const auto& f : features) {
        if (f.size() != dim) throw std::invalid_argument("ranker: dimension mismatch");
    }
    const int n = static_cast<int>(features.size());
    const auto check_pairs = [n](const std::vector<std::pair<int, int>>& pairs) {
        for (const auto& [a, b] : pairs) {
            if (a < 0 || a >= n || b < 0 || b >= n) {
                throw std::invalid_argument("ranker: constraint index out of range");
            }
        }
    };
    check_pairs(constraints.ordered);
    check_pairs(constraints.similar);
}

}  // namespace

PairConstraints build_constraints(const std::vector<Intonation>& labels,
                                  const RankerConfig& config) {
    std::vector<int> questions, statements;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == Intonation::question) {
            questions.push_back(static_cast<int>(i));
        } else if (labels[i] == Intonation::statement) {
            statements.push_back(static_cast<int>(i));
        }
    }
    if (questions.empty() || statements.empty()) {
        throw std::invalid_argument("build_constraints: a label class is empty");
    }

    PairConstraints out;
    out.ordered.reserve(questions.size() * statements.size());
    for (int a : questions) {
        for (int b : statements) out.ordered.emplace_back(a, b);
    }

    const auto add_within = [&out](const std::vector<int>& cls) {
        for (std::size_t i = 0; i < cls.size(); ++i) {
            for (std::size_t j = i + 1; j < cls.size(); ++j) {
                out.similar.emplace_back(cls[i], cls[j]);
            }
        }
    };
    add_within(questions);
    add_within(statements);

    const auto cap = static_cast<std::size_t>(std::max(config.max_similar_pairs, 0));
    if (out.similar.size() > cap) {
        std::mt19937_64 rng(config.seed);
        std::shuffle(out.similar.begin(), out.similar.end(), rng);
        out.similar.resize(cap);
        std::sort(out.similar.begin(), out.similar.end());
    }
    return out;
}

double ranker_objective(const std::vector<double>& w,
                        const std::vector<std::vector<double>>& features,
                        const PairConstraints& constraints, double C) {
    check_features(features, constraints);
    const DiffMatrix ordered = make_diffs(features, constraints.ordered);
    const DiffMatrix similar = make_diffs(features, constraints.similar);
    return objective_from_diffs(w.data(), w.size(), ordered, similar, C);
}

RankerModel train_ranker(const std::vector<std::vector<double>>& features,
                         const PairConstraints& constraints,
                         const RankerConfig& config,
                         TrainDiagnostics* diagnostics) {
    check_features(features, constraints);
    if (config.C < 0.0) throw std::invalid_argument("ranker: C must be >= 0");
    if (config.max_iters < 1) throw std::invalid_argument("ranker: max_iters must be >= 1");
    if (!(config.grad_tol > 0.0)) throw std::invalid_argument("ranker: grad_tol must be > 0");

    const std::size_t dim = features.front().size();
    const DiffMatrix ordered = make_diffs(features, constraints.ordered);
    const DiffMatrix similar = make_diffs(features, constraints.similar);
    const auto& k = kernels::active();
    const double C = config.C;

    std::vector<double> w(dim, 0.0), grad(dim), w_prev(dim), grad_prev(dim);
    // Cached pair projections w.d, updated incrementally with each step.
    std::vector<double> wd_ord(ordered.rows, 0.0), wd_sim(similar.rows, 0.0);
    std::vector<double> pd_ord(ordered.rows), pd_sim(similar.rows);

    const auto compute_grad = [&]() {
        for (std::size_t j = 0; j < dim; ++j) grad[j] = w[j];
        for (std::size_t r = 0; r < ordered.rows; ++r) {
            const double margin = 1.0 - wd_ord[r];
            if (margin > 0.0) k.axpy(-2.0 * C * margin, ordered.row(r), grad.data(), dim);
        }
        for (std::size_t r = 0; r < similar.rows; ++r) {
            k.axpy(2.0 * C * wd_sim[r], similar.row(r), grad.data(), dim);
        }
    };

    // Exact objective change along w - t*grad, assembled from per-pair terms
    // of the form (a - b)(a + b). Subtracting two full objective values would
    // lose the decrease in rounding noise long before grad_tol is reached.
    const auto delta_j = [&](double t, double wp_dot, double pp_dot) {
        double delta = t * wp_dot + 0.5 * t * t * pp_dot;
        double hinge = 0.0;
        for (std::size_t r = 0; r < ordered.rows; ++r) {
            const double m_old = 1.0 - wd_ord[r];
            const double m_new = m_old - t * pd_ord[r];
            const double a = std::max(0.0, m_new);
            const double b = std::max(0.0, m_old);
            if (a == 0.0 && b == 0.0) continue;
            const double diff = (m_old > 0.0 && m_new > 0.0) ? -t * pd_ord[r] : a - b;
            hinge += diff * (a + b);
        }
        double tie = 0.0;
        for (std::size_t r = 0; r < similar.rows; ++r) {
            const double dv = t * pd_sim[r];
            tie += dv * (2.0 * wd_sim[r] + dv);
        }
        return delta + C * (hinge + tie);
    };

    TrainDiagnostics diag;
    long double objective_acc =
        objective_from_diffs(w.data(), dim, ordered, similar, C);
    diag.objective_history.push_back(static_cast<double>(objective_acc));
    compute_grad();

    double step = 1.0;
    bool have_prev = false;
    for (int iter = 0; iter < config.max_iters; ++iter) {
        const double grad_sq = k.sumsq(grad.data(), dim);
        diag.grad_norm = std::sqrt(grad_sq);
        if (!std::isfinite(static_cast<double>(objective_acc)) || !std::isfinite(grad_sq)) {
            throw std::runtime_error("train_ranker: non-finite objective (check feature scaling)");
        }
        if (diag.grad_norm <= config.grad_tol) {
            diag.converged = true;
            break;
        }

        // Direction p = -grad; projections of p onto the pair diffs.
        double pp_dot = grad_sq;
        double wp_dot = 0.0;
        for (std::size_t j = 0; j < dim; ++j) wp_dot += w[j] * grad[j];
        wp_dot = -wp_dot;  // w . p
        for (std::size_t r = 0; r < ordered.rows; ++r) {
            pd_ord[r] = -k.dot(grad.data(), ordered.row(r), dim);
        }
        for (std::size_t r = 0; r < similar.rows; ++r) {
            pd_sim[r] = -k.dot(grad.data(), similar.row(r), dim);
        }

        // Alternating Barzilai-Borwein step seed, Armijo backtracking on the
        // exact decrease. The first step uses the curvature along p instead.
        if (have_prev) {
            double sy = 0.0, ss = 0.0, yy = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const double s = w[j] - w_prev[j];
                const double y = grad[j] - grad_prev[j];
                sy += s * y;
                ss += s * s;
                yy += y * y;
            }
            if (sy > 0.0 && yy > 0.0) {
                const double bb = (iter % 2 == 0) ? ss / sy : sy / yy;
                step = std::clamp(bb, 1e-12, 1e12);
            }
        } else {
            double curvature = grad_sq;  // p^T H p, every hinge counted active
            for (std::size_t r = 0; r < ordered.rows; ++r) {
                curvature += 2.0 * C * pd_ord[r] * pd_ord[r];
            }
            for (std::size_t r = 0; r < similar.rows; ++r) {
                curvature += 2.0 * C * pd_sim[r] * pd_sim[r];
            }
            if (curvature > 0.0) step = grad_sq / curvature;
        }

        double t = step;
        double decrease = 0.0;
        bool accepted = false;
        for (int bt = 0; bt < 80; ++bt) {
            decrease = delta_j(t, wp_dot, pp_dot);
            if (decrease <= -1e-4 * t * grad_sq) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;  // numerically flat along -grad

        w_prev = w;
        grad_prev = grad;
        for (std::size_t j = 0; j < dim; ++j) w[j] -= t * grad[j];
        for (std::size_t r = 0; r < ordered.rows; ++r) wd_ord[r] += t * pd_ord[r];
        for (std::size_t r = 0; r < similar.rows; ++r) wd_sim[r] += t * pd_sim[r];
        objective_acc += decrease;
        have_prev = true;
        diag.objective_history.push_back(static_cast<double>(objective_acc));
        diag.iterations = iter + 1;

        // Drift hygiene for the incremental projections. The objective
        // accumulator is left alone so the recorded history stays monotone.
        if (diag.iterations % 500 == 0) {
            for (std::size_t r = 0; r < ordered.rows; ++r) {
                wd_ord[r] = k.dot(w.data(), ordered.row(r), dim);
            }
            for (std::size_t r = 0; r < similar.rows; ++r) {
                wd_sim[r] = k.dot(w.data(), similar.row(r), dim);
            }
        }
        compute_grad();
    }
    if (!diag.converged) {
        const double grad_sq = k.sumsq(grad.data(), dim);
        diag.grad_norm = std::sqrt(grad_sq);
        diag.converged = diag.grad_norm <= config.grad_tol;
    }
    diag.objective = static_cast<double>(objective_acc);

    RankerModel model;
    model.w = w;
    model.config = config;
    model.standardizer = Standardizer::identity(static_cast<int>(dim));
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    for (const auto& f : features) {
        const double s = k.dot(w.data(), f.data(), dim);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    model.score_min = lo;
    model.score_max = hi;

    if (diagnostics) *diagnostics = diag;
    return model;
}

TrainOutcome train_on_labeled(const std::vector<std::vector<double>>& raw_features,
                              const std::vector<Intonation>& labels,
                              const RankerConfig& config) {
    if (raw_features.size() != labels.size()) {
        throw std::invalid_argument("train_on_labeled: features/labels size mismatch");
    }
    const Standardizer scaler = Standardizer::fit(raw_features);
    std::vector<std::vector<double>> standardized;
    standardized.reserve(raw_features.size());
    for (const auto& f : raw_features) standardized.push_back(scaler.apply(f));

    const PairConstraints constraints = build_constraints(labels, config);
    TrainOutcome out;
    out.model = train_ranker(standardized, constraints, config, &out.diagnostics);
    out.model.standardizer = scaler;
    out.pair_accuracy = pair_order_accuracy(out.model, raw_features, labels);
    return out;
}

double score(const RankerModel& model, const std::vector<double>& raw_features) {
    if (raw_features.size() != model.w.size()) {
        throw std::invalid_argument("score: dimension mismatch");
    }
    const std::vector<double> z = model.standardizer.apply(raw_features);
    return kernels::active().dot(model.w.data(), z.data(), z.size());
}

double normalize_intensity(const RankerModel& model, double raw_score) {
    const double range = model.score_max - model.score_min;
    if (range <= 0.0) return 0.5;
    return std::clamp((raw_score - model.score_min) / range, 0.0, 1.0);
}

double pair_order_accuracy(const RankerModel& model,
                           const std::vector<std::vector<double>>& raw_features,
                           const std::vector<Intonation>& labels) {
    std::vector<double> q_scores, s_scores;
    for (std::size_t i = 0; i < raw_features.size(); ++i) {
        const double s = score(model, raw_features[i]);
        if (labels[i] == Intonation::question) q_scores.push_back(s);
        if (labels[i] == Intonation::statement) s_scores.push_back(s);
    }
    if (q_scores.empty() || s_scores.empty()) {
        throw std::invalid_argument("pair_order_accuracy: a label class is empty");
    }
    std::size_t correct = 0;
    for (double a : q_scores) {
        for (double b : s_scores) correct += (a > b) ? 1 : 0;
    }
    return static_cast<double>(correct) /
           static_cast<double>(q_scores.size() * s_scores.size());
}

std::pair<std::vector<double>, double> brute_force_oracle(
    const std::vector<std::vector<double>>& features,
    const PairConstraints& constraints, const RankerConfig& config,
    const GridSpec& grid) {
    check_features(features, constraints);
    const std::size_t dim = features.front().size();
    if (dim > 2) throw std::invalid_argument("brute_force_oracle: dimension must be <= 2");
    if (grid.steps < 100) throw std::invalid_argument("brute_force_oracle: steps must be >= 100");
    if (!(grid.hi > grid.lo)) throw std::invalid_argument("brute_force_oracle: bad grid range");

    const DiffMatrix ordered = make_diffs(features, constraints.ordered);
    const DiffMatrix similar = make_diffs(features, constraints.similar);
    const double spacing = (grid.hi - grid.lo) / (grid.steps - 1);

    std::vector<double> best_w(dim, 0.0);
    double best_j = std::numeric_limits<double>::max();
    std::vector<double> w(dim);
    if (dim == 1) {
        for (int i = 0; i < grid.steps; ++i) {
            w[0] = grid.lo + spacing * i;
            const double j = objective_from_diffs(w.data(), dim, ordered, similar, config.C);
            if (j < best_j) {
                best_j = j;
                best_w = w;
            }
        }
    } else {
        for (int i = 0; i < grid.steps; ++i) {
            w[0] = grid.lo + spacing * i;
            for (int j2 = 0; j2 < grid.steps; ++j2) {
                w[1] = grid.lo + spacing * j2;
                const double j = objective_from_diffs(w.data(), dim, ordered, similar, config.C);
                if (j < best_j) {
                    best_j = j;
                    best_w = w;
                }
            }
        }
    }
    return {best_w, best_j};
}

namespace {

constexpr int kModelSchemaVersion = 1;

}  // namespace

void save_model(const RankerModel& model, const std::string& path) {
    json j;
    j["schema_version"] = kModelSchemaVersion;
    j["w"] = model.w;
    j["C"] = model.config.C;
    j["score_min"] = model.score_min;
    j["score_max"] = model.score_max;
    j["standardizer"] = {{"mean", model.standardizer.mean},
                         {"std", model.standardizer.stddev}};
    j["feature_order"] = kFeatureNames;

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp);
        out << j.dump(2) << '\n';
        if (!out) throw IoError("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + tmp + " -> " + path);
}

RankerModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw FormatError("bad JSON in model file: " + path);

    if (!j.contains("schema_version") ||
        j["schema_version"].get<int>() != kModelSchemaVersion) {
        throw FormatError("unsupported model schema_version in " + path);
    }
    RankerModel model;
    model.w = j.at("w").get<std::vector<double>>();
    model.config.C = j.at("C").get<double>();
    model.score_min = j.at("score_min").get<double>();
    model.score_max = j.at("score_max").get<double>();
    model.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
    model.standardizer.stddev = j.at("standardizer").at("std").get<std::vector<double>>();
    const auto names = j.at("feature_order").get<std::vector<std::string>>();

    const std::size_t dim = kFeatureDim;
    if (model.w.size() != dim || model.standardizer.mean.size() != dim ||
        model.standardizer.stddev.size() != dim || names.size() != dim) {
        throw FormatError("wrong model dimension in " + path);
    }
    if (model.score_min > model.score_max) {
        throw FormatError("invalid score range in " + path);
    }
    return model;
}

}  // namespace intonarank
