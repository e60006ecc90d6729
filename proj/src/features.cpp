#include "intonarank/features.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "intonarank/framing.hpp"
#include "intonarank/kernels.hpp"
#include "nlohmann/json.hpp"

namespace intonarank {

namespace {

constexpr double kEnergyFloor = 1e-12;

// Ordinary least-squares slope of y against t; 0 when underdetermined.
double ols_slope(const std::vector<double>& t, const std::vector<double>& y) {
    const std::size_t n = t.size();
    if (n < 2) return 0.0;
    double mt = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mt += t[i];
        my += y[i];
    }
    mt /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double cov = 0.0, var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (t[i] - mt) * (y[i] - my);
        var += (t[i] - mt) * (t[i] - mt);
    }
    return (var > 0.0) ? cov / var : 0.0;
}

}  // namespace

ProsodyFeatures extract_features(const AudioClip& clip) {
    const FinalSyllableWindow window = final_window(clip);
    const int sr = clip.sample_rate;

    const auto start = static_cast<std::size_t>(std::lround(window.start * sr));
    AudioClip tail;
    tail.sample_rate = sr;
    tail.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(start),
                        clip.samples.end());

    const PitchTrack track = estimate_f0(tail);

    ProsodyFeatures out;
    out.window_duration = window.end - window.start;

    std::vector<double> vt, vf0;
    for (const auto& frame : track.frames) {
        if (frame.voiced) {
            vt.push_back(frame.time);
            vf0.push_back(frame.f0);
        }
    }
    out.voiced_ratio = track.voiced_ratio();

    if (vf0.size() >= 2) {
        double sum = 0.0, lo = vf0[0], hi = vf0[0];
        for (double f : vf0) {
            sum += f;
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
        out.mean_f0 = sum / static_cast<double>(vf0.size());
        out.f0_range = hi - lo;

        const std::size_t tail_count = std::min<std::size_t>(3, vf0.size());
        double endpoint = 0.0;
        for (std::size_t i = vf0.size() - tail_count; i < vf0.size(); ++i) {
            endpoint += vf0[i];
        }
        out.endpoint_f0 = endpoint / static_cast<double>(tail_count);
        out.terminal_slope = ols_slope(vt, vf0);
    }

    // Per-frame log energy on the same framing.
    const int win = frame_samples(sr);
    const int hop = hop_samples(sr);
    std::vector<double> et, edb;
    for (std::size_t i = 0; i < track.frames.size(); ++i) {
        const std::size_t s = i * static_cast<std::size_t>(hop);
        const double power =
            kernels::active().sumsq(tail.samples.data() + s, static_cast<std::size_t>(win)) /
            win;
        et.push_back(track.frames[i].time);
        edb.push_back(10.0 * std::log10(power + kEnergyFloor));
    }
    if (!edb.empty()) {
        double sum = 0.0;
        for (double e : edb) sum += e;
        out.mean_log_energy = sum / static_cast<double>(edb.size());
        out.energy_slope = ols_slope(et, edb);
    }
    return out;
}

void write_feature_dump(const std::vector<FeatureDumpEntry>& entries,
                        const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp);
        for (const auto& e : entries) {
            nlohmann::json j;
            j["path"] = e.path;
            j["features"] = e.features.to_vector();
            j["window"] = {e.window.start, e.window.end};
            out << j.dump() << '\n';
        }
        if (!out) throw IoError("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + tmp + " -> " + path);
}

Standardizer Standardizer::fit(const std::vector<std::vector<double>>& vectors) {
    if (vectors.empty()) {
        throw std::invalid_argument("Standardizer::fit: empty input");
    }
    const std::size_t dim = vectors.front().size();
    for (const auto& v : vectors) {
        if (v.size() != dim) {
            throw std::invalid_argument("Standardizer::fit: dimension mismatch");
        }
    }
    Standardizer s;
    s.mean.assign(dim, 0.0);
    s.stddev.assign(dim, 0.0);
    const auto n = static_cast<double>(vectors.size());
    for (const auto& v : vectors) {
        for (std::size_t j = 0; j < dim; ++j) s.mean[j] += v[j];
    }
    for (std::size_t j = 0; j < dim; ++j) s.mean[j] /= n;
    for (const auto& v : vectors) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = v[j] - s.mean[j];
            s.stddev[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < dim; ++j) {
        s.stddev[j] = std::max(std::sqrt(s.stddev[j] / n), 1e-8);
    }
    return s;
}

Standardizer Standardizer::identity(int dim) {
    Standardizer s;
    s.mean.assign(static_cast<std::size_t>(dim), 0.0);
    s.stddev.assign(static_cast<std::size_t>(dim), 1.0);
    return s;
}

std::vector<double> Standardizer::apply(const std::vector<double>& v) const {
    if (v.size() != mean.size()) {
        throw std::invalid_argument("Standardizer::apply: dimension mismatch");
    }
    std::vector<double> out(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        out[j] = (v[j] - mean[j]) / stddev[j];
    }
    return out;
}

}  // namespace intonarank
