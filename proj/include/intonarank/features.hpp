#pragma once

#include <array>
#include <string>
#include <vector>

#include "intonarank/audio.hpp"
#include "intonarank/pitch.hpp"

namespace intonarank {

inline constexpr int kFeatureDim = 8;
inline constexpr int kTerminalSlopeIndex = 3;

inline constexpr std::array<const char*, kFeatureDim> kFeatureNames{
    "window_duration", "mean_f0",      "endpoint_f0",     "terminal_slope",
    "f0_range",        "voiced_ratio", "mean_log_energy", "energy_slope"};

// Prosody summary of the final-syllable window. Field order matches
// kFeatureNames; f0 fields are Hz (slope Hz/s), energies dB (slope dB/s).
struct ProsodyFeatures {
    double window_duration = 0.0;
    double mean_f0 = 0.0;
    double endpoint_f0 = 0.0;     // mean of the last 3 voiced frames
    double terminal_slope = 0.0;  // least-squares f0 slope over voiced frames
    double f0_range = 0.0;
    double voiced_ratio = 0.0;
    double mean_log_energy = 0.0;
    double energy_slope = 0.0;

    std::vector<double> to_vector() const {
        return {window_duration, mean_f0,      endpoint_f0,     terminal_slope,
                f0_range,        voiced_ratio, mean_log_energy, energy_slope};
    }
};

// Pitch and log-energy computed on the final window only; with fewer than two
// voiced frames the f0-derived fields stay 0.
ProsodyFeatures extract_features(const AudioClip& clip);

struct FeatureDumpEntry {
    std::string path;
    ProsodyFeatures features;
    FinalSyllableWindow window;
};

// JSONL, one {path, features: [8 numbers], window: [start, end]} per line.
void write_feature_dump(const std::vector<FeatureDumpEntry>& entries,
                        const std::string& path);

// Per-feature z-scoring fitted on a training set, std floored at 1e-8.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;

    static Standardizer fit(const std::vector<std::vector<double>>& vectors);
    static Standardizer identity(int dim);
    std::vector<double> apply(const std::vector<double>& v) const;
};

}  // namespace intonarank
