#include "intonarank/pitch.hpp"

#include <algorithm>
#include <cmath>

#include "intonarank/framing.hpp"
#include "intonarank/kernels.hpp"

namespace intonarank {

namespace {

constexpr double kF0Min = 60.0;
constexpr double kF0Max = 500.0;
constexpr double kVoicingConfidence = 0.5;
// Classic YIN absolute threshold: take the first deep dip rather than the
// global minimum, which would otherwise drift to period multiples.
constexpr double kDipThreshold = 0.1;

struct FrameEstimate {
    double f0 = 0.0;
    double confidence = 0.0;
    bool voiced = false;
};

FrameEstimate analyze_frame(const double* x, int win, int sr) {
    const int tau_min = std::max(2, static_cast<int>(std::ceil(sr / kF0Max)));
    const int tau_max = std::min(static_cast<int>(std::floor(sr / kF0Min)), win - 2);
    FrameEstimate out;
    if (tau_max <= tau_min) return out;

    // Mean squared difference per lag, then cumulative-mean normalization.
    std::vector<double> cmnd(static_cast<std::size_t>(tau_max) + 1, 1.0);
    double running = 0.0;
    for (int tau = 1; tau <= tau_max; ++tau) {
        const auto terms = static_cast<std::size_t>(win - tau);
        const double msd = kernels::active().sumsqdiff(x, x + tau, terms) /
                           static_cast<double>(terms);
        running += msd;
        cmnd[static_cast<std::size_t>(tau)] =
            (running > 0.0) ? msd * tau / running : 1.0;
    }

    int best = -1;
    for (int tau = tau_min; tau <= tau_max; ++tau) {
        if (cmnd[static_cast<std::size_t>(tau)] < kDipThreshold) {
            while (tau + 1 <= tau_max &&
                   cmnd[static_cast<std::size_t>(tau + 1)] < cmnd[static_cast<std::size_t>(tau)]) {
                ++tau;
            }
            best = tau;
            break;
        }
    }
    if (best < 0) {
        best = tau_min;
        for (int tau = tau_min + 1; tau <= tau_max; ++tau) {
            if (cmnd[static_cast<std::size_t>(tau)] < cmnd[static_cast<std::size_t>(best)]) {
                best = tau;
            }
        }
    }

    out.confidence = std::clamp(1.0 - cmnd[static_cast<std::size_t>(best)], 0.0, 1.0);
    if (out.confidence < kVoicingConfidence) return out;

    // Parabolic interpolation around the dip.
    double tau_refined = best;
    if (best > 1 && best < tau_max) {
        const double y0 = cmnd[static_cast<std::size_t>(best - 1)];
        const double y1 = cmnd[static_cast<std::size_t>(best)];
        const double y2 = cmnd[static_cast<std::size_t>(best + 1)];
        const double denom = y0 - 2.0 * y1 + y2;
        if (std::abs(denom) > 1e-12) {
            const double delta = 0.5 * (y0 - y2) / denom;
            if (std::abs(delta) <= 1.0) tau_refined += delta;
        }
    }

    out.voiced = true;
    out.f0 = std::clamp(sr / tau_refined, kF0Min, kF0Max);
    return out;
}

}  // namespace

double PitchTrack::voiced_ratio() const {
    if (frames.empty()) return 0.0;
    std::size_t voiced = 0;
    for (const auto& f : frames) voiced += f.voiced ? 1 : 0;
    return static_cast<double>(voiced) / static_cast<double>(frames.size());
}

FinalSyllableWindow final_window(const AudioClip& clip) {
    validate(clip);
    const double total = clip.duration();
    return {std::max(0.0, total - kFinalWindowSeconds), total};
}

PitchTrack estimate_f0(const AudioClip& clip) {
    validate(clip);
    const int sr = clip.sample_rate;
    const int win = frame_samples(sr);
    const int hop = hop_samples(sr);
    const std::size_t n_frames = frame_count(clip.samples.size(), win, hop);
    if (n_frames == 0) {
        throw std::invalid_argument("estimate_f0: clip shorter than one window");
    }

    PitchTrack track;
    track.hop = static_cast<double>(hop) / sr;
    track.frames.resize(n_frames);
    for (std::size_t i = 0; i < n_frames; ++i) {
        const std::size_t start = i * static_cast<std::size_t>(hop);
        const FrameEstimate est = analyze_frame(clip.samples.data() + start, win, sr);
        auto& frame = track.frames[i];
        frame.time = (static_cast<double>(start) + 0.5 * win) / sr;
        frame.f0 = est.f0;
        frame.confidence = est.confidence;
        frame.voiced = est.voiced;
    }
    return track;
}

}  // namespace intonarank
