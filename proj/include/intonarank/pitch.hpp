#pragma once

#include <vector>

#include "intonarank/audio.hpp"

namespace intonarank {

struct PitchFrame {
    double time = 0.0;  // frame center, seconds
    double f0 = 0.0;    // Hz, 0 when unvoiced
    double confidence = 0.0;
    bool voiced = false;
};

struct PitchTrack {
    double hop = 0.0;  // seconds
    std::vector<PitchFrame> frames;

    double voiced_ratio() const;
};

// [max(0, T - 0.52), T]
struct FinalSyllableWindow {
    double start = 0.0;
    double end = 0.0;
};

FinalSyllableWindow final_window(const AudioClip& clip);

// Cumulative-mean normalized difference (YIN style) over 25 ms frames with a
// 10 ms hop, searched across 60-500 Hz with parabolic lag refinement. Frames
// whose peak confidence falls below 0.5 are unvoiced. Throws when the clip is
// shorter than one analysis window.
PitchTrack estimate_f0(const AudioClip& clip);

}  // namespace intonarank
