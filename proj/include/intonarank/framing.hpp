#pragma once

#include <cmath>
#include <cstddef>

namespace intonarank {

// 25 ms analysis windows on a 10 ms hop, used by pitch tracking, energy
// contours and the mel cepstra alike.
inline constexpr double kFrameSeconds = 0.025;
inline constexpr double kHopSeconds = 0.010;

// Suffix of the clip treated as the final syllable.
inline constexpr double kFinalWindowSeconds = 0.52;

inline int frame_samples(int sample_rate) {
    return static_cast<int>(std::lround(kFrameSeconds * sample_rate));
}

inline int hop_samples(int sample_rate) {
    return static_cast<int>(std::lround(kHopSeconds * sample_rate));
}

// Number of full frames that fit; 0 when the signal is shorter than one frame.
inline std::size_t frame_count(std::size_t n_samples, int win, int hop) {
    if (n_samples < static_cast<std::size_t>(win)) return 0;
    return (n_samples - static_cast<std::size_t>(win)) / static_cast<std::size_t>(hop) + 1;
}

}  // namespace intonarank
